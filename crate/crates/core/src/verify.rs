//! The invariant suite run by `treedim verify`.
//!
//! Each check produces a list of violations; the suite passes iff every list
//! is empty. Checks that would have to enumerate more than the node budget
//! say so in their note and cover a deterministic prefix of the work.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::config::LoadedFamily;
use crate::gales::{martingale_defect_bounded, vf_value};
use crate::oracle::{
    brute_balance, brute_martingale, brute_structure, brute_trees, brute_trees_factored,
};
use crate::rat::{format_rat, Rat};
use crate::structure::{Direction, ExponentFn};
use crate::treefam::{pow_nat, structural_violations, T0Variant, TreeError, TreeFamily, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Deepest word length the walks visit.
    pub depth: usize,
    /// Largest language the oracle enumerates.
    pub cap: u64,
    /// Most words any single walk visits.
    pub node_budget: u64,
}

impl VerifyOptions {
    pub fn new(depth: usize) -> Self {
        VerifyOptions {
            depth,
            cap: crate::oracle::DEFAULT_CAP,
            node_budget: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub violations: Vec<String>,
    /// Coverage remarks (skipped levels, truncated walks).
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        CheckResult {
            name,
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed() { "ok" } else { "FAIL" };
            writeln!(f, "{:<12} {}", c.name, status)?;
            for n in &c.notes {
                writeln!(f, "  note: {n}")?;
            }
            for v in &c.violations {
                writeln!(f, "  violation: {v}")?;
            }
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "verdict: {verdict}")
    }
}

/// Runs every check that applies to `loaded`.
pub fn run_suite(loaded: &LoadedFamily, opts: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport::default();
    let (params, fam) = parameter_checks(loaded);
    let params_ok = params.passed();
    report.checks.push(params);
    let fam = match fam {
        Some(f) if params_ok => f,
        _ => return report,
    };
    let ef = ExponentFn::new(&fam);
    report.checks.push(oracle_check(&fam, &ef, opts));
    report.checks.push(extension_check(&fam, opts));
    report.checks.push(symmetry_check(&fam, &ef, opts));
    report.checks.push(martingale_check(&ef, opts));
    report.checks.push(density_check(&ef));
    if let Some(c) = monotone_check(&fam, &ef) {
        report.checks.push(c);
    }
    report
}

/// Recurrences, claimed `q` values and agreement with a fresh derivation.
fn parameter_checks(loaded: &LoadedFamily) -> (CheckResult, Option<TreeFamily>) {
    let mut c = CheckResult::new("parameters");
    let derived = loaded.spec.as_ref().map(|s| s.derive());
    let levels = match (&loaded.listed, &derived) {
        (Some(listed), _) => {
            for (i, (q, lv)) in listed.iter().enumerate() {
                if !lv.ell.is_zero() && *q != lv.q() {
                    c.violations.push(format!(
                        "level {i}: claimed q = {} but k/ell = {}",
                        format_rat(q),
                        format_rat(&lv.q())
                    ));
                }
            }
            listed.iter().map(|(_, l)| l.clone()).collect::<Vec<_>>()
        }
        (None, Some(Ok(fam))) => fam.levels().to_vec(),
        (None, Some(Err(e))) => {
            c.violations.push(format!("derivation failed: {e}"));
            return (c, None);
        }
        (None, None) => {
            c.violations.push("no levels to check".into());
            return (c, None);
        }
    };
    for (i, msg) in structural_violations(&levels) {
        c.violations.push(format!("level {i}: {msg}"));
    }
    if let Some(spec) = &loaded.spec {
        for (i, lv) in levels.iter().enumerate() {
            if lv.ell.is_zero() {
                continue;
            }
            match spec.sequence.q_at(i as u64) {
                Ok(q) if q == lv.q() => {}
                Ok(q) => c.violations.push(format!(
                    "level {i}: k/ell = {} but the sequence gives {}",
                    format_rat(&lv.q()),
                    format_rat(&q)
                )),
                Err(e) => c.violations.push(format!("level {i}: {e}")),
            }
        }
        match &derived {
            Some(Ok(fam)) if loaded.listed.is_some() => {
                if fam.levels().len() != levels.len() {
                    c.violations.push(format!(
                        "{} levels listed, derivation gives {}",
                        levels.len(),
                        fam.levels().len()
                    ));
                }
                for (i, (a, b)) in levels.iter().zip(fam.levels()).enumerate() {
                    if a != b {
                        c.violations.push(format!(
                            "level {i}: listed parameters differ from derivation"
                        ));
                    }
                }
            }
            Some(Err(e)) => c.violations.push(format!("derivation failed: {e}")),
            _ => {}
        }
    }
    if !c.violations.is_empty() {
        return (c, None);
    }
    match TreeFamily::new(loaded.alphabet_size, loaded.t0_variant, levels) {
        Ok(fam) => (c, Some(fam)),
        Err(e) => {
            c.violations.push(e.to_string());
            (c, None)
        }
    }
}

/// Explicit enumeration against the recursive membership test, the
/// structure function and the martingale.
fn oracle_check(fam: &TreeFamily, ef: &ExponentFn<'_>, opts: &VerifyOptions) -> CheckResult {
    let mut c = CheckResult::new("oracle");
    let x = fam.alphabet_size();
    for i in 0..fam.levels().len() {
        let lang = match brute_trees(fam, i, opts.cap) {
            Ok(l) => l,
            Err(_) => {
                match brute_trees_factored(fam, i, opts.cap) {
                    Ok(f) => {
                        let counts = f.structure();
                        for (ell, count) in counts.iter().enumerate() {
                            let want = exponent_power(ef, x, ell);
                            if *count != want {
                                c.violations.push(format!(
                                    "level {i}: {count} prefixes of length {ell}, expected {want}"
                                ));
                            }
                        }
                        if f.size() != pow_nat(x, &fam.levels()[i].k) {
                            c.violations
                                .push(format!("level {i}: size {} != |X|^k", f.size()));
                        }
                        c.notes.push(format!(
                            "level {i}: counted as a product of {} explicit factors",
                            f.factors().len()
                        ));
                    }
                    Err(_) => c
                        .notes
                        .push(format!("level {i}: above the enumeration cap, skipped")),
                }
                continue;
            }
        };
        let size = BigUint::from(lang.len());
        if size != pow_nat(x, &fam.levels()[i].k) {
            c.violations
                .push(format!("level {i}: {size} words, expected |X|^k"));
        }
        match fam.enumerate_level(i, opts.cap) {
            Ok(words) => {
                let ours: Vec<Word> = lang.words().collect();
                if words != ours {
                    c.violations.push(format!(
                        "level {i}: recursive enumeration differs from the concatenation product"
                    ));
                }
            }
            Err(e) => c.violations.push(format!("level {i}: {e}")),
        }
        for (ell, count) in brute_structure(&lang).into_iter().enumerate() {
            let want = exponent_power(ef, x, ell);
            if BigUint::from(count) != want {
                c.violations.push(format!(
                    "level {i}: {count} prefixes of length {ell}, expected {want}"
                ));
            }
        }
        if !brute_balance(&lang) {
            c.violations
                .push(format!("level {i}: extension counts unbalanced"));
        }
        let v = brute_martingale(&lang);
        let stride = (v.len() as u64 / opts.node_budget.max(1)).max(1) as usize;
        if stride > 1 {
            c.notes.push(format!(
                "level {i}: martingale compared on every {stride}th of {} prefixes",
                v.len()
            ));
        }
        for (w, value) in v.iter().step_by(stride) {
            match vf_value(ef, w).map(|p| p.as_rational(x)) {
                Ok(Some(ours)) if ours == *value => {}
                Ok(ours) => c.violations.push(format!(
                    "V({w}) = {} by recursion, {} in closed form",
                    format_rat(value),
                    ours.map_or("irrational".into(), |r| format_rat(&r))
                )),
                Err(e) => c.violations.push(format!("V({w}): {e}")),
            }
        }
    }
    c
}

fn exponent_power(ef: &ExponentFn<'_>, x: u32, ell: usize) -> BigUint {
    match ef.exponent(&BigUint::from(ell)) {
        Ok(e) => pow_nat(x, &e),
        Err(_) => BigUint::zero(),
    }
}

/// Words up to length `l_i` are prefixes of `T_i` iff they are prefixes of
/// `T_{i+1}`.
fn extension_check(fam: &TreeFamily, opts: &VerifyOptions) -> CheckResult {
    let mut c = CheckResult::new("extension");
    let x = fam.alphabet_size();
    for i in 0..fam.last_level() {
        let ell_i = fam.levels()[i].ell.to_usize().unwrap_or(usize::MAX);
        let top = ell_i.min(opts.depth);
        // every word while the layer fits in the budget
        let mut layer = vec![Word::empty()];
        let mut full_to = 0;
        let mut visited = 0u64;
        for len in 0..=top {
            for w in &layer {
                compare_levels(fam, i, w, &mut c);
            }
            visited += layer.len() as u64;
            full_to = len;
            if len == top || visited + (layer.len() as u64) * u64::from(x) > opts.node_budget {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|w| (0..x).map(move |a| w.push(a as u8)))
                .collect();
        }
        if full_to < top {
            // past that, on-tree words and their off-tree children
            let mut seen = 0u64;
            let res = fam.walk_prefixes(top, |w, _| {
                if seen >= opts.node_budget {
                    return Err(Walk::Stop);
                }
                seen += 1;
                if w.len() > full_to {
                    compare_levels(fam, i, w, &mut c);
                }
                if w.len() < top {
                    for a in 0..x {
                        let child = w.push(a as u8);
                        if child.len() > full_to {
                            compare_levels(fam, i, &child, &mut c);
                        }
                    }
                }
                Ok(())
            });
            if let Err(Walk::Tree(e)) = res {
                c.violations.push(e.to_string());
            }
            c.notes.push(format!(
                "levels {i}/{}: all words to length {full_to}, then {seen} prefixes with their children up to length {top}",
                i + 1
            ));
        }
    }
    c
}

/// Early exit from a prefix walk.
enum Walk {
    Stop,
    Tree(TreeError),
}

impl From<TreeError> for Walk {
    fn from(e: TreeError) -> Self {
        Walk::Tree(e)
    }
}

fn compare_levels(fam: &TreeFamily, i: usize, w: &Word, c: &mut CheckResult) {
    match (fam.member_pref_at(i, w), fam.member_pref_at(i + 1, w)) {
        (Ok(a), Ok(b)) if a == b => {}
        (Ok(a), Ok(b)) => c.violations.push(format!(
            "{w}: prefix of T_{i} = {a}, prefix of T_{} = {b}",
            i + 1
        )),
        (Err(e), _) | (_, Err(e)) => c.violations.push(format!("{w}: {e}")),
    }
}

/// Every prefix branches to one letter or to all of them, the same way at
/// every node of a given depth, matching the structure function.
fn symmetry_check(fam: &TreeFamily, ef: &ExponentFn<'_>, opts: &VerifyOptions) -> CheckResult {
    let mut c = CheckResult::new("symmetry");
    let last = fam.ell_last().to_usize().unwrap_or(usize::MAX);
    let depth = opts.depth.min(last.saturating_sub(1));
    let mut fanout: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen = 0u64;
    let mut truncated = false;
    let res = fam.walk_prefixes(depth, |w, succ| {
        if seen >= opts.node_budget {
            truncated = true;
            return Err(Walk::Stop);
        }
        seen += 1;
        if w.len() >= last {
            return Ok(());
        }
        match fanout.get(&w.len()) {
            None => {
                fanout.insert(w.len(), succ.len());
            }
            Some(&n) if n != succ.len() => c.violations.push(format!(
                "{w}: {} successors, other words of length {} have {n}",
                succ.len(),
                w.len()
            )),
            Some(_) => {}
        }
        Ok(())
    });
    if let Err(Walk::Tree(e)) = res {
        c.violations.push(e.to_string());
    }
    for (&len, &n) in &fanout {
        let (Ok(a), Ok(b)) = (ef.exponent_u64(len as u64), ef.exponent_u64(len as u64 + 1)) else {
            continue;
        };
        let want = pow_nat(fam.alphabet_size(), &(b - a));
        if BigUint::from(n) != want {
            c.violations.push(format!(
                "length {len}: fan-out {n}, structure function implies {want}"
            ));
        }
    }
    if truncated {
        c.notes.push(format!("walk stopped after {seen} prefixes"));
    }
    c
}

fn martingale_check(ef: &ExponentFn<'_>, opts: &VerifyOptions) -> CheckResult {
    let mut c = CheckResult::new("martingale");
    let last = ef.family().ell_last().to_usize().unwrap_or(usize::MAX);
    let depth = opts.depth.min(last.saturating_sub(1));
    match martingale_defect_bounded(ef, depth, Some(opts.node_budget)) {
        Ok((v, visited)) => {
            c.violations.extend(v.iter().map(|m| m.to_string()));
            if visited >= opts.node_budget {
                c.notes
                    .push(format!("walk stopped after {visited} prefixes"));
            }
        }
        Err(e) => c.violations.push(e.to_string()),
    }
    c
}

fn density_check(ef: &ExponentFn<'_>) -> CheckResult {
    let mut c = CheckResult::new("density");
    let fam = ef.family();
    for (i, lv) in fam.levels().iter().enumerate() {
        match ef.density(&lv.ell) {
            Ok(d) if d == lv.q() => {}
            Ok(d) => c.violations.push(format!(
                "level {i}: density {} at the block boundary, q = {}",
                format_rat(&d),
                format_rat(&lv.q())
            )),
            Err(e) => c.violations.push(e.to_string()),
        }
    }
    for i in 0..fam.last_level() {
        match ef.check_bounds(i) {
            Ok(cert) => {
                c.violations
                    .extend(cert.violations.iter().map(|v| format!("level {i}: {v}")));
                if !cert.exhaustive {
                    c.notes.push(format!("level {i}: sampled"));
                }
            }
            Err(e) => c.violations.push(e.to_string()),
        }
    }
    c
}

/// For strictly monotone families with the matching padding: the density
/// never crosses the last term.
fn monotone_check(fam: &TreeFamily, ef: &ExponentFn<'_>) -> Option<CheckResult> {
    let qs: Vec<Rat> = fam.levels().iter().map(|l| l.q()).collect();
    if qs.len() < 2 {
        return None;
    }
    let direction = if qs.windows(2).all(|w| w[1] < w[0]) {
        Direction::Decreasing
    } else if qs.windows(2).all(|w| w[1] > w[0]) {
        Direction::Increasing
    } else {
        return None;
    };
    let variant = match direction {
        Direction::Decreasing => T0Variant::SuffixPad,
        Direction::Increasing => T0Variant::PrefixPad,
    };
    if fam.t0_variant() != variant {
        return None;
    }
    let mut c = CheckResult::new("monotone");
    let alpha = qs.last().unwrap().clone();
    match ef.monotone_check(direction, &alpha, fam.ell_last()) {
        Ok(r) => {
            let seen: HashSet<_> = r.violations.iter().collect();
            c.violations.extend(
                seen.into_iter()
                    .map(|l| format!("density at length {l} crosses {}", format_rat(&alpha))),
            );
            c.violations.sort();
            if !r.exhaustive {
                c.notes.push(format!("{} lengths sampled", r.checked));
            }
        }
        Err(e) => c.violations.push(e.to_string()),
    }
    Some(c)
}
