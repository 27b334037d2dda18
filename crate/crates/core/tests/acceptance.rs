//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Every comparison is exact. Expected counts and ratios are recomputed here
//! from first principles (explicit languages, direct arithmetic on the level
//! parameters) rather than read back from the code under test.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treedim::config::FamilyDoc;
use treedim::derivation::{
    bound_chain_holds, derive_family, derive_level, Appendix, GrowthPolicy,
};
use treedim::gales::{
    all_words_up_to, cut_point, gale_from_martingale, martingale_defect_bounded,
    prefix_domain, supergale_check, supergale_check_at, vf_value, witness_exponents, CutPoint,
    GaleTable,
};
use treedim::oracle::{
    brute_balance, brute_martingale, brute_structure, brute_trees, brute_trees_factored,
    DEFAULT_CAP,
};
use treedim::power::Scaled;
use treedim::rat::{nat_ratio, rat, rat_from_nat, Rat};
use treedim::sequences::QSequence;
use treedim::structure::ExponentFn;
use treedim::treefam::{T0Variant, TreeFamily, Word};

/// Criterion 1 must finish within this.
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(5);
/// Whole run, including the command-line checks.
const SUITE_TIME_LIMIT: Duration = Duration::from_secs(60);
/// Prefixes a single exhaustive walk may visit before it is declared
/// incomplete.
const WALK_BUDGET: u64 = 300_000;
/// Random root-to-leaf paths added on families too large to walk.
const RANDOM_PATHS: usize = 2_000;

type Criterion = Box<dyn Fn() -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn explicit(q: &[Rat], variant: T0Variant) -> TreeFamily {
    derive_family(
        &QSequence::explicit(q.to_vec()),
        q.len() - 1,
        &GrowthPolicy::trivial(),
        variant,
        2,
    )
    .unwrap()
}

fn family_a() -> TreeFamily {
    explicit(&[rat(1, 2), rat(1, 3)], T0Variant::SuffixPad)
}

fn family_b() -> TreeFamily {
    explicit(&[rat(1, 3), rat(1, 2)], T0Variant::PrefixPad)
}

fn three_term() -> TreeFamily {
    explicit(&[rat(1, 2), rat(1, 3), rat(2, 5)], T0Variant::SuffixPad)
}

fn decreasing() -> TreeFamily {
    explicit(&[rat(1, 2), rat(1, 3), rat(1, 4)], T0Variant::SuffixPad)
}

fn increasing() -> TreeFamily {
    explicit(&[rat(1, 4), rat(1, 3), rat(1, 2)], T0Variant::PrefixPad)
}

/// Six levels of `q_i = 1/2 + (-1)^i / (i + 3)` under the default policy.
fn oscillating() -> TreeFamily {
    let seq = QSequence::alternating(rat(1, 2), rat(1, 1), 3).unwrap();
    derive_family(&seq, 5, &GrowthPolicy::default(), T0Variant::SuffixPad, 2).unwrap()
}

fn test_families() -> Vec<(&'static str, TreeFamily)> {
    vec![("A", family_a()), ("B", family_b()), ("three-term", three_term())]
}

fn pow2(e: &BigUint) -> BigUint {
    BigUint::one() << e.to_usize().unwrap()
}

fn usize_of(n: &BigUint) -> usize {
    n.to_usize().unwrap()
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (name, fam) in test_families() {
        let ef = ExponentFn::new(&fam);
        for (i, lv) in fam.levels().iter().enumerate() {
            let want_size = pow2(&lv.k);
            let counts: Vec<BigUint> = match brute_trees(&fam, i, DEFAULT_CAP) {
                Ok(lang) => {
                    if BigUint::from(lang.len()) != want_size {
                        return outcome(false, format!("{name} T_{i}: {} words", lang.len()));
                    }
                    brute_structure(&lang).into_iter().map(BigUint::from).collect()
                }
                Err(_) => {
                    let f = brute_trees_factored(&fam, i, DEFAULT_CAP).unwrap();
                    if f.size() != want_size {
                        return outcome(false, format!("{name} T_{i}: {} words", f.size()));
                    }
                    notes.push(format!("{name} T_{i} counted as a product"));
                    f.structure()
                }
            };
            if counts.len() != usize_of(&lv.ell) + 1 {
                return outcome(false, format!("{name} T_{i}: wrong word length"));
            }
            for (ell, count) in counts.iter().enumerate() {
                let e = ef.exponent_u64(ell as u64).unwrap();
                if *count != pow2(&e) {
                    return outcome(
                        false,
                        format!("{name} T_{i}: s({ell}) = {count}, |X|^e = 2^{e}"),
                    );
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = elapsed < ORACLE_TIME_LIMIT;
    outcome(
        pass,
        format!(
            "A, B, three-term: sizes and prefix counts exact at every length up to l_last; {}; {:.2?} (limit {:?})",
            notes.join(", "),
            elapsed,
            ORACLE_TIME_LIMIT
        ),
    )
}

// ---------------------------------------------------------------------------

fn random_q(rng: &mut ChaCha8Rng) -> Rat {
    let den = rng.gen_range(2..=50i64);
    let num = rng.gen_range(1..den);
    rat(num, den)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut checked = 0;
    let mut chains = 0;
    while checked < 200 {
        let q = random_q(&mut rng);
        let q_next = random_q(&mut rng);
        if q == q_next {
            continue;
        }
        let mult = BigUint::from(rng.gen_range(1..=3u32));
        let k = q.numer().to_biguint().unwrap() * &mult;
        let ell = q.denom().to_biguint().unwrap() * &mult;
        let scale = BigUint::from(rng.gen_range(1..=3u32));
        let d = match derive_level(&q, &q_next, &k, &ell, &scale) {
            Ok(d) => d,
            Err(e) => return outcome(false, format!("{q} -> {q_next}: {e}")),
        };
        let s = &d.step;
        // recompute the next block from the step alone
        let ell_next = (&s.r + &s.p) * &ell;
        let k_next = &s.r * &k + &s.kappa * &ell;
        if ell_next != d.ell_next || k_next != d.k_next {
            return outcome(false, format!("{q} -> {q_next}: block recurrence broken"));
        }
        if nat_ratio(&k_next, &ell_next) != q_next {
            return outcome(false, format!("{q} -> {q_next}: k'/l' != q'"));
        }
        let split_ok = if q_next < q {
            s.kappa.is_zero() && s.appendix == Appendix::Singleton
        } else {
            s.kappa == s.p && s.appendix == Appendix::Full
        };
        if !split_ok {
            return outcome(false, format!("{q} -> {q_next}: wrong kappa case"));
        }
        let span = &s.p * &ell;
        for t in [BigUint::zero(), &span / 2u32, span.clone()] {
            // density of the prefix of length r*l + t, straight from the counts
            let e = match s.appendix {
                Appendix::Singleton => &s.r * &k,
                Appendix::Full => &s.r * &k + &t,
            };
            let v = nat_ratio(&e, &(&s.r * &ell + &t));
            let (lo, hi) = if q < q_next {
                (&q, &q_next)
            } else {
                (&q_next, &q)
            };
            let direct = *lo <= v && v <= *hi;
            let lib = bound_chain_holds(&q, &q_next, &k, &ell, s, &t);
            if !direct || !lib {
                return outcome(false, format!("{q} -> {q_next}: bound chain fails at t={t}"));
            }
            chains += 1;
        }
        checked += 1;
    }
    outcome(
        true,
        format!("200 seeded pairs, denominators <= 50, scales 1..=3; {chains} bound chains"),
    )
}

// ---------------------------------------------------------------------------

/// Total number of prefixes of length `0..=depth`.
fn prefix_total(ef: &ExponentFn<'_>, depth: usize) -> BigUint {
    (0..=depth)
        .map(|l| pow2(&ef.exponent_u64(l as u64).unwrap()))
        .sum()
}

struct WalkResult {
    visited: u64,
    complete: bool,
    failures: Vec<String>,
}

/// Depth-first walk over every prefix shorter than `l_last`, applying `check`
/// to each, until the budget runs out.
fn walk_all<F>(fam: &TreeFamily, mut check: F) -> WalkResult
where
    F: FnMut(&Word, &[u8]) -> Option<String>,
{
    let depth = usize_of(fam.ell_last()) - 1;
    let mut visited = 0u64;
    let mut failures = Vec::new();
    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        if visited >= WALK_BUDGET {
            return WalkResult {
                visited,
                complete: false,
                failures,
            };
        }
        visited += 1;
        let succ = match fam.successors(&w) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{w}: {e}"));
                continue;
            }
        };
        if let Some(f) = check(&w, &succ) {
            failures.push(f);
        }
        if w.len() < depth {
            for &x in succ.iter().rev() {
                stack.push(w.push(x));
            }
        }
    }
    WalkResult {
        visited,
        complete: true,
        failures,
    }
}

/// Seeded random descents from the root to length `l_last - 1`.
fn random_paths<F>(fam: &TreeFamily, seed: u64, mut check: F) -> (usize, Vec<String>)
where
    F: FnMut(&Word, &[u8]) -> Option<String>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = usize_of(fam.ell_last());
    let mut failures = Vec::new();
    let mut nodes = 0;
    for _ in 0..RANDOM_PATHS {
        let mut w = Word::empty();
        while w.len() < depth {
            let succ = match fam.successors(&w) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("{w}: {e}"));
                    break;
                }
            };
            nodes += 1;
            if let Some(f) = check(&w, &succ) {
                failures.push(f);
            }
            w = w.push(succ[rng.gen_range(0..succ.len())]);
        }
    }
    (nodes, failures)
}

fn symmetry_checker<'a>(
    fam: &'a TreeFamily,
    ef: &'a ExponentFn<'a>,
) -> impl FnMut(&Word, &[u8]) -> Option<String> + 'a {
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    move |w, succ| {
        let x = fam.alphabet_size() as usize;
        if succ.len() != 1 && succ.len() != x {
            return Some(format!("{w}: {} successors", succ.len()));
        }
        let n = *seen.entry(w.len()).or_insert(succ.len());
        if n != succ.len() {
            return Some(format!("{w}: fan-out differs from other words of its length"));
        }
        let a = ef.exponent_u64(w.len() as u64).unwrap();
        let b = ef.exponent_u64(w.len() as u64 + 1).unwrap();
        let want = if b > a { x } else { 1 };
        (succ.len() != want).then(|| format!("{w}: fan-out {} != {want}", succ.len()))
    }
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (seed, (name, fam)) in test_families().into_iter().enumerate() {
        let ef = ExponentFn::new(&fam);
        let walk = walk_all(&fam, symmetry_checker(&fam, &ef));
        let total = prefix_total(&ef, usize_of(fam.ell_last()) - 1);
        if !walk.failures.is_empty() {
            return outcome(false, format!("{name}: {}", walk.failures[0]));
        }
        if walk.complete {
            parts.push(format!("{name}: all {} prefixes", walk.visited));
        } else {
            pass = false;
            let (nodes, fails) = random_paths(&fam, 0x3000 + seed as u64, symmetry_checker(&fam, &ef));
            if !fails.is_empty() {
                return outcome(false, format!("{name}: {}", fails[0]));
            }
            parts.push(format!(
                "{name}: INCOMPLETE, {} of {total} prefixes walked, plus {nodes} nodes on {RANDOM_PATHS} random paths (no violation)",
                walk.visited
            ));
        }
        // balance on every level small enough to write out
        for i in 0..fam.levels().len() {
            match brute_trees(&fam, i, DEFAULT_CAP) {
                Ok(lang) => {
                    if !brute_balance(&lang) {
                        return outcome(false, format!("{name} T_{i} unbalanced"));
                    }
                }
                Err(_) => {
                    pass = false;
                    parts.push(format!("{name}: balance of T_{i} not enumerable"));
                }
            }
        }
        // extension property for every word up to l_1
        let ell1 = usize_of(&fam.levels()[1].ell);
        for w in all_words_up_to(2, ell1) {
            for i in 0..fam.last_level() {
                if w.len() as u64 > fam.levels()[i].ell.to_u64().unwrap() {
                    continue;
                }
                let a = fam.member_pref_at(i, &w).unwrap();
                let b = fam.member_pref_at(i + 1, &w).unwrap();
                if a != b {
                    return outcome(false, format!("{name}: extension fails at {w}, level {i}"));
                }
            }
        }
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (seed, (name, fam)) in test_families().into_iter().enumerate() {
        let ef = ExponentFn::new(&fam);
        let depth = usize_of(fam.ell_last()) - 1;
        let (viol, visited) = martingale_defect_bounded(&ef, depth, Some(WALK_BUDGET)).unwrap();
        if !viol.is_empty() {
            return outcome(false, format!("{name}: {}", viol[0]));
        }
        let total = prefix_total(&ef, depth);
        if BigUint::from(visited) < total {
            pass = false;
            // random descents checking the identity node by node
            let x = Rat::from_integer(BigInt::from(2));
            let val = |w: &Word| vf_value(&ef, w).unwrap().as_rational(2).unwrap();
            let (nodes, fails) = random_paths(&fam, 0x4000 + seed as u64, |w, _| {
                let sum = val(&w.push(0)) + val(&w.push(1));
                (sum != &x * val(w)).then(|| format!("{w}: identity fails"))
            });
            if !fails.is_empty() {
                return outcome(false, format!("{name}: {}", fails[0]));
            }
            parts.push(format!(
                "{name}: INCOMPLETE, identity checked on {visited} of {total} prefixes, plus {nodes} nodes on random paths"
            ));
        } else {
            parts.push(format!("{name}: identity on all {visited} prefixes"));
        }
        // recursion on explicit languages versus the closed form
        let mut compared = 0usize;
        for i in 0..fam.levels().len() {
            let Ok(lang) = brute_trees(&fam, i, DEFAULT_CAP) else {
                continue;
            };
            for (w, v) in brute_martingale(&lang) {
                let ours = vf_value(&ef, &w).unwrap().as_rational(2).unwrap();
                if ours != v {
                    return outcome(false, format!("{name}: V({w}) {ours} != {v}"));
                }
                compared += 1;
            }
        }
        parts.push(format!("{name}: {compared} on-tree values match the recursion"));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let fams = vec![
        ("A", family_a()),
        ("B", family_b()),
        ("three-term", three_term()),
        ("decreasing", decreasing()),
        ("increasing", increasing()),
        ("oscillating", oscillating()),
    ];
    let mut sampled = Vec::new();
    for (name, fam) in &fams {
        let ef = ExponentFn::new(fam);
        for (i, lv) in fam.levels().iter().enumerate() {
            if ef.density(&lv.ell).unwrap() != lv.q() {
                return outcome(false, format!("{name}: density at l_{i} != q_{i}"));
            }
        }
        for i in 0..fam.last_level() {
            let cert = ef.check_bounds(i).unwrap();
            if !cert.holds() {
                return outcome(
                    false,
                    format!("{name} level {i}: {}", cert.violations[0]),
                );
            }
            if !cert.exhaustive {
                sampled.push(format!("{name}/{i}"));
            }
        }
    }
    let a = family_a();
    let b = family_b();
    let da = ExponentFn::new(&a).density_u64(6).unwrap();
    let db = ExponentFn::new(&b).density_u64(12).unwrap();
    let pass = da == rat(1, 3) && db == rat(1, 2);
    outcome(
        pass,
        format!(
            "certificates hold on 6 families (sampled segments: {}); density_A(6) = {da}, density_B(12) = {db}",
            if sampled.is_empty() { "none".into() } else { sampled.join(", ") }
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let dec = decreasing();
    let ef = ExponentFn::new(&dec);
    let top = usize_of(&dec.levels()[2].ell);
    for l in 1..=top as u64 {
        if ef.density_u64(l).unwrap() < rat(1, 4) {
            return outcome(false, format!("decreasing: density below 1/4 at {l}"));
        }
    }
    let inc = increasing();
    let ef2 = ExponentFn::new(&inc);
    let top2 = usize_of(&inc.levels()[2].ell);
    for l in 1..=top2 as u64 {
        if ef2.density_u64(l).unwrap() > rat(1, 2) {
            return outcome(false, format!("increasing: density above 1/2 at {l}"));
        }
    }
    outcome(
        true,
        format!("decreasing: e(l)/l >= 1/4 for l <= {top}; increasing: e(l)/l <= 1/2 for l <= {top2}"),
    )
}

// ---------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let fam = oscillating();
    let levels = fam.levels();
    for (i, lv) in levels.iter().enumerate() {
        if lv.ell < BigUint::from(i * i) {
            return outcome(false, format!("l_{i} = {} < {}", lv.ell, i * i));
        }
        if let Some(next) = levels.get(i + 1) {
            if next.ell < &lv.ell * BigUint::from(i + 1) {
                return outcome(false, format!("l_{} / l_{i} < {}", i + 1, i + 1));
            }
        }
    }
    let ells: Vec<String> = levels.iter().map(|l| l.ell.to_string()).collect();
    outcome(true, format!("{} levels, l = [{}]", levels.len(), ells.join(", ")))
}

// ---------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let words = all_words_up_to(2, 2);
    let values = words
        .iter()
        .map(|w| (w.clone(), Scaled::rational(rat(1, 1))))
        .collect();
    let constant = GaleTable::new(None, 2, values).unwrap();
    let chi_const = cut_point(&constant, 32).unwrap();
    let sg_const = supergale_check_at(&constant, &rat(1, 1));

    let a = family_a();
    let ef = ExponentFn::new(&a);
    let dom = prefix_domain(&a, 6).unwrap();
    let gale = gale_from_martingale(|w| vf_value(&ef, w), &rat(1, 2), 2, &dom).unwrap();
    let chi_gale = cut_point(&gale, 32).unwrap();
    let sg_gale = supergale_check(&gale).unwrap();

    let pass = chi_const == CutPoint::Exact(rat(1, 1))
        && chi_gale == CutPoint::Exact(rat(1, 2))
        && sg_const.holds()
        && sg_gale.holds()
        && sg_gale.missing_children.is_empty();
    outcome(
        pass,
        format!(
            "constant table: chi = {chi_const}, supergale violations {}; sigma=1/2 gale of family A to depth 6: chi = {chi_gale}, violations {}",
            sg_const.violations.len(),
            sg_gale.violations.len()
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let fam = oscillating();
    let ef = ExponentFn::new(&fam);
    let seq = QSequence::alternating(rat(1, 2), rat(1, 1), 3).unwrap();
    let sigma = rat(1, 2);
    let last = fam.last_level();
    let mut flagged = 0;
    for alpha in [rat(1, 2), rat(3, 5), rat(4, 5)] {
        let recs = witness_exponents(&ef, &sigma, &alpha, 0..=last).unwrap();
        let mut prev: Option<Rat> = None;
        for r in &recs {
            let q = seq.q_at(r.level as u64).unwrap();
            let ell = rat_from_nat(&r.ell);
            if r.q != q {
                return outcome(false, format!("level {}: q mismatch", r.level));
            }
            if r.thm2_exponent != (&sigma - &q) * &ell {
                return outcome(false, format!("level {}: sigma exponent", r.level));
            }
            if q < sigma {
                if r.thm2_exponent <= Rat::zero() {
                    return outcome(false, format!("level {}: exponent not positive", r.level));
                }
                if prev.as_ref().is_some_and(|p| r.thm2_exponent <= *p) {
                    return outcome(false, format!("level {}: exponent not increasing", r.level));
                }
                prev = Some(r.thm2_exponent.clone());
            }
            if r.borderline_exponent != (&alpha - &q) * &ell {
                return outcome(false, format!("level {}: borderline exponent", r.level));
            }
            let flag =
                r.level > 0 && &alpha - &q > Rat::new(BigInt::one(), BigInt::from(r.level));
            if r.scan_flag != flag {
                return outcome(false, format!("level {}: scan flag", r.level));
            }
            if flag {
                flagged += 1;
                let need = &ell / Rat::from_integer(BigInt::from(r.level));
                if r.borderline_exponent < need || r.bound_holds != Some(true) {
                    return outcome(false, format!("level {}: exponent below l/i", r.level));
                }
            }
        }
    }
    outcome(
        true,
        format!("6-level oscillating family, sigma = 1/2, alpha_hat in {{1/2, 3/5, 4/5}}: {flagged} flagged levels, all with exponent >= l_i/i"),
    )
}

// ---------------------------------------------------------------------------

fn treedim(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_treedim"))
        .args(args)
        .output()
        .expect("run treedim")
        .status
        .code()
        .unwrap_or(-1)
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    out.sort();
    out
}

fn criterion_10(suite_start: Instant) -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut clean = 0;
    let mut corrupted = 0;
    for cfg in configs() {
        let cfg_s = cfg.to_str().unwrap();
        if treedim(&["verify", "--config", cfg_s, "--depth", "64"]) != 0 {
            return outcome(false, format!("verify fails on {}", cfg.display()));
        }
        clean += 1;
        let derived = tmp.path().join("derived.toml");
        if treedim(&["derive", "--config", cfg_s, "--out", derived.to_str().unwrap()]) != 0 {
            return outcome(false, format!("derive fails on {}", cfg.display()));
        }
        let doc = FamilyDoc::load(&derived).unwrap();
        let bump = |s: &str| (s.parse::<BigUint>().unwrap() + 1u32).to_string();
        for i in 0..doc.levels.len() {
            let mut edits: Vec<(&str, FamilyDoc)> = Vec::new();
            let mut d = doc.clone();
            d.levels[i].q = {
                let q = treedim::rat::parse_rat(&d.levels[i].q).unwrap();
                treedim::rat::format_rat(&(q / Rat::from_integer(BigInt::from(2))))
            };
            edits.push(("q", d));
            let mut d = doc.clone();
            d.levels[i].k = bump(&d.levels[i].k);
            edits.push(("k", d));
            let mut d = doc.clone();
            d.levels[i].ell = bump(&d.levels[i].ell);
            edits.push(("ell", d));
            if doc.levels[i].r.is_some() {
                let mut d = doc.clone();
                d.levels[i].r = d.levels[i].r.as_deref().map(bump);
                edits.push(("r", d));
                let mut d = doc.clone();
                d.levels[i].p = d.levels[i].p.as_deref().map(bump);
                edits.push(("p", d));
                let mut d = doc.clone();
                d.levels[i].kappa = d.levels[i].kappa.as_deref().map(bump);
                edits.push(("kappa", d));
                let mut d = doc.clone();
                d.levels[i].appendix = d.levels[i].appendix.map(|a| match a {
                    Appendix::Full => Appendix::Singleton,
                    Appendix::Singleton => Appendix::Full,
                });
                edits.push(("appendix", d));
            }
            for (field, d) in edits {
                let path = tmp.path().join("corrupt.toml");
                std::fs::write(&path, d.to_toml()).unwrap();
                let code = treedim(&["verify", "--config", path.to_str().unwrap(), "--depth", "64"]);
                if code != 1 {
                    return outcome(
                        false,
                        format!("{}: corrupting level {i} {field} gave exit {code}", cfg.display()),
                    );
                }
                corrupted += 1;
            }
        }
    }
    // repeated runs give identical bytes
    let a = Command::new(env!("CARGO_BIN_EXE_treedim"))
        .args(["derive", "--config", configs()[0].to_str().unwrap()])
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_treedim"))
        .args(["derive", "--config", configs()[0].to_str().unwrap()])
        .output()
        .unwrap();
    if a.stdout != b.stdout {
        return outcome(false, "derive output not deterministic");
    }
    let elapsed = suite_start.elapsed();
    outcome(
        elapsed < SUITE_TIME_LIMIT,
        format!(
            "{clean} shipped configs verify cleanly; {corrupted} single-parameter corruptions all exit 1; suite time {:.1?} (limit {:?})",
            elapsed, SUITE_TIME_LIMIT
        ),
    )
}

fn main() {
    let start = Instant::now();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("oracle equivalence", Box::new(criterion_1)),
        ("block derivation identities", Box::new(criterion_2)),
        ("spherical symmetry and balance", Box::new(criterion_3)),
        ("martingale identity", Box::new(criterion_4)),
        ("density bounds", Box::new(criterion_5)),
        ("monotone bounds", Box::new(criterion_6)),
        ("growth policy", Box::new(criterion_7)),
        ("cut points", Box::new(criterion_8)),
        ("witness exponents", Box::new(criterion_9)),
        ("command line end to end", Box::new(move || criterion_10(start))),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{status}] {name} ({:.2?}): {}",
            n + 1,
            t.elapsed(),
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed, {:.1?}",
        criteria.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
