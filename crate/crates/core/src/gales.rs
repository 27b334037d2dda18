//! The martingale `V_F`, the σ-gales derived from it, supergale checks, cut
//! points and the witness exponents along the levels.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::power::{LogValue, PowSum, Radix, Scaled};
use crate::rat::{format_rat, rat_from_nat, rat_pow, Rat};
use crate::structure::{ExponentFn, StructureError};
use crate::treefam::{TreeError, TreeFamily, Word};

/// Default cut-point bracket width is `2^-DEFAULT_PRECISION`.
pub const DEFAULT_PRECISION: usize = 32;

#[derive(Debug, Error)]
pub enum GaleError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("depth {depth} must be below the last block length {ell_last}")]
    DepthTooLarge { depth: usize, ell_last: BigUint },
    #[error("domain is not prefix-closed: {0} present without its parent")]
    NotPrefixClosed(Word),
    #[error("negative value at {0}")]
    NegativeValue(Word),
    #[error("sigma {} outside [0,1]", format_rat(.0))]
    SigmaOutOfRange(Rat),
    #[error("table carries no sigma")]
    MissingSigma,
    #[error("table has no non-leaf node with positive value")]
    EmptyTable,
    #[error("cut point is infinite: {0} has value 0 but a positive child")]
    InfiniteCutPoint(Word),
    #[error("level {0} is not materialized")]
    LevelOutOfRange(usize),
    #[error("{0} must lie strictly between 0 and 1")]
    ParameterOutOfRange(&'static str),
}

/// `|X|^exponent`, or zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PowerValue {
    Zero,
    Power(Rat),
}

impl PowerValue {
    pub fn one() -> Self {
        PowerValue::Power(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PowerValue::Zero)
    }

    pub fn exponent(&self) -> Option<&Rat> {
        match self {
            PowerValue::Zero => None,
            PowerValue::Power(e) => Some(e),
        }
    }

    pub fn mul(&self, other: &PowerValue) -> PowerValue {
        match (self, other) {
            (PowerValue::Power(a), PowerValue::Power(b)) => PowerValue::Power(a + b),
            _ => PowerValue::Zero,
        }
    }

    /// Multiplies by `|X|^e`.
    pub fn shift(&self, e: &Rat) -> PowerValue {
        match self {
            PowerValue::Zero => PowerValue::Zero,
            PowerValue::Power(a) => PowerValue::Power(a + e),
        }
    }

    /// The value as a rational, when the exponent is an integer.
    pub fn as_rational(&self, base: u32) -> Option<Rat> {
        match self {
            PowerValue::Zero => Some(Rat::zero()),
            PowerValue::Power(e) if e.is_integer() => Some(rat_pow(
                &Rat::from_integer(BigInt::from(base)),
                &e.to_integer(),
            )),
            PowerValue::Power(_) => None,
        }
    }

    pub fn to_scaled(&self, base: u32) -> Scaled {
        match self {
            PowerValue::Zero => Scaled::zero(),
            PowerValue::Power(e) => Scaled::new(Rat::one(), e.clone(), base),
        }
    }
}

impl PartialOrd for PowerValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PowerValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PowerValue::Zero, PowerValue::Zero) => Ordering::Equal,
            (PowerValue::Zero, _) => Ordering::Less,
            (_, PowerValue::Zero) => Ordering::Greater,
            (PowerValue::Power(a), PowerValue::Power(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for PowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerValue::Zero => write!(f, "0"),
            PowerValue::Power(e) => write!(f, "X^{}", format_rat(e)),
        }
    }
}

/// `V_F(w) = |X|^(|w| - e(|w|))` on `pref(F)`, zero elsewhere.
pub fn vf_value(ef: &ExponentFn<'_>, w: &Word) -> Result<PowerValue, GaleError> {
    let fam = ef.family();
    let len = BigUint::from(w.len());
    if len > *fam.ell_last() {
        return Err(TreeError::TooDeep {
            len,
            max: fam.ell_last().clone(),
        }
        .into());
    }
    if !fam.member_pref(w)? {
        return Ok(PowerValue::Zero);
    }
    let e = ef.exponent(&len)?;
    Ok(PowerValue::Power(rat_from_nat(&len) - rat_from_nat(&e)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingaleViolation {
    pub word: Word,
    /// `|X| V(w)`.
    pub expected: Rat,
    /// `Σ_x V(wx)`.
    pub actual: Rat,
}

impl fmt::Display for MartingaleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: children sum to {}, expected {}",
            self.word,
            format_rat(&self.actual),
            format_rat(&self.expected)
        )
    }
}

/// Checks `Σ_x V_F(wx) = |X| V_F(w)` for every `w ∈ pref(F)`, `|w| <= depth`.
pub fn martingale_defect(
    ef: &ExponentFn<'_>,
    depth: usize,
) -> Result<Vec<MartingaleViolation>, GaleError> {
    martingale_defect_bounded(ef, depth, None).map(|(v, _)| v)
}

/// As [`martingale_defect`], visiting at most `node_budget` words (in
/// depth-first order) when a budget is given. Returns the violations and the
/// number of words visited.
pub fn martingale_defect_bounded(
    ef: &ExponentFn<'_>,
    depth: usize,
    node_budget: Option<u64>,
) -> Result<(Vec<MartingaleViolation>, u64), GaleError> {
    let fam = ef.family();
    if BigUint::from(depth) >= *fam.ell_last() {
        return Err(GaleError::DepthTooLarge {
            depth,
            ell_last: fam.ell_last().clone(),
        });
    }
    let base = fam.alphabet_size();
    let x = Rat::from_integer(BigInt::from(base));
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        if node_budget.is_some_and(|b| visited >= b) {
            break;
        }
        visited += 1;
        let v = vf_value(ef, &w)?;
        let v = v.as_rational(base).expect("integral exponent");
        if v.is_zero() {
            continue;
        }
        let mut sum = Rat::zero();
        let mut on_tree = Vec::new();
        for letter in 0..base {
            let child = w.push(letter as u8);
            let cv = vf_value(ef, &child)?;
            if !cv.is_zero() {
                on_tree.push(child);
            }
            sum += cv.as_rational(base).expect("integral exponent");
        }
        let expected = &x * &v;
        if sum != expected {
            out.push(MartingaleViolation {
                word: w.clone(),
                expected,
                actual: sum,
            });
        }
        if w.len() < depth {
            stack.extend(on_tree.into_iter().rev());
        }
    }
    Ok((out, visited))
}

/// Finite table of gale values on a prefix-closed domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaleTable {
    sigma: Option<Rat>,
    alphabet_size: u32,
    values: BTreeMap<Word, Scaled>,
}

impl GaleTable {
    pub fn new(
        sigma: Option<Rat>,
        alphabet_size: u32,
        values: BTreeMap<Word, Scaled>,
    ) -> Result<Self, GaleError> {
        if !(2..=256).contains(&alphabet_size) {
            return Err(TreeError::InvalidAlphabet(alphabet_size).into());
        }
        if let Some(s) = &sigma {
            check_sigma(s)?;
        }
        for (w, v) in &values {
            if v.coef.is_negative() {
                return Err(GaleError::NegativeValue(w.clone()));
            }
            if w.letters().iter().any(|&x| u32::from(x) >= alphabet_size) {
                return Err(TreeError::InvalidLetter {
                    letter: u32::from(*w.letters().iter().max().unwrap()),
                    alphabet_size,
                }
                .into());
            }
            if !w.is_empty() {
                let parent = Word::from(&w.letters()[..w.len() - 1]);
                if !values.contains_key(&parent) {
                    return Err(GaleError::NotPrefixClosed(w.clone()));
                }
            }
        }
        Ok(GaleTable {
            sigma,
            alphabet_size,
            values,
        })
    }

    pub fn sigma(&self) -> Option<&Rat> {
        self.sigma.as_ref()
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn values(&self) -> &BTreeMap<Word, Scaled> {
        &self.values
    }

    pub fn get(&self, w: &Word) -> Option<&Scaled> {
        self.values.get(w)
    }

    pub fn with_sigma(mut self, sigma: Option<Rat>) -> Result<Self, GaleError> {
        if let Some(s) = &sigma {
            check_sigma(s)?;
        }
        self.sigma = sigma;
        Ok(self)
    }

    /// Words with at least one child in the domain.
    pub fn non_leaves(&self) -> Vec<&Word> {
        self.values
            .keys()
            .filter(|w| (0..self.alphabet_size).any(|x| self.values.contains_key(&w.push(x as u8))))
            .collect()
    }

    fn children_sum(&self, w: &Word, missing: &mut Vec<Word>) -> PowSum {
        let mut sum = PowSum::zero(Radix::new(self.alphabet_size));
        for x in 0..self.alphabet_size {
            let c = w.push(x as u8);
            match self.values.get(&c) {
                Some(v) => sum.add_scaled(v),
                None => missing.push(c),
            }
        }
        sum
    }
}

fn check_sigma(s: &Rat) -> Result<(), GaleError> {
    if s.is_negative() || *s > Rat::one() {
        return Err(GaleError::SigmaOutOfRange(s.clone()));
    }
    Ok(())
}

/// Every word of length at most `depth`.
pub fn all_words_up_to(alphabet_size: u32, depth: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * alphabet_size as usize);
        for w in &frontier {
            for x in 0..alphabet_size {
                next.push(w.push(x as u8));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `pref(F)` up to `depth`, together with every one-letter extension (on or
/// off the tree) of its words shorter than `depth`.
pub fn prefix_domain(fam: &TreeFamily, depth: usize) -> Result<Vec<Word>, GaleError> {
    let mut out = Vec::new();
    fam.walk_prefixes(depth, |w, succ| {
        out.push(w.clone());
        if w.len() < depth {
            for x in 0..fam.alphabet_size() as u8 {
                if !succ.contains(&x) {
                    out.push(w.push(x));
                }
            }
        }
        Ok::<(), GaleError>(())
    })?;
    out.sort();
    Ok(out)
}

/// `d(w) = V(w) / |X|^((1 - σ)|w|)` on `domain`.
pub fn gale_from_martingale<F>(
    v: F,
    sigma: &Rat,
    alphabet_size: u32,
    domain: &[Word],
) -> Result<GaleTable, GaleError>
where
    F: Fn(&Word) -> Result<PowerValue, GaleError>,
{
    check_sigma(sigma)?;
    let damp = Rat::one() - sigma;
    let mut values = BTreeMap::new();
    for w in domain {
        let len = Rat::from_integer(BigInt::from(w.len()));
        let d = v(w)?.shift(&-(&damp * len));
        values.insert(w.clone(), d.to_scaled(alphabet_size));
    }
    GaleTable::new(Some(sigma.clone()), alphabet_size, values)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupergaleViolation {
    pub word: Word,
    /// `|X|^σ d(w) - Σ_x d(wx)`, negative.
    pub slack: PowSum,
}

impl fmt::Display for SupergaleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: slack {}", self.word, self.slack)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupergaleReport {
    pub violations: Vec<SupergaleViolation>,
    /// Children absent from the domain, treated as value 0.
    pub missing_children: Vec<Word>,
}

impl SupergaleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the supergale inequality at the table's own `sigma`.
pub fn supergale_check(t: &GaleTable) -> Result<SupergaleReport, GaleError> {
    let sigma = t.sigma().ok_or(GaleError::MissingSigma)?;
    Ok(supergale_check_at(t, sigma))
}

/// Checks `|X|^s d(w) >= Σ_x d(wx)` at every non-leaf `w`.
pub fn supergale_check_at(t: &GaleTable, s: &Rat) -> SupergaleReport {
    let mut report = SupergaleReport::default();
    let radix = Radix::new(t.alphabet_size);
    for w in t.non_leaves() {
        let children = t.children_sum(w, &mut report.missing_children);
        let d = t.get(w).unwrap();
        let mut slack = PowSum::zero(radix);
        slack.add_term(&d.coef, &(&d.exp + s));
        slack.sub_sum(&children);
        if slack.signum() == Ordering::Less {
            report.violations.push(SupergaleViolation {
                word: w.clone(),
                slack,
            });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutPoint {
    Exact(Rat),
    /// `lo <= χ_d <= hi`.
    Bracket {
        lo: Rat,
        hi: Rat,
    },
    /// Every node's children carry zero mass.
    UnboundedBelow,
}

impl fmt::Display for CutPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutPoint::Exact(v) => write!(f, "{}", format_rat(v)),
            CutPoint::Bracket { lo, hi } => {
                write!(f, "[{}, {}]", format_rat(lo), format_rat(hi))
            }
            CutPoint::UnboundedBelow => write!(f, "-inf"),
        }
    }
}

/// `χ_d = max_w log_|X|(Σ_x d(wx) / d(w))` over non-leaves with `d(w) > 0`.
///
/// Exact when every maximizing ratio is a rational power of `|X|`, otherwise
/// a bracket of width at most `2^-precision`.
pub fn cut_point(t: &GaleTable, precision: usize) -> Result<CutPoint, GaleError> {
    let mut any_positive = false;
    let mut best_exact: Option<Rat> = None;
    let mut best_lo: Option<Rat> = None;
    let mut best_hi: Option<Rat> = None;
    let mut missing = Vec::new();
    for w in t.non_leaves() {
        let d = t.get(w).unwrap();
        let sum = t.children_sum(w, &mut missing);
        if d.is_zero() {
            if !sum.is_zero() {
                return Err(GaleError::InfiniteCutPoint(w.clone()));
            }
            continue;
        }
        any_positive = true;
        if sum.is_zero() {
            continue;
        }
        match sum.div_scaled(d).log(precision) {
            LogValue::Exact(v) => {
                if best_exact.as_ref().is_none_or(|b| v > *b) {
                    best_exact = Some(v);
                }
            }
            LogValue::Bracket { lo, hi } => {
                if best_lo.as_ref().is_none_or(|b| lo > *b) {
                    best_lo = Some(lo);
                }
                if best_hi.as_ref().is_none_or(|b| hi > *b) {
                    best_hi = Some(hi);
                }
            }
        }
    }
    if !any_positive {
        return Err(GaleError::EmptyTable);
    }
    Ok(match (best_exact, best_lo, best_hi) {
        (None, None, _) => CutPoint::UnboundedBelow,
        (Some(e), None, _) => CutPoint::Exact(e),
        (e, Some(lo), Some(hi)) => match e {
            Some(e) if e >= hi => CutPoint::Exact(e),
            Some(e) => CutPoint::Bracket { lo: lo.max(e), hi },
            None => CutPoint::Bracket { lo, hi },
        },
        (_, Some(_), None) => unreachable!("bracket bounds are set together"),
    })
}

/// Per-level exponents behind the dimension arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessRecord {
    pub level: usize,
    pub q: Rat,
    pub ell: BigUint,
    /// `(σ - q_i) l_i`: `d(w) = |X|^this` for `w ∈ pref(F) ∩ X^l_i`.
    pub thm2_exponent: Rat,
    /// `α̂ l_i - e(l_i)`.
    pub borderline_exponent: Rat,
    /// `α̂ - q_i > 1/i`; always false at level 0.
    pub scan_flag: bool,
    /// When flagged: whether the borderline exponent reaches `l_i / i`.
    pub bound_holds: Option<bool>,
}

pub fn witness_exponents(
    ef: &ExponentFn<'_>,
    sigma: &Rat,
    alpha_hat: &Rat,
    levels: RangeInclusive<usize>,
) -> Result<Vec<WitnessRecord>, GaleError> {
    let unit = |r: &Rat| r.is_positive() && *r < Rat::one();
    if !unit(sigma) {
        return Err(GaleError::ParameterOutOfRange("sigma"));
    }
    if !unit(alpha_hat) {
        return Err(GaleError::ParameterOutOfRange("alpha_hat"));
    }
    let fam = ef.family();
    let mut out = Vec::new();
    for i in levels {
        let lv = fam.level(i).map_err(|_| GaleError::LevelOutOfRange(i))?;
        let q = lv.q();
        let ell = rat_from_nat(&lv.ell);
        let e = rat_from_nat(&ef.exponent(&lv.ell)?);
        let thm2_exponent = (sigma - &q) * &ell;
        let borderline_exponent = alpha_hat * &ell - e;
        let scan_flag = i > 0 && alpha_hat - &q > Rat::new(BigInt::one(), BigInt::from(i));
        let bound_holds =
            scan_flag.then(|| borderline_exponent >= &ell / Rat::from_integer(BigInt::from(i)));
        out.push(WitnessRecord {
            level: i,
            q,
            ell: lv.ell.clone(),
            thm2_exponent,
            borderline_exponent,
            scan_flag,
            bound_holds,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct WitnessRow {
    level: usize,
    q_i: String,
    ell_i: String,
    thm2_exp_num: String,
    thm2_exp_den: String,
    borderline_exp_num: String,
    borderline_exp_den: String,
    scan_flag: bool,
}

pub fn write_witness_csv<W: io::Write>(records: &[WitnessRecord], out: W) -> io::Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    for r in records {
        wr.serialize(WitnessRow {
            level: r.level,
            q_i: format_rat(&r.q),
            ell_i: r.ell.to_string(),
            thm2_exp_num: r.thm2_exponent.numer().to_string(),
            thm2_exp_den: r.thm2_exponent.denom().to_string(),
            borderline_exp_num: r.borderline_exponent.numer().to_string(),
            borderline_exp_den: r.borderline_exponent.denom().to_string(),
            scan_flag: r.scan_flag,
        })
        .map_err(io::Error::other)?;
    }
    wr.flush()
}
