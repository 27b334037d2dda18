//! Structure function of the limit language, kept in logarithmic form.
//!
//! Because every prefix either branches into the whole alphabet or into a
//! single letter, `s_F(l) = |X|^e(l)` for a natural exponent `e(l)`. The
//! exponent is computed by peeling whole blocks off `l`:
//!
//! * inside the copies of level `i`: `e(j l_i + t) = j k_i + e(t)`,
//! * inside the appendix: `e(r_i l_i + t) = r_i k_i` (singleton) or
//!   `r_i k_i + t` (full).

use std::collections::HashMap;
use std::io;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::Appendix;
use crate::rat::{format_rat, nat_ratio, parse_nat, parse_rat, rat_from_nat, Nat, Rat};
use crate::treefam::{T0Variant, TreeError, TreeFamily};

/// Ranges wider than this are sampled rather than walked.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;
/// Interior points taken from a sampled range.
pub const SAMPLE_POINTS: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("level {0} needs level {1} to be materialized")]
    MissingLevel(usize, usize),
    #[error("density is undefined at length 0")]
    ZeroLength,
    #[error("up_to = {up_to} is below l_1 = {ell_1}")]
    UpToTooSmall { up_to: Nat, ell_1: String },
    #[error("{direction:?} check requires the {expected} variant, family uses {actual}")]
    VariantMismatch {
        direction: Direction,
        expected: T0Variant,
        actual: T0Variant,
    },
    #[error("sequence is not {0:?} on the materialized levels (level {1})")]
    NotMonotone(Direction, usize),
    #[error("malformed table: {0}")]
    Table(String),
}

/// Memoized `l -> e(l)` for one family. Safe to share across threads; the
/// cache never changes a result.
#[derive(Debug)]
pub struct ExponentFn<'a> {
    fam: &'a TreeFamily,
    cache: Mutex<HashMap<Nat, Nat>>,
}

impl<'a> ExponentFn<'a> {
    pub fn new(fam: &'a TreeFamily) -> Self {
        ExponentFn {
            fam,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn family(&self) -> &'a TreeFamily {
        self.fam
    }

    pub fn exponent(&self, ell: &Nat) -> Result<Nat, StructureError> {
        if ell > self.fam.ell_last() {
            return Err(TreeError::TooDeep {
                len: ell.clone(),
                max: self.fam.ell_last().clone(),
            }
            .into());
        }
        Ok(self.exponent_within(ell))
    }

    pub fn exponent_u64(&self, ell: u64) -> Result<Nat, StructureError> {
        self.exponent(&BigUint::from(ell))
    }

    fn exponent_within(&self, ell: &Nat) -> Nat {
        if let Some(v) = self.cache.lock().unwrap().get(ell) {
            return v.clone();
        }
        let v = self.compute(ell);
        self.cache.lock().unwrap().insert(ell.clone(), v.clone());
        v
    }

    fn compute(&self, ell: &Nat) -> Nat {
        let levels = self.fam.levels();
        let base = &levels[0];
        if *ell <= base.ell {
            return match self.fam.t0_variant() {
                T0Variant::SuffixPad => ell.min(&base.k).clone(),
                T0Variant::PrefixPad => {
                    let pad = &base.ell - &base.k;
                    if *ell > pad {
                        ell - pad
                    } else {
                        Nat::zero()
                    }
                }
            };
        }
        let i = levels
            .iter()
            .rposition(|lv| lv.ell <= *ell)
            .expect("ell exceeds l_0");
        let lv = &levels[i];
        if lv.ell == *ell {
            return lv.k.clone();
        }
        let step = lv.step.as_ref().expect("ell below l_last");
        let copies_end = &step.r * &lv.ell;
        if *ell <= copies_end {
            let (j, t) = ell.div_rem(&lv.ell);
            j * &lv.k + self.exponent_within(&t)
        } else {
            let t = ell - &copies_end;
            let base = &step.r * &lv.k;
            match step.appendix {
                Appendix::Singleton => base,
                Appendix::Full => base + t,
            }
        }
    }

    /// `e(l) / l`.
    pub fn density(&self, ell: &Nat) -> Result<Rat, StructureError> {
        if ell.is_zero() {
            return Err(StructureError::ZeroLength);
        }
        let e = self.exponent(ell)?;
        Ok(nat_ratio(&e, ell))
    }

    pub fn density_u64(&self, ell: u64) -> Result<Rat, StructureError> {
        self.density(&BigUint::from(ell))
    }

    fn q(&self, i: usize) -> Rat {
        self.fam.levels()[i].q()
    }

    /// Verifies the density bounds on `[l_i, l_{i+1}]`.
    ///
    /// In the copy regime `l < r_i l_i` the density is at least
    /// `(1 - l_{i-1}/l_i) min{q_{i-1}, q_i}`; for `i = 0` that bound is taken
    /// as 0. In the appendix regime it lies between `q_i` and `q_{i+1}`.
    pub fn check_bounds(&self, i: usize) -> Result<DensityCertificate, StructureError> {
        let levels = self.fam.levels();
        if i + 1 >= levels.len() {
            return Err(StructureError::MissingLevel(i, i + 1));
        }
        let lv = &levels[i];
        let next = &levels[i + 1];
        let step = lv.step.as_ref().expect("non-final level");
        let (qi, qn) = (self.q(i), self.q(i + 1));
        let copy_lower = if i == 0 {
            Rat::zero()
        } else {
            let frac = Rat::one() - nat_ratio(&levels[i - 1].ell, &lv.ell);
            frac * self.q(i - 1).min(qi.clone())
        };
        let (app_lower, app_upper, app_regime) = if qi > qn {
            (qn.clone(), qi.clone(), Regime::AppendixDecreasing)
        } else {
            (qi.clone(), qn.clone(), Regime::AppendixIncreasing)
        };

        let copies_end = &step.r * &lv.ell;
        let mut extra = vec![copies_end.clone()];
        if copies_end > lv.ell {
            extra.push(&copies_end - 1u32);
        }
        let (points, exhaustive) = sample_range(&lv.ell, &next.ell, &extra);

        let mut copy = SegmentRecord::new(
            lv.ell.clone(),
            if copies_end > lv.ell {
                &copies_end - 1u32
            } else {
                lv.ell.clone()
            },
            copy_lower,
            Rat::one(),
            Regime::Copy,
        );
        let mut app = SegmentRecord::new(
            copies_end.clone(),
            next.ell.clone(),
            app_lower,
            app_upper,
            app_regime,
        );
        let mut violations = Vec::new();
        for ell in points {
            let d = self.density(&ell)?;
            let seg = if ell < copies_end {
                &mut copy
            } else {
                &mut app
            };
            if d < seg.lower || d > seg.upper {
                violations.push(BoundViolation {
                    ell: ell.clone(),
                    density: d.clone(),
                    regime: seg.regime,
                });
            }
            seg.observe(d);
        }
        let segments = [copy, app]
            .into_iter()
            .filter(|s| s.points_checked > 0)
            .collect();
        Ok(DensityCertificate {
            level: i,
            exhaustive,
            segments,
            violations,
        })
    }

    /// Block-boundary densities and a certified lower bound for the density
    /// on `[l_1, up_to]`.
    pub fn dim_estimate(&self, up_to: &Nat) -> Result<DimEstimate, StructureError> {
        let levels = self.fam.levels();
        if levels.len() < 2 || *up_to < levels[1].ell {
            return Err(StructureError::UpToTooSmall {
                up_to: up_to.clone(),
                ell_1: levels
                    .get(1)
                    .map(|l| l.ell.to_string())
                    .unwrap_or_else(|| "(not materialized)".into()),
            });
        }
        if up_to > self.fam.ell_last() {
            return Err(TreeError::TooDeep {
                len: up_to.clone(),
                max: self.fam.ell_last().clone(),
            }
            .into());
        }
        let mut block_densities = Vec::new();
        for (i, lv) in levels.iter().enumerate() {
            if lv.ell > *up_to {
                break;
            }
            block_densities.push(BlockDensity {
                level: i,
                ell: lv.ell.clone(),
                density: self.density(&lv.ell)?,
            });
        }
        let empirical_min_density = block_densities
            .iter()
            .map(|b| b.density.clone())
            .min()
            .expect("level 0 is always below up_to");
        let mut certified_lower: Option<Rat> = None;
        let mut max_ratio = Rat::zero();
        for i in 1..block_densities.len() {
            let ratio = nat_ratio(&levels[i - 1].ell, &levels[i].ell);
            let mut m = self.q(i - 1).min(self.q(i));
            if i + 1 < levels.len() {
                m = m.min(self.q(i + 1));
            }
            let bound = (Rat::one() - &ratio) * m;
            certified_lower = Some(match certified_lower {
                Some(c) => c.min(bound),
                None => bound,
            });
            max_ratio = max_ratio.max(ratio);
        }
        Ok(DimEstimate {
            empirical_min_density,
            block_densities,
            certified_lower: certified_lower.expect("at least level 1 below up_to"),
            max_length_ratio: max_ratio,
        })
    }

    /// For a monotone sequence with limit stand-in `alpha_hat`: decreasing
    /// families satisfy `e(l) >= alpha_hat * l`, increasing ones
    /// `e(l) <= alpha_hat * l`, for every `l <= up_to`.
    pub fn monotone_check(
        &self,
        direction: Direction,
        alpha_hat: &Rat,
        up_to: &Nat,
    ) -> Result<MonotoneReport, StructureError> {
        let expected = match direction {
            Direction::Decreasing => T0Variant::SuffixPad,
            Direction::Increasing => T0Variant::PrefixPad,
        };
        if self.fam.t0_variant() != expected {
            return Err(StructureError::VariantMismatch {
                direction,
                expected,
                actual: self.fam.t0_variant(),
            });
        }
        let levels = self.fam.levels();
        for i in 1..levels.len() {
            let (a, b) = (self.q(i - 1), self.q(i));
            let ok = match direction {
                Direction::Decreasing => b < a,
                Direction::Increasing => b > a,
            };
            if !ok {
                return Err(StructureError::NotMonotone(direction, i));
            }
        }
        if up_to > self.fam.ell_last() {
            return Err(TreeError::TooDeep {
                len: up_to.clone(),
                max: self.fam.ell_last().clone(),
            }
            .into());
        }
        let mut extra = Vec::new();
        for lv in levels {
            if lv.ell <= *up_to {
                extra.push(lv.ell.clone());
                if let Some(step) = &lv.step {
                    let c = &step.r * &lv.ell;
                    if c <= *up_to {
                        extra.push(c);
                    }
                }
            }
        }
        let (points, exhaustive) = sample_range(&BigUint::one(), up_to, &extra);
        let mut violations = Vec::new();
        let checked = points.len();
        for ell in points {
            let e = rat_from_nat(&self.exponent(&ell)?);
            let bound = alpha_hat * rat_from_nat(&ell);
            let ok = match direction {
                Direction::Decreasing => e >= bound,
                Direction::Increasing => e <= bound,
            };
            if !ok {
                violations.push(ell);
            }
        }
        Ok(MonotoneReport {
            direction,
            checked,
            exhaustive,
            violations,
        })
    }

    /// Rows `(l, e(l), e(l)/l)` for `1 <= l <= max_len`.
    pub fn table(&self, max_len: &Nat) -> Result<Vec<TableRow>, StructureError> {
        if max_len > self.fam.ell_last() {
            return Err(TreeError::TooDeep {
                len: max_len.clone(),
                max: self.fam.ell_last().clone(),
            }
            .into());
        }
        let mut rows = Vec::new();
        let mut ell = BigUint::one();
        while ell <= *max_len {
            let exponent = self.exponent(&ell)?;
            let density = nat_ratio(&exponent, &ell);
            rows.push(TableRow {
                ell: ell.clone(),
                exponent,
                density,
            });
            ell += 1u32;
        }
        Ok(rows)
    }
}

/// Points of `[lo, hi]` to check: all of them when the range is at most
/// [`EXHAUSTIVE_LIMIT`] wide, otherwise both endpoints, `extra`, and
/// [`SAMPLE_POINTS`] evenly spaced interior points. Sorted, deduplicated.
pub fn sample_range(lo: &Nat, hi: &Nat, extra: &[Nat]) -> (Vec<Nat>, bool) {
    if hi < lo {
        return (Vec::new(), true);
    }
    let width = hi - lo;
    if width <= BigUint::from(EXHAUSTIVE_LIMIT) {
        let w = width.to_u64().unwrap();
        return ((0..=w).map(|d| lo + d).collect(), true);
    }
    let mut pts = vec![lo.clone(), hi.clone()];
    for j in 1..=SAMPLE_POINTS {
        pts.push(lo + &width * j / (SAMPLE_POINTS + 1));
    }
    pts.extend(extra.iter().filter(|x| *x >= lo && *x <= hi).cloned());
    pts.sort();
    pts.dedup();
    (pts, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Copy,
    AppendixDecreasing,
    AppendixIncreasing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentRecord {
    pub start: Nat,
    pub end: Nat,
    pub lower: Rat,
    pub upper: Rat,
    pub regime: Regime,
    pub observed_min: Option<Rat>,
    pub observed_max: Option<Rat>,
    pub points_checked: usize,
}

impl SegmentRecord {
    fn new(start: Nat, end: Nat, lower: Rat, upper: Rat, regime: Regime) -> Self {
        SegmentRecord {
            start,
            end,
            lower,
            upper,
            regime,
            observed_min: None,
            observed_max: None,
            points_checked: 0,
        }
    }

    fn observe(&mut self, d: Rat) {
        self.points_checked += 1;
        if self.observed_min.as_ref().is_none_or(|m| d < *m) {
            self.observed_min = Some(d.clone());
        }
        if self.observed_max.as_ref().is_none_or(|m| d > *m) {
            self.observed_max = Some(d);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundViolation {
    pub ell: Nat,
    pub density: Rat,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityCertificate {
    pub level: usize,
    pub exhaustive: bool,
    pub segments: Vec<SegmentRecord>,
    pub violations: Vec<BoundViolation>,
}

impl DensityCertificate {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDensity {
    pub level: usize,
    pub ell: Nat,
    pub density: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimEstimate {
    pub empirical_min_density: Rat,
    pub block_densities: Vec<BlockDensity>,
    pub certified_lower: Rat,
    /// Largest `l_{i-1} / l_i` among the levels used.
    pub max_length_ratio: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneReport {
    pub direction: Direction,
    pub checked: usize,
    pub exhaustive: bool,
    pub violations: Vec<Nat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub ell: Nat,
    pub exponent: Nat,
    pub density: Rat,
}

#[derive(Serialize, Deserialize)]
struct RowRecord {
    ell: String,
    exponent: String,
    density_num: String,
    density_den: String,
}

impl From<&TableRow> for RowRecord {
    fn from(r: &TableRow) -> Self {
        RowRecord {
            ell: r.ell.to_string(),
            exponent: r.exponent.to_string(),
            density_num: r.density.numer().to_string(),
            density_den: r.density.denom().to_string(),
        }
    }
}

/// CSV with header `ell,exponent,density_num,density_den`.
pub fn write_table_csv<W: io::Write>(rows: &[TableRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(RowRecord::from(r)).map_err(io::Error::other)?;
    }
    w.flush()
}

/// A JSON array of row objects; every number is a decimal string.
pub fn write_table_json<W: io::Write>(rows: &[TableRow], mut out: W) -> io::Result<()> {
    let recs: Vec<RowRecord> = rows.iter().map(RowRecord::from).collect();
    serde_json::to_writer_pretty(&mut out, &recs)?;
    writeln!(out)
}

pub fn read_table_csv<R: io::Read>(input: R) -> Result<Vec<TableRow>, StructureError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<RowRecord>() {
        let rec = rec.map_err(|e| StructureError::Table(e.to_string()))?;
        let bad = |e: crate::rat::ParseNumberError| StructureError::Table(e.to_string());
        let density =
            parse_rat(&format!("{}/{}", rec.density_num, rec.density_den)).map_err(bad)?;
        rows.push(TableRow {
            ell: parse_nat(&rec.ell).map_err(bad)?,
            exponent: parse_nat(&rec.exponent).map_err(bad)?,
            density,
        });
    }
    Ok(rows)
}

impl std::fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "l={} density={} ({:?})",
            self.ell,
            format_rat(&self.density),
            self.regime
        )
    }
}
