//! Per-level parameters of the tree construction.
//!
//! From consecutive terms `q_i`, `q_{i+1}` and a current block `(k_i, l_i)`
//! with `k_i / l_i = q_i` this module derives the repetition factor `r_i`, the
//! prolongation factor `p_i`, the offset `kappa_i` and the kind of appendix, so
//! that the next block `l_{i+1} = (r_i + p_i) l_i`, `k_{i+1} = r_i k_i + kappa_i l_i`
//! satisfies `k_{i+1} / l_{i+1} = q_{i+1}` exactly.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::{ceil_div, format_rat, nat_ratio, Nat, Rat};
use crate::sequences::{QSequence, SequenceError};
use crate::treefam::{T0Variant, TreeError, TreeFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("consecutive terms are equal ({})", format_rat(.0))]
    EqualTerms(Rat),
    #[error("term {} outside (0,1)", format_rat(.0))]
    OutOfRange(Rat),
    #[error("block ({k}, {ell}) does not represent q = {}", format_rat(.q))]
    BlockMismatch { k: Nat, ell: Nat, q: Rat },
    #[error("scale must be at least 1")]
    ZeroScale,
    #[error("degenerate factor: {0}")]
    Degenerate(&'static str),
    #[error("derived block {k}/{ell} != {}", format_rat(.expected))]
    Inexact { k: Nat, ell: Nat, expected: Rat },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// What follows the `r_i` copies of `T_i` inside `T_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Appendix {
    /// All words of length `p_i * l_i`.
    Full,
    /// The single word `0^(p_i * l_i)`.
    Singleton,
}

impl fmt::Display for Appendix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Appendix::Full => "full",
            Appendix::Singleton => "singleton",
        })
    }
}

/// Transition from level `i` to level `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub r: Nat,
    pub p: Nat,
    pub kappa: Nat,
    pub appendix: Appendix,
}

/// One level of a family: the block `(k_i, l_i)` and, for every level but the
/// last, the transition to the next one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelParams {
    pub k: Nat,
    pub ell: Nat,
    pub step: Option<Transition>,
}

impl LevelParams {
    pub fn q(&self) -> Rat {
        nat_ratio(&self.k, &self.ell)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedLevel {
    pub step: Transition,
    pub k_next: Nat,
    pub ell_next: Nat,
}

fn to_nat(x: BigInt) -> Option<Nat> {
    x.to_biguint()
}

/// Derives the transition for `q -> q_next` from the block `(k, ell)`.
///
/// `q_next / q = a / b` is taken in lowest terms and both are multiplied by
/// `scale`. For a decreasing step `r = a`, `p = b - a`, `kappa = 0` with a
/// singleton appendix; for an increasing step `r = b*ell - a*k` and
/// `p = kappa = (a - b)*k` with the full appendix.
pub fn derive_level(
    q: &Rat,
    q_next: &Rat,
    k: &Nat,
    ell: &Nat,
    scale: &Nat,
) -> Result<DerivedLevel, DerivationError> {
    for v in [q, q_next] {
        if !(v.is_positive() && *v < Rat::one()) {
            return Err(DerivationError::OutOfRange(v.clone()));
        }
    }
    if q == q_next {
        return Err(DerivationError::EqualTerms(q.clone()));
    }
    if ell.is_zero() || nat_ratio(k, ell) != *q {
        return Err(DerivationError::BlockMismatch {
            k: k.clone(),
            ell: ell.clone(),
            q: q.clone(),
        });
    }
    if scale.is_zero() {
        return Err(DerivationError::ZeroScale);
    }

    let ratio = q_next / q;
    let s = BigInt::from(scale.clone());
    let a = ratio.numer() * &s;
    let b = ratio.denom() * &s;
    let k_i = BigInt::from(k.clone());
    let ell_i = BigInt::from(ell.clone());

    let (r, p, kappa, appendix) = if q > q_next {
        let p = &b - &a;
        (a, p, BigInt::zero(), Appendix::Singleton)
    } else {
        let r = &b * &ell_i - &a * &k_i;
        let p = (&a - &b) * &k_i;
        (r, p.clone(), p, Appendix::Full)
    };
    if !r.is_positive() {
        return Err(DerivationError::Degenerate("repetition factor is zero"));
    }
    if !p.is_positive() {
        return Err(DerivationError::Degenerate("prolongation factor is zero"));
    }
    let (r, p, kappa) = match (to_nat(r), to_nat(p), to_nat(kappa)) {
        (Some(r), Some(p), Some(kappa)) => (r, p, kappa),
        _ => return Err(DerivationError::Degenerate("negative factor")),
    };

    let ell_next = (&r + &p) * ell;
    let k_next = &r * k + &kappa * ell;
    if nat_ratio(&k_next, &ell_next) != *q_next {
        return Err(DerivationError::Inexact {
            k: k_next,
            ell: ell_next,
            expected: q_next.clone(),
        });
    }
    Ok(DerivedLevel {
        step: Transition {
            r,
            p,
            kappa,
            appendix,
        },
        k_next,
        ell_next,
    })
}

/// The intermediate ratio between `q_i` and `q_{i+1}` after `t` appendix
/// letters: `r k / (r l + t)` for a decreasing step and
/// `(r k + t) / (r l + t)` for an increasing one.
pub fn appendix_ratio(k: &Nat, ell: &Nat, step: &Transition, t: &Nat) -> Rat {
    let rk = &step.r * k;
    let rl = &step.r * ell;
    match step.appendix {
        Appendix::Singleton => nat_ratio(&rk, &(rl + t)),
        Appendix::Full => nat_ratio(&(rk + t), &(rl + t)),
    }
}

/// True when the appendix ratio at `t` lies between `q` and `q_next`.
pub fn bound_chain_holds(
    q: &Rat,
    q_next: &Rat,
    k: &Nat,
    ell: &Nat,
    step: &Transition,
    t: &Nat,
) -> bool {
    let v = appendix_ratio(k, ell, step, t);
    if q > q_next {
        *q >= v && v >= *q_next
    } else {
        *q <= v && v <= *q_next
    }
}

/// `constant + linear*i + quadratic*i^2`, never less than 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthFn {
    pub constant: u64,
    pub linear: u64,
    pub quadratic: u64,
}

impl GrowthFn {
    pub fn constant(c: u64) -> Self {
        GrowthFn {
            constant: c,
            ..Default::default()
        }
    }

    pub fn linear(c: u64) -> Self {
        GrowthFn {
            linear: c,
            ..Default::default()
        }
    }

    pub fn quadratic(c: u64) -> Self {
        GrowthFn {
            quadratic: c,
            ..Default::default()
        }
    }

    pub fn eval(&self, i: u64) -> Nat {
        let i = BigUint::from(i);
        let v = BigUint::from(self.constant)
            + BigUint::from(self.linear) * &i
            + BigUint::from(self.quadratic) * &i * &i;
        v.max(BigUint::one())
    }
}

/// Lower bounds on block lengths and on consecutive length ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthPolicy {
    /// `l_i >= min_ell(i)`.
    pub min_ell: GrowthFn,
    /// `l_{i+1} >= min_ratio(i) * l_i`.
    pub min_ratio: GrowthFn,
}

impl Default for GrowthPolicy {
    /// `l_i >= i^2` and `l_{i+1} >= (i + 1) l_i`.
    fn default() -> Self {
        GrowthPolicy {
            min_ell: GrowthFn::quadratic(1),
            min_ratio: GrowthFn {
                constant: 1,
                linear: 1,
                quadratic: 0,
            },
        }
    }
}

impl GrowthPolicy {
    /// Every bound equal to 1: the smallest possible trees.
    pub fn trivial() -> Self {
        GrowthPolicy {
            min_ell: GrowthFn::constant(1),
            min_ratio: GrowthFn::constant(1),
        }
    }
}

/// Builds the family for the first `n_levels + 1` terms of `seq`, choosing at
/// every step the smallest scale that meets `policy`.
pub fn derive_family(
    seq: &QSequence,
    n_levels: usize,
    policy: &GrowthPolicy,
    t0_variant: T0Variant,
    alphabet_size: u32,
) -> Result<TreeFamily, DerivationError> {
    let report = seq.validate(n_levels as u64 + 1);
    if !report.is_ok() {
        return Err(SequenceError::Inadmissible(report).into());
    }
    let q0 = seq.q_at(0)?;
    let den0 = q0.denom().to_biguint().expect("positive denominator");
    let num0 = q0.numer().to_biguint().expect("positive numerator");
    let m = ceil_div(&policy.min_ell.eval(0), &den0).max(BigUint::one());
    let mut k = num0 * &m;
    let mut ell = den0 * &m;

    let mut levels = Vec::with_capacity(n_levels + 1);
    let mut q = q0;
    for i in 0..n_levels {
        let q_next = seq.q_at(i as u64 + 1)?;
        let unit = derive_level(&q, &q_next, &k, &ell, &BigUint::one())?;
        let target = policy
            .min_ell
            .eval(i as u64 + 1)
            .max(policy.min_ratio.eval(i as u64) * &ell);
        let scale = ceil_div(&target, &unit.ell_next).max(BigUint::one());
        let derived = if scale.is_one() {
            unit
        } else {
            derive_level(&q, &q_next, &k, &ell, &scale)?
        };
        levels.push(LevelParams {
            k: k.clone(),
            ell: ell.clone(),
            step: Some(derived.step),
        });
        k = derived.k_next;
        ell = derived.ell_next;
        q = q_next;
    }
    levels.push(LevelParams { k, ell, step: None });
    Ok(TreeFamily::new(alphabet_size, t0_variant, levels)?)
}

/// Largest `l_{i-1} / l_i` over the family, `None` for a single level.
pub fn max_length_ratio(fam: &TreeFamily) -> Option<Rat> {
    fam.levels()
        .windows(2)
        .map(|w| nat_ratio(&w[0].ell, &w[1].ell))
        .max()
}
