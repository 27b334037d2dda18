//! Driving sequences `(q_i)` of rationals in the open unit interval.
//!
//! A sequence is either an explicit finite list or one of a few built-in
//! infinite families. Every produced term must lie strictly between 0 and 1
//! and differ from its predecessor; [`QSequence::validate`] reports the
//! indices where that fails.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::{format_rat, rat_pow, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("index {index} out of range for explicit sequence of length {len}")]
    IndexOutOfRange { index: u64, len: usize },
    #[error("term {index} = {} lies outside (0,1)", format_rat(.value))]
    OutOfUnitInterval { index: u64, value: Rat },
    #[error("invalid family parameters: {0}")]
    InvalidParameters(String),
    #[error("empty window {from}..={to}")]
    EmptyWindow { from: u64, to: u64 },
    #[error("sequence violates admissibility: {0}")]
    Inadmissible(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QSequence {
    /// Finite list of terms.
    Explicit(Vec<Rat>),
    /// `q_i = c + (-1)^i * d / (i + m)`.
    Alternating { c: Rat, d: Rat, m: u64 },
    /// `q_i = target + (start - target) * ratio^i`, approaching `target`.
    Geometric { target: Rat, start: Rat, ratio: Rat },
    /// `q_i = c + (-1)^(i / period) * d / (i + m)`: sign flips once per
    /// `period` terms, so the running lower envelope moves in plateaus.
    Oscillating { c: Rat, d: Rat, m: u64, period: u64 },
}

impl QSequence {
    pub fn explicit(terms: Vec<Rat>) -> Self {
        QSequence::Explicit(terms)
    }

    pub fn alternating(c: Rat, d: Rat, m: u64) -> Result<Self, SequenceError> {
        if m == 0 {
            return Err(SequenceError::InvalidParameters(
                "m must be at least 1".into(),
            ));
        }
        if d.is_zero() {
            return Err(SequenceError::InvalidParameters(
                "d must be non-zero".into(),
            ));
        }
        Ok(QSequence::Alternating { c, d, m })
    }

    pub fn geometric(target: Rat, start: Rat, ratio: Rat) -> Result<Self, SequenceError> {
        if !(ratio.is_positive() && ratio < Rat::one()) {
            return Err(SequenceError::InvalidParameters(
                "ratio must lie in (0,1)".into(),
            ));
        }
        if start == target {
            return Err(SequenceError::InvalidParameters(
                "start must differ from target".into(),
            ));
        }
        Ok(QSequence::Geometric {
            target,
            start,
            ratio,
        })
    }

    pub fn oscillating(c: Rat, d: Rat, m: u64, period: u64) -> Result<Self, SequenceError> {
        if m == 0 || period == 0 {
            return Err(SequenceError::InvalidParameters(
                "m and period must be at least 1".into(),
            ));
        }
        if d.is_zero() {
            return Err(SequenceError::InvalidParameters(
                "d must be non-zero".into(),
            ));
        }
        Ok(QSequence::Oscillating { c, d, m, period })
    }

    /// Number of terms, `None` for the infinite built-in families.
    pub fn len(&self) -> Option<usize> {
        match self {
            QSequence::Explicit(t) => Some(t.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The exact `i`-th term.
    pub fn q_at(&self, i: u64) -> Result<Rat, SequenceError> {
        let value = self.raw_term(i)?;
        if let QSequence::Explicit(_) = self {
            return Ok(value);
        }
        if !in_unit_interval(&value) {
            return Err(SequenceError::OutOfUnitInterval { index: i, value });
        }
        Ok(value)
    }

    fn raw_term(&self, i: u64) -> Result<Rat, SequenceError> {
        match self {
            QSequence::Explicit(terms) => usize::try_from(i)
                .ok()
                .and_then(|j| terms.get(j))
                .cloned()
                .ok_or(SequenceError::IndexOutOfRange {
                    index: i,
                    len: terms.len(),
                }),
            QSequence::Alternating { c, d, m } => {
                let step = Rat::new(BigInt::one(), BigInt::from(i) + BigInt::from(*m));
                Ok(if i.is_multiple_of(2) {
                    c + d * step
                } else {
                    c - d * step
                })
            }
            QSequence::Geometric {
                target,
                start,
                ratio,
            } => Ok(target + (start - target) * rat_pow(ratio, &BigInt::from(i))),
            QSequence::Oscillating { c, d, m, period } => {
                let step = Rat::new(BigInt::one(), BigInt::from(i) + BigInt::from(*m));
                Ok(if (i / period).is_multiple_of(2) {
                    c + d * step
                } else {
                    c - d * step
                })
            }
        }
    }

    /// Checks the first `n` terms for range and consecutive distinctness.
    pub fn validate(&self, n: u64) -> ValidationReport {
        let mut violations = Vec::new();
        let mut prev: Option<Rat> = None;
        for i in 0..n {
            let value = match self.raw_term(i) {
                Ok(v) => v,
                Err(_) => {
                    violations.push(Violation {
                        index: i,
                        kind: ViolationKind::Missing,
                    });
                    prev = None;
                    continue;
                }
            };
            if !in_unit_interval(&value) {
                violations.push(Violation {
                    index: i,
                    kind: ViolationKind::OutOfRange(value.clone()),
                });
            }
            if prev.as_ref() == Some(&value) {
                violations.push(Violation {
                    index: i,
                    kind: ViolationKind::RepeatsPrevious,
                });
            }
            prev = Some(value);
        }
        ValidationReport { violations }
    }

    /// `min { q_i : from <= i <= to }`, a finite stand-in for `liminf q_i`.
    pub fn liminf_window(&self, from: u64, to: u64) -> Result<Rat, SequenceError> {
        if from > to {
            return Err(SequenceError::EmptyWindow { from, to });
        }
        let mut best = self.q_at(from)?;
        for i in from + 1..=to {
            let q = self.q_at(i)?;
            if q < best {
                best = q;
            }
        }
        Ok(best)
    }
}

fn in_unit_interval(q: &Rat) -> bool {
    q.is_positive() && *q < Rat::one()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    OutOfRange(Rat),
    RepeatsPrevious,
    /// The index lies past the end of an explicit list.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: u64,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::OutOfRange(v) => {
                write!(
                    f,
                    "index {}: term {} outside (0,1)",
                    self.index,
                    format_rat(v)
                )
            }
            ViolationKind::RepeatsPrevious => {
                write!(f, "index {}: consecutive terms equal", self.index)
            }
            ViolationKind::Missing => write!(f, "index {}: no such term", self.index),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "admissible");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}
