//! Symbolic tree families `T_0, T_1, ...`.
//!
//! `T_0` is `X^k0 0^(l0-k0)` (suffix padding) or `0^(l0-k0) X^k0` (prefix
//! padding), and `T_{i+1}` is `r_i` copies of `T_i` followed by an appendix
//! that is either every word of length `p_i l_i` or the single word of zeros.
//! Words are never stored; every query recurses through the level structure.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{Appendix, LevelParams};
use crate::rat::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("alphabet size {0} outside 2..=256")]
    InvalidAlphabet(u32),
    #[error("family has no levels")]
    NoLevels,
    #[error("level {level}: {msg}")]
    Structure { level: usize, msg: String },
    #[error("letter {letter} not in alphabet of size {alphabet_size}")]
    InvalidLetter { letter: u32, alphabet_size: u32 },
    #[error("malformed word {0:?}")]
    MalformedWord(String),
    #[error("level {0} is not materialized")]
    LevelOutOfRange(usize),
    #[error("word length {got} does not match block length {expected}")]
    LengthMismatch { expected: Nat, got: usize },
    #[error(
        "length {len} exceeds the deepest materialized block length {max}; derive at least one more level"
    )]
    TooDeep { len: Nat, max: Nat },
    #[error("word {0} is not a prefix of the family")]
    NotInPrefixSet(Word),
    #[error("prefix {word} has {count} successors, expected 1 or the whole alphabet")]
    SymmetryBroken { word: Word, count: usize },
    #[error("level {level} has {size} words, more than the cap {cap}")]
    TooLarge { level: usize, size: Nat, cap: u64 },
}

/// Shape of the base tree `T_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum T0Variant {
    /// `X^k0 0^(l0 - k0)`
    SuffixPad,
    /// `0^(l0 - k0) X^k0`
    PrefixPad,
}

impl fmt::Display for T0Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            T0Variant::SuffixPad => "suffix-pad",
            T0Variant::PrefixPad => "prefix-pad",
        })
    }
}

impl FromStr for T0Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "suffix-pad" => Ok(T0Variant::SuffixPad),
            "prefix-pad" => Ok(T0Variant::PrefixPad),
            other => Err(format!("unknown t0 variant {other:?}")),
        }
    }
}

/// A finite word over `0..alphabet_size`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&self, letter: u8) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// Digit strings (`"101"`) for alphabets up to 10 letters, comma separated
    /// decimals (`"11,0,3"`) above that.
    pub fn parse(s: &str, alphabet_size: u32) -> Result<Word, TreeError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let raw: Vec<u32> = if alphabet_size > 10 {
            s.split(',')
                .map(|p| p.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| TreeError::MalformedWord(s.to_string()))?
        } else {
            s.chars()
                .map(|c| c.to_digit(10))
                .collect::<Option<_>>()
                .ok_or_else(|| TreeError::MalformedWord(s.to_string()))?
        };
        let mut letters = Vec::with_capacity(raw.len());
        for letter in raw {
            if letter >= alphabet_size {
                return Err(TreeError::InvalidLetter {
                    letter,
                    alphabet_size,
                });
            }
            letters.push(letter as u8);
        }
        Ok(Word(letters))
    }

    pub fn render(&self, alphabet_size: u32) -> String {
        if alphabet_size > 10 {
            self.0
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        } else {
            self.0.iter().map(|x| char::from(b'0' + x)).collect()
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&x| x < 10) {
            write!(f, "\"{}\"", self.render(10))
        } else {
            write!(f, "\"{}\"", self.render(256))
        }
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

/// Lists every recurrence the levels break. Empty for a well-formed family.
pub fn structural_violations(levels: &[LevelParams]) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    if levels.is_empty() {
        out.push((0, "family has no levels".to_string()));
        return out;
    }
    let last = levels.len() - 1;
    for (i, lv) in levels.iter().enumerate() {
        if lv.k.is_zero() || lv.k >= lv.ell {
            out.push((
                i,
                format!("need 0 < k < ell, got k={} ell={}", lv.k, lv.ell),
            ));
        }
        match (&lv.step, i == last) {
            (Some(_), true) => out.push((i, "last level carries a transition".into())),
            (None, false) => out.push((i, "missing transition".into())),
            _ => {}
        }
        let Some(step) = &lv.step else { continue };
        if step.r.is_zero() {
            out.push((i, "repetition factor r is zero".into()));
        }
        if step.p.is_zero() {
            out.push((i, "prolongation factor p is zero".into()));
        }
        let kappa_ok = match step.appendix {
            Appendix::Full => step.kappa == step.p,
            Appendix::Singleton => step.kappa.is_zero(),
        };
        if !kappa_ok {
            out.push((
                i,
                format!(
                    "kappa={} inconsistent with {} appendix (p={})",
                    step.kappa, step.appendix, step.p
                ),
            ));
        }
        if let Some(next) = levels.get(i + 1) {
            let ell_next = (&step.r + &step.p) * &lv.ell;
            if ell_next != next.ell {
                out.push((
                    i,
                    format!("(r+p)*ell = {} but next ell = {}", ell_next, next.ell),
                ));
            }
            let k_next = &step.r * &lv.k + &step.kappa * &lv.ell;
            if k_next != next.k {
                out.push((
                    i,
                    format!("r*k + kappa*ell = {} but next k = {}", k_next, next.k),
                ));
            }
        }
    }
    out
}

/// An immutable, structurally valid family of trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFamily {
    alphabet_size: u32,
    t0_variant: T0Variant,
    levels: Vec<LevelParams>,
}

impl TreeFamily {
    pub fn new(
        alphabet_size: u32,
        t0_variant: T0Variant,
        levels: Vec<LevelParams>,
    ) -> Result<Self, TreeError> {
        if !(2..=256).contains(&alphabet_size) {
            return Err(TreeError::InvalidAlphabet(alphabet_size));
        }
        if levels.is_empty() {
            return Err(TreeError::NoLevels);
        }
        if let Some((level, msg)) = structural_violations(&levels).into_iter().next() {
            return Err(TreeError::Structure { level, msg });
        }
        Ok(TreeFamily {
            alphabet_size,
            t0_variant,
            levels,
        })
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn t0_variant(&self) -> T0Variant {
        self.t0_variant
    }

    pub fn levels(&self) -> &[LevelParams] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> Result<&LevelParams, TreeError> {
        self.levels.get(i).ok_or(TreeError::LevelOutOfRange(i))
    }

    /// Index of the deepest materialized level.
    pub fn last_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn ell_last(&self) -> &Nat {
        &self.levels[self.last_level()].ell
    }

    /// Same family truncated to levels `0..=last`.
    pub fn truncated(&self, last: usize) -> Result<TreeFamily, TreeError> {
        if last >= self.levels.len() {
            return Err(TreeError::LevelOutOfRange(last));
        }
        let mut levels = self.levels[..=last].to_vec();
        levels[last].step = None;
        TreeFamily::new(self.alphabet_size, self.t0_variant, levels)
    }

    fn check_letters(&self, w: &Word) -> Result<(), TreeError> {
        match w.0.iter().find(|&&x| u32::from(x) >= self.alphabet_size) {
            Some(&x) => Err(TreeError::InvalidLetter {
                letter: u32::from(x),
                alphabet_size: self.alphabet_size,
            }),
            None => Ok(()),
        }
    }

    /// Smallest level whose block length is at least `len`.
    fn level_for_len(&self, len: usize) -> Result<usize, TreeError> {
        let n = BigUint::from(len);
        self.levels
            .iter()
            .position(|lv| lv.ell >= n)
            .ok_or_else(|| TreeError::TooDeep {
                len: n,
                max: self.ell_last().clone(),
            })
    }

    fn t0_prefix(&self, w: &[u8]) -> bool {
        let lv = &self.levels[0];
        // ell_0 is at least |w| here, so the padding width fits too.
        let k0 = lv.k.to_usize().unwrap_or(usize::MAX);
        match self.t0_variant {
            T0Variant::SuffixPad => w.iter().skip(k0).all(|&x| x == 0),
            T0Variant::PrefixPad => {
                let pad = (&lv.ell - &lv.k).to_usize().unwrap_or(usize::MAX);
                w.iter().take(pad).all(|&x| x == 0)
            }
        }
    }

    /// Membership of `w` in `pref(T_i)`; requires `|w| <= l_i`.
    fn pref_at(&self, i: usize, w: &[u8]) -> bool {
        if i == 0 {
            return self.t0_prefix(w);
        }
        let below = &self.levels[i - 1];
        let step = below.step.as_ref().expect("non-final level has a step");
        let chunk = below
            .ell
            .to_usize()
            .expect("block shorter than the word fits in usize");
        let full = w.len() / chunk;
        let copies = match step.r.to_usize() {
            Some(r) if r < full => r,
            _ => full,
        };
        for c in 0..copies {
            if !self.pref_at(i - 1, &w[c * chunk..(c + 1) * chunk]) {
                return false;
            }
        }
        let rest = &w[copies * chunk..];
        if BigUint::from(copies) < step.r {
            rest.is_empty() || self.pref_at(i - 1, rest)
        } else {
            match step.appendix {
                Appendix::Full => true,
                Appendix::Singleton => rest.iter().all(|&x| x == 0),
            }
        }
    }

    /// `w ∈ T_i`.
    pub fn member_full(&self, i: usize, w: &Word) -> Result<bool, TreeError> {
        let lv = self.level(i)?;
        if BigUint::from(w.len()) != lv.ell {
            return Err(TreeError::LengthMismatch {
                expected: lv.ell.clone(),
                got: w.len(),
            });
        }
        self.check_letters(w)?;
        Ok(self.pref_at(i, &w.0))
    }

    /// `w ∈ pref(T_i)` for a word no longer than `l_i`.
    pub fn member_pref_at(&self, i: usize, w: &Word) -> Result<bool, TreeError> {
        let lv = self.level(i)?;
        if BigUint::from(w.len()) > lv.ell {
            return Err(TreeError::TooDeep {
                len: BigUint::from(w.len()),
                max: lv.ell.clone(),
            });
        }
        self.check_letters(w)?;
        Ok(self.pref_at(i, &w.0))
    }

    /// `w ∈ pref(F)`, decided at the shallowest level long enough for `w`.
    pub fn member_pref(&self, w: &Word) -> Result<bool, TreeError> {
        let i = self.level_for_len(w.len())?;
        self.check_letters(w)?;
        Ok(self.pref_at(i, &w.0))
    }

    /// Letters `x` with `w x ∈ pref(F)`; always one letter or the whole
    /// alphabet.
    pub fn successors(&self, w: &Word) -> Result<Vec<u8>, TreeError> {
        if BigUint::from(w.len()) >= *self.ell_last() {
            return Err(TreeError::TooDeep {
                len: BigUint::from(w.len() + 1),
                max: self.ell_last().clone(),
            });
        }
        if !self.member_pref(w)? {
            return Err(TreeError::NotInPrefixSet(w.clone()));
        }
        let i = self.level_for_len(w.len() + 1)?;
        let mut buf = w.0.clone();
        buf.push(0);
        let mut out = Vec::new();
        for x in 0..self.alphabet_size {
            *buf.last_mut().unwrap() = x as u8;
            if self.pref_at(i, &buf) {
                out.push(x as u8);
            }
        }
        if out.len() != 1 && out.len() != self.alphabet_size as usize {
            return Err(TreeError::SymmetryBroken {
                word: w.clone(),
                count: out.len(),
            });
        }
        Ok(out)
    }

    /// `|X|^k_i`, the size of `T_i`.
    pub fn level_size(&self, i: usize) -> Result<Nat, TreeError> {
        let k = &self.level(i)?.k;
        Ok(pow_nat(self.alphabet_size, k))
    }

    /// All of `T_i` in lexicographic order, refusing when `|T_i| > cap`.
    pub fn enumerate_level(&self, i: usize, cap: u64) -> Result<Vec<Word>, TreeError> {
        let size = self.level_size(i)?;
        if size > BigUint::from(cap) {
            return Err(TreeError::TooLarge {
                level: i,
                size,
                cap,
            });
        }
        let len = self.levels[i].ell.to_usize().expect("bounded by the cap");
        let mut out = Vec::new();
        let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
        while let Some(w) = stack.pop() {
            if w.len() == len {
                out.push(Word(w));
                continue;
            }
            for x in (0..self.alphabet_size).rev() {
                let mut c = w.clone();
                c.push(x as u8);
                if self.pref_at(i, &c) {
                    stack.push(c);
                }
            }
        }
        Ok(out)
    }

    /// Depth-first walk over every `w ∈ pref(F)` with `|w| <= depth`; the
    /// callback receives the word and its successor letters (empty at the
    /// deepest materialized length). Stops at the first error.
    pub fn walk_prefixes<E>(
        &self,
        depth: usize,
        mut f: impl FnMut(&Word, &[u8]) -> Result<(), E>,
    ) -> Result<(), E>
    where
        E: From<TreeError>,
    {
        let mut stack = vec![Word::empty()];
        while let Some(w) = stack.pop() {
            let succ = if BigUint::from(w.len()) < *self.ell_last() {
                self.successors(&w)?
            } else {
                Vec::new()
            };
            f(&w, &succ)?;
            if w.len() < depth {
                for &x in succ.iter().rev() {
                    stack.push(w.push(x));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn pow_nat(base: u32, exp: &Nat) -> Nat {
    let e = exp.to_u32().expect("exponent too large to materialize");
    BigUint::from(base).pow(e)
}
