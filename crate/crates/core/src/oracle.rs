//! Brute-force reference computations on explicitly enumerated languages.
//!
//! Nothing here calls into the recursive membership test, the structure
//! function or the martingale code: trees are built by literal set
//! concatenation from the level parameters alone, and every count comes from
//! looking at the words themselves. The symbolic path is checked against
//! these results on instances small enough to enumerate.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::derivation::Appendix;
use crate::rat::Rat;
use crate::treefam::{T0Variant, TreeFamily, Word};

/// Largest language the oracle will materialize by default.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Longest word the factored form will describe.
const MAX_FACTORED_LEN: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("level {level} has {size} words, above the cap {cap}")]
    CapExceeded {
        level: usize,
        size: BigUint,
        cap: u64,
    },
    #[error("level {0} is not materialized")]
    LevelOutOfRange(usize),
    #[error("words of unequal length in an explicit language")]
    RaggedLanguage,
    #[error("block length {0} too large to enumerate")]
    TooLong(BigUint),
    #[error("the factored form needs a level of at least 1")]
    NoFactorization,
}

/// A finite set of equal-length words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitLanguage {
    alphabet_size: u32,
    word_len: usize,
    words: BTreeSet<Vec<u8>>,
}

impl ExplicitLanguage {
    pub fn new(
        alphabet_size: u32,
        words: impl IntoIterator<Item = Vec<u8>>,
    ) -> Result<Self, OracleError> {
        let words: BTreeSet<Vec<u8>> = words.into_iter().collect();
        let word_len = words.iter().next().map_or(0, |w| w.len());
        if words.iter().any(|w| w.len() != word_len) {
            return Err(OracleError::RaggedLanguage);
        }
        Ok(ExplicitLanguage {
            alphabet_size,
            word_len,
            words,
        })
    }

    /// `X^n`.
    pub fn full(alphabet_size: u32, n: usize) -> Self {
        let mut words = vec![Vec::new()];
        for _ in 0..n {
            words = words
                .into_iter()
                .flat_map(|w| {
                    (0..alphabet_size).map(move |x| {
                        let mut v = w.clone();
                        v.push(x as u8);
                        v
                    })
                })
                .collect();
        }
        ExplicitLanguage {
            alphabet_size,
            word_len: n,
            words: words.into_iter().collect(),
        }
    }

    /// `{0^n}`.
    pub fn zeros(alphabet_size: u32, n: usize) -> Self {
        ExplicitLanguage {
            alphabet_size,
            word_len: n,
            words: [vec![0u8; n]].into_iter().collect(),
        }
    }

    /// `{ab : a ∈ self, b ∈ other}`.
    pub fn concat(&self, other: &ExplicitLanguage) -> Self {
        let mut words = BTreeSet::new();
        for a in &self.words {
            for b in &other.words {
                let mut v = a.clone();
                v.extend_from_slice(b);
                words.insert(v);
            }
        }
        ExplicitLanguage {
            alphabet_size: self.alphabet_size,
            word_len: self.word_len + other.word_len,
            words,
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &[u8]) -> bool {
        self.words.contains(w)
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        self.words.iter().map(|w| Word(w.clone()))
    }
}

fn usize_of(n: &BigUint) -> Result<usize, OracleError> {
    n.to_usize().ok_or_else(|| OracleError::TooLong(n.clone()))
}

fn check_cap(fam: &TreeFamily, i: usize, cap: u64) -> Result<(), OracleError> {
    let lv = fam.levels().get(i).ok_or(OracleError::LevelOutOfRange(i))?;
    let k = lv.k.to_u32().unwrap_or(u32::MAX);
    let size = BigUint::from(fam.alphabet_size()).pow(k.min(4096));
    if k > 4096 || size > BigUint::from(cap) {
        return Err(OracleError::CapExceeded {
            level: i,
            size,
            cap,
        });
    }
    Ok(())
}

fn appendix_language(fam: &TreeFamily, i: usize) -> Result<ExplicitLanguage, OracleError> {
    let lv = &fam.levels()[i];
    let step = lv
        .step
        .as_ref()
        .ok_or(OracleError::LevelOutOfRange(i + 1))?;
    let n = usize_of(&(&step.p * &lv.ell))?;
    Ok(match step.appendix {
        Appendix::Full => ExplicitLanguage::full(fam.alphabet_size(), n),
        Appendix::Singleton => ExplicitLanguage::zeros(fam.alphabet_size(), n),
    })
}

/// `T_i` as an explicit word set, built bottom-up by concatenation.
pub fn brute_trees(fam: &TreeFamily, i: usize, cap: u64) -> Result<ExplicitLanguage, OracleError> {
    check_cap(fam, i, cap)?;
    let x = fam.alphabet_size();
    let base = &fam.levels()[0];
    let k0 = usize_of(&base.k)?;
    let pad = usize_of(&(&base.ell - &base.k))?;
    let mut t = match fam.t0_variant() {
        T0Variant::SuffixPad => {
            ExplicitLanguage::full(x, k0).concat(&ExplicitLanguage::zeros(x, pad))
        }
        T0Variant::PrefixPad => {
            ExplicitLanguage::zeros(x, pad).concat(&ExplicitLanguage::full(x, k0))
        }
    };
    for j in 0..i {
        let step = fam.levels()[j].step.as_ref().expect("non-final level");
        let r = usize_of(&step.r)?;
        let mut next = ExplicitLanguage::zeros(x, 0);
        for _ in 0..r {
            next = next.concat(&t);
        }
        t = next.concat(&appendix_language(fam, j)?);
    }
    Ok(t)
}

/// A product `L_1 L_2 ... L_m` of explicit languages, kept unexpanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredLanguage {
    factors: Vec<ExplicitLanguage>,
}

impl FactoredLanguage {
    pub fn factors(&self) -> &[ExplicitLanguage] {
        &self.factors
    }

    pub fn word_len(&self) -> usize {
        self.factors.iter().map(|f| f.word_len()).sum()
    }

    /// Number of words in the product.
    pub fn size(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, f| acc * BigUint::from(f.len()))
    }

    /// Distinct prefixes of each length `0..=word_len`: a length-`l` prefix
    /// picks a whole word from every factor it covers and a prefix of the
    /// factor it ends in.
    pub fn structure(&self) -> Vec<BigUint> {
        let mut out = vec![BigUint::one()];
        let mut done = BigUint::one();
        for f in &self.factors {
            let counts = brute_structure(f);
            for c in counts.iter().skip(1) {
                out.push(&done * BigUint::from(*c));
            }
            done *= BigUint::from(f.len());
        }
        out
    }
}

/// `T_i = T_{i-1}^{r} U_{i-1}` with `T_{i-1}` and `U_{i-1}` explicit.
pub fn brute_trees_factored(
    fam: &TreeFamily,
    i: usize,
    cap: u64,
) -> Result<FactoredLanguage, OracleError> {
    if i == 0 {
        return Err(OracleError::NoFactorization);
    }
    if i >= fam.levels().len() {
        return Err(OracleError::LevelOutOfRange(i));
    }
    let below = &fam.levels()[i - 1];
    let step = below.step.as_ref().expect("non-final level");
    let appendix_len = &step.p * &below.ell;
    if step.appendix == Appendix::Full {
        let size = BigUint::from(fam.alphabet_size())
            .pow(appendix_len.to_u32().unwrap_or(u32::MAX).min(4096));
        if size > BigUint::from(cap) {
            return Err(OracleError::CapExceeded {
                level: i,
                size,
                cap,
            });
        }
    }
    let total = &fam.levels()[i].ell;
    if *total > BigUint::from(MAX_FACTORED_LEN) {
        return Err(OracleError::TooLong(total.clone()));
    }
    let prev = brute_trees(fam, i - 1, cap)?;
    let r = usize_of(&step.r)?;
    let mut factors = vec![prev; r];
    let u = appendix_language(fam, i - 1)?;
    if u.word_len() > 0 {
        factors.push(u);
    }
    Ok(FactoredLanguage { factors })
}

/// `s(l)` = number of distinct length-`l` prefixes, for `l = 0..=word_len`.
pub fn brute_structure(lang: &ExplicitLanguage) -> Vec<u64> {
    (0..=lang.word_len)
        .map(|l| {
            let set: HashSet<&[u8]> = lang.words.iter().map(|w| &w[..l]).collect();
            set.len() as u64
        })
        .collect()
}

/// True iff any two prefixes of equal length have the same number of
/// extensions of every length inside the prefix set.
pub fn brute_balance(lang: &ExplicitLanguage) -> bool {
    let words: Vec<&Vec<u8>> = lang.words.iter().collect();
    let n = lang.word_len;
    if words.len() <= 1 {
        return true;
    }
    // lcp[j] = common prefix length of words j and j+1 (sorted order)
    let lcp: Vec<usize> = words
        .windows(2)
        .map(|p| {
            p[0].iter()
                .zip(p[1].iter())
                .take_while(|(a, b)| a == b)
                .count()
        })
        .collect();
    for d in 0..=n {
        let mut reference: Option<Vec<usize>> = None;
        let mut start = 0;
        while start < words.len() {
            let mut end = start;
            while end < lcp.len() && lcp[end] >= d {
                end += 1;
            }
            // group of words start..=end shares its length-d prefix; the
            // number of distinct length-m prefixes is 1 + #{internal lcp < m}
            let mut hist = vec![0usize; n + 1];
            for &c in &lcp[start..end] {
                hist[c] += 1;
            }
            let mut profile = Vec::with_capacity(n - d + 1);
            let mut below = 0;
            for (m, h) in hist.iter().enumerate() {
                if m >= d {
                    profile.push(1 + below);
                }
                below += h;
            }
            match &reference {
                None => reference = Some(profile),
                Some(r) if *r != profile => return false,
                Some(_) => {}
            }
            start = end + 1;
        }
    }
    true
}

/// `V_E` by its defining recursion: `V(e) = 1` and
/// `V(wx) = |X| / |pref E ∩ wX| · V(w)` for `wx ∈ pref E`. Words absent from
/// the map have value 0.
pub fn brute_martingale(lang: &ExplicitLanguage) -> BTreeMap<Word, Rat> {
    let mut out = BTreeMap::new();
    if lang.is_empty() {
        return out;
    }
    let prefixes: HashSet<&[u8]> = lang
        .words
        .iter()
        .flat_map(|w| (0..=w.len()).map(move |l| &w[..l]))
        .collect();
    let x = Rat::from_integer(lang.alphabet_size.into());
    out.insert(Word::empty(), Rat::one());
    let mut frontier = vec![Vec::<u8>::new()];
    while let Some(w) = frontier.pop() {
        if w.len() == lang.word_len {
            continue;
        }
        let v = out[&Word(w.clone())].clone();
        let children: Vec<Vec<u8>> = (0..lang.alphabet_size)
            .map(|c| {
                let mut u = w.clone();
                u.push(c as u8);
                u
            })
            .filter(|u| prefixes.contains(u.as_slice()))
            .collect();
        let share = Rat::new(x.numer().clone(), children.len().into());
        for c in children {
            out.insert(Word(c.clone()), &share * &v);
            frontier.push(c);
        }
    }
    debug_assert!(out.values().all(|v| !v.is_zero()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{derive_family, GrowthPolicy};
    use crate::rat::rat;
    use crate::sequences::QSequence;

    fn fam(q: Vec<Rat>, v: T0Variant) -> TreeFamily {
        let n = q.len() - 1;
        derive_family(&QSequence::explicit(q), n, &GrowthPolicy::trivial(), v, 2).unwrap()
    }

    fn lang(words: &[&str]) -> ExplicitLanguage {
        ExplicitLanguage::new(
            2,
            words
                .iter()
                .map(|w| w.bytes().map(|b| b - b'0').collect::<Vec<u8>>()),
        )
        .unwrap()
    }

    fn strings(l: &ExplicitLanguage) -> Vec<String> {
        l.words().map(|w| w.render(2)).collect()
    }

    #[test]
    fn family_a_trees() {
        let a = fam(vec![rat(1, 2), rat(1, 3)], T0Variant::SuffixPad);
        assert_eq!(
            strings(&brute_trees(&a, 0, DEFAULT_CAP).unwrap()),
            ["00", "10"]
        );
        let t1 = brute_trees(&a, 1, DEFAULT_CAP).unwrap();
        assert_eq!(strings(&t1), ["000000", "001000", "100000", "101000"]);
        assert_eq!(brute_structure(&t1), [1, 2, 2, 4, 4, 4, 4]);
        assert!(brute_balance(&t1));
    }

    #[test]
    fn family_b_trees() {
        let b = fam(vec![rat(1, 3), rat(1, 2)], T0Variant::PrefixPad);
        let t1 = brute_trees(&b, 1, DEFAULT_CAP).unwrap();
        assert_eq!(t1.len(), 64);
        assert_eq!(t1.word_len(), 12);
        assert!(brute_balance(&t1));
        assert!(matches!(
            brute_trees(&b, 1, 10),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn factored_matches_explicit() {
        let b = fam(vec![rat(1, 3), rat(1, 2)], T0Variant::PrefixPad);
        let t1 = brute_trees(&b, 1, DEFAULT_CAP).unwrap();
        let f = brute_trees_factored(&b, 1, DEFAULT_CAP).unwrap();
        assert_eq!(f.size(), BigUint::from(t1.len()));
        let direct: Vec<BigUint> = brute_structure(&t1)
            .into_iter()
            .map(BigUint::from)
            .collect();
        assert_eq!(f.structure(), direct);
    }

    #[test]
    fn small_languages() {
        assert_eq!(brute_structure(&lang(&["000"])), [1, 1, 1, 1]);
        assert_eq!(brute_structure(&ExplicitLanguage::full(2, 2)), [1, 2, 4]);
        assert!(!brute_balance(&lang(&["00", "01", "10"])));
        assert!(brute_balance(&lang(&["0110"])));
        assert!(ExplicitLanguage::new(2, vec![vec![0], vec![0, 1]]).is_err());
    }

    #[test]
    fn martingale_recursion() {
        let a = fam(vec![rat(1, 2), rat(1, 3)], T0Variant::SuffixPad);
        let t1 = brute_trees(&a, 1, DEFAULT_CAP).unwrap();
        let v = brute_martingale(&t1);
        assert_eq!(v[&Word::empty()], rat(1, 1));
        assert_eq!(v[&Word(vec![1])], rat(1, 1));
        assert_eq!(v[&Word(vec![1, 0])], rat(2, 1));
        assert!(!v.contains_key(&Word(vec![1, 1])));
    }
}
