//! TOML documents describing a family, either by its driving sequence and
//! growth policy or by an explicit list of derived levels, and gale tables.
//!
//! All rationals are written as `"num/den"` strings and all naturals as
//! decimal strings, so nothing passes through floating point.
//!
//! ```toml
//! alphabet_size = 2
//! t0_variant = "suffix-pad"
//! n_levels = 2
//!
//! [sequence]
//! kind = "explicit"
//! terms = ["1/2", "1/3", "2/5"]
//!
//! [growth]
//! preset = "trivial"
//! ```
//!
//! A derived document (what `treedim derive` writes) additionally or instead
//! carries one `[[levels]]` table per level with `q`, `k`, `ell` and, except
//! for the last level, `r`, `p`, `kappa` and `appendix`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{
    derive_family, Appendix, DerivationError, GrowthFn, GrowthPolicy, LevelParams, Transition,
};
use crate::gales::{GaleError, GaleTable};
use crate::power::Scaled;
use crate::rat::{format_rat, parse_nat, parse_rat, ParseNumberError, Rat};
use crate::sequences::{QSequence, SequenceError};
use crate::treefam::{T0Variant, TreeError, TreeFamily, Word};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("field {field}: {source}")]
    Number {
        field: String,
        source: ParseNumberError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Gale(#[from] GaleError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceDoc {
    Explicit {
        terms: Vec<String>,
    },
    Alternating {
        c: String,
        d: String,
        m: u64,
    },
    Geometric {
        target: String,
        start: String,
        ratio: String,
    },
    Oscillating {
        c: String,
        d: String,
        m: u64,
        period: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthPreset {
    /// `l_i >= i^2`, `l_{i+1} >= (i + 1) l_i`.
    Default,
    /// No constraint beyond the smallest exact block.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GrowthPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_ell: Option<GrowthFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<GrowthFn>,
}

impl GrowthDoc {
    pub fn policy(&self) -> GrowthPolicy {
        let mut p = match self.preset.unwrap_or(GrowthPreset::Default) {
            GrowthPreset::Default => GrowthPolicy::default(),
            GrowthPreset::Trivial => GrowthPolicy::trivial(),
        };
        if let Some(f) = self.min_ell {
            p.min_ell = f;
        }
        if let Some(f) = self.min_ratio {
            p.min_ratio = f;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    pub i: usize,
    pub q: String,
    pub k: String,
    pub ell: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appendix: Option<Appendix>,
}

/// The on-disk family document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub alphabet_size: u32,
    pub t0_variant: T0Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelDoc>,
}

fn num_rat(field: &str, s: &str) -> Result<Rat, ConfigError> {
    parse_rat(s).map_err(|source| ConfigError::Number {
        field: field.to_string(),
        source,
    })
}

fn num_nat(field: &str, s: &str) -> Result<crate::rat::Nat, ConfigError> {
    parse_nat(s).map_err(|source| ConfigError::Number {
        field: field.to_string(),
        source,
    })
}

impl SequenceDoc {
    pub fn to_sequence(&self) -> Result<QSequence, ConfigError> {
        Ok(match self {
            SequenceDoc::Explicit { terms } => QSequence::explicit(
                terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| num_rat(&format!("sequence.terms[{i}]"), t))
                    .collect::<Result<_, _>>()?,
            ),
            SequenceDoc::Alternating { c, d, m } => {
                QSequence::alternating(num_rat("sequence.c", c)?, num_rat("sequence.d", d)?, *m)?
            }
            SequenceDoc::Geometric {
                target,
                start,
                ratio,
            } => QSequence::geometric(
                num_rat("sequence.target", target)?,
                num_rat("sequence.start", start)?,
                num_rat("sequence.ratio", ratio)?,
            )?,
            SequenceDoc::Oscillating { c, d, m, period } => QSequence::oscillating(
                num_rat("sequence.c", c)?,
                num_rat("sequence.d", d)?,
                *m,
                *period,
            )?,
        })
    }
}

/// The recipe half of a family document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub alphabet_size: u32,
    pub t0_variant: T0Variant,
    pub n_levels: usize,
    pub sequence: QSequence,
    pub policy: GrowthPolicy,
}

impl FamilySpec {
    pub fn derive(&self) -> Result<TreeFamily, DerivationError> {
        derive_family(
            &self.sequence,
            self.n_levels,
            &self.policy,
            self.t0_variant,
            self.alphabet_size,
        )
    }
}

/// A parsed family document. Listed levels are kept as written, without
/// structural validation, so that a checker can report what is wrong with
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedFamily {
    pub alphabet_size: u32,
    pub t0_variant: T0Variant,
    pub spec: Option<FamilySpec>,
    /// Levels as written, each with the `q` it claims.
    pub listed: Option<Vec<(Rat, LevelParams)>>,
}

impl LoadedFamily {
    /// The family to work with: the listed levels when present, otherwise
    /// the derivation from the recipe.
    pub fn family(&self) -> Result<TreeFamily, ConfigError> {
        match (&self.listed, &self.spec) {
            (Some(levels), _) => Ok(TreeFamily::new(
                self.alphabet_size,
                self.t0_variant,
                levels.iter().map(|(_, l)| l.clone()).collect(),
            )?),
            (None, Some(spec)) => Ok(spec.derive()?),
            (None, None) => Err(ConfigError::Invalid(
                "document has neither a sequence nor levels".into(),
            )),
        }
    }
}

impl FamilyDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("family documents always serialize")
    }

    pub fn interpret(&self) -> Result<LoadedFamily, ConfigError> {
        if !(2..=256).contains(&self.alphabet_size) {
            return Err(TreeError::InvalidAlphabet(self.alphabet_size).into());
        }
        let spec = match &self.sequence {
            Some(seq) => {
                let n_levels = self.n_levels.ok_or_else(|| {
                    ConfigError::Invalid("n_levels is required with a sequence".into())
                })?;
                let sequence = seq.to_sequence()?;
                let report = sequence.validate(n_levels as u64 + 1);
                if !report.is_ok() {
                    return Err(SequenceError::Inadmissible(report).into());
                }
                Some(FamilySpec {
                    alphabet_size: self.alphabet_size,
                    t0_variant: self.t0_variant,
                    n_levels,
                    sequence,
                    policy: self.growth.clone().unwrap_or_default().policy(),
                })
            }
            None => None,
        };
        let listed = if self.levels.is_empty() {
            None
        } else {
            Some(self.parse_levels()?)
        };
        if spec.is_none() && listed.is_none() {
            return Err(ConfigError::Invalid(
                "document has neither a sequence nor levels".into(),
            ));
        }
        Ok(LoadedFamily {
            alphabet_size: self.alphabet_size,
            t0_variant: self.t0_variant,
            spec,
            listed,
        })
    }

    fn parse_levels(&self) -> Result<Vec<(Rat, LevelParams)>, ConfigError> {
        let mut out = Vec::with_capacity(self.levels.len());
        for (pos, lv) in self.levels.iter().enumerate() {
            if lv.i != pos {
                return Err(ConfigError::Invalid(format!(
                    "levels out of order: entry {pos} has i = {}",
                    lv.i
                )));
            }
            let f = |name: &str| format!("levels[{pos}].{name}");
            let q = num_rat(&f("q"), &lv.q)?;
            let k = num_nat(&f("k"), &lv.k)?;
            let ell = num_nat(&f("ell"), &lv.ell)?;
            let step = match (&lv.r, &lv.p, &lv.kappa, lv.appendix) {
                (Some(r), Some(p), Some(kappa), Some(appendix)) => Some(Transition {
                    r: num_nat(&f("r"), r)?,
                    p: num_nat(&f("p"), p)?,
                    kappa: num_nat(&f("kappa"), kappa)?,
                    appendix,
                }),
                (None, None, None, None) => None,
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "levels[{pos}]: r, p, kappa and appendix must appear together"
                    )))
                }
            };
            out.push((q, LevelParams { k, ell, step }));
        }
        Ok(out)
    }

    /// The document for `fam`, keeping the recipe fields of `self`.
    pub fn with_levels(&self, fam: &TreeFamily) -> FamilyDoc {
        let levels = fam
            .levels()
            .iter()
            .enumerate()
            .map(|(i, lv)| LevelDoc {
                i,
                q: format_rat(&lv.q()),
                k: lv.k.to_string(),
                ell: lv.ell.to_string(),
                r: lv.step.as_ref().map(|s| s.r.to_string()),
                p: lv.step.as_ref().map(|s| s.p.to_string()),
                kappa: lv.step.as_ref().map(|s| s.kappa.to_string()),
                appendix: lv.step.as_ref().map(|s| s.appendix),
            })
            .collect();
        FamilyDoc {
            levels,
            ..self.clone()
        }
    }
}

/// Reads and interprets a family document.
pub fn load_family(path: &Path) -> Result<LoadedFamily, ConfigError> {
    FamilyDoc::load(path)?.interpret()
}

/// On-disk gale table: `sigma` is optional, values are `"c"` or `"c*X^e"`
/// keyed by word (`""` for the empty word).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    pub alphabet_size: u32,
    pub values: BTreeMap<String, String>,
}

impl GaleDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_table(&self) -> Result<GaleTable, ConfigError> {
        let sigma = self
            .sigma
            .as_deref()
            .map(|s| num_rat("sigma", s))
            .transpose()?;
        let mut values = BTreeMap::new();
        for (w, v) in &self.values {
            let word = Word::parse(w, self.alphabet_size)?;
            let value = Scaled::parse(v, self.alphabet_size)
                .map_err(|e| ConfigError::Invalid(format!("values.{w:?}: {e}")))?;
            values.insert(word, value);
        }
        Ok(GaleTable::new(sigma, self.alphabet_size, values)?)
    }

    pub fn from_table(t: &GaleTable) -> GaleDoc {
        GaleDoc {
            sigma: t.sigma().map(format_rat),
            alphabet_size: t.alphabet_size(),
            values: t
                .values()
                .iter()
                .map(|(w, v)| (w.render(t.alphabet_size()), v.render()))
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("gale documents always serialize")
    }
}
