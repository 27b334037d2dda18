//! Exact arithmetic on sums `Σ c_j · B^(e_j)` with rational `c_j`, `e_j`.
//!
//! Values are rewritten over the primitive root `g` of the base (`B = g^s`,
//! `g` not a perfect power) with exponents reduced into `[0, 1)`. For such `g`
//! the numbers `g^φ`, `φ ∈ [0, 1) ∩ Q` are linearly independent over the
//! rationals, so a sum is zero iff every grouped coefficient is zero, and a
//! non-zero sum always has its sign settled by finite interval refinement.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rat::{floor_rat, format_rat, rat_pow, Rat};

/// Working-precision ceiling for interval refinement, in bits.
const MAX_BITS: usize = 1 << 14;

/// A base `B >= 2` together with its primitive root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radix {
    base: u32,
    root: u32,
    mult: u32,
}

impl Radix {
    pub fn new(base: u32) -> Radix {
        assert!(base >= 2, "radix base must be at least 2");
        for s in (2..=32u32).rev() {
            if let Some(g) = integer_root(base, s) {
                return Radix {
                    base,
                    root: g,
                    mult: s,
                };
            }
        }
        Radix {
            base,
            root: base,
            mult: 1,
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// `(g, s)` with `base = g^s`.
    pub fn root(&self) -> (u32, u32) {
        (self.root, self.mult)
    }

    /// `log_g(c)` when it is rational (it is then an integer), else `None`.
    fn exact_log_root(&self, c: &Rat) -> Option<BigInt> {
        if !c.is_positive() {
            return None;
        }
        let g = BigInt::from(self.root);
        let power_of = |mut x: BigInt| -> Option<i64> {
            let mut t = 0i64;
            while x > BigInt::one() {
                let (q, r) = x.div_rem(&g);
                if !r.is_zero() {
                    return None;
                }
                x = q;
                t += 1;
            }
            Some(t)
        };
        if c.denom().is_one() {
            power_of(c.numer().clone()).map(BigInt::from)
        } else if c.numer().is_one() {
            power_of(c.denom().clone()).map(|t| BigInt::from(-t))
        } else {
            None
        }
    }
}

fn integer_root(base: u32, s: u32) -> Option<u32> {
    let approx = (base as f64).powf(1.0 / s as f64).round() as u64;
    for g in approx.saturating_sub(1).max(2)..=approx + 1 {
        if (g as u128).checked_pow(s) == Some(base as u128) {
            return Some(g as u32);
        }
    }
    None
}

/// `coef · B^exp` in the table's own base, kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scaled {
    pub coef: Rat,
    pub exp: Rat,
}

impl Scaled {
    pub fn zero() -> Self {
        Scaled {
            coef: Rat::zero(),
            exp: Rat::zero(),
        }
    }

    pub fn rational(v: Rat) -> Self {
        Scaled {
            coef: v,
            exp: Rat::zero(),
        }
    }

    /// Folds the integer part of the exponent into the coefficient so the
    /// stored exponent lies in `[0, 1)`.
    pub fn new(coef: Rat, exp: Rat, base: u32) -> Self {
        if coef.is_zero() {
            return Scaled::zero();
        }
        let n = floor_rat(&exp);
        let frac = &exp - Rat::from_integer(n.clone());
        let coef = coef * rat_pow(&Rat::from_integer(BigInt::from(base)), &n);
        Scaled { coef, exp: frac }
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        self.exp.is_zero().then_some(&self.coef)
    }

    /// `"c"` for rationals, `"c*X^e"` otherwise.
    pub fn render(&self) -> String {
        if self.exp.is_zero() {
            format_rat(&self.coef)
        } else {
            format!("{}*X^{}", format_rat(&self.coef), format_rat(&self.exp))
        }
    }

    pub fn parse(s: &str, base: u32) -> Result<Scaled, String> {
        let t = s.trim();
        let (c, e) = match t.split_once("*X^") {
            Some((c, e)) => (c, Some(e)),
            None => match t.strip_prefix("X^") {
                Some(e) => ("1", Some(e)),
                None => (t, None),
            },
        };
        let coef = crate::rat::parse_rat(c).map_err(|e| e.to_string())?;
        let exp = match e {
            Some(e) => crate::rat::parse_rat(e).map_err(|e| e.to_string())?,
            None => Rat::zero(),
        };
        Ok(Scaled::new(coef, exp, base))
    }
}

/// A finite sum of terms `c · g^φ`, `φ ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowSum {
    radix: Radix,
    terms: BTreeMap<Rat, Rat>,
}

impl PowSum {
    pub fn zero(radix: Radix) -> Self {
        PowSum {
            radix,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_scaled(radix: Radix, v: &Scaled) -> Self {
        let mut s = PowSum::zero(radix);
        s.add_scaled(v);
        s
    }

    /// Adds `coef · B^exp`.
    pub fn add_term(&mut self, coef: &Rat, exp: &Rat) {
        if coef.is_zero() {
            return;
        }
        let x = exp * Rat::from_integer(BigInt::from(self.radix.mult));
        let n = floor_rat(&x);
        let phi = &x - Rat::from_integer(n.clone());
        let c = coef * rat_pow(&Rat::from_integer(BigInt::from(self.radix.root)), &n);
        let slot = self.terms.entry(phi).or_insert_with(Rat::zero);
        *slot += c;
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn add_scaled(&mut self, v: &Scaled) {
        self.add_term(&v.coef, &v.exp);
    }

    pub fn sub_scaled(&mut self, v: &Scaled) {
        self.add_term(&-v.coef.clone(), &v.exp);
    }

    pub fn sub_sum(&mut self, other: &PowSum) {
        assert_eq!(self.radix, other.radix, "mixed radices");
        for (phi, c) in &other.terms {
            let slot = self.terms.entry(phi.clone()).or_insert_with(Rat::zero);
            *slot -= c;
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    /// Divides every term by `d`.
    pub fn div_scaled(&self, d: &Scaled) -> PowSum {
        assert!(!d.is_zero(), "division by zero");
        let mut out = PowSum::zero(self.radix);
        let s = Rat::from_integer(BigInt::from(self.radix.mult));
        for (phi, c) in &self.terms {
            // c·g^φ / (d.coef·B^d.exp), exponent expressed in base B
            let exp = phi / &s - &d.exp;
            out.add_term(&(c / &d.coef), &exp);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when it is rational.
    pub fn as_rational(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Rat::zero()).cloned(),
            _ => None,
        }
    }

    /// Rational enclosure `[lo, hi]` of the value.
    pub fn enclose(&self, bits: usize) -> (Rat, Rat) {
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for (phi, c) in &self.terms {
            let (a, b) = root_power_enclosure(self.radix.root, phi, bits);
            if c.is_positive() {
                lo += c * &a;
                hi += c * &b;
            } else {
                lo += c * &b;
                hi += c * &a;
            }
        }
        (lo, hi)
    }

    pub fn signum(&self) -> Ordering {
        if self.terms.is_empty() {
            return Ordering::Equal;
        }
        if self.terms.values().all(|c| c.is_positive()) {
            return Ordering::Greater;
        }
        if self.terms.values().all(|c| c.is_negative()) {
            return Ordering::Less;
        }
        let mut bits = 32;
        while bits <= MAX_BITS {
            let (lo, hi) = self.enclose(bits);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
        unreachable!("sign of a non-zero power sum was not resolved")
    }

    /// `log_B` of a positive sum, exact when rational, otherwise bracketed
    /// to width at most `2^-bits`.
    pub fn log(&self, bits: usize) -> LogValue {
        assert_eq!(
            self.signum(),
            Ordering::Greater,
            "log of a non-positive sum"
        );
        let s = Rat::from_integer(BigInt::from(self.radix.mult));
        let g = self.radix.root;
        if self.terms.len() == 1 {
            let (phi, c) = self.terms.iter().next().unwrap();
            if let Some(t) = self.radix.exact_log_root(c) {
                return LogValue::Exact((Rat::from_integer(t) + phi) / &s);
            }
            let (lo, hi) = log_root_bracket(g, c, bits);
            return LogValue::Bracket {
                lo: (lo + phi) / &s,
                hi: (hi + phi) / &s,
            };
        }
        let target = Rat::new(BigInt::one(), BigInt::one() << bits);
        let mut enc = bits + 16;
        loop {
            let (a, b) = self.enclose(enc);
            if a.is_positive() {
                let (lo, _) = log_root_bracket(g, &a, bits + 2);
                let (_, hi) = log_root_bracket(g, &b, bits + 2);
                let (lo, hi) = (lo / &s, hi / &s);
                if &hi - &lo <= target || enc >= MAX_BITS {
                    return LogValue::Bracket { lo, hi };
                }
            }
            enc *= 2;
        }
    }
}

impl fmt::Display for PowSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0/1");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(phi, c)| {
                if phi.is_zero() {
                    format_rat(c)
                } else {
                    format!("{}*{}^{}", format_rat(c), self.radix.root, format_rat(phi))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogValue {
    Exact(Rat),
    Bracket { lo: Rat, hi: Rat },
}

impl LogValue {
    pub fn lo(&self) -> &Rat {
        match self {
            LogValue::Exact(v) => v,
            LogValue::Bracket { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &Rat {
        match self {
            LogValue::Exact(v) => v,
            LogValue::Bracket { hi, .. } => hi,
        }
    }
}

/// Enclosure of `g^φ`, `φ ∈ [0, 1)`, with width at most `g · 2^-bits`.
fn root_power_enclosure(g: u32, phi: &Rat, bits: usize) -> (Rat, Rat) {
    if phi.is_zero() {
        return (Rat::one(), Rat::one());
    }
    let num = phi.numer().to_u64().expect("small exponent numerator");
    let den = phi.denom().to_u32().expect("small exponent denominator");
    // Largest Y with (Y / 2^bits)^den <= g^num, found by bisection on integers.
    let target = BigUint::from(g).pow(num as u32) << (bits * den as usize);
    let mut lo = BigUint::one() << bits;
    let mut hi = BigUint::from(g) << bits;
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1usize;
        if mid.pow(den) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scale = BigInt::one() << bits;
    let a = Rat::new(BigInt::from_biguint(Sign::Plus, lo), scale.clone());
    let b = Rat::new(BigInt::from_biguint(Sign::Plus, hi), scale);
    (a, b)
}

/// `[lo, hi]` containing `log_g(x)` for rational `x > 0`, width `2^-bits`
/// (or less if the value was found exactly by the caller).
fn log_root_bracket(g: u32, x: &Rat, bits: usize) -> (Rat, Rat) {
    let gr = Rat::from_integer(BigInt::from(g));
    // integer part
    let mut n = BigInt::zero();
    let mut y = x.clone();
    while y >= gr {
        y /= &gr;
        n += 1;
    }
    while y < Rat::one() {
        y *= &gr;
        n -= 1;
    }
    let gbig = BigInt::from(g);
    let mut work = bits + 64;
    loop {
        let scale = BigInt::one() << work;
        let scaled = &y * Rat::from_integer(scale.clone());
        let mut ylo = scaled.floor().to_integer();
        let mut yhi = scaled.ceil().to_integer();
        let gw = &gbig << work;
        let mut frac = BigInt::zero();
        let mut j = 0usize;
        while j < bits {
            ylo = (&ylo * &ylo) >> work;
            let sq = &yhi * &yhi;
            yhi = ceil_shift(&sq, work);
            let bit = if yhi < gw {
                0
            } else if ylo >= gw {
                ylo = ylo.div_floor(&gbig);
                yhi = ceil_div_int(&yhi, &gbig);
                1
            } else {
                break;
            };
            frac = (frac << 1) + bit;
            j += 1;
        }
        if j == bits || work >= MAX_BITS {
            let den = BigInt::one() << j;
            let lo = Rat::from_integer(n.clone()) + Rat::new(frac.clone(), den.clone());
            let hi = &lo + Rat::new(BigInt::one(), den);
            return (lo, hi);
        }
        work *= 2;
    }
}

fn ceil_shift(x: &BigInt, k: usize) -> BigInt {
    let d = BigInt::one() << k;
    ceil_div_int(x, &d)
}

fn ceil_div_int(x: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = x.div_mod_floor(d);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}
