//! Exact rationals, primitive projective coordinates over Q and the
//! absolute logarithmic Weil height.
//!
//! Over Q every point of projective space has a representative with coprime
//! integer coordinates, unique up to sign. The height is then the log of the
//! largest coordinate in absolute value, so all exact comparisons of heights
//! reduce to comparisons of integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number, always stored in lowest terms with positive
/// denominator. Displays as `p/q`, or `p` when `q = 1`.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("all coordinates are zero")]
    AllZero,
    #[error("empty coordinate list")]
    Empty,
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("invalid projective point literal {0:?}")]
    BadPoint(String),
}

/// Parses `p`, `-p` or `p/q`. Whitespace around the parts is ignored.
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let bad = || ArithError::BadRational(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn rational_from_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Natural log of |x| for a nonzero big integer, with full double precision
/// regardless of magnitude.
pub fn log_abs(x: &BigInt) -> f64 {
    debug_assert!(!x.is_zero());
    let mag = x.magnitude();
    let bits = mag.bits();
    if bits <= 1000 {
        return mag.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    // Keep 64 leading bits; the discarded tail changes the value by < 2^-63
    // relative, well below f64 resolution.
    let shift = bits - 64;
    let top = (mag >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Canonical representative of a point of projective space over Q: coprime
/// integers, not all zero, first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveVector {
    coords: Vec<BigInt>,
}

impl PrimitiveVector {
    /// Canonicalizes an integer vector (divides by the gcd and fixes the sign).
    pub fn from_integers(mut coords: Vec<BigInt>) -> Result<Self, ArithError> {
        if coords.is_empty() {
            return Err(ArithError::Empty);
        }
        let mut g = BigInt::zero();
        for c in &coords {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return Err(ArithError::AllZero);
        }
        let lead_negative = coords
            .iter()
            .find(|c| !c.is_zero())
            .map(|c| c.is_negative())
            .unwrap_or(false);
        if lead_negative {
            g = -g;
        }
        if !g.is_one() {
            for c in coords.iter_mut() {
                *c = &*c / &g;
            }
        }
        Ok(PrimitiveVector { coords })
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Projective dimension `n` for a point of P^n.
    pub fn dimension(&self) -> usize {
        self.coords.len() - 1
    }

    /// max_i |x_i|, the multiplicative height.
    pub fn max_abs(&self) -> BigInt {
        self.coords
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn is_height_zero(&self) -> bool {
        self.coords.iter().all(|c| c.abs() <= BigInt::one())
    }
}

impl fmt::Display for PrimitiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for PrimitiveVector {
    type Err = ArithError;

    /// Parses `(a:b:...)`; entries may be rationals and are normalized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| ArithError::BadPoint(s.to_string()))?;
        let raw = inner
            .split(':')
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()?;
        normalize_projective(&raw)
    }
}

/// Returns the unique primitive vector projectively equal to `raw`.
pub fn normalize_projective(raw: &[Rational]) -> Result<PrimitiveVector, ArithError> {
    if raw.is_empty() {
        return Err(ArithError::Empty);
    }
    let mut den_lcm = BigInt::one();
    for q in raw {
        den_lcm = den_lcm.lcm(q.denom());
    }
    let ints = raw
        .iter()
        .map(|q| q.numer() * (&den_lcm / q.denom()))
        .collect();
    PrimitiveVector::from_integers(ints)
}

/// log max_i |x_i| on primitive coordinates.
pub fn height_projective(p: &PrimitiveVector) -> f64 {
    let m = p.max_abs();
    if m.is_one() {
        0.0
    } else {
        log_abs(&m)
    }
}

/// Height of q as the point (numerator : denominator) of P^1.
pub fn height_rational(q: &Rational) -> f64 {
    let m = std::cmp::max(q.numer().abs(), q.denom().abs());
    if m.is_one() {
        0.0
    } else {
        log_abs(&m)
    }
}

/// Multiplicative height max(|p|, q) of a rational, for exact comparisons.
pub fn multiplicative_height(q: &Rational) -> BigInt {
    std::cmp::max(q.numer().abs(), q.denom().abs())
}

/// Segre product: all pairwise products `p_i * q_j` in row-major order.
pub fn segre_product(p: &PrimitiveVector, q: &PrimitiveVector) -> PrimitiveVector {
    let coords: Vec<BigInt> = p
        .coords
        .iter()
        .flat_map(|a| q.coords.iter().map(move |b| a * b))
        .collect();
    // Gauss's lemma: the product of primitive vectors is primitive, and the
    // leading coordinate is a product of two positive leading coordinates.
    debug_assert!(coords.iter().fold(BigInt::zero(), |g, c| g.gcd(c)).is_one());
    PrimitiveVector { coords }
}

/// A value of a rational map to P^1, written `(a : b)`. Affine value `a/b`
/// when `b != 0`, otherwise the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct P1Value(PrimitiveVector);

impl P1Value {
    pub fn from_vector(v: PrimitiveVector) -> Option<Self> {
        (v.coords.len() == 2).then_some(P1Value(v))
    }

    pub fn from_rational(q: &Rational) -> Self {
        // Coprime already; only the sign convention may flip.
        let v = PrimitiveVector::from_integers(vec![q.numer().clone(), q.denom().clone()])
            .expect("denominator is nonzero");
        P1Value(v)
    }

    pub fn infinity() -> Self {
        P1Value(PrimitiveVector {
            coords: vec![BigInt::one(), BigInt::zero()],
        })
    }

    pub fn is_infinity(&self) -> bool {
        self.0.coords[1].is_zero()
    }

    /// The affine value `a/b`, or `None` at infinity.
    pub fn affine(&self) -> Option<Rational> {
        let [a, b] = [&self.0.coords[0], &self.0.coords[1]];
        (!b.is_zero()).then(|| Rational::new(a.clone(), b.clone()))
    }

    pub fn vector(&self) -> &PrimitiveVector {
        &self.0
    }

    pub fn height(&self) -> f64 {
        height_projective(&self.0)
    }

    pub fn max_abs(&self) -> BigInt {
        self.0.max_abs()
    }
}

impl fmt::Display for P1Value {
    /// Affine values print as rationals, infinity as `inf`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.affine() {
            Some(q) => write!(f, "{q}"),
            None => f.write_str("inf"),
        }
    }
}

/// Renders a point of affine space as semicolon-joined rationals.
pub fn format_point(point: &[Rational]) -> String {
    point
        .iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
