//! P-recursive sequences: exact term expansion, height-growth
//! classification and the encoding of a recurrence as a rational self-map
//! whose observable reproduces the sequence.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{height_rational, parse_rational, Rational};
use crate::orbit::{tail_extremes, OrbitError, DEFAULT_TAIL_FRACTION};
use crate::poly::{parse_polynomial, vars, PolyError, Polynomial, RationalFunction, RationalMap, Vars};

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_N0: usize = 10;
pub const DEFAULT_HORIZON: usize = 500;

/// Largest integer scanned when locating singular indices.
const ROOT_SCAN_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DfiniteError {
    #[error("recurrence needs at least two coefficients")]
    OrderTooSmall,
    #[error("order {order} does not match {got} coefficients")]
    OrderMismatch { order: usize, got: usize },
    #[error("leading coefficient is identically zero")]
    ZeroLeadingCoefficient,
    #[error("coefficient {index}: {source}")]
    Coefficient { index: usize, source: PolyError },
    #[error("coefficients must be polynomials in the single variable n")]
    NotUnivariate,
    #[error("initial term a_{0} is required but missing")]
    MissingInitialTerm(u64),
    #[error("leading coefficient vanishes at n = {0}; a_(n+order) must be supplied")]
    MissingSingularTerm(u64),
    #[error("invalid initial term: {0}")]
    BadInitialTerm(String),
    #[error("singular index search exceeds {ROOT_SCAN_LIMIT}")]
    SingularSearchTooLarge,
    #[error("need terms beyond N0 = {n0}, got horizon {horizon}")]
    HorizonTooShort { n0: usize, horizon: usize },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// `sum_k p_k(n) a_{n+k} = 0` for `n >= offset`, with supplied terms at
/// the start and at every index where `p_r(n)` vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PRecurrence {
    coeffs: Vec<Polynomial>,
    initial: BTreeMap<u64, Rational>,
    offset: u64,
}

/// JSON job form of a recurrence; coefficients are expressions in `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceSpec {
    pub order: usize,
    pub coeffs: Vec<String>,
    pub initial: BTreeMap<String, String>,
    #[serde(default)]
    pub offset: u64,
}

impl PRecurrence {
    pub fn new(
        coeffs: Vec<Polynomial>,
        initial: BTreeMap<u64, Rational>,
        offset: u64,
    ) -> Result<Self, DfiniteError> {
        if coeffs.len() < 2 {
            return Err(DfiniteError::OrderTooSmall);
        }
        if coeffs.iter().any(|p| p.nvars() != 1) {
            return Err(DfiniteError::NotUnivariate);
        }
        if coeffs.last().map(Polynomial::is_zero).unwrap_or(true) {
            return Err(DfiniteError::ZeroLeadingCoefficient);
        }
        Ok(PRecurrence {
            coeffs,
            initial,
            offset,
        })
    }

    /// Parses coefficient strings in `n` and initial terms keyed by index.
    pub fn parse<S: AsRef<str>>(
        coeffs: &[S],
        initial: &[(u64, &str)],
        offset: u64,
    ) -> Result<Self, DfiniteError> {
        let n = vars(&["n"]);
        let polys = coeffs
            .iter()
            .enumerate()
            .map(|(index, c)| {
                parse_polynomial(c.as_ref(), &n)
                    .map_err(|source| DfiniteError::Coefficient { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let init = initial
            .iter()
            .map(|&(k, v)| {
                parse_rational(v)
                    .map(|q| (k, q))
                    .map_err(|e| DfiniteError::BadInitialTerm(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        PRecurrence::new(polys, init, offset)
    }

    pub fn from_spec(spec: &RecurrenceSpec) -> Result<Self, DfiniteError> {
        if spec.coeffs.len() != spec.order + 1 {
            return Err(DfiniteError::OrderMismatch {
                order: spec.order,
                got: spec.coeffs.len(),
            });
        }
        let mut initial = Vec::with_capacity(spec.initial.len());
        for (k, v) in &spec.initial {
            let k: u64 = k
                .trim()
                .parse()
                .map_err(|_| DfiniteError::BadInitialTerm(format!("index {k:?}")))?;
            initial.push((k, v.as_str()));
        }
        PRecurrence::parse(&spec.coeffs, &initial, spec.offset)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn initial(&self) -> &BTreeMap<u64, Rational> {
        &self.initial
    }

    fn leading(&self) -> &Polynomial {
        self.coeffs.last().expect("order >= 1")
    }

    /// Indices `n >= offset` with `p_r(n) = 0`, ascending.
    pub fn singular_indices(&self) -> Result<Vec<u64>, DfiniteError> {
        let p = self.leading();
        // Integer coefficients c_0..c_d of a scalar multiple of p_r.
        let d = p.degree_in(0) as usize;
        let mut c = vec![Rational::zero(); d + 1];
        for (m, a) in p.terms() {
            c[m.exponents()[0] as usize] = a.clone();
        }
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = c[d].abs();
        // Cauchy bound: every root satisfies |x| <= 1 + max |c_i / c_d|.
        let bound = c[..d]
            .iter()
            .map(|ci| (ci.abs() / &lead).ceil().to_integer())
            .max()
            .unwrap_or_else(BigInt::zero)
            + BigInt::one();
        let bound = bound.to_u64().filter(|&b| b <= ROOT_SCAN_LIMIT);
        let Some(bound) = bound else {
            return Err(DfiniteError::SingularSearchTooLarge);
        };
        Ok((self.offset..=bound)
            .filter(|&n| p.eval(&[Rational::from_integer(BigInt::from(n))]).is_zero())
            .collect())
    }

    /// `1 + max singular index`, or `offset` when there is none.
    pub fn valid_from(&self) -> Result<u64, DfiniteError> {
        Ok(self
            .singular_indices()?
            .last()
            .map(|&n| n + 1)
            .unwrap_or(self.offset)
            .max(self.offset))
    }

    /// Exact terms `a_0..=a_horizon`.
    pub fn expand_terms(&self, horizon: usize) -> Result<Vec<Rational>, DfiniteError> {
        let r = self.order() as u64;
        let n_max = horizon as u64;
        let mut terms: Vec<Rational> = Vec::with_capacity(horizon + 1);
        let head = (self.offset + r).min(n_max + 1);
        for k in 0..head {
            let a = self
                .initial
                .get(&k)
                .ok_or(DfiniteError::MissingInitialTerm(k))?;
            terms.push(a.clone());
        }
        let mut n = self.offset;
        while n + r <= n_max {
            let x = [Rational::from_integer(BigInt::from(n))];
            let pr = self.leading().eval(&x);
            let next = if pr.is_zero() {
                self.initial
                    .get(&(n + r))
                    .cloned()
                    .ok_or(DfiniteError::MissingSingularTerm(n))?
            } else {
                let mut acc = Rational::zero();
                for k in 0..r as usize {
                    let pk = self.coeffs[k].eval(&x);
                    if !pk.is_zero() {
                        acc += pk * &terms[n as usize + k];
                    }
                }
                -acc / pr
            };
            terms.push(next);
            n += 1;
        }
        Ok(terms)
    }
}

/// A recurrence realized as `a_n = f(Φ^(n - valid_from)(start))`.
#[derive(Debug, Clone)]
pub struct DynamicsEncoding {
    pub map: RationalMap,
    pub observable: RationalFunction,
    pub start: Vec<Rational>,
    pub valid_from: u64,
}

/// State `(t, v_0, ..., v_{r-1})` models `(n, a_n, ..., a_{n+r-1})`; the
/// map shifts the window and appends `-sum_k p_k(t) v_k / p_r(t)`.
pub fn encode_as_dynamics(rec: &PRecurrence) -> Result<DynamicsEncoding, DfiniteError> {
    let r = rec.order();
    let mut names = vec!["t".to_string()];
    names.extend((0..r).map(|k| format!("v{k}")));
    let vs: Vars = vars(&names);
    let t = Polynomial::var(&vs, 0);
    let mut components = vec![RationalFunction::from_polynomial(
        t.add(&Polynomial::one(&vs)),
    )];
    for k in 1..r {
        components.push(RationalFunction::var(&vs, k + 1));
    }
    let mut num = Polynomial::zero(&vs);
    for k in 0..r {
        let pk = rec.coeffs[k].embed(&vs, &[0]);
        num = num.sub(&pk.mul(&Polynomial::var(&vs, k + 1)));
    }
    let den = rec.leading().embed(&vs, &[0]);
    components.push(RationalFunction::new(num, den).expect("nonzero leading coefficient"));
    let map = RationalMap::new(vs.clone(), components).expect("consistent variables");
    let observable = RationalFunction::var(&vs, 1);
    let valid_from = rec.valid_from()?;
    let terms = rec.expand_terms(valid_from as usize + r - 1)?;
    let mut start = vec![Rational::from_integer(BigInt::from(valid_from))];
    start.extend_from_slice(&terms[valid_from as usize..valid_from as usize + r]);
    Ok(DynamicsEncoding {
        map,
        observable,
        start,
        valid_from,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum GrowthKind {
    EventuallyPeriodic {
        preperiod: usize,
        period: usize,
        verified_to: usize,
    },
    HeightGrowth {
        tail_ratio: f64,
    },
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVerdict {
    pub kind: GrowthKind,
    pub epsilon: f64,
    pub n0: usize,
    pub horizon: usize,
    /// max of `h(a_n) / log n` over `[N0, N]`.
    pub max_ratio: f64,
}

/// Smallest preperiod `s`, then smallest period `p`, with
/// `a_{n+p} = a_n` for all `s <= n <= N - p`. The periodic stretch must
/// contain two full periods and cover at least the second half of the
/// horizon, so coincidences among the last few terms do not count.
pub fn find_eventual_period(terms: &[Rational]) -> Option<(usize, usize)> {
    let len = terms.len();
    let mut best: Option<(usize, usize)> = None;
    for p in 1..=len / 2 {
        // one past the last n with a_{n+p} != a_n
        let s = (0..len - p)
            .rev()
            .find(|&n| terms[n + p] != terms[n])
            .map(|n| n + 1)
            .unwrap_or(0);
        if s + 2 * p <= len && 2 * s <= len && best.map(|b| (s, p) < b).unwrap_or(true) {
            best = Some((s, p));
        }
    }
    best
}

/// Horizon-bounded reading of the gap dichotomy: an exactly verified
/// eventual period, sustained height growth in the tail, or neither.
pub fn classify_height_growth(
    terms: &[Rational],
    epsilon: f64,
    n0: usize,
) -> Result<GrowthVerdict, DfiniteError> {
    let horizon = terms.len().saturating_sub(1);
    if n0 < 2 || horizon <= n0 {
        return Err(DfiniteError::HorizonTooShort { n0, horizon });
    }
    let heights: Vec<f64> = terms.iter().map(height_rational).collect();
    let max_ratio = (n0..=horizon)
        .map(|n| heights[n] / (n as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    // An exact period settles the question at every epsilon, so it is
    // tested first; the ratio tests only separate growth from undecided.
    let kind = if let Some((preperiod, period)) = find_eventual_period(terms) {
        GrowthKind::EventuallyPeriodic {
            preperiod,
            period,
            verified_to: horizon,
        }
    } else if max_ratio <= epsilon {
        GrowthKind::Undecided
    } else {
        let (tail_ratio, _, _, _) = tail_extremes(&heights, n0, DEFAULT_TAIL_FRACTION)?;
        if tail_ratio > epsilon {
            GrowthKind::HeightGrowth { tail_ratio }
        } else {
            GrowthKind::Undecided
        }
    };
    Ok(GrowthVerdict {
        kind,
        epsilon,
        n0,
        horizon,
        max_ratio,
    })
}

/// Name, coefficient expressions and initial terms of a recurrence.
type CatalogEntry = (&'static str, &'static [&'static str], &'static [(u64, &'static str)]);

/// The bundled recurrences, by catalog name.
pub fn catalog_recurrences() -> Vec<(&'static str, PRecurrence)> {
    let entries: [CatalogEntry; 5] = [
        ("catalan", &["0-(4*n+2)", "n+2"], &[(0, "1")]),
        ("factorial", &["0-(n+1)", "1"], &[(0, "1")]),
        ("fibonacci", &["-1", "-1", "1"], &[(0, "0"), (1, "1")]),
        ("period-3", &["-1", "0", "0", "1"], &[(0, "1"), (1, "7"), (2, "7")]),
        ("singular", &["0-(n+1)", "n-3"], &[(0, "1"), (4, "1")]),
    ];
    entries
        .into_iter()
        .map(|(name, c, i)| (name, PRecurrence::parse(c, i, 0).expect("catalog recurrence")))
        .collect()
}
