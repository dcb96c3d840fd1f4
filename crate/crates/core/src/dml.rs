//! Return times of an orbit to a subvariety, split into arithmetic
//! progressions that persist to the horizon and a sporadic residual.

use num_bigint::BigInt;
use thiserror::Error;

use crate::arith::Rational;
use crate::poly::{parse_polynomial, PolyError, Polynomial, RationalMap, Vars};

pub const DEFAULT_MIN_TERMS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DmlError {
    #[error("subvariety needs at least one equation")]
    NoEquations,
    #[error("orbit leaves the affine chart at n = {n}")]
    OrbitUndefined { n: usize, hits: Vec<usize> },
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Common zero locus of a nonempty list of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subvariety {
    equations: Vec<Polynomial>,
}

impl Subvariety {
    pub fn new(equations: Vec<Polynomial>) -> Result<Self, DmlError> {
        if equations.is_empty() {
            return Err(DmlError::NoEquations);
        }
        Ok(Subvariety { equations })
    }

    pub fn parse<S: AsRef<str>>(vars: &Vars, equations: &[S]) -> Result<Self, DmlError> {
        let eqs = equations
            .iter()
            .map(|e| parse_polynomial(e.as_ref(), vars))
            .collect::<Result<Vec<_>, _>>()?;
        Subvariety::new(eqs)
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.equations.iter().all(|e| e.eval(point) == Rational::from_integer(0.into()))
    }
}

/// `{n <= horizon : Φ^n(start) in Y}` by exact evaluation.
pub fn return_set(
    map: &RationalMap,
    start: &[Rational],
    y: &Subvariety,
    horizon: usize,
) -> Result<Vec<usize>, DmlError> {
    if start.len() != map.dimension() || y.equations.iter().any(|e| e.nvars() != map.dimension()) {
        return Err(DmlError::DimensionMismatch);
    }
    let mut hits = Vec::new();
    let mut point = start.to_vec();
    for n in 0..=horizon {
        if y.contains(&point) {
            hits.push(n);
        }
        if n == horizon {
            break;
        }
        point = match map.apply(&point) {
            Ok(p) => p,
            Err(_) => return Err(DmlError::OrbitUndefined { n: n + 1, hits }),
        };
    }
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Progression {
    pub a: usize,
    pub d: usize,
}

impl Progression {
    pub fn terms(&self, horizon: usize) -> impl Iterator<Item = usize> {
        (self.a..=horizon).step_by(self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnDecomposition {
    pub horizon: usize,
    pub hits: Vec<usize>,
    pub progressions: Vec<Progression>,
    pub residual: Vec<usize>,
    /// `|residual| / (N + 1)`.
    pub residual_prefix_density: Rational,
}

impl ReturnDecomposition {
    /// `{"hits": [...], "progressions": [{"a":..,"d":..}], "residual": [...],
    /// "residual_density": "p/q"}`.
    pub fn to_json(&self) -> serde_json::Value {
        let progressions: Vec<serde_json::Value> = self
            .progressions
            .iter()
            .map(|p| serde_json::json!({"a": p.a, "d": p.d}))
            .collect();
        serde_json::json!({
            "hits": self.hits,
            "progressions": progressions,
            "residual": self.residual,
            "residual_density": self.residual_prefix_density.to_string(),
        })
    }
}

/// Greedy split of `hits` into progressions `(a, d)`: repeatedly take the
/// smallest `d` (then smallest `a`) whose terms up to the horizon are all
/// remaining hits, whose last term is within `d` of the horizon, and which
/// has at least `min_terms` terms.
pub fn ap_decompose(
    hits: &[usize],
    horizon: usize,
    min_terms: usize,
) -> Result<ReturnDecomposition, DmlError> {
    if min_terms < 3 {
        return Err(DmlError::InvalidParameter(format!("min_terms must be >= 3, got {min_terms}")));
    }
    if let Some(&h) = hits.iter().find(|&&h| h > horizon) {
        return Err(DmlError::InvalidParameter(format!("hit {h} is beyond the horizon {horizon}")));
    }
    let mut sorted = hits.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut remaining = vec![false; horizon + 1];
    for &h in &sorted {
        remaining[h] = true;
    }
    let mut progressions = Vec::new();
    while let Some(p) = next_progression(&remaining, horizon, min_terms) {
        for t in p.terms(horizon) {
            remaining[t] = false;
        }
        progressions.push(p);
    }
    let residual: Vec<usize> = (0..=horizon).filter(|&n| remaining[n]).collect();
    let residual_prefix_density =
        Rational::new(BigInt::from(residual.len()), BigInt::from(horizon + 1));
    Ok(ReturnDecomposition {
        horizon,
        hits: sorted,
        progressions,
        residual,
        residual_prefix_density,
    })
}

fn next_progression(remaining: &[bool], horizon: usize, min_terms: usize) -> Option<Progression> {
    let span = (min_terms - 1).max(1);
    for d in 1..=horizon / span {
        // a + (min_terms - 1) d <= N, and the progression runs to the end
        for a in 0..=horizon - span * d {
            if !remaining[a] {
                continue;
            }
            let p = Progression { a, d };
            if p.terms(horizon).all(|t| remaining[t]) {
                // the last term is automatically within d of the horizon
                return Some(p);
            }
        }
    }
    None
}
