//! Counting points of P^n(Q) of bounded height by direct enumeration of
//! primitive integer vectors, compared against the limit `2^n / ζ(n+1)`.

use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::report::{fmt_opt_real, fmt_real};

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchanuelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration box of {needed} vectors exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub n: u32,
    pub bound: u64,
    /// Number of points with multiplicative height at most `bound`.
    pub count: u64,
    /// `count / bound^(n+1)`.
    pub ratio: f64,
    /// `log count / log bound`; undefined for `bound = 1`.
    pub kappa_fit: Option<f64>,
}

fn box_size(n: u32, bound: u64) -> Option<u128> {
    (2 * bound as u128 + 1).checked_pow(n + 1)
}

fn check_params(n: u32, bound: u64, budget: u128) -> Result<(), SchanuelError> {
    if n < 1 {
        return Err(SchanuelError::InvalidParameter("dimension must be at least 1".into()));
    }
    if bound < 1 {
        return Err(SchanuelError::InvalidParameter("bound must be at least 1".into()));
    }
    let needed = box_size(n, bound).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(SchanuelError::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Completions of a partial vector with running gcd `g` by `depth` more
/// coordinates in `[-bound, bound]` that make the whole vector primitive.
fn count_completions(depth: u32, g: u64, bound: u64) -> u64 {
    if g == 1 {
        return (2 * bound + 1).pow(depth);
    }
    if depth == 0 {
        return 0;
    }
    // x and -x share a gcd; 0 keeps g unchanged.
    let mut total = count_completions(depth - 1, g, bound);
    for x in 1..=bound {
        total += 2 * count_completions(depth - 1, g.gcd(&x), bound);
    }
    total
}

/// Exact `#{P in P^n(Q) : H(P) <= bound}`, enumerating vectors whose first
/// nonzero coordinate is positive and keeping the primitive ones.
pub fn count_points(n: u32, bound: u64, budget: u128) -> Result<CountReport, SchanuelError> {
    check_params(n, bound, budget)?;
    // Leading position k (zeros before it) and leading value c > 0.
    let work: Vec<(u32, u64)> = (0..=n)
        .flat_map(|k| (1..=bound).map(move |c| (k, c)))
        .collect();
    let count: u64 = work
        .par_iter()
        .map(|&(k, c)| count_completions(n - k, c, bound))
        .sum();
    Ok(report(n, bound, count))
}

fn report(n: u32, bound: u64, count: u64) -> CountReport {
    let b = bound as f64;
    CountReport {
        n,
        bound,
        count,
        ratio: count as f64 / b.powi(n as i32 + 1),
        kappa_fit: (bound > 1).then(|| (count as f64).ln() / b.ln()),
    }
}

fn mobius_table(limit: u64) -> Vec<i8> {
    let limit = limit as usize;
    let mut mu = vec![1i8; limit + 1];
    let mut is_composite = vec![false; limit + 1];
    for p in 2..=limit {
        if is_composite[p] {
            continue;
        }
        for m in (p..=limit).step_by(p) {
            if m > p {
                is_composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        if let Some(sq) = p.checked_mul(p).filter(|&sq| sq <= limit) {
            for m in (sq..=limit).step_by(sq) {
                mu[m] = 0;
            }
        }
    }
    mu
}

/// Möbius-inversion count `(1/2) Σ_d μ(d) ((2⌊B/d⌋ + 1)^(n+1) - 1)`.
pub fn count_points_mobius(n: u32, bound: u64) -> Result<u128, SchanuelError> {
    if n < 1 || bound < 1 {
        return Err(SchanuelError::InvalidParameter("need n >= 1 and B >= 1".into()));
    }
    let mu = mobius_table(bound);
    let mut total: i128 = 0;
    for d in 1..=bound {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        let side = 2 * (bound / d) as i128 + 1;
        let nonzero = side
            .checked_pow(n + 1)
            .ok_or_else(|| SchanuelError::InvalidParameter("count overflows".into()))?
            - 1;
        total += m as i128 * nonzero;
    }
    Ok((total / 2) as u128)
}

/// Riemann zeta at an integer `s >= 2`: 10^6 terms summed smallest first,
/// plus the Euler-Maclaurin tail `M^(1-s)/(s-1) - M^(-s)/2`, whose error is
/// below `s M^(-s-1) / 12 < 10^-12`.
pub fn zeta(s: u32) -> f64 {
    assert!(s >= 2, "zeta needs s >= 2");
    const M: u32 = 1_000_000;
    let sf = s as f64;
    let mut sum = 0.0f64;
    for k in (1..M).rev() {
        sum += (k as f64).powf(-sf);
    }
    let m = M as f64;
    sum + m.powf(1.0 - sf) / (sf - 1.0) + 0.5 * m.powf(-sf)
}

/// Limit of `N(B) / B^(n+1)` over Q.
pub fn analytic_constant(n: u32) -> f64 {
    2f64.powi(n as i32) / zeta(n + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchanuelFit {
    pub n: u32,
    pub reports: Vec<CountReport>,
    pub analytic_constant: f64,
}

impl SchanuelFit {
    /// CSV with columns `B,count,ratio,kappa_fit,analytic_constant`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("B,count,ratio,kappa_fit,analytic_constant\n");
        let c = fmt_real(self.analytic_constant);
        for r in &self.reports {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.bound,
                r.count,
                fmt_real(r.ratio),
                fmt_opt_real(r.kappa_fit),
                c
            ));
        }
        out
    }
}

pub fn schanuel_fit(n: u32, bounds: &[u64], budget: u128) -> Result<SchanuelFit, SchanuelError> {
    if bounds.is_empty() {
        return Err(SchanuelError::InvalidParameter("bound list is empty".into()));
    }
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SchanuelError::InvalidParameter("bounds must be increasing".into()));
    }
    let reports = bounds
        .iter()
        .map(|&b| count_points(n, b, budget))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SchanuelFit {
        n,
        reports,
        analytic_constant: analytic_constant(n),
    })
}
