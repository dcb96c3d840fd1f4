//! Forward orbits of a rational self-map, the observable sequence
//! `f(Φ^n(x))` with its heights, windowed repeat detection, and height-gap
//! diagnostics against `log n`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::arith::{format_point, height_projective, segre_product, P1Value, PrimitiveVector, Rational};
use crate::poly::{Evaluation, RationalFunction, RationalMap};
use crate::report::fmt_real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("dimension mismatch: map has {map} variables, {what} has {got}")]
    DimensionMismatch {
        map: usize,
        what: &'static str,
        got: usize,
    },
    #[error("horizon {horizon} is shorter than the window length {ell}")]
    HorizonTooShort { horizon: usize, ell: usize },
    #[error("no rows in the requested tail window")]
    EmptyTail,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Completed,
    /// The map left the affine chart while computing row `n`.
    HitMapIndeterminacy(usize),
    /// The observable was 0/0 at the point of row `n`.
    HitObservableIndeterminacy(usize),
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Completed => f.write_str("completed"),
            StopReason::HitMapIndeterminacy(n) => write!(f, "map-indeterminacy@{n}"),
            StopReason::HitObservableIndeterminacy(n) => write!(f, "observable-indeterminacy@{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRow {
    pub n: usize,
    pub point: Vec<Rational>,
    pub value: P1Value,
    pub height: f64,
}

#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub map: RationalMap,
    pub observable: RationalFunction,
    pub start: Vec<Rational>,
    pub rows: Vec<OrbitRow>,
    pub horizon: usize,
    pub stop_reason: StopReason,
}

impl OrbitTrace {
    /// Index of the last computed row, or `None` for an empty trace.
    pub fn last_index(&self) -> Option<usize> {
        self.rows.last().map(|r| r.n)
    }

    pub fn values(&self) -> impl Iterator<Item = &P1Value> {
        self.rows.iter().map(|r| &r.value)
    }

    pub fn is_complete(&self) -> bool {
        self.stop_reason == StopReason::Completed
    }

    /// CSV with columns `n,point,value,height,ratio`; the ratio
    /// `height / log n` is left empty for `n <= 1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,point,value,height,ratio\n");
        for r in &self.rows {
            let ratio = if r.n <= 1 {
                String::new()
            } else {
                fmt_real(r.height / (r.n as f64).ln())
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                format_point(&r.point),
                r.value,
                fmt_real(r.height),
                ratio
            ));
        }
        out
    }
}

/// Iterates `map` from `start` for rows `n = 0..=horizon`, stopping early
/// at the first chart exit or indeterminate observable value.
pub fn iterate_orbit(
    map: &RationalMap,
    observable: &RationalFunction,
    start: &[Rational],
    horizon: usize,
) -> Result<OrbitTrace, OrbitError> {
    let dim = map.dimension();
    if observable.vars().len() != dim {
        return Err(OrbitError::DimensionMismatch {
            map: dim,
            what: "observable",
            got: observable.vars().len(),
        });
    }
    if start.len() != dim {
        return Err(OrbitError::DimensionMismatch {
            map: dim,
            what: "start point",
            got: start.len(),
        });
    }
    let mut rows = Vec::with_capacity(horizon.min(1 << 16) + 1);
    let mut point = start.to_vec();
    let mut stop_reason = StopReason::Completed;
    for n in 0..=horizon {
        let value = match observable.evaluate(&point).expect("dimension checked") {
            Evaluation::Value(v) => v,
            Evaluation::Indeterminate => {
                stop_reason = StopReason::HitObservableIndeterminacy(n);
                break;
            }
        };
        let next = if n < horizon { Some(map.apply(&point)) } else { None };
        let height = value.height();
        match next {
            None => {
                rows.push(OrbitRow { n, point, value, height });
                break;
            }
            Some(Ok(p)) => {
                rows.push(OrbitRow {
                    n,
                    point: std::mem::replace(&mut point, p),
                    value,
                    height,
                });
            }
            Some(Err(_)) => {
                rows.push(OrbitRow { n, point, value, height });
                stop_reason = StopReason::HitMapIndeterminacy(n + 1);
                break;
            }
        }
    }
    Ok(OrbitTrace {
        map: map.clone(),
        observable: observable.clone(),
        start: start.to_vec(),
        rows,
        horizon,
        stop_reason,
    })
}

/// A pair of equal observable windows `y_i = y_j`, with the last index `k`
/// such that `v_m = v_{m + (j - i)}` was checked for every `i <= m <= k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowRepeat {
    pub i: usize,
    pub j: usize,
    pub verified_to: usize,
}

impl WindowRepeat {
    pub fn period(&self) -> usize {
        self.j - self.i
    }
}

/// Finds the lexicographically first `i < j` whose windows
/// `(v_i, ..., v_{i+ell})` and `(v_j, ..., v_{j+ell})` coincide.
pub fn detect_window_repeat(
    trace: &OrbitTrace,
    ell: usize,
) -> Result<Option<WindowRepeat>, OrbitError> {
    let last = trace.last_index().unwrap_or(0);
    if trace.rows.is_empty() || last < ell {
        return Err(OrbitError::HorizonTooShort { horizon: last, ell });
    }
    let mut intern: HashMap<&P1Value, usize> = HashMap::new();
    let ids: Vec<usize> = trace
        .rows
        .iter()
        .map(|r| {
            let next = intern.len();
            *intern.entry(&r.value).or_insert(next)
        })
        .collect();
    Ok(first_repeat(&ids, ell))
}

/// Repeat search on interned value ids.
pub(crate) fn first_repeat(ids: &[usize], ell: usize) -> Option<WindowRepeat> {
    if ids.len() <= ell {
        return None;
    }
    let last = ids.len() - 1;
    let mut seen: HashMap<&[usize], (usize, Option<usize>)> = HashMap::new();
    for start in 0..=(last - ell) {
        let w = &ids[start..=start + ell];
        seen.entry(w)
            .and_modify(|e| {
                if e.1.is_none() {
                    e.1 = Some(start);
                }
            })
            .or_insert((start, None));
    }
    let (i, j) = seen
        .values()
        .filter_map(|&(a, b)| b.map(|b| (a, b)))
        .min()?;
    let p = j - i;
    let mut k = i;
    while k + 1 + p <= last && ids[k + 1] == ids[k + 1 + p] {
        k += 1;
    }
    Some(WindowRepeat { i, j, verified_to: k })
}

/// Height of the Segre product of the values in rows `i..=i+ell`.
pub fn window_height(trace: &OrbitTrace, i: usize, ell: usize) -> Option<f64> {
    let window = trace.rows.get(i..=i + ell)?;
    let mut acc: PrimitiveVector = window[0].value.vector().clone();
    for r in &window[1..] {
        acc = segre_product(&acc, r.value.vector());
    }
    Some(height_projective(&acc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub n0: usize,
    pub horizon: usize,
    pub tail_start: usize,
    pub tail_sup: f64,
    pub tail_sup_at: usize,
    pub tail_inf: f64,
    /// `(C, |{n in [N0, N] : h_n <= C log n}| / (N - N0 + 1))`.
    pub below_curve_density: Vec<(f64, Rational)>,
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_N0: usize = 2;

/// First index of the tail window `[max(N0, ceil((1 - frac) N)), N]`.
pub fn tail_start(n0: usize, horizon: usize, tail_fraction: f64) -> usize {
    let t = ((1.0 - tail_fraction) * horizon as f64).ceil() as usize;
    n0.max(t)
}

pub(crate) fn check_gap_params(n0: usize, tail_fraction: f64) -> Result<(), OrbitError> {
    if n0 < 2 {
        return Err(OrbitError::InvalidParameter(format!("N0 must be at least 2, got {n0}")));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(OrbitError::InvalidParameter(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    Ok(())
}

/// Max and min of `h_n / log n` over the tail window of a height list
/// indexed from 0. Returns `(sup, argmax, inf, tail_start)`.
pub(crate) fn tail_extremes(
    heights: &[f64],
    n0: usize,
    tail_fraction: f64,
) -> Result<(f64, usize, f64, usize), OrbitError> {
    check_gap_params(n0, tail_fraction)?;
    let horizon = heights.len().checked_sub(1).ok_or(OrbitError::EmptyTail)?;
    if horizon < n0 {
        return Err(OrbitError::EmptyTail);
    }
    let start = tail_start(n0, horizon, tail_fraction);
    let mut sup = f64::NEG_INFINITY;
    let mut arg = start;
    let mut inf = f64::INFINITY;
    for (n, h) in heights.iter().enumerate().take(horizon + 1).skip(start) {
        let r = h / (n as f64).ln();
        if r > sup {
            sup = r;
            arg = n;
        }
        inf = inf.min(r);
    }
    Ok((sup, arg, inf, start))
}

pub fn gap_diagnostics(
    trace: &OrbitTrace,
    n0: usize,
    tail_fraction: f64,
    curve_constants: &[f64],
) -> Result<GapReport, OrbitError> {
    let heights: Vec<f64> = trace.rows.iter().map(|r| r.height).collect();
    let (tail_sup, tail_sup_at, tail_inf, start) = tail_extremes(&heights, n0, tail_fraction)?;
    let horizon = heights.len() - 1;
    let span = BigInt::from(horizon - n0 + 1);
    let below_curve_density = curve_constants
        .iter()
        .map(|&c| {
            let count = (n0..=horizon)
                .filter(|&n| heights[n] <= c * (n as f64).ln())
                .count();
            (c, Rational::new(BigInt::from(count), span.clone()))
        })
        .collect();
    Ok(GapReport {
        n0,
        horizon,
        tail_start: start,
        tail_sup,
        tail_sup_at,
        tail_inf,
        below_curve_density,
    })
}

/// Which of the two open upper bounds on ε to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpsilonMode {
    /// `1 / ([K:Q] 2^(ell+1))` for the single-orbit limsup argument.
    Limsup { ell: u32, deg_k: u32 },
    /// `1 / (2^((d+1)^2 + 1) κ)` for the uniform version.
    Uniform { d: u32, kappa: Rational },
}

/// Exact open bound; any admissible ε must be strictly smaller.
pub fn epsilon_bounds(mode: &EpsilonMode) -> Result<Rational, OrbitError> {
    match mode {
        EpsilonMode::Limsup { ell, deg_k } => {
            if *deg_k == 0 {
                return Err(OrbitError::InvalidParameter("field degree must be >= 1".into()));
            }
            let den = BigInt::from(*deg_k) << (*ell as usize + 1);
            Ok(Rational::new(BigInt::from(1), den))
        }
        EpsilonMode::Uniform { d, kappa } => {
            if kappa <= &Rational::zero() {
                return Err(OrbitError::InvalidParameter("kappa must be positive".into()));
            }
            let e = chain_length_bound(*d) as usize + 1;
            let two_pow = Rational::from_integer(BigInt::from(1) << e);
            Ok((two_pow * kappa).recip())
        }
    }
}

/// `(d+1)^2`, the strict upper bound on the length of a descending chain of
/// stable closed sets in dimension `d`.
pub fn chain_length_bound(d: u32) -> u64 {
    let k = d as u64 + 1;
    k * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_rational, rational_from_int};
    use crate::poly::{parse_expression, vars};

    fn trace(map: &[&str], vs: &[&str], f: &str, start: &[i64], n: usize) -> OrbitTrace {
        let v = vars(vs);
        let m = RationalMap::parse(&v, map).unwrap();
        let f = parse_expression(f, &v).unwrap();
        let s: Vec<Rational> = start.iter().map(|&x| rational_from_int(x)).collect();
        iterate_orbit(&m, &f, &s, n).unwrap()
    }

    #[test]
    fn translation_orbit() {
        let t = trace(&["x+1"], &["x"], "x", &[0], 5);
        let vals: Vec<String> = t.values().map(|v| v.to_string()).collect();
        assert_eq!(vals, ["0", "1", "2", "3", "4", "5"]);
        let expect = [0.0, 0.0, 2f64.ln(), 3f64.ln(), 4f64.ln(), 5f64.ln()];
        for (r, e) in t.rows.iter().zip(expect) {
            assert!((r.height - e).abs() < 1e-14);
        }
        assert!(t.is_complete());
    }

    #[test]
    fn doubling_orbit() {
        let t = trace(&["2*x"], &["x"], "x", &[1], 4);
        let vals: Vec<String> = t.values().map(|v| v.to_string()).collect();
        assert_eq!(vals, ["1", "2", "4", "8", "16"]);
        for r in &t.rows {
            assert!((r.height - r.n as f64 * 2f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn chart_exit() {
        let t = trace(&["y", "x/(x-1)"], &["x", "y"], "x", &[1, 1], 4);
        assert_eq!(t.stop_reason, StopReason::HitMapIndeterminacy(1));
        assert_eq!(t.rows.len(), 1);
        let t = trace(&["x+1"], &["x"], "x/(x-2)*(x-2)", &[0], 4);
        assert_eq!(t.stop_reason, StopReason::HitObservableIndeterminacy(2));
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn dimension_checks() {
        let v = vars(&["x"]);
        let m = RationalMap::parse(&v, &["x"]).unwrap();
        let f = parse_expression("x", &v).unwrap();
        let err = iterate_orbit(&m, &f, &[], 3).unwrap_err();
        assert!(matches!(err, OrbitError::DimensionMismatch { .. }));
    }

    #[test]
    fn window_repeats() {
        assert_eq!(
            first_repeat(&[0, 0, 0, 0, 0, 0], 2),
            Some(WindowRepeat { i: 0, j: 1, verified_to: 4 })
        );
        assert_eq!(
            first_repeat(&[0, 1, 0, 1, 0, 1, 0], 1),
            Some(WindowRepeat { i: 0, j: 2, verified_to: 4 })
        );
        assert_eq!(first_repeat(&[0, 1, 2, 3, 4], 1), None);
        // preperiod 2, period 3
        let r = first_repeat(&[9, 8, 0, 1, 2, 0, 1, 2, 0, 1], 1).unwrap();
        assert_eq!((r.i, r.j, r.verified_to), (2, 5, 6));
        // lexicographic: (0, 4) beats (1, 3)
        let r = first_repeat(&[0, 1, 2, 1, 0], 0).unwrap();
        assert_eq!((r.i, r.j), (0, 4));
        // window too short to certify beyond the break
        let r = first_repeat(&[0, 1, 0, 1, 5, 6], 1).unwrap();
        assert_eq!((r.i, r.j, r.verified_to), (0, 2, 1));
    }

    #[test]
    fn window_repeat_on_traces() {
        let t = trace(&["x"], &["x"], "x", &[5], 10);
        let r = detect_window_repeat(&t, 2).unwrap().unwrap();
        assert_eq!((r.i, r.j, r.verified_to), (0, 1, 9));
        let t = trace(&["3-x"], &["x"], "x", &[1], 10);
        let r = detect_window_repeat(&t, 1).unwrap().unwrap();
        assert_eq!((r.i, r.j), (0, 2));
        let t = trace(&["x+1"], &["x"], "x", &[0], 10);
        assert_eq!(detect_window_repeat(&t, 1).unwrap(), None);
        assert_eq!(
            detect_window_repeat(&t, 11),
            Err(OrbitError::HorizonTooShort { horizon: 10, ell: 11 })
        );
    }

    #[test]
    fn window_height_is_sum_of_heights() {
        let t = trace(&["x+1/3"], &["x"], "x", &[2], 12);
        for i in 0..8 {
            let sum: f64 = t.rows[i..=i + 3].iter().map(|r| r.height).sum();
            let wh = window_height(&t, i, 3).unwrap();
            assert!((wh - sum).abs() < 1e-12 * sum.max(1.0));
        }
    }

    #[test]
    fn gap_examples() {
        let t = trace(&["x+1"], &["x"], "x", &[1], 10_000);
        let g = gap_diagnostics(&t, 2, 0.5, &[0.5]).unwrap();
        assert!(g.tail_sup >= 1.0 && g.tail_sup <= 1.001, "{}", g.tail_sup);
        assert_eq!(g.tail_start, 5000);
        assert_eq!(g.below_curve_density, vec![(0.5, Rational::zero())]);
        let t = trace(&["x"], &["x"], "x", &[5], 10_000);
        let g = gap_diagnostics(&t, 2, 0.5, &[]).unwrap();
        assert!(g.tail_sup <= 0.19);
        assert!((g.tail_sup - 5f64.ln() / 5000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gap_errors() {
        let t = trace(&["x+1"], &["x"], "x", &[1], 3);
        assert!(matches!(gap_diagnostics(&t, 1, 0.5, &[]), Err(OrbitError::InvalidParameter(_))));
        assert!(matches!(gap_diagnostics(&t, 2, 0.0, &[]), Err(OrbitError::InvalidParameter(_))));
        assert_eq!(gap_diagnostics(&t, 4, 0.5, &[]), Err(OrbitError::EmptyTail));
    }

    #[test]
    fn epsilon_examples() {
        let q = |s: &str| parse_rational(s).unwrap();
        assert_eq!(epsilon_bounds(&EpsilonMode::Limsup { ell: 0, deg_k: 1 }).unwrap(), q("1/2"));
        assert_eq!(epsilon_bounds(&EpsilonMode::Limsup { ell: 3, deg_k: 2 }).unwrap(), q("1/32"));
        let u = epsilon_bounds(&EpsilonMode::Uniform { d: 1, kappa: q("21/10") }).unwrap();
        assert_eq!(u, q("10/672"));
        assert!(epsilon_bounds(&EpsilonMode::Limsup { ell: 0, deg_k: 0 }).is_err());
        assert!(epsilon_bounds(&EpsilonMode::Uniform { d: 1, kappa: q("0") }).is_err());
        assert_eq!(chain_length_bound(1), 4);
        assert_eq!(chain_length_bound(3), 16);
    }

    #[test]
    fn csv_layout() {
        let t = trace(&["x+1"], &["x"], "x", &[0], 2);
        assert_eq!(
            t.to_csv(),
            "n,point,value,height,ratio\n0,0,0,0.000000,\n1,1,1,0.000000,\n2,2,2,0.693147,1.000000\n"
        );
    }
}
