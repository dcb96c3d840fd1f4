//! Orbits of several commuting self-maps indexed by N^m, with slices by
//! the 1-norm of the multi-index.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{P1Value, Rational};
use crate::density::EventuallyPeriodicSet;
use crate::poly::{compose, Evaluation, PolyError, RationalFunction, RationalMap};
use crate::report::fmt_real;

pub const DEFAULT_MAX_MAPS: usize = 3;
pub const DEFAULT_MAX_NORM: usize = 200;

pub type MultiIndex = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommutingError {
    #[error("no maps given")]
    NoMaps,
    #[error("maps do not share variables and dimension")]
    VariableMismatch,
    #[error("maps {0} and {1} do not commute (component {2})")]
    NotCommuting(usize, usize, usize),
    #[error("grid limits exceeded: {0}")]
    LimitExceeded(String),
    #[error("no slice of T in [N0, N] has a defined entry")]
    EmptyIntersection,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Outcome of the symbolic commutation check. Indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingCheck {
    pub commuting: bool,
    /// First failing pair `(i, j)` and component index.
    pub witness: Option<(usize, usize, usize)>,
    /// `Φ_i ∘ Φ_j` for every examined pair `i < j`.
    pub composites: Vec<((usize, usize), RationalMap)>,
}

/// Checks `Φ_i ∘ Φ_j = Φ_j ∘ Φ_i` componentwise by cross-multiplication.
pub fn check_commuting(maps: &[RationalMap]) -> Result<CommutingCheck, CommutingError> {
    let first = maps.first().ok_or(CommutingError::NoMaps)?;
    if maps.iter().any(|m| m.vars() != first.vars()) {
        return Err(CommutingError::VariableMismatch);
    }
    let mut composites = Vec::new();
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let ij = compose(&maps[i], &maps[j])?;
            let ji = compose(&maps[j], &maps[i])?;
            let bad = ij
                .components()
                .iter()
                .zip(ji.components())
                .position(|(a, b)| !crate::poly::rf_equal(a, b));
            composites.push(((i + 1, j + 1), ij));
            if let Some(c) = bad {
                return Ok(CommutingCheck {
                    commuting: false,
                    witness: Some((i + 1, j + 1, c + 1)),
                    composites,
                });
            }
        }
    }
    Ok(CommutingCheck {
        commuting: true,
        witness: None,
        composites,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub value: P1Value,
    pub height: f64,
}

/// Size limits for `grid_orbit`; `allow_large` lifts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLimits {
    pub max_maps: usize,
    pub max_norm: usize,
    pub allow_large: bool,
}

impl Default for GridLimits {
    fn default() -> Self {
        GridLimits {
            max_maps: DEFAULT_MAX_MAPS,
            max_norm: DEFAULT_MAX_NORM,
            allow_large: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiTrace {
    pub maps: Vec<RationalMap>,
    pub observable: RationalFunction,
    pub start: Vec<Rational>,
    pub horizon: usize,
    pub entries: BTreeMap<MultiIndex, GridEntry>,
    /// Indices where the point or the observable value is undefined.
    pub undefined_at: BTreeSet<MultiIndex>,
    points: BTreeMap<MultiIndex, Vec<Rational>>,
}

impl MultiTrace {
    pub fn point(&self, idx: &[usize]) -> Option<&[Rational]> {
        self.points.get(idx).map(Vec::as_slice)
    }

    /// CSV with columns `n1..nm,value,height`, multi-indices in
    /// lexicographic order.
    pub fn to_csv(&self) -> String {
        let m = self.maps.len();
        let mut header: Vec<String> = (1..=m).map(|i| format!("n{i}")).collect();
        header.push("value".into());
        header.push("height".into());
        let mut out = header.join(",");
        out.push('\n');
        for (idx, e) in &self.entries {
            for n in idx {
                out.push_str(&format!("{n},"));
            }
            out.push_str(&format!("{},{}\n", e.value, fmt_real(e.height)));
        }
        out
    }
}

/// All multi-indices of length `m` with 1-norm exactly `s`, in
/// lexicographic order.
pub fn indices_of_norm(m: usize, s: usize) -> Vec<MultiIndex> {
    fn go(m: usize, s: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if m == 1 {
            prefix.push(s);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=s).rev() {
            prefix.push(k);
            go(m - 1, s - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        go(m, s, &mut Vec::new(), &mut out);
    }
    out.reverse();
    out
}

/// Fills `Φ^n(start)` for all `‖n‖ <= horizon`, wave by wave in the norm.
/// Each entry comes from its predecessor along the first nonzero axis.
pub fn grid_orbit(
    maps: &[RationalMap],
    observable: &RationalFunction,
    start: &[Rational],
    horizon: usize,
    limits: GridLimits,
) -> Result<MultiTrace, CommutingError> {
    let check = check_commuting(maps)?;
    if let Some((i, j, c)) = check.witness {
        return Err(CommutingError::NotCommuting(i, j, c));
    }
    let m = maps.len();
    if !limits.allow_large && (m > limits.max_maps || horizon > limits.max_norm) {
        return Err(CommutingError::LimitExceeded(format!(
            "m = {m}, N = {horizon} (limits m <= {}, N <= {})",
            limits.max_maps, limits.max_norm
        )));
    }
    let dim = maps[0].dimension();
    if observable.vars() != maps[0].vars() || start.len() != dim {
        return Err(CommutingError::VariableMismatch);
    }
    let mut points: BTreeMap<MultiIndex, Vec<Rational>> = BTreeMap::new();
    let mut entries = BTreeMap::new();
    let mut undefined_at = BTreeSet::new();
    let origin = vec![0; m];
    points.insert(origin, start.to_vec());
    for s in 1..=horizon {
        let wave = indices_of_norm(m, s);
        let computed: Vec<(MultiIndex, Option<Vec<Rational>>)> = wave
            .into_par_iter()
            .map(|idx| {
                let axis = idx.iter().position(|&k| k > 0).expect("norm >= 1");
                let mut pred = idx.clone();
                pred[axis] -= 1;
                let p = points.get(&pred).and_then(|p| maps[axis].apply(p).ok());
                (idx, p)
            })
            .collect();
        for (idx, p) in computed {
            match p {
                Some(p) => {
                    points.insert(idx, p);
                }
                None => {
                    undefined_at.insert(idx);
                }
            }
        }
    }
    for (idx, p) in &points {
        match observable.evaluate(p)? {
            Evaluation::Value(value) => {
                let height = value.height();
                entries.insert(idx.clone(), GridEntry { value, height });
            }
            Evaluation::Indeterminate => {
                undefined_at.insert(idx.clone());
            }
        }
    }
    Ok(MultiTrace {
        maps: maps.to_vec(),
        observable: observable.clone(),
        start: start.to_vec(),
        horizon,
        entries,
        undefined_at,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceRow {
    pub s: usize,
    /// Max height over defined entries with `‖n‖ = s`.
    pub max_height: f64,
    pub ratio: f64,
    pub argmax: MultiIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub rows: Vec<SliceRow>,
    pub sup_ratio: f64,
    pub sup_at: usize,
}

impl SliceReport {
    /// CSV with columns `s,M_s,ratio,argmax`; the arg-max index is written
    /// as `(n1;n2;...)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,M_s,ratio,argmax\n");
        for r in &self.rows {
            let arg: Vec<String> = r.argmax.iter().map(|k| k.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},({})\n",
                r.s,
                fmt_real(r.max_height),
                fmt_real(r.ratio),
                arg.join(";")
            ));
        }
        out
    }
}

/// `sup_{s in T ∩ [N0, N]} M_s / log s` with `M_s` the largest height on
/// the slice `‖n‖ = s`, restricted to indices accepted by `keep`.
pub fn norm_sliced_diagnostics_filtered(
    trace: &MultiTrace,
    set: &EventuallyPeriodicSet,
    n0: usize,
    keep: impl Fn(&[usize]) -> bool,
) -> Result<SliceReport, CommutingError> {
    if n0 < 2 {
        return Err(CommutingError::InvalidParameter(format!("N0 must be at least 2, got {n0}")));
    }
    let mut slices: BTreeMap<usize, (BigInt, &MultiIndex, f64)> = BTreeMap::new();
    for (idx, e) in &trace.entries {
        let s: usize = idx.iter().sum();
        if s < n0 || !set.contains(s as u64) || !keep(idx) {
            continue;
        }
        // Exact comparison on the multiplicative height; ties keep the
        // lexicographically first index.
        let h = e.value.max_abs();
        match slices.get(&s) {
            Some((best, _, _)) if *best >= h => {}
            _ => {
                slices.insert(s, (h, idx, e.height));
            }
        }
    }
    let rows: Vec<SliceRow> = slices
        .into_iter()
        .map(|(s, (_, idx, h))| SliceRow {
            s,
            max_height: h,
            ratio: h / (s as f64).ln(),
            argmax: idx.clone(),
        })
        .collect();
    let best = rows
        .iter()
        .fold(None::<&SliceRow>, |acc, r| match acc {
            Some(a) if a.ratio >= r.ratio => Some(a),
            _ => Some(r),
        })
        .ok_or(CommutingError::EmptyIntersection)?;
    let (sup_ratio, sup_at) = (best.ratio, best.s);
    Ok(SliceReport {
        rows,
        sup_ratio,
        sup_at,
    })
}

pub fn norm_sliced_diagnostics(
    trace: &MultiTrace,
    set: &EventuallyPeriodicSet,
    n0: usize,
) -> Result<SliceReport, CommutingError> {
    norm_sliced_diagnostics_filtered(trace, set, n0, |_| true)
}
