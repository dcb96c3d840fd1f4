//! JSON job files: validation, dispatch to the analysis modules, and
//! deterministic CSV/JSON report rendering.
//!
//! Every real-valued report field is rendered with six decimals (as a JSON
//! string in the JSON report); exact quantities are written as exact
//! strings. Object keys are emitted in sorted order.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{parse_rational, Rational};
use crate::commuting::{
    check_commuting, grid_orbit, norm_sliced_diagnostics_filtered, GridLimits,
};
use crate::density::{check_lemma_shifts, EventuallyPeriodicSet, SetSpec};
use crate::dfinite::{
    classify_height_growth, encode_as_dynamics, GrowthKind, PRecurrence, RecurrenceSpec,
};
use crate::dml::{ap_decompose, return_set, DmlError, Subvariety, DEFAULT_MIN_TERMS};
use crate::orbit::{
    detect_window_repeat, gap_diagnostics, iterate_orbit, OrbitTrace, StopReason, WindowRepeat,
    DEFAULT_N0, DEFAULT_TAIL_FRACTION,
};
use crate::poly::{parse_expression, vars, RationalFunction, RationalMap, Vars};
use crate::report::{fmt_opt_real, fmt_real};
use crate::schanuel::{schanuel_fit, SchanuelError, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JobError {
    #[error("invalid job: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl JobError {
    /// Process exit code: 2 for invalid input, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Validation(_) => 2,
            JobError::Runtime(_) | JobError::Io(_) => 3,
        }
    }
}

fn invalid(msg: impl std::fmt::Display) -> JobError {
    JobError::Validation(msg.to_string())
}

fn runtime(msg: impl std::fmt::Display) -> JobError {
    JobError::Runtime(msg.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Orbit,
    Gap,
    Dfinite,
    Density,
    Schanuel,
    Dml,
    Commuting,
}

/// Either a JSON integer or a string literal for a rational.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    fn to_rational(&self) -> Result<Rational, JobError> {
        match self {
            Scalar::Int(n) => Ok(crate::arith::rational_from_int(*n)),
            Scalar::Text(s) => parse_rational(s).map_err(invalid),
        }
    }
}

/// A set given either in the text form `mod m: {...}` or as an object.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SetInput {
    Text(String),
    Spec(SetSpec),
}

impl SetInput {
    fn to_set(&self) -> Result<EventuallyPeriodicSet, JobError> {
        match self {
            SetInput::Text(s) => s.parse().map_err(invalid),
            SetInput::Spec(spec) => EventuallyPeriodicSet::from_spec(spec).map_err(invalid),
        }
    }
}

/// Raw job file. Which fields are required depends on `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub kind: JobKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    #[serde(default)]
    pub map: Option<Vec<String>>,
    #[serde(default)]
    pub maps: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub observable: Option<String>,
    #[serde(default)]
    pub start: Option<Vec<Scalar>>,
    #[serde(default, rename = "N")]
    pub horizon: Option<usize>,
    #[serde(default, rename = "N0")]
    pub n0: Option<usize>,
    #[serde(default)]
    pub ell: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub tail_fraction: Option<f64>,
    #[serde(default)]
    pub curve_constants: Option<Vec<f64>>,
    #[serde(default, rename = "T")]
    pub t_set: Option<SetInput>,
    #[serde(default, rename = "Y")]
    pub y_equations: Option<Vec<String>>,
    #[serde(default, rename = "B")]
    pub bounds: Option<Vec<u64>>,
    #[serde(default)]
    pub dimension: Option<u32>,
    #[serde(default)]
    pub min_terms: Option<usize>,
    #[serde(default)]
    pub recurrence: Option<RecurrenceSpec>,
    #[serde(default)]
    pub set: Option<SetInput>,
    #[serde(default)]
    pub shifts: Option<Vec<u64>>,
    #[serde(default)]
    pub lemma_n: Option<u64>,
    #[serde(default)]
    pub positive_axes: Option<Vec<usize>>,
    #[serde(default)]
    pub allow_large_grid: Option<bool>,
}

/// Parsed inputs shared by the orbit and gap kinds.
#[derive(Debug, Clone)]
pub struct OrbitSetup {
    pub vars: Vars,
    pub map: RationalMap,
    pub observable: RationalFunction,
    pub start: Vec<Rational>,
    pub horizon: usize,
}

/// A job whose every field has been parsed and checked.
#[derive(Debug, Clone)]
pub enum ValidJob {
    Orbit {
        setup: OrbitSetup,
        ell: Option<usize>,
    },
    Gap {
        setup: OrbitSetup,
        ell: Option<usize>,
        n0: usize,
        tail_fraction: f64,
        curve_constants: Vec<f64>,
    },
    Dfinite {
        recurrence: PRecurrence,
        horizon: usize,
        n0: usize,
        epsilon: f64,
    },
    Density {
        set: EventuallyPeriodicSet,
        horizon: usize,
        shifts: Option<(BTreeSet<u64>, u64)>,
    },
    Schanuel {
        dimension: u32,
        bounds: Vec<u64>,
    },
    Dml {
        vars: Vars,
        map: RationalMap,
        start: Vec<Rational>,
        y: Subvariety,
        horizon: usize,
        min_terms: usize,
    },
    Commuting {
        maps: Vec<RationalMap>,
        observable: RationalFunction,
        start: Vec<Rational>,
        horizon: usize,
        t_set: Option<EventuallyPeriodicSet>,
        n0: usize,
        positive_axes: Vec<usize>,
        limits: GridLimits,
    },
}

fn require<T: Clone>(v: &Option<T>, field: &str) -> Result<T, JobError> {
    v.clone().ok_or_else(|| invalid(format!("missing field {field:?}")))
}

fn parse_vars(job: &JobFile) -> Result<Vars, JobError> {
    let names = require(&job.variables, "variables")?;
    if names.is_empty() {
        return Err(invalid("variables must be nonempty"));
    }
    let unique: BTreeSet<&String> = names.iter().collect();
    if unique.len() != names.len() {
        return Err(invalid("variables must be distinct"));
    }
    Ok(vars(&names))
}

fn parse_start(job: &JobFile, dim: usize) -> Result<Vec<Rational>, JobError> {
    let start = require(&job.start, "start")?
        .iter()
        .map(Scalar::to_rational)
        .collect::<Result<Vec<_>, _>>()?;
    if start.len() != dim {
        return Err(invalid(format!("start has {} coordinates, expected {dim}", start.len())));
    }
    Ok(start)
}

fn parse_map(vars: &Vars, comps: &[String]) -> Result<RationalMap, JobError> {
    RationalMap::parse(vars, comps).map_err(|e| invalid(format!("map: {e}")))
}

fn orbit_setup(job: &JobFile) -> Result<OrbitSetup, JobError> {
    let vars = parse_vars(job)?;
    let map = parse_map(&vars, &require(&job.map, "map")?)?;
    let observable = parse_expression(&require(&job.observable, "observable")?, &vars)
        .map_err(|e| invalid(format!("observable: {e}")))?;
    let start = parse_start(job, vars.len())?;
    let horizon = require(&job.horizon, "N")?;
    Ok(OrbitSetup {
        vars,
        map,
        observable,
        start,
        horizon,
    })
}

fn check_tail_fraction(tf: f64) -> Result<f64, JobError> {
    if tf > 0.0 && tf <= 1.0 {
        Ok(tf)
    } else {
        Err(invalid(format!("tail_fraction must lie in (0, 1], got {tf}")))
    }
}

fn check_n0(n0: usize) -> Result<usize, JobError> {
    if n0 >= 2 {
        Ok(n0)
    } else {
        Err(invalid(format!("N0 must be at least 2, got {n0}")))
    }
}

/// Parses and checks a job file without running it.
pub fn validate(job: &JobFile) -> Result<ValidJob, JobError> {
    Ok(match job.kind {
        JobKind::Orbit => ValidJob::Orbit {
            setup: orbit_setup(job)?,
            ell: job.ell,
        },
        JobKind::Gap => ValidJob::Gap {
            setup: orbit_setup(job)?,
            ell: job.ell,
            n0: check_n0(job.n0.unwrap_or(DEFAULT_N0))?,
            tail_fraction: check_tail_fraction(job.tail_fraction.unwrap_or(DEFAULT_TAIL_FRACTION))?,
            curve_constants: job.curve_constants.clone().unwrap_or_default(),
        },
        JobKind::Dfinite => {
            let spec = require(&job.recurrence, "recurrence")?;
            let recurrence = PRecurrence::from_spec(&spec).map_err(invalid)?;
            let epsilon = job.epsilon.unwrap_or(crate::dfinite::DEFAULT_EPSILON);
            if epsilon.is_nan() || epsilon <= 0.0 {
                return Err(invalid("epsilon must be positive"));
            }
            ValidJob::Dfinite {
                recurrence,
                horizon: job.horizon.unwrap_or(crate::dfinite::DEFAULT_HORIZON),
                n0: check_n0(job.n0.unwrap_or(crate::dfinite::DEFAULT_N0))?,
                epsilon,
            }
        }
        JobKind::Density => {
            let set = require(&job.set, "set")?.to_set()?;
            let shifts = match (&job.shifts, job.lemma_n) {
                (Some(f), Some(n)) => Some((f.iter().copied().collect(), n)),
                (None, None) => None,
                _ => return Err(invalid("shifts and lemma_n must be given together")),
            };
            ValidJob::Density {
                set,
                horizon: job.horizon.unwrap_or(100),
                shifts,
            }
        }
        JobKind::Schanuel => ValidJob::Schanuel {
            dimension: require(&job.dimension, "dimension")?,
            bounds: require(&job.bounds, "B")?,
        },
        JobKind::Dml => {
            let vars = parse_vars(job)?;
            let map = parse_map(&vars, &require(&job.map, "map")?)?;
            let start = parse_start(job, vars.len())?;
            let y = Subvariety::parse(&vars, &require(&job.y_equations, "Y")?)
                .map_err(|e| invalid(format!("Y: {e}")))?;
            let min_terms = job.min_terms.unwrap_or(DEFAULT_MIN_TERMS);
            if min_terms < 3 {
                return Err(invalid("min_terms must be at least 3"));
            }
            ValidJob::Dml {
                vars,
                map,
                start,
                y,
                horizon: require(&job.horizon, "N")?,
                min_terms,
            }
        }
        JobKind::Commuting => {
            let vars = parse_vars(job)?;
            let maps = require(&job.maps, "maps")?
                .iter()
                .map(|m| parse_map(&vars, m))
                .collect::<Result<Vec<_>, _>>()?;
            if maps.is_empty() {
                return Err(invalid("maps must be nonempty"));
            }
            let observable = parse_expression(&require(&job.observable, "observable")?, &vars)
                .map_err(|e| invalid(format!("observable: {e}")))?;
            let start = parse_start(job, vars.len())?;
            let t_set = job.t_set.as_ref().map(SetInput::to_set).transpose()?;
            let positive_axes = job.positive_axes.clone().unwrap_or_default();
            if let Some(&a) = positive_axes.iter().find(|&&a| a == 0 || a > maps.len()) {
                return Err(invalid(format!("positive_axes entry {a} is not a map index")));
            }
            ValidJob::Commuting {
                maps,
                observable,
                start,
                horizon: require(&job.horizon, "N")?,
                t_set,
                n0: check_n0(job.n0.unwrap_or(DEFAULT_N0))?,
                positive_axes,
                limits: GridLimits {
                    allow_large: job.allow_large_grid.unwrap_or(false),
                    ..GridLimits::default()
                },
            }
        }
    })
}

/// Parses JSON text into a validated job.
pub fn parse_job(text: &str) -> Result<ValidJob, JobError> {
    let job: JobFile = serde_json::from_str(text).map_err(|e| invalid(format!("json: {e}")))?;
    validate(&job)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub budget: u128,
    pub threads: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            budget: DEFAULT_BUDGET,
            threads: None,
        }
    }
}

/// Rendered reports for one job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reports {
    pub csv: String,
    pub json: String,
    /// Additional `(suffix, content)` files, e.g. `("slices.csv", ...)`.
    pub extra: Vec<(String, String)>,
    /// Set when the computation stopped early; reports are still complete
    /// for what was computed, but the exit code is 3.
    pub warning: Option<String>,
}

impl Reports {
    fn new(csv: String, json: Value) -> Self {
        let mut text = serde_json::to_string_pretty(&json).expect("serializable");
        text.push('\n');
        Reports {
            csv,
            json: text,
            extra: Vec::new(),
            warning: None,
        }
    }
}

/// Runs a validated job, honoring the thread cap.
pub fn run(job: &ValidJob, opts: &RunOptions) -> Result<Reports, JobError> {
    match opts.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(runtime)?;
            pool.install(|| run_inner(job, opts))
        }
        None => run_inner(job, opts),
    }
}

fn stop_warning(trace: &OrbitTrace) -> Option<String> {
    match trace.stop_reason {
        StopReason::Completed => None,
        r => Some(format!("orbit stopped early: {r}")),
    }
}

fn repeat_json(ell: usize, r: Option<WindowRepeat>) -> Value {
    match r {
        Some(r) => json!({
            "ell": ell,
            "i": r.i,
            "j": r.j,
            "period": r.period(),
            "verified_to": r.verified_to,
        }),
        None => json!({ "ell": ell, "found": false }),
    }
}

fn window_repeat_field(trace: &OrbitTrace, ell: Option<usize>) -> Result<Value, JobError> {
    match ell {
        None => Ok(Value::Null),
        Some(ell) => {
            let r = detect_window_repeat(trace, ell).map_err(runtime)?;
            Ok(repeat_json(ell, r))
        }
    }
}

fn point_strings(p: &[Rational]) -> Vec<String> {
    p.iter().map(|q| q.to_string()).collect()
}

fn orbit_header(setup: &OrbitSetup, trace: &OrbitTrace) -> Value {
    json!({
        "variables": setup.vars.to_vec(),
        "map": setup.map.to_string(),
        "observable": setup.observable.to_string(),
        "start": point_strings(&setup.start),
        "N": setup.horizon,
        "rows": trace.rows.len(),
        "stop_reason": trace.stop_reason.to_string(),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

fn run_inner(job: &ValidJob, opts: &RunOptions) -> Result<Reports, JobError> {
    match job {
        ValidJob::Orbit { setup, ell } => {
            let trace = iterate_orbit(&setup.map, &setup.observable, &setup.start, setup.horizon)
                .map_err(runtime)?;
            let last = trace.rows.last().map(|r| r.value.to_string());
            let body = merge(
                orbit_header(setup, &trace),
                json!({
                    "kind": "orbit",
                    "last_value": last,
                    "window_repeat": window_repeat_field(&trace, *ell)?,
                }),
            );
            let mut rep = Reports::new(trace.to_csv(), body);
            rep.warning = stop_warning(&trace);
            Ok(rep)
        }
        ValidJob::Gap {
            setup,
            ell,
            n0,
            tail_fraction,
            curve_constants,
        } => {
            let trace = iterate_orbit(&setup.map, &setup.observable, &setup.start, setup.horizon)
                .map_err(runtime)?;
            let g = gap_diagnostics(&trace, *n0, *tail_fraction, curve_constants)
                .map_err(runtime)?;
            let below: Vec<Value> = g
                .below_curve_density
                .iter()
                .map(|(c, d)| json!({"C": fmt_real(*c), "density": d.to_string()}))
                .collect();
            let body = merge(
                orbit_header(setup, &trace),
                json!({
                    "kind": "gap",
                    "N0": g.n0,
                    "tail_fraction": fmt_real(*tail_fraction),
                    "tail_start": g.tail_start,
                    "tail_sup": fmt_real(g.tail_sup),
                    "tail_sup_at": g.tail_sup_at,
                    "tail_inf": fmt_real(g.tail_inf),
                    "below_curve_density": below,
                    "window_repeat": window_repeat_field(&trace, *ell)?,
                }),
            );
            let mut rep = Reports::new(trace.to_csv(), body);
            rep.warning = stop_warning(&trace);
            Ok(rep)
        }
        ValidJob::Dfinite {
            recurrence,
            horizon,
            n0,
            epsilon,
        } => run_dfinite(recurrence, *horizon, *n0, *epsilon),
        ValidJob::Density {
            set,
            horizon,
            shifts,
        } => run_density(set, *horizon, shifts.as_ref()),
        ValidJob::Schanuel { dimension, bounds } => {
            let fit = schanuel_fit(*dimension, bounds, opts.budget).map_err(|e| match e {
                SchanuelError::InvalidParameter(m) => invalid(m),
                e => runtime(e),
            })?;
            let reports: Vec<Value> = fit
                .reports
                .iter()
                .map(|r| {
                    json!({
                        "B": r.bound,
                        "count": r.count,
                        "ratio": fmt_real(r.ratio),
                        "kappa_fit": fmt_opt_real(r.kappa_fit),
                    })
                })
                .collect();
            let body = json!({
                "kind": "schanuel",
                "n": fit.n,
                "analytic_constant": fmt_real(fit.analytic_constant),
                "reports": reports,
            });
            Ok(Reports::new(fit.to_csv(), body))
        }
        ValidJob::Dml {
            vars,
            map,
            start,
            y,
            horizon,
            min_terms,
        } => {
            let hits = return_set(map, start, y, *horizon).map_err(|e| match e {
                DmlError::OrbitUndefined { n, .. } => {
                    runtime(format!("orbit undefined at n = {n}"))
                }
                e => runtime(e),
            })?;
            let dec = ap_decompose(&hits, *horizon, *min_terms).map_err(runtime)?;
            let mut part = vec![String::new(); horizon + 1];
            for p in &dec.progressions {
                for t in p.terms(*horizon) {
                    part[t] = format!("ap:{}+{}k", p.a, p.d);
                }
            }
            for &r in &dec.residual {
                part[r] = "residual".into();
            }
            let hitset: BTreeSet<usize> = hits.iter().copied().collect();
            let mut csv = String::from("n,hit,part\n");
            for (n, label) in part.iter().enumerate() {
                csv.push_str(&format!("{n},{},{label}\n", u8::from(hitset.contains(&n))));
            }
            let body = merge(
                dec.to_json(),
                json!({
                    "kind": "dml",
                    "variables": vars.to_vec(),
                    "map": map.to_string(),
                    "start": point_strings(start),
                    "Y": y.equations().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "N": horizon,
                    "min_terms": min_terms,
                }),
            );
            Ok(Reports::new(csv, body))
        }
        ValidJob::Commuting {
            maps,
            observable,
            start,
            horizon,
            t_set,
            n0,
            positive_axes,
            limits,
        } => {
            let check = check_commuting(maps).map_err(runtime)?;
            if let Some((i, j, c)) = check.witness {
                return Err(runtime(format!("maps {i} and {j} do not commute (component {c})")));
            }
            let grid = grid_orbit(maps, observable, start, *horizon, *limits).map_err(runtime)?;
            let composites: Vec<Value> = check
                .composites
                .iter()
                .map(|((i, j), m)| json!({"pair": [i, j], "composite": m.to_string()}))
                .collect();
            let undefined: Vec<&Vec<usize>> = grid.undefined_at.iter().collect();
            let mut body = json!({
                "kind": "commuting",
                "maps": maps.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "observable": observable.to_string(),
                "start": point_strings(start),
                "N": horizon,
                "commuting": check.commuting,
                "composites": composites,
                "entries": grid.entries.len(),
                "undefined_at": undefined,
            });
            let mut extra = Vec::new();
            if let Some(t) = t_set {
                let axes = positive_axes.clone();
                let rep = norm_sliced_diagnostics_filtered(&grid, t, *n0, |idx| {
                    axes.iter().all(|&a| idx[a - 1] > 0)
                })
                .map_err(runtime)?;
                body = merge(
                    body,
                    json!({
                        "T": t.to_string(),
                        "N0": n0,
                        "positive_axes": positive_axes,
                        "sup_ratio": fmt_real(rep.sup_ratio),
                        "sup_at": rep.sup_at,
                    }),
                );
                extra.push(("slices.csv".to_string(), rep.to_csv()));
            }
            let mut r = Reports::new(grid.to_csv(), body);
            r.extra = extra;
            Ok(r)
        }
    }
}

fn run_dfinite(
    rec: &PRecurrence,
    horizon: usize,
    n0: usize,
    epsilon: f64,
) -> Result<Reports, JobError> {
    let terms = rec.expand_terms(horizon).map_err(runtime)?;
    let verdict = classify_height_growth(&terms, epsilon, n0).map_err(runtime)?;
    let enc = encode_as_dynamics(rec).map_err(runtime)?;
    let v = enc.valid_from as usize;
    let encoding_agrees = if v <= horizon {
        let tr = iterate_orbit(&enc.map, &enc.observable, &enc.start, horizon - v)
            .map_err(runtime)?;
        tr.is_complete()
            && tr
                .rows
                .iter()
                .all(|r| r.value.affine().as_ref() == Some(&terms[r.n + v]))
    } else {
        true
    };
    let kind = match &verdict.kind {
        GrowthKind::EventuallyPeriodic {
            preperiod,
            period,
            verified_to,
        } => json!({
            "verdict": "EventuallyPeriodic",
            "preperiod": preperiod,
            "period": period,
            "verified_to": verified_to,
        }),
        GrowthKind::HeightGrowth { tail_ratio } => json!({
            "verdict": "HeightGrowth",
            "tail_ratio": fmt_real(*tail_ratio),
        }),
        GrowthKind::Undecided => json!({ "verdict": "Undecided" }),
    };
    let mut csv = String::from("n,term,height,ratio\n");
    for (n, t) in terms.iter().enumerate() {
        let h = crate::arith::height_rational(t);
        let ratio = if n <= 1 { String::new() } else { fmt_real(h / (n as f64).ln()) };
        csv.push_str(&format!("{n},{t},{},{ratio}\n", fmt_real(h)));
    }
    let body = merge(
        json!({
            "kind": "dfinite",
            "order": rec.order(),
            "coeffs": rec.coeffs().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "offset": rec.offset(),
            "N": horizon,
            "N0": n0,
            "epsilon": fmt_real(epsilon),
            "max_ratio": fmt_real(verdict.max_ratio),
            "valid_from": enc.valid_from,
            "encoding_map": enc.map.to_string(),
            "encoding_start": point_strings(&enc.start),
            "encoding_agrees": encoding_agrees,
        }),
        kind,
    );
    if !encoding_agrees {
        return Err(runtime("encoded orbit disagrees with the expanded terms"));
    }
    Ok(Reports::new(csv, body))
}

fn run_density(
    set: &EventuallyPeriodicSet,
    horizon: usize,
    shifts: Option<&(BTreeSet<u64>, u64)>,
) -> Result<Reports, JobError> {
    let sigma = set.shift_set();
    let lemma = match shifts {
        Some((f, n)) => {
            let (j, k) = check_lemma_shifts(set, f, *n).map_err(|e| match e {
                crate::density::DensityError::HypothesisViolated(m) => invalid(m),
                e => runtime(e),
            })?;
            json!({ "j": j, "k": k, "shift": j - k })
        }
        None => Value::Null,
    };
    let mut csv = String::from("n,member,shift_member\n");
    for n in 0..=horizon as u64 {
        csv.push_str(&format!(
            "{n},{},{}\n",
            u8::from(set.contains(n)),
            u8::from(sigma.contains(n))
        ));
    }
    let body = json!({
        "kind": "density",
        "set": set.to_string(),
        "density": set.density().to_string(),
        "shift_set": sigma.to_string(),
        "shift_set_density": sigma.density().to_string(),
        "zero_in_shift_set": sigma.contains(0),
        "prefix_density": set.prefix_density(horizon as u64).to_string(),
        "N": horizon,
        "lemma_witness": lemma,
    });
    Ok(Reports::new(csv, body))
}

/// Output base name: the input's file name without its `.json` extension.
pub fn job_stem(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "job".into());
    name.strip_suffix(".json").map(str::to_string).unwrap_or(name)
}

/// File paths the reports for `stem` are written to inside `dir`.
pub fn report_paths(dir: &Path, stem: &str, reports: &Reports) -> Vec<(PathBuf, String)> {
    let mut out = vec![
        (dir.join(format!("{stem}.report.csv")), reports.csv.clone()),
        (dir.join(format!("{stem}.report.json")), reports.json.clone()),
    ];
    for (suffix, content) in &reports.extra {
        out.push((dir.join(format!("{stem}.{suffix}")), content.clone()));
    }
    out
}

/// Reads, validates and runs a job file, then writes its reports next to
/// it or into `out_dir`. Nothing is written unless the run succeeds.
pub fn run_job_file(
    path: &Path,
    out_dir: Option<&Path>,
    opts: &RunOptions,
) -> Result<(Vec<PathBuf>, Option<String>), JobError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let job = parse_job(&text)?;
    let reports = run(&job, opts)?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    std::fs::create_dir_all(&dir).map_err(|e| JobError::Io(e.to_string()))?;
    let files = report_paths(&dir, &job_stem(path), &reports);
    let mut written = Vec::new();
    for (p, content) in &files {
        if let Err(e) = std::fs::write(p, content) {
            for w in &written {
                let _ = std::fs::remove_file(w);
            }
            return Err(JobError::Io(format!("{}: {e}", p.display())));
        }
        written.push(p.clone());
    }
    Ok((written, reports.warning))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_errors() {
        assert!(matches!(parse_job("{"), Err(JobError::Validation(_))));
        assert!(matches!(parse_job(r#"{"kind":"nope"}"#), Err(JobError::Validation(_))));
        assert!(matches!(
            parse_job(r#"{"kind":"orbit","variables":["x"],"map":["x+"],"observable":"x","start":[1],"N":3}"#),
            Err(JobError::Validation(_))
        ));
        assert!(matches!(
            parse_job(r#"{"kind":"orbit","variables":["x"],"map":["x"],"observable":"x","start":[1,2],"N":3}"#),
            Err(JobError::Validation(_))
        ));
        assert!(matches!(
            parse_job(r#"{"kind":"orbit","variables":["x"],"map":["x"],"observable":"x","start":[1],"N":3,"bogus":1}"#),
            Err(JobError::Validation(_))
        ));
        assert!(matches!(
            parse_job(r#"{"kind":"gap","variables":["x"],"map":["x"],"observable":"x","start":[1],"N":3,"N0":1}"#),
            Err(JobError::Validation(_))
        ));
        assert!(matches!(parse_job(r#"{"kind":"schanuel","B":[1]}"#), Err(JobError::Validation(_))));
    }

    #[test]
    fn runtime_errors() {
        let job = parse_job(r#"{"kind":"schanuel","dimension":2,"B":[50]}"#).unwrap();
        let opts = RunOptions { budget: 10, threads: None };
        assert!(matches!(run(&job, &opts), Err(JobError::Runtime(_))));
        let job = parse_job(
            r#"{"kind":"dml","variables":["x"],"map":["1/(x-1)"],"start":[1],"Y":["x"],"N":5}"#,
        )
        .unwrap();
        let err = run(&job, &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn orbit_report() {
        let job = parse_job(
            r#"{"kind":"orbit","variables":["x"],"map":["3-x"],"observable":"x","start":["1"],"N":4,"ell":1}"#,
        )
        .unwrap();
        let r = run(&job, &RunOptions::default()).unwrap();
        assert!(r.csv.starts_with("n,point,value,height,ratio\n0,1,1,0.000000,\n1,2,2,0.693147,\n"));
        let v: Value = serde_json::from_str(&r.json).unwrap();
        assert_eq!(v["window_repeat"]["period"], 2);
        assert_eq!(v["stop_reason"], "completed");
        assert!(r.warning.is_none());
    }

    #[test]
    fn set_inputs() {
        let a = parse_job(r#"{"kind":"density","set":"mod 4: {0,1}"}"#).unwrap();
        let b = parse_job(r#"{"kind":"density","set":{"modulus":4,"residues":[0,1]}}"#).unwrap();
        let ra = run(&a, &RunOptions::default()).unwrap();
        let rb = run(&b, &RunOptions::default()).unwrap();
        assert_eq!(ra, rb);
        let v: Value = serde_json::from_str(&ra.json).unwrap();
        assert_eq!(v["shift_set_density"], "3/4");
    }

    #[test]
    fn stems() {
        assert_eq!(job_stem(Path::new("/a/b/catalan.json")), "catalan");
        assert_eq!(job_stem(Path::new("x.txt")), "x.txt");
    }
}
