//! Experiment configuration, execution, rate fitting, CSV persistence,
//! and the verification suites behind the CLI.
//!
//! A run is described by a JSON config with five sections:
//!
//! ```json
//! {
//!   "graph":     {"kind": "ring", "n": 10, "weight": 1.0},
//!   "objective": {"family": "secvi", "n": 10, "seed": 42},
//!   "algorithm": {"mode": "dt", "alpha": 10, "beta": 10, "h": 0.02, "iters": 5000},
//!   "init":      {"low": -3, "high": 3, "seed": 7},
//!   "output":    {"record_every": 1}
//! }
//! ```
//!
//! Unknown keys are rejected; the seed is mandatory (reproducibility is
//! not optional). `DPDS_SEED` overrides the init seed from the
//! environment. Identical configs produce byte-identical CSV output.

use std::io::Write as IoWrite;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discrete::{run_dt, verify_extra_equivalence};
use crate::dynamics::{
    integrate, Flow, FlowParams, IntegrationMethod, NetworkState, Trajectory,
};
use crate::error::{Error, Result};
use crate::graph::{build_graph, spectral, Graph, TopologySpec};
use crate::linalg::norm;
use crate::lyapunov::{
    check_ct_decay, check_dt_decay, eval_series, CheckStatus, DecayReport, LyapunovContext,
};
use crate::objective::{
    block_mean, central_difference, uniform_stacked, Objective, ObjectiveSpec, SampleSpec,
};
use crate::rates::{rate_constants, ProblemConstants, RateConstants};

/// Residual band over which the geometric phase is fitted by default;
/// below the floor floating-point noise dominates.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (1e-10, 1e-2);
/// Minimum points a log-linear fit needs.
const FIT_MIN_POINTS: usize = 10;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    graph: Option<TopologySpec>,
    objective: Option<ObjectiveSpec>,
    algorithm: Option<RawAlgorithm>,
    init: Option<RawInit>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAlgorithm {
    mode: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    h: Option<f64>,
    dt: Option<f64>,
    #[serde(rename = "T")]
    t_end: Option<f64>,
    iters: Option<u64>,
    integrator: Option<IntegrationMethod>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawInit {
    low: Option<f64>,
    high: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    record_every: Option<usize>,
    lyapunov: Option<bool>,
    per_agent: Option<bool>,
    fit_window: Option<(f64, f64)>,
}

/// Algorithm section after validation.
#[derive(Debug, Clone, Serialize)]
pub enum AlgorithmConfig {
    Discrete { alpha: f64, beta: f64, h: f64, iters: usize },
    Continuous {
        alpha: f64,
        beta: f64,
        dt: f64,
        t_end: f64,
        integrator: IntegrationMethod,
        alt: bool,
    },
}

impl AlgorithmConfig {
    pub fn params(&self) -> FlowParams {
        let (alpha, beta) = match self {
            AlgorithmConfig::Discrete { alpha, beta, .. } => (*alpha, *beta),
            AlgorithmConfig::Continuous { alpha, beta, .. } => (*alpha, *beta),
        };
        FlowParams { alpha, beta }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Discrete { .. } => "dt",
            AlgorithmConfig::Continuous { alt: false, .. } => "ct",
            AlgorithmConfig::Continuous { alt: true, .. } => "ct-alt",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InitConfig {
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub record_every: usize,
    pub lyapunov: bool,
    pub per_agent: bool,
    pub fit_window: (f64, f64),
}

/// Fully validated experiment description.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub graph: TopologySpec,
    pub objective: ObjectiveSpec,
    pub algorithm: AlgorithmConfig,
    pub init: InitConfig,
    pub output: OutputConfig,
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::ValidationError { field: field.into(), reason: reason.into() }
}

/// Parse and validate a config from JSON text. Defaults are applied,
/// unknown keys are rejected, and `DPDS_SEED` (when set) overrides the
/// init seed.
pub fn parse_config(json: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_str(json).map_err(|e| Error::ParseError(e.to_string()))?;

    let graph = raw.graph.ok_or_else(|| invalid("graph", "section is required"))?;
    if graph.n == 0 {
        return Err(invalid("graph.n", "need at least one vertex"));
    }
    if !(graph.weight > 0.0) {
        return Err(invalid("graph.weight", format!("must be positive, got {}", graph.weight)));
    }
    let objective = raw.objective.ok_or_else(|| invalid("objective", "section is required"))?;

    let ra = raw.algorithm.ok_or_else(|| invalid("algorithm", "section is required"))?;
    let mode = ra.mode.clone().ok_or_else(|| invalid("algorithm.mode", "one of dt|ct|ct-alt"))?;
    let alpha = ra.alpha.ok_or_else(|| invalid("algorithm.alpha", "required"))?;
    let beta = ra.beta.ok_or_else(|| invalid("algorithm.beta", "required"))?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid("algorithm.alpha", format!("must be positive, got {alpha}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("algorithm.beta", format!("must be positive, got {beta}")));
    }
    let algorithm = match mode.as_str() {
        "dt" => {
            for (name, set) in
                [("dt", ra.dt.is_some()), ("T", ra.t_end.is_some()), ("integrator", ra.integrator.is_some())]
            {
                if set {
                    return Err(invalid(
                        &format!("algorithm.{name}"),
                        "not a dt-mode field (use h/iters)",
                    ));
                }
            }
            let h = ra.h.ok_or_else(|| invalid("algorithm.h", "required in dt mode"))?;
            if !(h > 0.0) || !h.is_finite() {
                return Err(invalid("algorithm.h", format!("must be positive, got {h}")));
            }
            let iters = ra.iters.ok_or_else(|| invalid("algorithm.iters", "required in dt mode"))?;
            if iters == 0 {
                return Err(invalid("algorithm.iters", "need at least one iteration"));
            }
            AlgorithmConfig::Discrete { alpha, beta, h, iters: iters as usize }
        }
        "ct" | "ct-alt" => {
            for (name, set) in [("h", ra.h.is_some()), ("iters", ra.iters.is_some())] {
                if set {
                    return Err(invalid(
                        &format!("algorithm.{name}"),
                        "not a ct-mode field (use dt/T)",
                    ));
                }
            }
            let dt = ra.dt.unwrap_or(1e-3);
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(invalid("algorithm.dt", format!("must be positive, got {dt}")));
            }
            let t_end = ra.t_end.ok_or_else(|| invalid("algorithm.T", "required in ct mode"))?;
            if !(t_end >= dt) {
                return Err(invalid("algorithm.T", format!("horizon {t_end} shorter than dt {dt}")));
            }
            AlgorithmConfig::Continuous {
                alpha,
                beta,
                dt,
                t_end,
                integrator: ra.integrator.unwrap_or(IntegrationMethod::Rk4),
                alt: mode == "ct-alt",
            }
        }
        other => return Err(invalid("algorithm.mode", format!("unknown mode `{other}`"))),
    };

    let ri = raw.init.unwrap_or_default();
    let seed = ri.seed.ok_or_else(|| invalid("init.seed", "seed is mandatory"))?;
    let low = ri.low.unwrap_or(-3.0);
    let high = ri.high.unwrap_or(3.0);
    if !(low < high) {
        return Err(invalid("init.low", format!("need low < high, got [{low}, {high}]")));
    }
    let mut init = InitConfig { low, high, seed };
    if let Ok(s) = std::env::var("DPDS_SEED") {
        init.seed = s
            .parse::<u64>()
            .map_err(|_| invalid("init.seed", format!("DPDS_SEED is not a u64: `{s}`")))?;
    }

    let record_every = raw.output.record_every.unwrap_or(1);
    if record_every == 0 {
        return Err(invalid("output.record_every", "stride must be >= 1"));
    }
    let fit_window = raw.output.fit_window.unwrap_or(DEFAULT_FIT_WINDOW);
    if !(fit_window.0 > 0.0 && fit_window.0 < fit_window.1) {
        return Err(invalid("output.fit_window", "need 0 < lo < hi"));
    }
    let output = OutputConfig {
        path: raw.output.path,
        record_every,
        lyapunov: raw.output.lyapunov.unwrap_or(false),
        per_agent: raw.output.per_agent.unwrap_or(false),
        fit_window,
    };

    let cfg = ExperimentConfig { graph, objective, algorithm, init, output };
    validate_objective_matches_graph(&cfg)?;
    Ok(cfg)
}

fn validate_objective_matches_graph(cfg: &ExperimentConfig) -> Result<()> {
    match &cfg.objective {
        ObjectiveSpec::Secvi { n, .. } if *n != cfg.graph.n => Err(invalid(
            "objective.n",
            format!("objective has {n} agents but the graph has {}", cfg.graph.n),
        )),
        ObjectiveSpec::Quadratic { centers } if centers.len() != cfg.graph.n => Err(invalid(
            "objective.centers",
            format!("{} centers for {} vertices", centers.len(), cfg.graph.n),
        )),
        _ => Ok(()),
    }
}

/// Load a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// SHA-256 of the canonical serialization of the validated config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serialization cannot fail");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

/// One recorded row of a run.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub index: usize,
    pub residual: f64,
    /// `max_i ||x_i - mean||`.
    pub consensus_error: f64,
    /// `||grad f(mean)||` of the global cost at the block mean.
    pub grad_norm: f64,
    /// `[V1, V2, V3, V]` when Lyapunov output is enabled.
    pub lyapunov: Option<[f64; 4]>,
    /// Per-agent `(x, v)` snapshots when enabled.
    pub agents: Option<(Vec<f64>, Vec<f64>)>,
}

/// Log-linear fit of a residual series.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `exp(slope)`: the fitted per-index geometric factor.
    pub per_iter_factor: f64,
    pub points_used: usize,
    pub window: (f64, f64),
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config_hash: String,
    pub n: usize,
    pub p: usize,
    pub mode: &'static str,
    pub rows: Vec<RunRow>,
    pub fit: Option<RateFit>,
    pub final_state: NetworkState,
}

/// Execute a validated config: build the graph and objective, draw the
/// seeded initial state, run the selected algorithm, and derive all
/// series. Deterministic given the config (including seeds).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let graph = build_graph(&cfg.graph)?;
    let obj = cfg.objective.build(graph.n())?;
    if obj.n() != graph.n() {
        return Err(invalid(
            "objective",
            format!("objective has {} agents but the graph has {}", obj.n(), graph.n()),
        ));
    }
    let params = cfg.algorithm.params();
    let s0 = NetworkState::with_zero_dual(uniform_stacked(
        obj.n(),
        obj.p(),
        cfg.init.low,
        cfg.init.high,
        cfg.init.seed,
    ));

    let traj = match &cfg.algorithm {
        AlgorithmConfig::Discrete { h, iters, .. } => {
            run_dt(&s0, &params, *h, &graph, &obj, *iters, cfg.output.record_every)?
        }
        AlgorithmConfig::Continuous { dt, t_end, integrator, alt, .. } => {
            let flow = if *alt { Flow::Alt } else { Flow::Main };
            integrate(flow, &s0, &params, &graph, &obj, *dt, *t_end, *integrator, cfg.output.record_every)?
        }
    };
    record_from_trajectory(cfg, &graph, &obj, &params, &traj)
}

fn record_from_trajectory(
    cfg: &ExperimentConfig,
    graph: &Graph,
    obj: &Objective,
    params: &FlowParams,
    traj: &Trajectory,
) -> Result<RunRecord> {
    let residuals = traj.residuals.clone().ok_or(Error::UnsupportedOptSet)?;

    let lyap = if cfg.output.lyapunov {
        let sp = spectral(graph)?;
        let pc = ProblemConstants::from_parts(obj, &sp, params)?;
        let rc = rate_constants(&pc)?;
        let ctx = LyapunovContext::new(&sp, obj, *params, rc.eps1);
        Some(eval_series(&ctx, traj)?)
    } else {
        None
    };

    let n = obj.n();
    let p = obj.p();
    let mut rows = Vec::with_capacity(traj.points.len());
    for (j, pt) in traj.points.iter().enumerate() {
        let mean = block_mean(&pt.state.x, n, p);
        let mut consensus_error = 0.0f64;
        for i in 0..n {
            let d: f64 = pt.state.x[i * p..(i + 1) * p]
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            consensus_error = consensus_error.max(d);
        }
        let grad_norm = norm(&obj.grad_global(&mean));
        rows.push(RunRow {
            index: pt.step,
            residual: residuals[j],
            consensus_error,
            grad_norm,
            lyapunov: lyap.as_ref().map(|s| [s[j].v1, s[j].v2, s[j].v3, s[j].v]),
            agents: cfg.output.per_agent.then(|| (pt.state.x.clone(), pt.state.v.clone())),
        });
    }

    let steps: Vec<usize> = traj.points.iter().map(|pt| pt.step).collect();
    let fit = fit_rate_indexed(&steps, &residuals, cfg.output.fit_window).ok();

    Ok(RunRecord {
        config_hash: config_hash(cfg),
        n,
        p,
        mode: cfg.algorithm.mode_name(),
        rows,
        fit,
        final_state: traj.last_state().clone(),
    })
}

/// Least-squares fit of `log(value)` against the row index, restricted
/// to values inside `[window.0, window.1]`.
pub fn fit_rate(series: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let steps: Vec<usize> = (0..series.len()).collect();
    fit_rate_indexed(&steps, series, window)
}

/// Same fit but against explicit step indices (recorded strides).
pub fn fit_rate_indexed(steps: &[usize], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    assert_eq!(steps.len(), values.len());
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(values)
        .filter(|(_, r)| **r >= window.0 && **r <= window.1 && **r > 0.0)
        .map(|(k, r)| (*k as f64, r.ln()))
        .collect();
    if pts.len() < FIT_MIN_POINTS {
        return Err(Error::InsufficientData { found: pts.len(), need: FIT_MIN_POINTS });
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    if denom == 0.0 {
        return Err(Error::InsufficientData { found: 1, need: FIT_MIN_POINTS });
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;

    let mean_y = sy / m;
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = pts.iter().map(|(x, y)| {
        let e = y - (slope * x + intercept);
        e * e
    }).sum();
    let r_squared = if ss_tot <= f64::MIN_POSITIVE { 1.0 } else { 1.0 - ss_res / ss_tot };

    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        per_iter_factor: slope.exp(),
        points_used: pts.len(),
        window,
    })
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// 17 significant digits, enough to round-trip any f64.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC-4180 quoting: wrap fields containing commas, quotes, or newlines.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write a run as CSV: fixed header, one row per recorded sample, floats
/// at 17 significant digits. Byte-identical for identical records.
pub fn write_csv_to(record: &RunRecord, mut out: impl IoWrite) -> Result<()> {
    let mut header: Vec<String> =
        ["index", "residual", "consensus_error", "grad_norm"].iter().map(|s| s.to_string()).collect();
    let with_lyap = record.rows.first().map(|r| r.lyapunov.is_some()).unwrap_or(false);
    let with_agents = record.rows.first().map(|r| r.agents.is_some()).unwrap_or(false);
    if with_lyap {
        header.extend(["V1", "V2", "V3", "V"].iter().map(|s| s.to_string()));
    }
    if with_agents {
        for prefix in ["x", "v"] {
            for i in 1..=record.n {
                if record.p == 1 {
                    header.push(format!("{prefix}_{i}"));
                } else {
                    for k in 1..=record.p {
                        header.push(format!("{prefix}_{i}_{k}"));
                    }
                }
            }
        }
    }
    writeln!(out, "{}", header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","))?;

    for row in &record.rows {
        let mut fields = vec![
            row.index.to_string(),
            fmt17(row.residual),
            fmt17(row.consensus_error),
            fmt17(row.grad_norm),
        ];
        if let Some(l) = &row.lyapunov {
            fields.extend(l.iter().map(|v| fmt17(*v)));
        }
        if let Some((x, v)) = &row.agents {
            fields.extend(x.iter().map(|c| fmt17(*c)));
            fields.extend(v.iter().map(|c| fmt17(*c)));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_csv(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(record, std::io::BufWriter::new(file))
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

/// Re-run the config once per value of the swept parameter
/// (`alpha | beta | h | dt | T | iters`), concurrently. Results come
/// back in input order.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    param: &str,
    values: &[f64],
) -> Result<Vec<(f64, RunRecord)>> {
    let mut configs = Vec::with_capacity(values.len());
    for &value in values {
        let mut c = cfg.clone();
        apply_override(&mut c, param, value)?;
        configs.push((value, c));
    }
    let mut out: Vec<Option<(f64, RunRecord)>> = (0..values.len()).map(|_| None).collect();
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (slot, (value, c)) in out.iter_mut().zip(configs.iter()) {
            handles.push(scope.spawn(move || -> Result<()> {
                let record = run_experiment(c)?;
                *slot = Some((*value, record));
                Ok(())
            }));
        }
        for h in handles {
            h.join().expect("sweep worker panicked")?;
        }
        Ok(())
    })?;
    Ok(out.into_iter().map(|o| o.expect("all slots filled")).collect())
}

fn apply_override(cfg: &mut ExperimentConfig, param: &str, value: f64) -> Result<()> {
    match (&mut cfg.algorithm, param) {
        (AlgorithmConfig::Discrete { alpha, .. }, "alpha")
        | (AlgorithmConfig::Continuous { alpha, .. }, "alpha") => *alpha = value,
        (AlgorithmConfig::Discrete { beta, .. }, "beta")
        | (AlgorithmConfig::Continuous { beta, .. }, "beta") => *beta = value,
        (AlgorithmConfig::Discrete { h, .. }, "h") => *h = value,
        (AlgorithmConfig::Discrete { iters, .. }, "iters") => *iters = value as usize,
        (AlgorithmConfig::Continuous { dt, .. }, "dt") => *dt = value,
        (AlgorithmConfig::Continuous { t_end, .. }, "T") => *t_end = value,
        _ => {
            return Err(invalid(
                "sweep.param",
                format!("`{param}` does not apply to mode {}", cfg.algorithm.mode_name()),
            ))
        }
    }
    if !(value > 0.0) || !value.is_finite() {
        return Err(invalid("sweep.values", format!("must be positive, got {value}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifySuite {
    Rsi,
    Lyapunov,
    Extra,
    Gradients,
}

impl std::str::FromStr for VerifySuite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsi" => Ok(Self::Rsi),
            "lyapunov" => Ok(Self::Lyapunov),
            "extra" => Ok(Self::Extra),
            "gradients" => Ok(Self::Gradients),
            other => Err(invalid("verify.suite", format!("unknown suite `{other}`"))),
        }
    }
}

/// Outcome of a verification suite: human-readable lines plus an
/// optional per-sample CSV payload.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub suite: &'static str,
    pub passed: bool,
    /// True when the check was skipped because a certificate
    /// precondition does not hold (not a failure).
    pub precondition_unmet: bool,
    pub lines: Vec<String>,
    pub csv: Option<String>,
}

/// Run one verification suite against a config.
pub fn run_verify(cfg: &ExperimentConfig, suite: VerifySuite) -> Result<VerifyOutcome> {
    match suite {
        VerifySuite::Rsi => verify_rsi_suite(cfg),
        VerifySuite::Gradients => verify_gradients_suite(cfg),
        VerifySuite::Extra => verify_extra_suite(cfg),
        VerifySuite::Lyapunov => verify_lyapunov_suite(cfg),
    }
}

fn verify_rsi_suite(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    let obj = cfg.objective.build(cfg.graph.n)?;
    let report = obj.verify_rsi(&SampleSpec { count: 10_000, radius: 3.0, seed: cfg.init.seed })?;
    let lines = vec![
        format!(
            "rsi: min sampled ratio {:.9} against nu {:.9} over {} samples",
            report.min_ratio, report.nu, report.samples_used
        ),
        format!("rsi: {} violations -> {}", report.violation_count, pass_str(report.pass)),
    ];
    Ok(VerifyOutcome {
        suite: "rsi",
        passed: report.pass,
        precondition_unmet: false,
        lines,
        csv: None,
    })
}

fn verify_gradients_suite(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    let obj = cfg.objective.build(cfg.graph.n)?;
    let boundaries = [-1.0, 0.0, std::f64::consts::FRAC_1_SQRT_2, 1.0];
    let mut rng_seed = cfg.init.seed;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    'outer: for i in 0..obj.n() {
        let mut tried = 0usize;
        let mut local_checked = 0usize;
        while local_checked < 1000 {
            rng_seed = rng_seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            tried += 1;
            if tried > 100_000 {
                break 'outer;
            }
            let x: Vec<f64> = (0..obj.p())
                .map(|k| {
                    let z = (rng_seed >> (11 + k % 8)) as f64 / (1u64 << 53) as f64;
                    -3.0 + 6.0 * z
                })
                .collect();
            if obj.p() == 1 && boundaries.iter().any(|b| (x[0] - b).abs() < 1e-4) {
                continue;
            }
            local_checked += 1;
            checked += 1;
            let analytic = obj.grad_local(i, &x);
            let fd = central_difference(|y| obj.value_local(i, y), &x, 1e-6);
            for (a, f) in analytic.iter().zip(&fd) {
                let rel = (a - f).abs() / a.abs().max(1.0);
                worst = worst.max(rel);
            }
        }
    }
    let passed = worst <= 1e-6;
    Ok(VerifyOutcome {
        suite: "gradients",
        passed,
        precondition_unmet: false,
        lines: vec![format!(
            "gradients: worst relative error {worst:.3e} over {checked} points -> {}",
            pass_str(passed)
        )],
        csv: None,
    })
}

fn verify_extra_suite(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    let graph = build_graph(&cfg.graph)?;
    let obj = cfg.objective.build(graph.n())?;
    let params = cfg.algorithm.params();
    let h = match &cfg.algorithm {
        AlgorithmConfig::Discrete { h, .. } => *h,
        AlgorithmConfig::Continuous { .. } => {
            return Err(invalid("algorithm.mode", "extra suite needs dt mode"))
        }
    };
    let s0 = NetworkState::with_zero_dual(uniform_stacked(
        obj.n(),
        obj.p(),
        cfg.init.low,
        cfg.init.high,
        cfg.init.seed,
    ));
    let dev = verify_extra_equivalence(&s0, &params, h, &graph, &obj, 100)?;
    let passed = dev <= 1e-9;
    Ok(VerifyOutcome {
        suite: "extra",
        passed,
        precondition_unmet: false,
        lines: vec![format!(
            "extra: max trajectory deviation {dev:.3e} over 100 iterations -> {}",
            pass_str(passed)
        )],
        csv: None,
    })
}

fn verify_lyapunov_suite(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    let graph = build_graph(&cfg.graph)?;
    let obj = cfg.objective.build(graph.n())?;
    let params = cfg.algorithm.params();
    let sp = spectral(&graph)?;
    let s0 = NetworkState::with_zero_dual(uniform_stacked(
        obj.n(),
        obj.p(),
        cfg.init.low,
        cfg.init.high,
        cfg.init.seed,
    ));

    let constants: Option<RateConstants> = ProblemConstants::from_parts(&obj, &sp, &params)
        .ok()
        .and_then(|pc| rate_constants(&pc).ok());
    let Some(rc) = constants else {
        return Ok(VerifyOutcome {
            suite: "lyapunov",
            passed: false,
            precondition_unmet: true,
            lines: vec![
                "lyapunov: precondition-unmet (gain below threshold or constants unavailable)"
                    .to_string(),
            ],
            csv: None,
        });
    };
    let ctx = LyapunovContext::new(&sp, &obj, params, rc.eps1);

    let (report, label): (DecayReport, &str) = match &cfg.algorithm {
        AlgorithmConfig::Discrete { h, iters, .. } => {
            let traj = run_dt(&s0, &params, *h, &graph, &obj, *iters, cfg.output.record_every)?;
            (check_dt_decay(&ctx, &traj, &rc, *h)?, "per-step contraction")
        }
        AlgorithmConfig::Continuous { dt, t_end, integrator, alt, .. } => {
            let flow = if *alt { Flow::Alt } else { Flow::Main };
            let traj = integrate(
                flow,
                &s0,
                &params,
                &graph,
                &obj,
                *dt,
                *t_end,
                *integrator,
                cfg.output.record_every,
            )?;
            (check_ct_decay(&ctx, &traj, rc.v_decay_rate())?, "exponential decay")
        }
    };

    let mut csv = String::from("t_or_k,V1,V2,V3,V,bound\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(row.t_or_k),
            fmt17(row.v1),
            fmt17(row.v2),
            fmt17(row.v3),
            fmt17(row.v),
            fmt17(row.bound)
        ));
    }
    let unmet = report.status == CheckStatus::PreconditionUnmet;
    let passed = report.status == CheckStatus::Passed;
    let mut lines = vec![format!("lyapunov ({label}): status {}", report.status)];
    if let Some(note) = &report.note {
        lines.push(format!("lyapunov: {note}"));
    }
    if !unmet {
        lines.push(format!(
            "lyapunov: worst value/bound ratio {:.9}, {} bound failures, {} residual-bound failures",
            report.worst_ratio, report.failures, report.residual_failures
        ));
    }
    Ok(VerifyOutcome { suite: "lyapunov", passed, precondition_unmet: unmet, lines, csv: Some(csv) })
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}
