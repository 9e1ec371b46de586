//! `dpds`: run distributed primal-dual gradient experiments, print the
//! rate-constant table, and execute verification suites.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical divergence,
//! 4 verification-suite failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use dpds_core::harness::{
    load_config, run_experiment, run_sweep, run_verify, write_csv, AlgorithmConfig,
    ExperimentConfig, RunRecord, VerifySuite,
};
use dpds_core::rates::{alpha_threshold, rate_constants, ProblemConstants};
use dpds_core::{build_graph, spectral, Error};

#[derive(Parser)]
#[command(
    name = "dpds",
    about = "Distributed primal-dual gradient dynamics: seeded runs, rate tables, runtime certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its series as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination (defaults to `output.path` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print threshold, nu1, eps1..eps5, eta, h_max and the guaranteed rates.
    Rates {
        #[arg(long)]
        config: PathBuf,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite: rsi | lyapunov | extra | gradients.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: PathBuf,
        /// Per-sample CSV destination (lyapunov suite).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the config over comma-separated values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of alpha | beta | h | dt | T | iters.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Base CSV path; each value gets a `_<param><value>` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonFiniteState { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Run { config, out } => cmd_run(&config, out.as_deref()),
        Cmd::Rates { config, json } => cmd_rates(&config, json),
        Cmd::Verify { suite, config, out } => cmd_verify(&suite, &config, out.as_deref()),
        Cmd::Sweep { config, param, values, out } => {
            cmd_sweep(&config, &param, &values, out.as_deref())
        }
    }
}

fn summarize(record: &RunRecord) {
    let last = record.rows.last().expect("runs record at least the initial row");
    println!("config hash:     {}", record.config_hash);
    println!("mode:            {} ({} agents, dimension {})", record.mode, record.n, record.p);
    println!("recorded rows:   {}", record.rows.len());
    println!("final residual:  {:.6e} (index {})", last.residual, last.index);
    println!("final consensus: {:.6e}", last.consensus_error);
    match &record.fit {
        Some(fit) => println!(
            "fitted rate:     slope {:.6e}/iter, factor {:.9}, r^2 {:.6} ({} pts in [{:.0e}, {:.0e}])",
            fit.slope, fit.per_iter_factor, fit.r_squared, fit.points_used, fit.window.0, fit.window.1
        ),
        None => println!("fitted rate:     unavailable (too few points in the geometric window)"),
    }
}

fn cmd_run(config: &Path, out: Option<&Path>) -> Result<ExitCode, Error> {
    let cfg = load_config(config)?;
    let out_path: PathBuf = match (out, &cfg.output.path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => {
            return Err(Error::ValidationError {
                field: "output.path".into(),
                reason: "no CSV destination; pass --out or set output.path".into(),
            })
        }
    };
    let record = run_experiment(&cfg)?;
    write_csv(&record, &out_path)?;
    summarize(&record);
    println!("csv written:     {}", out_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_rates(config: &Path, as_json: bool) -> Result<ExitCode, Error> {
    let cfg = load_config(config)?;
    let graph = build_graph(&cfg.graph)?;
    let obj = cfg.objective.build(graph.n())?;
    let sp = spectral(&graph)?;
    let params = cfg.algorithm.params();
    let pc = ProblemConstants::from_parts(&obj, &sp, &params)?;
    let threshold = alpha_threshold(&pc);
    let constants = rate_constants(&pc).ok();
    let h = match &cfg.algorithm {
        AlgorithmConfig::Discrete { h, .. } => Some(*h),
        AlgorithmConfig::Continuous { .. } => None,
    };

    if as_json {
        let dt_rate = constants.as_ref().zip(h).map(|(rc, h)| rc.dt_rate(h));
        let payload = json!({
            "n": pc.n,
            "lf": pc.lf,
            "nu": pc.nu,
            "nu_estimated": obj.nu_is_estimated(),
            "rho2": pc.rho2,
            "rho": pc.rho,
            "alpha": pc.alpha,
            "beta": pc.beta,
            "alpha_threshold": threshold,
            "constants": constants,
            "h": h,
            "dt_rate_at_h": dt_rate,
        });
        println!("{}", serde_json::to_string_pretty(&payload).expect("json"));
        return Ok(ExitCode::SUCCESS);
    }

    println!("problem: n={}, L_f={:.6}, nu={:.6}{}", pc.n, pc.lf, pc.nu,
             if obj.nu_is_estimated() { " (estimated, safety-factored)" } else { "" });
    println!("graph:   rho2={:.6}, rho={:.6}", pc.rho2, pc.rho);
    println!("gains:   alpha={}, beta={}", pc.alpha, pc.beta);
    println!("alpha threshold: {threshold:.6}");
    match constants {
        Some(rc) => {
            println!("nu1:     {:.9}", rc.nu1);
            println!("eps1:    {:.9}", rc.eps1);
            println!("eps2:    {:.9}", rc.eps2);
            println!("eps3:    {:.9}", rc.eps3);
            println!("eps4:    {:.9}", rc.eps4);
            println!("eps5:    {:.9}", rc.eps5);
            println!("eta:     {:.9}", rc.eta);
            println!("ct rate: {:.9} (distance exponent eps2/2eps3)", rc.ct_rate);
            println!("h_max:   {:.9e}", rc.h_max);
            if let Some(h) = h {
                if h < rc.h_max {
                    println!("dt rate at h={h}: {:.12}", rc.dt_rate(h));
                } else {
                    println!(
                        "h={h} is above h_max={:.3e}: no linear-rate guarantee (empirical convergence only)",
                        rc.h_max
                    );
                }
            }
        }
        None => {
            println!(
                "alpha {} does not clear the threshold: rate constants unavailable for this config",
                pc.alpha
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str, config: &Path, out: Option<&Path>) -> Result<ExitCode, Error> {
    let suite: VerifySuite = suite.parse()?;
    let cfg = load_config(config)?;
    let outcome = run_verify(&cfg, suite)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    if let (Some(path), Some(csv)) = (out, &outcome.csv) {
        std::fs::write(path, csv)?;
        println!("per-sample csv: {}", path.display());
    }
    if outcome.precondition_unmet {
        println!("suite {}: precondition-unmet (skipped, not a failure)", outcome.suite);
        return Ok(ExitCode::SUCCESS);
    }
    if outcome.passed {
        println!("suite {}: pass", outcome.suite);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("suite {}: FAIL", outcome.suite);
        Ok(ExitCode::from(4))
    }
}

fn cmd_sweep(
    config: &Path,
    param: &str,
    values: &[f64],
    out: Option<&Path>,
) -> Result<ExitCode, Error> {
    let cfg: ExperimentConfig = load_config(config)?;
    let results = run_sweep(&cfg, param, values)?;
    let base = out
        .map(|p| p.to_path_buf())
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    for (value, record) in &results {
        let last = record.rows.last().expect("nonempty");
        let factor = record
            .fit
            .map(|f| format!("{:.9}", f.per_iter_factor))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "{param}={value}: final residual {:.6e}, fitted factor {factor}, hash {}",
            last.residual, record.config_hash
        );
        if let Some(base) = &base {
            let path = sweep_path(base, param, *value);
            write_csv(record, &path)?;
            println!("  csv: {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_path(base: &Path, param: &str, value: f64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    let name = format!("{stem}_{param}{value}.{ext}");
    base.with_file_name(name)
}
