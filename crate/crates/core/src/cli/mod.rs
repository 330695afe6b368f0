//! Command-line entry point. Flags select the subcommand, config path,
//! output directory and verbosity; everything else lives in the config.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config or checkpoint error,
//! 3 blow-up (the blow-up report is still written).

mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::diagnostics::{write_csv, write_jsonl};
use crate::dynamics::{checkpoint, simulate_with, BlowUpReport, SimulateOptions};
use crate::error::{Error, Result};
use crate::harness::{
    refinement_study, run_alpha_sweep, threshold_probe, validate_taylor_green, ProbeOutcome,
    RefinementLevel, RunSummary,
};

pub use config::{
    GridConfig, InitialCondition, ProbeConfig, RefinementConfig, ReportFormat, RunConfig,
    SweepConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "secondgrade", version, about = "Second-grade fluid simulator on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate and write the diagnostics series and final checkpoint.
    Simulate,
    /// α → 0 sweep against the α = 0 run (needs a `sweep` section).
    Sweep,
    /// Local-existence threshold probe (needs a `probe` section).
    Probe,
    /// Taylor-Green regression against the exact decay (2D grids).
    Validate,
    /// Identity residuals and formulation gaps under refinement.
    VerifyIdentities,
    /// Print a checkpoint header as JSON.
    InspectCheckpoint { path: PathBuf },
}

/// Every report embeds the resolved config it was produced from.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    result: T,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp(_) => EXIT_BLOW_UP,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    // a second init (tests calling in-process) keeps the first logger
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    if let Command::InspectCheckpoint { path } = &cli.command {
        let h = checkpoint::inspect(path)?;
        println!("{}", serde_json::to_string_pretty(&h)?);
        return Ok(());
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    fs::create_dir_all(&cfg.output_dir)?;
    let threads = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate => cmd_simulate(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Probe => cmd_probe(&cfg),
        Command::Validate => cmd_validate(&cfg),
        Command::VerifyIdentities => cmd_verify(&cfg),
        Command::InspectCheckpoint { .. } => unreachable!("handled above"),
    })
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, command: &str, result: T) -> Result<()> {
    let path = cfg.output_dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, &Report { command, config: cfg, result })?;
    w.write_all(b"\n")?;
    w.flush()?;
    info!("wrote {}", path.display());
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes the blow-up report, then hands the error back for the exit code.
fn report_blow_up(cfg: &RunConfig, command: &str, e: Error) -> Error {
    if let Error::BlowUp(r) = &e {
        let r: &BlowUpReport = r;
        if let Err(w) = write_json(cfg, "blowup.json", command, r) {
            return w;
        }
    }
    e
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(crate::diagnostics::fmt_f64).unwrap_or_default()
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let u0 = cfg.initial_field()?;
    let opts = SimulateOptions {
        monitors: cfg.monitors,
        store_fields: false,
    };
    let traj = simulate_with(&u0, &cfg.solver, &opts).map_err(|e| report_blow_up(cfg, "simulate", e))?;
    let dir = &cfg.output_dir;
    if cfg.wants(ReportFormat::Csv) {
        let mut w = create(dir, "trajectory.csv")?;
        write_csv(&mut w, &traj.records)?;
        w.flush()?;
    }
    if cfg.wants(ReportFormat::Jsonl) {
        let mut w = create(dir, "diagnostics.jsonl")?;
        write_jsonl(&mut w, &traj.records)?;
        w.flush()?;
    }
    if cfg.wants(ReportFormat::Json) {
        write_json(cfg, "report.json", "simulate", RunSummary::from_trajectory(&traj))?;
    }
    let s = &traj.final_state;
    checkpoint::save(&dir.join("final.g2ck"), s.velocity(), cfg.solver.alpha, cfg.solver.nu, s.time)?;
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a `sweep` section with `alphas`".into()))?;
    let u0 = cfg.initial_field()?;
    let opts = SimulateOptions {
        monitors: cfg.monitors,
        store_fields: false,
    };
    let r = run_alpha_sweep(&u0, &sweep.alphas, &cfg.solver, &opts)
        .map_err(|e| report_blow_up(cfg, "sweep", e))?;
    info!("sweep took {:.2} s", r.timing.total_seconds);
    if cfg.wants(ReportFormat::Csv) {
        let mut w = create(&cfg.output_dir, "sweep.csv")?;
        write!(w, "time")?;
        for a in &r.alphas {
            write!(w, ",error_alpha_{a:e}")?;
        }
        writeln!(w)?;
        for (i, t) in r.sample_times.iter().enumerate() {
            write!(w, "{}", crate::diagnostics::fmt_f64(*t))?;
            for s in &r.error_series {
                write!(w, ",{}", fmt_opt(s.as_ref().map(|v| v[i])))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    if cfg.wants(ReportFormat::Json) {
        write_json(cfg, "sweep.json", "sweep", &r)?;
    }
    Ok(())
}

fn cmd_probe(cfg: &RunConfig) -> Result<()> {
    let probe = cfg
        .probe
        .as_ref()
        .ok_or_else(|| Error::Config("probe needs a `probe` section with `amplitudes`".into()))?;
    let base = cfg.initial_field()?;
    let r = threshold_probe(&base, &probe.amplitudes, &cfg.solver, &cfg.monitors)?;
    if cfg.wants(ReportFormat::Csv) {
        let mut w = create(&cfg.output_dir, "probe.csv")?;
        writeln!(
            w,
            "amplitude,global_ok,local_ok,predicted_t,outcome,achieved_horizon,horizon_ok,required_k"
        )?;
        for e in &r.entries {
            let outcome = match e.outcome {
                ProbeOutcome::Completed => "completed",
                ProbeOutcome::MonitorsViolated { .. } => "monitors_violated",
                ProbeOutcome::BlewUp { .. } => "blew_up",
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                crate::diagnostics::fmt_f64(e.amplitude),
                e.smallness.global_ok(),
                e.smallness.local_ok(),
                fmt_opt(e.predicted_t),
                outcome,
                crate::diagnostics::fmt_f64(e.achieved_horizon),
                e.horizon_ok.map(|b| b.to_string()).unwrap_or_default(),
                fmt_opt(e.required_k),
            )?;
        }
        w.flush()?;
    }
    if cfg.wants(ReportFormat::Json) {
        write_json(cfg, "probe.json", "probe", &r)?;
    }
    Ok(())
}

fn cmd_validate(cfg: &RunConfig) -> Result<()> {
    if cfg.grid.dim != 2 {
        return Err(Error::Config("validate runs the 2D Taylor-Green flow; set grid.dim = 2".into()));
    }
    let r = validate_taylor_green(&cfg.solver, cfg.grid.n).map_err(|e| report_blow_up(cfg, "validate", e))?;
    if cfg.wants(ReportFormat::Csv) {
        let mut w = create(&cfg.output_dir, "validate.csv")?;
        writeln!(w, "time,rel_error")?;
        for (t, e) in r.sample_times.iter().zip(&r.rel_errors) {
            writeln!(w, "{},{}", crate::diagnostics::fmt_f64(*t), crate::diagnostics::fmt_f64(*e))?;
        }
        w.flush()?;
    }
    if cfg.wants(ReportFormat::Json) {
        write_json(cfg, "validate.json", "validate", &r)?;
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    let (levels, cross_check) = match &cfg.refinement {
        Some(r) => (r.levels.clone(), r.cross_check),
        None => {
            let s = &cfg.solver;
            let lv = |k: usize| RefinementLevel {
                n: cfg.grid.n,
                dt: s.dt / k as f64,
                sample_every: s.sample_every * k,
            };
            (vec![lv(1), lv(2)], true)
        }
    };
    let u0 = cfg.initial_field()?;
    let r = refinement_study(&u0, &cfg.solver, &levels, cross_check, &cfg.monitors)
        .map_err(|e| report_blow_up(cfg, "verify-identities", e))?;
    if cfg.wants(ReportFormat::Csv) {
        let mut w = create(&cfg.output_dir, "identities.csv")?;
        writeln!(w, "n,dt,sample_spacing,max_h1_residual,max_h2_residual,cross_gap,trajectory_error")?;
        for l in &r.levels {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                l.level.n,
                crate::diagnostics::fmt_f64(l.level.dt),
                crate::diagnostics::fmt_f64(l.sample_spacing),
                crate::diagnostics::fmt_f64(l.max_h1_residual),
                fmt_opt(l.max_h2_residual),
                fmt_opt(l.cross_gap),
                fmt_opt(l.trajectory_error),
            )?;
        }
        w.flush()?;
    }
    if cfg.wants(ReportFormat::Json) {
        write_json(cfg, "identities.json", "verify-identities", &r)?;
    }
    Ok(())
}
