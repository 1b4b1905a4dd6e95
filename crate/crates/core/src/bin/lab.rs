#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use phaselab::decoders::{fiber_decode, sparse_decode, SparseDecodeOptions};
use phaselab::experiments::{self as exp, ExperimentConfig, ExperimentKind, Report};
use phaselab::measurement::{read_numeric_rows, MeasurementMatrix, PhaselessObservation, DEFAULT_REL_TOL};
use phaselab::{Error, Result};

#[derive(Parser)]
#[command(name = "lab", version, about = "Seeded phaseless-measurement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate of support-enumeration decoding against the rate R.
    PhaseTransition(RunArgs),
    /// Success rate of exact-sparse decoding for m around the sparsity.
    SparseThreshold(RunArgs),
    /// Monte Carlo check of the small-ball concentration bound.
    Concentration(RunArgs),
    /// Closed-form rank-two spectra against a 2×2 eigendecomposition.
    RanktwoVerify(RunArgs),
    /// Box-counting dimension of samples from a source.
    CoveringDim(RunArgs),
    /// Decode one observation; prints a JSON record.
    Decode(DecodeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fixed_matrix_seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("space").required(true).args(["candidates", "s_max"]))]
struct DecodeArgs {
    /// Matrix CSV, one row per line.
    #[arg(long)]
    matrix: PathBuf,
    /// Magnitudes as CSV (any layout; read in order).
    #[arg(long)]
    observation: PathBuf,
    /// Candidate vectors, one per line.
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Sparsity budget for support enumeration.
    #[arg(long)]
    s_max: Option<usize>,
    /// Relative tolerance, scaled by max(1, ‖y‖).
    #[arg(long)]
    tol: Option<f64>,
    /// Supplies `tol` and `work_cap` defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Config(Error),
    Run(Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => ExitCode::from(report.exit_code() as u8),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> std::result::Result<Report, Failure> {
    let (kind, args) = match command {
        Command::Decode(args) => return with_workers(args.workers, || decode(&args)),
        Command::PhaseTransition(a) => (ExperimentKind::PhaseTransition, a),
        Command::SparseThreshold(a) => (ExperimentKind::SparseThreshold, a),
        Command::Concentration(a) => (ExperimentKind::Concentration, a),
        Command::RanktwoVerify(a) => (ExperimentKind::RanktwoVerify, a),
        Command::CoveringDim(a) => (ExperimentKind::CoveringDim, a),
    };
    let mut cfg = load_config(&args.config).map_err(Failure::Config)?;
    if cfg.experiment != kind {
        return Err(Failure::Config(Error::Config(format!(
            "config is for {}, not {}",
            cfg.experiment.name(),
            kind.name()
        ))));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if args.fixed_matrix_seed.is_some() {
        cfg.fixed_matrix_seed = args.fixed_matrix_seed;
    }
    with_workers(args.workers, || experiment(&cfg, args.out.as_deref()))
}

fn with_workers<F>(workers: Option<usize>, f: F) -> std::result::Result<Report, Failure>
where
    F: FnOnce() -> std::result::Result<Report, Failure> + Send,
{
    match workers {
        Some(0) => Err(Failure::Config(Error::Config("--workers must be at least 1".into()))),
        #[cfg(feature = "parallel")]
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::Run(Error::InvalidParameter(e.to_string())))?;
            pool.install(f)
        }
        _ => f(),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> std::result::Result<Report, Failure> {
    let report = match cfg.experiment {
        ExperimentKind::PhaseTransition => {
            let rows = exp::run_phase_transition(cfg).map_err(Failure::Run)?;
            write_rows(out, &rows)?;
            exp::summarize_sweep(cfg, &rows)
        }
        ExperimentKind::SparseThreshold => {
            let rows = exp::run_sparse_threshold(cfg).map_err(Failure::Run)?;
            write_rows(out, &rows)?;
            exp::summarize_sweep(cfg, &rows)
        }
        ExperimentKind::Concentration => {
            let rows = exp::run_concentration(cfg).map_err(Failure::Run)?;
            write_rows(out, &rows)?;
            exp::summarize_concentration(cfg, &rows)
        }
        ExperimentKind::RanktwoVerify => {
            let rows = exp::run_ranktwo_verify(cfg).map_err(Failure::Run)?;
            write_rows(out, &rows)?;
            exp::summarize_ranktwo(cfg, &rows)
        }
        ExperimentKind::CoveringDim => {
            let rep = exp::run_covering_dim(cfg).map_err(Failure::Run)?;
            write_rows(out, &rep.rows)?;
            exp::summarize_covering(cfg, &rep)
        }
        ExperimentKind::Decode => {
            return Err(Failure::Config(Error::Config("use the decode subcommand".into())));
        }
    };
    exp::emit_report(io::stderr().lock(), &report).map_err(Failure::Run)?;
    Ok(report)
}

fn write_rows<T: Serialize>(out: Option<&Path>, rows: &[T]) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => exp::emit_csv(path, rows),
        None => exp::write_csv(io::stdout().lock(), rows),
    }
    .map_err(Failure::Run)
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    read_numeric_rows(BufReader::new(file))
}

fn decode(args: &DecodeArgs) -> std::result::Result<Report, Failure> {
    let cfg = match &args.config {
        Some(p) => Some(load_config(p).map_err(Failure::Config)?),
        None => None,
    };
    let rel_tol = args.tol.or(cfg.as_ref().map(|c| c.tol)).unwrap_or(DEFAULT_REL_TOL);
    if !(rel_tol >= 0.0) {
        return Err(Failure::Config(Error::Config(format!("tol must be non-negative, got {rel_tol}"))));
    }
    let mat = MeasurementMatrix::from_rows(&read_rows(&args.matrix).map_err(Failure::Config)?)
        .map_err(Failure::Config)?;
    let y: Vec<f64> = read_rows(&args.observation)
        .map_err(Failure::Config)?
        .into_iter()
        .flatten()
        .collect();
    let obs = PhaselessObservation::new(y).map_err(Failure::Config)?;
    let tol = rel_tol * obs.norm().max(1.0);

    let decoded = if let Some(path) = &args.candidates {
        let candidates = read_rows(path).map_err(Failure::Config)?;
        fiber_decode(&mat, &obs, &candidates, tol)
    } else {
        let opts = SparseDecodeOptions {
            work_cap: cfg.as_ref().map_or(SparseDecodeOptions::default().work_cap, |c| c.work_cap as u128),
            ..Default::default()
        };
        sparse_decode(&mat, &obs, args.s_max.expect("required by clap"), tol, &opts)
    }
    .map_err(Failure::Run)?;

    let mut json = decoded.to_json().map_err(Failure::Run)?;
    json.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, json).map_err(|e| Failure::Run(e.into()))?,
        None => io::stdout()
            .lock()
            .write_all(json.as_bytes())
            .map_err(|e| Failure::Run(e.into()))?,
    }
    Ok(Report {
        lines: Vec::new(),
        passed: true,
    })
}
