//! Seeded experiments built from the other modules.
//!
//! Every random draw is keyed by `derive_seed(master_seed, path)`, and rows
//! are aggregated from integer counts, so an experiment produces the same
//! output for any worker count.

mod output;
pub mod stats;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::concentration::{f_bound, mc_concentration_with, ConcentrationQuery};
use crate::covering::{auto_schedule, minkowski_dim_estimate_with, DimEstimate, PointCloud};
use crate::decoders::{equiv, sparse_decode, SparseDecodeOptions};
use crate::error::{Error, Result};
use crate::measurement::{phaseless_measure, sample_matrix, Ensemble, Rate};
use crate::par::{self, Execution};
use crate::ranktwo::{check_independent, check_pair};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sources::{sample_source, theoretical_rate, Atom, SourceSpec, TheoreticalRate};

pub use output::{emit_csv, emit_report, write_csv, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhaseTransition,
    SparseThreshold,
    Concentration,
    RanktwoVerify,
    CoveringDim,
    Decode,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PhaseTransition => "phase-transition",
            ExperimentKind::SparseThreshold => "sparse-threshold",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::RanktwoVerify => "ranktwo-verify",
            ExperimentKind::CoveringDim => "covering-dim",
            ExperimentKind::Decode => "decode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationGrid {
    pub dims: Vec<usize>,
    pub radii: Vec<f64>,
    pub deltas: Vec<f64>,
    pub pairs: usize,
}

impl Default for ConcentrationGrid {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 5],
            radii: vec![0.5, 1.0, 2.0],
            deltas: vec![1e-3, 1e-2, 1e-1],
            pairs: 20,
        }
    }
}

fn default_tol() -> f64 {
    1e-9
}

fn default_work_cap() -> u64 {
    100_000_000
}

fn default_eps() -> f64 {
    0.05
}

/// Experiment configuration, read from JSON with unknown keys rejected.
///
/// `n` is the signal length (for `ranktwo-verify`, the largest pair
/// dimension; ignored by `concentration`). `trials` counts Monte Carlo trials
/// per row, rank-two pairs, or covering samples depending on the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    #[serde(default)]
    pub rates: Vec<Rate>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub ensemble: Ensemble,
    pub trials: u64,
    pub master_seed: u64,
    /// Relative decode tolerance; scaled by `max(1, ‖y‖)` per trial.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_work_cap")]
    pub work_cap: u64,
    /// Target error probability for the achievability flags in reports.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Condition every trial of a row on one matrix drawn from this seed.
    #[serde(default)]
    pub fixed_matrix_seed: Option<u64>,
    #[serde(default)]
    pub rho_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: Option<ConcentrationGrid>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            return fail(format!("tol must be non-negative, got {}", self.tol));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return fail(format!("eps must lie in [0, 1), got {}", self.eps));
        }
        if let Ensemble::RowsUniformOnBall { r } = self.ensemble {
            if !(r > 0.0) {
                return fail(format!("ensemble radius must be positive, got {r}"));
            }
        }
        if self.ensemble == Ensemble::Explicit && self.needs_source() {
            return fail("explicit ensembles cannot be sampled".into());
        }
        if self.needs_source() {
            let Some(source) = &self.source else {
                return fail(format!("{} needs a source", self.experiment.name()));
            };
            source
                .validate_for_length(self.n)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        match self.experiment {
            ExperimentKind::PhaseTransition => {
                if self.rates.is_empty() {
                    return fail("phase-transition needs at least one rate".into());
                }
                if let Some(r) = self.rates.iter().find(|r| r.measurements(self.n) == 0) {
                    return fail(format!("rate {r} gives no measurements at n = {}", self.n));
                }
                match self.source {
                    Some(SourceSpec::SparseExact { .. }) => {}
                    Some(SourceSpec::MixedDiscreteContinuous { ref atoms, .. })
                        if atoms.iter().all(|a: &Atom| a.value == 0.0) => {}
                    _ => {
                        return fail(
                            "phase-transition needs a sparse-exact source or a mixed source with atoms at 0"
                                .into(),
                        )
                    }
                }
            }
            ExperimentKind::SparseThreshold => {
                if !matches!(self.source, Some(SourceSpec::SparseExact { .. })) {
                    return fail("sparse-threshold needs a sparse-exact source".into());
                }
            }
            ExperimentKind::RanktwoVerify => {
                if self.n < 2 {
                    return fail("ranktwo-verify needs n >= 2".into());
                }
            }
            ExperimentKind::CoveringDim => {
                if let Some(s) = &self.rho_schedule {
                    crate::covering::minkowski_dim_estimate(&PointCloud::new(&[vec![0.0]])?, s)
                        .map_err(|e| Error::Config(e.to_string()))?;
                }
            }
            ExperimentKind::Concentration => {
                let g = self.grid.clone().unwrap_or_default();
                if g.dims.iter().any(|&d| d < 2)
                    || g.radii.iter().any(|&r| !(r > 0.0))
                    || g.deltas.iter().any(|&d| !(d > 0.0))
                    || g.pairs == 0
                {
                    return fail("concentration grid needs dims >= 2, positive radii and deltas, pairs >= 1".into());
                }
            }
            ExperimentKind::Decode => {}
        }
        Ok(())
    }

    fn needs_source(&self) -> bool {
        matches!(
            self.experiment,
            ExperimentKind::PhaseTransition | ExperimentKind::SparseThreshold | ExperimentKind::CoveringDim
        )
    }

    fn source(&self) -> &SourceSpec {
        self.source.as_ref().expect("validated")
    }
}

/// One row of a success-rate sweep. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rate: Rate,
    pub m: usize,
    pub trials: u64,
    pub successes: u64,
    pub p_success: f64,
    pub stderr: f64,
    pub skipped: u64,
}

impl SweepRow {
    pub fn evaluated(&self) -> u64 {
        self.trials - self.skipped
    }
}

enum TrialOutcome {
    Success,
    Failure,
    Skipped,
}

/// How many nonzeros the support-enumeration decoder may hypothesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Budget {
    /// The realized nonzero count (exact-sparse sources announce it).
    Realized,
    /// `m − 1`: vectors with fewer nonzeros than measurements, the largest
    /// sparsity class whose dimension stays below `m`.
    BelowMeasurements,
}

fn run_trial(cfg: &ExperimentConfig, row: usize, m: usize, trial: u64, budget: Budget) -> Result<TrialOutcome> {
    let seed = derive_seed(cfg.master_seed, &[row as u64, trial]);
    let sample = sample_source(cfg.source(), cfg.n, derive_seed(seed, &[0]))?;
    let mat_seed = cfg.fixed_matrix_seed.unwrap_or_else(|| derive_seed(seed, &[1]));
    let mat = sample_matrix(cfg.ensemble, m, cfg.n, mat_seed)?;
    let obs = phaseless_measure(&mat, &sample.x)?;
    let tol = cfg.tol * obs.norm().max(1.0);
    let s_max = match budget {
        Budget::Realized => sample.nonzero_count,
        Budget::BelowMeasurements => (m - 1).min(cfg.n),
    };
    let opts = SparseDecodeOptions {
        work_cap: cfg.work_cap as u128,
        exec: Execution::Sequential,
        ..Default::default()
    };
    match sparse_decode(&mat, &obs, s_max, tol, &opts) {
        Ok(d) => Ok(match d.result.x_hat() {
            Some(x_hat) if equiv(x_hat, &sample.x, tol)? => TrialOutcome::Success,
            _ => TrialOutcome::Failure,
        }),
        Err(Error::BudgetExceeded { .. }) => Ok(TrialOutcome::Skipped),
        Err(e) => Err(e),
    }
}

fn run_sweep(cfg: &ExperimentConfig, points: &[(Rate, usize)], budget: Budget, exec: Execution) -> Result<Vec<SweepRow>> {
    points
        .iter()
        .enumerate()
        .map(|(row, &(rate, m))| {
            let outcomes = par::map_indexed(exec, cfg.trials as usize, |t| run_trial(cfg, row, m, t as u64, budget));
            let (mut successes, mut skipped) = (0u64, 0u64);
            for o in outcomes {
                match o? {
                    TrialOutcome::Success => successes += 1,
                    TrialOutcome::Failure => {}
                    TrialOutcome::Skipped => skipped += 1,
                }
            }
            let evaluated = cfg.trials - skipped;
            let (p, se) = if evaluated > 0 {
                let p = successes as f64 / evaluated as f64;
                (p, (p * (1.0 - p) / evaluated as f64).sqrt())
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok(SweepRow {
                rate,
                m,
                trials: cfg.trials,
                successes,
                p_success: p,
                stderr: se,
                skipped,
            })
        })
        .collect()
}

/// Success rate of support-enumeration decoding against `R`, with a fresh
/// source vector and (unless a fixed matrix seed is set) a fresh matrix per
/// trial.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_phase_transition_with(cfg, Execution::default())
}

pub fn run_phase_transition_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    if cfg.experiment != ExperimentKind::PhaseTransition {
        return Err(Error::Config("not a phase-transition config".into()));
    }
    cfg.validate()?;
    let points: Vec<(Rate, usize)> = cfg.rates.iter().map(|r| (*r, r.measurements(cfg.n))).collect();
    let budget = match cfg.source() {
        SourceSpec::SparseExact { .. } => Budget::Realized,
        _ => Budget::BelowMeasurements,
    };
    run_sweep(cfg, &points, budget, exec)
}

/// Measurement counts swept by [`run_sparse_threshold`]: `s−1, s, s+1, s+2, 2s`
/// restricted to `1..=n`, deduplicated and sorted.
pub fn threshold_counts(s: usize, n: usize) -> Vec<usize> {
    let mut ms: Vec<usize> = [s as i64 - 1, s as i64, s as i64 + 1, s as i64 + 2, 2 * s as i64]
        .into_iter()
        .filter(|&m| m >= 1 && m <= n as i64)
        .map(|m| m as usize)
        .collect();
    ms.sort_unstable();
    ms.dedup();
    ms
}

pub fn run_sparse_threshold(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sparse_threshold_with(cfg, Execution::default())
}

pub fn run_sparse_threshold_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    if cfg.experiment != ExperimentKind::SparseThreshold {
        return Err(Error::Config("not a sparse-threshold config".into()));
    }
    cfg.validate()?;
    let SourceSpec::SparseExact { s, .. } = *cfg.source() else {
        unreachable!("validated")
    };
    let points = threshold_counts(s, cfg.n)
        .into_iter()
        .map(|m| Ok((Rate::fraction(m as u128, cfg.n as u128)?, m)))
        .collect::<Result<Vec<_>>>()?;
    run_sweep(cfg, &points, Budget::Realized, exec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub r: f64,
    pub delta: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

fn gaussian_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if check_independent(&u, &v).is_ok() {
            return (u, v);
        }
    }
}

/// Checks `p̂ ≤ δ·f + 3·stderr` over the concentration grid. The `pairs`
/// Gaussian pairs are shared by all `(r, δ)` at a given dimension.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<Vec<ConcentrationRow>> {
    run_concentration_with(cfg, Execution::default())
}

pub fn run_concentration_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<ConcentrationRow>> {
    cfg.validate()?;
    let grid = cfg.grid.clone().unwrap_or_default();
    let mut rows = Vec::new();
    for (ni, &n) in grid.dims.iter().enumerate() {
        let pairs: Vec<_> = (0..grid.pairs)
            .map(|p| gaussian_pair(n, derive_seed(cfg.master_seed, &[0, n as u64, p as u64])))
            .collect();
        for (ri, &r) in grid.radii.iter().enumerate() {
            for (di, &delta) in grid.deltas.iter().enumerate() {
                for (p, (u, v)) in pairs.iter().enumerate() {
                    let q = ConcentrationQuery::new(u.clone(), v.clone(), r, delta)?;
                    let bound = delta * f_bound(&q)?;
                    let seed = derive_seed(cfg.master_seed, &[1, ni as u64, ri as u64, di as u64, p as u64]);
                    let est = mc_concentration_with(&q, cfg.trials, seed, exec)?;
                    rows.push(ConcentrationRow {
                        n,
                        r,
                        delta,
                        p_hat: est.p_hat,
                        stderr: est.stderr,
                        bound,
                        pass: est.p_hat <= bound + 3.0 * est.stderr,
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTwoRow {
    pub pair: u64,
    pub n: usize,
    pub det: f64,
    pub trace: f64,
    pub sigma2: f64,
    pub det_rel_err: f64,
    pub trace_rel_err: f64,
    pub sigma2_rel_err: f64,
    pub reconstruction_err: f64,
    pub pass: bool,
}

/// Relative tolerance for the rank-two checks.
pub const RANKTWO_TOL: f64 = 1e-10;

/// Compares the closed-form spectrum against the eigenvalues of `R J Rᵀ` for
/// `trials` Gaussian pairs with dimensions uniform in `2..=n`.
pub fn run_ranktwo_verify(cfg: &ExperimentConfig) -> Result<Vec<RankTwoRow>> {
    run_ranktwo_verify_with(cfg, Execution::default())
}

pub fn run_ranktwo_verify_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<RankTwoRow>> {
    cfg.validate()?;
    par::map_indexed(exec, cfg.trials as usize, |i| {
        let seed = derive_seed(cfg.master_seed, &[i as u64]);
        let n = rng_from_seed(seed).random_range(2..=cfg.n);
        let (u, v) = gaussian_pair(n, derive_seed(seed, &[0]));
        let check = check_pair(&u, &v)?;
        let [det_rel_err, trace_rel_err, sigma2_rel_err] = check.relative_errors();
        Ok(RankTwoRow {
            pair: i as u64,
            n,
            det: check.formula.det,
            trace: check.formula.trace,
            sigma2: check.formula.sigma2,
            det_rel_err,
            trace_rel_err,
            sigma2_rel_err,
            reconstruction_err: check.reconstruction_error / check.scale,
            pass: check.passes(RANKTWO_TOL),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringRow {
    pub rho: f64,
    pub count: usize,
    pub running_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringReport {
    pub estimate: DimEstimate,
    pub rows: Vec<CoveringRow>,
    pub ambient_dim: usize,
    pub samples: usize,
}

/// Box-counting slopes of `trials` samples drawn from the configured source.
pub fn run_covering_dim(cfg: &ExperimentConfig) -> Result<CoveringReport> {
    run_covering_dim_with(cfg, Execution::default())
}

pub fn run_covering_dim_with(cfg: &ExperimentConfig, exec: Execution) -> Result<CoveringReport> {
    cfg.validate()?;
    let points = par::map_indexed(exec, cfg.trials as usize, |i| {
        sample_source(cfg.source(), cfg.n, derive_seed(cfg.master_seed, &[i as u64])).map(|s| s.x)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let cloud = PointCloud::new(&points)?;
    let schedule = match &cfg.rho_schedule {
        Some(s) => s.clone(),
        None => auto_schedule(&cloud, exec),
    };
    let estimate = minkowski_dim_estimate_with(&cloud, &schedule, exec)?;
    let rows = estimate
        .rho_schedule
        .iter()
        .zip(&estimate.counts)
        .zip(estimate.running_slopes())
        .map(|((&rho, &count), running_slope)| CoveringRow {
            rho,
            count,
            running_slope,
        })
        .collect();
    Ok(CoveringReport {
        estimate,
        rows,
        ambient_dim: cfg.n,
        samples: points.len(),
    })
}

fn header(cfg: &ExperimentConfig) -> String {
    format!("{}: master_seed={}", cfg.experiment.name(), cfg.master_seed)
}

/// Summary of a success-rate sweep: monotonicity check, achievability flags
/// and, for mixed sources, the 0.5 crossing against the theoretical rate.
pub fn summarize_sweep(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Report {
    let mut lines = vec![header(cfg)];
    let kept: Vec<&SweepRow> = rows.iter().filter(|r| r.evaluated() > 0).collect();
    let succ: Vec<u64> = kept.iter().map(|r| r.successes).collect();
    let eval: Vec<u64> = kept.iter().map(|r| r.evaluated()).collect();
    let mono = stats::monotone_check(&succ, &eval);
    for row in rows {
        let flag = if row.evaluated() == 0 {
            "skipped"
        } else if stats::empirically_achievable(row.p_success, row.stderr, cfg.eps) {
            "empirically eps-achievable"
        } else {
            "not eps-achievable"
        };
        lines.push(format!(
            "  rate={} m={} p_success={:.4} stderr={:.4} skipped={} -> {flag} (eps={})",
            row.rate, row.m, row.p_success, row.stderr, row.skipped, cfg.eps
        ));
    }
    lines.push(format!(
        "  monotone: max_residual={:.4} pooled_stderr={:.4} -> {}",
        mono.max_residual,
        mono.pooled_stderr,
        if mono.passes { "pass" } else { "FAIL" }
    ));
    if let TheoreticalRate::Known(lambda) = theoretical_rate(cfg.source()) {
        let rates: Vec<f64> = kept.iter().map(|r| r.rate.as_f64()).collect();
        match stats::crossing_rate(&rates, &mono.fitted, 0.5) {
            Some(r) => lines.push(format!("  crossing R*={r:.4} theoretical={lambda}")),
            None => lines.push(format!("  crossing R*=none theoretical={lambda}")),
        }
    }
    if let SourceSpec::SparseExact { s, .. } = cfg.source() {
        lines.push(format!("  probabilistic threshold m > {s}; deterministic guarantee line m = {}", 2 * s));
    }
    Report {
        lines,
        passed: mono.passes,
    }
}

pub fn summarize_concentration(cfg: &ExperimentConfig, rows: &[ConcentrationRow]) -> Report {
    let failed = rows.iter().filter(|r| !r.pass).count();
    Report {
        lines: vec![
            header(cfg),
            format!("  grid points={} failed={failed} trials={}", rows.len(), cfg.trials),
        ],
        passed: failed == 0,
    }
}

pub fn summarize_ranktwo(cfg: &ExperimentConfig, rows: &[RankTwoRow]) -> Report {
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows
        .iter()
        .map(|r| r.det_rel_err.max(r.trace_rel_err).max(r.sigma2_rel_err).max(r.reconstruction_err))
        .fold(0.0, f64::max);
    Report {
        lines: vec![
            header(cfg),
            format!("  pairs={} failed={failed} worst_rel_err={worst:e} tol={RANKTWO_TOL:e}", rows.len()),
        ],
        passed: failed == 0,
    }
}

pub fn summarize_covering(cfg: &ExperimentConfig, rep: &CoveringReport) -> Report {
    let e = &rep.estimate;
    let sane = (0.0..=rep.ambient_dim as f64).contains(&e.lower_slope)
        && (0.0..=rep.ambient_dim as f64).contains(&e.upper_slope)
        && e.counts.windows(2).all(|w| w[0] <= w[1]);
    Report {
        lines: vec![
            header(cfg),
            format!(
                "  samples={} ambient_dim={} lower_slope={:.4} upper_slope={:.4} lower_slope/n={:.4}",
                rep.samples,
                rep.ambient_dim,
                e.lower_slope,
                e.upper_slope,
                e.lower_slope / rep.ambient_dim as f64
            ),
        ],
        passed: sane,
    }
}
