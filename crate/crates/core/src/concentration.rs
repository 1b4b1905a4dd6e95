//! Small-ball probabilities of the quadratic form `aᵀ(uuᵀ − vvᵀ)a` for `a`
//! uniform on the ball `B_n(0, r)`.
//!
//! [`f_bound`] evaluates the analytic factor `f(δ, r, u, v)` such that
//! `P[|aᵀCa| ≤ δ] ≤ δ·f`, and [`mc_concentration`] estimates the left-hand
//! side by simulation.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::ranktwo::{check_independent, dot};
use crate::rng::{derive_seed, rng_from_seed};

/// Trials per independently seeded block in [`mc_concentration`].
pub const MC_BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationQuery {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub r: f64,
    pub delta: f64,
}

impl ConcentrationQuery {
    /// `delta = 0` is accepted so the null event can be simulated; [`f_bound`]
    /// itself needs `delta > 0`.
    pub fn new(u: Vec<f64>, v: Vec<f64>, r: f64, delta: f64) -> Result<Self> {
        check_independent(&u, &v)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidRadius(r));
        }
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be non-negative, got {delta}")));
        }
        Ok(Self { u, v, r, delta })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `|aᵀCa| = |(aᵀu)² − (aᵀv)²|`
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        let pu = dot(a, &self.u);
        let pv = dot(a, &self.v);
        (pu * pu - pv * pv).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub stderr: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        Self {
            p_hat,
            trials,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
        }
    }
}

pub fn ln_ball_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    let half = n as f64 / 2.0;
    Ok(half * std::f64::consts::PI.ln() + n as f64 * r.ln() - ln_gamma(half + 1.0))
}

/// Volume `π^{n/2} rⁿ / Γ(n/2 + 1)` of the n-ball of radius `r`.
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    ln_ball_volume(n, r).map(f64::exp)
}

/// The factor `f(δ, r, u, v)`; the bound on `P[|aᵀCa| ≤ δ]` is `δ·f`.
pub fn f_bound(q: &ConcentrationQuery) -> Result<f64> {
    let (uu, vv, uv) = check_independent(&q.u, &q.v)?;
    if !(q.delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "f_bound needs delta > 0, got {}",
            q.delta
        )));
    }
    let n = q.dim();
    let plus: f64 = q.u.iter().zip(&q.v).map(|(a, b)| (a + b) * (a + b)).sum();
    let minus: f64 = q.u.iter().zip(&q.v).map(|(a, b)| (a - b) * (a - b)).sum();
    let spread = plus.sqrt() * minus.sqrt() - (uu - vv).abs();
    let log_term = 1.0 + (2.0 + 2.0 * q.r * q.r * spread / q.delta).ln();
    let gram_root = (uu * vv - uv * uv).sqrt();
    let ln_f = std::f64::consts::LN_2 + (n as f64 - 2.0) * (2.0 * q.r).ln() + log_term.ln()
        - gram_root.ln()
        - ln_ball_volume(n, q.r)?;
    Ok(ln_f.exp())
}

/// Fills `out` with a point uniform on `B_n(0, r)`: a normalized Gaussian
/// direction scaled by `r·U^{1/n}`.
pub fn fill_uniform_ball<R: Rng + ?Sized>(out: &mut [f64], r: f64, rng: &mut R) {
    let n = out.len();
    let norm = loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let s = dot(out, out);
        if s > 0.0 {
            break s.sqrt();
        }
    };
    let u: f64 = rng.random();
    let scale = r * u.powf(1.0 / n as f64) / norm;
    for x in out.iter_mut() {
        *x *= scale;
    }
    // rounding can push the norm a few ulps past r
    while dot(out, out).sqrt() > r {
        for x in out.iter_mut() {
            *x *= 1.0 - f64::EPSILON;
        }
    }
}

pub fn sample_uniform_ball<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    let mut out = vec![0.0; n];
    fill_uniform_ball(&mut out, r, rng);
    Ok(out)
}

/// Monte Carlo estimate of `P[|aᵀCa| ≤ δ]` with `a` uniform on `B_n(0, r)`.
pub fn mc_concentration(q: &ConcentrationQuery, trials: u64, seed: u64) -> Result<McEstimate> {
    mc_concentration_with(q, trials, seed, Execution::default())
}

/// Trials are split into blocks of [`MC_BLOCK`]; block `k` draws from a stream
/// seeded by `(seed, k)`, so the estimate does not depend on `exec` or on the
/// number of workers.
pub fn mc_concentration_with(
    q: &ConcentrationQuery,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let blocks = trials.div_ceil(MC_BLOCK) as usize;
    let n = q.dim();
    let hits = par::sum_indexed(exec, blocks, |k| {
        let start = k as u64 * MC_BLOCK;
        let len = MC_BLOCK.min(trials - start);
        let mut rng = rng_from_seed(derive_seed(seed, &[k as u64]));
        let mut a = vec![0.0; n];
        let mut hits = 0u64;
        for _ in 0..len {
            fill_uniform_ball(&mut a, q.r, &mut rng);
            if q.quadratic_form(&a) <= q.delta {
                hits += 1;
            }
        }
        hits
    });
    Ok(McEstimate::from_counts(hits, trials, seed))
}
