//! Covering numbers and box-counting (Minkowski) dimension estimates for finite
//! point clouds.
//!
//! Covering counts come from a farthest-first traversal. Its first `k` centers
//! are pairwise at least `r_{k-1}` apart, where `r_k` is the covering radius
//! after `k` centers. [`covering_number`] at radius `ρ` returns the smallest
//! `k` with `r_k ≤ 2ρ`: those centers cover the cloud with balls of radius
//! `2ρ`, and being pairwise more than `2ρ` apart, no ball of radius `ρ` holds
//! two of them. So the count lies between the optimal covering numbers at `2ρ`
//! and at `ρ`, and it is non-increasing in `ρ` by construction.

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Minimum number of radii in a dimension-estimation schedule.
pub const MIN_SCHEDULE: usize = 4;

/// Clouds at least this large split each traversal step across workers.
const PAR_THRESHOLD: usize = 4096;
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    /// Row-major, `len × ambient_dim`.
    coords: Vec<f64>,
    ambient_dim: usize,
    radius_bound: f64,
}

impl PointCloud {
    /// Builds a cloud whose `radius_bound` is the largest point norm.
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut bound: f64 = 0.0;
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            bound = bound.max(p.iter().map(|x| x * x).sum::<f64>().sqrt());
            coords.extend_from_slice(p);
        }
        Ok(Self {
            coords,
            ambient_dim: dim,
            radius_bound: bound,
        })
    }

    /// Like [`PointCloud::new`] with an explicit bound `L`; fails if some point
    /// lies outside `B(0, L)`.
    pub fn with_radius_bound(points: &[Vec<f64>], radius_bound: f64) -> Result<Self> {
        let mut cloud = Self::new(points)?;
        if cloud.radius_bound > radius_bound {
            return Err(Error::InvalidParameter(format!(
                "point of norm {} exceeds radius bound {radius_bound}",
                cloud.radius_bound
            )));
        }
        cloud.radius_bound = radius_bound;
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_dim)
    }

    /// Median over points of the distance to the nearest other point; 0 for a
    /// single point. Quadratic in the cloud size.
    pub fn median_nn_distance(&self, exec: Execution) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mut nn = par::map_indexed(exec, n, |i| {
            let p = self.point(i);
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist_sq(p, self.point(j)))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        });
        nn.sort_by(f64::total_cmp);
        nn[n / 2]
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs a farthest-first traversal starting at point 0 until the covering
/// radius is at most `stop_radius`. Returns `r_k` for `k = 1, 2, …` (the last
/// entry is `≤ stop_radius`). Ties go to the lowest index.
fn farthest_first_radii(cloud: &PointCloud, stop_radius: f64, exec: Execution) -> Vec<f64> {
    let n = cloud.len();
    let mut nearest: Vec<f64> = (0..n).map(|i| dist_sq(cloud.point(i), cloud.point(0))).collect();
    let stop_sq = stop_radius * stop_radius;
    let mut radii = Vec::new();
    loop {
        let (far_idx, far_sq) = argmax(&nearest);
        radii.push(far_sq.sqrt());
        if far_sq <= stop_sq {
            return radii;
        }
        let center = cloud.point(far_idx);
        if n >= PAR_THRESHOLD && exec == Execution::Parallel {
            let chunks = n.div_ceil(CHUNK);
            let updated = par::map_indexed(exec, chunks, |c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(n);
                (lo..hi)
                    .map(|i| nearest[i].min(dist_sq(cloud.point(i), center)))
                    .collect::<Vec<_>>()
            });
            for (c, chunk) in updated.into_iter().enumerate() {
                nearest[c * CHUNK..c * CHUNK + chunk.len()].copy_from_slice(&chunk);
            }
        } else {
            for (i, d) in nearest.iter_mut().enumerate() {
                *d = d.min(dist_sq(cloud.point(i), center));
            }
        }
    }
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Number of centers needed at radius `rho` given the traversal radii.
fn count_at(radii: &[f64], rho: f64) -> usize {
    radii.iter().position(|&r| r <= 2.0 * rho).map_or(radii.len(), |k| k + 1)
}

/// Greedy covering count at radius `rho`, bracketed by the optimal counts at
/// `2ρ` and `ρ` (see the module docs).
pub fn covering_number(cloud: &PointCloud, rho: f64) -> Result<usize> {
    if !(rho > 0.0) {
        return Err(Error::InvalidRadius(rho));
    }
    let radii = farthest_first_radii(cloud, 2.0 * rho, Execution::default());
    Ok(count_at(&radii, rho))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimEstimate {
    pub lower_slope: f64,
    pub upper_slope: f64,
    pub rho_schedule: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DimEstimate {
    /// Slope of `log N` against `log(1/ρ)` between schedule entries `i − 1`
    /// and `i`; `None` for the first entry.
    pub fn running_slopes(&self) -> Vec<Option<f64>> {
        std::iter::once(None)
            .chain((1..self.counts.len()).map(|i| Some(self.pair_slope(i))))
            .collect()
    }

    fn pair_slope(&self, i: usize) -> f64 {
        let dn = (self.counts[i] as f64).ln() - (self.counts[i - 1] as f64).ln();
        let dr = self.rho_schedule[i - 1].ln() - self.rho_schedule[i].ln();
        dn / dr
    }
}

fn validate_schedule(schedule: &[f64]) -> Result<()> {
    let ok = schedule.len() >= MIN_SCHEDULE
        && schedule.iter().all(|r| *r > 0.0 && r.is_finite())
        && schedule.windows(2).all(|w| w[1] < w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::ScheduleTooShort { min: MIN_SCHEDULE })
    }
}

/// Lower/upper box-counting slopes: min and max of the consecutive-pair slopes
/// of `log N(ρ)` against `log(1/ρ)`, clamped to `[0, ambient_dim]`.
///
/// Only meaningful while `ρ` stays well above the sampling resolution of the
/// cloud; see [`auto_schedule`].
pub fn minkowski_dim_estimate(cloud: &PointCloud, rho_schedule: &[f64]) -> Result<DimEstimate> {
    minkowski_dim_estimate_with(cloud, rho_schedule, Execution::default())
}

pub fn minkowski_dim_estimate_with(
    cloud: &PointCloud,
    rho_schedule: &[f64],
    exec: Execution,
) -> Result<DimEstimate> {
    validate_schedule(rho_schedule)?;
    let smallest = rho_schedule[rho_schedule.len() - 1];
    // one traversal serves every radius in the schedule
    let radii = farthest_first_radii(cloud, 2.0 * smallest, exec);
    let counts: Vec<usize> = rho_schedule.iter().map(|&rho| count_at(&radii, rho)).collect();
    let mut est = DimEstimate {
        lower_slope: 0.0,
        upper_slope: 0.0,
        rho_schedule: rho_schedule.to_vec(),
        counts,
    };
    let ambient = cloud.ambient_dim() as f64;
    let slopes: Vec<f64> = (1..est.counts.len()).map(|i| est.pair_slope(i)).collect();
    est.lower_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min).clamp(0.0, ambient);
    est.upper_slope = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max).clamp(0.0, ambient);
    Ok(est)
}

/// [`MIN_SCHEDULE`] radii in ratio 2, the smallest at twice the median
/// nearest-neighbour distance: the finest scales the sample still resolves.
///
/// Clouds whose median nearest-neighbour distance is 0 (mostly repeated
/// points) fall back to halving from `L/2`, or from 1 when `L = 0`.
pub fn auto_schedule(cloud: &PointCloud, exec: Execution) -> Vec<f64> {
    let floor = 2.0 * cloud.median_nn_distance(exec);
    if floor > 0.0 {
        return (0..MIN_SCHEDULE)
            .rev()
            .map(|k| floor * (1u32 << k) as f64)
            .collect();
    }
    let start = if cloud.radius_bound() > 0.0 {
        cloud.radius_bound() / 2.0
    } else {
        1.0
    };
    (0..MIN_SCHEDULE).map(|k| start / (1u32 << k) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub eps: f64,
    /// `(n, lower dimension estimate)` per cloud.
    pub per_length: Vec<(usize, f64)>,
}

/// Finite-sample surrogate of the lower Minkowski-dimension compression rate:
/// the largest `lower_slope / n` over the given clouds.
///
/// Each cloud should already be restricted to an event of probability at least
/// `1 − eps` for its length `n`; `eps` is recorded, not used for trimming.
pub fn compression_rate_estimate(
    clouds: &[(PointCloud, Vec<f64>)],
    eps: f64,
) -> Result<RateEstimate> {
    if clouds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1), got {eps}")));
    }
    let mut per_length = Vec::with_capacity(clouds.len());
    for (cloud, schedule) in clouds {
        let est = minkowski_dim_estimate(cloud, schedule)?;
        per_length.push((cloud.ambient_dim(), est.lower_slope));
    }
    let rate = per_length
        .iter()
        .map(|(n, d)| d / *n as f64)
        .fold(0.0, f64::max);
    Ok(RateEstimate {
        rate,
        eps,
        per_length,
    })
}
