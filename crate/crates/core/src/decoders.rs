//! Decoders for phaseless measurements.
//!
//! A decoder maps `y = |Ax|` back to the class `{x, −x}`. Both decoders here
//! collect every hypothesis consistent with `y`, reduce each to its
//! sign-canonical representative, merge equivalent ones, and succeed only
//! when exactly one class survives. An empty or ambiguous fiber is reported
//! as a [`Failure`](DecodeResult::Failure), never resolved arbitrarily.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{magnitudes, MeasurementMatrix, PhaselessObservation};
use crate::par::{self, Execution};

/// Representative of `{x, −x}` whose first entry above `tau_sign` in magnitude
/// is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalVector {
    pub x: Vec<f64>,
    pub tau_sign: f64,
}

pub fn canonicalize(u: &[f64], tau_sign: f64) -> CanonicalVector {
    let flip = u
        .iter()
        .find(|v| v.abs() > tau_sign)
        .is_some_and(|v| *v < 0.0);
    // `+ 0.0` turns -0.0 into 0.0
    let x = if flip {
        u.iter().map(|v| -v + 0.0).collect()
    } else {
        u.iter().map(|v| v + 0.0).collect()
    };
    CanonicalVector { x, tau_sign }
}

fn distance_to_class(u: &[f64], v: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    f64::min(minus, plus).sqrt()
}

/// `u ≡ v` up to `tol`: `min(‖u − v‖, ‖u + v‖) ≤ tol`.
pub fn equiv(u: &[f64], v: &[f64], tol: f64) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(distance_to_class(u, v) <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum FailureReason {
    NoCandidate,
    /// At least `count` distinct classes fit; `count` saturates at the
    /// decoder's class limit.
    Ambiguous { count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeResult {
    Success { x_hat: CanonicalVector },
    Failure(FailureReason),
}

impl DecodeResult {
    pub fn is_success(&self) -> bool {
        matches!(self, DecodeResult::Success { .. })
    }

    pub fn x_hat(&self) -> Option<&[f64]> {
        match self {
            DecodeResult::Success { x_hat } => Some(&x_hat.x),
            DecodeResult::Failure(_) => None,
        }
    }
}

/// A decode result plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub result: DecodeResult,
    /// `‖|A x̂| − y‖` for a success; otherwise the smallest mismatch among the
    /// hypotheses examined (`None` if there were none).
    pub residual: Option<f64>,
    pub classes_found: usize,
}

#[derive(Debug, Clone, Serialize)]
struct DecodedRecord<'a> {
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_hat: Option<&'a [f64]>,
    residual: Option<f64>,
    classes_found: usize,
}

impl Decoded {
    /// `{outcome, x_hat?, residual, classes_found}`
    pub fn to_json(&self) -> Result<String> {
        let outcome = match self.result {
            DecodeResult::Success { .. } => "success",
            DecodeResult::Failure(FailureReason::NoCandidate) => "no-candidate",
            DecodeResult::Failure(FailureReason::Ambiguous { .. }) => "ambiguous",
        };
        Ok(serde_json::to_string(&DecodedRecord {
            outcome,
            x_hat: self.result.x_hat(),
            residual: self.residual,
            classes_found: self.classes_found,
        })?)
    }
}

fn mismatch(found: &[f64], y: &[f64]) -> f64 {
    found
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn check_shapes(mat: &MeasurementMatrix, obs: &PhaselessObservation) -> Result<()> {
    if obs.y.len() != mat.rows() {
        return Err(Error::DimensionMismatch {
            expected: mat.rows(),
            found: obs.y.len(),
        });
    }
    Ok(())
}

/// Collects class representatives in arrival order.
struct ClassSet {
    reps: Vec<(CanonicalVector, f64)>,
    tol: f64,
    limit: usize,
}

impl ClassSet {
    fn new(tol: f64, limit: usize) -> Self {
        Self {
            reps: Vec::new(),
            tol,
            limit,
        }
    }

    /// Returns false once the class limit is reached.
    fn offer(&mut self, v: CanonicalVector, residual: f64) -> bool {
        if !self.reps.iter().any(|(r, _)| distance_to_class(&r.x, &v.x) <= self.tol) {
            self.reps.push((v, residual));
        }
        self.reps.len() < self.limit
    }

    fn finish(mut self, best_rejected: Option<f64>) -> Decoded {
        let classes_found = self.reps.len();
        match classes_found {
            0 => Decoded {
                result: DecodeResult::Failure(FailureReason::NoCandidate),
                residual: best_rejected,
                classes_found,
            },
            1 => {
                let (x_hat, residual) = self.reps.pop().unwrap();
                Decoded {
                    result: DecodeResult::Success { x_hat },
                    residual: Some(residual),
                    classes_found,
                }
            }
            count => Decoded {
                residual: self.reps.iter().map(|(_, r)| *r).reduce(f64::min),
                result: DecodeResult::Failure(FailureReason::Ambiguous { count }),
                classes_found,
            },
        }
    }
}

/// Fiber decoder over a finite candidate set: keeps the candidates `u` with
/// `‖|Au| − y‖ ≤ tol`, canonicalizes them and merges classes at `tol`.
pub fn fiber_decode(
    mat: &MeasurementMatrix,
    obs: &PhaselessObservation,
    candidates: &[Vec<f64>],
    tol: f64,
) -> Result<Decoded> {
    fiber_decode_with(mat, obs, candidates, tol, Execution::default())
}

pub fn fiber_decode_with(
    mat: &MeasurementMatrix,
    obs: &PhaselessObservation,
    candidates: &[Vec<f64>],
    tol: f64,
    exec: Execution,
) -> Result<Decoded> {
    check_shapes(mat, obs)?;
    if candidates.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be non-negative, got {tol}")));
    }
    let mismatches = par::map_slice(exec, candidates, |u| -> Result<f64> {
        Ok(mismatch(&magnitudes(mat, u)?, &obs.y))
    });
    let mut classes = ClassSet::new(tol, usize::MAX);
    let mut best_rejected: Option<f64> = None;
    for (u, mis) in candidates.iter().zip(mismatches) {
        let mis = mis?;
        if mis <= tol {
            classes.offer(canonicalize(u, 0.0), mis);
        } else {
            best_rejected = Some(best_rejected.map_or(mis, |b| b.min(mis)));
        }
    }
    Ok(classes.finish(best_rejected))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseDecodeOptions {
    /// Maximum number of least-squares solves (supports × sign patterns).
    pub work_cap: u128,
    /// Enumeration stops once this many distinct classes have been seen.
    pub class_limit: usize,
    pub exec: Execution,
}

impl Default for SparseDecodeOptions {
    fn default() -> Self {
        Self {
            work_cap: 100_000_000,
            class_limit: 1024,
            exec: Execution::default(),
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Least-squares solves needed by [`sparse_decode`]: every nonempty support
/// of size at most `s_max` times `2^{m−1}` sign patterns. Saturates.
pub fn sparse_work(n: usize, m: usize, s_max: usize) -> u128 {
    let patterns = if m == 0 {
        0
    } else if m > 127 {
        u128::MAX
    } else {
        1u128 << (m - 1)
    };
    (1..=s_max.min(n))
        .map(|k| binomial(n, k).saturating_mul(patterns))
        .fold(0u128, u128::saturating_add)
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Supports of size `1..=s_max`, by size and then lexicographically.
fn supports(n: usize, s_max: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=s_max.min(n)).flat_map(move |k| {
        let mut cur: Option<Vec<usize>> = None;
        std::iter::from_fn(move || {
            match cur.as_mut() {
                None => cur = Some((0..k).collect()),
                Some(c) => {
                    if !next_combination(c, n) {
                        return None;
                    }
                }
            }
            cur.clone()
        })
    })
}

struct SupportFit {
    accepted: Vec<(Vec<f64>, f64)>,
    best_residual: Option<f64>,
}

/// Solves `A_S u = ε ⊙ y` in the least-squares sense for every sign pattern
/// with `ε₁ = +1` and keeps the solutions that fit both the signed system and
/// the magnitudes.
fn fit_support(mat: &MeasurementMatrix, y: &[f64], support: &[usize], tol: f64) -> SupportFit {
    let m = mat.rows();
    let n = mat.cols();
    let k = support.len();
    let sub = DMatrix::from_fn(m, k, |i, j| mat.a[(i, support[j])]);
    let svd = sub.svd(true, true);
    let (u_mat, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = sigma_max * (m.max(k) as f64) * f64::EPSILON;
    let rank: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();

    let mut out = SupportFit {
        accepted: Vec::new(),
        best_residual: None,
    };
    if rank.is_empty() {
        return out;
    }
    let mut b = vec![0.0; m];
    let mut coef = vec![0.0; rank.len()];
    let patterns: u64 = 1 << (m - 1);
    for pattern in 0..patterns {
        for i in 0..m {
            let negative = i > 0 && (pattern >> (i - 1)) & 1 == 1;
            b[i] = if negative { -y[i] } else { y[i] };
        }
        for (c, &r) in coef.iter_mut().zip(&rank) {
            *c = (0..m).map(|i| u_mat[(i, r)] * b[i]).sum();
        }
        let residual = (0..m)
            .map(|i| {
                let fit: f64 = coef.iter().zip(&rank).map(|(c, &r)| c * u_mat[(i, r)]).sum();
                (b[i] - fit) * (b[i] - fit)
            })
            .sum::<f64>()
            .sqrt();
        out.best_residual = Some(out.best_residual.map_or(residual, |b| b.min(residual)));
        if residual > tol {
            continue;
        }
        let mut full = vec![0.0; n];
        for (j, &col) in support.iter().enumerate() {
            full[col] = coef
                .iter()
                .zip(&rank)
                .map(|(c, &r)| v_t[(r, j)] * c / svd.singular_values[r])
                .sum();
        }
        let remeasured = mismatch(&magnitudes(mat, &full).expect("shape checked"), y);
        if remeasured <= tol {
            out.accepted.push((full, remeasured));
        }
    }
    out
}

/// Supports fitted per parallel batch before merging.
const SUPPORT_BATCH: usize = 256;

/// Support-enumeration decoder: searches all vectors with at most `s_max`
/// nonzero entries whose phaseless measurement matches `y` within `tol`.
///
/// Hypotheses are merged in support order (size, then lexicographic) and
/// pattern order, so the result does not depend on the execution mode.
pub fn sparse_decode(
    mat: &MeasurementMatrix,
    obs: &PhaselessObservation,
    s_max: usize,
    tol: f64,
    opts: &SparseDecodeOptions,
) -> Result<Decoded> {
    check_shapes(mat, obs)?;
    let (m, n) = (mat.rows(), mat.cols());
    if s_max > n {
        return Err(Error::InvalidParameter(format!("support budget {s_max} exceeds length {n}")));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be non-negative, got {tol}")));
    }
    let y = &obs.y;
    let y_norm = obs.norm();
    if y_norm <= tol {
        return Ok(Decoded {
            result: DecodeResult::Success {
                x_hat: canonicalize(&vec![0.0; n], tol),
            },
            residual: Some(y_norm),
            classes_found: 1,
        });
    }
    let work = sparse_work(n, m, s_max);
    if work > opts.work_cap || (m > 63 && s_max > 0) {
        return Err(Error::BudgetExceeded {
            required: work,
            cap: opts.work_cap,
        });
    }

    let mut classes = ClassSet::new(tol * y_norm.max(1.0), opts.class_limit.max(2));
    let mut best_rejected: Option<f64> = None;
    let mut iter = supports(n, s_max).peekable();
    'outer: while iter.peek().is_some() {
        let batch: Vec<Vec<usize>> = iter.by_ref().take(SUPPORT_BATCH).collect();
        let fits = par::map_slice(opts.exec, &batch, |s| fit_support(mat, y, s, tol));
        for fit in fits {
            if let Some(r) = fit.best_residual {
                best_rejected = Some(best_rejected.map_or(r, |b| b.min(r)));
            }
            for (u, residual) in fit.accepted {
                if !classes.offer(canonicalize(&u, tol), residual) {
                    break 'outer;
                }
            }
        }
    }
    Ok(classes.finish(best_rejected))
}
