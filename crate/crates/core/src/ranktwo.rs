//! Rank-two indefinite matrices `C = uuᵀ − vvᵀ`.
//!
//! For linearly independent `u, v` the Gram–Schmidt step `a = u`,
//! `b = v − (uᵀv/‖u‖²)u` gives `(u, v) = W R` with `W = (a/‖a‖, b/‖b‖)` and
//! `R` upper triangular, hence `C = W R J Rᵀ Wᵀ` with `J = diag(1, −1)`.
//! The spectrum of the 2×2 core `R J Rᵀ` has closed forms in `u` and `v`.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};

/// Relative Gram-determinant cutoff below which `u, v` count as dependent.
pub const TAU_INDEP: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Checks lengths and the relative Gram determinant, returning
/// `(‖u‖², ‖v‖², uᵀv)`.
pub(crate) fn check_independent(u: &[f64], v: &[f64]) -> Result<(f64, f64, f64)> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::InvalidDimension);
    }
    let uu = norm_sq(u);
    let vv = norm_sq(v);
    let uv = dot(u, v);
    let scale = uu * vv;
    let gram = scale - uv * uv;
    if !(scale > 0.0) || !(gram > TAU_INDEP * scale) {
        let rel = if scale > 0.0 { gram / scale } else { 0.0 };
        return Err(Error::DependentVectors(rel));
    }
    Ok((uu, vv, uv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTwoDecomposition {
    /// `n × 2`, orthonormal columns.
    pub w: DMatrix<f64>,
    /// Upper triangular with positive diagonal.
    pub r_factor: Matrix2<f64>,
    /// Always `diag(1, −1)`.
    pub j: Matrix2<f64>,
}

impl RankTwoDecomposition {
    /// The 2×2 core `R J Rᵀ`.
    pub fn core(&self) -> Matrix2<f64> {
        self.r_factor * self.j * self.r_factor.transpose()
    }

    /// `W R J Rᵀ Wᵀ`, which equals `uuᵀ − vvᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let core = self.core();
        let core = DMatrix::from_column_slice(2, 2, core.as_slice());
        &self.w * core * self.w.transpose()
    }

    /// Max-abs entry of `WᵀW − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.w.transpose() * &self.w;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for k in 0..2 {
                let target = if i == k { 1.0 } else { 0.0 };
                err = err.max((gram[(i, k)] - target).abs());
            }
        }
        err
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTwoSpectrum {
    pub det: f64,
    pub trace: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

pub fn decompose(u: &[f64], v: &[f64]) -> Result<RankTwoDecomposition> {
    let (uu, _, uv) = check_independent(u, v)?;
    let n = u.len();
    let u_norm = uu.sqrt();
    let coef = uv / uu;
    let b: Vec<f64> = v.iter().zip(u).map(|(vi, ui)| vi - coef * ui).collect();
    let b_norm = norm_sq(&b).sqrt();

    let mut w = DMatrix::zeros(n, 2);
    for i in 0..n {
        w[(i, 0)] = u[i] / u_norm;
        w[(i, 1)] = b[i] / b_norm;
    }
    let r_factor = Matrix2::new(u_norm, uv / u_norm, 0.0, b_norm);
    Ok(RankTwoDecomposition {
        w,
        r_factor,
        j: Matrix2::new(1.0, 0.0, 0.0, -1.0),
    })
}

/// Determinant, trace and singular values of `R J Rᵀ`, computed from `u` and
/// `v` directly.
pub fn spectrum(u: &[f64], v: &[f64]) -> Result<RankTwoSpectrum> {
    let (uu, vv, uv) = check_independent(u, v)?;
    let det = uv * uv - uu * vv;
    let trace = uu - vv;
    let plus: f64 = u.iter().zip(v).map(|(a, b)| (a + b) * (a + b)).sum();
    let minus: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    let half_root = 0.5 * (plus * minus).sqrt();
    let half_trace = 0.5 * trace.abs();
    Ok(RankTwoSpectrum {
        det,
        trace,
        sigma1: half_root + half_trace,
        sigma2: half_root - half_trace,
    })
}

/// Eigenvalues of a symmetric 2×2 matrix, larger first.
pub fn symmetric_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let big = if mean >= 0.0 { mean + rad } else { mean - rad };
    let det = a * c - b * b;
    let small = if big != 0.0 { det / big } else { 0.0 };
    if big >= small {
        (big, small)
    } else {
        (small, big)
    }
}

/// Closed-form spectrum against the eigenvalues of the explicit core, plus the
/// factorization residuals. Used by the `ranktwo-verify` experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTwoCheck {
    pub formula: RankTwoSpectrum,
    pub eigen: RankTwoSpectrum,
    pub reconstruction_error: f64,
    pub orthonormality_error: f64,
    /// `‖u‖² + ‖v‖²`
    pub scale: f64,
}

impl RankTwoCheck {
    pub fn relative_errors(&self) -> [f64; 3] {
        let rel = |a: f64, b: f64| {
            let denom = a.abs().max(b.abs());
            if denom == 0.0 {
                0.0
            } else {
                (a - b).abs() / denom
            }
        };
        [
            rel(self.formula.det, self.eigen.det),
            // trace can legitimately be near zero; measure it against the scale
            (self.formula.trace - self.eigen.trace).abs() / self.scale,
            rel(self.formula.sigma2, self.eigen.sigma2),
        ]
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        self.relative_errors().iter().all(|e| *e <= rel_tol)
            && self.reconstruction_error <= rel_tol * self.scale
            && self.orthonormality_error <= rel_tol
    }
}

pub fn check_pair(u: &[f64], v: &[f64]) -> Result<RankTwoCheck> {
    let dec = decompose(u, v)?;
    let formula = spectrum(u, v)?;
    let (l1, l2) = symmetric_eigenvalues(&dec.core());
    let eigen = RankTwoSpectrum {
        det: l1 * l2,
        trace: l1 + l2,
        sigma1: l1.abs().max(l2.abs()),
        sigma2: l1.abs().min(l2.abs()),
    };
    let n = u.len();
    let recon = dec.reconstruct();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let c = u[i] * u[k] - v[i] * v[k];
            err = err.max((c - recon[(i, k)]).abs());
        }
    }
    Ok(RankTwoCheck {
        formula,
        eigen,
        reconstruction_error: err,
        orthonormality_error: dec.orthonormality_error(),
        scale: norm_sq(u) + norm_sq(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn orthonormal_inputs() {
        let dec = decompose(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(dec.w, DMatrix::identity(2, 2));
        assert_eq!(dec.r_factor, Matrix2::identity());
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(max_abs_diff(&dec.reconstruct(), &expected) < 1e-15);

        let s = spectrum(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((s.det, s.trace, s.sigma2), (-1.0, 0.0, 1.0));
    }

    #[test]
    fn orthogonal_inputs() {
        let dec = decompose(&[2.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(dec.r_factor, Matrix2::new(2.0, 0.0, 0.0, 1.0));
        let expected = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, -1.0]);
        assert!(max_abs_diff(&dec.reconstruct(), &expected) < 1e-15);

        let s = spectrum(&[2.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(s.det, -4.0);
        assert_eq!(s.trace, 3.0);
        assert!((s.sigma2 - 1.0).abs() < 1e-15);
        assert!((s.sigma1 - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dependent_vectors_rejected() {
        assert!(matches!(
            decompose(&[1.0, 2.0], &[2.0, 4.0]),
            Err(Error::DependentVectors(_))
        ));
        assert!(matches!(
            spectrum(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::DependentVectors(_))
        ));
        assert!(matches!(
            decompose(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        // one-dimensional vectors are always dependent
        assert!(decompose(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn r_factor_shape() {
        let u = [0.3, -1.2, 0.5];
        let v = [1.0, 0.4, -0.7];
        let dec = decompose(&u, &v).unwrap();
        assert_eq!(dec.r_factor[(1, 0)], 0.0);
        assert!((dec.r_factor[(0, 0)] - norm_sq(&u).sqrt()).abs() < 1e-15);
        assert!(dec.orthonormality_error() < 1e-12);
    }

    #[test]
    fn sym_eigen_diagonal() {
        assert_eq!(symmetric_eigenvalues(&Matrix2::new(4.0, 0.0, 0.0, -1.0)), (4.0, -1.0));
        assert_eq!(symmetric_eigenvalues(&Matrix2::new(-1.0, 0.0, 0.0, 4.0)), (4.0, -1.0));
    }
}
