//! Dense complex linear algebra: thin wrappers around faer plus the power
//! iteration used for operator norms. All public types speak
//! `ndarray::Array2<Complex64>` (row-major); faer views wrap them without
//! copying.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, MatRef};
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("linear system is singular or produced non-finite values")]
    SingularSystem,
    #[error("SVD failed to converge")]
    SvdFailed,
}

/// Zero-copy faer view of a row-major ndarray matrix.
pub fn as_faer(a: &Array2<Complex64>) -> MatRef<'_, c64> {
    let (rows, cols) = a.dim();
    let slice = a
        .as_slice()
        .expect("matrix must be contiguous row-major");
    MatRef::from_row_major_slice(slice, rows, cols)
}

fn to_ndarray(m: MatRef<'_, c64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// C = A B.
pub fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let c = as_faer(a) * as_faer(b);
    to_ndarray(c.as_ref())
}

/// C = A^H B.
pub fn matmul_adjoint_left(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    assert_eq!(a.nrows(), b.nrows(), "adjoint matmul shape mismatch");
    let c = as_faer(a).adjoint() * as_faer(b);
    to_ndarray(c.as_ref())
}

/// C = A^T B (plain transpose, no conjugation).
pub fn matmul_transpose_left(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    assert_eq!(a.nrows(), b.nrows(), "transpose matmul shape mismatch");
    let c = as_faer(a).transpose() * as_faer(b);
    to_ndarray(c.as_ref())
}

/// LU factorization with partial pivoting, reusable across right-hand sides.
pub struct LuFactor {
    lu: PartialPivLu<c64>,
}

impl LuFactor {
    pub fn new(a: &Array2<Complex64>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "LU requires a square matrix");
        LuFactor {
            lu: PartialPivLu::new(as_faer(a)),
        }
    }

    /// Solve A X = B for all columns of B at once.
    pub fn solve(&self, b: &Array2<Complex64>) -> Result<Array2<Complex64>, LinalgError> {
        let x = self.lu.solve(as_faer(b));
        let out = to_ndarray(x.as_ref());
        if out.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(out)
        } else {
            Err(LinalgError::SingularSystem)
        }
    }
}

/// Thin singular value decomposition A = U diag(s) V^H.
pub struct ThinSvd {
    /// m x k, k = min(m, n).
    pub u: Array2<Complex64>,
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// n x k (columns are right singular vectors).
    pub v: Array2<Complex64>,
}

pub fn thin_svd(a: &Array2<Complex64>) -> Result<ThinSvd, LinalgError> {
    let svd = as_faer(a).thin_svd().map_err(|_| LinalgError::SvdFailed)?;
    let s_diag = svd.S();
    let k = s_diag.dim();
    let s: Vec<f64> = (0..k).map(|i| s_diag[i].re).collect();
    Ok(ThinSvd {
        u: to_ndarray(svd.U()),
        s,
        v: to_ndarray(svd.V()),
    })
}

/// Largest singular value by power iteration on A^H A. Deterministic
/// (fixed pseudo-random start); falls back to a full SVD if the Rayleigh
/// estimate has not stabilized within the iteration cap.
pub fn spectral_norm(a: &Array2<Complex64>) -> f64 {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let af = as_faer(a);
    // fixed LCG start vector: reproducible without threading a RNG through
    let mut state = 0x243F_6A88_85A3_08D3u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v = Mat::<c64>::from_fn(n, 1, |_, _| c64::new(next(), next()));
    let mut sigma_prev = 0.0f64;
    let mut stable = 0;
    for _ in 0..20_000 {
        let u = &af * &v;
        let w = af.adjoint() * &u;
        let unorm = u.norm_l2();
        let wnorm = w.norm_l2();
        if wnorm == 0.0 {
            return 0.0;
        }
        let vnorm = v.norm_l2();
        let sigma = unorm / vnorm;
        // renormalize to avoid overflow
        v = &w * faer::Scale(c64::new(1.0 / wnorm, 0.0));
        if (sigma - sigma_prev).abs() <= 1e-10 * sigma.max(1e-300) {
            stable += 1;
            if stable >= 3 {
                return sigma;
            }
        } else {
            stable = 0;
        }
        sigma_prev = sigma;
    }
    // slow spectral gap: hand over to the dense SVD
    match thin_svd(a) {
        Ok(svd) => svd.s.first().copied().unwrap_or(0.0),
        Err(_) => sigma_prev,
    }
}

/// Frobenius norm.
pub fn fro_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of a complex slice.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product <a, b> = sum conj(a_i) b_i.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
