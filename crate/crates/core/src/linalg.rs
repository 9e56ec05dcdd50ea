//! Dense complex linear-algebra helpers shared by the model, estimator and
//! optimizer.
//!
//! Hermitian matrices are mapped to real vectors through an orthonormal basis
//! of the real vector space of `n x n` Hermitian matrices (diagonal entries,
//! then `sqrt(2)`-scaled real and imaginary parts of the strict upper
//! triangle). With that basis the trace inner product `tr(A B)` becomes the
//! Euclidean dot product, which is what the SDP solver works with.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C0 {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Column-major vectorization.
pub fn vec_cols(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_cols`].
pub fn devec_cols(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols);
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `Re tr(a^† b)`; equals `tr(a b)` for Hermitian `a`.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Dimension of the real vector space of `n x n` Hermitian matrices.
pub fn herm_dim(n: usize) -> usize {
    n * n
}

/// Coordinates of a Hermitian matrix in the orthonormal trace basis.
pub fn herm_to_real(m: &CMat) -> DVector<f64> {
    let n = m.nrows();
    let mut out = DVector::zeros(n * n);
    herm_to_real_into(m, out.as_mut_slice());
    out
}

pub fn herm_to_real_into(m: &CMat, out: &mut [f64]) {
    let n = m.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut idx = 0;
    for i in 0..n {
        out[idx] = m[(i, i)].re;
        idx += 1;
    }
    for j in 0..n {
        for i in 0..j {
            let z = m[(i, j)];
            out[idx] = s2 * z.re;
            out[idx + 1] = s2 * z.im;
            idx += 2;
        }
    }
}

/// Inverse of [`herm_to_real`].
pub fn real_to_herm(v: &[f64], n: usize) -> CMat {
    assert_eq!(v.len(), n * n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        m[(i, i)] = Complex64::new(v[idx], 0.0);
        idx += 1;
    }
    for j in 0..n {
        for i in 0..j {
            let z = Complex64::new(s * v[idx], s * v[idx + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            idx += 2;
        }
    }
    m
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub struct HermEigen {
    pub values: Vec<f64>,
    /// Columns are unit eigenvectors matching `values`.
    pub vectors: CMat,
}

pub fn herm_eigen(m: &CMat) -> HermEigen {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermEigen { values, vectors }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `2`-norm condition number of a Hermitian positive definite matrix.
pub fn herm_condition(m: &CMat) -> f64 {
    let ev = hermitize(m).symmetric_eigenvalues();
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn col_norm_sqr(m: &CMat, j: usize) -> f64 {
    m.column(j).iter().map(|z| z.norm_sqr()).sum()
}

pub fn frob_sqr(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `a^T b` for complex column vectors (no conjugation).
pub fn dot_t<'a>(
    a: impl IntoIterator<Item = &'a Complex64>,
    b: impl IntoIterator<Item = &'a Complex64>,
) -> Complex64 {
    a.into_iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a^† b`.
pub fn dot_h<'a>(
    a: impl IntoIterator<Item = &'a Complex64>,
    b: impl IntoIterator<Item = &'a Complex64>,
) -> Complex64 {
    a.into_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
