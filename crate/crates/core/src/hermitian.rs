//! Dense complex linear algebra shared by every other module.
//!
//! All matrices in this crate are small (at most 16 x 16 after the real
//! embedding), so everything is dense and favours accuracy over speed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix (column vectors are `n x 1`).
pub type ComplexMatrix = DMatrix<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Default relative tolerance for rank and null-space decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

/// Square complex matrix with exact Hermitian symmetry.
///
/// The full matrix is stored, but construction mirrors the upper triangle
/// into the lower one and zeroes the diagonal imaginary parts, so
/// `M == M^H` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validates `m` (square, finite, Hermitian within
    /// `1e-12 * (1 + max|m|)`) and symmetrizes it exactly.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!("not square: {}x{}", m.nrows(), m.ncols())));
        }
        check_finite(&m)?;
        let scale = 1.0 + max_abs(&m);
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::InvalidMatrix(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(M + M^H) / 2`, with no symmetry check. Panics if `m` is not square.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "hermitian_part of non-square matrix");
        let n = m.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self { m: out }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: ComplexMatrix::identity(n, n),
        }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let mut m = ComplexMatrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { m }
    }

    /// `v v^H` for a column vector `v`.
    pub fn outer(v: &ComplexMatrix) -> Self {
        assert_eq!(v.ncols(), 1, "outer product expects a column vector");
        Self::hermitian_part(&(v * v.adjoint()))
    }

    /// `A^H M A`, Hermitian for any `A` with matching rows.
    pub fn congruence(&self, a: &ComplexMatrix) -> Self {
        Self::hermitian_part(&(a.adjoint() * &self.m * a))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: self.m.map(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::hermitian_part(&(&self.m + &other.m))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::hermitian_part(&(&self.m - &other.m))
    }

    /// Real part of `v^H M v`.
    pub fn quad_form(&self, v: &ComplexMatrix) -> f64 {
        (v.adjoint() * &self.m * v)[(0, 0)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigenvalues(self).first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        eigenvalues(self).last().copied().unwrap_or(0.0)
    }
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix("non-finite entry".into()))
    }
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in ascending order; the columns of the second
/// element are the matching orthonormal eigenvectors.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_finite(h.as_matrix())?;
    let n = h.dim();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::new(h.as_matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Ascending eigenvalues only.
pub fn eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    if h.dim() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(h.as_matrix().clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Orthonormal basis of the numerical null space of `h`.
///
/// Keeps the eigenvectors whose eigenvalue magnitude is at most
/// `tol * |h|_F`. A full-rank matrix yields an `n x 0` matrix.
pub fn null_space_basis(h: &HermitianMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !(tol > 0.0) {
        return Err(Error::InvalidMatrix(format!("tolerance must be positive, got {tol}")));
    }
    let (values, vectors) = eig_hermitian(h)?;
    let cutoff = tol * h.frobenius();
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i].abs() <= cutoff).collect();
    Ok(select_columns(&vectors, &keep))
}

/// Null space of `Σ v_i v_i^H` for the given column vectors, i.e. the
/// orthogonal complement of their span.
pub fn orthogonal_complement(vectors: &[ComplexMatrix], n: usize, tol: f64) -> Result<ComplexMatrix> {
    let mut gram = ComplexMatrix::zeros(n, n);
    for v in vectors {
        if v.nrows() != n || v.ncols() != 1 {
            return Err(Error::DimError(format!(
                "expected {n}x1 vector, got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
        gram += v * v.adjoint();
    }
    null_space_basis(&HermitianMatrix::hermitian_part(&gram), tol)
}

pub(crate) fn select_columns(m: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// `Re Tr(A B)` for Hermitian `A`, `B`.
///
/// Evaluated as `Σ Re(a_ij conj(b_ij))`, which is exactly symmetric in its
/// arguments.
pub fn trace_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimError(format!(
            "trace_inner of {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    Ok(a.as_matrix()
        .iter()
        .zip(b.as_matrix().iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum())
}

/// Maps `H = A + iB` to the real symmetric `[[A, -B], [B, A]]`.
pub fn real_embedding(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let m = h.as_matrix();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`real_embedding`]: averages the two real copies of each
/// part and re-Hermitianizes. Panics if the input has odd dimension.
pub fn from_real_embedding(r: &DMatrix<f64>) -> HermitianMatrix {
    assert!(r.nrows().is_multiple_of(2) && r.nrows() == r.ncols());
    let n = r.nrows() / 2;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (r[(i, j)] + r[(i + n, j + n)]);
            let im = 0.5 * (r[(i + n, j)] - r[(i, j + n)]);
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    HermitianMatrix::hermitian_part(&m)
}

/// Euclidean norm of a complex column vector.
pub fn vec_norm(v: &ComplexMatrix) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Builds a complex column vector from its entries.
pub fn column(entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(entries.len(), 1, entries)
}

/// `M^{-1/2}` of a positive definite Hermitian matrix.
pub fn inv_sqrt(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (values, vectors) = eig_hermitian(h)?;
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::NumericalError(
            "inv_sqrt of a matrix that is not positive definite".into(),
        ));
    }
    let d = DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(1.0 / v.sqrt(), 0.0)),
    );
    let scaled = &vectors * ComplexMatrix::from_diagonal(&d);
    Ok(HermitianMatrix::hermitian_part(&(scaled * vectors.adjoint())))
}

/// Determinant of a Hermitian matrix (real by symmetry).
pub fn det_hermitian(h: &HermitianMatrix) -> f64 {
    eigenvalues(h).iter().product()
}
