//! Small dense complex-matrix helpers shared by the physics modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub(crate) fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// `[a, b] = ab - ba`
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise `|m_ij - conj(m_ji)|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_dim(m: &CMatrix, expected: usize) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = ensure_square(m)?;
    let eig = SymmetricEigen::try_new(hermitian_part(m), f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigh(m).map(|(values, _)| values)
}

/// Factor `W` with `m = W W†`, keeping only eigenvalues above a relative
/// round-off floor. Columns are `sqrt(e_k) v_k`.
pub fn psd_factor(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigh(m)?;
    let n = values.len();
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let floor = (n as f64) * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > floor).collect();
    Ok(CMatrix::from_fn(n, kept.len(), |i, j| {
        vectors[(i, kept[j])] * values[kept[j]].sqrt()
    }))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_of_paulis() {
        let x = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
        let y = CMatrix::from_row_slice(2, 2, &[real(0.0), -I, I, real(0.0)]);
        let z = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)]);
        let xy = commutator(&x, &y);
        assert!(max_abs_diff(&xy, &(z * c(0.0, 2.0))) < 1e-15);
    }

    #[test]
    fn eigh_sorted_and_factor_reproduces() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                real(2.0),
                c(0.5, 0.5),
                real(0.0),
                c(0.5, -0.5),
                real(1.0),
                c(0.0, 0.2),
                real(0.0),
                c(0.0, -0.2),
                real(0.5),
            ],
        );
        let (vals, _) = hermitian_eigh(&m).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let w = psd_factor(&m).unwrap();
        assert!(max_abs_diff(&(&w * w.adjoint()), &m) < 1e-14);
    }

    #[test]
    fn factor_drops_null_space() {
        let mut m = zeros(4);
        m[(1, 1)] = real(0.5);
        m[(2, 2)] = real(0.5);
        m[(1, 2)] = real(0.5);
        m[(2, 1)] = real(0.5);
        let w = psd_factor(&m).unwrap();
        assert_eq!(w.ncols(), 1);
    }

    #[test]
    fn non_square_rejected() {
        let m = CMatrix::zeros(2, 3);
        assert_eq!(ensure_square(&m), Err(Error::NotSquare { rows: 2, cols: 3 }));
    }
}
