//! Wootters concurrence, entanglement of formation, and the gradient of
//! the latter with respect to the independent matrix elements.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, I};
use crate::qstate::{DensityMatrix, WernerParams};

/// Step of the central differences in [`eof_gradient`].
pub const GRADIENT_STEP: f64 = 1e-6;
/// Concurrence below which the gradient is refused.
pub const KINK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceResult {
    pub c: f64,
    /// Square roots of the eigenvalues of `rho * rho_tilde`, decreasing.
    pub lambdas: [f64; 4],
}

/// Partial derivatives of a measure with respect to `Re rho_ij` and
/// `Im rho_ij` for `j >= i` (zero-based). Lower-triangle entries and the
/// imaginary diagonal are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureGradient {
    pub de_dre: DMatrix<f64>,
    pub de_dim: DMatrix<f64>,
}

impl MeasureGradient {
    /// Directional derivative along a Hermitian direction `v`.
    pub fn contract(&self, v: &CMatrix) -> f64 {
        let n = self.de_dre.nrows();
        let mut total = 0.0;
        for i in 0..n {
            for j in i..n {
                total += self.de_dre[(i, j)] * v[(i, j)].re + self.de_dim[(i, j)] * v[(i, j)].im;
            }
        }
        total
    }
}

/// `sigma_y ⊗ sigma_y` in the computational basis.
fn sigma_yy() -> CMatrix {
    let mut s = linalg::zeros(4);
    s[(0, 3)] = real(-1.0);
    s[(3, 0)] = real(-1.0);
    s[(1, 2)] = real(1.0);
    s[(2, 1)] = real(1.0);
    s
}

fn spin_flip_matrix(m: &CMatrix) -> CMatrix {
    let s = sigma_yy();
    &s * m.conjugate() * &s
}

/// `rho_tilde = (sigma_y ⊗ sigma_y) rho* (sigma_y ⊗ sigma_y)`
pub fn spin_flip(rho: &DensityMatrix) -> Result<CMatrix> {
    linalg::ensure_dim(rho.elements(), 4)?;
    Ok(spin_flip_matrix(rho.elements()))
}

pub(crate) fn concurrence_of(m: &CMatrix) -> Result<ConcurrenceResult> {
    linalg::ensure_dim(m, 4)?;
    // With rho = W W†, the spectrum of rho*rho_tilde is that of B B† with
    // B = W† S W*, so the lambdas are the singular values of B.
    let w = linalg::psd_factor(m)?;
    let b = w.adjoint() * sigma_yy() * w.conjugate();
    let mut lambdas = [0.0; 4];
    if b.ncols() > 0 {
        let sv = b.singular_values();
        for (slot, v) in lambdas.iter_mut().zip(sv.iter()) {
            *slot = *v;
        }
    }
    lambdas.sort_by(|x, y| y.total_cmp(x));
    let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0);
    Ok(ConcurrenceResult { c, lambdas })
}

/// Unclamped `lambda_1 - lambda_2 - lambda_3 - lambda_4`; smooth through
/// `c = 1`, used by the finite-difference gradient.
fn concurrence_raw(m: &CMatrix) -> Result<f64> {
    let r = concurrence_of(m)?;
    let l = r.lambdas;
    Ok(l[0] - l[1] - l[2] - l[3])
}

pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    concurrence_of(rho.elements())
}

/// `h(x) = -x log2 x - (1-x) log2(1-x)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Entanglement of formation as a function of concurrence, for `c` in `[0, 1]`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    eof_extended(c.clamp(0.0, 1.0))
}

/// `E(c) = h((1 + sqrt(1 - c^2)) / 2)` continued analytically in `v = 1 - c^2`
/// so that it stays smooth for `c` slightly above one.
fn eof_extended(c: f64) -> f64 {
    let v = 1.0 - c * c;
    if v.abs() < 0.05 {
        // h(1/2 + u/2) = 1 - (1/ln 2) sum_k u^(2k) / (2k (2k-1)), u^2 = v
        let mut sum = 0.0;
        let mut pow = v;
        for k in 1..=12 {
            let kk = 2.0 * k as f64;
            sum += pow / (kk * (kk - 1.0));
            pow *= v;
        }
        return 1.0 - sum / LN_2;
    }
    let x = (1.0 + v.max(0.0).sqrt()) / 2.0;
    binary_entropy(x).unwrap_or(0.0)
}

pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?.c))
}

fn eof_probe(m: &CMatrix) -> Result<f64> {
    Ok(eof_extended(concurrence_raw(m)?.max(0.0)))
}

/// Central-difference gradient of the entanglement of formation.
///
/// Each independent element is perturbed on its own (the Hermitian partner
/// moves with it); trace and positivity are not re-imposed.
pub fn eof_gradient(rho: &DensityMatrix) -> Result<MeasureGradient> {
    linalg::ensure_dim(rho.elements(), 4)?;
    let c = concurrence(rho)?.c;
    if c <= KINK_TOL {
        return Err(Error::KinkRegion { concurrence: c });
    }
    let h = GRADIENT_STEP;
    let base = rho.elements();
    let mut de_dre = DMatrix::zeros(4, 4);
    let mut de_dim = DMatrix::zeros(4, 4);
    let probe = |i: usize, j: usize, dz: num_complex::Complex64| -> Result<f64> {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[(i, j)] += dz;
        minus[(i, j)] -= dz;
        if i != j {
            plus[(j, i)] += dz.conj();
            minus[(j, i)] -= dz.conj();
        }
        Ok((eof_probe(&plus)? - eof_probe(&minus)?) / (2.0 * h))
    };
    for i in 0..4 {
        for j in i..4 {
            de_dre[(i, j)] = probe(i, j, real(h))?;
            if i != j {
                de_dim[(i, j)] = probe(i, j, I * h)?;
            }
        }
    }
    Ok(MeasureGradient { de_dre, de_dim })
}

/// `max(0, 2 w_max - 1)`: the largest Bell weight plays the role of `a`.
pub fn concurrence_werner(w: &WernerParams) -> f64 {
    (2.0 * w.dominant().1 - 1.0).max(0.0)
}
