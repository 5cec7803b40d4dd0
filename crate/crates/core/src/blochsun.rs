//! Bipartite Bloch decomposition over generalized Gell-Mann bases.
//!
//! A state on `C^n ⊗ C^m` is written as
//! `(1/nm) (1 + Σ α_i σ_i⊗1 + Σ β_j 1⊗τ_j + Σ γ_ij σ_i⊗τ_j)`
//! with generators normalized to `Tr(σ_i σ_j) = 2 δ_ij`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, kron, real, CMatrix};
use crate::qstate::DensityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<CMatrix>,
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Symmetric pairs, antisymmetric pairs, then the diagonal ladder.
/// For `n = 2` this is `(σx, σy, σz)` with `σz = diag(1, -1)`.
pub fn gell_mann_basis(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(Error::DomainError(format!("SU(n) basis needs n >= 2, got {n}")));
    }
    let mut generators = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut s = CMatrix::zeros(n, n);
            s[(j, k)] = real(1.0);
            s[(k, j)] = real(1.0);
            generators.push(s);
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut a = CMatrix::zeros(n, n);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            generators.push(a);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(n, n);
        for i in 0..l {
            d[(i, i)] = real(norm);
        }
        d[(l, l)] = real(-(l as f64) * norm);
        generators.push(d);
    }
    Ok(GeneratorBasis { dim: n, generators })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochDecomposition {
    pub n: usize,
    pub m: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: DMatrix<f64>,
}

impl BlochDecomposition {
    pub fn zeros(n: usize, m: usize) -> Self {
        BlochDecomposition {
            n,
            m,
            alpha: vec![0.0; n * n - 1],
            beta: vec![0.0; m * m - 1],
            gamma: DMatrix::zeros(n * n - 1, m * m - 1),
        }
    }

    /// Number of real coefficients, `(n^2 - 1) + (m^2 - 1) + (n^2 - 1)(m^2 - 1)`.
    pub fn len(&self) -> usize {
        self.alpha.len() + self.beta.len() + self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_shape(&self) -> Result<()> {
        let (na, nb) = (self.n * self.n - 1, self.m * self.m - 1);
        if self.alpha.len() != na || self.beta.len() != nb || self.gamma.shape() != (na, nb) {
            return Err(Error::ShapeMismatch(format!(
                "coefficients for n={}, m={} have lengths {}, {}, {:?}",
                self.n,
                self.m,
                self.alpha.len(),
                self.beta.len(),
                self.gamma.shape()
            )));
        }
        Ok(())
    }

    fn get_mut(&mut self, k: usize) -> &mut f64 {
        let (na, nb) = (self.alpha.len(), self.beta.len());
        if k < na {
            &mut self.alpha[k]
        } else if k < na + nb {
            &mut self.beta[k - na]
        } else {
            let r = k - na - nb;
            // row-major over (i, j)
            let cols = self.gamma.ncols();
            &mut self.gamma[(r / cols, r % cols)]
        }
    }
}

/// Time derivatives of the Bloch coefficients.
pub type CoefficientRates = BlochDecomposition;
/// Partial derivatives of a measure with respect to the Bloch coefficients.
pub type BlochGradient = BlochDecomposition;

fn bases(n: usize, m: usize) -> Result<(GeneratorBasis, GeneratorBasis)> {
    Ok((gell_mann_basis(n)?, gell_mann_basis(m)?))
}

fn project(mat: &CMatrix, n: usize, m: usize) -> Result<BlochDecomposition> {
    if n < 2 || m < 2 {
        return Err(Error::DomainError(format!("subsystem dimensions must be >= 2, got {n} and {m}")));
    }
    crate::linalg::ensure_dim(mat, n * m)?;
    let (sa, sb) = bases(n, m)?;
    let (ia, ib) = (identity(n), identity(m));
    let overlap = |op: &CMatrix| (mat * op).trace().re;
    let (nf, mf) = (n as f64, m as f64);
    let alpha = sa.generators.iter().map(|s| 0.5 * nf * overlap(&kron(s, &ib))).collect();
    let beta = sb.generators.iter().map(|t| 0.5 * mf * overlap(&kron(&ia, t))).collect();
    let gamma = DMatrix::from_fn(sa.len(), sb.len(), |i, j| {
        0.25 * nf * mf * overlap(&kron(&sa.generators[i], &sb.generators[j]))
    });
    Ok(BlochDecomposition { n, m, alpha, beta, gamma })
}

pub fn decompose(rho: &DensityMatrix, n: usize, m: usize) -> Result<BlochDecomposition> {
    project(rho.elements(), n, m)
}

/// Coefficient rates by full-space traces of `rho_dot` against
/// `σ_i⊗1`, `1⊗τ_j` and `σ_i⊗τ_j`, normalized as in [`decompose`].
pub fn coefficient_rates(rho_dot: &CMatrix, n: usize, m: usize) -> Result<CoefficientRates> {
    project(rho_dot, n, m)
}

fn recompose_matrix(d: &BlochDecomposition) -> Result<CMatrix> {
    d.check_shape()?;
    let (n, m) = (d.n, d.m);
    let (sa, sb) = bases(n, m)?;
    let (ia, ib) = (identity(n), identity(m));
    let mut out = identity(n * m);
    for (s, &a) in sa.generators.iter().zip(&d.alpha) {
        if a != 0.0 {
            out += kron(s, &ib).scale(a);
        }
    }
    for (t, &b) in sb.generators.iter().zip(&d.beta) {
        if b != 0.0 {
            out += kron(&ia, t).scale(b);
        }
    }
    for (i, s) in sa.generators.iter().enumerate() {
        for (j, t) in sb.generators.iter().enumerate() {
            let g = d.gamma[(i, j)];
            if g != 0.0 {
                out += kron(s, t).scale(g);
            }
        }
    }
    Ok(out.unscale((n * m) as f64))
}

/// Rebuilds the state; coefficient sets outside the state space give `NotPositive`.
pub fn recompose(d: &BlochDecomposition) -> Result<DensityMatrix> {
    DensityMatrix::new(recompose_matrix(d)?)
}

pub fn rate_bloch(grad: &BlochGradient, rates: &CoefficientRates) -> Result<f64> {
    grad.check_shape()?;
    rates.check_shape()?;
    if (grad.n, grad.m) != (rates.n, rates.m) {
        return Err(Error::ShapeMismatch(format!(
            "gradient is for ({}, {}), rates for ({}, {})",
            grad.n, grad.m, rates.n, rates.m
        )));
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    Ok(dot(&grad.alpha, &rates.alpha) + dot(&grad.beta, &rates.beta) + grad.gamma.dot(&rates.gamma))
}

/// Central-difference gradient of `measure` over the Bloch coefficients of `d`.
/// Perturbed states are passed unchecked, so the measure must tolerate tiny
/// negative eigenvalues.
pub fn bloch_gradient<F>(d: &BlochDecomposition, step: f64, measure: F) -> Result<BlochGradient>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    d.check_shape()?;
    let mut grad = BlochDecomposition::zeros(d.n, d.m);
    let mut probe = d.clone();
    for k in 0..d.len() {
        let base = *probe.get_mut(k);
        *probe.get_mut(k) = base + step;
        let up = measure(&DensityMatrix::new_unchecked(recompose_matrix(&probe)?))?;
        *probe.get_mut(k) = base - step;
        let down = measure(&DensityMatrix::new_unchecked(recompose_matrix(&probe)?))?;
        *probe.get_mut(k) = base;
        *grad.get_mut(k) = (up - down) / (2.0 * step);
    }
    Ok(grad)
}
