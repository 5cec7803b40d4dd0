//! Density matrices and the two parametric two-qubit families.
//!
//! Two-qubit matrices use the computational ordering
//! `|00>, |01>, |10>, |11>` (indices 0..4). Bell states are
//! `|psi±> = (|01> ± |10>)/√2` and `|phi±> = (|00> ± |11>)/√2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    pub fn new(elements: CMatrix) -> Result<Self> {
        linalg::ensure_square(&elements)?;
        let defect = linalg::hermiticity_defect(&elements);
        if defect > HERMITICITY_TOL {
            return Err(Error::NonHermitian { defect });
        }
        let defect = (linalg::trace(&elements) - real(1.0)).norm();
        if defect > TRACE_TOL {
            return Err(Error::TraceNotOne { defect });
        }
        let min_eigenvalue = linalg::hermitian_eigenvalues(&elements)?[0];
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { elements })
    }

    /// Wraps a matrix without validation. Used for integrator stages and
    /// finite-difference probes, which need not be physical states.
    pub fn new_unchecked(elements: CMatrix) -> Self {
        Self { elements }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            elements: linalg::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalized) amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::DomainError("zero or non-finite state vector".into()));
        }
        let n = amplitudes.len();
        let m = CMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj() / norm2);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_inner(self) -> CMatrix {
        self.elements
    }

    /// Zero-based element `<i|rho|j>`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.elements[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.elements)
    }

    /// `Tr rho^2`
    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.elements)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    fn ensure_two_qubit(&self) -> Result<()> {
        linalg::ensure_dim(&self.elements, 4)
    }
}

/// Weights `a, b, c, d` of a Bell-diagonal state.
///
/// The matrix layout puts `(b - a)/2` on `rho_23` and `(d - c)/2` on
/// `rho_14`, so `a` weighs `(|01> - |10>)/sqrt 2`, `b` weighs
/// `(|01> + |10>)/sqrt 2`, `c` weighs `(|00> - |11>)/sqrt 2` and `d` weighs
/// `(|00> + |11>)/sqrt 2`. Only the pairing `{a, b}` / `{c, d}` enters the
/// dynamics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WernerParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl WernerParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let w = [a, b, c, d];
        if w.iter().any(|x| !x.is_finite() || *x < -TRACE_TOL) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and non-negative, got ({a}, {b}, {c}, {d})"
            )));
        }
        let sum = a + b + c + d;
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn weights(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Index (0..4) and value of the largest weight.
    pub fn dominant(&self) -> (usize, f64) {
        self.weights()
            .into_iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, w)| if w > best.1 { (k, w) } else { best })
    }
}

/// Population `p` on `|01>` and coherence `q = <01|rho|10>` of the XY family.
///
/// Positivity (`R <= 0`) is not enforced here: the rate and criterion
/// formulas are evaluated over the full `|q| <= 1/2` disk, and
/// [`xy_state`] is where infeasible parameters are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XYFamilyParams {
    p: f64,
    q: Complex64,
}

impl XYFamilyParams {
    pub fn new(p: f64, q: Complex64) -> Result<Self> {
        if !p.is_finite() || !q.re.is_finite() || !q.im.is_finite() {
            return Err(Error::DomainError("XY-family parameters must be finite".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::DomainError(format!("population p = {p} outside [0, 1]")));
        }
        if q.norm() > 0.5 + HERMITICITY_TOL {
            return Err(Error::DomainError(format!("|q| = {} exceeds 1/2", q.norm())));
        }
        Ok(Self { p, q })
    }

    /// Like [`XYFamilyParams::new`] but also requires `R <= 1e-12`.
    pub fn feasible(p: f64, q: Complex64) -> Result<Self> {
        let x = Self::new(p, q)?;
        let r = x.positivity();
        if r > TRACE_TOL {
            return Err(Error::PositivityViolation { r });
        }
        Ok(x)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn q_re(&self) -> f64 {
        self.q.re
    }

    pub fn q_im(&self) -> f64 {
        self.q.im
    }

    pub fn positivity(&self) -> f64 {
        xy_positivity(self.p, self.q)
    }

    pub fn is_feasible(&self) -> bool {
        self.positivity() <= TRACE_TOL
    }
}

pub fn new_density(elements: CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(elements)
}

/// Bell-diagonal state built directly from its matrix pattern.
pub fn werner_state(w: &WernerParams) -> DensityMatrix {
    let WernerParams { a, b, c, d } = *w;
    let mut m = linalg::zeros(4);
    m[(0, 0)] = real((c + d) / 2.0);
    m[(3, 3)] = real((c + d) / 2.0);
    m[(1, 1)] = real((a + b) / 2.0);
    m[(2, 2)] = real((a + b) / 2.0);
    m[(0, 3)] = real((d - c) / 2.0);
    m[(3, 0)] = real((d - c) / 2.0);
    m[(1, 2)] = real((b - a) / 2.0);
    m[(2, 1)] = real((b - a) / 2.0);
    DensityMatrix::new_unchecked(m)
}

pub fn xy_state(x: &XYFamilyParams) -> Result<DensityMatrix> {
    let r = x.positivity();
    if r > TRACE_TOL {
        return Err(Error::PositivityViolation { r });
    }
    let mut m = linalg::zeros(4);
    m[(1, 1)] = real(x.p);
    m[(2, 2)] = real(1.0 - x.p);
    m[(1, 2)] = x.q;
    m[(2, 1)] = x.q.conj();
    Ok(DensityMatrix::new_unchecked(m))
}

/// `R = p^2 - p + |q|^2`; the XY state is positive iff `R <= 0`.
pub fn xy_positivity(p: f64, q: Complex64) -> f64 {
    p * p - p + q.norm_sqr()
}

const BELL_PATTERN_TOL: f64 = 1e-10;

/// Recovers Bell weights from a state of the Bell-diagonal matrix pattern.
pub fn bell_diagonal_weights(rho: &DensityMatrix) -> Result<WernerParams> {
    rho.ensure_two_qubit()?;
    let m = rho.elements();
    // Entries that must vanish, plus the pattern's symmetry constraints.
    let mut defect: f64 = 0.0;
    for &(i, j) in &[(0, 1), (0, 2), (1, 3), (2, 3)] {
        defect = defect.max(m[(i, j)].norm());
    }
    defect = defect
        .max((m[(0, 0)] - m[(3, 3)]).norm())
        .max((m[(1, 1)] - m[(2, 2)]).norm())
        .max(m[(0, 3)].im.abs())
        .max(m[(1, 2)].im.abs());
    if defect > BELL_PATTERN_TOL {
        return Err(Error::NotBellDiagonal { defect });
    }
    let outer = 0.5 * (m[(0, 0)].re + m[(3, 3)].re);
    let inner = 0.5 * (m[(1, 1)].re + m[(2, 2)].re);
    let corner = m[(0, 3)].re;
    let centre = m[(1, 2)].re;
    WernerParams::new(inner - centre, inner + centre, outer - corner, outer + corner)
}

/// Amplitude vectors of the four Bell states, in the order
/// `psi+, psi-, phi+, phi-`.
pub fn bell_vectors() -> [[Complex64; 4]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = real(0.0);
    [
        [z, real(s), real(s), z],
        [z, real(s), real(-s), z],
        [real(s), z, z, real(s)],
        [real(s), z, z, real(-s)],
    ]
}

/// Computational basis projector `|k><k|` on a `dim`-level space.
pub fn basis_state(dim: usize, k: usize) -> DensityMatrix {
    let mut m = linalg::zeros(dim);
    m[(k, k)] = real(1.0);
    DensityMatrix::new_unchecked(m)
}
