//! Kraus channels and evolution under a first-order effective Hamiltonian.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lindblad::{integrate, Trajectory};
use crate::linalg::{self, commutator, real, CMatrix, I};
use crate::qstate::DensityMatrix;

/// Completeness defect above which a channel is rejected.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// Requires a non-empty list of square matrices of one size.
    /// Completeness is checked when the channel is applied.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::DomainError("a channel needs at least one Kraus operator".into()))?;
        let dim = linalg::ensure_square(first)?;
        for k in &operators {
            linalg::ensure_dim(k, dim)?;
        }
        Ok(Self { operators })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![linalg::identity(dim)],
        }
    }

    /// Single-qubit amplitude damping with decay probability `eta`.
    pub fn amplitude_damping(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::DomainError(format!("damping probability {eta} outside [0, 1]")));
        }
        let mut k0 = linalg::zeros(2);
        k0[(0, 0)] = real(1.0);
        k0[(1, 1)] = real((1.0 - eta).sqrt());
        let mut k1 = linalg::zeros(2);
        k1[(0, 1)] = real(eta.sqrt());
        Ok(Self { operators: vec![k0, k1] })
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// `max |(sum K†K - 1)_ij|`
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(linalg::zeros(dim), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs(&(sum - linalg::identity(dim)))
    }

    /// `rho -> sum K rho K†`
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        linalg::ensure_dim(rho.elements(), self.dim())?;
        let defect = self.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel { defect });
        }
        let out = self
            .operators
            .iter()
            .fold(linalg::zeros(self.dim()), |acc, k| acc + k * rho.elements() * k.adjoint());
        DensityMatrix::new(linalg::hermitian_part(&out))
    }

    /// Channel equal to applying `self` and then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if next.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: next.dim(),
            });
        }
        let operators = next
            .operators
            .iter()
            .flat_map(|l| self.operators.iter().map(move |k| l * k))
            .collect();
        Ok(Self { operators })
    }
}

pub fn apply_channel(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    channel.apply(rho)
}

pub fn completeness_defect(channel: &KrausChannel) -> f64 {
    channel.completeness_defect()
}

/// `H_e = sum_{mu,nu} sqrt(p_nu) <mu|H_t|nu>`. Not Hermitian in general.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub h_e: CMatrix,
}

impl EffectiveHamiltonian {
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.h_e)
    }
}

/// Environment matrix elements `<mu|H_t|nu>` of a total Hamiltonian on
/// `environment ⊗ system`, keyed by `(mu, nu)`.
pub fn environment_blocks(h_total: &CMatrix, env_dim: usize, sys_dim: usize) -> Result<BTreeMap<(usize, usize), CMatrix>> {
    linalg::ensure_dim(h_total, env_dim * sys_dim)?;
    let mut blocks = BTreeMap::new();
    for mu in 0..env_dim {
        for nu in 0..env_dim {
            let block = h_total
                .view((mu * sys_dim, nu * sys_dim), (sys_dim, sys_dim))
                .into_owned();
            blocks.insert((mu, nu), block);
        }
    }
    Ok(blocks)
}

pub fn build_effective_hamiltonian(
    h_t_elements: &BTreeMap<(usize, usize), CMatrix>,
    p: &[f64],
) -> Result<EffectiveHamiltonian> {
    if p.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::WeightError(format!("weights must be non-negative, got {p:?}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::WeightError(format!("weights sum to {total}, not 1")));
    }
    let first = h_t_elements
        .values()
        .next()
        .ok_or_else(|| Error::DomainError("no environment matrix elements supplied".into()))?;
    let dim = linalg::ensure_square(first)?;
    let mut h_e = linalg::zeros(dim);
    for (&(_, nu), block) in h_t_elements {
        linalg::ensure_dim(block, dim)?;
        let weight = p
            .get(nu)
            .ok_or_else(|| Error::WeightError(format!("no weight for environment state {nu}")))?;
        h_e += block.scale(weight.sqrt());
    }
    Ok(EffectiveHamiltonian { h_e })
}

/// Tolerance on the Hermiticity of `H_e` accepted by [`evolve_effective`].
pub const EFFECTIVE_HERMITICITY_TOL: f64 = 1e-10;

/// Integrates `i d(rho)/dt = [H_e, rho]` with RK4.
pub fn evolve_effective(h: &EffectiveHamiltonian, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<Trajectory> {
    let defect = h.hermiticity_defect();
    if defect > EFFECTIVE_HERMITICITY_TOL {
        return Err(Error::NonHermitianEffective { defect });
    }
    linalg::ensure_dim(rho0.elements(), h.h_e.nrows())?;
    let h_e = linalg::hermitian_part(&h.h_e);
    integrate(move |m| commutator(&h_e, m) * (-I), rho0, t_end, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{LindbladModel, ModelParams};
    use crate::linalg::{c, max_abs_diff};
    use crate::qstate::basis_state;
    use crate::testutil::{random_density, random_hermitian, rng};

    #[test]
    fn identity_channel_leaves_state() {
        let mut r = rng(1);
        let rho = random_density(&mut r, 4);
        let out = apply_channel(&KrausChannel::identity(4), &rho).unwrap();
        assert!(max_abs_diff(out.elements(), rho.elements()) < 1e-15);
        assert_eq!(completeness_defect(&KrausChannel::identity(4)), 0.0);
    }

    #[test]
    fn amplitude_damping_on_excited() {
        let ch = KrausChannel::amplitude_damping(0.3).unwrap();
        let out = ch.apply(&basis_state(2, 1)).unwrap();
        assert!((out.get(0, 0).re - 0.3).abs() < 1e-15);
        assert!((out.get(1, 1).re - 0.7).abs() < 1e-15);
        assert!(out.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn amplitude_damping_is_complete() {
        for k in 0..=100 {
            let ch = KrausChannel::amplitude_damping(k as f64 / 100.0).unwrap();
            assert!(ch.completeness_defect() <= 1e-15);
        }
        assert!(KrausChannel::amplitude_damping(1.5).is_err());
    }

    #[test]
    fn scaled_identity_defect() {
        let ch = KrausChannel::new(vec![linalg::identity(2).scale(0.9)]).unwrap();
        assert!((ch.completeness_defect() - 0.19).abs() < 1e-15);
        let err = ch.apply(&DensityMatrix::maximally_mixed(2)).unwrap_err();
        assert!(matches!(err, Error::IncompleteChannel { .. }));
    }

    #[test]
    fn channel_construction_errors() {
        assert!(KrausChannel::new(vec![]).is_err());
        assert!(matches!(
            KrausChannel::new(vec![linalg::identity(2), linalg::identity(3)]),
            Err(Error::DimensionMismatch { .. })
        ));
        let ch = KrausChannel::identity(2);
        assert!(matches!(
            ch.apply(&DensityMatrix::maximally_mixed(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_and_positivity_preserved() {
        let mut r = rng(2);
        let local = KrausChannel::amplitude_damping(0.42).unwrap();
        let ops: Vec<CMatrix> = local
            .operators()
            .iter()
            .flat_map(|a| local.operators().iter().map(move |b| linalg::kron(a, b)))
            .collect();
        let ch = KrausChannel::new(ops).unwrap();
        for _ in 0..50 {
            let rho = random_density(&mut r, 4);
            let out = ch.apply(&rho).unwrap();
            assert!((out.trace() - real(1.0)).norm() < 1e-12);
            assert!(out.min_eigenvalue().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut r = rng(3);
        let a = KrausChannel::amplitude_damping(0.2).unwrap();
        let b = KrausChannel::amplitude_damping(0.5).unwrap();
        let ab = a.then(&b).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut r, 2);
            let seq = b.apply(&a.apply(&rho).unwrap()).unwrap();
            let once = ab.apply(&rho).unwrap();
            assert!(max_abs_diff(seq.elements(), once.elements()) < 1e-12);
        }
        // two damping steps compose to damping with 1 - (1-0.2)(1-0.5)
        let combined = KrausChannel::amplitude_damping(0.6).unwrap();
        let rho = random_density(&mut r, 2);
        assert!(
            max_abs_diff(ab.apply(&rho).unwrap().elements(), combined.apply(&rho).unwrap().elements()) < 1e-12
        );
    }

    #[test]
    fn closed_system_effective_hamiltonian() {
        let params = ModelParams::new(1.0, 0.2, 0.0).unwrap();
        let h_s = LindbladModel::damped_xy(&params).hamiltonian().clone();
        let h_t = linalg::kron(&linalg::identity(1), &h_s);
        let blocks = environment_blocks(&h_t, 1, 4).unwrap();
        let h_e = build_effective_hamiltonian(&blocks, &[1.0]).unwrap();
        assert!(max_abs_diff(&h_e.h_e, &h_s) < 1e-15);
    }

    #[test]
    fn diagonal_environment_coupling() {
        let mut r = rng(4);
        let m00 = random_hermitian(&mut r, 2);
        let m11 = random_hermitian(&mut r, 2);
        let mut blocks = BTreeMap::new();
        blocks.insert((0, 0), m00.clone());
        blocks.insert((1, 1), m11.clone());
        blocks.insert((0, 1), linalg::zeros(2));
        blocks.insert((1, 0), linalg::zeros(2));
        let h_e = build_effective_hamiltonian(&blocks, &[0.5, 0.5]).unwrap();
        let expected = (m00 + m11).scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(max_abs_diff(&h_e.h_e, &expected) < 1e-15);
    }

    #[test]
    fn zero_blocks_and_weight_errors() {
        let blocks = environment_blocks(&linalg::zeros(6), 2, 3).unwrap();
        assert_eq!(blocks.len(), 4);
        let h_e = build_effective_hamiltonian(&blocks, &[0.3, 0.7]).unwrap();
        assert_eq!(linalg::max_abs(&h_e.h_e), 0.0);
        assert!(matches!(
            build_effective_hamiltonian(&blocks, &[0.3, 0.3]),
            Err(Error::WeightError(_))
        ));
        assert!(matches!(
            build_effective_hamiltonian(&blocks, &[1.2, -0.2]),
            Err(Error::WeightError(_))
        ));
        assert!(matches!(build_effective_hamiltonian(&blocks, &[1.0]), Err(Error::WeightError(_))));
    }

    #[test]
    fn zero_effective_hamiltonian_is_static() {
        let mut r = rng(5);
        let rho = random_density(&mut r, 3);
        let h = EffectiveHamiltonian { h_e: linalg::zeros(3) };
        let traj = evolve_effective(&h, &rho, 1.0, 0.1).unwrap();
        assert!(traj.states.iter().all(|s| max_abs_diff(s.elements(), rho.elements()) < 1e-15));
    }

    #[test]
    fn xy_coupling_rabi_oscillation() {
        let g = 0.2;
        let params = ModelParams::new(1.0, g, 0.0).unwrap();
        let h = EffectiveHamiltonian {
            h_e: LindbladModel::damped_xy(&params).hamiltonian().clone(),
        };
        let dt = params.default_dt();
        let traj = evolve_effective(&h, &basis_state(4, 1), 10.0, dt).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.get(1, 1).re - (g * t).cos().powi(2)).abs() < 1e-9, "t = {t}");
            assert!((s.get(2, 2).re - (g * t).sin().powi(2)).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn isospectral_evolution() {
        let mut r = rng(6);
        for _ in 0..5 {
            let rho = random_density(&mut r, 4);
            let h = EffectiveHamiltonian {
                h_e: random_hermitian(&mut r, 4),
            };
            let traj = evolve_effective(&h, &rho, 5.0, 1e-2).unwrap();
            let before = rho.eigenvalues().unwrap();
            let after = traj.states.last().unwrap().eigenvalues().unwrap();
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn non_hermitian_effective_rejected() {
        let mut h = linalg::zeros(2);
        h[(0, 1)] = c(0.0, 0.7);
        let err = evolve_effective(&EffectiveHamiltonian { h_e: h }, &DensityMatrix::maximally_mixed(2), 1.0, 0.1)
            .unwrap_err();
        assert!(matches!(err, Error::NonHermitianEffective { .. }));
    }
}
