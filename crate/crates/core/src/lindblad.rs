//! Lindblad time evolution: a generic master-equation right-hand side, the
//! element-wise equations of the damped two-qubit XY model, and a fixed-step
//! RK4 integrator.
//!
//! Qubit convention: `|0>` is the ground level, `sigma_- = |0><1|` and
//! `sigma_z = |1><1| - |0><0|`. With this choice the damped XY generator
//! built from operators agrees with the element equations exactly.

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, real, CMatrix, I};
use crate::qstate::DensityMatrix;

/// Frequency `omega`, coupling `g` and damping rate `gamma` (hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelParams {
    pub omega: f64,
    pub g: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(omega: f64, g: f64, gamma: f64) -> Result<Self> {
        if !omega.is_finite() || !g.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidParams("omega, g and gamma must be finite".into()));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParams(format!("damping rate gamma = {gamma} is negative")));
        }
        Ok(Self { omega, g, gamma })
    }

    /// `1e-2 / max(|omega|, |g|, gamma, 1)`
    pub fn default_dt(&self) -> f64 {
        1e-2 / self.omega.abs().max(self.g.abs()).max(self.gamma).max(1.0)
    }
}

/// One dissipative channel: lowering operator `X-` with emission rate `K`
/// and absorption rate `G`. `X+` is the adjoint of `X-`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub x_minus: CMatrix,
    pub k_rate: f64,
    pub g_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    h0: CMatrix,
    channels: Vec<Channel>,
}

impl LindbladModel {
    pub fn new(h0: CMatrix, channels: Vec<Channel>) -> Result<Self> {
        let dim = linalg::ensure_square(&h0)?;
        let defect = linalg::hermiticity_defect(&h0);
        if defect > 1e-12 {
            return Err(Error::NonHermitian { defect });
        }
        for ch in &channels {
            linalg::ensure_dim(&ch.x_minus, dim)?;
            if !(ch.k_rate >= 0.0 && ch.g_rate >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "channel rates must be non-negative, got K = {}, G = {}",
                    ch.k_rate, ch.g_rate
                )));
            }
        }
        Ok(Self { h0, channels })
    }

    /// `H_s` of the damped XY model with one lowering channel per qubit at
    /// rate `gamma` (zero temperature, so `G = 0`).
    pub fn damped_xy(params: &ModelParams) -> Self {
        let id = linalg::identity(2);
        let lower = sigma_minus();
        let raise = lower.adjoint();
        let sz = sigma_z();
        let h = (linalg::kron(&sz, &id) + linalg::kron(&id, &sz)).scale(params.omega / 2.0)
            + (linalg::kron(&raise, &lower) + linalg::kron(&lower, &raise)).scale(params.g);
        let channels = [linalg::kron(&lower, &id), linalg::kron(&id, &lower)]
            .into_iter()
            .map(|x_minus| Channel {
                x_minus,
                k_rate: params.gamma,
                g_rate: 0.0,
            })
            .collect();
        Self { h0: h, channels }
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h0
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Generator applied to an arbitrary square matrix of matching size.
    pub fn derivative(&self, rho: &CMatrix) -> CMatrix {
        let mut out = commutator(&self.h0, rho) * (-I);
        for ch in &self.channels {
            let xm = &ch.x_minus;
            let xp = xm.adjoint();
            if ch.k_rate != 0.0 {
                out += dissipator(xm, &xp, rho).scale(ch.k_rate);
            }
            if ch.g_rate != 0.0 {
                out += dissipator(&xp, xm, rho).scale(ch.g_rate);
            }
        }
        out
    }
}

/// `(1/2)(2 A rho B - B A rho - rho B A)` with `B = A†`.
fn dissipator(a: &CMatrix, b: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ba = b * a;
    a * rho * b - (&ba * rho + rho * &ba).scale(0.5)
}

pub fn sigma_minus() -> CMatrix {
    let mut m = linalg::zeros(2);
    m[(0, 1)] = real(1.0);
    m
}

pub fn sigma_z() -> CMatrix {
    let mut m = linalg::zeros(2);
    m[(0, 0)] = real(-1.0);
    m[(1, 1)] = real(1.0);
    m
}

pub fn rhs_generic(model: &LindbladModel, rho: &DensityMatrix) -> Result<CMatrix> {
    linalg::ensure_dim(rho.elements(), model.dim())?;
    Ok(model.derivative(rho.elements()))
}

/// Element-wise equations of the damped XY model on a 4x4 matrix.
///
/// The ten upper-triangle equations are written out; the lower triangle is
/// filled by Hermitian conjugation.
pub fn damped_xy_derivative(params: &ModelParams, rho: &CMatrix) -> CMatrix {
    let ModelParams { omega: w, g, gamma } = *params;
    // 1-based accessor so the equations read like the element labels.
    let r = |i: usize, j: usize| rho[(i - 1, j - 1)];
    let ig = I * g;
    let iw = I * w;
    let mut d = linalg::zeros(4);
    let mut set = |i: usize, j: usize, v| d[(i - 1, j - 1)] = v;

    set(1, 1, (r(2, 2) + r(3, 3)) * gamma);
    set(2, 2, -ig * r(3, 2) + ig * r(2, 3) + r(4, 4) * gamma - r(2, 2) * gamma);
    set(3, 3, -ig * r(2, 3) + ig * r(3, 2) + r(4, 4) * gamma - r(3, 3) * gamma);
    set(4, 4, r(4, 4) * (-2.0 * gamma));
    set(1, 2, ig * r(1, 3) + r(3, 4) * gamma - r(1, 2) * (0.5 * gamma) + iw * r(1, 2));
    set(1, 3, ig * r(1, 2) + r(2, 4) * gamma - r(1, 3) * (0.5 * gamma) + iw * r(1, 3));
    set(1, 4, -r(1, 4) * gamma + iw * 2.0 * r(1, 4));
    set(2, 3, -ig * r(3, 3) + ig * r(2, 2) - r(2, 3) * gamma);
    set(2, 4, -ig * r(3, 4) - r(2, 4) * (1.5 * gamma) + iw * r(2, 4));
    set(3, 4, -ig * r(2, 4) - r(3, 4) * (1.5 * gamma) + iw * r(3, 4));

    for i in 0..4 {
        for j in 0..i {
            d[(i, j)] = d[(j, i)].conj();
        }
    }
    d
}

pub fn rhs_damped_xy(params: &ModelParams, rho: &DensityMatrix) -> Result<CMatrix> {
    linalg::ensure_dim(rho.elements(), 4)?;
    Ok(damped_xy_derivative(params, rho.elements()))
}

/// Max-norm gap between the element equations and the operator-built
/// generator for the same parameters. Returns infinity for non-4x4 input.
pub fn rhs_consistency_check(params: &ModelParams, rho: &DensityMatrix) -> f64 {
    if rho.dim() != 4 {
        return f64::INFINITY;
    }
    let model = LindbladModel::damped_xy(params);
    linalg::max_abs_diff(&damped_xy_derivative(params, rho.elements()), &model.derivative(rho.elements()))
}

/// Sampled solution of a master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// `|Tr - 1|` of each stored state before renormalization (0 for the
    /// initial state).
    pub trace_drift: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Total trace drift removed by renormalization, per unit time.
    pub fn drift_rate(&self) -> f64 {
        let span = self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0);
        let total: f64 = self.trace_drift.iter().sum();
        if span > 0.0 {
            total / span
        } else {
            total
        }
    }
}

/// Drift of the trace in one step that signals a step size far too large.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// Fixed-step classic RK4. Every step is stored after re-Hermitization and
/// trace renormalization; the final step is shortened to land on `t_end`.
pub fn integrate<F>(rhs: F, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<Trajectory>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::DomainError(format!("time step dt = {dt} must be positive")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::DomainError(format!("end time t_end = {t_end} must be non-negative")));
    }
    let ratio = t_end / dt;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut trace_drift = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(rho0.clone());
    trace_drift.push(0.0);

    let mut y = rho0.elements().clone();
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t_next = if k == steps { t_end } else { k as f64 * dt };
        let h = t_next - t_prev;

        let k1 = rhs(&y);
        let k2 = rhs(&(&y + k1.scale(h / 2.0)));
        let k3 = rhs(&(&y + k2.scale(h / 2.0)));
        let k4 = rhs(&(&y + k3.scale(h)));
        let step = (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        let raw = y + step;

        let tr = linalg::trace(&raw);
        let drift = (tr - real(1.0)).norm();
        if drift > MAX_STEP_DRIFT {
            return Err(Error::StepSizeTooLarge { drift, dt: h });
        }
        y = linalg::hermitian_part(&raw).unscale(tr.re);

        times.push(t_next);
        states.push(DensityMatrix::new_unchecked(y.clone()));
        trace_drift.push(drift);
    }
    Ok(Trajectory {
        times,
        states,
        trace_drift,
    })
}

/// Integrates the damped XY model with its element equations.
pub fn evolve_damped_xy(params: &ModelParams, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<Trajectory> {
    linalg::ensure_dim(rho0.elements(), 4)?;
    let p = *params;
    integrate(move |m| damped_xy_derivative(&p, m), rho0, t_end, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs, max_abs_diff};
    use crate::qstate::{
        basis_state, bell_vectors, new_density, werner_state, xy_state, WernerParams, XYFamilyParams,
    };
    use crate::testutil::{random_density, rng};
    use rand::Rng;

    fn xy_params() -> ModelParams {
        ModelParams::new(1.0, 0.2, 0.01).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.2, -0.1).is_err());
        assert!(ModelParams::new(f64::NAN, 0.2, 0.1).is_err());
        assert!((ModelParams::new(0.5, 3.0, 0.1).unwrap().default_dt() - 1e-2 / 3.0).abs() < 1e-18);
        assert_eq!(ModelParams::new(0.5, 0.2, 0.1).unwrap().default_dt(), 1e-2);
    }

    #[test]
    fn generic_commuting_case_is_zero() {
        let h0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![real(0.3), real(-0.2), real(1.1)]));
        let model = LindbladModel::new(h0, vec![]).unwrap();
        let rho = DensityMatrix::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            real(0.5),
            real(0.3),
            real(0.2),
        ])))
        .unwrap();
        assert!(max_abs(&rhs_generic(&model, &rho).unwrap()) < 1e-15);
    }

    #[test]
    fn generic_single_qubit_decay() {
        let gamma = 0.7;
        let model = LindbladModel::new(
            linalg::zeros(2),
            vec![Channel {
                x_minus: sigma_minus(),
                k_rate: gamma,
                g_rate: 0.0,
            }],
        )
        .unwrap();
        let excited = basis_state(2, 1);
        let d = rhs_generic(&model, &excited).unwrap();
        let mut expected = linalg::zeros(2);
        expected[(0, 0)] = real(gamma);
        expected[(1, 1)] = real(-gamma);
        assert!(max_abs_diff(&d, &expected) < 1e-15);
    }

    #[test]
    fn generic_zero_rates_is_pure_commutator() {
        let mut r = rng(2);
        let rho = random_density(&mut r, 4);
        let params = ModelParams::new(0.8, 0.3, 0.0).unwrap();
        let model = LindbladModel::damped_xy(&params);
        let expect = commutator(model.hamiltonian(), rho.elements()) * (-I);
        assert!(max_abs_diff(&rhs_generic(&model, &rho).unwrap(), &expect) < 1e-15);
    }

    #[test]
    fn generic_absorption_channel() {
        // G-only channel pumps |0> -> |1>.
        let model = LindbladModel::new(
            linalg::zeros(2),
            vec![Channel {
                x_minus: sigma_minus(),
                k_rate: 0.0,
                g_rate: 0.4,
            }],
        )
        .unwrap();
        let d = rhs_generic(&model, &basis_state(2, 0)).unwrap();
        assert!((d[(1, 1)].re - 0.4).abs() < 1e-15 && (d[(0, 0)].re + 0.4).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        let bad = LindbladModel::new(
            linalg::zeros(2),
            vec![Channel {
                x_minus: linalg::zeros(3),
                k_rate: 1.0,
                g_rate: 0.0,
            }],
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
        let mut h = linalg::zeros(2);
        h[(0, 1)] = real(1.0);
        assert!(matches!(LindbladModel::new(h, vec![]), Err(Error::NonHermitian { .. })));
        let neg = LindbladModel::new(
            linalg::zeros(2),
            vec![Channel {
                x_minus: sigma_minus(),
                k_rate: -1.0,
                g_rate: 0.0,
            }],
        );
        assert!(matches!(neg, Err(Error::InvalidParams(_))));
        let model = LindbladModel::damped_xy(&xy_params());
        assert!(matches!(
            rhs_generic(&model, &DensityMatrix::maximally_mixed(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn damped_xy_on_doubly_excited() {
        let params = xy_params();
        let d = rhs_damped_xy(&params, &basis_state(4, 3)).unwrap();
        assert!((d[(3, 3)].re + 2.0 * params.gamma).abs() < 1e-15);
        assert!((d[(1, 1)].re - params.gamma).abs() < 1e-15);
        assert!((d[(2, 2)].re - params.gamma).abs() < 1e-15);
        assert!(d[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn damped_xy_on_psi_plus() {
        let params = xy_params();
        let psi = DensityMatrix::pure(&bell_vectors()[0]).unwrap();
        let d = rhs_damped_xy(&params, &psi).unwrap();
        assert!((d[(1, 2)] - real(-params.gamma / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn damped_xy_undamped_xy_state() {
        let params = ModelParams::new(1.0, 0.2, 0.0).unwrap();
        let x = XYFamilyParams::new(0.6, c(0.1, 0.3)).unwrap();
        let d = rhs_damped_xy(&params, &xy_state(&x).unwrap()).unwrap();
        assert!((d[(1, 1)].re - (-2.0 * params.g * x.q_im())).abs() < 1e-15);
        assert!((d[(1, 2)] - I * (params.g * (2.0 * x.p() - 1.0))).norm() < 1e-15);
    }

    #[test]
    fn damped_xy_requires_two_qubits() {
        assert!(rhs_damped_xy(&xy_params(), &DensityMatrix::maximally_mixed(2)).is_err());
        assert_eq!(rhs_consistency_check(&xy_params(), &DensityMatrix::maximally_mixed(2)), f64::INFINITY);
    }

    #[test]
    fn both_backends_traceless_hermitian_and_consistent() {
        let mut r = rng(9);
        for _ in 0..200 {
            let rho = random_density(&mut r, 4);
            let params = ModelParams::new(
                r.random_range(-2.0..2.0),
                r.random_range(-1.0..1.0),
                r.random_range(0.0..1.0),
            )
            .unwrap();
            let d1 = rhs_damped_xy(&params, &rho).unwrap();
            let d2 = rhs_generic(&LindbladModel::damped_xy(&params), &rho).unwrap();
            for d in [&d1, &d2] {
                assert!(linalg::trace(d).norm() <= 1e-12);
                assert!(linalg::hermiticity_defect(d) <= 1e-12);
            }
            assert!(rhs_consistency_check(&params, &rho) <= 1e-12);
        }
    }

    #[test]
    fn consistency_special_cases() {
        let mut r = rng(10);
        let rho = random_density(&mut r, 4);
        for params in [
            ModelParams::new(1.0, 0.2, 0.0).unwrap(),
            ModelParams::new(0.0, 0.0, 0.3).unwrap(),
        ] {
            assert!(rhs_consistency_check(&params, &rho) <= 1e-12);
        }
    }

    #[test]
    fn zero_rhs_gives_constant_trajectory() {
        let mut r = rng(4);
        let rho = random_density(&mut r, 4);
        let traj = integrate(|m| CMatrix::zeros(m.nrows(), m.ncols()), &rho, 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        for s in &traj.states {
            assert!(max_abs_diff(s.elements(), rho.elements()) < 1e-15);
        }
    }

    #[test]
    fn integrate_rejects_bad_steps() {
        let rho = DensityMatrix::maximally_mixed(2);
        let zero = |m: &CMatrix| CMatrix::zeros(m.nrows(), m.ncols());
        assert!(integrate(zero, &rho, 1.0, 0.0).is_err());
        assert!(integrate(zero, &rho, -1.0, 0.1).is_err());
    }

    #[test]
    fn short_final_step_lands_on_end() {
        let rho = DensityMatrix::maximally_mixed(2);
        let traj = integrate(|m| CMatrix::zeros(m.nrows(), m.ncols()), &rho, 0.25, 0.1).unwrap();
        assert_eq!(traj.times.len(), 4);
        assert!((traj.times[3] - 0.25).abs() < 1e-15);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn huge_step_is_reported() {
        // A trace-changing generator exposes the drift guard.
        let rho = DensityMatrix::maximally_mixed(2);
        let err = integrate(|m| m.clone(), &rho, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::StepSizeTooLarge { .. }));
    }

    #[test]
    fn excited_population_decays_exponentially() {
        let gamma = 0.01;
        let params = ModelParams::new(1.0, 0.2, gamma).unwrap();
        let t_end = 1.0 / gamma;
        let traj = evolve_damped_xy(&params, &basis_state(4, 3), t_end, 1e-2 / gamma).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.get(3, 3).re - (-2.0_f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn werner_keeps_x_pattern() {
        let params = xy_params();
        let w = WernerParams::new(0.7, 0.1, 0.1, 0.1).unwrap();
        let traj = evolve_damped_xy(&params, &werner_state(&w), 50.0, params.default_dt()).unwrap();
        for s in &traj.states {
            for &(i, j) in &[(0, 1), (0, 2), (1, 3), (2, 3)] {
                assert!(s.get(i, j).norm() < 1e-10);
            }
            assert!((s.get(1, 1) - s.get(2, 2)).norm() < 1e-10);
            assert!(s.get(1, 2).im.abs() < 1e-10);
        }
    }

    #[test]
    fn trajectory_states_stay_physical() {
        let mut r = rng(21);
        let params = ModelParams::new(1.0, 0.5, 0.2).unwrap();
        for _ in 0..5 {
            let rho = random_density(&mut r, 4);
            let traj = evolve_damped_xy(&params, &rho, 20.0, params.default_dt()).unwrap();
            assert!(traj.drift_rate() < 1e-8);
            for s in traj.states.iter().step_by(50) {
                assert!(s.min_eigenvalue().unwrap() >= -1e-7);
                assert!((s.trace() - real(1.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn relaxes_to_ground_state() {
        let mut r = rng(22);
        let params = ModelParams::new(1.0, 0.2, 0.5).unwrap();
        let rho = random_density(&mut r, 4);
        let t_end = 20.0 / params.gamma;
        let traj = evolve_damped_xy(&params, &rho, t_end, params.default_dt()).unwrap();
        let last = traj.states.last().unwrap();
        assert!(max_abs_diff(last.elements(), basis_state(4, 0).elements()) < 1e-3);
        assert!(new_density(last.elements().clone()).is_ok());
    }
}
