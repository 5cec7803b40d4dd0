//! The entanglement rate `Gamma = dE/dt` by three routes (finite
//! differences along a trajectory, the chain rule over matrix elements,
//! and closed forms for the two parametric families), and the
//! entangling-versus-decohering criterion of the XY family.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::entanglement::{eof, eof_gradient};
use crate::error::{Error, Result};
use crate::lindblad::{ModelParams, Trajectory};
use crate::linalg::CMatrix;
use crate::qstate::{DensityMatrix, WernerParams, XYFamilyParams};

/// Closed forms are refused when the concurrence-like parameter is this small.
pub const SEPARABLE_TOL: f64 = 1e-6;
/// `|q|` below which the XY closed form is refused.
pub const XY_SEPARABLE_TOL: f64 = 1e-8;

/// Central difference `(E[i+1] - E[i-1]) / (t[i+1] - t[i-1])`.
pub fn rate_numeric(trajectory: &Trajectory, index: usize) -> Result<f64> {
    let len = trajectory.len();
    if index == 0 || index + 1 >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let before = eof(&trajectory.states[index - 1])?;
    let after = eof(&trajectory.states[index + 1])?;
    Ok((after - before) / (trajectory.times[index + 1] - trajectory.times[index - 1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTerm {
    /// e.g. `Re rho_23` (one-based indices).
    pub label: String,
    pub de_term: f64,
    pub drho_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub gamma_total: f64,
    pub terms: Vec<RateTerm>,
}

/// Pairs the measure gradient with `rho_dot` over the independent elements.
pub fn rate_chain(rho: &DensityMatrix, rho_dot: &CMatrix) -> Result<RateBreakdown> {
    crate::linalg::ensure_dim(rho_dot, rho.dim())?;
    let grad = eof_gradient(rho)?;
    let n = rho.dim();
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            terms.push(RateTerm {
                label: format!("Re rho_{}{}", i + 1, j + 1),
                de_term: grad.de_dre[(i, j)],
                drho_term: rho_dot[(i, j)].re,
            });
            if i != j {
                terms.push(RateTerm {
                    label: format!("Im rho_{}{}", i + 1, j + 1),
                    de_term: grad.de_dim[(i, j)],
                    drho_term: rho_dot[(i, j)].im,
                });
            }
        }
    }
    let gamma_total = terms.iter().map(|t| t.de_term * t.drho_term).sum();
    Ok(RateBreakdown { gamma_total, terms })
}

/// `atanh(u) / u`, finite at `u = 0`.
fn atanh_over(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 + u2 / 3.0 + u2 * u2 / 5.0
    } else {
        u.atanh() / u
    }
}

/// `dE/dc` of the entanglement of formation as a function of concurrence,
/// `log2(x / (1 - x)) * c / (2 sqrt(1 - c^2))` with `x = (1 + sqrt(1 - c^2)) / 2`.
/// Tends to `1 / ln 2` as `c -> 1`.
pub fn eof_slope(c: f64) -> f64 {
    let u = (1.0 - c * c).max(0.0).sqrt();
    c * atanh_over(u) / LN_2
}

/// Closed-form rate for a Bell-diagonal state whose dominant weight is
/// `dominant` and whose opposite Bell pair (the `phi` pair when the dominant
/// state is a `psi`, and vice versa) carries total weight `opposite`.
///
/// Under the damped XY model the concurrence `F = 2 w_max - 1` moves at
/// `gamma * opposite - 2 gamma * w_max`. When the dominant state is a `psi`
/// and the `phi` pair is empty, `|11>` stays unpopulated and the rate is
/// `-gamma F` instead.
///
/// The weights are not checked against the simplex, so the curve can be
/// continued past `b = 0`.
pub fn werner_rate_formula(dominant: f64, opposite: f64, dominant_is_psi: bool, gamma: f64) -> Result<f64> {
    let f = 2.0 * dominant - 1.0;
    if !(f > SEPARABLE_TOL) {
        return Err(Error::SeparableRegion { value: f });
    }
    let f_dot = if dominant_is_psi && opposite == 0.0 {
        -gamma * f
    } else {
        gamma * opposite - 2.0 * gamma * dominant
    };
    Ok(eof_slope(f.min(1.0)) * f_dot)
}

pub fn rate_werner(w: &WernerParams, params: &ModelParams) -> Result<f64> {
    let (k, dominant) = w.dominant();
    let psi = k < 2;
    let opposite = if psi { w.c + w.d } else { w.a + w.b };
    werner_rate_formula(dominant, opposite, psi, params.gamma)
}

/// Fig.-1 style curve point: `psi+` weight `a`, `c + d` fixed, `c = d`.
pub fn werner_curve_rate(a: f64, c_plus_d: f64, gamma: f64) -> Result<f64> {
    werner_rate_formula(a, c_plus_d, true, gamma)
}

/// `g q_im (2p - 1) - gamma |q|^2`; carries the sign of the XY rate.
pub fn xy_rate_bracket(x: &XYFamilyParams, params: &ModelParams) -> f64 {
    params.g * x.q_im() * (2.0 * x.p() - 1.0) - params.gamma * x.q().norm_sqr()
}

/// Closed-form rate for the XY family with `G = 2|q|`:
/// `log2(y/(1-y)) * G/sqrt(1-G^2) * (g q_im (2p-1) - gamma |q|^2) / |q|`.
pub fn rate_xy(x: &XYFamilyParams, params: &ModelParams) -> Result<f64> {
    let q_abs = x.q().norm();
    if q_abs <= XY_SEPARABLE_TOL {
        return Err(Error::SeparableRegion { value: q_abs });
    }
    let big_g = (2.0 * q_abs).min(1.0);
    Ok(2.0 * eof_slope(big_g) * xy_rate_bracket(x, params) / q_abs)
}

/// `|q|^2 / (q_im (2p - 1))`; the rate is positive iff `g/gamma` exceeds
/// this value (when it is positive).
pub fn criterion_threshold(x: &XYFamilyParams) -> Result<f64> {
    let denom = x.q_im() * (2.0 * x.p() - 1.0);
    if denom == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(x.q().norm_sqr() / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(value: f64, tol: f64) -> Self {
        if value > tol {
            Sign::Positive
        } else if value < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        }
    }
}

/// Relative tolerance used when comparing `g/gamma` against the threshold.
pub const CRITERION_RTOL: f64 = 1e-12;

/// Sign of the XY rate predicted from the criterion alone.
///
/// With `d = q_im (2p - 1)` the bracket equals `gamma d (g/gamma - threshold)`,
/// so the prediction is the sign of `g/gamma - threshold`, flipped when
/// `d < 0`. A degenerate direction leaves only the decay term.
pub fn predicted_sign(x: &XYFamilyParams, params: &ModelParams) -> Sign {
    let q2 = x.q().norm_sqr();
    let d = x.q_im() * (2.0 * x.p() - 1.0);
    if d == 0.0 || params.g == 0.0 {
        return if params.gamma * q2 > 0.0 { Sign::Negative } else { Sign::Zero };
    }
    if params.gamma == 0.0 {
        return Sign::of(params.g * d, 0.0);
    }
    let ratio = params.g / params.gamma;
    let threshold = q2 / d;
    let scale = ratio.abs().max(threshold.abs());
    let s = if (ratio - threshold).abs() <= CRITERION_RTOL * scale {
        Sign::Zero
    } else {
        Sign::from_ordering(ratio.total_cmp(&threshold))
    };
    if d > 0.0 {
        s
    } else {
        s.flip()
    }
}
