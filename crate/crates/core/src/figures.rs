//! Parameter sweeps and single-point reports behind the command-line tool.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::entanglement::{concurrence, eof};
use crate::error::{Error, Result};
use crate::lindblad::{damped_xy_derivative, evolve_damped_xy, integrate, rhs_damped_xy, ModelParams, Trajectory};
use crate::qstate::{werner_state, xy_positivity, xy_state, DensityMatrix, WernerParams, XYFamilyParams};
use crate::rate::{
    criterion_threshold, predicted_sign, rate_chain, rate_numeric, rate_werner, rate_xy, RateTerm, Sign,
    XY_SEPARABLE_TOL,
};

/// Cells with `R` above this are outside the state space.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Evenly spaced samples `start..=stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidParams(format!("axis bounds {start}:{stop} must be finite")));
        }
        if count < 2 {
            return Err(Error::InvalidParams(format!("an axis needs at least 2 points, got {count}")));
        }
        Ok(Axis { start, stop, count })
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            return self.stop;
        }
        self.start + (self.stop - self.start) * k as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.value(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Rate of the Bell-diagonal family along the dominant weight `a`, with the
/// fixed sum `c + d` split evenly and `b = 1 - a - (c + d)`.
pub fn fig1(gamma: f64, c_plus_d: f64, a: Axis) -> Result<Curve> {
    let params = ModelParams::new(0.0, 0.0, gamma)?;
    if !(0.0..=1.0).contains(&c_plus_d) {
        return Err(Error::InfeasibleRange(format!("c + d = {c_plus_d} is outside [0, 1]")));
    }
    let xs = a.values();
    let mut ys = Vec::with_capacity(xs.len());
    for &av in &xs {
        let b = 1.0 - av - c_plus_d;
        if av <= 0.5 || b < -1e-12 {
            return Err(Error::InfeasibleRange(format!(
                "a = {av} needs 1/2 < a <= {} for c + d = {c_plus_d}",
                1.0 - c_plus_d
            )));
        }
        let w = WernerParams::new(av, b.max(0.0), c_plus_d / 2.0, c_plus_d / 2.0)
            .map_err(|e| Error::InfeasibleRange(e.to_string()))?;
        ys.push(rate_werner(&w, &params)?);
    }
    Ok(Curve { x: xs, y: ys })
}

/// Row-major grid: `values[i * y.len() + j]` belongs to `(x[i], y[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

/// `R = p^2 - p + |q|^2` over `(p, |q|)`.
pub fn fig2(p: Axis, q_abs: Axis) -> Grid {
    let (x, y) = (p.values(), q_abs.values());
    let values = x
        .iter()
        .flat_map(|&pv| y.iter().map(move |&qv| xy_positivity(pv, Complex64::new(qv, 0.0))))
        .collect();
    Grid { x, y, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCell {
    pub qr: f64,
    pub qi: f64,
    pub r: f64,
    pub feasible: bool,
    /// Masked (`None`) outside the state space.
    pub rate: Option<f64>,
    /// The closed form evaluated wherever it is defined (`|q| <= 1/2`),
    /// including infeasible cells.
    pub rate_unmasked: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub index: usize,
    pub qr: f64,
    pub qi: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSurface {
    pub qr: Vec<f64>,
    pub qi: Vec<f64>,
    /// Row-major over `(qr, qi)`.
    pub cells: Vec<RateCell>,
    /// Extrema over feasible cells.
    pub argmax: Option<Extremum>,
    pub argmin: Option<Extremum>,
    /// Extrema over every cell with `|q| <= 1/2`.
    pub argmax_disk: Option<Extremum>,
    pub argmin_disk: Option<Extremum>,
}

fn rate_cell(p: f64, qr: f64, qi: f64, params: &ModelParams) -> RateCell {
    let q = Complex64::new(qr, qi);
    let r = xy_positivity(p, q);
    let feasible = r <= FEASIBILITY_TOL;
    let rate_unmasked = if q.norm() > XY_SEPARABLE_TOL {
        XYFamilyParams::new(p, q).ok().and_then(|x| rate_xy(&x, params).ok())
    } else {
        None
    };
    RateCell {
        qr,
        qi,
        r,
        feasible,
        rate: rate_unmasked.filter(|_| feasible),
        rate_unmasked,
    }
}

fn extremum(cells: &[RateCell], pick: impl Fn(&RateCell) -> Option<f64>, larger: bool) -> Option<Extremum> {
    let mut best: Option<Extremum> = None;
    for (index, cell) in cells.iter().enumerate() {
        let Some(rate) = pick(cell) else { continue };
        let better = match best {
            None => true,
            Some(b) => (larger && rate > b.rate) || (!larger && rate < b.rate),
        };
        if better {
            best = Some(Extremum {
                index,
                qr: cell.qr,
                qi: cell.qi,
                rate,
            });
        }
    }
    best
}

/// XY-family rate over the `(q_re, q_im)` plane at fixed `p`, evaluated in
/// parallel on the current rayon pool.
pub fn fig3(p: f64, params: &ModelParams, qr: Axis, qi: Axis) -> Result<RateSurface> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("population p = {p} is outside [0, 1]")));
    }
    let (xs, ys) = (qr.values(), qi.values());
    let ny = ys.len();
    let cells: Vec<RateCell> = (0..xs.len() * ny)
        .into_par_iter()
        .map(|k| rate_cell(p, xs[k / ny], ys[k % ny], params))
        .collect();
    Ok(RateSurface {
        argmax: extremum(&cells, |c| c.rate, true),
        argmin: extremum(&cells, |c| c.rate, false),
        argmax_disk: extremum(&cells, |c| c.rate_unmasked, true),
        argmin_disk: extremum(&cells, |c| c.rate_unmasked, false),
        qr: xs,
        qi: ys,
        cells,
    })
}

/// Initial state for trajectory dumps and single-point rates.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Werner(WernerParams),
    Xy(XYFamilyParams),
    Matrix(DensityMatrix),
}

impl InitialState {
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            InitialState::Werner(w) => Ok(werner_state(w)),
            InitialState::Xy(x) => xy_state(x),
            InitialState::Matrix(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveRow {
    pub t: f64,
    /// `Re rho_ij, Im rho_ij` in row-major order.
    pub elements: Vec<f64>,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub eof: f64,
    /// Central difference; absent at the two endpoints.
    pub rate_numeric: Option<f64>,
}

pub fn evolve_rows(trajectory: &Trajectory) -> Result<Vec<EvolveRow>> {
    let n = trajectory.len();
    let mut rows = Vec::with_capacity(n);
    for (k, (t, state)) in trajectory.times.iter().zip(&trajectory.states).enumerate() {
        let m = state.elements();
        let elements = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).flat_map(move |j| [m[(i, j)].re, m[(i, j)].im]))
            .collect();
        let rate = if k > 0 && k + 1 < n { Some(rate_numeric(trajectory, k)?) } else { None };
        rows.push(EvolveRow {
            t: *t,
            elements,
            trace: state.trace().re,
            min_eigenvalue: state.min_eigenvalue()?,
            eof: eof(state)?,
            rate_numeric: rate,
        });
    }
    Ok(rows)
}

pub fn evolve(initial: &InitialState, params: &ModelParams, t_end: f64, dt: f64) -> Result<Vec<EvolveRow>> {
    let rho0 = initial.density()?;
    evolve_rows(&evolve_damped_xy(params, &rho0, t_end, dt)?)
}

/// `Gamma` at a single state by central differences over `[-dt, dt]`; the
/// backward half integrates the reversed generator.
pub fn rate_numeric_at(params: &ModelParams, rho: &DensityMatrix, dt: f64) -> Result<f64> {
    let p = *params;
    let fwd = evolve_damped_xy(&p, rho, dt, dt / 4.0)?;
    let back = integrate(move |m| -damped_xy_derivative(&p, m), rho, dt, dt / 4.0)?;
    let three = Trajectory {
        times: vec![-dt, 0.0, dt],
        states: vec![back.states[back.len() - 1].clone(), rho.clone(), fwd.states[fwd.len() - 1].clone()],
        trace_drift: vec![0.0; 3],
    };
    rate_numeric(&three, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub concurrence: f64,
    pub eof: f64,
    /// Family closed form, when the state came from a parametric family.
    pub closed_form: Option<f64>,
    pub chain: f64,
    pub numeric: f64,
    pub terms: Vec<RateTerm>,
}

pub fn rate_report(initial: &InitialState, params: &ModelParams, dt: f64) -> Result<RateReport> {
    let rho = initial.density()?;
    let closed_form = match initial {
        InitialState::Werner(w) => Some(rate_werner(w, params)?),
        InitialState::Xy(x) => Some(rate_xy(x, params)?),
        InitialState::Matrix(_) => None,
    };
    let breakdown = rate_chain(&rho, &rhs_damped_xy(params, &rho)?)?;
    Ok(RateReport {
        concurrence: concurrence(&rho)?.c,
        eof: eof(&rho)?,
        closed_form,
        chain: breakdown.gamma_total,
        numeric: rate_numeric_at(params, &rho, dt)?,
        terms: breakdown.terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub p: f64,
    pub qr: f64,
    pub qi: f64,
    pub g: f64,
    pub gamma: f64,
    pub r: f64,
    pub feasible: bool,
    pub threshold: Option<f64>,
    /// `g / gamma`; infinite without damping.
    pub ratio: f64,
    pub predicted: Sign,
    pub rate: Option<f64>,
    pub computed: Option<Sign>,
    pub note: Option<String>,
}

/// Sign of the rate read off the criterion, next to the computed rate.
/// Points outside the state space (but with `|q| <= 1/2`) are still
/// evaluated and flagged in the note.
pub fn criterion_report(x: &XYFamilyParams, params: &ModelParams) -> Result<CriterionReport> {
    let r = x.positivity();
    let feasible = r <= FEASIBILITY_TOL;
    let mut notes = Vec::new();
    if !feasible {
        notes.push(format!("R = {r:e} > 0: not a valid state, closed form continued"));
    }
    let threshold = match criterion_threshold(x) {
        Ok(t) => Some(t),
        Err(Error::DegenerateDirection) => {
            notes.push("q_im (2p - 1) = 0: criterion undefined, only the decay term remains".to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let ratio = if params.gamma == 0.0 { f64::INFINITY } else { params.g / params.gamma };
    let predicted = predicted_sign(x, params);
    let rate = match rate_xy(x, params) {
        Ok(v) => Some(v),
        Err(Error::SeparableRegion { .. }) => {
            notes.push("q = 0: separable state, rate undefined".to_string());
            None
        }
        Err(e) => return Err(e),
    };
    // the bracket is exact arithmetic; scale its tolerance by its terms
    let bracket_scale = params.g.abs() * x.q().norm() + params.gamma * x.q().norm_sqr();
    let computed = rate.map(|_| Sign::of(crate::rate::xy_rate_bracket(x, params), 1e-12 * bracket_scale));
    Ok(CriterionReport {
        p: x.p(),
        qr: x.q_re(),
        qi: x.q_im(),
        g: params.g,
        gamma: params.gamma,
        r,
        feasible,
        threshold,
        ratio,
        predicted,
        rate,
        computed,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}
