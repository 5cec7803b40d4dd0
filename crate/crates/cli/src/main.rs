use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entrate::figures::{self, Axis, Extremum, InitialState};
use entrate::qstate::XYFamilyParams;
use entrate::{Error, ModelParams};
use num_complex::Complex64;
use serde_json::{json, Value};

mod output;
mod state;

use output::{Cell, Format, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_infeasible() => 3,
            CliError::Core(e) if e.is_numerical() => 4,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

/// Entanglement-rate sweeps and trajectories for two qubits with XY
/// coupling and amplitude damping.
#[derive(Debug, Parser)]
#[command(name = "entrate", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Model {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    omega: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    g: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
}

impl Model {
    fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.omega, self.g, self.gamma)?)
    }

    fn json(&self) -> Value {
        json!({"omega": self.omega, "g": self.g, "gamma": self.gamma})
    }
}

#[derive(Debug, Clone, Copy)]
struct Range(f64, f64);

fn parse_range(s: &str) -> Result<Range, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected START:STOP, got '{s}'"))?;
    let start = a.trim().parse::<f64>().map_err(|e| format!("'{a}': {e}"))?;
    let stop = b.trim().parse::<f64>().map_err(|e| format!("'{b}': {e}"))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(format!("range '{s}' is not finite"));
    }
    Ok(Range(start, stop))
}

#[derive(Debug, Clone, Copy)]
struct GridSize(usize, usize);

fn parse_grid(s: &str) -> Result<GridSize, String> {
    let count = |t: &str| {
        let n = t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}"))?;
        if n < 2 {
            return Err(format!("grid counts must be at least 2, got {n}"));
        }
        Ok(n)
    };
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok(GridSize(count(a)?, count(b)?)),
        None => {
            let n = count(s)?;
            Ok(GridSize(n, n))
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bell-diagonal rate along the dominant weight a.
    Fig1 {
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        /// Fixed c + d, split evenly.
        #[arg(long, default_value_t = 0.1)]
        cd: f64,
        #[arg(long, value_parser = parse_range, default_value = "0.55:0.9")]
        a: Range,
        /// Number of points.
        #[arg(long, value_parser = parse_grid, default_value = "201")]
        grid: GridSize,
    },
    /// Positivity function R = p^2 - p + |q|^2 over (p, |q|).
    Fig2 {
        #[arg(long, value_parser = parse_range, default_value = "0:1")]
        p: Range,
        #[arg(long = "q-abs", value_parser = parse_range, default_value = "0:1")]
        q_abs: Range,
        /// N or NxM.
        #[arg(long, value_parser = parse_grid, default_value = "101")]
        grid: GridSize,
    },
    /// XY-family rate over (q_re, q_im) at fixed p; infeasible cells masked.
    Fig3 {
        #[arg(long, default_value_t = 0.6)]
        p: f64,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, value_parser = parse_range, default_value = "0:0.5", allow_negative_numbers = true)]
        qr: Range,
        #[arg(long, value_parser = parse_range, default_value = "0:0.5", allow_negative_numbers = true)]
        qi: Range,
        /// N or NxM.
        #[arg(long, value_parser = parse_grid, default_value = "101")]
        grid: GridSize,
    },
    /// Integrate the damped XY model and dump the trajectory.
    Evolve {
        #[command(flatten)]
        model: Model,
        #[arg(long = "t-end", default_value_t = 10.0)]
        t_end: f64,
        /// Step size (default 1e-2 / max(|omega|, |g|, gamma, 1)).
        #[arg(long)]
        dt: Option<f64>,
        /// werner A B C D | xy P QR QI | matrix PATH
        #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
        state: Vec<String>,
    },
    /// Entanglement rate of one state by every available route.
    Rate {
        #[command(flatten)]
        model: Model,
        /// Half-width of the central difference.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// werner A B C D | xy P QR QI | matrix PATH
        #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
        state: Vec<String>,
    },
    /// Entangling-versus-decohering criterion for an XY-family state.
    Criterion {
        #[arg(long, default_value_t = 0.6)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        qr: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        qi: f64,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
    },
}

fn extremum_json(e: &Option<Extremum>) -> Value {
    match e {
        Some(e) => json!({"qr": e.qr, "qi": e.qi, "rate": e.rate}),
        None => Value::Null,
    }
}

fn fig1(gamma: f64, cd: f64, a: Range, grid: GridSize) -> Result<Table, CliError> {
    let axis = Axis::new(a.0, a.1, grid.0)?;
    let curve = figures::fig1(gamma, cd, axis)?;
    let config = json!({"command": "fig1", "gamma": gamma, "cd": cd, "a": [a.0, a.1, grid.0]});
    let mut t = Table::new(config, &["a", "rate"]).axis("a", &curve.x);
    for (x, y) in curve.x.iter().zip(&curve.y) {
        t.push(vec![(*x).into(), (*y).into()]);
    }
    Ok(t)
}

fn fig2(p: Range, q_abs: Range, grid: GridSize) -> Result<Table, CliError> {
    let g = figures::fig2(Axis::new(p.0, p.1, grid.0)?, Axis::new(q_abs.0, q_abs.1, grid.1)?);
    let config = json!({"command": "fig2", "p": [p.0, p.1, grid.0], "q_abs": [q_abs.0, q_abs.1, grid.1]});
    let mut t = Table::new(config, &["p", "q_abs", "r"]).axis("p", &g.x).axis("q_abs", &g.y);
    let ny = g.y.len();
    for (k, r) in g.values.iter().enumerate() {
        t.push(vec![g.x[k / ny].into(), g.y[k % ny].into(), (*r).into()]);
    }
    Ok(t)
}

fn fig3(p: f64, model: &ModelParams, qr: Range, qi: Range, grid: GridSize) -> Result<Table, CliError> {
    let s = figures::fig3(p, model, Axis::new(qr.0, qr.1, grid.0)?, Axis::new(qi.0, qi.1, grid.1)?)?;
    let config = json!({
        "command": "fig3", "p": p, "g": model.g, "gamma": model.gamma,
        "qr": [qr.0, qr.1, grid.0], "qi": [qi.0, qi.1, grid.1],
    });
    let mut t = Table::new(config, &["qr", "qi", "r", "feasible", "rate", "rate_unmasked"])
        .axis("qr", &s.qr)
        .axis("qi", &s.qi);
    for c in &s.cells {
        t.push(vec![c.qr.into(), c.qi.into(), c.r.into(), c.feasible.into(), c.rate.into(), c.rate_unmasked.into()]);
    }
    t.summary = Some(json!({
        "argmax": extremum_json(&s.argmax),
        "argmin": extremum_json(&s.argmin),
        "argmax_disk": extremum_json(&s.argmax_disk),
        "argmin_disk": extremum_json(&s.argmin_disk),
    }));
    Ok(t)
}

fn evolve(model: &Model, t_end: f64, dt: Option<f64>, spec: &[String]) -> Result<Table, CliError> {
    let params = model.params()?;
    let dt = dt.unwrap_or_else(|| params.default_dt());
    let (initial, state_json) = state::parse_state(spec)?;
    let rows = figures::evolve(&initial, &params, t_end, dt)?;
    let n = initial.density()?.dim();
    let mut columns = vec!["t".to_string()];
    for i in 1..=n {
        for j in 1..=n {
            columns.push(format!("re_{i}{j}"));
            columns.push(format!("im_{i}{j}"));
        }
    }
    columns.extend(["trace", "min_eig", "eof", "gamma_numeric"].map(String::from));
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let config = json!({"command": "evolve", "model": model.json(), "t_end": t_end, "dt": dt, "state": state_json});
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let mut t = Table::new(config, &names).axis("t", &times);
    for r in rows {
        let mut row: Vec<Cell> = vec![r.t.into()];
        row.extend(r.elements.iter().map(|&v| Cell::from(v)));
        row.extend([r.trace.into(), r.min_eigenvalue.into(), r.eof.into(), r.rate_numeric.into()]);
        t.push(row);
    }
    Ok(t)
}

fn rate(model: &Model, dt: f64, spec: &[String]) -> Result<Table, CliError> {
    let params = model.params()?;
    let (initial, state_json) = state::parse_state(spec)?;
    if let InitialState::Matrix(m) = &initial {
        if m.dim() != 4 {
            return Err(CliError::Usage(format!("rates need a 4x4 state, got {0}x{0}", m.dim())));
        }
    }
    let rep = figures::rate_report(&initial, &params, dt)?;
    let config = json!({"command": "rate", "model": model.json(), "dt": dt, "state": state_json});
    let mut t = Table::new(config, &["concurrence", "eof", "closed_form", "chain", "numeric"]);
    t.push(vec![rep.concurrence.into(), rep.eof.into(), rep.closed_form.into(), rep.chain.into(), rep.numeric.into()]);
    t.summary = Some(json!({"terms": rep.terms}));
    Ok(t)
}

fn criterion(p: f64, qr: f64, qi: f64, g: f64, gamma: f64) -> Result<Table, CliError> {
    let params = ModelParams::new(0.0, g, gamma)?;
    let x = XYFamilyParams::new(p, Complex64::new(qr, qi))?;
    let rep = figures::criterion_report(&x, &params)?;
    let config = json!({"command": "criterion", "p": p, "qr": qr, "qi": qi, "g": g, "gamma": gamma});
    let mut t = Table::new(
        config,
        &["p", "qr", "qi", "g", "gamma", "r", "feasible", "threshold", "ratio", "predicted", "rate", "computed", "note"],
    );
    t.push(vec![
        rep.p.into(),
        rep.qr.into(),
        rep.qi.into(),
        rep.g.into(),
        rep.gamma.into(),
        rep.r.into(),
        rep.feasible.into(),
        rep.threshold.into(),
        rep.ratio.into(),
        rep.predicted.symbol().into(),
        rep.rate.into(),
        rep.computed.map_or(Cell::Empty, |s| s.symbol().into()),
        rep.note.as_deref().map_or(Cell::Empty, Cell::from),
    ]);
    Ok(t)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let table = match &cli.command {
        Command::Fig1 { gamma, cd, a, grid } => fig1(*gamma, *cd, *a, *grid)?,
        Command::Fig2 { p, q_abs, grid } => fig2(*p, *q_abs, *grid)?,
        Command::Fig3 { p, g, gamma, qr, qi, grid } => {
            fig3(*p, &ModelParams::new(0.0, *g, *gamma)?, *qr, *qi, *grid)?
        }
        Command::Evolve { model, t_end, dt, state } => evolve(model, *t_end, *dt, state)?,
        Command::Rate { model, dt, state } => rate(model, *dt, state)?,
        Command::Criterion { p, qr, qi, g, gamma } => criterion(*p, *qr, *qi, *g, *gamma)?,
    };
    if cli.format == Format::Csv {
        if let Some(summary) = &table.summary {
            if let Some(obj) = summary.as_object().filter(|o| !o.contains_key("terms")) {
                for (k, v) in obj {
                    eprintln!("{k}: {v}");
                }
            }
        }
    }
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(cli.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            table.write(cli.format, stdout.lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
