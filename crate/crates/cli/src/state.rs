use std::fs;
use std::path::Path;

use entrate::figures::InitialState;
use entrate::linalg::CMatrix;
use entrate::qstate::{DensityMatrix, WernerParams, XYFamilyParams};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::CliError;

fn number(s: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .map_err(|_| CliError::Usage(format!("'{s}' is not a number")))
}

fn numbers(args: &[String], n: usize, kind: &str) -> Result<Vec<f64>, CliError> {
    if args.len() != n {
        return Err(CliError::Usage(format!("{kind} takes {n} numbers, got {}", args.len())));
    }
    args.iter().map(|s| number(s)).collect()
}

/// Parses `werner A B C D`, `xy P QR QI` or `matrix PATH`.
pub fn parse_state(args: &[String]) -> Result<(InitialState, Value), CliError> {
    let (kind, rest) = args
        .split_first()
        .ok_or_else(|| CliError::Usage("missing initial state: werner A B C D | xy P QR QI | matrix PATH".into()))?;
    match kind.as_str() {
        "werner" => {
            let v = numbers(rest, 4, "werner")?;
            let w = WernerParams::new(v[0], v[1], v[2], v[3])?;
            Ok((InitialState::Werner(w), json!({"kind": "werner", "a": v[0], "b": v[1], "c": v[2], "d": v[3]})))
        }
        "xy" => {
            let v = numbers(rest, 3, "xy")?;
            let x = XYFamilyParams::new(v[0], Complex64::new(v[1], v[2]))?;
            Ok((InitialState::Xy(x), json!({"kind": "xy", "p": v[0], "qr": v[1], "qi": v[2]})))
        }
        "matrix" => {
            let [path] = rest else {
                return Err(CliError::Usage("matrix takes one file path".into()));
            };
            let rho = read_matrix(Path::new(path))?;
            Ok((InitialState::Matrix(rho), json!({"kind": "matrix", "path": path})))
        }
        other => Err(CliError::Usage(format!("unknown state kind '{other}'"))),
    }
}

/// One matrix row per line as `re im re im ...`; `#` starts a comment.
pub fn read_matrix(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<DensityMatrix, CliError> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(number)
            .collect::<Result<Vec<f64>, _>>()?;
        if vals.len() % 2 != 0 {
            return Err(CliError::Usage(format!("row '{line}' has an odd number of values")));
        }
        rows.push(vals);
    }
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Usage("matrix file holds no rows".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != 2 * n) {
        return Err(CliError::Usage(format!(
            "a {n}-row matrix needs {} values per row, found {}",
            2 * n,
            bad.len()
        )));
    }
    let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][2 * j], rows[i][2 * j + 1]));
    Ok(DensityMatrix::new(m)?)
}
