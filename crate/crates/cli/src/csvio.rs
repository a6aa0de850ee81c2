//! Grid signals and iteration logs as comma-separated text.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so a write/read cycle is bit-exact.

use std::path::Path;

use fracpass::solver::TraceRow;
use fracpass::{Grid, GridSignal};

use crate::error::{CliError, Result};

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e.to_string()))
}

/// Header `t,u_1,...,u_n`, one row per node.
pub fn write_signal(path: &Path, u: &GridSignal) -> Result<()> {
    let g = u.grid();
    let mut w = writer(path)?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=g.dim()).map(|i| format!("u_{i}")))
        .collect();
    w.write_record(&header).map_err(|e| csv_error(path, e.to_string()))?;
    for (k, row) in u.values().rows().into_iter().enumerate() {
        let record: Vec<String> = std::iter::once(g.time(k))
            .chain(row.iter().copied())
            .map(format_number)
            .collect();
        w.write_record(&record).map_err(|e| csv_error(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a profile written by [`write_signal`] and checks it against `grid`.
pub fn read_signal(path: &Path, grid: &Grid) -> Result<GridSignal> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e.to_string()))?;
    let headers = r.headers().map_err(|e| csv_error(path, e.to_string()))?.clone();
    let n = grid.dim();
    if headers.len() != n + 1 || headers.get(0).map(str::trim) != Some("t") {
        return Err(csv_error(
            path,
            format!("expected header t,u_1..u_{n}, found {}", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut values = Vec::with_capacity(grid.points() * n);
    let mut rows = 0usize;
    for (k, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e.to_string()))?;
        let line = k + 2;
        if k >= grid.points() {
            return Err(csv_error(path, format!("more than N = {} data rows", grid.points())));
        }
        let parse = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("").trim();
            field
                .parse::<f64>()
                .map_err(|_| csv_error(path, format!("line {line}, column {}: cannot parse {field:?}", i + 1)))
        };
        if record.len() != n + 1 {
            return Err(csv_error(path, format!("line {line}: expected {} fields, found {}", n + 1, record.len())));
        }
        let t = parse(0)?;
        let expected = grid.time(k);
        if (t - expected).abs() > 1e-9 * grid.half_width() {
            return Err(csv_error(
                path,
                format!("line {line}: t = {t} does not match the grid node {expected}"),
            ));
        }
        for i in 1..=n {
            values.push(parse(i)?);
        }
        rows += 1;
    }
    if rows != grid.points() {
        return Err(csv_error(path, format!("found {rows} data rows, the grid has N = {}", grid.points())));
    }
    let array = ndarray::Array2::from_shape_vec((grid.points(), n), values)
        .map_err(|e| csv_error(path, e.to_string()))?;
    Ok(GridSignal::new(*grid, array)?)
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "action", "gradient_x_norm", "x_norm"])
        .map_err(|e| csv_error(path, e.to_string()))?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            format_number(r.action),
            format_number(r.gradient_x_norm),
            format_number(r.x_norm),
        ])
        .map_err(|e| csv_error(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
