//! Convergence studies: relative errors on inner windows, observed orders,
//! CSV reports, run configuration files and the experiment presets.

mod config;
mod presets;

use std::fmt::Write as _;
use std::path::Path;

use crate::grid::GridFunction;
use crate::scalar::Real;
use crate::{Error, Result};

pub use config::{parse_config, Domain, RunDescription, TauChoice};
pub use presets::{
    run_experiment, run_with, split_diffusion_2d, ExperimentOutput, ExperimentParams, Preset,
    Scale, SolutionSet,
};

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    /// h, σ or 2 − σ depending on the study.
    pub param: f64,
    pub rel_error: f64,
    /// log₂(e_{i−1}/e_i); absent on the first row.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    /// Ordered key/value pairs written as `# key: value` lines.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    /// Builds the rows from (param, error) pairs, computing the rates.
    pub fn from_errors(metadata: Vec<(String, String)>, data: &[(f64, f64)]) -> Result<Self> {
        let errors: Vec<f64> = data.iter().map(|d| d.1).collect();
        let orders = if errors.len() >= 2 {
            observed_orders(&errors)?
        } else {
            Vec::new()
        };
        let rows = data
            .iter()
            .enumerate()
            .map(|(i, &(param, rel_error))| ReportRow {
                param,
                rel_error,
                rate: i.checked_sub(1).map(|k| orders[k]),
            })
            .collect();
        Ok(ErrorReport { metadata, rows })
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rel_error).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str("param,rel_error,rate\n");
        for r in &self.rows {
            let rate = r.rate.map(|v| format!("{v:.12e}")).unwrap_or_default();
            let _ = writeln!(s, "{:.12e},{:.12e},{rate}", r.param, r.rel_error);
        }
        s
    }

    /// Reads a table written by [`ErrorReport::to_csv`]; rates are
    /// recomputed from the errors rather than trusted.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut data = Vec::new();
        let mut seen_header = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !seen_header {
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols.len() < 2 || cols[0] != "param" || cols[1] != "rel_error" {
                    return Err(Error::Config {
                        line: ln + 1,
                        reason: "expected header `param,rel_error[,rate]`".into(),
                    });
                }
                seen_header = true;
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let num = |k: usize| -> Result<f64> {
                cells
                    .get(k)
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config {
                        line: ln + 1,
                        reason: format!("column {} is not a number", k + 1),
                    })
            };
            data.push((num(0)?, num(1)?));
        }
        if !seen_header {
            return Err(Error::Config {
                line: 1,
                reason: "no `param,rel_error` header found".into(),
            });
        }
        ErrorReport::from_errors(metadata, &data)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        emit_csv(self, path)
    }
}

/// Writes the report as CSV: `# key: value` lines, then
/// `param,rel_error,rate` with a blank rate on the first row.
pub fn emit_csv(report: &ErrorReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_csv()).map_err(|e| Error::io(path, e))
}

/// ‖U − U_ref‖_∞ / ‖U_ref‖_∞ over the grid points of `u` inside `window`.
///
/// `reference` may live on a finer nested grid; it is read at the points of
/// `u`'s grid.  Both grids must contain those points.
pub fn relative_linf_error<T: Real>(
    u: &GridFunction<T>,
    reference: &GridFunction<T>,
    window: &[(T, T)],
) -> Result<T> {
    let grid = u.grid();
    let rgrid = reference.grid();
    if rgrid.dim() != grid.dim() {
        return Err(Error::DimensionMismatch(
            "reference has another dimension".into(),
        ));
    }
    let ratio = grid.h() / rgrid.h();
    let stride = ratio.round();
    if (ratio - stride).abs() > T::lit(1e-9) * ratio || stride < T::one() {
        return Err(Error::DimensionMismatch(format!(
            "reference spacing {} does not divide {}",
            rgrid.h(),
            grid.h()
        )));
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for f in grid.window_indices(window)? {
        let x = grid.point(f);
        let idx: Option<Vec<usize>> = x
            .iter()
            .enumerate()
            .map(|(k, &xk)| rgrid.nearest(k, xk))
            .collect();
        let idx = idx.ok_or_else(|| {
            Error::DimensionMismatch(format!("point {x:?} outside the reference grid"))
        })?;
        let r = reference.get(&idx)?;
        num = num.max((u.values()[f] - r).abs());
        den = den.max(r.abs());
    }
    if den == T::zero() {
        return Err(Error::invalid(
            "reference",
            "reference vanishes on the error window",
        ));
    }
    Ok(num / den)
}

/// ‖U − u‖_∞ / ‖u‖_∞ on `window` against a closed-form function of the point.
pub fn relative_linf_error_exact<T: Real>(
    u: &GridFunction<T>,
    exact: impl Fn(&[T]) -> T,
    window: &[(T, T)],
) -> Result<T> {
    let grid = u.grid();
    let mut num = T::zero();
    let mut den = T::zero();
    for f in grid.window_indices(window)? {
        let r = exact(&grid.point(f));
        num = num.max((u.values()[f] - r).abs());
        den = den.max(r.abs());
    }
    if den == T::zero() {
        return Err(Error::invalid(
            "reference",
            "reference vanishes on the error window",
        ));
    }
    Ok(num / den)
}

/// log₂(e_{i−1}/e_i) for consecutive entries (the parameter halves per row).
pub fn observed_orders(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::invalid(
            "errors",
            "need at least two errors for an order",
        ));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::invalid(
            "errors",
            format!("errors must be positive, got {e}"),
        ));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// CSV of snapshots: `t,x[,y],u`.
pub fn solution_csv<T: Real>(snapshots: &[(T, GridFunction<T>)]) -> String {
    let mut s = String::new();
    let dim = snapshots.first().map_or(1, |(_, u)| u.grid().dim());
    let axes = ["x", "y", "z"];
    s.push('t');
    for k in 0..dim {
        s.push(',');
        s.push_str(axes.get(k).copied().unwrap_or("w"));
    }
    s.push_str(",u\n");
    for (t, u) in snapshots {
        let grid = u.grid();
        for (f, v) in u.values().iter().enumerate() {
            let _ = write!(s, "{:.12e}", t.as_f64());
            for x in grid.point(f) {
                let _ = write!(s, ",{:.12e}", x.as_f64());
            }
            let _ = writeln!(s, ",{:.12e}", v.as_f64());
        }
    }
    s
}
