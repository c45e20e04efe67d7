//! The five subcommands. Each returns a table for standard output plus
//! optional lines for standard error.

use std::path::PathBuf;

use w2interp::checks::run_all;
use w2interp::interpolator::{interpolate, z_grid, DEFAULT_ZGRID};
use w2interp::{OptimalInterpolator, SampleSet, SpaceOrder, TestFunction};

use crate::error::{CliError, CliResult};
use crate::output::{Cell, Format, Table};
use crate::samples::read_samples;

/// Largest explicit-vs-direct discrepancy accepted by `coeffs`.
pub const DISCREPANCY_TOL: f64 = 1e-8;

/// Largest grid accepted; beyond it the explicit coefficients lose more
/// than eight digits for `m >= 3`.
pub const MAX_N: usize = 200;

/// Orders and grids covered by `study`.
pub const STUDY_ORDERS: [usize; 3] = [1, 2, 3];
pub const STUDY_GRIDS: [usize; 2] = [5, 10];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Coefficients C_b(z) from the closed forms and from the dense solve
    Coeffs,
    /// Interpolated values from a sample file or a built-in function
    Interp,
    /// Error-functional norm over a grid of points
    Norm,
    /// Error sweep over m in {1,2,3}, N in {5,10} and all built-in functions
    Study,
    /// Invariant suite with a per-check report
    Selftest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub z: Option<f64>,
    pub zgrid: Option<usize>,
    pub function: Option<TestFunction>,
    pub samples_path: Option<PathBuf>,
    pub output_format: Format,
    pub out_path: Option<PathBuf>,
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub stderr: Vec<String>,
    /// Set when the table was produced but the command must still fail.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Self {
            table,
            stderr: Vec::new(),
            failure: None,
        }
    }
}

impl RunConfig {
    fn order(&self) -> CliResult<SpaceOrder> {
        let m = self.m.ok_or_else(|| CliError::Usage("--m is required".into()))?;
        Ok(SpaceOrder::new(m)?)
    }

    fn grid_size(&self) -> CliResult<usize> {
        let n = self.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
        if n > MAX_N {
            return Err(CliError::Usage(format!("--n {n} exceeds the supported maximum {MAX_N}")));
        }
        Ok(n)
    }

    fn interpolator(&self) -> CliResult<OptimalInterpolator> {
        Ok(OptimalInterpolator::new(self.order()?, self.grid_size()?)?)
    }

    /// `--z` alone, otherwise `--zgrid` points (201 by default).
    fn points(&self) -> CliResult<Vec<f64>> {
        match (self.z, self.zgrid) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --z or --zgrid, not both".into())),
            (Some(z), None) => Ok(vec![z]),
            (None, Some(0)) => Err(CliError::Usage("--zgrid must be at least 1".into())),
            (None, count) => Ok(z_grid(count.unwrap_or(DEFAULT_ZGRID))),
        }
    }

    /// Rejects flag values outside their domain before any numerics run.
    pub fn validate(&self) -> CliResult<()> {
        if let Some(z) = self.z {
            if !(0.0..=1.0).contains(&z) {
                return Err(w2interp::Error::PointOutOfRange(z).into());
            }
        }
        if let Some(m) = self.m {
            SpaceOrder::new(m)?;
        }
        if let (Some(m), Some(n)) = (self.m, self.n) {
            w2interp::GridSpec::new(SpaceOrder::new(m)?, n)?;
        }
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::Coeffs => coeffs(cfg),
        Command::Interp => interp(cfg),
        Command::Norm => norm(cfg),
        Command::Study => study(cfg),
        Command::Selftest => selftest(),
    }
}

fn coeffs(cfg: &RunConfig) -> CliResult<Outcome> {
    let z = cfg.z.ok_or_else(|| CliError::Usage("coeffs needs --z".into()))?;
    let it = cfg.interpolator()?;
    let explicit = it.coefficients(z)?;
    let direct = it.direct_coefficients(z)?;
    let mut table = Table::new(&["beta", "explicit", "direct", "discrepancy"]);
    let mut worst: f64 = 0.0;
    for (b, (e, d)) in explicit.coeffs.iter().zip(&direct.coeffs).enumerate() {
        let gap = (e - d).abs();
        worst = worst.max(gap);
        table.push(vec![Cell::Int(b as i64), Cell::Float(*e), Cell::Float(*d), Cell::Float(gap)]);
    }
    let mut out = Outcome::ok(table);
    out.stderr.push(format!("max discrepancy {worst:e} (tolerance {DISCREPANCY_TOL:e})"));
    if !(worst <= DISCREPANCY_TOL) {
        out.failure = Some(CliError::Failed(format!(
            "explicit and direct coefficients differ by {worst:e} > {DISCREPANCY_TOL:e}"
        )));
    }
    Ok(out)
}

fn samples_for(cfg: &RunConfig, it: &OptimalInterpolator) -> CliResult<SampleSet> {
    match (&cfg.samples_path, cfg.function) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --samples or --function, not both".into())),
        (Some(path), None) => read_samples(path, it.grid()),
        (None, Some(f)) => Ok(SampleSet::from_function(it.grid().clone(), f)),
        (None, None) => Err(CliError::Usage("interp needs --samples or --function".into())),
    }
}

fn interp(cfg: &RunConfig) -> CliResult<Outcome> {
    let it = cfg.interpolator()?;
    let samples = samples_for(cfg, &it)?;
    let mut table = Table::new(&["z", "value"]);
    for z in cfg.points()? {
        let v = interpolate(&samples, &it.coefficients(z)?)?;
        table.push(vec![Cell::Float(z), Cell::Float(v)]);
    }
    Ok(Outcome::ok(table))
}

fn norm(cfg: &RunConfig) -> CliResult<Outcome> {
    let it = cfg.interpolator()?;
    let mut table = Table::new(&["z", "norm"]);
    for z in cfg.points()? {
        table.push(vec![Cell::Float(z), Cell::Float(it.norm(z)?)]);
    }
    Ok(Outcome::ok(table))
}

fn study(cfg: &RunConfig) -> CliResult<Outcome> {
    let zs = cfg.points()?;
    let orders: Vec<usize> = cfg.m.map_or(STUDY_ORDERS.to_vec(), |m| vec![m]);
    let grids: Vec<usize> = match cfg.n {
        Some(n) if n > MAX_N => return Err(CliError::Usage(format!("--n {n} exceeds {MAX_N}"))),
        Some(n) => vec![n],
        None => STUDY_GRIDS.to_vec(),
    };
    let functions: Vec<TestFunction> = cfg.function.map_or(TestFunction::ALL.to_vec(), |f| vec![f]);
    let mut table = Table::new(&["m", "N", "function", "z", "abs_error", "norm"]);
    let mut summary = vec!["max absolute errors:".to_string()];
    for &m in &orders {
        for &n in &grids {
            let it = OptimalInterpolator::new(SpaceOrder::new(m)?, n)?;
            for &f in &functions {
                let report = it.error_sweep(f, &zs)?;
                for ((z, e), nv) in report.z_grid.iter().zip(&report.abs_errors).zip(&report.norm_values) {
                    table.push(vec![
                        Cell::Int(m as i64),
                        Cell::Int(n as i64),
                        Cell::Text(f.name().into()),
                        Cell::Float(*z),
                        Cell::Float(*e),
                        Cell::Float(*nv),
                    ]);
                }
                summary.push(format!("  m={m} N={n} function={f}: {:e}", report.max_error));
            }
        }
    }
    Ok(Outcome {
        table,
        stderr: summary,
        failure: None,
    })
}

fn selftest() -> CliResult<Outcome> {
    let reports = run_all()?;
    let mut table = Table::new(&["check", "value", "tolerance", "passed"]);
    let mut failed = Vec::new();
    for r in &reports {
        if !r.passed {
            failed.push(r.name.clone());
        }
        table.push(vec![
            Cell::Text(r.name.clone()),
            Cell::Float(r.value),
            Cell::Float(r.tolerance),
            Cell::Text(r.passed.to_string()),
        ]);
    }
    let mut out = Outcome::ok(table);
    out.stderr.push(format!("{} of {} checks passed", reports.len() - failed.len(), reports.len()));
    if !failed.is_empty() {
        out.failure = Some(CliError::Failed(format!("failed checks: {}", failed.join("; "))));
    }
    Ok(out)
}
