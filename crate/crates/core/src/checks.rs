//! Invariant suite run by the command-line `selftest`.

use crate::direct_system::{norm_squared, CoefficientVector, GridSpec};
use crate::discrete_operator::{build_operator, convolve};
use crate::error::Result;
use crate::explicit_coeffs::coeffs_m2_closed_form;
use crate::interpolator::{z_grid, OptimalInterpolator, TestFunction, DEFAULT_ZGRID};
use crate::kernel::{green_kernel, SpaceOrder};
use crate::quadrature::GaussLegendre;

/// Configurations `(m, N)` covered by the suite.
pub const CONFIGS: [(usize, usize); 6] = [(1, 5), (1, 10), (2, 5), (2, 10), (3, 5), (3, 10)];

/// Evaluation points per configuration for the pointwise checks.
pub const SWEEP_POINTS: usize = 101;

/// Gauss–Legendre points per node interval when integrating coefficients.
pub const QUADRATURE_POINTS: usize = 64;

/// Outcome of one check: the worst observed value against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    /// A yes/no property; `value` is the number of violations.
    fn holds(name: impl Into<String>, violations: usize) -> Self {
        Self {
            name: name.into(),
            value: violations as f64,
            tolerance: 0.0,
            passed: violations == 0,
        }
    }
}

fn order(m: usize) -> SpaceOrder {
    SpaceOrder::new(m).expect("suite orders are positive")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest violation of the polynomial and exponential moment conditions.
pub fn moment_violation(grid: &GridSpec, cv: &CoefficientVector) -> f64 {
    let z = cv.z;
    let mut worst: f64 = 0.0;
    for alpha in 0..grid.m().get().saturating_sub(1) {
        let s: f64 = grid.nodes().iter().zip(&cv.coeffs).map(|(x, c)| c * x.powi(alpha as i32)).sum();
        worst = worst.max((s - z.powi(alpha as i32)).abs());
    }
    let s: f64 = grid.nodes().iter().zip(&cv.coeffs).map(|(x, c)| c * (-x).exp()).sum();
    worst.max((s - (-z).exp()).abs())
}

/// `D_m` applied to its annihilated sequences and to `G_m`.
fn operator_identities() -> Result<Vec<CheckReport>> {
    let mut annihilated: f64 = 0.0;
    let mut delta: f64 = 0.0;
    for (m, n) in CONFIGS {
        let mo = order(m);
        let op = build_operator(mo, n)?;
        let h = op.h();
        let values = op.values(op.truncation_radius());
        for beta in 0..=n as i64 {
            let mut seqs: Vec<Box<dyn Fn(i64) -> f64>> = vec![
                Box::new(move |g| (h * g as f64).exp()),
                Box::new(move |g| (-h * g as f64).exp()),
            ];
            for k in 0..(2 * m).saturating_sub(2) {
                seqs.push(Box::new(move |g| (h * g as f64).powi(k as i32)));
            }
            for f in &seqs {
                annihilated = annihilated.max(convolve(&values, beta, f).abs());
            }
            let target = if beta == 0 { 1.0 } else { 0.0 };
            let g = convolve(&values, beta, |g| green_kernel(mo, h * g as f64));
            delta = delta.max((g - target).abs());
        }
    }
    Ok(vec![
        CheckReport::at_most("operator annihilates exponentials and low powers", annihilated, 1e-8),
        CheckReport::at_most("operator inverts kernel convolution", delta, 1e-8),
    ])
}

fn pointwise_checks() -> Result<Vec<CheckReport>> {
    let zs = z_grid(SWEEP_POINTS);
    let mut exact: f64 = 0.0;
    let mut kron: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let mut paths: f64 = 0.0;
    let mut negative = 0usize;
    let mut node_norm: f64 = 0.0;
    for (m, n) in CONFIGS {
        let it = OptimalInterpolator::new(order(m), n)?;
        let grid = it.grid();
        for &z in &zs {
            let cv = it.coefficients(z)?;
            exact = exact.max(moment_violation(grid, &cv));
            oracle = oracle.max(max_abs_diff(&cv.coeffs, &it.direct_coefficients(z)?.coeffs));
            if m == 2 {
                paths = paths.max(max_abs_diff(&cv.coeffs, &coeffs_m2_closed_form(grid, z)?.coeffs));
            }
            if norm_squared(grid, &cv).is_err() {
                negative += 1;
            }
        }
        for (k, &x) in grid.nodes().iter().enumerate() {
            let cv = it.coefficients(x)?;
            for (b, c) in cv.coeffs.iter().enumerate() {
                kron = kron.max((c - if b == k { 1.0 } else { 0.0 }).abs());
            }
            node_norm = node_norm.max(norm_squared(grid, &cv)?);
        }
    }
    Ok(vec![
        CheckReport::at_most("exactness on 1, x, ..., x^(m-2), e^(-x)", exact, 1e-9),
        CheckReport::at_most("Kronecker property at nodes", kron, 1e-9),
        CheckReport::at_most("closed form vs dense solve", oracle, 1e-8),
        CheckReport::at_most("m = 2 closed forms agree", paths, 1e-9),
        CheckReport::holds("norm squared nonnegative", negative),
        CheckReport::at_most("norm squared vanishes at nodes", node_norm, 1e-12),
    ])
}

/// `w_b = int_0^1 C_b(z) dz`, integrated node interval by node interval.
pub fn quadrature_weights(it: &OptimalInterpolator, points: usize) -> Result<Vec<f64>> {
    let rule = GaussLegendre::new(points);
    let nodes = it.grid().nodes();
    let mut w = vec![0.0; nodes.len()];
    for pair in nodes.windows(2) {
        for (z, weight) in rule.mapped(pair[0], pair[1]) {
            let cv = it.coefficients(z)?;
            for (wb, c) in w.iter_mut().zip(&cv.coeffs) {
                *wb += weight * c;
            }
        }
    }
    Ok(w)
}

fn quadrature_check() -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for (m, n) in CONFIGS {
        let it = OptimalInterpolator::new(order(m), n)?;
        let w = quadrature_weights(&it, QUADRATURE_POINTS)?;
        let nodes = it.grid().nodes();
        for alpha in 0..m.saturating_sub(1) {
            let s: f64 = w.iter().zip(nodes).map(|(wb, x)| wb * x.powi(alpha as i32)).sum();
            worst = worst.max((s - 1.0 / (alpha as f64 + 1.0)).abs());
        }
        let s: f64 = w.iter().zip(nodes).map(|(wb, x)| wb * (-x).exp()).sum();
        worst = worst.max((s - (1.0 - (-1f64).exp())).abs());
    }
    Ok(CheckReport::at_most("integrated coefficients form a quadrature rule", worst, 1e-8))
}

/// `((m, N, f), max error)`.
pub type StudyEntry = ((usize, usize, TestFunction), f64);

/// Largest error over the default grid for each `(m, N, f)`.
pub fn study_max_errors() -> Result<Vec<StudyEntry>> {
    let zs = z_grid(DEFAULT_ZGRID);
    let mut out = Vec::new();
    for (m, n) in CONFIGS {
        let it = OptimalInterpolator::new(order(m), n)?;
        for f in TestFunction::ALL {
            out.push(((m, n, f), it.error_sweep(f, &zs)?.max_error));
        }
    }
    Ok(out)
}

/// Ordered pairs `(coarser, finer)` whose max error must strictly decrease.
pub fn monotone_pairs() -> Vec<((usize, usize), (usize, usize))> {
    let mut pairs = Vec::new();
    for m in 1..=3 {
        pairs.push(((m, 5), (m, 10)));
    }
    for n in [5, 10] {
        pairs.push(((1, n), (2, n)));
        pairs.push(((2, n), (3, n)));
    }
    pairs
}

fn monotonicity_check() -> Result<CheckReport> {
    let errors = study_max_errors()?;
    let lookup = |m: usize, n: usize, f: TestFunction| {
        errors
            .iter()
            .find(|((a, b, g), _)| *a == m && *b == n && *g == f)
            .map(|(_, e)| *e)
            .expect("every configuration is swept")
    };
    let violations = TestFunction::ALL
        .into_iter()
        .flat_map(|f| monotone_pairs().into_iter().map(move |p| (f, p)))
        .filter(|&(f, ((m0, n0), (m1, n1)))| lookup(m1, n1, f) >= lookup(m0, n0, f))
        .count();
    Ok(CheckReport::holds("max error decreases with N and with m", violations))
}

/// Runs every check; numerical failures inside a check propagate as errors.
pub fn run_all() -> Result<Vec<CheckReport>> {
    let mut out = operator_identities()?;
    out.extend(pointwise_checks()?);
    out.push(quadrature_check()?);
    out.push(monotonicity_check()?);
    Ok(out)
}
