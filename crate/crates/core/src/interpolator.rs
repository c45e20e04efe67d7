//! Applying optimal coefficients to data: interpolation, pointwise error
//! norms and error sweeps over test functions.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::direct_system::{norm_squared, solve_direct, CoefficientVector, GridSpec};
use crate::discrete_operator::{build_operator, OperatorData};
use crate::error::{Error, Result};
use crate::explicit_coeffs::explicit_coefficients;
use crate::kernel::SpaceOrder;
use crate::quadrature::GaussLegendre;

/// Number of points in the default evaluation grid on `[0, 1]`.
pub const DEFAULT_ZGRID: usize = 201;

/// Quadrature order for the semi-norm of a test function.
pub const SEMINORM_POINTS: usize = 1024;

/// Built-in test functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// `x^2`
    Square,
    /// `e^(2x)`
    Exp2,
    /// `sin x`
    Sin,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [TestFunction::Square, TestFunction::Exp2, TestFunction::Sin];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Square => "sq",
            TestFunction::Exp2 => "exp2",
            TestFunction::Sin => "sin",
        }
    }

    pub fn value(self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `k`-th derivative at `x`.
    pub fn derivative(self, k: usize, x: f64) -> f64 {
        match self {
            TestFunction::Square => match k {
                0 => x * x,
                1 => 2.0 * x,
                2 => 2.0,
                _ => 0.0,
            },
            TestFunction::Exp2 => 2f64.powi(k as i32) * (2.0 * x).exp(),
            TestFunction::Sin => match k % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
        }
    }

    /// Semi-norm `(int_0^1 (f^(m) + f^(m-1))^2 dx)^(1/2)`.
    pub fn seminorm(self, m: SpaceOrder) -> f64 {
        let m = m.get();
        let rule = GaussLegendre::new(SEMINORM_POINTS);
        rule.integrate(0.0, 1.0, |x| {
            let v = self.derivative(m, x) + self.derivative(m - 1, x);
            v * v
        })
        .sqrt()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown function '{s}' (expected sq, exp2 or sin)"))
    }
}

/// Where sample values came from.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleSource {
    Builtin(TestFunction),
    File(PathBuf),
}

/// Values `f(x_0), ..., f(x_N)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    grid: GridSpec,
    values: Vec<f64>,
    source: SampleSource,
}

impl SampleSet {
    pub fn new(grid: GridSpec, values: Vec<f64>, source: SampleSource) -> Result<Self> {
        if values.len() != grid.n() + 1 {
            return Err(Error::GridMismatch {
                samples: values.len(),
                coeffs: grid.n() + 1,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self { grid, values, source })
    }

    pub fn from_function(grid: GridSpec, f: TestFunction) -> Self {
        let values = grid.nodes().iter().map(|&x| f.value(x)).collect();
        Self {
            grid,
            values,
            source: SampleSource::Builtin(f),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &SampleSource {
        &self.source
    }
}

/// `sum_b C_b(z) f(x_b)`.
pub fn interpolate(samples: &SampleSet, cv: &CoefficientVector) -> Result<f64> {
    if samples.values.len() != cv.coeffs.len() {
        return Err(Error::GridMismatch {
            samples: samples.values.len(),
            coeffs: cv.coeffs.len(),
        });
    }
    Ok(cv.coeffs.iter().zip(&samples.values).map(|(c, v)| c * v).sum())
}

/// Error-functional norm for `m = 1` from the one-sum closed form
/// `|l|^2 = 1/4 sum_b C_b sgn(z - x_b) (e^(z - x_b) - e^(x_b - z))`.
pub fn norm_m1(grid: &GridSpec, cv: &CoefficientVector) -> f64 {
    let z = cv.z;
    let sq: f64 = 0.25
        * grid
            .nodes()
            .iter()
            .zip(&cv.coeffs)
            .map(|(&x, &c)| {
                let t = z - x;
                c * t.signum() * if t == 0.0 { 0.0 } else { 2.0 * t.sinh() }
            })
            .sum::<f64>();
    sq.max(0.0).sqrt()
}

/// `n` equispaced points on `[0, 1]` including both ends.
pub fn z_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Pointwise errors and norms of one test function over a grid of points.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub z_grid: Vec<f64>,
    pub abs_errors: Vec<f64>,
    pub max_error: f64,
    pub norm_values: Vec<f64>,
}

/// Optimal formula for fixed `m` and `N`.
#[derive(Clone, Debug)]
pub struct OptimalInterpolator {
    grid: GridSpec,
    op: OperatorData,
}

impl OptimalInterpolator {
    pub fn new(m: SpaceOrder, n: usize) -> Result<Self> {
        let grid = GridSpec::new(m, n)?;
        let op = build_operator(m, n)?;
        Ok(Self { grid, op })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn operator(&self) -> &OperatorData {
        &self.op
    }

    /// Coefficients from the closed forms.
    pub fn coefficients(&self, z: f64) -> Result<CoefficientVector> {
        explicit_coefficients(&self.op, &self.grid, z)
    }

    /// Coefficients from the dense linear system.
    pub fn direct_coefficients(&self, z: f64) -> Result<CoefficientVector> {
        solve_direct(&self.grid, z)
    }

    /// `|l|` for the given coefficients.
    pub fn norm_of(&self, cv: &CoefficientVector) -> Result<f64> {
        Ok(norm_squared(&self.grid, cv)?.sqrt())
    }

    /// `|l|` at `z` for the optimal coefficients.
    pub fn norm(&self, z: f64) -> Result<f64> {
        self.norm_of(&self.coefficients(z)?)
    }

    /// Errors `|f(z) - P_f(z)|` and norms over `zs`.
    pub fn error_sweep(&self, f: TestFunction, zs: &[f64]) -> Result<ErrorReport> {
        let samples = SampleSet::from_function(self.grid.clone(), f);
        let mut abs_errors = Vec::with_capacity(zs.len());
        let mut norm_values = Vec::with_capacity(zs.len());
        for &z in zs {
            let cv = self.coefficients(z)?;
            abs_errors.push((f.value(z) - interpolate(&samples, &cv)?).abs());
            norm_values.push(self.norm_of(&cv)?);
        }
        let max_error = abs_errors.iter().copied().fold(0.0, f64::max);
        Ok(ErrorReport {
            z_grid: zs.to_vec(),
            abs_errors,
            max_error,
            norm_values,
        })
    }
}

/// [`OptimalInterpolator::error_sweep`] for a freshly built interpolator.
pub fn error_sweep(m: SpaceOrder, n: usize, f: TestFunction, zs: &[f64]) -> Result<ErrorReport> {
    OptimalInterpolator::new(m, n)?.error_sweep(f, zs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interp(m: usize, n: usize) -> OptimalInterpolator {
        OptimalInterpolator::new(SpaceOrder::new(m).unwrap(), n).unwrap()
    }

    #[test]
    fn function_names_round_trip() {
        for f in TestFunction::ALL {
            assert_eq!(f.name().parse::<TestFunction>().unwrap(), f);
        }
        assert!("cos".parse::<TestFunction>().is_err());
    }

    #[test]
    fn sine_derivatives_cycle() {
        let x = 0.4;
        assert_eq!(TestFunction::Sin.derivative(5, x), x.cos());
        assert_eq!(TestFunction::Exp2.derivative(3, 0.0), 8.0);
        assert_eq!(TestFunction::Square.derivative(3, x), 0.0);
    }

    #[test]
    fn seminorm_of_sine_for_m1() {
        // int_0^1 (cos x + sin x)^2 = 1 + sin^2(1)
        let got = TestFunction::Sin.seminorm(SpaceOrder::new(1).unwrap());
        assert!((got - (1.0 + 1f64.sin().powi(2)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sample_set_validation() {
        let grid = GridSpec::new(SpaceOrder::new(1).unwrap(), 3).unwrap();
        assert!(matches!(
            SampleSet::new(grid.clone(), vec![0.0; 3], SampleSource::Builtin(TestFunction::Sin)),
            Err(Error::GridMismatch { samples: 3, coeffs: 4 })
        ));
        assert_eq!(
            SampleSet::new(grid, vec![0.0, 1.0, f64::NAN, 0.0], SampleSource::Builtin(TestFunction::Sin)),
            Err(Error::NonFiniteSample(2))
        );
    }

    #[test]
    fn reproduces_exponential_and_constants() {
        for (m, n) in [(1, 5), (2, 5), (3, 10)] {
            let it = interp(m, n);
            let exp = SampleSet::new(
                it.grid().clone(),
                it.grid().nodes().iter().map(|x| (-x).exp()).collect(),
                SampleSource::File("inline".into()),
            )
            .unwrap();
            let one = SampleSet::new(it.grid().clone(), vec![1.0; n + 1], SampleSource::File("inline".into())).unwrap();
            for z in [0.0, 0.21, 0.5, 0.93] {
                let cv = it.coefficients(z).unwrap();
                assert!((interpolate(&exp, &cv).unwrap() - (-z).exp()).abs() < 1e-9);
                if m >= 2 {
                    assert!((interpolate(&one, &cv).unwrap() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sine_interpolated_at_node() {
        let it = interp(2, 5);
        let s = SampleSet::from_function(it.grid().clone(), TestFunction::Sin);
        let x3 = it.grid().nodes()[3];
        let got = interpolate(&s, &it.coefficients(x3).unwrap()).unwrap();
        assert!((got - x3.sin()).abs() < 1e-9);
    }

    #[test]
    fn m1_norm_forms_agree() {
        let it = interp(1, 5);
        for z in [0.1, 0.33, 0.75] {
            let cv = it.coefficients(z).unwrap();
            let a = norm_m1(it.grid(), &cv);
            let b = it.norm_of(&cv).unwrap();
            assert!((a - b).abs() < 1e-10, "z={z}: {a} vs {b}");
        }
        // linear in C, so coefficient roundoff enters the square directly
        assert!(norm_m1(it.grid(), &it.coefficients(0.2).unwrap()).powi(2) < 1e-15);
    }

    #[test]
    fn m1_norm_shrinks_with_refinement() {
        let coarse = interp(1, 5);
        let fine = interp(1, 10);
        let a = norm_m1(coarse.grid(), &coarse.coefficients(0.05).unwrap());
        let b = norm_m1(fine.grid(), &fine.coefficients(0.05).unwrap());
        assert!(b <= a);
    }

    #[test]
    fn sweep_vanishes_at_nodes() {
        let zs = z_grid(DEFAULT_ZGRID);
        let r = error_sweep(SpaceOrder::new(1).unwrap(), 5, TestFunction::Sin, &zs).unwrap();
        for (z, e) in r.z_grid.iter().zip(&r.abs_errors) {
            if ((z * 5.0).round() - z * 5.0).abs() < 1e-12 {
                assert!(*e < 1e-12, "z={z}: {e}");
            }
        }
        assert_eq!(r.max_error, r.abs_errors.iter().copied().fold(0.0, f64::max));
        assert!(r.norm_values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn errors_bounded_by_norm_times_seminorm() {
        for (m, n) in [(1, 5), (2, 5), (3, 10)] {
            let it = interp(m, n);
            let bound = TestFunction::Sin.seminorm(it.grid().m());
            let r = it.error_sweep(TestFunction::Sin, &z_grid(41)).unwrap();
            // absolute floor: coefficients are accurate to 1e-9
            for (e, nv) in r.abs_errors.iter().zip(&r.norm_values) {
                assert!(*e <= bound * nv * (1.0 + 1e-9) + 1e-9, "m={m} n={n}: {e} > {}", bound * nv);
            }
        }
    }

    #[test]
    fn z_grid_endpoints() {
        let g = z_grid(201);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[200], 1.0);
        assert_eq!(g[100], 0.5);
    }
}
