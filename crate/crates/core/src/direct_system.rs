//! Dense solution of the Lagrange optimality system for the coefficients
//! `C_b(z)`, the multipliers `p_a(z)` and `d(z)`, plus the squared norm of the
//! error functional.
//!
//! Unknown order: `C_0 .. C_N`, `p_0 .. p_(m-2)`, `d`. Rows `0..=N` are the
//! stationarity conditions
//! `sum_g C_g G_m(x_b - x_g) + sum_a p_a x_b^a + d e^(-x_b) = G_m(z - x_b)`,
//! followed by the `m - 1` polynomial moment conditions and the exponential
//! moment condition.

use log::warn;

use crate::error::{Error, Result};
use crate::kernel::{green_kernel, SpaceOrder};
use crate::linalg::{solve_refined, Matrix};

const PIVOT_TOL: f64 = 1e-13;
const CONDITION_WARN: f64 = 1e12;
const CONSTRAINT_TOL: f64 = 1e-8;
const NEGATIVE_NORM_TOL: f64 = 1e-12;

/// Equally spaced nodes `x_b = b h`, `h = 1/N`, `b = 0 ..= N`.
///
/// Each node is the correctly rounded quotient `b / N`, so it coincides with
/// any other correctly rounded representation of the same rational point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    m: SpaceOrder,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl GridSpec {
    /// Requires `N >= 1` and `N + 1 >= m`.
    pub fn new(m: SpaceOrder, n: usize) -> Result<Self> {
        if n == 0 || n + 1 < m.get() {
            return Err(Error::InvalidGrid { n, m: m.get() });
        }
        let h = 1.0 / n as f64;
        let nodes = (0..=n).map(|b| b as f64 / n as f64).collect();
        Ok(Self { m, n, h, nodes })
    }

    pub fn m(&self) -> SpaceOrder {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Size of the Lagrange system, `N + m + 1`.
    pub fn system_dim(&self) -> usize {
        self.n + self.m.get() + 1
    }

    /// Index of the node equal to `z` (within `tol`), if any.
    pub fn node_index(&self, z: f64, tol: f64) -> Option<usize> {
        let b = (z / self.h).round();
        if b >= 0.0 && b <= self.n as f64 && (z - b * self.h).abs() <= tol {
            Some(b as usize)
        } else {
            None
        }
    }
}

/// Coefficients `C_0(z) .. C_N(z)` with the Lagrange quantities that
/// accompany them.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    pub z: f64,
    pub coeffs: Vec<f64>,
    /// `p_0(z) .. p_(m-2)(z)`.
    pub lagrange_poly: Vec<f64>,
    /// `d(z)`.
    pub lagrange_exp: f64,
}

impl CoefficientVector {
    /// Largest deviation from the exactness conditions
    /// `sum_b C_b x_b^a = z^a` (`a <= m-2`) and `sum_b C_b e^(-x_b) = e^(-z)`,
    /// reported as `(row, deviation)` with the exponential row last.
    pub fn constraint_residuals(&self, grid: &GridSpec) -> Vec<f64> {
        let m = grid.m.get();
        let mut out = Vec::with_capacity(m);
        for alpha in 0..m - 1 {
            let s: f64 = self
                .coeffs
                .iter()
                .zip(&grid.nodes)
                .map(|(c, x)| c * x.powi(alpha as i32))
                .sum();
            out.push(s - self.z.powi(alpha as i32));
        }
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&grid.nodes)
            .map(|(c, x)| c * (-x).exp())
            .sum();
        out.push(s - (-self.z).exp());
        out
    }
}

fn check_point(z: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::PointOutOfRange(z));
    }
    Ok(())
}

/// Builds the symmetric Lagrange matrix and right-hand side for point `z`.
pub fn assemble(grid: &GridSpec, z: f64) -> Result<(Matrix, Vec<f64>)> {
    check_point(z)?;
    let m = grid.m.get();
    let n = grid.n;
    let dim = grid.system_dim();
    let mut a = Matrix::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    let x = &grid.nodes;
    for b in 0..=n {
        for g in 0..=n {
            a[(b, g)] = green_kernel(grid.m, x[b] - x[g]);
        }
        for alpha in 0..m - 1 {
            let v = x[b].powi(alpha as i32);
            a[(b, n + 1 + alpha)] = v;
            a[(n + 1 + alpha, b)] = v;
        }
        let e = (-x[b]).exp();
        a[(b, dim - 1)] = e;
        a[(dim - 1, b)] = e;
        rhs[b] = green_kernel(grid.m, z - x[b]);
    }
    for alpha in 0..m - 1 {
        rhs[n + 1 + alpha] = z.powi(alpha as i32);
    }
    rhs[dim - 1] = (-z).exp();
    Ok((a, rhs))
}

/// Solves the Lagrange system densely.
///
/// The kernel block is scaled to unit magnitude before elimination, so the
/// pivot test is meaningful on fine grids where `G_m(h)` is tiny.
pub fn solve_direct(grid: &GridSpec, z: f64) -> Result<CoefficientVector> {
    let (mut a, mut rhs) = assemble(grid, z)?;
    let n = grid.n;
    let dim = grid.system_dim();
    let scale = (0..=n)
        .flat_map(|b| (0..=n).map(move |g| (b, g)))
        .map(|(b, g)| a[(b, g)].abs())
        .fold(0.0f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    // Rows 0..=N divided by `scale`; multipliers become mu / scale.
    for b in 0..=n {
        for g in 0..=n {
            a[(b, g)] /= scale;
        }
        rhs[b] /= scale;
    }
    let (sol, lu) = solve_refined(&a, &rhs, PIVOT_TOL).map_err(|e| Error::SingularSystem {
        step: e.step,
        pivot: e.pivot,
    })?;
    let ratio = lu.pivot_ratio();
    if ratio > CONDITION_WARN {
        warn!(
            "Lagrange system for m = {}, N = {n}, z = {z} is poorly conditioned (pivot ratio {ratio:.2e})",
            grid.m
        );
    }
    let m = grid.m.get();
    Ok(CoefficientVector {
        z,
        coeffs: sol[..=n].to_vec(),
        lagrange_poly: sol[n + 1..n + m].iter().map(|v| v * scale).collect(),
        lagrange_exp: sol[dim - 1] * scale,
    })
}

/// Squared norm of the error functional for the given coefficients:
/// `(-1)^m (sum_b sum_g C_b C_g G_m(x_b - x_g) - 2 sum_b C_b G_m(z - x_b))`.
///
/// Values in `[-1e-12, 0)` are clamped to zero.
pub fn norm_squared(grid: &GridSpec, cv: &CoefficientVector) -> Result<f64> {
    if cv.coeffs.len() != grid.n + 1 {
        return Err(Error::GridMismatch {
            samples: grid.n + 1,
            coeffs: cv.coeffs.len(),
        });
    }
    for (row, dev) in cv.constraint_residuals(grid).into_iter().enumerate() {
        if dev.abs() > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation { row, deviation: dev });
        }
    }
    let x = &grid.nodes;
    let c = &cv.coeffs;
    let mut quad = crate::kernel::Neumaier::default();
    for b in 0..=grid.n {
        let mut inner = 0.0;
        for g in 0..=grid.n {
            inner += c[g] * green_kernel(grid.m, x[b] - x[g]);
        }
        quad.add(c[b] * inner);
        quad.add(-2.0 * c[b] * green_kernel(grid.m, cv.z - x[b]));
    }
    let sign = if grid.m.get().is_multiple_of(2) { 1.0 } else { -1.0 };
    let value = sign * quad.sum();
    if value < -NEGATIVE_NORM_TOL {
        return Err(Error::NegativeNorm(value));
    }
    Ok(value.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize, n: usize) -> GridSpec {
        GridSpec::new(SpaceOrder::new(m).unwrap(), n).unwrap()
    }

    #[test]
    fn grid_validation() {
        let m4 = SpaceOrder::new(4).unwrap();
        assert_eq!(GridSpec::new(m4, 2), Err(Error::InvalidGrid { n: 2, m: 4 }));
        assert!(GridSpec::new(m4, 3).is_ok());
        assert!(GridSpec::new(SpaceOrder::new(1).unwrap(), 0).is_err());
    }

    #[test]
    fn dimensions() {
        let (a, rhs) = assemble(&grid(1, 1), 0.5).unwrap();
        assert_eq!((a.rows(), rhs.len()), (3, 3));
        assert_eq!(a[(0, 0)], 0.0);
        assert_eq!(a[(1, 1)], 0.0);
        let (a, _) = assemble(&grid(3, 5), 0.5).unwrap();
        assert_eq!((a.rows(), a.cols()), (9, 9));
    }

    #[test]
    fn kernel_block_is_g2() {
        let g = grid(2, 5);
        let (a, rhs) = assemble(&g, 0.3).unwrap();
        for b in 0..=5 {
            for c in 0..=5 {
                let d = (g.nodes()[b] - g.nodes()[c]).abs();
                assert!((a[(b, c)] - 0.5 * (d.sinh() - d)).abs() < 1e-15);
                assert_eq!(a[(b, c)], a[(c, b)]);
            }
            let d: f64 = 0.3 - g.nodes()[b];
            assert!((rhs[b] - 0.5 * (d.abs().sinh() - d.abs())).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_point_outside_interval() {
        assert_eq!(solve_direct(&grid(2, 5), 1.5), Err(Error::PointOutOfRange(1.5)));
    }

    #[test]
    fn kronecker_at_node() {
        let g = grid(2, 5);
        let cv = solve_direct(&g, 0.6).unwrap();
        for (b, c) in cv.coeffs.iter().enumerate() {
            let expected = if b == 3 { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-10, "beta={b}: {c}");
        }
        assert!(cv.lagrange_poly[0].abs() < 1e-10);
    }

    #[test]
    fn satisfies_moment_conditions() {
        let g = grid(2, 5);
        let cv = solve_direct(&g, 0.25).unwrap();
        let sum: f64 = cv.coeffs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let e: f64 = cv.coeffs.iter().zip(g.nodes()).map(|(c, x)| c * (-x).exp()).sum();
        assert!((e - (-0.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn residual_is_small() {
        for (m, n) in [(1, 5), (2, 10), (3, 10), (3, 40)] {
            let g = grid(m, n);
            let (a, rhs) = assemble(&g, 0.37).unwrap();
            let cv = solve_direct(&g, 0.37).unwrap();
            let mut x = cv.coeffs.clone();
            x.extend(&cv.lagrange_poly);
            x.push(cv.lagrange_exp);
            let r = a.mul_vec(&x);
            let res = r.iter().zip(&rhs).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-10 * (1.0 + a.max_row_norm()), "m={m} n={n}: {res}");
        }
    }

    #[test]
    fn norm_vanishes_at_nodes() {
        for m in 1..=3 {
            let g = grid(m, 5);
            for b in 0..=5 {
                let cv = solve_direct(&g, g.nodes()[b]).unwrap();
                assert!(norm_squared(&g, &cv).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn norm_rejects_infeasible_coefficients() {
        let g = grid(2, 5);
        let mut cv = solve_direct(&g, 0.3).unwrap();
        cv.coeffs[0] += 1e-3;
        assert!(matches!(norm_squared(&g, &cv), Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn large_grid_is_solvable() {
        let g = grid(3, 200);
        let cv = solve_direct(&g, 0.123).unwrap();
        let dev = cv.constraint_residuals(&g).into_iter().map(f64::abs).fold(0.0, f64::max);
        assert!(dev < 1e-9, "{dev}");
    }
}
