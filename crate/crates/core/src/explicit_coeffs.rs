//! Closed-form optimal coefficients.
//!
//! With `u_m(h b) = G_m(z - h b)` on the grid and the piecewise extension
//!
//! ```text
//! b <= 0:  -e^(hb - z)/4 + a- e^(-hb) + Q(hb) + R-(hb)
//! b >= N:   e^(hb - z)/4 + a+ e^(-hb) - Q(hb) + R+(hb)
//! ```
//!
//! the coefficients are `C_b = (D_m * u_m)(h b)`. `Q` is known in closed form;
//! the polynomials `R-`, `R+` (degree `m-2`) follow from requiring
//! `D_m * u_m = 0` at the `2m-2` points just outside the grid, and `a-`, `a+`
//! from continuity at `b = 0` and `b = N`.
//!
//! All infinite sums `sum_{g>=1} l^|b-g| f(g)` over the tails are evaluated in
//! closed form for `f` in `{e^(hg), e^(-hg), g^i}`.

mod m2_closed_form;
mod segments;
mod tail;

use num_complex::Complex64;

pub use m2_closed_form::coeffs_m2_closed_form;

use crate::direct_system::{CoefficientVector, GridSpec};
use crate::discrete_operator::OperatorData;
use crate::error::{Error, Result};
use crate::kernel::{binomial, factorial, green_kernel, SpaceOrder};
use crate::linalg::{solve_refined, Matrix};
use segments::{Element, SegmentContext};
use tail::power_sum;

const BOUNDARY_PIVOT_TOL: f64 = 1e-13;
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Coefficients `q_0 ..= q_(2m-3)` of the known polynomial part `Q_(2m-3)`.
///
/// Each inner sum over `a` runs to `2k-1` while `k < floor((m+1)/2)` and is cut
/// at `m-2` beyond, so only the moments fixed by exactness enter.
pub fn q_coeffs(m: SpaceOrder, z: f64) -> Vec<f64> {
    let m = m.get();
    if m < 2 {
        return Vec::new();
    }
    let mut q = vec![0.0; 2 * m - 2];
    let split = m.div_ceil(2);
    for k in 1..m {
        let top = if k < split { 2 * k - 1 } else { m - 2 };
        for alpha in 0..=top {
            let power = 2 * k - 1 - alpha;
            let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
            q[power] += 0.5 * sign * z.powi(alpha as i32) / (factorial(power) * factorial(alpha));
        }
    }
    q
}

/// Unknowns of the boundary problem at one evaluation point.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTail {
    pub z: f64,
    pub q: Vec<f64>,
    pub r_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub a_minus: f64,
    pub a_plus: f64,
    /// `M_k = sum_{g>=1} l_k^g u_m(-h g)`.
    pub big_m: Vec<Complex64>,
    /// `N_k = sum_{g>=1} l_k^g u_m(1 + h g)`.
    pub big_n: Vec<Complex64>,
    /// Multiplier `d = (a- + a+)/2`.
    pub d_lag: f64,
    /// `D = (a- - a+)/2`.
    pub d_cap: f64,
}

impl BoundaryTail {
    /// `P_(m-2)` coefficients, `(r- + r+)/2`.
    pub fn lagrange_poly(&self) -> Vec<f64> {
        self.r_minus
            .iter()
            .zip(&self.r_plus)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// `u_m(h b)` for any integer `b`.
    pub fn u(&self, grid: &GridSpec, beta: i64) -> f64 {
        let h = grid.h();
        let m = grid.m();
        let n = grid.n() as i64;
        let x = h * beta as f64;
        let z = self.z;
        if (0..=n).contains(&beta) {
            return green_kernel(m, z - x);
        }
        let poly = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &v| acc * x + v);
        if beta < 0 {
            -0.25 * (x - z).exp() + self.a_minus * (-x).exp() + poly(&self.q) + poly(&self.r_minus)
        } else {
            0.25 * (x - z).exp() + self.a_plus * (-x).exp() - poly(&self.q) + poly(&self.r_plus)
        }
    }
}

/// Terms of `-(1/2) sum_k (z - x)^(2k-1)/(2k-1)!` (as a polynomial in `x`)
/// that `Q_(2m-3)` leaves out.
fn dropped_terms(m: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; 2 * m - 2];
    let split = m.div_ceil(2);
    for k in 1..m {
        let top = if k < split { 2 * k - 1 } else { m - 2 };
        for alpha in top + 1..=2 * k - 1 {
            let i = 2 * k - 1 - alpha;
            let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
            out[i] += 0.5 * sign * z.powi(alpha as i32) / (factorial(i) * factorial(alpha));
        }
    }
    out
}

/// `d_L = k_L - k_A` and `d_R = k_R - k_B` for `r- = r+ = 0`.
fn known_elements(m: usize, z: f64) -> (Element, Element) {
    let dropped = dropped_terms(m, z);
    let dl = Element {
        en: dropped[0],
        poly: dropped.iter().map(|v| -v).collect(),
    };
    let dr = Element {
        en: -std::f64::consts::E * dropped.iter().sum::<f64>(),
        poly: dropped,
    };
    (dl, dr)
}

/// Response of `d_L` (left) or `d_R` (right) to a unit `r_i`.
fn unit_element(i: usize, len: usize, right: bool) -> Element {
    let mut poly = vec![0.0; len];
    poly[i] = 1.0;
    let en = if right {
        -std::f64::consts::E
    } else if i == 0 {
        -1.0
    } else {
        0.0
    };
    Element { en, poly }
}

/// `d_L`, `d_R` for the solved tail.
fn tail_elements(m: usize, t: &BoundaryTail) -> (Element, Element) {
    let (mut dl, mut dr) = known_elements(m, t.z);
    let len = dl.poly.len();
    for (i, (&rm, &rp)) in t.r_minus.iter().zip(&t.r_plus).enumerate() {
        dl.add_scaled(&unit_element(i, len, false), rm);
        dr.add_scaled(&unit_element(i, len, true), rp);
    }
    (dl, dr)
}

/// Solves for `r-`, `r+`, then `a-`, `a+`, `M_k`, `N_k` at point `z`.
///
/// For `m = 1` there is nothing to solve: `a- = e^z/4`, `a+ = -e^z/4`.
pub fn boundary_systems(op: &OperatorData, grid: &GridSpec, z: f64) -> Result<BoundaryTail> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::PointOutOfRange(z));
    }
    let m = grid.m();
    let mi = m.get();
    if op.m() != m {
        return Err(Error::WrongOrder {
            expected: mi,
            got: op.m().get(),
        });
    }
    if mi == 1 {
        let a = 0.25 * z.exp();
        return Ok(BoundaryTail {
            z,
            q: Vec::new(),
            r_minus: Vec::new(),
            r_plus: Vec::new(),
            a_minus: a,
            a_plus: -a,
            big_m: Vec::new(),
            big_n: Vec::new(),
            d_lag: 0.0,
            d_cap: a,
        });
    }
    let h = grid.h();
    for l in op.roots() {
        assert!((l * h.exp()).norm() < 1.0, "|l e^h| must be below 1 for the tail sums");
    }
    let n = grid.n() as i64;
    let q = q_coeffs(m, z);
    let dim = 2 * mi - 2;
    let len = q.len();
    let ctx = SegmentContext::new(op, grid, z);
    let rows: Vec<i64> = (1..mi as i64).map(|b| -b).chain((1..mi as i64).map(|b| n + b)).collect();

    let (dl0, dr0) = known_elements(mi, z);
    let tails0 = ctx.tails(&dl0, &dr0);
    let rhs: Vec<f64> = rows.iter().map(|&b| -ctx.apply(b, 1.0, &dl0, &dr0, &tails0)).collect();
    let empty = Element::zero(len);
    let mut matrix = Matrix::zeros(dim, dim);
    for i in 0..mi - 1 {
        let ul = unit_element(i, len, false);
        let ur = unit_element(i, len, true);
        let tl = ctx.tails(&ul, &empty);
        let tr = ctx.tails(&empty, &ur);
        for (row, &b) in rows.iter().enumerate() {
            matrix[(row, i)] = ctx.apply(b, 0.0, &ul, &empty, &tl);
            matrix[(row, mi - 1 + i)] = ctx.apply(b, 0.0, &empty, &ur, &tr);
        }
    }
    let (sol, _) = solve_refined(&matrix, &rhs, BOUNDARY_PIVOT_TOL).map_err(|e| {
        Error::SingularBoundarySystem {
            step: e.step,
            pivot: e.pivot,
        }
    })?;
    let r_minus = sol[..mi - 1].to_vec();
    let r_plus = sol[mi - 1..].to_vec();

    let a_minus = green_kernel(m, z) + 0.25 * (-z).exp() - q[0] - r_minus[0];
    let a_plus = std::f64::consts::E
        * (green_kernel(m, z - 1.0) - 0.25 * (1.0 - z).exp() + q.iter().sum::<f64>()
            - r_plus.iter().sum::<f64>());

    let mut tail = BoundaryTail {
        z,
        q,
        r_minus,
        r_plus,
        a_minus,
        a_plus,
        big_m: Vec::new(),
        big_n: Vec::new(),
        d_lag: 0.5 * (a_minus + a_plus),
        d_cap: 0.5 * (a_minus - a_plus),
    };
    tail.big_m = op.roots().iter().map(|&l| big_m_k(&tail, h, z, l)).collect();
    tail.big_n = op.roots().iter().map(|&l| big_n_k(&tail, h, z, l)).collect();
    Ok(tail)
}

fn real_part(v: Complex64, magnitude: f64) -> f64 {
    assert!(
        v.im.abs() <= IMAG_RESIDUE_TOL * magnitude.max(1.0),
        "imaginary residue {} in a real quantity",
        v.im
    );
    v.re
}

fn big_m_k(t: &BoundaryTail, h: f64, z: f64, l: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let eh = h.exp();
    let mut v = l * (-z).exp() / ((l - eh) * 4.0) + l * t.a_minus * eh / (one - l * eh);
    for (i, &qi) in t.q.iter().enumerate().skip(1) {
        v += power_sum(l, i) * qi * (-h).powi(i as i32);
    }
    v += l * t.q[0] / (one - l);
    for (i, &ri) in t.r_minus.iter().enumerate().skip(1) {
        v += power_sum(l, i) * ri * (-h).powi(i as i32);
    }
    v + l * t.r_minus[0] / (one - l)
}

fn big_n_k(t: &BoundaryTail, h: f64, z: f64, l: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let eh = h.exp();
    let e = std::f64::consts::E;
    let shifted = |i: usize| -> Complex64 {
        (1..=i)
            .map(|j| power_sum(l, j) * binomial(i, j) * h.powi(j as i32))
            .sum()
    };
    let mut v = l * (1.0 - z + h).exp() / ((one - l * eh) * 4.0) + l * t.a_plus / ((eh - l) * e);
    for (i, &qi) in t.q.iter().enumerate().skip(1) {
        v -= shifted(i) * qi;
    }
    v -= l / (one - l) * t.q.iter().sum::<f64>();
    for (i, &ri) in t.r_plus.iter().enumerate().skip(1) {
        v += shifted(i) * ri;
    }
    v + l / (one - l) * t.r_plus.iter().sum::<f64>()
}

/// Closed-form coefficients for `m >= 2` from a solved boundary tail.
pub fn coeffs_general(
    op: &OperatorData,
    grid: &GridSpec,
    tail: &BoundaryTail,
    z: f64,
) -> Result<CoefficientVector> {
    let m = grid.m().get();
    if m < 2 {
        return Err(Error::WrongOrder { expected: 2, got: m });
    }
    let ctx = SegmentContext::new(op, grid, z);
    let (dl, dr) = tail_elements(m, tail);
    let tails = ctx.tails(&dl, &dr);
    let p = op.leading();
    let coeffs = (0..=grid.n() as i64)
        .map(|b| ctx.apply(b, 1.0, &dl, &dr, &tails) / p)
        .collect();
    Ok(CoefficientVector {
        z,
        coeffs,
        lagrange_poly: tail.lagrange_poly(),
        lagrange_exp: tail.d_lag,
    })
}

/// Coefficients from the expanded closed form
/// `C_b = (1/p) { 2C u(b) - 2e^h (u(b-1) + u(b+1))
///               + sum_k A_k/l_k [ sum_g l_k^|b-g| G_m(z - h g) + l_k^b M_k + l_k^(N-b) N_k ] }`.
///
/// Its terms cancel down to `p C_b`, so it loses about `log10(1/|p|)` digits;
/// [`coeffs_general`] evaluates the same quantity without that cancellation.
pub fn coeffs_expanded(
    op: &OperatorData,
    grid: &GridSpec,
    tail: &BoundaryTail,
    z: f64,
) -> Result<CoefficientVector> {
    let m = grid.m();
    if m.get() < 2 {
        return Err(Error::WrongOrder {
            expected: 2,
            got: m.get(),
        });
    }
    let n = grid.n();
    let h = grid.h();
    let eh = h.exp();
    let p = op.leading();
    let big_c = op.big_c();
    let gvals: Vec<f64> = (0..=n).map(|g| green_kernel(m, z - h * g as f64)).collect();
    let u_left = tail.u(grid, -1);
    let u_right = tail.u(grid, n as i64 + 1);

    let mut coeffs = Vec::with_capacity(n + 1);
    for beta in 0..=n {
        let below = if beta == 0 { u_left } else { gvals[beta - 1] };
        let above = if beta == n { u_right } else { gvals[beta + 1] };
        let local = 2.0 * big_c * gvals[beta] - 2.0 * eh * (below + above);
        let mut geo = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for (k, (&l, &a)) in op.roots().iter().zip(op.amps()).enumerate() {
            let mut inner: Complex64 = gvals
                .iter()
                .enumerate()
                .map(|(g, &v)| l.powu(beta.abs_diff(g) as u32) * v)
                .sum();
            inner += l.powu(beta as u32) * tail.big_m[k] + l.powu((n - beta) as u32) * tail.big_n[k];
            let term = a / l * inner;
            magnitude += term.norm();
            geo += term;
        }
        coeffs.push((local + real_part(geo, magnitude)) / p);
    }
    Ok(CoefficientVector {
        z,
        coeffs,
        lagrange_poly: tail.lagrange_poly(),
        lagrange_exp: tail.d_lag,
    })
}

/// Closed-form coefficients for `m = 1`.
pub fn coeffs_m1(grid: &GridSpec, z: f64) -> Result<CoefficientVector> {
    if grid.m().get() != 1 {
        return Err(Error::WrongOrder {
            expected: 1,
            got: grid.m().get(),
        });
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::PointOutOfRange(z));
    }
    let h = grid.h();
    let sgn = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    let e2h = (2.0 * h).exp();
    let denom = -2.0 * (2.0 * h).exp_m1();
    let coeffs = grid
        .nodes()
        .iter()
        .map(|&x| {
            let t1 = sgn(z - x - h) * ((x + 2.0 * h - z).exp() - (z - x).exp());
            let t2 = sgn(z - x + h) * ((x - z).exp() - (z - x + 2.0 * h).exp());
            let t3 = (1.0 + e2h) * sgn(z - x) * ((z - x).exp() - (x - z).exp());
            (t1 + t2 + t3) / denom
        })
        .collect();
    Ok(CoefficientVector {
        z,
        coeffs,
        lagrange_poly: Vec::new(),
        lagrange_exp: 0.0,
    })
}

/// Explicit coefficients for any order: the three-point formula for `m = 1`,
/// the boundary-tail pipeline otherwise.
pub fn explicit_coefficients(op: &OperatorData, grid: &GridSpec, z: f64) -> Result<CoefficientVector> {
    if grid.m().get() == 1 {
        return coeffs_m1(grid, z);
    }
    let tail = boundary_systems(op, grid, z)?;
    coeffs_general(op, grid, &tail, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct_system::solve_direct;
    use crate::discrete_operator::{build_operator, convolve};

    fn setup(m: usize, n: usize) -> (OperatorData, GridSpec) {
        let m = SpaceOrder::new(m).unwrap();
        (build_operator(m, n).unwrap(), GridSpec::new(m, n).unwrap())
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn q_for_m2_and_m3() {
        let m2 = SpaceOrder::new(2).unwrap();
        assert_eq!(q_coeffs(m2, 0.0), vec![0.0, 0.5]);
        assert_eq!(q_coeffs(m2, 0.7), vec![0.0, 0.5]);
        let q = q_coeffs(SpaceOrder::new(3).unwrap(), 0.3);
        let expected = [-0.15, 0.5, -0.075, 1.0 / 12.0];
        assert!(max_diff(&q, &expected) < 1e-16, "{q:?}");
    }

    #[test]
    fn m1_tail_bypass() {
        let (op, grid) = setup(1, 5);
        let t = boundary_systems(&op, &grid, 0.3).unwrap();
        assert_eq!(t.a_minus, 0.25 * 0.3f64.exp());
        assert_eq!(t.a_plus, -0.25 * 0.3f64.exp());
        assert_eq!(t.d_lag, 0.0);
        assert_eq!(t.d_cap, 0.25 * 0.3f64.exp());
    }

    #[test]
    fn m1_matches_direct() {
        let (_, grid) = setup(1, 5);
        for z in [0.0, 0.1, 0.3, 0.55, 0.9, 1.0] {
            let a = coeffs_m1(&grid, z).unwrap();
            let b = solve_direct(&grid, z).unwrap();
            assert!(max_diff(&a.coeffs, &b.coeffs) < 1e-10, "z={z}");
        }
    }

    #[test]
    fn m1_at_origin_is_unit_vector() {
        let (_, grid) = setup(1, 5);
        let c = coeffs_m1(&grid, 0.0).unwrap();
        assert!((c.coeffs[0] - 1.0).abs() < 1e-15);
        assert!(c.coeffs[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn general_matches_direct() {
        for (m, n) in [(2, 5), (2, 10), (3, 5), (3, 10), (4, 5), (2, 1), (3, 2)] {
            let (op, grid) = setup(m, n);
            for z in [0.0, 0.05, 0.25, 0.4, 0.5, 0.7, 0.95, 1.0] {
                let a = explicit_coefficients(&op, &grid, z).unwrap();
                let b = solve_direct(&grid, z).unwrap();
                let d = max_diff(&a.coeffs, &b.coeffs);
                assert!(d < 1e-8, "m={m} n={n} z={z}: {d}");
                assert!((a.lagrange_exp - b.lagrange_exp).abs() < 1e-7, "d: m={m} n={n} z={z}");
                let dp = max_diff(&a.lagrange_poly, &b.lagrange_poly);
                assert!(dp < 1e-7, "p: m={m} n={n} z={z}: {dp}");
            }
        }
    }

    #[test]
    fn tail_sums_match_truncated_series() {
        let (op, grid) = setup(3, 10);
        let z = 0.3;
        let t = boundary_systems(&op, &grid, z).unwrap();
        for (k, &l) in op.roots().iter().enumerate() {
            let mut m_sum = Complex64::new(0.0, 0.0);
            let mut n_sum = Complex64::new(0.0, 0.0);
            for g in 1..400i64 {
                m_sum += l.powu(g as u32) * t.u(&grid, -g);
                n_sum += l.powu(g as u32) * t.u(&grid, 10 + g);
            }
            assert!((m_sum - t.big_m[k]).norm() < 1e-12, "M_{k}");
            assert!((n_sum - t.big_n[k]).norm() < 1e-12, "N_{k}");
        }
    }

    #[test]
    fn extended_u_is_annihilated_outside() {
        for (m, n) in [(2, 5), (3, 5), (3, 10)] {
            let (op, grid) = setup(m, n);
            let values = op.values(op.truncation_radius());
            let t = boundary_systems(&op, &grid, 0.3).unwrap();
            let mut points: Vec<i64> = (1..m as i64).map(|b| -b).collect();
            points.extend((1..m as i64).map(|b| n as i64 + b));
            for beta in points {
                let r = convolve(&values, beta, |g| t.u(&grid, g));
                assert!(r.abs() < 1e-8, "m={m} n={n} beta={beta}: {r}");
            }
        }
    }

    #[test]
    fn two_closed_forms_agree_for_m2() {
        for n in [1, 5, 10, 50] {
            let (op, grid) = setup(2, n);
            for i in 0..=20 {
                let z = i as f64 / 20.0;
                let a = explicit_coefficients(&op, &grid, z).unwrap();
                let b = coeffs_m2_closed_form(&grid, z).unwrap();
                let d = max_diff(&a.coeffs, &b.coeffs);
                assert!(d < 1e-9, "n={n} z={z}: {d}");
            }
        }
    }

    #[test]
    fn expanded_form_matches_segment_form() {
        for (m, n) in [(2, 5), (2, 10), (3, 5)] {
            let (op, grid) = setup(m, n);
            for z in [0.0, 0.3, 0.61, 1.0] {
                let tail = boundary_systems(&op, &grid, z).unwrap();
                let a = coeffs_general(&op, &grid, &tail, z).unwrap();
                let b = coeffs_expanded(&op, &grid, &tail, z).unwrap();
                let d = max_diff(&a.coeffs, &b.coeffs);
                assert!(d < 1e-8, "m={m} n={n} z={z}: {d}");
            }
        }
    }

    #[test]
    fn kronecker_at_nodes() {
        // rounding in p * C_b is amplified by 1/|p|, |p| ~ h^(2m-1)
        for (m, n) in [(2, 10), (3, 10), (2, 100), (3, 40), (4, 10)] {
            let (op, grid) = setup(m, n);
            let tol = f64::max(1e-9, 1e3 * f64::EPSILON / op.leading().abs());
            for k in 0..=n {
                let c = explicit_coefficients(&op, &grid, grid.nodes()[k]).unwrap();
                for (b, v) in c.coeffs.iter().enumerate() {
                    let target = if b == k { 1.0 } else { 0.0 };
                    assert!((v - target).abs() < tol, "m={m} n={n} node {k} coeff {b}: {v}");
                }
            }
        }
    }

    #[test]
    fn three_point_formula_rejects_higher_order() {
        let (_, grid) = setup(2, 5);
        assert!(matches!(coeffs_m1(&grid, 0.3), Err(Error::WrongOrder { .. })));
    }
}
