//! Fully closed-form coefficients for `m = 2`: a single stable root, scalar
//! boundary unknowns `r_0^-`, `r_0^+` by Cramer's rule.

use crate::direct_system::{CoefficientVector, GridSpec};
use crate::error::{Error, Result};
use crate::kernel::green_kernel;

pub fn coeffs_m2_closed_form(grid: &GridSpec, z: f64) -> Result<CoefficientVector> {
    let m = grid.m();
    if m.get() != 2 {
        return Err(Error::WrongOrder {
            expected: 2,
            got: m.get(),
        });
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::PointOutOfRange(z));
    }
    let g2 = |x: f64| green_kernel(m, x);
    let n = grid.n();
    let h = grid.h();
    let e = std::f64::consts::E;
    let eh = h.exp();
    let e2h = (2.0 * h).exp();

    let disc = h * h * (eh + 1.0).powi(2) + 2.0 * h * (1.0 - e2h);
    let p = 1.0 - e2h + 2.0 * h * eh;
    let l = (h * (e2h + 1.0) - e2h + 1.0 - (eh - 1.0) * disc.sqrt()) / p;
    let big_c = 1.0 + 2.0 * eh + e2h - eh * (l * l + 1.0) / l;
    let a1 = 2.0 * (l - 1.0) * (l * (e2h + 1.0) - eh * (l * l + 1.0)) / (l + 1.0);
    let ln = l.powi(n as i32);

    // sum_{g>=1} l^g e^(c g) and sum_{g>=1} g l^g
    let geo = |c: f64| l * c.exp() / (1.0 - l * c.exp());
    let geo0 = l / (1.0 - l);
    let lin = l / (1.0 - l).powi(2);
    let sinh_pair = 2.0 * l * h.sinh() / (l * l + 1.0 - 2.0 * l * h.cosh());

    let b_minus = 2.0 * big_c * (1.0 - eh) - 2.0 * eh * (1.0 - e2h) + a1 / (l * l) * (geo0 - geo(h));
    let b_plus = a1 * l.powi(n as i32 + 1) * (eh - 1.0) / ((1.0 - l) * (eh - l));
    let a_minus_coef = a1 * ln * (geo0 - geo(h));
    let a_plus_coef = 2.0 * big_c * (1.0 - 1.0 / eh) - 2.0 * eh * (1.0 - 1.0 / e2h) + a1 / (l * l) * (geo0 - geo(-h));

    let grid_sum = |pow: &dyn Fn(usize) -> i32| -> f64 {
        (0..=n).map(|g| l.powi(pow(g)) * g2(z - h * g as f64)).sum()
    };

    let t1 = -((-z).exp() * (big_c * h.sinh() - eh * (2.0 * h).sinh())
        + g2(z) * (2.0 * big_c * eh - 2.0 * eh * (1.0 + e2h))
        - h * (big_c - 2.0 * eh))
        - a1 / l
            * (grid_sum(&|g| g as i32 + 1)
                + ((-z).exp() / 4.0 * (geo(h) - geo(-h)) + g2(z) * geo(h) - 0.5 * h * lin) / l
                + l.powi(n as i32 + 1)
                    * ((1.0 - z).exp() * l * h.sinh() / (2.0 * (l * l + 1.0 - 2.0 * l * h.cosh()))
                        + l * g2(z - 1.0) / (eh - l)
                        + 0.5 * (l * (1.0 - eh) / ((eh - l) * (1.0 - l)) - l * h / (1.0 - l).powi(2))));
    let s1 = -((1.0 - z).exp() * (big_c * h.sinh() - eh * (2.0 * h).sinh())
        + g2(z - 1.0) * (2.0 * big_c / eh - 2.0 * eh * (1.0 + 1.0 / e2h))
        + big_c * (1.0 / eh - 1.0 - h)
        - eh * (1.0 / e2h - 1.0 - 2.0 * h))
        - a1 / l
            * (grid_sum(&|g| (n - g) as i32 + 1)
                + ((1.0 - z).exp() / 4.0 * (geo(h) - geo(-h))
                    + g2(z - 1.0) * geo(-h)
                    + 0.5 * (geo(-h) - geo0 - h * lin))
                    / l
                + l.powi(n as i32 + 1)
                    * ((-z).exp() * sinh_pair / 4.0 + l * eh * g2(z) / (1.0 - eh * l) - l * h / (2.0 * (1.0 - l).powi(2))));

    let det = b_minus * a_plus_coef - b_plus * a_minus_coef;
    let r_minus = (t1 * a_plus_coef - s1 * b_plus) / det;
    let r_plus = (s1 * b_minus - t1 * a_minus_coef) / det;
    let a_minus = g2(z) + (-z).exp() / 4.0 - r_minus;
    let a_plus = e * (g2(z - 1.0) - (1.0 - z).exp() / 4.0 - r_plus + 0.5);

    let big_m = l * (-z).exp() / (4.0 * (l - eh)) + a_minus * l * eh / (1.0 - l * eh) - h * lin / 2.0
        + r_minus * geo0;
    let big_n = l * (1.0 - z + h).exp() / (4.0 * (1.0 - l * eh)) + a_plus * l / (e * (eh - l))
        - h * lin / 2.0
        - geo0 / 2.0
        + r_plus * geo0;

    let mut coeffs = Vec::with_capacity(n + 1);
    for beta in 0..=n {
        let x = h * beta as f64;
        let below = if beta == 0 {
            -0.25 * (-h - z).exp() + a_minus * eh - 0.5 * h + r_minus
        } else {
            g2(z - x + h)
        };
        let above = if beta == n {
            (1.0 + h - z).exp() / 4.0 + a_plus / (1.0 + h).exp() - 0.5 * (1.0 + h) + r_plus
        } else {
            g2(z - x - h)
        };
        let inner = grid_sum(&|g| beta.abs_diff(g) as i32)
            + l.powi(beta as i32) * big_m
            + l.powi((n - beta) as i32) * big_n;
        coeffs.push((2.0 * big_c * g2(z - x) - 2.0 * eh * (below + above) + a1 / l * inner) / p);
    }
    Ok(CoefficientVector {
        z,
        coeffs,
        lagrange_poly: vec![0.5 * (r_minus + r_plus)],
        lagrange_exp: 0.5 * (a_minus + a_plus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct_system::solve_direct;
    use crate::kernel::SpaceOrder;

    #[test]
    fn agrees_with_direct_solution() {
        for n in [1, 2, 5, 10, 40] {
            let grid = GridSpec::new(SpaceOrder::new(2).unwrap(), n).unwrap();
            for z in [0.0, 0.13, 0.5, 0.77, 1.0] {
                let a = coeffs_m2_closed_form(&grid, z).unwrap();
                let b = solve_direct(&grid, z).unwrap();
                let d = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(d < 1e-8, "n={n} z={z}: {d}");
            }
        }
    }
}
