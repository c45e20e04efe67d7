//! Closed-form geometric sums over one tail of the extended `u_m`.

use num_complex::Complex64;

use crate::kernel::{binomial, delta_powers};

/// `sum_{t>=1} t^j l^t` for `|l| < 1`.
pub(crate) fn power_sum(l: Complex64, j: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let q = one / (one - l);
    if j == 0 {
        return l * q;
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut lp = l * q * q;
    for nu in 1..=j {
        total += lp * delta_powers(nu, j);
        lp *= l * q;
    }
    total
}

/// Coefficients in `g` of `sum_i c_i (1 + h g)^i`, padded to `len`.
pub(crate) fn shifted_poly(c: impl Iterator<Item = f64>, h: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, ci) in c.enumerate() {
        for (j, slot) in out.iter_mut().enumerate().take(i + 1) {
            *slot += ci * binomial(i, j) * h.powi(j as i32);
        }
    }
    out
}

/// `sum_{t>=1} l^t e^(c t)`.
fn exp_sum(l: Complex64, c: f64) -> Complex64 {
    let r = l * c.exp();
    assert!(r.norm() < 1.0, "divergent exponential tail sum");
    r / (Complex64::new(1.0, 0.0) - r)
}

/// `f(g) = exp_pos e^(hg) + exp_neg e^(-hg) + sum_i poly[i] g^i` on `g >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct TailFunction {
    pub exp_pos: f64,
    pub exp_neg: f64,
    pub poly: Vec<f64>,
}

impl TailFunction {
    pub fn eval(&self, g: f64, h: f64) -> f64 {
        let poly = self.poly.iter().rev().fold(0.0, |acc, &c| acc * g + c);
        self.exp_pos * (h * g).exp() + self.exp_neg * (-h * g).exp() + poly
    }

    /// `sum_{g>=1} l^|b-g| f(g)`.
    pub fn geometric(&self, l: Complex64, b: usize, h: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for g in 1..=b {
            total += l.powu((b - g) as u32) * self.eval(g as f64, h);
        }
        // sum_{t>=1} l^t f(b+t)
        let bf = b as f64;
        total += exp_sum(l, h) * (self.exp_pos * (h * bf).exp());
        total += exp_sum(l, -h) * (self.exp_neg * (-h * bf).exp());
        for j in 0..self.poly.len() {
            let c: f64 = (j..self.poly.len())
                .map(|i| self.poly[i] * binomial(i, j) * bf.powi((i - j) as i32))
                .sum();
            if c != 0.0 {
                total += power_sum(l, j) * c;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sums_match_series() {
        let l = Complex64::new(-0.2, 0.35);
        for j in 0..6 {
            let brute: Complex64 = (1..3000).map(|t| l.powu(t) * (t as f64).powi(j as i32)).sum();
            assert!((brute - power_sum(l, j)).norm() < 1e-13, "j={j}");
        }
    }

    #[test]
    fn geometric_matches_series() {
        let f = TailFunction {
            exp_pos: 0.3,
            exp_neg: -1.1,
            poly: vec![0.5, -0.25, 0.125, 0.01],
        };
        let h = 0.1;
        let l = Complex64::new(0.3, -0.2);
        for b in 0..4usize {
            let brute: Complex64 = (1..3000usize)
                .map(|g| l.powu(b.abs_diff(g) as u32) * f.eval(g as f64, h))
                .sum();
            assert!((brute - f.geometric(l, b, h)).norm() < 1e-11, "b={b}");
        }
    }
}
