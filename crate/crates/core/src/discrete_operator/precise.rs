//! Double-double evaluation of `D_m(h b)`.
//!
//! `D_m` values are `O(1)` sums divided by `p ~ h^(2m-1)`; in binary64 their
//! rounding errors are amplified by `1/p` in every convolution. The pieces
//! are carried in double-double so the stored values are correctly rounded.

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

pub(crate) type Dd = TwoFloat;
pub(crate) type CDd = Complex<TwoFloat>;

const NEWTON_STEPS: usize = 4;

pub(crate) fn dd(x: f64) -> Dd {
    Dd::from(x)
}

pub(crate) fn cdd(z: Complex64) -> CDd {
    CDd::new(dd(z.re), dd(z.im))
}

pub(crate) fn round(z: CDd) -> Complex64 {
    Complex64::new(z.re.hi(), z.im.hi())
}

/// `a / b` to double-double accuracy. `TwoFloat / TwoFloat` in twofloat 0.8
/// forms its reciprocal residual without a fused multiply-add and returns
/// only binary64 accuracy, so one residual correction is applied.
pub(crate) fn div(a: Dd, b: Dd) -> Dd {
    let q = a / b;
    q + (a - q * b) / b.hi()
}

pub(crate) fn cdiv(a: CDd, b: CDd) -> CDd {
    let den = b.re * b.re + b.im * b.im;
    let num = a * b.conj();
    CDd::new(div(num.re, den), div(num.im, den))
}

fn eval_with_derivative(coeffs: &[Dd], x: CDd) -> (CDd, CDd) {
    let zero = CDd::new(dd(0.0), dd(0.0));
    let mut p = zero;
    let mut d = zero;
    for &c in coeffs.iter().rev() {
        d = d * x + p;
        p = p * x + CDd::new(c, dd(0.0));
    }
    (p, d)
}

/// Newton steps in double-double from a binary64 root.
pub(crate) fn polish(coeffs: &[Dd], root: Complex64) -> (CDd, CDd) {
    let mut x = cdd(root);
    for _ in 0..NEWTON_STEPS {
        let (p, d) = eval_with_derivative(coeffs, x);
        x -= p / d;
    }
    let (_, d) = eval_with_derivative(coeffs, x);
    (x, d)
}

/// The ingredients of `D_m` for `m >= 2`.
#[derive(Clone, Debug)]
pub(crate) struct PreciseOperator {
    pub lead: Dd,
    pub big_c: Dd,
    pub eh: Dd,
    pub roots: Vec<CDd>,
    /// `A_k / l_k`.
    pub weights: Vec<CDd>,
}

impl PreciseOperator {
    /// `D_m(h b)` rounded once, with the imaginary residue of the
    /// geometric part and the magnitude of its terms.
    pub fn value(&self, beta: i64) -> (f64, f64, f64) {
        let ab = beta.unsigned_abs();
        let terms = self.weights.iter().zip(&self.roots).map(|(&w, &l)| match ab {
            0 => w,
            _ => w * l.powu(ab as u32),
        });
        self.combine(ab, terms)
    }

    /// `D_m(h b)` for `b = 0 ..= radius` with running powers.
    pub fn values(&self, radius: usize) -> Vec<f64> {
        let mut powers = self.weights.clone();
        let mut out = Vec::with_capacity(radius + 1);
        for b in 0..=radius as u64 {
            if b > 0 {
                for (p, &l) in powers.iter_mut().zip(&self.roots) {
                    *p *= l;
                }
            }
            out.push(self.combine(b, powers.iter().copied()).0);
        }
        out
    }

    fn combine(&self, ab: u64, terms: impl Iterator<Item = CDd>) -> (f64, f64, f64) {
        let mut geometric = CDd::new(dd(0.0), dd(0.0));
        let mut magnitude = 0.0;
        for t in terms {
            magnitude += round(t).norm();
            geometric += t;
        }
        let local = match ab {
            0 => self.big_c * 2.0,
            1 => self.eh * -2.0,
            _ => dd(0.0),
        };
        magnitude += local.hi().abs();
        (div(local + geometric.re, self.lead).hi(), geometric.im.hi(), magnitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_reaches_double_double() {
        let q = div(dd(1.0), dd(3.0));
        // 1/3 - fl(1/3) = 1/(3 * 2^54)
        assert_eq!(q.hi(), 1.0 / 3.0);
        assert!((q.lo() - 1.0 / (3.0 * 2f64.powi(54))).abs() < 1e-32);
    }

    #[test]
    fn complex_division_inverts_multiplication() {
        let a = CDd::new(dd(0.3), dd(-1.7));
        let b = CDd::new(dd(-0.43), dd(0.2));
        let back = cdiv(a * b, b) - a;
        assert!(back.re.hi().abs() < 1e-30 && back.im.hi().abs() < 1e-30);
    }
}
