//! Segment-wise evaluation of `p (D_m * u_m)(h b)`.
//!
//! On each of the four segments `L` (left tail), `A` (`0 <= x <= z`),
//! `B` (`z < x <= 1`) and `R` (right tail) the extended `u_m` coincides with a
//! function `k_T` annihilated by `D_m` on the whole line:
//!
//! ```text
//! k_A = s G_m(z - x),  k_B = -s G_m(z - x),  k_L = k_A + d_L,  k_R = k_B + d_R
//! ```
//!
//! with `s = sgn(z - x)` and `d_L`, `d_R` combinations of `e^(-x)` and
//! `x^i`. For `b` in segment `S`, `D_m * u_m = sum_(T != S) D_m * (k_T - k_S)`
//! restricted to `T`; the differences are small near `b`, so nothing cancels.

use num_complex::Complex64;

use super::tail::{shifted_poly, TailFunction};
use crate::direct_system::GridSpec;
use crate::discrete_operator::OperatorData;
use crate::kernel::green_kernel;

const IMAG_RESIDUE_TOL: f64 = 1e-10;
const TAIL_EPS: f64 = 1e-20;
const MAX_TAIL_TERMS: usize = 1_000_000;

/// `f(x) = en e^(-x) + sum_i poly[i] x^i`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Element {
    pub en: f64,
    pub poly: Vec<f64>,
}

impl Element {
    pub fn zero(len: usize) -> Self {
        Self {
            en: 0.0,
            poly: vec![0.0; len],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.en * (-x).exp() + self.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add_scaled(&mut self, other: &Element, s: f64) {
        self.en += s * other.en;
        for (a, b) in self.poly.iter_mut().zip(&other.poly) {
            *a += s * b;
        }
    }

    /// As a function of `g >= 1` at `x = -h g`.
    fn on_left(&self, h: f64) -> TailFunction {
        TailFunction {
            exp_pos: self.en,
            exp_neg: 0.0,
            poly: self.poly.iter().enumerate().map(|(i, c)| c * (-h).powi(i as i32)).collect(),
        }
    }

    /// As a function of `t >= 1` at `x = 1 + h t`.
    fn on_right(&self, h: f64) -> TailFunction {
        TailFunction {
            exp_pos: 0.0,
            exp_neg: self.en / std::f64::consts::E,
            poly: shifted_poly(self.poly.iter().copied(), h, self.poly.len()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Segment {
    L,
    A,
    B,
    R,
}

impl Segment {
    fn sign(self) -> f64 {
        match self {
            Segment::L | Segment::A => 1.0,
            Segment::B | Segment::R => -1.0,
        }
    }
}

/// `sum_{t>=1} l^t f(t)` by direct summation until the bound `|l|^t e^(ht)` is negligible.
fn direct_tail(l: Complex64, h: f64, f: impl Fn(f64) -> f64) -> Complex64 {
    let rate = l.norm() * h.exp();
    let mut total = Complex64::new(0.0, 0.0);
    let mut lp = l;
    let mut bound = rate;
    for t in 1..=MAX_TAIL_TERMS {
        total += lp * f(t as f64);
        lp *= l;
        bound *= rate;
        if bound * (1.0 + t as f64) < TAIL_EPS {
            break;
        }
    }
    total
}

/// Tail sums per root for one pair `(d_L, d_R)`.
pub(crate) struct TailSums {
    dl_left: Vec<Complex64>,
    dl_right: Vec<Complex64>,
    dr_left: Vec<Complex64>,
    dr_right: Vec<Complex64>,
}

pub(crate) struct SegmentContext<'a> {
    grid: &'a GridSpec,
    z: f64,
    eh: f64,
    roots: &'a [Complex64],
    weights: Vec<Complex64>,
    /// `p D_m(h n)` for `n = 0 ..= N + m`.
    pd: Vec<f64>,
    /// Number of grid nodes with `x <= z`.
    split: usize,
    /// `s G_m(z - x_g)` on the grid.
    sg: Vec<f64>,
    /// `sum_g l^g s G_m(z + h g)` over the left tail, per root.
    g_left: Vec<Complex64>,
    /// `sum_t l^t s G_m(z - 1 - h t)` over the right tail, per root.
    g_right: Vec<Complex64>,
}

impl<'a> SegmentContext<'a> {
    pub fn new(op: &'a OperatorData, grid: &'a GridSpec, z: f64) -> Self {
        let m = grid.m();
        let h = grid.h();
        let n = grid.n();
        let p = op.leading();
        let roots = op.roots();
        let weights = roots.iter().zip(op.amps()).map(|(l, a)| a / l).collect();
        let pd = (0..=(n + m.get()) as i64).map(|k| op.value(k) * p).collect();
        let split = grid.nodes().iter().filter(|&&x| x <= z).count();
        let sg = grid
            .nodes()
            .iter()
            .map(|&x| if x <= z { 1.0 } else { -1.0 } * green_kernel(m, z - x))
            .collect();
        let g_left = roots.iter().map(|&l| direct_tail(l, h, |t| green_kernel(m, z + h * t))).collect();
        let g_right = roots
            .iter()
            .map(|&l| -direct_tail(l, h, |t| green_kernel(m, 1.0 + h * t - z)))
            .collect();
        Self {
            grid,
            z,
            eh: h.exp(),
            roots,
            weights,
            pd,
            split,
            sg,
            g_left,
            g_right,
        }
    }

    pub fn tails(&self, dl: &Element, dr: &Element) -> TailSums {
        let h = self.grid.h();
        let sums = |e: &Element, left: bool| -> Vec<Complex64> {
            let f = if left { e.on_left(h) } else { e.on_right(h) };
            self.roots.iter().map(|&l| f.geometric(l, 0, h)).collect()
        };
        TailSums {
            dl_left: sums(dl, true),
            dl_right: sums(dl, false),
            dr_left: sums(dr, true),
            dr_right: sums(dr, false),
        }
    }

    fn segment_of(&self, beta: i64) -> Segment {
        let n = self.grid.n() as i64;
        if beta < 0 {
            Segment::L
        } else if beta > n {
            Segment::R
        } else if (beta as usize) < self.split {
            Segment::A
        } else {
            Segment::B
        }
    }

    fn pd(&self, k: i64) -> f64 {
        self.pd[k.unsigned_abs() as usize]
    }

    /// `s G_m(z - x)` off the grid.
    fn sg_at(&self, x: f64) -> f64 {
        let s = if x <= self.z { 1.0 } else { -1.0 };
        s * green_kernel(self.grid.m(), self.z - x)
    }

    /// `p (D_m * u)(h beta)` for the extension defined by `g_scale` times the
    /// kernel parts and the given `d_L`, `d_R`; linear in all three.
    pub fn apply(&self, beta: i64, g_scale: f64, dl: &Element, dr: &Element, tails: &TailSums) -> f64 {
        let n = self.grid.n();
        let h = self.grid.h();
        let seg = self.segment_of(beta);
        let zero = Element::zero(0);
        let own = match seg {
            Segment::L => dl,
            Segment::R => dr,
            _ => &zero,
        };
        let c_s = seg.sign();

        let mut total = 0.0;
        for g in 0..=n {
            let t = if g < self.split { Segment::A } else { Segment::B };
            if t == seg {
                continue;
            }
            let x = self.grid.nodes()[g];
            let diff = (t.sign() - c_s) * g_scale * self.sg[g] - own.eval(x);
            total += self.pd(beta - g as i64) * diff;
        }

        let mut geo = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        if seg != Segment::L {
            let (own_left, c_diff) = match seg {
                Segment::R => (&tails.dr_left, Segment::L.sign() - c_s),
                _ => (&tails.dl_left, Segment::L.sign() - c_s),
            };
            for k in 0..self.roots.len() {
                let mut inner = c_diff * g_scale * self.g_left[k] + tails.dl_left[k];
                if seg == Segment::R {
                    inner -= own_left[k];
                }
                let v = self.weights[k] * self.roots[k].powu(beta as u32) * inner;
                magnitude += v.norm();
                geo += v;
            }
            if beta == 0 {
                let x = -h;
                let diff = (Segment::L.sign() - c_s) * g_scale * self.sg_at(x) + dl.eval(x) - own.eval(x);
                total -= 2.0 * self.eh * diff;
            }
        }
        if seg != Segment::R {
            let c_diff = Segment::R.sign() - c_s;
            let dist = (n as i64 - beta) as u32;
            for k in 0..self.roots.len() {
                let mut inner = c_diff * g_scale * self.g_right[k] + tails.dr_right[k];
                if seg == Segment::L {
                    inner -= tails.dl_right[k];
                }
                let v = self.weights[k] * self.roots[k].powu(dist) * inner;
                magnitude += v.norm();
                geo += v;
            }
            if beta == n as i64 {
                let x = 1.0 + h;
                let diff = (Segment::R.sign() - c_s) * g_scale * self.sg_at(x) + dr.eval(x) - own.eval(x);
                total -= 2.0 * self.eh * diff;
            }
        }
        assert!(
            geo.im.abs() <= IMAG_RESIDUE_TOL * magnitude.max(1e-300),
            "imaginary residue {} in a real quantity",
            geo.im
        );
        total + geo.re
    }
}
