//! Scalar building blocks: the Green-type kernel `G_m`, Euler–Frobenius
//! polynomials and finite differences of powers at zero.

use crate::error::{Error, Result};

/// Order `m` of the space `W2^(m,m-1)(0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpaceOrder(usize);

impl SpaceOrder {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidOrder);
        }
        Ok(Self(m))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for SpaceOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Below this magnitude `G_m` is summed from its all-positive tail series.
const TAIL_SERIES_LIMIT: f64 = 8.0;

/// Evaluates `G_m(x) = sgn(x)/2 * (sinh x - sum_{k=1}^{m-1} x^(2k-1)/(2k-1)!)`.
///
/// `G_m` is even with `G_m(0) = 0`. For moderate `|x|` the bracket equals
/// `sum_{k>=m} |x|^(2k-1)/(2k-1)!`, a series of positive terms, which avoids
/// the cancellation of the subtraction.
pub fn green_kernel(m: SpaceOrder, x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 0.0;
    }
    let m = m.get();
    if ax < TAIL_SERIES_LIMIT {
        0.5 * sinh_tail(m, ax)
    } else {
        let mut acc = Neumaier::default();
        acc.add(0.5 * ax.exp());
        acc.add(-0.5 * (-ax).exp());
        let mut term = ax;
        for k in 1..m {
            acc.add(-term);
            let n = (2 * k) as f64;
            term *= ax * ax / (n * (n + 1.0));
        }
        0.5 * acc.sum()
    }
}

/// `sum_{k>=m} x^(2k-1)/(2k-1)!` for `x > 0`.
fn sinh_tail(m: usize, x: f64) -> f64 {
    let mut term = x;
    for k in 1..m {
        let n = (2 * k) as f64;
        term *= x * x / (n * (n + 1.0));
    }
    let mut sum = 0.0;
    let mut k = m;
    loop {
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
        let n = (2 * k) as f64;
        term *= x * x / (n * (n + 1.0));
        k += 1;
    }
    sum
}

/// Compensated (Neumaier) summation.
#[derive(Default, Clone, Copy, Debug)]
pub(crate) struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.c
    }
}

/// Euler–Frobenius polynomial `E_k`, stored by ascending powers.
///
/// Normalised by `sum_{j>=1} j^(k+1) l^j = l E_k(l) / (1 - l)^(k+2)`, so the
/// coefficients are the Eulerian numbers `<k+1, i>`.
#[derive(Clone, Debug, PartialEq)]
pub struct EFPolynomial {
    coeffs: Vec<f64>,
}

impl EFPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Integer coefficients of `E_k`; exact for every `k` used in practice.
pub(crate) fn eulerian_row(k: usize) -> Vec<i128> {
    let mut row = vec![1i128];
    for deg in 1..=k {
        let mut next = vec![0i128; deg + 1];
        for (i, slot) in next.iter_mut().enumerate() {
            let keep = if i < row.len() { (i as i128 + 1) * row[i] } else { 0 };
            let shift = if i >= 1 { (deg as i128 + 1 - i as i128) * row[i - 1] } else { 0 };
            *slot = keep + shift;
        }
        row = next;
    }
    row
}

pub fn euler_frobenius(k: usize) -> EFPolynomial {
    EFPolynomial {
        coeffs: eulerian_row(k).into_iter().map(|c| c as f64).collect(),
    }
}

/// `nu`-th forward difference of `x^j` at zero, `sum_s (-1)^(nu-s) C(nu,s) s^j`.
pub fn delta_powers(nu: usize, j: usize) -> f64 {
    if nu > j {
        return 0.0;
    }
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for s in 0..=nu {
        let sign = if (nu - s).is_multiple_of(2) { 1 } else { -1 };
        total += sign * binom * (s as i128).pow(j as u32);
        binom = binom * (nu - s) as i128 / (s as i128 + 1);
    }
    total as f64
}

/// Binomial coefficient as `f64`.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
