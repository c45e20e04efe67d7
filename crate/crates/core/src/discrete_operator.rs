//! Discrete analogue `D_m(h b)` of the operator
//! `d^2m/dx^2m - d^(2m-2)/dx^(2m-2)`.
//!
//! `D_m` inverts discrete convolution with `G_m`:
//! `sum_g D_m(h g) G_m(h (b - g)) = delta_b0`. For `m >= 2` it is expressed
//! through the palindromic characteristic polynomial `P_(2m-2)`, its `m - 1`
//! roots inside the unit disk and the associated amplitudes; for `m = 1` it is
//! a three-point stencil.

mod precise;
mod roots;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{eulerian_row, SpaceOrder};

use precise::{dd, Dd, PreciseOperator};

pub(crate) use roots::eval_with_derivative;

const PALINDROME_TOL: f64 = 1e-12;
const ROOT_RESIDUAL_TOL: f64 = 1e-10;
const UNIT_CIRCLE_GAP: f64 = 1e-8;
const DERIVATIVE_TOL: f64 = 1e-14;
const IMAG_RESIDUE_TOL: f64 = 1e-10;
const TRUNCATION_EPS: f64 = 1e-16;
const MAX_RADIUS: usize = 10_000;

/// Characteristic polynomial `P_(2m-2)(l) = sum_s p_s l^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPolynomial {
    m: SpaceOrder,
    h: f64,
    coeffs: Vec<f64>,
    precise: Vec<Dd>,
}

impl CharPolynomial {
    pub fn m(&self) -> SpaceOrder {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `p_0 ..= p_(2m-2)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()))
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        eval_with_derivative(&self.coeffs, x).0
    }

    pub fn derivative_at(&self, x: Complex64) -> Complex64 {
        eval_with_derivative(&self.coeffs, x).1
    }
}

fn poly_mul(a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j].checked_add(x.checked_mul(y)?)?;
        }
    }
    Some(out)
}

/// `(1 - l)^k` by ascending powers.
fn one_minus_pow(k: usize) -> Vec<i128> {
    let mut out = vec![1i128];
    for _ in 0..k {
        out = poly_mul(&out, &[1, -1]).expect("small binomial");
    }
    out
}

fn binom_i128(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let mut acc: i128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as i128 / (i as i128 + 1);
    }
    acc
}

/// `n! [h^n] P_(2m-2)(l)` as an integer polynomial in `l`.
///
/// Every coefficient of `P_(2m-2)` is an entire function of `h`; the factor
/// `n!` makes the Taylor coefficients integral, so the low orders, which
/// cancel, are formed exactly.
fn taylor_layer(m: usize, n: usize, pieces: &[Vec<i128>]) -> Option<Vec<i128>> {
    let len = 2 * m - 1;
    let mut out = vec![0i128; len];
    // (1 - e^(2h)) (1 - l)^(2m-2)
    if n >= 1 {
        let a = 2i128.checked_pow(n as u32)?;
        for (s, c) in one_minus_pow(2 * m - 2).into_iter().enumerate() {
            out[s] = out[s].checked_sub(a.checked_mul(c)?)?;
        }
    }
    // -2 (l (e^(2h) + 1) - e^h (l^2 + 1)) h^(2j-1)/(2j-1)! (1 - l)^(2m-2-2j) E_(2j-2)(l)
    for (j, piece) in (1..m).zip(pieces) {
        let odd = 2 * j - 1;
        if n < odd {
            continue;
        }
        let c = binom_i128(n, odd);
        let b = c
            .checked_mul(2i128.checked_pow((n - odd) as u32)?)?
            .checked_add(if n == odd { 1 } else { 0 })?;
        // factor = -c + b l - c l^2, multiplied by -2
        let factor = [2 * c, -2 * b, 2 * c];
        let term = poly_mul(&factor, piece)?;
        for (s, t) in term.into_iter().enumerate() {
            out[s] = out[s].checked_add(t)?;
        }
    }
    Some(out)
}

/// Expands the characteristic polynomial into monomial coefficients.
pub fn char_polynomial(m: SpaceOrder, h: f64) -> Result<CharPolynomial> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidStep(h));
    }
    let mi = m.get();
    if mi == 1 {
        return Ok(CharPolynomial {
            m,
            h,
            coeffs: vec![-(2.0 * h).exp_m1()],
            precise: Vec::new(),
        });
    }
    // (1 - l)^(2m-2-2j) E_(2j-2)(l) for j = 1 .. m-1
    let pieces: Vec<Vec<i128>> = (1..mi)
        .map(|j| poly_mul(&one_minus_pow(2 * mi - 2 - 2 * j), &eulerian_row(2 * j - 2)))
        .collect::<Option<_>>()
        .ok_or(Error::CoefficientOverflow)?;

    let len = 2 * mi - 1;
    let mut sums = vec![dd(0.0); len];
    let mut scale = dd(1.0); // h^n / n!
    let mut n = 0usize;
    loop {
        let layer = match taylor_layer(mi, n, &pieces) {
            Some(layer) => layer,
            None => {
                // Higher orders are far below rounding for h <= 1.
                if scale.hi() > 1e-40 {
                    return Err(Error::CoefficientOverflow);
                }
                break;
            }
        };
        let mut layer_max = 0.0f64;
        for (acc, &c) in sums.iter_mut().zip(&layer) {
            let t = Dd::from(c) * scale;
            *acc += t;
            layer_max = layer_max.max(t.hi().abs());
        }
        let current_max = sums.iter().fold(0.0f64, |a, s| a.max(s.hi().abs()));
        if n > 2 * mi && layer_max <= 1e-34 * current_max {
            break;
        }
        n += 1;
        scale = scale * dd(h) / dd(n as f64);
    }
    let coeffs: Vec<f64> = sums.iter().map(|s| s.hi()).collect();

    let max = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let deviation = (0..len)
        .map(|s| (coeffs[s] - coeffs[len - 1 - s]).abs())
        .fold(0.0, f64::max)
        / max;
    if deviation > PALINDROME_TOL {
        return Err(Error::NotPalindromic(deviation));
    }
    Ok(CharPolynomial {
        m,
        h,
        coeffs,
        precise: sums,
    })
}

/// The `m - 1` roots of `P_(2m-2)` strictly inside the unit disk, sorted by
/// ascending modulus and then ascending argument.
pub fn stable_roots(p: &CharPolynomial) -> Result<Vec<Complex64>> {
    let expected = p.m.get() - 1;
    if expected == 0 {
        return Ok(Vec::new());
    }
    let all = roots::all_roots(&p.coeffs)?;
    let scale = p.max_abs_coeff();
    let mut inside = Vec::with_capacity(expected);
    for r in all {
        let gap = (r.norm() - 1.0).abs();
        if gap <= UNIT_CIRCLE_GAP {
            return Err(Error::RootCountMismatch {
                expected,
                found: usize::MAX,
            });
        }
        if r.norm() < 1.0 {
            if p.eval(r).norm() > ROOT_RESIDUAL_TOL * scale {
                return Err(Error::NoConvergence(0));
            }
            inside.push(r);
        }
    }
    if inside.len() != expected {
        return Err(Error::RootCountMismatch {
            expected,
            found: inside.len(),
        });
    }
    inside.sort_by(|a, b| {
        a.norm()
            .partial_cmp(&b.norm())
            .unwrap()
            .then(a.arg().partial_cmp(&b.arg()).unwrap())
    });
    Ok(inside)
}

/// Precomputed ingredients of `D_m(h b)`.
#[derive(Clone, Debug)]
pub struct OperatorData {
    m: SpaceOrder,
    h: f64,
    charpoly: CharPolynomial,
    big_c: f64,
    roots: Vec<Complex64>,
    amps: Vec<Complex64>,
    precise: Option<PreciseOperator>,
}

impl OperatorData {
    pub fn m(&self) -> SpaceOrder {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn charpoly(&self) -> &CharPolynomial {
        &self.charpoly
    }

    /// Leading coefficient `p = p_(2m-2)`.
    pub fn leading(&self) -> f64 {
        self.charpoly.leading()
    }

    /// The constant `C`; zero for `m = 1`, where the stencil is hard-coded.
    pub fn big_c(&self) -> f64 {
        self.big_c
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Truncation radius for convolutions of `D_m` against sequences that grow
    /// like `e^(h|b|)` times a polynomial of degree `2m`: the smallest `B`
    /// whose tail weight `sum_k |A_k / (p l_k)| (|l_k| e^h)^B (1 + (hB)^2m)`
    /// drops below `1e-16`, capped at 10^4. `1` for `m = 1`.
    pub fn truncation_radius(&self) -> usize {
        if self.roots.is_empty() {
            return 1;
        }
        let eh = self.h.exp();
        let p = self.leading().abs();
        let exponent = 2 * self.m.get() as i32;
        let tail = |b: usize| -> f64 {
            let growth = 1.0 + (self.h * b as f64).powi(exponent);
            self.roots
                .iter()
                .zip(&self.amps)
                .map(|(l, a)| (a / l).norm() / p * (l.norm() * eh).powi(b as i32) * growth)
                .sum()
        };
        (1..=MAX_RADIUS).find(|&b| tail(b) < TRUNCATION_EPS).unwrap_or(MAX_RADIUS)
    }

    /// `D_m(h b)` as a real number.
    pub fn value(&self, beta: i64) -> f64 {
        d_m(self, beta)
    }

    /// `D_m(h b)` for `b = 0 ..= radius`.
    pub fn values(&self, radius: usize) -> Vec<f64> {
        match &self.precise {
            Some(pr) => pr.values(radius),
            None => (0..=radius as i64).map(|b| d_m(self, b)).collect(),
        }
    }
}

/// Builds `D_m` for the grid with `n` intervals, `h = 1/n`.
pub fn build_operator(m: SpaceOrder, n: usize) -> Result<OperatorData> {
    if n == 0 || n + 1 < m.get() {
        return Err(Error::InvalidGrid { n, m: m.get() });
    }
    build_operator_with_step(m, 1.0 / n as f64)
}

/// Builds `D_m` for an arbitrary step `0 < h <= 1`.
pub fn build_operator_with_step(m: SpaceOrder, h: f64) -> Result<OperatorData> {
    let charpoly = char_polynomial(m, h)?;
    let mi = m.get();
    if mi == 1 {
        return Ok(OperatorData {
            m,
            h,
            charpoly,
            big_c: 0.0,
            roots: Vec::new(),
            amps: Vec::new(),
            precise: None,
        });
    }
    let rough = stable_roots(&charpoly)?;
    let p = &charpoly.precise;
    let lead = p[2 * mi - 2];
    let eh = dd(h).exp();
    let e2h = dd(2.0 * h).exp();
    let big_c = dd(1.0) + eh * ((2 * mi - 2) as f64) + e2h + eh * precise::div(p[2 * mi - 3], lead);

    let scale = charpoly.max_abs_coeff();
    let one = precise::cdd(Complex64::new(1.0, 0.0));
    let mut roots = Vec::with_capacity(rough.len());
    let mut weights = Vec::with_capacity(rough.len());
    for &r in &rough {
        let (l, dp) = precise::polish(p, r);
        if precise::round(dp).norm() < DERIVATIVE_TOL * scale {
            return Err(Error::DerivativeVanishes);
        }
        let bracket = l * (e2h + dd(1.0)) - (l * l + one) * eh;
        let amp = precise::cdiv((one - l).powu(2 * mi as u32 - 2) * bracket * (lead * 2.0), l * dp);
        roots.push(l);
        weights.push(precise::cdiv(amp, l));
    }
    let amps = weights.iter().zip(&roots).map(|(&w, &l)| precise::round(w * l)).collect();
    Ok(OperatorData {
        m,
        h,
        big_c: big_c.hi(),
        roots: roots.iter().map(|&l| precise::round(l)).collect(),
        amps,
        precise: Some(PreciseOperator {
            lead,
            big_c,
            eh,
            roots,
            weights,
        }),
        charpoly,
    })
}

/// Evaluates `D_m(h b)`.
pub fn d_m(op: &OperatorData, beta: i64) -> f64 {
    let h = op.h;
    let ab = beta.unsigned_abs();
    if op.m.get() == 1 {
        let denom = -(2.0 * h).exp_m1();
        return match ab {
            0 => 2.0 * (1.0 + (2.0 * h).exp()) / denom,
            1 => -2.0 * h.exp() / denom,
            _ => 0.0,
        };
    }
    let pr = op.precise.as_ref().expect("m >= 2 carries the double-double data");
    let (value, residue, magnitude) = pr.value(beta);
    assert!(
        residue.abs() <= IMAG_RESIDUE_TOL * magnitude.max(f64::MIN_POSITIVE),
        "D_m imaginary residue {residue} at beta = {beta}"
    );
    value
}

/// Truncated convolution `sum_{|g| <= B} D_m(h g) f(b - g)` with `values = D_m(h 0..=B)`.
/// Each product enters the compensated sum together with its rounding error.
pub fn convolve<F: Fn(i64) -> f64>(values: &[f64], beta: i64, f: F) -> f64 {
    let radius = values.len() as i64 - 1;
    let mut acc = crate::kernel::Neumaier::default();
    for g in -radius..=radius {
        let (d, x) = (values[g.unsigned_abs() as usize], f(beta - g));
        let p = d * x;
        acc.add(p);
        acc.add(d.mul_add(x, -p));
    }
    acc.sum()
}
