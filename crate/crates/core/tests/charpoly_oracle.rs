//! Characteristic polynomial against an exact rational expansion.
//!
//! `e^h` and `e^(2h)` are replaced by Taylor polynomials of degree 60 in the
//! exact binary value of `h`; the truncation error is far below `1e-30`.
//! Euler–Frobenius polynomials come from the generating identity
//! `sum_(j>=1) j^(k+1) l^j = l E_k(l) / (1 - l)^(k+2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use w2interp::discrete_operator::char_polynomial;
use w2interp::SpaceOrder;

type Poly = Vec<BigRational>;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_scaled(acc: &mut Poly, p: &Poly, s: &BigRational) {
    if acc.len() < p.len() {
        acc.resize(p.len(), BigRational::zero());
    }
    for (a, c) in acc.iter_mut().zip(p) {
        *a += c * s;
    }
}

fn one_minus_pow(k: usize) -> Poly {
    (0..k).fold(vec![int(1)], |p, _| mul(&p, &vec![int(1), int(-1)]))
}

fn exp_series(x: &BigRational) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for n in 1..=60 {
        term = term * x / int(n);
        sum += &term;
    }
    sum
}

fn factorial(n: usize) -> BigRational {
    (1..=n as i64).fold(int(1), |a, k| a * int(k))
}

/// `E_k` from the generating identity, as exact rationals.
fn euler_frobenius(k: usize) -> Poly {
    let series: Poly = (0..=k + 1)
        .map(|j| BigRational::from_integer(BigInt::from(j).pow(k as u32 + 1)))
        .collect();
    let prod = mul(&series, &one_minus_pow(k + 2));
    prod[1..=k + 1].to_vec()
}

fn exact_charpoly(m: usize, h: &BigRational) -> Poly {
    let eh = exp_series(h);
    let e2h = exp_series(&(h * int(2)));
    let mut out = Poly::new();
    add_scaled(&mut out, &one_minus_pow(2 * m - 2), &(int(1) - &e2h));
    // -2 (l (e^(2h) + 1) - e^h (l^2 + 1))
    let factor = vec![eh.clone() * int(2), -(&e2h + int(1)) * int(2), eh * int(2)];
    let mut bracket = Poly::new();
    for j in 1..m {
        let odd = 2 * j - 1;
        let piece = mul(&one_minus_pow(2 * m - 2 - 2 * j), &euler_frobenius(2 * j - 2));
        add_scaled(&mut bracket, &piece, &(h.pow(odd as i32) / factorial(odd)));
    }
    if !bracket.is_empty() {
        add_scaled(&mut out, &mul(&factor, &bracket), &int(1));
    }
    out
}

#[test]
fn euler_frobenius_low_degrees() {
    assert_eq!(euler_frobenius(0), vec![int(1)]);
    assert_eq!(euler_frobenius(2), vec![int(1), int(4), int(1)]);
}

#[test]
fn m3_h01_matches_rational_expansion() {
    let h = 0.1;
    let exact = exact_charpoly(3, &BigRational::from_float(h).unwrap());
    let got = char_polynomial(SpaceOrder::new(3).unwrap(), h).unwrap();
    assert_eq!(got.coeffs().len(), exact.len());
    for (s, (g, e)) in got.coeffs().iter().zip(&exact).enumerate() {
        let e = e.to_f64().unwrap();
        assert!(((g - e) / e).abs() <= 1e-13, "p_{s}: {g} vs {e}");
    }
}

#[test]
fn higher_orders_match_rational_expansion() {
    for (m, h) in [(2, 0.2), (4, 0.05), (5, 0.25)] {
        let exact = exact_charpoly(m, &BigRational::from_float(h).unwrap());
        let got = char_polynomial(SpaceOrder::new(m).unwrap(), h).unwrap();
        for (s, (g, e)) in got.coeffs().iter().zip(&exact).enumerate() {
            let e = e.to_f64().unwrap();
            assert!(((g - e) / e).abs() <= 1e-13, "m={m} h={h} p_{s}: {g} vs {e}");
        }
    }
}
