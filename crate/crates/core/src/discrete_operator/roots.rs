//! Durand–Kerner simultaneous iteration for all roots of a real polynomial.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 500;
const UPDATE_TOL: f64 = 1e-15;
const POLISH_STEPS: usize = 3;

/// Horner evaluation of `sum_s c_s x^s` and its derivative.
pub(crate) fn eval_with_derivative(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Bound on `|p(x)|` rounding error from Horner's scheme.
fn horner_error_bound(coeffs: &[f64], x: Complex64) -> f64 {
    let r = x.norm();
    let mag = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs());
    4.0 * coeffs.len() as f64 * f64::EPSILON * mag
}

/// All roots of the polynomial with ascending coefficients `coeffs`.
///
/// The leading coefficient must be nonzero. Iterates on the monic
/// normalisation, then polishes every root with Newton on the original
/// coefficients.
pub(crate) fn all_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    assert!(lead != 0.0, "leading coefficient must be nonzero");
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();

    // Cauchy bound for the starting circle.
    let radius = 1.0 + monic[..degree].iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    // Deterministic starting points spread around a circle inside the bound.
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / degree as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut max_update = 0.0f64;
        let mut all_at_noise = true;
        for i in 0..degree {
            let (p, _) = eval_with_derivative(&monic, z[i]);
            if p.norm() > horner_error_bound(&monic, z[i]) {
                all_at_noise = false;
            }
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = p / denom;
            if step.is_finite() {
                z[i] -= step;
                max_update = max_update.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_update < UPDATE_TOL || all_at_noise {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    for zi in z.iter_mut() {
        for _ in 0..POLISH_STEPS {
            let (p, dp) = eval_with_derivative(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
    Ok(z)
}
