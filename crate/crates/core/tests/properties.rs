use proptest::prelude::*;
use w2interp::direct_system::{norm_squared, solve_direct};
use w2interp::discrete_operator::{build_operator, char_polynomial};
use w2interp::interpolator::{interpolate, SampleSet, SampleSource};
use w2interp::kernel::{euler_frobenius, green_kernel};
use w2interp::quadrature::GaussLegendre;
use w2interp::{GridSpec, OptimalInterpolator, SpaceOrder};

fn order(m: usize) -> SpaceOrder {
    SpaceOrder::new(m).unwrap()
}

/// `(m, N)` with `N` in the range where explicit coefficients hold `1e-9`.
fn config() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3).prop_flat_map(|m| (Just(m), m.max(2)..=10))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_even(m in 1usize..=5, x in -6.0f64..6.0) {
        let (a, b) = (green_kernel(order(m), x), green_kernel(order(m), -x));
        prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
    }

    #[test]
    fn euler_frobenius_is_palindromic(k in 0usize..=14) {
        let c = euler_frobenius(k).coeffs().to_vec();
        let mut r = c.clone();
        r.reverse();
        prop_assert_eq!(c.len(), k + 1);
        prop_assert_eq!(c, r);
    }

    #[test]
    fn charpoly_is_palindromic(m in 2usize..=5, h in 0.02f64..1.0) {
        let p = char_polynomial(order(m), h).unwrap();
        let c = p.coeffs();
        let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for s in 0..c.len() {
            prop_assert!((c[s] - c[c.len() - 1 - s]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn operator_is_even_with_roots_inside(m in 1usize..=4, n in 4usize..=40, b in 0i64..30) {
        let op = build_operator(order(m), n).unwrap();
        prop_assert_eq!(op.value(b), op.value(-b));
        prop_assert_eq!(op.roots().len(), m - 1);
        prop_assert!(op.roots().iter().all(|l| l.norm() < 1.0));
    }

    #[test]
    fn explicit_matches_direct((m, n) in config(), z in 0.0f64..=1.0) {
        let it = OptimalInterpolator::new(order(m), n).unwrap();
        let e = it.coefficients(z).unwrap();
        let d = solve_direct(it.grid(), z).unwrap();
        for (a, b) in e.coeffs.iter().zip(&d.coeffs) {
            prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
        prop_assert!(e.constraint_residuals(it.grid()).iter().all(|r| r.abs() <= 1e-9));
    }

    #[test]
    fn null_space_is_reproduced((m, n) in config(), z in 0.0f64..=1.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let it = OptimalInterpolator::new(order(m), n).unwrap();
        let grid = it.grid().clone();
        let f = |x: f64| b * (-x).exp() + if m >= 2 { a } else { 0.0 };
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        let samples = SampleSet::new(grid, values, SampleSource::File("memory".into())).unwrap();
        let got = interpolate(&samples, &it.coefficients(z).unwrap()).unwrap();
        prop_assert!((got - f(z)).abs() <= 1e-8);
    }

    #[test]
    fn kronecker_at_any_node((m, n) in config(), k in 0usize..=10) {
        let it = OptimalInterpolator::new(order(m), n).unwrap();
        let k = k.min(n);
        let c = it.coefficients(it.grid().nodes()[k]).unwrap().coeffs;
        for (b, v) in c.iter().enumerate() {
            let target = if b == k { 1.0 } else { 0.0 };
            prop_assert!((v - target).abs() <= 1e-9);
        }
    }

    #[test]
    fn norm_squared_nonnegative((m, n) in config(), z in 0.0f64..=1.0) {
        let grid = GridSpec::new(order(m), n).unwrap();
        let cv = solve_direct(&grid, z).unwrap();
        prop_assert!(norm_squared(&grid, &cv).unwrap() >= 0.0);
    }

    #[test]
    fn gauss_legendre_exact_to_degree(n in 1usize..=40, k in 0usize..=79) {
        prop_assume!(k < 2 * n);
        let got = GaussLegendre::new(n).integrate(0.0, 1.0, |x| x.powi(k as i32));
        prop_assert!((got - 1.0 / (k as f64 + 1.0)).abs() <= 1e-13);
    }
}
