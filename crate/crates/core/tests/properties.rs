use hardyliou::boundary_analysis::{
    hs_norm, kernel_action_norm_sqr, monomial_norm_sequence, weighted_adjoint_on_kernel,
};
use hardyliou::liouville::{
    adjoint_apply_boundary, adjoint_matrix, adjoint_on_derivative_kernel, liouville_matrix,
    weighted_liouville_matrix, KernelAdjointVariant,
};
use hardyliou::occupation::{integrate_along, occupation_kernel, Quadrature, Trajectory};
use hardyliou::series::{project_h2, to_boundary};
use hardyliou::spectral::eigendecompose;
use hardyliou::{inner_product, Complex64, KernelSpec, TaylorPolynomial};
use proptest::prelude::*;

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| Complex64::new(re, im))
}

fn disk_point(max_radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn poly(max_degree: usize, bound: f64) -> impl Strategy<Value = TaylorPolynomial> {
    prop::collection::vec(complex(bound), 1..=max_degree + 1)
        .prop_map(|c| TaylorPolynomial::new(c).unwrap())
}

/// Polynomial with `∑|c_n| ≤ s`, hence `sup |φ| ≤ s` on the closed disk.
fn contraction(max_degree: usize, s: f64) -> impl Strategy<Value = TaylorPolynomial> {
    (
        prop::collection::vec(complex(1.0), 1..=max_degree + 1),
        0.05..s,
    )
        .prop_map(move |(c, s)| {
            let l1: f64 = c.iter().map(|v| v.norm()).sum::<f64>().max(1e-12);
            TaylorPolynomial::new(c.into_iter().map(|v| v * (s / l1)).collect()).unwrap()
        })
}

fn decaying(order: usize) -> impl Strategy<Value = TaylorPolynomial> {
    (
        0.0..0.8f64,
        prop::collection::vec(0.0..std::f64::consts::TAU, order + 1),
    )
        .prop_map(|(r, phases)| {
            TaylorPolynomial::new(
                phases
                    .iter()
                    .enumerate()
                    .map(|(n, &p)| Complex64::from_polar(r.powi(n as i32), p))
                    .collect(),
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reproducing_property(g in poly(12, 1.0), w in disk_point(0.9)) {
        let k = hardyliou::series::kernel(&KernelSpec::szego(w).unwrap(), 12).unwrap();
        prop_assert!((inner_product(&g, &k) - g.eval(w)).norm() <= 1e-12);
    }

    #[test]
    fn derivative_kernel_represents_derivative(g in poly(12, 1.0), w in disk_point(0.9), j in 0usize..4) {
        let k = hardyliou::series::kernel(&KernelSpec::new(w, j, false).unwrap(), 12).unwrap();
        let expected = g.eval_derivative(j, w);
        prop_assert!((inner_product(&g, &k) - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
    }

    #[test]
    fn antiderivative_is_contractive(h in poly(20, 1.0)) {
        prop_assert!(h.antiderivative().norm() <= h.norm() + 1e-15);
    }

    #[test]
    fn boundary_roundtrip(g in poly(30, 1.0)) {
        let back = project_h2(&to_boundary(&g, 64).unwrap(), g.order()).unwrap();
        prop_assert!(back.max_abs_diff(&g) <= 1e-13);
    }

    #[test]
    fn adjoint_is_an_involution(f in poly(6, 1.0)) {
        let a = liouville_matrix(&f, 24);
        let twice = adjoint_matrix(&adjoint_matrix(&a));
        prop_assert_eq!(twice.entries(), a.entries());
    }

    #[test]
    fn adjoint_inner_product_identity(f in poly(5, 1.0), g in poly(30, 1.0), h in poly(30, 1.0)) {
        let a = liouville_matrix(&f, 30);
        let lhs = inner_product(&a.apply(&g), &h);
        let rhs = inner_product(&g, &adjoint_matrix(&a).apply(&h));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn boundary_adjoint_matches_matrix(f in poly(8, 1.0), h in decaying(64)) {
        let boundary = adjoint_apply_boundary(&f, &h, 64, 512).unwrap();
        let matrix = adjoint_matrix(&liouville_matrix(&f, 64)).apply(&h);
        prop_assert!(boundary.distance(&matrix) <= 1e-8);
    }

    #[test]
    fn leibniz_kernel_adjoint_matches_matrix(f in poly(5, 1.0), w in disk_point(0.5), j in 1usize..5) {
        let order = 96;
        let g = hardyliou::series::kernel(&KernelSpec::new(w, j - 1, false).unwrap(), order).unwrap();
        let oracle = adjoint_matrix(&liouville_matrix(&f, order)).apply(&g);
        let got = adjoint_on_derivative_kernel(&f, w, j, KernelAdjointVariant::Leibniz, order).unwrap();
        prop_assert!(got.distance(&oracle) <= 1e-8 * (1.0 + oracle.norm()));
    }

    #[test]
    fn weighted_kernel_adjoint_matches_matrix(f in poly(4, 1.0), phi in contraction(4, 0.9), w in disk_point(0.7)) {
        let order = 96;
        let k = hardyliou::series::kernel(&KernelSpec::szego(w).unwrap(), order).unwrap();
        let oracle = adjoint_matrix(&weighted_liouville_matrix(&f, &phi, order)).apply(&k);
        let got = weighted_adjoint_on_kernel(&f, &phi, w, order).unwrap();
        prop_assert!(got.distance(&oracle) <= 1e-8 * (1.0 + oracle.norm()));
    }

    #[test]
    fn kernel_action_norm_is_squared_modulus(f in poly(3, 1.0), phi in contraction(2, 0.8), w in disk_point(0.7)) {
        let order = 128;
        let k = hardyliou::series::kernel(&KernelSpec::new(w, 0, true).unwrap(), order).unwrap();
        let matrix = adjoint_matrix(&weighted_liouville_matrix(&f, &phi, order)).apply(&k).norm_sqr();
        let formula = kernel_action_norm_sqr(&f, &phi, w).unwrap();
        prop_assert!((matrix - formula).abs() <= 1e-8 * (1.0 + formula));
    }

    #[test]
    fn monomial_norms_equal_column_norms(f in poly(3, 1.0), phi in contraction(1, 0.9)) {
        let order = 48;
        let a = weighted_liouville_matrix(&f, &phi, order);
        let seq = monomial_norm_sequence(&f, &phi, order, 256).unwrap();
        let limit = order - f.order();
        for (n, &v) in seq.iter().enumerate().take(limit + 1) {
            prop_assert!((v - a.column_norm_sqr(n)).abs() <= 1e-10 * (1.0 + v), "n = {}", n);
        }
    }

    #[test]
    fn hs_frobenius_monotone_in_order(f in poly(2, 1.0), phi in contraction(2, 0.8)) {
        let values: Vec<f64> = [8, 16, 32, 64, 128]
            .iter()
            .map(|&n| hs_norm(&f, &phi, n, 512).unwrap().frobenius_sqr)
            .collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-14));
        }
        let last = values.len() - 1;
        prop_assert!(values[last] - values[last - 1] <= 1e-8 * (1.0 + values[last]));
    }

    #[test]
    fn affine_truncated_spectrum(alpha in complex(2.0), beta_ratio in 0.0..0.9f64, phase in 0.0..std::f64::consts::TAU) {
        prop_assume!(alpha.norm() > 0.1);
        let beta = alpha * Complex64::from_polar(beta_ratio, phase);
        let f = TaylorPolynomial::new(vec![beta, alpha]).unwrap();
        let mut got: Vec<Complex64> = eigendecompose(&liouville_matrix(&f, 24)).unwrap().into_iter().map(|p| p.value).collect();
        let mut want: Vec<Complex64> = (0..=24).map(|n| alpha * n as f64).collect();
        for v in [&mut got, &mut want] {
            v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        }
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).norm() <= 1e-10 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn occupation_functional_identity(g in poly(20, 1.0), r in 0.1..0.9f64, speed in 0.1..3.0f64, steps in 3usize..200) {
        let theta = Trajectory::sample(2.0, steps, |t| Complex64::from_polar(r * (1.0 - 0.1 * t), speed * t)).unwrap();
        let k = occupation_kernel(&theta, 20).unwrap();
        let direct = integrate_along(&theta, k.quadrature, |z| g.eval(z)).unwrap();
        prop_assert!((inner_product(&g, &k.series) - direct).norm() <= 1e-10);
        prop_assert!(k.satisfies_moment_bound());
    }

    #[test]
    fn occupation_kernels_add_over_time(z0 in disk_point(0.8), speed in -2.0..2.0f64, half in 1usize..40) {
        let signal = |t: f64| z0 * Complex64::from_polar(1.0 - 0.05 * t, speed * t);
        let steps = 2 * half;
        let first = Trajectory::sample(1.0, steps, signal).unwrap();
        let second_times: Vec<f64> = (0..=steps).map(|k| 1.0 + k as f64 / steps as f64).collect();
        let second = Trajectory::new(second_times.clone(), second_times.iter().map(|&t| signal(t)).collect()).unwrap();
        let whole = first.concat(&second).unwrap();
        let sum = &occupation_kernel(&first, 16).unwrap().series + &occupation_kernel(&second, 16).unwrap().series;
        let joined = occupation_kernel(&whole, 16).unwrap();
        prop_assert_eq!(joined.quadrature, Quadrature::Simpson);
        prop_assert!(joined.series.distance(&sum) <= 1e-12);
    }
}
