use fredkern::{
    back_substitution_residual, build_grid, char_scan, det_matrix, det_series, lambda_shift, make_resolvent,
    minor_series, solve_equation, Complex64, KernelSpec, NystromMatrix, QuadratureConfig, Region, ResolventPath,
    ShiftSchedule, TruncationScheme, Variant,
};
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = KernelSpec> {
    prop::sample::select(KernelSpec::builtins())
}

fn small_lambda() -> impl Strategy<Value = Complex64> {
    (-0.6f64..0.6, -0.3f64..0.3).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subkernels_are_dominated(k in builtin(), n in 0usize..12, s in -9.0f64..9.0, t in -9.0f64..9.0) {
        let trunc = TruncationScheme::default();
        let full = k.eval(s, t).norm();
        prop_assert!(k.subkernel(&trunc, n, Variant::Plain, s, t).norm() <= full);
        prop_assert!(k.subkernel(&trunc, n, Variant::Tilde, s, t).norm() <= full);
    }

    #[test]
    fn hermitian_builtins_are_symmetric(s in -6.0f64..6.0, t in -6.0f64..6.0, n in 0usize..12) {
        let trunc = TruncationScheme::default();
        for k in KernelSpec::builtins().into_iter().filter(|k| k.is_hermitian()) {
            prop_assert!((k.eval(s, t) - k.eval(t, s).conj()).norm() <= 1e-15);
            let a = k.subkernel(&trunc, n, Variant::Tilde, s, t);
            let b = k.subkernel(&trunc, n, Variant::Tilde, t, s).conj();
            prop_assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn lambda_shift_matches_expansion(re in -2.0f64..2.0, im in -2.0f64..2.0, beta0 in 0.1f64..2.0, n in 1usize..200) {
        let lambda = Complex64::new(re, im);
        let schedule = ShiftSchedule::harmonic(Complex64::new(beta0, 0.0));
        let beta = schedule.beta(n);
        prop_assume!((Complex64::new(1.0, 0.0) - beta * lambda).norm() > 1e-3);
        let shifted = lambda_shift(lambda, &schedule, n).unwrap();
        let expansion = beta * lambda * lambda / (Complex64::new(1.0, 0.0) - beta * lambda);
        prop_assert!((shifted - lambda - expansion).norm() <= 1e-12 * (1.0 + expansion.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_and_matrix_determinants_agree(k in builtin(), lambda in small_lambda(), n in 2usize..8) {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, n, QuadratureConfig::default()).unwrap();
        let series = det_series(&k, &trunc, n, lambda, &grid, 6).unwrap();
        let plain = det_matrix(&NystromMatrix::assemble(&k, &trunc, n, Variant::Plain, &grid), lambda);
        let tilde = det_matrix(&NystromMatrix::assemble(&k, &trunc, n, Variant::Tilde, &grid), lambda);
        prop_assert!((series.value - plain.value).norm() <= series.tail_bound + 1e-7);
        prop_assert!((plain.value - tilde.value).norm() <= 1e-10);
    }

    #[test]
    fn tilde_resolvent_is_masked_plain(k in builtin(), lambda in small_lambda(), s in -7.0f64..7.0, t in -7.0f64..7.0) {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 6, QuadratureConfig::default()).unwrap();
        let plain = make_resolvent(&k, &trunc, 6, lambda, &grid, Variant::Plain, ResolventPath::Fredholm).unwrap();
        let tilde = make_resolvent(&k, &trunc, 6, lambda, &grid, Variant::Tilde, ResolventPath::Fredholm).unwrap();
        prop_assert_eq!(tilde.eval(s, t), plain.eval(s, t) * trunc.chi(6, t));
    }

    #[test]
    fn hermitian_resolvents_are_symmetric(re in -0.7f64..0.7, s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 6, QuadratureConfig::default()).unwrap();
        let lambda = Complex64::new(re, 0.0);
        for k in KernelSpec::builtins().into_iter().filter(|k| k.is_hermitian()) {
            let h = make_resolvent(&k, &trunc, 6, lambda, &grid, Variant::Tilde, ResolventPath::Fredholm).unwrap();
            prop_assert!((h.eval(s, t) - h.eval(t, s).conj()).norm() <= 1e-9);
        }
    }

    #[test]
    fn minor_quotient_matches_nystrom_extension(lambda in small_lambda(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 6, QuadratureConfig::default()).unwrap();
        for k in [KernelSpec::rank1_gauss(), KernelSpec::rank2_orthogonal()] {
            let h = make_resolvent(&k, &trunc, 6, lambda, &grid, Variant::Plain, ResolventPath::Fredholm).unwrap();
            let d = det_series(&k, &trunc, 6, lambda, &grid, 6).unwrap();
            let minor = minor_series(&k, &trunc, 6, lambda, s, t, &grid, 6).unwrap();
            prop_assert!((minor / d.value - h.eval(s, t)).norm() <= d.tail_bound + 1e-6);
        }
    }

    #[test]
    fn solution_satisfies_the_equation(k in builtin(), lambda in small_lambda(), shift in -3.0f64..3.0, width in 0.3f64..2.0) {
        let trunc = TruncationScheme::default();
        let grid = build_grid(&trunc, 6, QuadratureConfig::default()).unwrap();
        let h = make_resolvent(&k, &trunc, 6, lambda, &grid, Variant::Plain, ResolventPath::Fredholm).unwrap();
        let g: Vec<Complex64> = grid.nodes().iter().map(|&x| Complex64::new((-((x - shift) / width).powi(2)).exp(), 0.0)).collect();
        let f = solve_equation(&h, &g).unwrap();
        prop_assert!(back_substitution_residual(&h, &g, &f.values) <= 1e-8);
    }
}

#[test]
fn characteristic_values_stay_away_from_regular_point() {
    let trunc = TruncationScheme::default();
    let region = Region::new(-2.0, 3.0, -1.0, 1.0).unwrap();
    for n in 2..=10 {
        let grid = build_grid(&trunc, n, QuadratureConfig::default()).unwrap();
        let scan = char_scan(&KernelSpec::rank1_gauss(), &trunc, n, region, 2.0, &grid).unwrap();
        let nearest = scan
            .zeros
            .iter()
            .map(|z| (z - Complex64::new(0.3, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest >= 0.4, "n={n}: {nearest}");
    }
}
