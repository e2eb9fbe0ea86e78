use fredkern::{
    boundedness_probe, compact_sweep, default_eval_grid, default_n_list, lambda_shift, shifted_diagnostic,
    tail_condition_report, Complex64, Discretization, KernelSpec, QuadratureConfig, ReferenceSource, ShiftSchedule,
    TruncationScheme, Variant,
};

// ‖(T − T_n)T_n‖ for the rank-1 Gaussian: ‖(1−χ_n)u‖·‖u‖·c_n at τ = 2, 4, 6
const RANK1_TAIL: [(f64, f64); 3] = [
    (2.0, 0.012500860560743453),
    (4.0, 5.540686774346481e-8),
    (6.0, 9.363005839958229e-17),
];
// ‖T‖/(1 − 0.3‖T‖), ‖T‖ = √(π/2)
const PROBE_BOUND: f64 = 2.008497709564335;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn zero_schedule_distances_decrease_for_every_builtin() {
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    for k in KernelSpec::builtins() {
        let r = shifted_diagnostic(
            &k,
            &trunc,
            c(0.3, 0.0),
            &ShiftSchedule::zero(),
            &ns,
            &default_eval_grid(),
            None,
            Variant::Plain,
            cfg(),
        )
        .unwrap();
        assert_eq!(r.reference_source, ReferenceSource::NeumannDisk);
        assert!(r.skipped.is_empty());
        assert!(r.is_monotone(), "{}", k.label());
        assert!(r.final_max().unwrap() <= 1e-5, "{}", k.label());
        for seq in [&r.sup_t_diff, &r.sup_row_diff, &r.sup_col_diff] {
            assert!(seq.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }
}

#[test]
fn rank_one_diagnostic_reaches_truncation_floor() {
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    let k = KernelSpec::rank1_gauss();
    let plain = shifted_diagnostic(
        &k,
        &trunc,
        c(0.3, 0.0),
        &ShiftSchedule::zero(),
        &ns,
        &default_eval_grid(),
        None,
        Variant::Plain,
        cfg(),
    )
    .unwrap();
    assert!(plain.sup_t_diff.windows(2).all(|w| w[1] < w[0]));
    assert!(*plain.sup_t_diff.last().unwrap() <= 1e-7);
    let tilde = shifted_diagnostic(
        &k,
        &trunc,
        c(0.3, 0.0),
        &ShiftSchedule::zero(),
        &ns,
        &default_eval_grid(),
        None,
        Variant::Tilde,
        cfg(),
    )
    .unwrap();
    for (a, b) in [
        (&plain.sup_t_diff, &tilde.sup_t_diff),
        (&plain.sup_row_diff, &tilde.sup_row_diff),
        (&plain.sup_col_diff, &tilde.sup_col_diff),
    ] {
        assert!((a.last().unwrap() - b.last().unwrap()).abs() <= 1e-7);
    }
}

#[test]
fn comparing_the_reference_with_itself_gives_zero() {
    let trunc = TruncationScheme::default();
    for k in KernelSpec::builtins() {
        let r = shifted_diagnostic(
            &k,
            &trunc,
            c(0.5, 0.2),
            &ShiftSchedule::zero(),
            &[6],
            &default_eval_grid(),
            Some(ReferenceSource::LargestN),
            Variant::Plain,
            cfg(),
        )
        .unwrap();
        assert_eq!((r.sup_t_diff[0], r.sup_row_diff[0], r.sup_col_diff[0]), (0.0, 0.0, 0.0));
    }
}

#[test]
fn neumann_reference_refused_outside_disk() {
    let trunc = TruncationScheme::default();
    let k = KernelSpec::rank1_gauss();
    let r = shifted_diagnostic(
        &k,
        &trunc,
        c(0.9, 0.0),
        &ShiftSchedule::zero(),
        &[4, 6],
        &default_eval_grid(),
        Some(ReferenceSource::NeumannDisk),
        Variant::Plain,
        cfg(),
    );
    assert!(r.is_err());
    let auto = shifted_diagnostic(
        &k,
        &trunc,
        c(0.9, 0.0),
        &ShiftSchedule::zero(),
        &[4, 6],
        &default_eval_grid(),
        None,
        Variant::Plain,
        cfg(),
    )
    .unwrap();
    assert_eq!(auto.reference_source, ReferenceSource::LargestN);
}

#[test]
fn harmonic_offset_follows_shift_expansion() {
    let schedule = ShiftSchedule::harmonic(c(1.0, 0.0));
    let lambda = c(0.3, 0.0);
    let mut previous = f64::INFINITY;
    for n in 1..=40 {
        let shifted = lambda_shift(lambda, &schedule, n).unwrap();
        let beta = 1.0 / n as f64;
        let expansion = beta * 0.09 / (1.0 - beta * 0.3);
        let offset = (shifted - lambda).norm();
        assert!((offset - expansion).abs() < 1e-15);
        assert!(offset < previous);
        previous = offset;
    }
    assert!((lambda_shift(lambda, &schedule, 10).unwrap() - lambda).norm() <= 0.05);
}

#[test]
fn harmonic_diagnostic_tracks_lambda_offset() {
    // the distance to T_{|λ} is governed by |λ_n − λ| rather than by truncation
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    let k = KernelSpec::rank1_gauss();
    let schedule = ShiftSchedule::harmonic(c(1.0, 0.0));
    let r = shifted_diagnostic(
        &k,
        &trunc,
        c(0.3, 0.0),
        &schedule,
        &ns,
        &default_eval_grid(),
        None,
        Variant::Plain,
        cfg(),
    )
    .unwrap();
    assert!(r.is_monotone());
    let norm = 1.2533141373155003;
    for (&n, &d) in ns.iter().zip(&r.sup_t_diff) {
        let lambda_n = lambda_shift(c(0.3, 0.0), &schedule, n).unwrap().re;
        // at s = t = 0 the rank-1 resolvent is 1/(1 − λc)
        let offset = 1.0 / (1.0 - lambda_n * norm) - 1.0 / (1.0 - 0.3 * norm);
        if n >= 6 {
            assert!((d - offset).abs() / offset < 1e-3, "n={n}: {d} vs {offset}");
        }
    }
}

#[test]
fn probe_inside_disk_is_bounded() {
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    let r = boundedness_probe(
        &KernelSpec::rank1_gauss(),
        &trunc,
        c(0.3, 0.0),
        &ShiftSchedule::zero(),
        &ns,
        cfg(),
    )
    .unwrap();
    assert!(r.bounded);
    assert!(r.m <= PROBE_BOUND * (1.0 + 1e-9));
    // every ζ in the punctured disk of radius 1/‖T‖
    for zeta in [c(-0.7, 0.0), c(0.0, 0.75), c(0.5, -0.5)] {
        let r = boundedness_probe(
            &KernelSpec::gauss_cauchy(),
            &trunc,
            zeta,
            &ShiftSchedule::zero(),
            &ns,
            cfg(),
        )
        .unwrap();
        assert!(r.bounded, "{zeta}");
    }
}

#[test]
fn probe_at_characteristic_value_is_unbounded() {
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    let r = boundedness_probe(
        &KernelSpec::rank1_gauss(),
        &trunc,
        c(0.7978846, 0.0),
        &ShiftSchedule::zero(),
        &ns,
        cfg(),
    )
    .unwrap();
    assert!(!r.bounded);
    assert!(r.m.is_infinite());
}

#[test]
fn tail_sequences() {
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    let outer = Discretization::interval(-12.0, 12.0, cfg()).unwrap();
    let r = tail_condition_report(&KernelSpec::rank1_gauss(), &trunc, 1, &ns, &outer).unwrap();
    assert!(r.plain.windows(2).all(|w| w[1] < w[0]));
    assert!(r.strong_convergence);
    for (tau, want) in RANK1_TAIL {
        let i = r.tau_values.iter().position(|&t| t == tau).unwrap();
        assert!(
            (r.plain[i] - want).abs() <= 1e-6 * want,
            "τ={tau}: {} vs {want}",
            r.plain[i]
        );
    }
    assert!(*r.plain.last().unwrap() < 1e-8);
    let zero = tail_condition_report(&KernelSpec::zero(), &trunc, 1, &ns, &outer).unwrap();
    assert!(zero.plain.iter().chain(&zero.tilde).all(|&v| v == 0.0));
    let odd = tail_condition_report(&KernelSpec::rank1_odd(), &trunc, 1, &ns, &outer).unwrap();
    assert!(odd.plain.iter().all(|&v| v <= 1e-12));
}

#[test]
fn compact_sweep_envelope() {
    let trunc = TruncationScheme::default();
    let ns = default_n_list(&trunc);
    let k = KernelSpec::rank1_gauss();
    let lambdas = [c(0.1, 0.0), c(0.3, 0.0), c(0.5, 0.0), c(0.3, 0.2)];
    let base = compact_sweep(&k, &trunc, &lambdas, &ns, &default_eval_grid(), cfg()).unwrap();
    assert!(base.skipped.is_empty());
    assert!(base.envelope.is_monotone());
    assert!(base.envelope.final_max().unwrap() <= 1e-6);

    let mut with_char = lambdas.to_vec();
    with_char.push(c(0.7978846, 0.0));
    let swept = compact_sweep(&k, &trunc, &with_char, &ns, &default_eval_grid(), cfg()).unwrap();
    assert_eq!(swept.skipped, vec![c(0.7978846, 0.0)]);
    for (a, b) in base.envelope.sup_t_diff.iter().zip(&swept.envelope.sup_t_diff) {
        assert!((a - b).abs() <= 1e-9);
    }
}
