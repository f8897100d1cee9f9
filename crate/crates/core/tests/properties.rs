use proptest::prelude::*;

use symrad::bench::{field_file_name, run_benchmark, ExperimentConfig, Method, Outcome};
use symrad::forward::{radon_forward, Sinogram, SinogramSpec};
use symrad::inversion::{
    invert_m2_fourier, reconstruction_error, CircleMeanParams, ErrorNorm, SpectralParams,
};
use symrad::io;
use symrad::ndim::{m2_evaluate_nd, radon_forward_nd, DirectionScheme, TomogramSpec};
use symrad::phasespace::{Field, GaussianTerm, GridSpec, Phantom};
use symrad::quadrature::QuadratureSpec;

fn phantom_2d(terms: &[(f64, f64, f64, f64)]) -> Phantom {
    let terms = terms
        .iter()
        .map(|&(weight, alpha, cx, cy)| GaussianTerm {
            weight,
            alpha,
            center: vec![cx, cy],
        })
        .collect();
    Phantom::new(2, terms).unwrap()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Terms with alpha in [0.5, 1.2] centered inside [-3, 3]^2.
fn terms() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    proptest::collection::vec(
        (-2.0f64..2.0, 0.5f64..1.2, -3.0f64..3.0, -3.0f64..3.0),
        1..4,
    )
}

#[test]
fn m2_error_decreases_under_refinement() {
    let ph = Phantom::centered_gaussian(2, 1.0).unwrap();
    let quad = QuadratureSpec::default();
    let mut errors = Vec::new();
    for (a, m, n) in [(45, 64, 32), (90, 128, 64), (180, 256, 128)] {
        let sg = radon_forward(&ph, &SinogramSpec::new(a, m, 8.0).unwrap(), &quad).unwrap();
        let grid = GridSpec::new(2, 5.0, n).unwrap();
        let f = invert_m2_fourier(&sg, &grid, &SpectralParams::default()).unwrap();
        errors.push(reconstruction_error(&f, &ph, ErrorNorm::MaxAbs).unwrap());
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn methods_agree_on_the_largest_configuration() {
    let ph = Phantom::centered_gaussian(2, 1.0).unwrap();
    let sg = radon_forward(
        &ph,
        &SinogramSpec::new(180, 256, 8.0).unwrap(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    let grid = GridSpec::new(2, 5.0, 128).unwrap();
    let sp = SpectralParams::default();
    let cp = CircleMeanParams {
        n_r: 64,
        clip_to_support: true,
        ..CircleMeanParams::default()
    };
    let fields: Vec<Field> = Method::ALL
        .iter()
        .map(|m| m.invert(&sg, &grid, &sp, &cp).unwrap())
        .collect();
    for i in 0..3 {
        for j in i + 1..3 {
            let d = max_dev(fields[i].values(), fields[j].values());
            assert!(
                d <= 5e-2,
                "{} vs {}: {d}",
                Method::ALL[i].name(),
                Method::ALL[j].name()
            );
        }
    }
}

#[test]
fn benchmark_is_deterministic_and_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_path_buf();
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        methods = ["helgason", "m2", "circle-mean"]
        phantom = { terms = [{ weight = 1.0, alpha = 1.0, center = [0.3, -0.2] }] }
        sinogram = { n_angles = 64, n_offsets = 64, offset_halfwidth = 6.0 }
        grid = { dims = 2, half_width = 2.0, samples = 16 }
        circle_mean = { epsilon_schedule = [0.04, 0.02, 0.01], r_max = 3.0, n_r = 64, n_theta = 64 }
        "#,
    )
    .unwrap();
    let mut snapshots = Vec::new();
    for run in ["a", "b"] {
        let mut c = cfg.clone();
        c.output_dir = Some(dir.join(run));
        let report = run_benchmark(&c, &dir).unwrap();
        let names: Vec<Method> = report.results.iter().map(|r| r.method).collect();
        assert_eq!(names, cfg.methods);
        for r in &report.results {
            match r.outcome {
                Outcome::Completed {
                    max_abs,
                    l2,
                    median_seconds,
                } => assert!(max_abs >= 0.0 && l2 >= 0.0 && median_seconds > 0.0),
                Outcome::Failed { ref message, .. } => panic!("{}: {message}", r.method.name()),
            }
        }
        snapshots.push(
            cfg.methods
                .iter()
                .map(|&m| std::fs::read(dir.join(run).join(field_file_name(m))).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phantom_mass_on_a_covering_window(terms in terms()) {
        let ph = phantom_2d(&terms);
        // alpha >= 0.5 and |c| <= 3 leave a margin of 9 to the window edge
        let f = ph.to_field(&GridSpec::new(2, 12.0, 160).unwrap()).unwrap();
        let expect: f64 = terms.iter().map(|t| t.0).sum();
        prop_assert!((f.total_mass() - expect).abs() <= 1e-6);
    }

    #[test]
    fn mass_per_angle_and_reflection(terms in terms()) {
        let ph = phantom_2d(&terms);
        let spec = SinogramSpec::new(32, 256, 12.0).unwrap();
        let sg = radon_forward(&ph, &spec, &QuadratureSpec::default()).unwrap();
        let expect: f64 = terms.iter().map(|t| t.0).sum();
        for a in 0..spec.n_angles {
            prop_assert!((sg.row_mass(a) - expect).abs() <= 1e-4);
        }
        let half = spec.n_angles / 2;
        for a in 0..half {
            for m in 0..spec.n_offsets {
                let d = sg.get(a + half, spec.n_offsets - 1 - m) - sg.get(a, m);
                prop_assert!(d.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn forward_matches_closed_form(
        terms in proptest::collection::vec((-2.0f64..2.0, 0.7f64..1.2, -3.0f64..3.0, -3.0f64..3.0), 1..4),
    ) {
        // at alpha = 0.5 an off-center term loses ~1e-7 beyond |s| = 10
        let ph = phantom_2d(&terms);
        let spec = SinogramSpec::new(16, 64, 8.0).unwrap();
        let sg = radon_forward(&ph, &spec, &QuadratureSpec::default()).unwrap();
        for a in 0..spec.n_angles {
            for m in 0..spec.n_offsets {
                let exact = ph.radon(spec.angle(a), spec.offset(m)).unwrap();
                prop_assert!((sg.get(a, m) - exact).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn spectral_inverters_are_linear(t1 in terms(), t2 in terms(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let spec = SinogramSpec::new(48, 64, 8.0).unwrap();
        let quad = QuadratureSpec::default();
        let s1 = radon_forward(&phantom_2d(&t1), &spec, &quad).unwrap();
        let s2 = radon_forward(&phantom_2d(&t2), &spec, &quad).unwrap();
        let mix: Vec<f64> = s1.values().iter().zip(s2.values()).map(|(x, y)| a * x + b * y).collect();
        let mix = Sinogram::new(spec, mix).unwrap();
        let grid = GridSpec::new(2, 4.0, 16).unwrap();
        let cp = CircleMeanParams { r_max: 2.0, n_r: 64, n_theta: 64, ..CircleMeanParams::default() };
        for method in Method::ALL {
            let f1 = method.invert(&s1, &grid, &SpectralParams::default(), &cp).unwrap();
            let f2 = method.invert(&s2, &grid, &SpectralParams::default(), &cp).unwrap();
            let fm = method.invert(&mix, &grid, &SpectralParams::default(), &cp).unwrap();
            let combo: Vec<f64> = f1.values().iter().zip(f2.values()).map(|(x, y)| a * x + b * y).collect();
            prop_assert!(max_dev(fm.values(), &combo) <= 1e-10, "{}", method.name());
        }
    }

    #[test]
    fn field_files_round_trip_bitwise(
        values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, 64),
        half_width in 0.1f64..100.0,
    ) {
        let f = Field::new(GridSpec::new(2, half_width, 8).unwrap(), values).unwrap();
        let back = io::decode_field(&io::encode_field(&f)).unwrap();
        prop_assert_eq!(back.spec(), f.spec());
        prop_assert!(back.values().iter().zip(f.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn sinogram_files_round_trip_bitwise(terms in terms(), x_max in 4.0f64..20.0) {
        let spec = SinogramSpec::new(12, 24, x_max).unwrap();
        let sg = radon_forward(&phantom_2d(&terms), &spec, &QuadratureSpec::default()).unwrap();
        let back = io::decode_sinogram(&io::encode_sinogram(&sg)).unwrap();
        prop_assert_eq!(back.spec(), sg.spec());
        prop_assert!(back.values().iter().zip(sg.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn three_dimensional_bijection(
        d in 0usize..120,
        m in 0usize..48,
        lambda in 0.1f64..10.0,
        cx in -1.0f64..1.0,
    ) {
        let ph = Phantom::new(3, vec![GaussianTerm { weight: 1.0, alpha: 0.9, center: vec![cx, 0.2, -0.4] }]).unwrap();
        let tspec = TomogramSpec::new(DirectionScheme::FibonacciSphere, 120, 48, 6.0).unwrap();
        let tg = radon_forward_nd(&ph, &tspec).unwrap();
        let omega = tg.directions().direction(d).to_vec();
        let x = tspec.offset(m);
        // restriction to the unit sphere
        prop_assert_eq!(m2_evaluate_nd(&tg, &omega, x).unwrap(), tg.row(d)[m]);
        // dilation then restriction
        let mu: Vec<f64> = omega.iter().map(|o| lambda * o).collect();
        let dilated = m2_evaluate_nd(&tg, &mu, lambda * x).unwrap() * lambda;
        prop_assert!((dilated - tg.row(d)[m]).abs() <= 1e-12);
    }
}

#[test]
fn centered_rows_agree_in_three_dimensions() {
    let ph = Phantom::centered_gaussian(3, 1.0).unwrap();
    let tspec = TomogramSpec::new(DirectionScheme::FibonacciSphere, 200, 64, 6.0).unwrap();
    let tg = radon_forward_nd(&ph, &tspec).unwrap();
    for d in 1..tspec.n_directions {
        assert!(max_dev(tg.row(0), tg.row(d)) <= 1e-12);
        assert!((tg.row_mass(d) - 1.0).abs() <= 1e-4);
    }
}
