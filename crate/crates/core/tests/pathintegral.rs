use nonholonomic::connection::Variant;
use nonholonomic::pathintegral::{
    build_propagator, delta_jacobian, delta_jacobian_exact, effective_potential, extract_spectrum,
    jacobian_action_naive, jacobian_action_naive_with, jacobian_action_qep, jacobian_naive_exact, midpoint_action,
    postpoint_action, prepoint_action, KernelSettings, Manifold, MeasureMode, ShortTimeConfig, SignMode,
    SlicedPropagator, SpectrumSettings,
};
use nonholonomic::{library, Chart, GeomError};

fn cfg() -> ShortTimeConfig {
    ShortTimeConfig::new(1.3, 0.9, 0.02, SignMode::ImaginaryTime).unwrap()
}

fn observed_order(err: impl Fn(f64) -> f64) -> f64 {
    (err(1.0) / err(0.5)).log2()
}

/// `(M/2ε)|x(q) − x(q − Δq)|²` for polar coordinates, written out by hand.
fn polar_exact(q: [f64; 2], dq: [f64; 2], c: &ShortTimeConfig) -> f64 {
    let p = |r: f64, t: f64| [r * t.cos(), r * t.sin()];
    let a = p(q[0], q[1]);
    let b = p(q[0] - dq[0], q[1] - dq[1]);
    c.mass / (2.0 * c.epsilon) * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
}

/// `(M/2ε) d²` with `d` the great-circle distance on the sphere of radius `r`.
fn sphere_exact(r: f64, q: [f64; 2], dq: [f64; 2], c: &ShortTimeConfig) -> f64 {
    let x = |t: f64, f: f64| [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
    let a = x(q[0], q[1]);
    let b = x(q[0] - dq[0], q[1] - dq[1]);
    let chord = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let d = 2.0 * r * (chord / 2.0).asin();
    c.mass / (2.0 * c.epsilon) * d * d
}

#[test]
fn cartesian_actions_are_exact() {
    let c = cfg();
    let chart = library::cartesian(2);
    let dq = [0.3, -0.7];
    let expect = c.mass / (2.0 * c.epsilon) * (0.09 + 0.49);
    let post: f64 = postpoint_action(&chart, &[1.0, 2.0], &dq, &c).unwrap();
    let mid: f64 = midpoint_action(&chart, &[1.0, 2.0], &dq, &c).unwrap();
    assert!((post - expect).abs() < 1e-12 * expect);
    assert!((mid - expect).abs() < 1e-12 * expect);
    for v in [
        jacobian_action_naive(&chart, &[1.0, 2.0], &dq).unwrap(),
        jacobian_action_qep(&chart, &[1.0, 2.0], &dq).unwrap(),
        delta_jacobian(&chart, &[1.0, 2.0], &dq).unwrap(),
    ] {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn leading_term_dominates_for_small_steps() {
    let c = cfg();
    let chart = library::sphere(1.0);
    let q = [1.1, 0.3];
    for s in [1e-2, 1e-3, 1e-4] {
        let dq = [0.6 * s, -0.8 * s];
        let a: f64 = postpoint_action(&chart, &q, &dq, &c).unwrap();
        let lead = c.mass / (2.0 * c.epsilon) * (dq[0] * dq[0] + q[0].sin().powi(2) * dq[1] * dq[1]);
        assert!((a / lead - 1.0).abs() < 3.0 * s, "s = {s}");
    }
}

#[test]
fn polar_postpoint_and_midpoint_match_the_exact_map() {
    let c = cfg();
    let chart = library::polar();
    let q = [1.4, 0.5];
    let dir = [0.05, 0.04];
    let post_err = |s: f64| {
        let dq = [dir[0] * s, dir[1] * s];
        let a: f64 = postpoint_action(&chart, &q, &dq, &c).unwrap();
        (a - polar_exact(q, dq, &c)).abs()
    };
    let mid_err = |s: f64| {
        let dq = [dir[0] * s, dir[1] * s];
        let qm = [q[0] - dq[0] / 2.0, q[1] - dq[1] / 2.0];
        let a: f64 = midpoint_action(&chart, &qm, &dq, &c).unwrap();
        (a - polar_exact(q, dq, &c)).abs()
    };
    assert!(observed_order(post_err) > 4.7, "postpoint order {}", observed_order(post_err));
    assert!(observed_order(mid_err) > 4.7, "midpoint order {}", observed_order(mid_err));
}

#[test]
fn sphere_forms_approach_the_geodesic_distance() {
    let c = cfg();
    let r = 1.2;
    let chart = library::sphere(r);
    let q = [1.0, 0.2];
    let dir = [0.04, 0.05];
    let at = |s: f64| {
        let dq = [dir[0] * s, dir[1] * s];
        let qm = [q[0] - dq[0] / 2.0, q[1] - dq[1] / 2.0];
        let post: f64 = postpoint_action(&chart, &q, &dq, &c).unwrap();
        let mid: f64 = midpoint_action(&chart, &qm, &dq, &c).unwrap();
        (post, mid, sphere_exact(r, q, dq, &c))
    };
    let post_order = observed_order(|s| (at(s).0 - at(s).2).abs());
    let mid_order = observed_order(|s| (at(s).1 - at(s).2).abs());
    let diff_order = observed_order(|s| (at(s).0 - at(s).1).abs());
    assert!(post_order > 4.7, "{post_order}");
    assert!(mid_order > 4.7, "{mid_order}");
    assert!(diff_order > 4.7, "{diff_order}");
}

#[test]
fn prepoint_form_is_dual_to_the_postpoint_form() {
    let c = cfg();
    for (chart, q) in [(library::sphere(1.0), [1.2, 0.4]), (library::polar(), [1.1, 0.3])] {
        let err = |s: f64| {
            let dq = [0.06 * s, -0.05 * s];
            let pre = [q[0] - dq[0], q[1] - dq[1]];
            let a: f64 = postpoint_action(&chart, &q, &dq, &c).unwrap();
            let b: f64 = prepoint_action(&chart, &pre, &dq, &c).unwrap();
            (a - b).abs()
        };
        assert!(observed_order(err) > 4.7, "{}", observed_order(err));
    }
}

#[test]
fn naive_jacobian_examples() {
    let polar = library::polar();
    let r = 2.0;
    for d in [0.02, 0.01] {
        let a: f64 = jacobian_action_naive(&polar, &[r, 1.0], &[d, 0.0]).unwrap();
        assert!((a - (-d / r - d * d / (2.0 * r * r))).abs() < 1e-13);
    }
    // against the √g ratio on charts with non-constant volume element
    let torsion = library::synthetic_torsion(0.4);
    for (chart, q) in [(library::sphere(1.0), [0.9, 0.1]), (torsion, [0.3, 0.1]), (library::polar(), [1.2, 0.0])] {
        let err = |s: f64| {
            let dq = [0.08 * s, 0.05 * s];
            let a: f64 = jacobian_action_naive(&chart, &q, &dq).unwrap();
            (a - jacobian_naive_exact(&chart, &q, &dq).unwrap()).abs()
        };
        assert!(observed_order(err) > 2.7, "{}", observed_order(err));
    }
}

#[test]
fn qep_jacobian_equals_naive_on_holonomic_flat_charts() {
    let skew = Chart::from_json(r#"{"dim":2,"kind":"map","exprs":["q1+0.3*q2^2","q2+0.2*sin(q1)"]}"#).unwrap();
    for (chart, q) in [(library::polar(), [1.3, 0.4]), (library::cartesian(2), [0.1, 0.2]), (skew, [0.4, -0.5])] {
        for dq in [[0.05, 0.02], [-0.1, 0.07], [0.0, 0.2]] {
            let a: f64 = jacobian_action_naive(&chart, &q, &dq).unwrap();
            let b: f64 = jacobian_action_qep(&chart, &q, &dq).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn qep_jacobian_differs_from_naive_with_torsion() {
    let alpha = 0.3;
    let chart = library::synthetic_torsion(alpha);
    let q = [0.2, 0.1];
    let diff = |dq: [f64; 2]| -> f64 {
        jacobian_action_qep(&chart, &q, &dq).unwrap() - jacobian_action_naive(&chart, &q, &dq).unwrap()
    };
    // along q¹ the first-order terms differ by the torsion trace S_1μ^μ = α/(2(1 + αq¹))
    let trace = alpha / (2.0 * (1.0 + alpha * q[0]));
    for d in [1e-3, 1e-4] {
        assert!((diff([d, 0.0]) / d - trace).abs() < 2.0 * d);
    }
    // once the trace term is removed the remainder is of second order
    let rest = |s: f64| (diff([0.1 * s, 0.1 * s]) - trace * 0.1 * s).abs();
    assert!(rest(1.0) > 1e-5);
    let order = observed_order(rest);
    assert!((order - 2.0).abs() < 0.1, "{order}");
}

#[test]
fn delta_jacobian_is_the_ricci_term_on_the_sphere() {
    let r = 1.5;
    let chart = library::sphere(r);
    let q: [f64; 2] = [1.0, 0.3];
    // Ricci tensor of the round sphere: g_μν / r²
    let ricci_term = |dq: [f64; 2]| (dq[0] * dq[0] + q[0].sin().powi(2) * dq[1] * dq[1]) / 6.0;
    let dq = [0.03, -0.02];
    let series: f64 = delta_jacobian(&chart, &q, &dq).unwrap();
    assert!((series - ricci_term(dq)).abs() < 1e-12);
    let err = |s: f64| {
        let dq = [0.1 * s, 0.08 * s];
        (delta_jacobian_exact(&chart, &q, &dq).unwrap() - ricci_term(dq)).abs()
    };
    assert!(observed_order(err) >= 2.7, "{}", observed_order(err));

    let polar = library::polar();
    let flat = |s: f64| delta_jacobian_exact(&polar, &[1.2, 0.3], &[0.1 * s, 0.1 * s]).unwrap().abs();
    assert!(flat(0.25) < 1e-3 && flat(0.25) < flat(1.0) / 20.0);
}

#[test]
fn contortion_drops_out_of_the_naive_jacobian() {
    let chart = library::synthetic_torsion(0.5);
    for q in [[0.1, 0.2], [-0.4, 0.9], [0.7, -0.3]] {
        let dq = [0.07, -0.03];
        let a: f64 = jacobian_action_naive_with(&chart, &q, &dq, Variant::Affine).unwrap();
        let b: f64 = jacobian_action_naive_with(&chart, &q, &dq, Variant::Riemann).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn effective_potential_examples() {
    let c = cfg();
    let flat: f64 = effective_potential(&library::polar(), &[1.0, 0.2], &c).unwrap();
    assert!(flat.abs() < 1e-10);
    let r = 0.8;
    let v: f64 = effective_potential(&library::sphere(r), &[1.3, 2.0], &c).unwrap();
    let magnitude = c.hbar * c.hbar / (3.0 * c.mass * r * r);
    assert!((v.abs() - magnitude).abs() < 1e-10);
    assert!(v < 0.0);
    let lam: f64 = 2.5;
    let scaled: f64 = effective_potential(&library::sphere(r * lam), &[1.3, 2.0], &c).unwrap();
    assert!((scaled - v / (lam * lam)).abs() < 1e-12);
}

#[test]
fn invalid_configurations_are_rejected() {
    assert!(ShortTimeConfig::new(0.0, 1.0, 0.01, SignMode::ImaginaryTime).is_err());
    assert!(ShortTimeConfig::new(1.0, 1.0, -0.01, SignMode::ImaginaryTime).is_err());
    let real = ShortTimeConfig::new(1.0, 1.0, 0.01, SignMode::RealTime).unwrap();
    let ring = Manifold::Ring { r: 1.0, points: 64 };
    assert!(matches!(
        build_propagator(ring, &real, MeasureMode::Qep),
        Err(GeomError::InvalidParameter(_))
    ));
    let coarse = Manifold::Ring { r: 1.0, points: 8 };
    assert!(matches!(
        build_propagator(coarse, &ShortTimeConfig::default(), MeasureMode::Qep),
        Err(GeomError::GridTooCoarse { .. })
    ));
    let dq = [0.1, 0.2, 0.3];
    assert!(matches!(
        postpoint_action(&library::polar(), &[1.0, 0.0], &dq, &cfg()),
        Err(GeomError::DimensionMismatch(_))
    ));
}

#[test]
fn flat_kernel_obeys_the_semigroup_law() {
    let ring = Manifold::Ring { r: 1.0, points: 256 };
    let base = ShortTimeConfig::new(1.0, 1.0, 0.0055, SignMode::ImaginaryTime).unwrap();
    let settings = KernelSettings {
        cutoff: 10.0,
        ..KernelSettings::default()
    };
    let k1 = SlicedPropagator::build(ring, &base, MeasureMode::Qep, settings).unwrap();
    let k2 = SlicedPropagator::build(ring, &base.with_epsilon(0.011), MeasureMode::Qep, settings).unwrap();
    let composed = k1.compose(&k1).unwrap();
    let diff = (&composed - k2.dense()).amax();
    assert!(diff < 1e-8, "{diff}");
    assert!((&k1.clone().with_slices(2).amplitude() - &composed).amax() < 1e-15);

    // associativity of the slice product
    let a = (&k1.dense() * &k2.dense()) * k1.dense();
    let b = k1.dense() * (&k2.dense() * k1.dense());
    assert!((&a - &b).amax() < 1e-12);
}

#[test]
fn kernel_entries_are_positive_and_measures_agree_on_the_ring() {
    let ring = Manifold::Ring { r: 1.0, points: 128 };
    let c = ShortTimeConfig::default();
    let dense: Vec<_> = MeasureMode::ALL
        .iter()
        .map(|&m| build_propagator(ring, &c, m).unwrap())
        .collect();
    for p in &dense {
        assert!(p.row_entries(0).iter().all(|e| e.weight > 0.0));
        let (lo, hi) = p.row_sum_range();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }
    assert!((dense[0].dense() - dense[1].dense()).amax() < 1e-14);
    assert!((dense[0].dense() - dense[2].dense()).amax() < 1e-14);
}

#[test]
fn sphere_kernel_is_positive_with_bounded_rows() {
    let sphere = Manifold::Sphere {
        r: 1.0,
        theta_points: 32,
        phi_points: 64,
    };
    let c = ShortTimeConfig::new(1.0, 1.0, 0.02, SignMode::ImaginaryTime).unwrap();
    for m in MeasureMode::ALL {
        let p = build_propagator(sphere, &c, m).unwrap();
        for class in 0..32 {
            assert!(p.row_entries(class).iter().all(|e| e.weight > 0.0 && e.weight.is_finite()));
        }
        let (lo, hi) = p.row_sum_range();
        assert!(lo > 0.9 && hi < 1.1, "{m}: {lo} {hi}");
        // one slice applied to the constant function matches the row sums
        let psi = vec![1.0; p.size()];
        let out = p.apply(&psi).unwrap();
        assert!(out.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
    }
}

fn ring_spectrum(points: usize, r: f64) -> Vec<f64> {
    let c = ShortTimeConfig::default();
    let rep = extract_spectrum(Manifold::Ring { r, points }, &c, MeasureMode::Qep, &SpectrumSettings::default()).unwrap();
    assert_eq!(rep.degeneracies(), vec![1, 2, 2, 2]);
    rep.energies()
}

#[test]
fn ring_spectrum_is_the_free_rotor() {
    let r = 1.0;
    let e = ring_spectrum(256, r);
    let unit = 1.0 / (2.0 * r * r);
    assert!(e[0].abs() < 1e-3 * unit);
    for m in 1..4 {
        let exact = unit * (m * m) as f64;
        assert!((e[m] - exact).abs() < 0.01 * exact, "m = {m}: {} vs {exact}", e[m]);
    }
    let doubled = ring_spectrum(512, r);
    for m in 1..4 {
        assert!((doubled[m] - e[m]).abs() < 0.005 * e[m]);
    }
}

#[test]
fn ring_spectrum_scales_with_radius_squared() {
    let e1 = ring_spectrum(256, 1.0);
    let e2 = ring_spectrum(256, 1.5);
    for m in 1..4 {
        assert!((e2[m] * 2.25 / e1[m] - 1.0).abs() < 0.01);
    }
}

#[test]
fn sphere_spectrum_follows_l_l_plus_one_and_the_naive_shift() {
    let sphere = Manifold::Sphere {
        r: 1.0,
        theta_points: 48,
        phi_points: 96,
    };
    let c = ShortTimeConfig::default();
    let settings = SpectrumSettings {
        n_levels: 3,
        ..SpectrumSettings::default()
    };
    let qep = extract_spectrum(sphere, &c, MeasureMode::Qep, &settings).unwrap();
    let naive = extract_spectrum(sphere, &c, MeasureMode::NaiveDeWitt, &settings).unwrap();
    assert_eq!(qep.degeneracies(), vec![1, 3, 5]);
    let e = qep.energies();
    for l in 1..3 {
        let exact = (l * (l + 1)) as f64 / 2.0;
        assert!((e[l] - e[0] - exact).abs() < 0.03 * exact, "l = {l}: {}", e[l]);
    }
    let shift = 1.0 / 3.0;
    for (a, b) in naive.energies().iter().zip(&e) {
        assert!(((a - b) - shift).abs() < 0.05 * shift, "shift {}", a - b);
    }
    assert!(qep.max_relative_imaginary < 1e-6);
}
