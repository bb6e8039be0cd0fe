use std::f64::consts::PI;

use nonholonomic::connection::torsion_tensor;
use nonholonomic::defects::{
    angle_gradient, burgers_vector, frank_angle, make_disclination, make_dislocation, torsion_flux,
    winding_integral, LoopSpec,
};
use nonholonomic::GeomError;

/// Midpoint-rule Burgers integral around a circle, sampled densely; used as
/// an oracle independent of the polygon quadrature.
fn circle_burgers(chart: &nonholonomic::Chart, center: [f64; 2], radius: f64, n: usize) -> [f64; 2] {
    let mut b = [0.0; 2];
    let h = 2.0 * PI / n as f64;
    for k in 0..n {
        let a = (k as f64 + 0.5) * h;
        let q = [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
        let dq = [-radius * a.sin() * h, radius * a.cos() * h];
        let e = chart.eval_triad(&q).unwrap();
        for i in 0..2 {
            b[i] += e[(i, 0)] * dq[0] + e[(i, 1)] * dq[1];
        }
    }
    b
}

#[test]
fn defect_charts_at_zero_strength_and_examples() {
    let d = make_dislocation(0.0).unwrap();
    assert_eq!(d.chart.eval_triad(&[0.7, -1.2]).unwrap().to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let d = make_dislocation(0.1).unwrap();
    let e = d.chart.eval_triad(&[1.0_f64, 0.0]).unwrap();
    assert!((e[(1, 1)] - 1.1).abs() < 1e-15 && e[(0, 0)] == 1.0 && e[(0, 1)] == 0.0 && e[(1, 0)] == 0.0);
    let c = make_disclination(0.0).unwrap();
    let g = c.chart.metric(&[-0.3_f64, 0.8]).unwrap();
    assert!((g[(0, 0)] - 1.0).abs() < 1e-15 && g[(0, 1)].abs() < 1e-15 && (g[(1, 1)] - 1.0).abs() < 1e-15);
    assert!(matches!(make_disclination(0.9), Err(GeomError::InvalidParameter(_))));
    assert!(matches!(make_dislocation(f64::NAN), Err(GeomError::InvalidParameter(_))));
}

#[test]
fn winding_integrals() {
    let grad = angle_gradient();
    let w = winding_integral(&grad, &LoopSpec::square([0.0, 0.0], 0.5)).unwrap();
    assert!((w - 2.0 * PI).abs() < 1e-6);
    assert!(winding_integral(&grad, &LoopSpec::square([1.5, -1.0], 0.5)).unwrap().abs() < 1e-8);
    let twice = LoopSpec::polygon([0.0, 0.2], 0.8, 16, 2);
    assert!((winding_integral(&grad, &twice).unwrap() - 4.0 * PI).abs() < 1e-6);
    assert!((twice.winding_number([0.0, 0.0]) - 2.0).abs() < 1e-12);
}

#[test]
fn burgers_vector_raw_and_normalised() {
    let eps = 0.05;
    let d = make_dislocation(eps).unwrap();
    let sq = LoopSpec::square([0.0, 0.0], 1.0);
    let b = burgers_vector(&d.chart, &sq).unwrap();
    assert!(b.b[0].abs() < 1e-6);
    assert!((b.b[1] - 2.0 * PI * eps).abs() < 1e-6);
    assert!((b.b_over_2pi[1] - eps).abs() < 1e-6);

    let oracle = circle_burgers(&d.chart, [0.0, 0.0], 1.0, 20_000);
    assert!((oracle[1] - b.b[1]).abs() < 1e-6);

    let zero = burgers_vector(&make_dislocation(0.0).unwrap().chart, &sq).unwrap();
    assert!(zero.b.iter().all(|x| x.abs() < 1e-12));
    let off = burgers_vector(&d.chart, &LoopSpec::square([2.0, 2.0], 0.5)).unwrap();
    assert!(off.b.iter().all(|x| x.abs() < 1e-8));
}

#[test]
fn burgers_vector_is_a_homotopy_invariant() {
    let d = make_dislocation(0.1).unwrap();
    let loops = [
        LoopSpec::square([0.0, 0.0], 0.5),
        LoopSpec::square([0.2, -0.1], 2.0),
        LoopSpec::polygon([0.1, 0.1], 0.7, 9, 1),
        LoopSpec::new(vec![vec![-0.3, -0.4], vec![1.5, -0.2], vec![0.2, 0.1], vec![0.4, 1.2], vec![-1.0, 0.6]], 16)
            .unwrap(),
    ];
    let reference = burgers_vector(&d.chart, &loops[0]).unwrap().b;
    for lp in &loops[1..] {
        let b = burgers_vector(&d.chart, lp).unwrap().b;
        for i in 0..2 {
            assert!((b[i] - reference[i]).abs() < 1e-6, "{b:?} vs {reference:?}");
        }
    }
}

#[test]
fn burgers_vector_is_linear_in_strength() {
    let sq = LoopSpec::square([0.0, 0.0], 0.8);
    let unit = burgers_vector(&make_dislocation(0.01).unwrap().chart, &sq).unwrap().b[1] / 0.01;
    for eps in [0.05, 0.1] {
        let b = burgers_vector(&make_dislocation(eps).unwrap().chart, &sq).unwrap().b[1];
        assert!((b / eps - unit).abs() / unit.abs() < 1e-6);
    }
}

#[test]
fn frank_angle_of_small_disclination() {
    let omega = 0.01;
    let d = make_disclination(omega).unwrap();
    let f = frank_angle(&d.chart, &LoopSpec::square([0.0, 0.0], 1.0)).unwrap();
    let expect = -2.0 * PI * omega;
    assert!((f - expect).abs() <= 0.02 * expect.abs(), "{f} vs {expect}");
    let off = frank_angle(&d.chart, &LoopSpec::square([-2.0, 1.0], 0.5)).unwrap();
    assert!(off.abs() < 1e-6);
    let zero = frank_angle(&make_disclination(0.0).unwrap().chart, &LoopSpec::square([0.0, 0.0], 1.0)).unwrap();
    assert!(zero.abs() < 1e-12);
}

#[test]
fn torsion_flux_is_concentrated_at_the_core() {
    let d = make_dislocation(0.1).unwrap();
    // pointwise torsion vanishes away from the line
    for q in [[0.5, 0.5], [-1.0, 0.3], [0.2, -2.0]] {
        assert!(torsion_tensor(&d.chart, &q).unwrap().max_abs() < 1e-10);
    }
    let inner = LoopSpec::polygon([0.0, 0.0], 0.3, 12, 1);
    let outer = LoopSpec::polygon([0.0, 0.0], 1.7, 12, 1);
    let fi = torsion_flux(&d, &inner).unwrap();
    let fo = torsion_flux(&d, &outer).unwrap();
    let b = burgers_vector(&d.chart, &outer).unwrap().b;
    for i in 0..2 {
        assert!((fi[i] - fo[i]).abs() < 1e-6);
        assert!((fo[i] - b[i]).abs() < 1e-8);
    }
    assert!(fo[1].abs() > 0.5);
    let z = torsion_flux(&make_dislocation(0.0).unwrap(), &outer).unwrap();
    assert!(z.iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn loop_validation() {
    assert!(matches!(
        LoopSpec::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 8),
        Err(GeomError::InvalidParameter(_))
    ));
    assert!(matches!(
        LoopSpec::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], 4),
        Err(GeomError::InsufficientSampling(_))
    ));
    let closed = LoopSpec::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], 8).unwrap();
    assert_eq!(closed.vertices.first(), closed.vertices.last());
}
