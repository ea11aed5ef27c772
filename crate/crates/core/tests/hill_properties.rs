mod common;

use std::f64::consts::PI;

use common::{diffeo, rng};
use rand::Rng;
use rayon::prelude::*;
use virasoro_flows::hill::{
    classify, classify_dual, conjugacy_invariance_check, expansion_check, expansion_coefficient,
    monodromy, DualOrbit, CLASSIFY_TOLERANCE,
};
use virasoro_flows::spectral::random_bandlimited;
use virasoro_flows::virasoro::group_coad;
use virasoro_flows::{DualElement, HillOperator, OrbitKind, PeriodicField};

const N: usize = 256;

fn constant_q(q: f64) -> HillOperator {
    HillOperator::from_q(PeriodicField::constant(N, q).unwrap())
}

fn closed_form_trace(q: f64) -> f64 {
    if q >= 0.0 {
        2.0 * (2.0 * PI * q.sqrt()).cos()
    } else {
        2.0 * (2.0 * PI * (-q).sqrt()).cosh()
    }
}

#[test]
fn constant_potentials_match_closed_forms() {
    for q in [0.0, 0.1, 0.3, 0.5, 0.7, 2.0, 3.3, -0.05, -0.3, -0.5] {
        let m = monodromy(&constant_q(q), 0.0).unwrap();
        let expected = closed_form_trace(q);
        assert!((m.trace - expected).abs() < 1e-9 * expected.abs().max(1.0), "q = {q}: {} vs {expected}", m.trace);
    }
}

#[test]
fn monodromy_is_unimodular_on_a_random_corpus() {
    let mut r = rng(31);
    let corpus: Vec<HillOperator> = (0..100)
        .map(|_| {
            let c = r.gen_range(-1.0..2.0);
            let amp = r.gen_range(0.1..1.0);
            let q = random_bandlimited(&mut r, N, 6, amp).unwrap().map(|x| x + c);
            HillOperator::from_q(q)
        })
        .collect();
    let worst = corpus
        .par_iter()
        .map(|op| monodromy(op, 0.0).unwrap().det_deviation())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn camassa_holm_freezing_point_holonomy() {
    // u = 1/2, a = 1: q = −1/2, eigenvalues e^{±π√2}
    let op = HillOperator::new(PeriodicField::constant(N, 0.5).unwrap(), 1.0).unwrap();
    let m = monodromy(&op, 0.0).unwrap();
    let expected = (PI * 2f64.sqrt()).exp() + (-PI * 2f64.sqrt()).exp();
    assert!((m.trace / expected - 1.0).abs() < 1e-6);
    assert!((m.trace - 85.03).abs() < 5e-3);
    assert_eq!(classify(&op, CLASSIFY_TOLERANCE).unwrap().kind, OrbitKind::Hyperbolic);
}

#[test]
fn identity_monodromy_needs_at_least_two_half_turns() {
    for (q, winding) in [(1.0, 2), (4.0, 4), (9.0, 6)] {
        let m = monodromy(&constant_q(q), 0.0).unwrap();
        assert!(m.distance_to_scalar(1.0) < 1e-8, "q = {q}");
        assert_eq!(m.winding, winding);
        assert!(m.winding >= 2);
    }
    let m = monodromy(&constant_q(0.25), 0.0).unwrap();
    assert!(m.distance_to_scalar(-1.0) < 1e-8);
    assert_eq!(m.winding, 1);
}

#[test]
fn orbit_presets() {
    let elliptic = classify(&constant_q(0.5), CLASSIFY_TOLERANCE).unwrap();
    assert_eq!(elliptic.kind, OrbitKind::Elliptic);
    assert_eq!(elliptic.winding, 1);
    assert!((elliptic.trace - 2.0 * (2f64.sqrt() * PI).cos()).abs() < 1e-8);

    let hs = HillOperator::new(PeriodicField::zeros(N).unwrap(), 1.0).unwrap();
    let c = classify(&hs, CLASSIFY_TOLERANCE).unwrap();
    assert_eq!(c.kind, OrbitKind::Jordan);
    assert_eq!(c.winding, 0);

    let flat = DualElement::constant(N, 0.25, 0.0).unwrap();
    match classify_dual(&flat, CLASSIFY_TOLERANCE).unwrap() {
        DualOrbit::Differential { sqrt_casimir } => assert!((sqrt_casimir - PI).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn trace_and_winding_are_coadjoint_invariants() {
    let mut r = rng(32);
    let cases: Vec<_> = (0..20)
        .map(|_| {
            let phi = diffeo(&mut r, N, 3, 0.5);
            let c = r.gen_range(-0.5..1.5);
            let q = random_bandlimited(&mut r, N, 4, 0.5).unwrap().map(|x| x + c);
            let a = if r.gen_bool(0.5) { 1.0 } else { -2.0 };
            let u = &q * -a;
            (HillOperator::new(u, a).unwrap(), phi)
        })
        .collect();
    let residuals: Vec<f64> = cases
        .par_iter()
        .map(|(op, phi)| conjugacy_invariance_check(op, phi).unwrap())
        .collect();
    for res in residuals {
        assert!(res < 1e-6, "{res}");
    }
}

#[test]
fn full_schwarzian_weight_breaks_invariance() {
    // with weight a instead of a/2 the trace moves at O(1)
    let mut r = rng(33);
    let phi = diffeo(&mut r, N, 3, 0.5);
    let op = HillOperator::new(PeriodicField::constant(N, -0.3).unwrap(), 1.0).unwrap();
    let m = op.to_dual();
    let half = group_coad(&phi, &m).unwrap();
    let s = virasoro_flows::virasoro::schwarzian(&phi).unwrap();
    let full = DualElement::new(&half.u - &(&s * (0.5 * m.a)), m.a);
    let t0 = monodromy(&op, 0.0).unwrap().trace;
    let t_half = monodromy(&HillOperator::from_dual(&half).unwrap(), 0.0).unwrap().trace;
    let t_full = monodromy(&HillOperator::from_dual(&full).unwrap(), 0.0).unwrap().trace;
    assert!((t0 - t_half).abs() < 1e-6);
    assert!((t0 - t_full).abs() > 1e-2);
}

#[test]
fn casimir_expansion_decays_at_the_predicted_rate() {
    assert_eq!(expansion_coefficient(1), 0.5);
    assert_eq!(expansion_coefficient(2), 0.125);
    assert_eq!(expansion_coefficient(3), 0.0625);

    let u = PeriodicField::constant(N, 0.6).unwrap();
    let rows = expansion_check(&u, 1.0, &[5.0, 10.0], 3).unwrap();
    let ratio = rows[0].residual.abs() / rows[1].residual.abs();
    let predicted = 2f64.powi(7);
    assert!(ratio > predicted / 2.0 && ratio < predicted * 2.0, "ratio {ratio}");
}

#[test]
fn casimir_expansion_for_a_non_constant_potential() {
    let q = PeriodicField::from_fn(N, |x| 0.4 * x.cos() + 0.2 * (2.0 * x).sin() + 0.1).unwrap();
    let u = &q * 1.0;
    // a = −1 so that q = u
    let lambdas = [4.0, 8.0];
    let rows1 = expansion_check(&u, -1.0, &lambdas, 1).unwrap();
    let rows3 = expansion_check(&u, -1.0, &lambdas, 3).unwrap();
    for (a, b) in rows1.iter().zip(&rows3) {
        assert!(b.residual.abs() < a.residual.abs());
    }
    let ratio = rows3[0].residual.abs() / rows3[1].residual.abs();
    assert!(ratio > 2f64.powi(6), "ratio {ratio}");
}

#[test]
fn winding_does_not_depend_on_the_base_point() {
    let sine = |c: f64, k: f64| {
        let s = PeriodicField::from_fn(N, move |x| c * (k * x).sin()).unwrap();
        virasoro_flows::CircleDiffeo::from_displacement(s).unwrap()
    };
    // HS freezing point moved by x + 0.3 sin x stays a Jordan block with winding 0
    let hs = HillOperator::new(PeriodicField::zeros(N).unwrap(), 1.0).unwrap();
    let moved = HillOperator::from_dual(&group_coad(&sine(0.3, 1.0), &hs.to_dual()).unwrap()).unwrap();
    let c = classify(&moved, CLASSIFY_TOLERANCE).unwrap();
    assert_eq!((c.kind, c.winding), (OrbitKind::Jordan, 0));
    assert!((c.trace - 2.0).abs() < 1e-8);

    let ch = HillOperator::new(PeriodicField::constant(N, 0.5).unwrap(), 1.0).unwrap();
    assert!(conjugacy_invariance_check(&ch, &sine(0.2, 2.0)).unwrap() < 1e-6);
    let rotated = virasoro_flows::CircleDiffeo::from_displacement(PeriodicField::constant(N, 1.1).unwrap()).unwrap();
    for q in [-0.3, 0.0, 0.25, 1.0, 1.7] {
        let op = HillOperator::from_q(PeriodicField::from_fn(N, |x| q + 0.3 * x.cos()).unwrap());
        assert!(conjugacy_invariance_check(&op, &rotated).unwrap() < 1e-6, "q = {q}");
    }
}
