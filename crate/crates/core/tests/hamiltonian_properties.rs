mod common;

use common::{dual, rng, smooth};
use rand::Rng;
use virasoro_flows::euler_flow::euler_rhs;
use virasoro_flows::hamiltonian::{
    bihamiltonian_residual, calibrate_lenard_scale, directional_derivative, lenard_residual,
    lp_field, poisson_bracket, variational_derivative, CubicHamiltonian, DerivativeMode,
    KineticEnergy, LinearCombination, Scaled, Structure, H1, H3, H5,
};
use virasoro_flows::spectral::{derivative, invert_inertia, multiply_dealiased};
use virasoro_flows::virasoro::pairing;
use virasoro_flows::{AlgebraElement, DualElement, FrozenPoint, Functional, InertiaParams};

const N: usize = 256;
const FAMILY: [InertiaParams; 3] = [InertiaParams::KDV, InertiaParams::CH, InertiaParams::new(2.0, 0.5)];

#[test]
fn euler_flow_is_lie_poisson_for_minus_energy() {
    let mut r = rng(21);
    for p in FAMILY {
        for _ in 0..5 {
            let m = dual(&mut r, N, 16);
            let h = Scaled { factor: -1.0, inner: KineticEnergy { params: p } };
            let field = lp_field(&h, &m).unwrap();
            let rhs = euler_rhs(p, &m).unwrap();
            assert!((&field.u - &rhs).sup_norm() < 1e-10 * rhs.sup_norm().max(1.0));
            assert_eq!(field.a, 0.0);
        }
    }
}

#[test]
fn frozen_cubic_field_is_the_euler_field() {
    let mut r = rng(22);
    for p in FAMILY {
        for _ in 0..10 {
            let m = dual(&mut r, N, 16);
            let res = bihamiltonian_residual(p, &m, 0.25, 0.25).unwrap();
            assert!(res < 1e-8, "{p:?}: {res}");
        }
    }
}

#[test]
fn printed_cubic_coefficient_misses_by_half_alpha_w_wx() {
    let mut r = rng(23);
    for p in FAMILY {
        for _ in 0..5 {
            let m = dual(&mut r, N, 16);
            let w = invert_inertia(p, &m.u).unwrap();
            let wwx = multiply_dealiased(&w, &derivative(&w, 1).unwrap()).unwrap();
            let rhs = euler_rhs(p, &m).unwrap();
            let expected = 0.5 * p.alpha * wwx.sup_norm() / rhs.sup_norm();
            let res = bihamiltonian_residual(p, &m, 1.0 / 3.0, 0.25).unwrap();
            assert!((res - expected).abs() < 1e-9 * expected, "{res} vs {expected}");
            assert!(res > 1e-3);
        }
    }
}

fn functionals(p: InertiaParams, a: f64) -> Vec<Box<dyn Functional>> {
    vec![
        Box::new(H1),
        Box::new(H3),
        Box::new(H5 { gamma: -a }),
        Box::new(KineticEnergy { params: p }),
        Box::new(CubicHamiltonian::new(p)),
    ]
}

#[test]
fn gradients_satisfy_the_variational_identity() {
    let mut r = rng(24);
    let n = 64;
    for p in FAMILY {
        let m = dual(&mut r, n, 8);
        let xi = DualElement::new(smooth(&mut r, n, 8), r.gen_range(-1.0..1.0));
        for f in functionals(p, m.a) {
            let g = variational_derivative(f.as_ref(), &m, DerivativeMode::Analytic).unwrap();
            let lhs = directional_derivative(f.as_ref(), &m, &xi).unwrap();
            let rhs = pairing(&xi, &g).unwrap();
            assert!((lhs - rhs).abs() < 1e-7 * rhs.abs().max(1.0), "{}: {lhs} vs {rhs}", f.name());
        }
    }
}

#[test]
fn finite_difference_gradients_match() {
    let mut r = rng(25);
    let n = 64;
    for p in FAMILY {
        let m = dual(&mut r, n, 8);
        for f in functionals(p, m.a) {
            let a = variational_derivative(f.as_ref(), &m, DerivativeMode::Analytic).unwrap();
            let b = variational_derivative(f.as_ref(), &m, DerivativeMode::FiniteDifference).unwrap();
            let scale = a.sup_norm().max(1e-12);
            let err = a.sub(&b).unwrap().sup_norm();
            assert!(err < 1e-5 * scale, "{}: {err}", f.name());
        }
    }
}

#[test]
fn brackets_are_antisymmetric_and_bilinear() {
    let mut r = rng(26);
    let n = 128;
    let fp = FrozenPoint::ch(n).unwrap();
    for _ in 0..5 {
        let m = dual(&mut r, n, 10);
        let fs = functionals(InertiaParams::CH, m.a);
        for s in [Structure::LiePoisson, Structure::Frozen(&fp)] {
            for f in &fs {
                for g in &fs {
                    let fg = poisson_bracket(f.as_ref(), g.as_ref(), &m, s).unwrap();
                    let gf = poisson_bracket(g.as_ref(), f.as_ref(), &m, s).unwrap();
                    assert!((fg + gf).abs() < 1e-9 * fg.abs().max(1.0));
                }
            }
            let c = r.gen_range(-2.0..2.0);
            let combo = LinearCombination { terms: vec![(1.0, fs[3].as_ref()), (c, fs[4].as_ref())] };
            let lhs = poisson_bracket(&combo, fs[2].as_ref(), &m, s).unwrap();
            let rhs = poisson_bracket(fs[3].as_ref(), fs[2].as_ref(), &m, s).unwrap()
                + c * poisson_bracket(fs[4].as_ref(), fs[2].as_ref(), &m, s).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
        }
    }
}

#[test]
fn kdv_hierarchy_is_in_involution_for_both_brackets() {
    let mut r = rng(27);
    let fp = FrozenPoint::kdv(N).unwrap();
    for _ in 0..10 {
        let m = dual(&mut r, N, 16);
        let hs: [Box<dyn Functional>; 3] = [Box::new(H1), Box::new(H3), Box::new(H5 { gamma: -m.a })];
        for i in 0..3 {
            for j in (i + 1)..3 {
                for s in [Structure::LiePoisson, Structure::Frozen(&fp)] {
                    let b = poisson_bracket(hs[i].as_ref(), hs[j].as_ref(), &m, s).unwrap();
                    assert!(b.abs() < 1e-7, "{{h{}, h{}}} = {b}", 2 * i + 1, 2 * j + 1);
                }
            }
        }
    }
}

#[test]
fn lenard_chain_after_one_calibration() {
    let fp = FrozenPoint::kdv(N).unwrap();
    let cal = DualElement::new(common::field(N, |x| x.cos() + 0.3 * (2.0 * x).sin()), -0.4);
    let scale = calibrate_lenard_scale(&cal, &fp).unwrap();
    assert!((scale - 2.0).abs() < 1e-10, "{scale}");
    let mut r = rng(28);
    for _ in 0..10 {
        let m = dual(&mut r, N, 16);
        assert!(lenard_residual(1, scale, &m, &fp).unwrap() < 1e-8);
        assert!(lenard_residual(2, scale, &m, &fp).unwrap() < 1e-7);
    }
    // constant densities: both sides vanish identically
    let flat = DualElement::constant(N, 0.8, 1.3).unwrap();
    assert!(lenard_residual(1, scale, &flat, &fp).unwrap() < 1e-14);
    assert!(lenard_residual(2, scale, &flat, &fp).unwrap() < 1e-12);
    // a wrong scale is caught at once
    let m = dual(&mut r, N, 16);
    assert!(lenard_residual(2, 1.0, &m, &fp).unwrap() > 1e-3);
}

#[test]
fn energy_gradient_is_velocity() {
    let mut r = rng(29);
    for p in FAMILY {
        let m = dual(&mut r, 64, 8);
        let g = variational_derivative(&KineticEnergy { params: p }, &m, DerivativeMode::Analytic).unwrap();
        let v = AlgebraElement::new(invert_inertia(p, &m.u).unwrap(), m.a);
        assert!(g.sub(&v).unwrap().sup_norm() < 1e-14);
    }
}
