#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virasoro_flows::spectral::random_bandlimited;
use virasoro_flows::{AlgebraElement, CircleDiffeo, DualElement, PeriodicField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn field(n: usize, f: impl Fn(f64) -> f64) -> PeriodicField {
    PeriodicField::from_fn(n, f).unwrap()
}

/// Random trigonometric polynomial plus a random mean.
pub fn smooth(rng: &mut ChaCha8Rng, n: usize, modes: usize) -> PeriodicField {
    let c = rng.gen_range(-0.5..0.5);
    random_bandlimited(rng, n, modes, 1.0).unwrap().map(|x| x + c)
}

pub fn algebra(rng: &mut ChaCha8Rng, n: usize, modes: usize) -> AlgebraElement {
    let b = rng.gen_range(-1.0..1.0);
    AlgebraElement::new(smooth(rng, n, modes), b)
}

pub fn dual(rng: &mut ChaCha8Rng, n: usize, modes: usize) -> DualElement {
    let a = rng.gen_range(-1.0..1.0);
    DualElement::new(smooth(rng, n, modes), a)
}

/// `x + s(x)` with `sup|s'| = slope < 1`.
pub fn diffeo(rng: &mut ChaCha8Rng, n: usize, modes: usize, slope: f64) -> CircleDiffeo {
    let s = random_bandlimited(rng, n, modes, 1.0).unwrap();
    let ds = virasoro_flows::spectral::derivative(&s, 1).unwrap().sup_norm();
    CircleDiffeo::near_identity(slope / ds, &s).unwrap()
}

pub fn rel(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}
