//! The Virasoro algebra, its dual, and the coadjoint actions.
//!
//! An algebra element `(v∂_x, b)` is a vector field plus a central number; a
//! dual element `(u(dx)², a)` is a quadratic differential plus a cocentral
//! number. The pairing is `⟨(u, a), (w, c)⟩ = ∫ uw dx + ac` and the bracket
//! carries the Gelfand–Fuchs cocycle `∫ v w_xxx dx`.
//!
//! Group elements are circle diffeomorphisms stored by their lift on the grid.
//! Evaluating a field or a diffeomorphism off the grid uses the band-limited
//! interpolant, so compositions stay spectrally accurate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, d, dot, mul, InertiaParams, PeriodicField};

/// `(v∂_x, b)` in `vir = vect(S¹) ⊕ ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub v: PeriodicField,
    pub b: f64,
}

impl AlgebraElement {
    pub fn new(v: PeriodicField, b: f64) -> Self {
        Self { v, b }
    }

    pub fn zero(n: usize) -> Result<Self> {
        Ok(Self::new(PeriodicField::zeros(n)?, 0.0))
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(&self.v * s, self.b * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.v.same_grid(&other.v)?;
        Ok(Self::new(&self.v + &other.v, self.b + other.b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.v.same_grid(&other.v)?;
        Ok(Self::new(&self.v - &other.v, self.b - other.b))
    }

    /// `max(sup|v|, |b|)`.
    pub fn sup_norm(&self) -> f64 {
        self.v.sup_norm().max(self.b.abs())
    }
}

/// `(u(dx)², a)` in `vir*`, read as the Hill operator `−a∂_x² + u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualElement {
    pub u: PeriodicField,
    pub a: f64,
}

impl DualElement {
    pub fn new(u: PeriodicField, a: f64) -> Self {
        Self { u, a }
    }

    /// A constant density `(c(dx)², a)`, e.g. a freezing point.
    pub fn constant(n: usize, c: f64, a: f64) -> Result<Self> {
        Ok(Self::new(PeriodicField::constant(n, c)?, a))
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(&self.u * s, self.a * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.u.same_grid(&other.u)?;
        Ok(Self::new(&self.u + &other.u, self.a + other.a))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.u.same_grid(&other.u)?;
        Ok(Self::new(&self.u - &other.u, self.a - other.a))
    }

    /// `max(sup|u|, |a|)`.
    pub fn sup_norm(&self) -> f64 {
        self.u.sup_norm().max(self.a.abs())
    }
}

/// `ad_v w = −v w_x + v_x w`, the vector-field bracket.
pub(crate) fn vector_bracket(v: &PeriodicField, w: &PeriodicField) -> PeriodicField {
    &mul(&d(v, 1), w) - &mul(v, &d(w, 1))
}

/// `∫ v w_xxx dx`.
pub fn gf_cocycle(v: &PeriodicField, w: &PeriodicField) -> Result<f64> {
    v.same_grid(w)?;
    Ok(dot(v, &d(w, 3)))
}

/// Virasoro bracket `[(v, b), (w, c)] = (−v w_x + v_x w, ∫ v w_xxx dx)`.
pub fn commutator(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    x.v.same_grid(&y.v)?;
    Ok(AlgebraElement::new(
        vector_bracket(&x.v, &y.v),
        dot(&x.v, &d(&y.v, 3)),
    ))
}

/// `⟨(u, a), (w, c)⟩ = ∫ uw dx + ac`.
pub fn pairing(m: &DualElement, x: &AlgebraElement) -> Result<f64> {
    m.u.same_grid(&x.v)?;
    Ok(dot(&m.u, &x.v) + m.a * x.b)
}

/// Infinitesimal coadjoint action:
/// `ad*_{(v, b)}(u, a) = (2u v_x + u_x v − a v_xxx, 0)`.
pub fn coad(x: &AlgebraElement, m: &DualElement) -> Result<DualElement> {
    x.v.same_grid(&m.u)?;
    let v = &x.v;
    let u = &m.u;
    let field = &(&(&mul(u, &d(v, 1)) * 2.0) + &mul(&d(u, 1), v)) - &(&d(v, 3) * m.a);
    Ok(DualElement::new(field, 0.0))
}

/// `|⟨ad_w v, Λu⟩ + ⟨v, Λ ad_w u⟩|`. Zero means the metric is invariant
/// along the direction `w`.
pub fn ad_invariance_residual(
    p: InertiaParams,
    w: &PeriodicField,
    u: &PeriodicField,
    v: &PeriodicField,
) -> Result<f64> {
    w.same_grid(u)?;
    w.same_grid(v)?;
    let lhs = dot(&vector_bracket(w, v), &spectral::apply_inertia(p, u));
    let rhs = dot(v, &spectral::apply_inertia(p, &vector_bracket(w, u)));
    Ok((lhs + rhs).abs())
}

/// An orientation-preserving diffeomorphism of the circle, stored as its lift
/// `φ(x_j)` with `φ(x + 2π) = φ(x) + 2π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CircleDiffeo {
    lift: Vec<f64>,
    // φ(x) − x
    displacement: PeriodicField,
}

impl TryFrom<Vec<f64>> for CircleDiffeo {
    type Error = Error;

    fn try_from(lift: Vec<f64>) -> Result<Self> {
        Self::from_lift(lift)
    }
}

impl From<CircleDiffeo> for Vec<f64> {
    fn from(phi: CircleDiffeo) -> Self {
        phi.lift
    }
}

impl CircleDiffeo {
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_displacement(PeriodicField::zeros(n)?)
    }

    /// `φ(x) = x + s(x)` for a periodic `s`.
    pub fn from_displacement(s: PeriodicField) -> Result<Self> {
        let lift = spectral::grid_points(s.len())
            .into_iter()
            .zip(s.samples())
            .map(|(x, p)| x + p)
            .collect();
        let phi = Self { lift, displacement: s };
        phi.check_orientation()?;
        Ok(phi)
    }

    /// Builds from lift samples; the displacement `φ(x_j) − x_j` must be the
    /// samples of a periodic function.
    pub fn from_lift(lift: Vec<f64>) -> Result<Self> {
        let x = spectral::grid_points(lift.len());
        let s: Vec<f64> = lift.iter().zip(&x).map(|(p, x)| p - x).collect();
        Self::from_displacement(PeriodicField::new(s)?)
    }

    /// `φ(x) = x + ε s(x)`.
    pub fn near_identity(eps: f64, s: &PeriodicField) -> Result<Self> {
        Self::from_displacement(s * eps)
    }

    fn check_orientation(&self) -> Result<()> {
        let min = self.derivative().min();
        if min <= 0.0 {
            return Err(Error::NotADiffeo(format!("min φ' = {min:e}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lift.is_empty()
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    pub fn displacement(&self) -> &PeriodicField {
        &self.displacement
    }

    /// `φ_x` on the grid.
    pub fn derivative(&self) -> PeriodicField {
        d(&self.displacement, 1).map(|s| 1.0 + s)
    }

    /// `(ψ ∘ φ)(x) = ψ(φ(x))` where `self = ψ`.
    pub fn compose(&self, phi: &CircleDiffeo) -> Result<CircleDiffeo> {
        self.displacement.same_grid(&phi.displacement)?;
        let inner = self.displacement.interpolator();
        let lift = phi.lift.iter().map(|&y| y + inner.eval(y)).collect();
        Self::from_lift(lift)
    }

    /// Samples `f ∘ φ` on the grid.
    pub fn pull(&self, f: &PeriodicField) -> Result<PeriodicField> {
        f.same_grid(&self.displacement)?;
        let interp = f.interpolator();
        PeriodicField::new(self.lift.iter().map(|&y| interp.eval(y)).collect())
    }
}

/// `S(φ) = (φ_x φ_xxx − (3/2)φ_xx²)/φ_x²`, computed from spectral derivatives
/// of the periodic part `φ − x`.
pub fn schwarzian(phi: &CircleDiffeo) -> Result<PeriodicField> {
    let s = phi.displacement();
    let d1 = phi.derivative();
    if d1.min() <= 0.0 {
        return Err(Error::NotADiffeo(format!("min φ' = {:e}", d1.min())));
    }
    let d2 = d(s, 2);
    let d3 = d(s, 3);
    let out = (0..s.len())
        .map(|j| {
            let (p1, p2, p3) = (d1.samples()[j], d2.samples()[j], d3.samples()[j]);
            (p1 * p3 - 1.5 * p2 * p2) / (p1 * p1)
        })
        .collect();
    PeriodicField::new(out)
}

/// Group coadjoint action on `vir*`:
/// `(u, a) ↦ (u∘φ · φ_x² − (a/2) S(φ), a)`.
///
/// The Schwarzian enters with weight `a/2`, which is the normalization under
/// which `(u, a)` and the Hill operator `−a∂_x² + u` transform compatibly:
/// the monodromy of the Hill operator is conjugated, never changed.
///
/// Composition is a right action:
/// `group_coad(ψ∘φ, m) = group_coad(φ, group_coad(ψ, m))`.
pub fn group_coad(phi: &CircleDiffeo, m: &DualElement) -> Result<DualElement> {
    let pulled = phi.pull(&m.u)?;
    let jac = phi.derivative();
    let schw = schwarzian(phi)?;
    let half_a = 0.5 * m.a;
    let u = (0..m.len())
        .map(|j| {
            let j2 = jac.samples()[j] * jac.samples()[j];
            pulled.samples()[j] * j2 - half_a * schw.samples()[j]
        })
        .collect();
    Ok(DualElement::new(PeriodicField::new(u)?, m.a))
}

/// Bott cocycle `B(ψ, φ) = ∫ log((ψ∘φ)_x) d log(φ_x)`.
pub fn bott_cocycle(psi: &CircleDiffeo, phi: &CircleDiffeo) -> Result<f64> {
    psi.displacement().same_grid(phi.displacement())?;
    let psi_x = d(psi.displacement(), 1).interpolator();
    let phi_x = phi.derivative();
    let phi_xx = d(phi.displacement(), 2);
    let n = phi.len();
    let mut acc = 0.0;
    for j in 0..n {
        let outer = 1.0 + psi_x.eval(phi.lift()[j]);
        let composed = outer * phi_x.samples()[j];
        if composed <= 0.0 {
            return Err(Error::NotADiffeo(format!("(ψ∘φ)' = {composed:e}")));
        }
        acc += composed.ln() * phi_xx.samples()[j] / phi_x.samples()[j];
    }
    Ok(2.0 * PI * acc / n as f64)
}

/// `∫ √u dx` on the `a = 0` hyperplane; a Casimir of the coadjoint action.
pub fn sqrt_casimir(m: &DualElement) -> Result<f64> {
    if m.a != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "square-root Casimir needs a = 0, got {}",
            m.a
        )));
    }
    let min = m.u.min();
    if min <= 0.0 {
        return Err(Error::NotPositive(min));
    }
    Ok(m.u.map(f64::sqrt).integral())
}

/// A Möbius transformation `η ↦ (pη + q)/(rη + s)`, normalized to `ps − qr = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl Mobius {
    /// Scales the coefficients so that the determinant is one.
    pub fn normalized(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        let det = p * s - q * r;
        if det <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Möbius determinant {det} must be positive"
            )));
        }
        let k = det.sqrt().recip();
        Ok(Self { p: p * k, q: q * k, r: r * k, s: s * k })
    }

    pub fn apply(&self, eta: f64) -> f64 {
        (self.p * eta + self.q) / (self.r * eta + self.s)
    }
}

/// Uniformly spaced samples of a (not necessarily periodic) function on a
/// window `x0 + j·step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSamples {
    pub x0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

// Eighth-order central differences for derivatives 1..=3.
const STENCIL_HALF: usize = 4;
const D1: [f64; 9] = [
    1.0 / 280.0, -4.0 / 105.0, 1.0 / 5.0, -4.0 / 5.0, 0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0,
    -1.0 / 280.0,
];
const D2: [f64; 9] = [
    -1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0, 8.0 / 5.0, -205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0,
    8.0 / 315.0, -1.0 / 560.0,
];
// sixth order for the third derivative (widest stencil is still 9 points)
const D3: [f64; 9] = [
    -7.0 / 240.0, 3.0 / 10.0, -169.0 / 120.0, 61.0 / 30.0, 0.0, -61.0 / 30.0, 169.0 / 120.0,
    -3.0 / 10.0, 7.0 / 240.0,
];

fn stencil(values: &[f64], i: usize, w: &[f64; 9]) -> f64 {
    w.iter()
        .enumerate()
        .map(|(k, c)| c * values[i + k - STENCIL_HALF])
        .sum()
}

impl LocalSamples {
    pub fn from_fn(x0: f64, step: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|j| f(x0 + j as f64 * step)).collect();
        Self { x0, step, values }
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.step
    }

    /// Indices where the finite-difference stencils fit.
    pub fn interior(&self) -> std::ops::Range<usize> {
        STENCIL_HALF..self.values.len().saturating_sub(STENCIL_HALF)
    }

    /// First three derivatives at an interior index.
    pub fn derivatives(&self, i: usize) -> (f64, f64, f64) {
        let h = self.step;
        (
            stencil(&self.values, i, &D1) / h,
            stencil(&self.values, i, &D2) / (h * h),
            stencil(&self.values, i, &D3) / (h * h * h),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x0: self.x0,
            step: self.step,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Schwarzian of a locally sampled function on its interior points.
/// Returns `(x, S(η)(x))` pairs.
pub fn schwarzian_local(eta: &LocalSamples) -> Result<Vec<(f64, f64)>> {
    if eta.values.len() <= 2 * STENCIL_HALF {
        return Err(Error::InvalidArgument(format!(
            "need more than {} samples",
            2 * STENCIL_HALF
        )));
    }
    eta.interior()
        .map(|i| {
            let (e1, e2, e3) = eta.derivatives(i);
            if e1.abs() <= f64::EPSILON * eta.values[i].abs().max(1.0) {
                return Err(Error::CriticalRatio(e1));
            }
            Ok((eta.x(i), e3 / e1 - 1.5 * (e2 / e1).powi(2)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 64;

    fn field(f: impl Fn(f64) -> f64) -> PeriodicField {
        PeriodicField::from_fn(N, f).unwrap()
    }

    fn alg(f: impl Fn(f64) -> f64, b: f64) -> AlgebraElement {
        AlgebraElement::new(field(f), b)
    }

    #[test]
    fn commutator_examples() {
        let x = alg(|x| x.sin() + 0.3 * (2.0 * x).cos(), 0.7);
        let zero = commutator(&x, &x).unwrap();
        assert!(zero.sup_norm() < 1e-13);

        let r = commutator(&alg(f64::sin, 0.0), &alg(f64::cos, 0.0)).unwrap();
        assert!((&r.v - &field(|_| 1.0)).sup_norm() < 1e-13);
        assert!((r.b - PI).abs() < 1e-12);

        let w = |x: f64| (2.0 * x).sin() - x.cos();
        let r = commutator(&alg(|_| 1.0, 0.0), &alg(w, 0.0)).unwrap();
        assert!((&r.v + &field(|x| 2.0 * (2.0 * x).cos() + x.sin())).sup_norm() < 1e-12);
        assert!(r.b.abs() < 1e-12);
    }

    #[test]
    fn cocycle_examples() {
        let v = field(|x| x.cos() + (3.0 * x).sin());
        assert!(gf_cocycle(&v, &v).unwrap().abs() < 1e-11);
        assert!((gf_cocycle(&field(f64::sin), &field(f64::cos)).unwrap() - PI).abs() < 1e-12);
        assert!(gf_cocycle(&field(|_| 1.0), &v).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pairing_examples() {
        let m = DualElement::new(field(f64::cos), 2.0);
        assert!((pairing(&m, &alg(f64::cos, 3.0)).unwrap() - (PI + 6.0)).abs() < 1e-12);
        assert_eq!(pairing(&m, &AlgebraElement::zero(N).unwrap()).unwrap(), 0.0);
        let one = DualElement::constant(N, 1.0, 0.0).unwrap();
        assert!((pairing(&one, &alg(|_| 1.0, 0.0)).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn coad_examples() {
        let u = |x: f64| x.sin() + 0.5 * (2.0 * x).cos();
        let r = coad(&alg(|_| 2.5, 0.0), &DualElement::new(field(u), 1.3)).unwrap();
        assert!((&r.u - &field(|x| 2.5 * (x.cos() - (2.0 * x).sin()))).sup_norm() < 1e-12);
        assert_eq!(r.a, 0.0);

        let r = coad(&alg(f64::sin, 0.0), &DualElement::constant(N, 0.0, 1.0).unwrap()).unwrap();
        assert!((&r.u - &field(f64::cos)).sup_norm() < 1e-11);

        let r = coad(&alg(u, 4.0), &DualElement::constant(N, 0.0, 0.0).unwrap()).unwrap();
        assert!(r.u.sup_norm() < 1e-14);
    }

    #[test]
    fn identity_diffeo() {
        let id = CircleDiffeo::identity(N).unwrap();
        assert!(schwarzian(&id).unwrap().sup_norm() < 1e-14);
        let m = DualElement::new(field(|x| 1.0 + 0.3 * x.sin()), -0.7);
        let r = group_coad(&id, &m).unwrap();
        assert!((&r.u - &m.u).sup_norm() < 1e-13);
        assert_eq!(r.a, m.a);
    }

    #[test]
    fn rejects_folds() {
        let s = field(f64::sin);
        assert!(matches!(
            CircleDiffeo::near_identity(1.5, &s),
            Err(Error::NotADiffeo(_))
        ));
        let lift: Vec<f64> = spectral::grid_points(N).iter().map(|x| x + 1.2 * x.sin()).collect();
        assert!(CircleDiffeo::from_lift(lift).is_err());
    }

    #[test]
    fn schwarzian_matches_finite_differences() {
        // Independent oracle: fourth-order differences of the analytic lift.
        let phi = CircleDiffeo::near_identity(0.5, &field(f64::sin)).unwrap();
        let s = schwarzian(&phi).unwrap();
        let f = |x: f64| x + 0.5 * x.sin();
        let h = 1e-2;
        for (j, x) in spectral::grid_points(N).into_iter().enumerate() {
            let f1 = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            let f2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h)
                - f(x + 2.0 * h))
                / (12.0 * h * h);
            let f3 = (f(x - 3.0 * h) - 8.0 * f(x - 2.0 * h) + 13.0 * f(x - h) - 13.0 * f(x + h)
                + 8.0 * f(x + 2.0 * h)
                - f(x + 3.0 * h))
                / (8.0 * h * h * h);
            let fd = (f1 * f3 - 1.5 * f2 * f2) / (f1 * f1);
            assert!((s.samples()[j] - fd).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn schwarzian_of_half_angle_tangent() {
        let eta = LocalSamples::from_fn(-1.0, 1e-2, 201, |x| (x / 2.0).tan());
        for (_, s) in schwarzian_local(&eta).unwrap() {
            assert!((s - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn bott_examples() {
        let psi = CircleDiffeo::near_identity(0.2, &field(f64::sin)).unwrap();
        let phi = CircleDiffeo::near_identity(0.2, &field(f64::cos)).unwrap();
        let id = CircleDiffeo::identity(N).unwrap();
        assert!(bott_cocycle(&psi, &id).unwrap().abs() < 1e-14);
        assert!(bott_cocycle(&id, &phi).unwrap().abs() < 1e-14);
    }

    #[test]
    fn bott_matches_fine_quadrature() {
        // Analytic integrand, trapezoid rule on a much finer grid.
        let psi = CircleDiffeo::near_identity(0.2, &field(f64::sin)).unwrap();
        let phi = CircleDiffeo::near_identity(0.2, &field(f64::cos)).unwrap();
        let m = 4096;
        let oracle: f64 = (0..m)
            .map(|j| {
                let x = 2.0 * PI * j as f64 / m as f64;
                let phi_x = 1.0 - 0.2 * x.sin();
                let phi_xx = -0.2 * x.cos();
                let psi_x = 1.0 + 0.2 * (x + 0.2 * x.cos()).cos();
                (psi_x * phi_x).ln() * phi_xx / phi_x
            })
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64;
        let b = bott_cocycle(&psi, &phi).unwrap();
        assert!((b - oracle).abs() < 1e-8, "{b} vs {oracle}");
        assert!(b.abs() > 1e-3);
    }

    #[test]
    fn sqrt_casimir_examples() {
        let c = |u: f64| sqrt_casimir(&DualElement::constant(N, u, 0.0).unwrap()).unwrap();
        assert!((c(0.25) - PI).abs() < 1e-13);
        assert!((c(1.0) - 2.0 * PI).abs() < 1e-13);
        let sq = DualElement::new(field(|x| (1.0 + 0.5 * x.sin()).powi(2)), 0.0);
        assert!((sqrt_casimir(&sq).unwrap() - 2.0 * PI).abs() < 1e-12);
        let neg = DualElement::new(field(f64::sin), 0.0);
        assert!(matches!(sqrt_casimir(&neg), Err(Error::NotPositive(_))));
        assert!(sqrt_casimir(&DualElement::constant(N, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn rotation_invariance_of_metrics() {
        let one = field(|_| 1.0);
        let u = field(|x| x.sin() + 0.4 * (3.0 * x).cos());
        let v = field(|x| (2.0 * x).cos() - 0.1 * x.sin());
        for p in [InertiaParams::HS, InertiaParams::KDV, InertiaParams::CH] {
            assert!(ad_invariance_residual(p, &one, &u, &v).unwrap() < 1e-10);
        }
        let r = ad_invariance_residual(InertiaParams::HS, &field(f64::sin), &field(f64::cos), &field(|x| (2.0 * x).cos()))
            .unwrap();
        assert!(r > 1e-3, "{r}");
    }

    #[test]
    fn mobius_is_normalized() {
        let g = Mobius::normalized(2.0, 1.0, 0.5, 3.0).unwrap();
        assert!((g.p * g.s - g.q * g.r - 1.0).abs() < 1e-14);
        assert!(Mobius::normalized(1.0, 2.0, 3.0, 4.0).is_err());
    }

    #[test]
    fn diffeo_serde_as_lift() {
        let phi = CircleDiffeo::near_identity(0.1, &field(f64::sin)).unwrap();
        let json = serde_json::to_string(&phi).unwrap();
        let back: CircleDiffeo = serde_json::from_str(&json).unwrap();
        assert!((back.displacement() - phi.displacement()).sup_norm() < 1e-14);
    }
}
