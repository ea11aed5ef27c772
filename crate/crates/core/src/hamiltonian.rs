//! Functionals on `vir*`, their variational derivatives, and the two Poisson
//! structures: Lie–Poisson `{f, g}(m) = ⟨[df, dg], m⟩` and the bracket frozen
//! at a point `m₀`.
//!
//! Functionals are evaluated by trapezoid quadrature of pointwise integrands,
//! and analytic gradients are the exact gradients of those quadratures. That
//! keeps the finite-difference oracle and the analytic path comparable to
//! round-off.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler_flow::euler_rhs;
use crate::hill::expansion_coefficient;
use crate::spectral::{self, d, dot, InertiaParams, PeriodicField};
use crate::virasoro::{coad, commutator, pairing, AlgebraElement, DualElement};

/// A real function on `vir*`.
pub trait Functional: Sync {
    fn name(&self) -> String;

    fn evaluate(&self, m: &DualElement) -> Result<f64>;

    /// `(δF/δu, δF/δa)` when a closed form is known.
    fn analytic_gradient(&self, _m: &DualElement) -> Option<Result<AlgebraElement>> {
        None
    }
}

impl<F: Functional + ?Sized> Functional for &F {
    fn name(&self) -> String {
        (**self).name()
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        (**self).evaluate(m)
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        (**self).analytic_gradient(m)
    }
}

/// `h₁ = ∫ u dx`.
#[derive(Debug, Clone, Copy, Default)]
pub struct H1;

/// `h₃ = ∫ u² dx`.
#[derive(Debug, Clone, Copy, Default)]
pub struct H3;

/// `h₅ = ∫ (u³ − γ u_x²) dx`. The quantity conserved by
/// `u_t = −3uu_x + a u_xxx` has `γ = −a`.
#[derive(Debug, Clone, Copy)]
pub struct H5 {
    pub gamma: f64,
}

impl Default for H5 {
    fn default() -> Self {
        Self { gamma: 0.5 }
    }
}

impl Functional for H1 {
    fn name(&self) -> String {
        "h1".into()
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        Ok(m.u.integral())
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        Some(PeriodicField::constant(m.len(), 1.0).map(|one| AlgebraElement::new(one, 0.0)))
    }
}

impl Functional for H3 {
    fn name(&self) -> String {
        "h3".into()
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        Ok(dot(&m.u, &m.u))
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        Some(Ok(AlgebraElement::new(&m.u * 2.0, 0.0)))
    }
}

impl Functional for H5 {
    fn name(&self) -> String {
        format!("h5(gamma={})", self.gamma)
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        Ok(kdv_integrals(&m.u, self.gamma).2)
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        let u = &m.u;
        let g = &u.map(|x| 3.0 * x * x) + &(&d(u, 2) * (2.0 * self.gamma));
        Some(Ok(AlgebraElement::new(g, 0.0)))
    }
}

/// `(h₁, h₃, h₅)` with `h₅ = ∫(u³ − γ u_x²)`.
pub fn kdv_integrals(u: &PeriodicField, gamma: f64) -> (f64, f64, f64) {
    let ux = d(u, 1);
    let h1 = u.integral();
    let h3 = dot(u, u);
    let h5 = u.map(|x| x * x * x).integral() - gamma * dot(&ux, &ux);
    (h1, h3, h5)
}

/// `E = ½∫(αv² + βv_x²) dx + ½b²`.
pub fn energy(p: InertiaParams, x: &AlgebraElement) -> f64 {
    0.5 * dot(&x.v, &spectral::apply_inertia(p, &x.v)) + 0.5 * x.b * x.b
}

/// The Euler Hamiltonian on the dual, `H(m) = ½⟨A⁻¹m, m⟩`.
#[derive(Debug, Clone, Copy)]
pub struct KineticEnergy {
    pub params: InertiaParams,
}

impl KineticEnergy {
    fn velocity(&self, m: &DualElement) -> Result<AlgebraElement> {
        Ok(AlgebraElement::new(spectral::invert_inertia(self.params, &m.u)?, m.a))
    }
}

impl Functional for KineticEnergy {
    fn name(&self) -> String {
        format!("energy(alpha={}, beta={})", self.params.alpha, self.params.beta)
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        let x = self.velocity(m)?;
        Ok(0.5 * dot(&x.v, &m.u) + 0.5 * m.a * m.a)
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        Some(self.velocity(m))
    }
}

/// `F(u, a) = −∫(A·α w³ + B·w² u + (a/2) w_x²) dx`, `w = Λ⁻¹u`.
///
/// The frozen-bracket field of this functional reproduces the Euler flow for
/// `A = B = 1/4`.
#[derive(Debug, Clone, Copy)]
pub struct CubicHamiltonian {
    pub params: InertiaParams,
    pub a_coef: f64,
    pub b_coef: f64,
}

impl CubicHamiltonian {
    pub const DEFAULT_COEF: f64 = 0.25;

    pub fn new(params: InertiaParams) -> Self {
        Self {
            params,
            a_coef: Self::DEFAULT_COEF,
            b_coef: Self::DEFAULT_COEF,
        }
    }

    pub fn with_coefficients(params: InertiaParams, a_coef: f64, b_coef: f64) -> Self {
        Self { params, a_coef, b_coef }
    }

    fn inverse(&self, u: &PeriodicField) -> Result<PeriodicField> {
        if self.params.alpha == 0.0 {
            return Err(Error::DegenerateInertia);
        }
        spectral::invert_inertia(self.params, u)
    }
}

impl Functional for CubicHamiltonian {
    fn name(&self) -> String {
        format!("cubic_F(A={}, B={})", self.a_coef, self.b_coef)
    }

    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        let w = self.inverse(&m.u)?;
        let wx = d(&w, 1);
        let alpha = self.params.alpha;
        let integrand = (0..m.len())
            .map(|j| {
                let (w, u, wx) = (w.samples()[j], m.u.samples()[j], wx.samples()[j]);
                self.a_coef * alpha * w * w * w + self.b_coef * w * w * u + 0.5 * m.a * wx * wx
            })
            .collect();
        Ok(-PeriodicField::from_raw(integrand).integral())
    }

    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        Some((|| {
            let p = self.params;
            let u = &m.u;
            let w = self.inverse(u)?;
            let w2 = w.pointwise_mul(&w);
            let wu = w.pointwise_mul(u);
            let inv = |f: &PeriodicField| spectral::inverse_inertia_unchecked(p, f);
            // δF/δu = −(3Aα Λ⁻¹(w²) + B w² + 2B Λ⁻¹(wu) − a Λ⁻¹ w_xx)
            let mut g = &inv(&w2) * (3.0 * self.a_coef * p.alpha);
            g = &g + &(&w2 * self.b_coef);
            g = &g + &(&inv(&wu) * (2.0 * self.b_coef));
            g = &g - &(&inv(&d(&w, 2)) * m.a);
            let wx = d(&w, 1);
            let db = -0.5 * dot(&wx, &wx);
            Ok(AlgebraElement::new(-&g, db))
        })())
    }
}

/// `factor · F`.
pub struct Scaled<F> {
    pub factor: f64,
    pub inner: F,
}

impl<F: Functional> Functional for Scaled<F> {
    fn name(&self) -> String {
        format!("{}*{}", self.factor, self.inner.name())
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        Ok(self.factor * self.inner.evaluate(m)?)
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        self.inner
            .analytic_gradient(m)
            .map(|g| g.map(|g| g.scaled(self.factor)))
    }
}

/// `Σ cᵢ Fᵢ`.
pub struct LinearCombination<'a> {
    pub terms: Vec<(f64, &'a dyn Functional)>,
}

impl Functional for LinearCombination<'_> {
    fn name(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, f)| format!("{c}*{}", f.name()))
            .collect();
        parts.join(" + ")
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        self.terms
            .iter()
            .map(|(c, f)| f.evaluate(m).map(|v| c * v))
            .sum()
    }
    fn analytic_gradient(&self, m: &DualElement) -> Option<Result<AlgebraElement>> {
        let mut acc = match AlgebraElement::zero(m.len()) {
            Ok(z) => z,
            Err(e) => return Some(Err(e)),
        };
        for (c, f) in &self.terms {
            let g = match f.analytic_gradient(m)? {
                Ok(g) => g,
                Err(e) => return Some(Err(e)),
            };
            acc = match acc.add(&g.scaled(*c)) {
                Ok(a) => a,
                Err(e) => return Some(Err(e)),
            };
        }
        Some(Ok(acc))
    }
}

/// A functional given only by its evaluator.
pub struct FnFunctional<E> {
    pub label: String,
    pub eval: E,
}

impl<E> Functional for FnFunctional<E>
where
    E: Fn(&DualElement) -> Result<f64> + Sync,
{
    fn name(&self) -> String {
        self.label.clone()
    }
    fn evaluate(&self, m: &DualElement) -> Result<f64> {
        (self.eval)(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// Step sizes of the central-difference oracle.
pub const FD_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// `d/dε F(m + ε ξ)` at `ε = 0` by central differences at [`FD_STEPS`],
/// Richardson-extrapolated.
pub fn directional_derivative(
    f: &dyn Functional,
    m: &DualElement,
    xi: &DualElement,
) -> Result<f64> {
    let central = |eps: f64| -> Result<f64> {
        let plus = f.evaluate(&m.add(&xi.scaled(eps))?)?;
        let minus = f.evaluate(&m.sub(&xi.scaled(eps))?)?;
        Ok((plus - minus) / (2.0 * eps))
    };
    let d: Vec<f64> = FD_STEPS.iter().map(|&e| central(e)).collect::<Result<_>>()?;
    // steps shrink by 10: the leading ε² error drops by 100, the next by 10⁴
    let r1 = (100.0 * d[1] - d[0]) / 99.0;
    let r2 = (100.0 * d[2] - d[1]) / 99.0;
    Ok((1e4 * r2 - r1) / (1e4 - 1.0))
}

fn finite_difference_gradient(f: &dyn Functional, m: &DualElement) -> Result<AlgebraElement> {
    let n = m.len();
    let zero = PeriodicField::zeros(n)?;
    let weight = n as f64 / (2.0 * std::f64::consts::PI);
    let v: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let xi = DualElement::new(PeriodicField::from_raw(e), 0.0);
            directional_derivative(f, m, &xi).map(|dd| weight * dd)
        })
        .collect::<Result<_>>()?;
    let b = directional_derivative(f, m, &DualElement::new(zero, 1.0))?;
    Ok(AlgebraElement::new(PeriodicField::new(v)?, b))
}

/// `(δF/δu, δF/δa)`, defined by
/// `⟨(ξ, c), dF(m)⟩ = d/dε F(u + εξ, a + εc)`.
pub fn variational_derivative(
    f: &dyn Functional,
    m: &DualElement,
    mode: DerivativeMode,
) -> Result<AlgebraElement> {
    match mode {
        DerivativeMode::Analytic => f
            .analytic_gradient(m)
            .ok_or_else(|| Error::NoAnalyticDerivative(f.name()))?,
        DerivativeMode::FiniteDifference => finite_difference_gradient(f, m),
    }
}

/// Analytic gradient when available, otherwise the finite-difference oracle.
pub fn gradient(f: &dyn Functional, m: &DualElement) -> Result<AlgebraElement> {
    match f.analytic_gradient(m) {
        Some(g) => g,
        None => finite_difference_gradient(f, m),
    }
}

/// A point `m₀` at which the Lie–Poisson bivector is frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenPoint {
    pub m0: DualElement,
}

impl FrozenPoint {
    pub fn new(m0: DualElement) -> Self {
        Self { m0 }
    }

    /// `((α/2)(dx)², β)`, the point that makes the `H¹_{α,β}` flow bihamiltonian.
    pub fn for_inertia(p: InertiaParams, n: usize) -> Result<Self> {
        Ok(Self::new(DualElement::constant(n, 0.5 * p.alpha, p.beta)?))
    }

    /// `((dx)²/2, 0)`.
    pub fn kdv(n: usize) -> Result<Self> {
        Self::for_inertia(InertiaParams::KDV, n)
    }

    /// `((dx)²/2, 1)`.
    pub fn ch(n: usize) -> Result<Self> {
        Self::for_inertia(InertiaParams::CH, n)
    }

    /// `(0, 1)`.
    pub fn hs(n: usize) -> Result<Self> {
        Self::for_inertia(InertiaParams::HS, n)
    }
}

/// Lie–Poisson Hamiltonian field `dm/dt = ad*_{dF} m`.
pub fn lp_field(f: &dyn Functional, m: &DualElement) -> Result<DualElement> {
    coad(&gradient(f, m)?, m)
}

/// Frozen-bracket Hamiltonian field `dm/dt = ad*_{dF(m)} m₀`.
pub fn frozen_field(f: &dyn Functional, m: &DualElement, fp: &FrozenPoint) -> Result<DualElement> {
    coad(&gradient(f, m)?, &fp.m0)
}

#[derive(Debug, Clone, Copy)]
pub enum Structure<'a> {
    LiePoisson,
    Frozen(&'a FrozenPoint),
}

/// `{F, G}(m) = ⟨[dF, dG], m⟩` or `⟨[dF, dG], m₀⟩`.
pub fn poisson_bracket(
    f: &dyn Functional,
    g: &dyn Functional,
    m: &DualElement,
    structure: Structure<'_>,
) -> Result<f64> {
    let bracket = commutator(&gradient(f, m)?, &gradient(g, m)?)?;
    match structure {
        Structure::LiePoisson => pairing(m, &bracket),
        Structure::Frozen(fp) => pairing(&fp.m0, &bracket),
    }
}

/// `sup|E − X_F| / sup|E|` where `E` is the Euler field and `X_F` the frozen
/// field of the cubic Hamiltonian at `((α/2)(dx)², β)`. Falls back to the
/// absolute difference when `E` vanishes.
pub fn bihamiltonian_residual(
    p: InertiaParams,
    m: &DualElement,
    a_coef: f64,
    b_coef: f64,
) -> Result<f64> {
    if p.alpha == 0.0 {
        return Err(Error::DegenerateInertia);
    }
    let euler = euler_rhs(p, m)?;
    let f = CubicHamiltonian::with_coefficients(p, a_coef, b_coef);
    let frozen = frozen_field(&f, m, &FrozenPoint::for_inertia(p, m.len())?)?;
    let diff = (&euler - &frozen.u).sup_norm();
    let scale = euler.sup_norm();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

fn chain_hamiltonian(index: usize, a: f64) -> Box<dyn Functional> {
    match index {
        1 => Box::new(H1),
        3 => Box::new(H3),
        // the chain member conserved by the flow at cocentral value a
        _ => Box::new(H5 { gamma: -a }),
    }
}

fn lenard_terms(n: usize, m: &DualElement, fp: &FrozenPoint) -> Result<(PeriodicField, PeriodicField)> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedIndex(n));
    }
    let lower = chain_hamiltonian(2 * n - 1, m.a);
    let upper = chain_hamiltonian(2 * n + 1, m.a);
    let cn = expansion_coefficient(n as u32);
    let cn1 = expansion_coefficient(n as u32 + 1);
    let lp = lp_field(lower.as_ref(), m)?;
    let frozen = frozen_field(upper.as_ref(), m, fp)?;
    Ok((&lp.u * cn, &frozen.u * cn1))
}

/// `sup|c_n X^{LP}_{h_{2n−1}} − scale · c_{n+1} X^{0}_{h_{2n+1}}|` for the
/// pairs `(h₁, h₃)` (`n = 1`) and `(h₃, h₅)` (`n = 2`). The `h₅` used is the
/// one with `γ = −a`.
pub fn lenard_residual(n: usize, scale: f64, m: &DualElement, fp: &FrozenPoint) -> Result<f64> {
    let (lp, frozen) = lenard_terms(n, m, fp)?;
    Ok((&lp - &(&frozen * scale)).sup_norm())
}

/// Least-squares fit of the single scalar relating the two brackets in the
/// `n = 1` Lenard relation at `m`. The state must be non-constant.
pub fn calibrate_lenard_scale(m: &DualElement, fp: &FrozenPoint) -> Result<f64> {
    let (lp, frozen) = lenard_terms(1, m, fp)?;
    let denom = dot(&frozen, &frozen);
    if denom <= f64::EPSILON * dot(&lp, &lp).max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(
            "calibration state gives a vanishing frozen field".into(),
        ));
    }
    Ok(dot(&lp, &frozen) / denom)
}
