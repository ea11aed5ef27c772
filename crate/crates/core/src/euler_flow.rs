//! Euler–Arnold flows of the `H¹_{α,β}` metrics on the Virasoro group.
//!
//! For `α ≠ 0` the momentum `u = Λv` is evolved with an integrating-factor
//! RK4 that treats `a·∂³Λ⁻¹` exactly. The Hunter–Saxton flow (`α = 0`) lives
//! on classes `{v(x + p) + q}` and is evolved in the mean-zero velocity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{energy, kdv_integrals};
use crate::spectral::{
    self, antiderivative_zero_mean, apply_multiplier, d, dot, mul, InertiaParams, PeriodicField,
    MEAN_TOLERANCE,
};
use crate::virasoro::{AlgebraElement, DualElement};

/// Growth factor over the initial sup-norm treated as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Kdv,
    Ch,
    Hs,
    Family,
}

impl Equation {
    /// Inertia parameters; `Family` takes them from the caller.
    pub fn params(self, alpha: f64, beta: f64) -> InertiaParams {
        match self {
            Equation::Kdv => InertiaParams::KDV,
            Equation::Ch => InertiaParams::CH,
            Equation::Hs => InertiaParams::HS,
            Equation::Family => InertiaParams::new(alpha, beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub m: DualElement,
    pub t: f64,
}

impl FlowState {
    pub fn new(m: DualElement, t: f64) -> Self {
        Self { m, t }
    }

    /// HS state (`Λ = −∂²`) from a mean-zero velocity: `u = −v_xx`.
    pub fn from_hs_velocity(v: &PeriodicField, a: f64, t: f64) -> Result<Self> {
        check_gauge(v)?;
        Ok(Self::new(DualElement::new(-&d(v, 2), a), t))
    }
}

/// `du/dt = −2u v_x − u_x v + a v_xxx`, `v = Λ⁻¹u`.
pub fn euler_rhs(p: InertiaParams, m: &DualElement) -> Result<PeriodicField> {
    if p.alpha == 0.0 {
        return Err(Error::DegenerateInertia);
    }
    let v = spectral::invert_inertia(p, &m.u)?;
    Ok(&nonlinear(&m.u, &v) + &(&d(&v, 3) * m.a))
}

fn nonlinear(u: &PeriodicField, v: &PeriodicField) -> PeriodicField {
    &(&mul(u, &d(v, 1)) * -2.0) - &mul(&d(u, 1), v)
}

/// Mean-zero `v` with `−v_xx = u`.
pub fn hs_reconstruct_v(u: &PeriodicField) -> Result<PeriodicField> {
    let mean = u.mean();
    let tol = MEAN_TOLERANCE * u.sup_norm();
    if mean.abs() > tol {
        return Err(Error::NonZeroMean { mean, tol });
    }
    let n = u.len();
    Ok(apply_multiplier(u, |k| {
        if k == 0 || k == (n / 2) as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / (k * k) as f64, 0.0)
        }
    }))
}

fn check_gauge(v: &PeriodicField) -> Result<()> {
    let mean = v.mean();
    if mean.abs() > MEAN_TOLERANCE * v.sup_norm().max(1.0) {
        return Err(Error::GaugeViolation(mean));
    }
    Ok(())
}

/// `v_t = −v v_x + ∂⁻¹(v_x²/2 + r₀) + q` with `r₀ = −(1/4π)∫v_x²` and `q`
/// keeping `v_t` mean-zero.
pub fn hs_rhs(v: &PeriodicField) -> Result<PeriodicField> {
    check_gauge(v)?;
    Ok(hs_rhs_unchecked(v))
}

fn hs_rhs_unchecked(v: &PeriodicField) -> PeriodicField {
    let vx = d(v, 1);
    let half_sq = &mul(&vx, &vx) * 0.5;
    let source = half_sq.map(|s| s - half_sq.mean());
    let prim = antiderivative_zero_mean(&source).expect("source is mean-zero by construction");
    let rhs = &prim - &mul(v, &vx);
    let q = rhs.mean();
    rhs.map(|r| r - q)
}

// With Λ = −β∂² the velocity equation does not depend on β.
fn hs_velocity(p: InertiaParams, u: &PeriodicField) -> Result<PeriodicField> {
    Ok(&hs_reconstruct_v(u)? * (1.0 / p.beta))
}

/// Symbol of the linear part `a ∂³ Λ⁻¹`, zero at the Nyquist slot.
fn linear_symbol(p: InertiaParams, a: f64, k: i64, n: usize) -> Complex64 {
    if k == (n / 2) as i64 {
        return Complex64::new(0.0, 0.0);
    }
    let kf = k as f64;
    Complex64::new(0.0, -a * kf * kf * kf / p.symbol(k))
}

fn propagate(p: InertiaParams, a: f64, f: &PeriodicField, tau: f64) -> PeriodicField {
    let n = f.len();
    apply_multiplier(f, |k| (linear_symbol(p, a, k, n) * tau).exp())
}

fn check_finite(f: &PeriodicField, t: f64) -> Result<()> {
    if f.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// One step of size `dt`.
pub fn step(p: InertiaParams, s: &FlowState, dt: f64) -> Result<FlowState> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    let t = s.t + dt;
    let a = s.m.a;
    if p.alpha == 0.0 {
        if p.beta == 0.0 {
            return Err(Error::SingularInertia(0));
        }
        let v = hs_velocity(p, &s.m.u)?;
        let k1 = hs_rhs_unchecked(&v);
        let k2 = hs_rhs_unchecked(&(&v + &(&k1 * (0.5 * dt))));
        let k3 = hs_rhs_unchecked(&(&v + &(&k2 * (0.5 * dt))));
        let k4 = hs_rhs_unchecked(&(&v + &(&k3 * dt)));
        let incr = &(&(&k1 + &(&k2 * 2.0)) + &(&k3 * 2.0)) + &k4;
        let v_new = &v + &(&incr * (dt / 6.0));
        check_finite(&v_new, t)?;
        return Ok(FlowState::new(DualElement::new(&d(&v_new, 2) * -p.beta, a), t));
    }
    p.check_invertible(s.m.len())?;
    let u = &s.m.u;
    let n_of = |u: &PeriodicField| nonlinear(u, &spectral::inverse_inertia_unchecked(p, u));
    let e = |f: &PeriodicField| propagate(p, a, f, 0.5 * dt);
    let k1 = n_of(u);
    let eu = e(u);
    let k2 = n_of(&e(&(u + &(&k1 * (0.5 * dt)))));
    let k3 = n_of(&(&eu + &(&k2 * (0.5 * dt))));
    let e2u = e(&eu);
    let k4 = n_of(&(&e2u + &(&e(&k3) * dt)));
    let mid = e(&(&k2 + &k3));
    let tail = &(&(&e(&e(&k1)) + &(&mid * 2.0)) + &k4) * (dt / 6.0);
    let u_new = &e2u + &tail;
    check_finite(&u_new, t)?;
    Ok(FlowState::new(DualElement::new(u_new, a), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub energy: f64,
    pub h1: Option<f64>,
    pub h3: Option<f64>,
    pub h5: Option<f64>,
    /// `∫v_x² dx`, HS only.
    pub dirichlet: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub state: FlowState,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: InertiaParams,
    pub dt: f64,
    pub records: Vec<Record>,
}

/// Drift summary of one diagnostic over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub initial: f64,
    pub absolute: f64,
    pub relative: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Record {
        self.records.last().expect("a trajectory holds at least the initial record")
    }

    /// Largest deviation from the initial value of the selected diagnostic.
    pub fn drift(&self, pick: impl Fn(&Diagnostics) -> Option<f64>) -> Option<Drift> {
        let initial = pick(&self.records.first()?.diagnostics)?;
        let absolute = self
            .records
            .iter()
            .filter_map(|r| pick(&r.diagnostics))
            .map(|x| (x - initial).abs())
            .fold(0.0, f64::max);
        let relative = if initial != 0.0 { absolute / initial.abs() } else { absolute };
        Some(Drift { initial, absolute, relative })
    }
}

pub fn diagnostics(p: InertiaParams, m: &DualElement) -> Result<Diagnostics> {
    if p.alpha == 0.0 {
        let v = hs_velocity(p, &m.u)?;
        let vx = d(&v, 1);
        let dirichlet = dot(&vx, &vx);
        return Ok(Diagnostics {
            energy: energy(p, &AlgebraElement::new(v, m.a)),
            h1: None,
            h3: None,
            h5: None,
            dirichlet: Some(dirichlet),
        });
    }
    let v = spectral::invert_inertia(p, &m.u)?;
    let e = energy(p, &AlgebraElement::new(v, m.a));
    let (h1, h3, h5) = if p == InertiaParams::KDV {
        let (h1, h3, h5) = kdv_integrals(&m.u, -m.a);
        (Some(h1), Some(h3), Some(h5))
    } else {
        (None, None, None)
    };
    Ok(Diagnostics { energy: e, h1, h3, h5, dirichlet: None })
}

fn growth_measure(p: InertiaParams, m: &DualElement) -> Result<f64> {
    if p.alpha == 0.0 {
        Ok(d(&hs_velocity(p, &m.u)?, 1).sup_norm())
    } else {
        Ok(m.u.sup_norm())
    }
}

/// Integrates to `t_end` with a uniform step no larger than `dt`, recording
/// the initial state, every `record_every`-th step and the final state.
pub fn simulate(
    p: InertiaParams,
    initial: &FlowState,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if t_end <= 0.0 || !t_end.is_finite() || dt <= 0.0 || dt.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "need t_end > 0 and dt > 0, got t_end = {t_end}, dt = {dt}"
        )));
    }
    if record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be at least 1".into()));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let t0 = initial.t;

    let scale = growth_measure(p, &initial.m)?;
    let limit = if scale > 0.0 { BLOWUP_FACTOR * scale } else { f64::INFINITY };

    let mut records = vec![Record {
        state: initial.clone(),
        diagnostics: diagnostics(p, &initial.m)?,
    }];
    let mut s = initial.clone();
    for k in 1..=steps {
        s = step(p, &s, h)?;
        s.t = t0 + k as f64 * h;
        if growth_measure(p, &s.m)? > limit {
            return Err(Error::NonFinite { t: s.t });
        }
        if k % record_every == 0 || k == steps {
            records.push(Record {
                diagnostics: diagnostics(p, &s.m)?,
                state: s.clone(),
            });
        }
    }
    Ok(Trajectory { params: p, dt: h, records })
}
