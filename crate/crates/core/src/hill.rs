//! Hill operators `−a∂_x² + u(x)` and their monodromy.
//!
//! A dual element with `a ≠ 0` is normalized to `y'' + q y = 0`,
//! `q = −u/a`. The λ-family shifts `q ↦ q − λ²`. The monodromy is the
//! transfer matrix of the fundamental frame over one period; its conjugacy
//! class together with the Prüfer winding number labels the coadjoint orbit.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::kdv_integrals;
use crate::ode::{self, Tolerance};
use crate::spectral::{BandLimited, PeriodicField};
use crate::virasoro::{group_coad, schwarzian_local, CircleDiffeo, DualElement, LocalSamples};

/// Integrator tolerance for the fundamental frame and the Prüfer phase.
pub const FRAME_TOLERANCE: Tolerance = Tolerance { rtol: 1e-12, atol: 1e-14 };

/// Default classification tolerance on the trace and on `‖M ∓ Id‖`.
pub const CLASSIFY_TOLERANCE: f64 = 1e-6;

// Absorbs round-off when Δθ lands exactly on a multiple of π.
const WINDING_SNAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillOperator {
    pub u: PeriodicField,
    pub a: f64,
}

impl HillOperator {
    pub fn new(u: PeriodicField, a: f64) -> Result<Self> {
        if a == 0.0 {
            return Err(Error::ZeroCocentral);
        }
        Ok(Self { u, a })
    }

    pub fn from_dual(m: &DualElement) -> Result<Self> {
        Self::new(m.u.clone(), m.a)
    }

    /// `y'' + q y = 0` form: `a = −1` gives `q = u`.
    pub fn from_q(q: PeriodicField) -> Self {
        Self { u: q, a: -1.0 }
    }

    pub fn to_dual(&self) -> DualElement {
        DualElement::new(self.u.clone(), self.a)
    }
}

/// `q = −u/a`.
pub fn canonical_q(op: &HillOperator) -> Result<PeriodicField> {
    if op.a == 0.0 {
        return Err(Error::ZeroCocentral);
    }
    let a = op.a;
    Ok(op.u.map(|u| -u / a))
}

struct Potential {
    q: BandLimited,
    shift: f64,
}

impl Potential {
    fn new(op: &HillOperator, lambda: f64) -> Result<Self> {
        Ok(Self {
            q: canonical_q(op)?.interpolator(),
            shift: lambda * lambda,
        })
    }

    #[inline]
    fn at(&self, x: f64) -> f64 {
        self.q.eval(x) - self.shift
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    /// `[[y₁, y₂], [y₁', y₂']]` at `x = 2π` from the identity frame.
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
    pub winding: u32,
}

impl MonodromyResult {
    pub fn det_deviation(&self) -> f64 {
        (self.det - 1.0).abs()
    }

    /// `‖M − s·Id‖_∞` (max entry) for `s = ±1`.
    pub fn distance_to_scalar(&self, s: f64) -> f64 {
        let m = &self.matrix;
        [m[0][0] - s, m[0][1], m[1][0], m[1][1] - s]
            .iter()
            .fold(0.0, |acc, e| acc.max(e.abs()))
    }
}

fn frame(pot: &Potential, x1: f64) -> Result<[f64; 4]> {
    ode::integrate(
        |x, y: &[f64; 4]| {
            let q = pot.at(x);
            [y[1], -q * y[0], y[3], -q * y[2]]
        },
        0.0,
        x1,
        [1.0, 0.0, 0.0, 1.0],
        FRAME_TOLERANCE,
    )
}

/// Monodromy of `y'' + (q − λ²) y = 0` over `[0, 2π]`.
pub fn monodromy(op: &HillOperator, lambda: f64) -> Result<MonodromyResult> {
    let pot = Potential::new(op, lambda)?;
    let y = frame(&pot, 2.0 * PI)?;
    let matrix = [[y[0], y[2]], [y[1], y[3]]];
    Ok(MonodromyResult {
        matrix,
        trace: matrix[0][0] + matrix[1][1],
        det: matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0],
        winding: winding_with(&pot, &matrix)?,
    })
}

/// Phase advance `Δθ` over one period from `θ(0) = θ0`.
fn phase_advance(pot: &Potential, theta0: f64) -> Result<f64> {
    let theta = ode::integrate(
        |x, th: &[f64; 1]| {
            let (s, c) = th[0].sin_cos();
            [c * c + pot.at(x) * s * s]
        },
        0.0,
        2.0 * PI,
        [theta0],
        FRAME_TOLERANCE,
    )?[0];
    Ok(theta - theta0)
}

/// A real eigen-direction `(y, y')` of `M` for `|tr M| >= 2`, or of the
/// nearest parabolic matrix just inside the elliptic boundary.
fn eigen_direction(m: &[[f64; 2]; 2]) -> Option<(f64, f64)> {
    let tr = m[0][0] + m[1][1];
    let disc = (tr * tr - 4.0).max(0.0).sqrt();
    let lambda = 0.5 * (tr + tr.signum() * disc);
    let first = (m[0][1], lambda - m[0][0]);
    let second = (lambda - m[1][1], m[1][0]);
    let norm = |v: (f64, f64)| v.0.hypot(v.1);
    let v = if norm(first) >= norm(second) { first } else { second };
    let scale = m.iter().flatten().fold(1.0_f64, |a, e| a.max(e.abs()));
    (norm(v) > 1e-8 * scale).then_some(v)
}

// Elliptic monodromy has no real eigenvector, so every start advances by a
// phase strictly between the same two multiples of π. Otherwise the advance
// is exactly kπ along an eigen-direction and within π of it elsewhere; the
// count is read there so that it does not depend on the base point.
fn winding_with(pot: &Potential, m: &[[f64; 2]; 2]) -> Result<u32> {
    let tr = m[0][0] + m[1][1];
    let half_turns = if tr.abs() < 2.0 - CLASSIFY_TOLERANCE {
        (phase_advance(pot, 0.0)? / PI + WINDING_SNAP).floor()
    } else {
        let theta0 = eigen_direction(m).map_or(0.0, |(y, yp)| y.atan2(yp));
        (phase_advance(pot, theta0)? / PI).round()
    };
    Ok(half_turns.max(0.0) as u32)
}

/// Half-turns of the ratio map `η` through `ℝP¹` over one period, from the
/// Prüfer phase `θ' = cos²θ + q sin²θ` (`tan θ = y/y'`). Equals `⌊Δθ/π⌋`
/// for the solution with `y(0) = 0, y'(0) = 1` whenever that count is
/// independent of the base point.
pub fn prufer_winding(op: &HillOperator, lambda: f64) -> Result<u32> {
    Ok(monodromy(op, lambda)?.winding)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitKind {
    Elliptic,
    Hyperbolic,
    Jordan,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    /// Within ten tolerances of a class boundary.
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub kind: OrbitKind,
    pub winding: u32,
    pub trace: f64,
    /// Sign of the dominant off-diagonal entry for Jordan blocks. Reported,
    /// but not part of the classification key.
    pub jordan_sign: Option<i8>,
    pub confidence: Confidence,
}

/// Classifies by the conjugacy class of the monodromy in `SL₂(ℝ)` plus the
/// winding number.
pub fn classify(op: &HillOperator, tol: f64) -> Result<OrbitClass> {
    let m = monodromy(op, 0.0)?;
    Ok(classify_monodromy(&m, tol))
}

pub fn classify_monodromy(m: &MonodromyResult, tol: f64) -> OrbitClass {
    let gap = m.trace.abs() - 2.0;
    let near = |dist: f64| dist <= 10.0 * tol;
    let (kind, jordan_sign, confidence) = if gap < -tol {
        (OrbitKind::Elliptic, None, near(-gap))
    } else if gap > tol {
        (OrbitKind::Hyperbolic, None, near(gap))
    } else {
        let dist = m.distance_to_scalar(m.trace.signum());
        if dist > tol {
            let (b, c) = (m.matrix[0][1], m.matrix[1][0]);
            let off = if b.abs() >= c.abs() { b } else { c };
            (OrbitKind::Jordan, Some(off.signum() as i8), near(dist))
        } else {
            (OrbitKind::Central, None, false)
        }
    };
    OrbitClass {
        kind,
        winding: m.winding,
        trace: m.trace,
        jordan_sign,
        confidence: if confidence { Confidence::Low } else { Confidence::High },
    }
}

/// Orbit type of a general dual element, including the `a = 0` hyperplane
/// where the invariant is the square-root Casimir instead of a monodromy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DualOrbit {
    Hill(OrbitClass),
    Differential { sqrt_casimir: f64 },
}

pub fn classify_dual(m: &DualElement, tol: f64) -> Result<DualOrbit> {
    if m.a == 0.0 {
        return Ok(DualOrbit::Differential {
            sqrt_casimir: crate::virasoro::sqrt_casimir(m)?,
        });
    }
    Ok(DualOrbit::Hill(classify(&HillOperator::from_dual(m)?, tol)?))
}

/// `h_λ = log tr M_λ`.
pub fn casimir_lambda(op: &HillOperator, lambda: f64) -> Result<f64> {
    let m = monodromy(op, lambda)?;
    if m.trace <= 0.0 {
        return Err(Error::NonPositiveTrace(m.trace));
    }
    Ok(m.trace.ln())
}

/// `c₁ = 1/2`, `c_n = (2n−3)!!/(2ⁿ n!)`. Panics for `n = 0`.
pub fn expansion_coefficient(n: u32) -> f64 {
    assert!(n >= 1, "expansion coefficients start at n = 1");
    if n == 1 {
        return 0.5;
    }
    let double_fact: f64 = (1..=(2 * n - 3)).step_by(2).map(f64::from).product();
    let fact: f64 = (1..=n).map(f64::from).product();
    double_fact / (2f64.powi(n as i32) * fact)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub lambda: f64,
    pub h_lambda: f64,
    pub partial_sum: f64,
    pub residual: f64,
}

/// Compares `h_λ` with `2πλ − Σ_{n ≤ n_terms} c_n h_{2n−1} λ^{1−2n}`, where the
/// integrals are taken of the normalized potential `q`.
pub fn expansion_check(
    u: &PeriodicField,
    a: f64,
    lambdas: &[f64],
    n_terms: usize,
) -> Result<Vec<ExpansionRow>> {
    if n_terms > 3 {
        return Err(Error::UnsupportedIndex(n_terms));
    }
    let op = HillOperator::new(u.clone(), a)?;
    let (h1, h3, h5) = kdv_integrals(&canonical_q(&op)?, 0.5);
    let h = [h1, h3, h5];
    lambdas
        .par_iter()
        .map(|&lambda| {
            let h_lambda = casimir_lambda(&op, lambda)?;
            let tail: f64 = (1..=n_terms)
                .map(|n| expansion_coefficient(n as u32) * h[n - 1] * lambda.powi(1 - 2 * n as i32))
                .sum();
            let partial_sum = 2.0 * PI * lambda - tail;
            Ok(ExpansionRow {
                lambda,
                h_lambda,
                partial_sum,
                residual: h_lambda - partial_sum,
            })
        })
        .collect()
}

/// `|tr M − tr M'| + |w − w'|` where `'` denotes the operator moved by the
/// coadjoint action of `φ`.
pub fn conjugacy_invariance_check(op: &HillOperator, phi: &CircleDiffeo) -> Result<f64> {
    let before = monodromy(op, 0.0)?;
    let moved = HillOperator::from_dual(&group_coad(phi, &op.to_dual())?)?;
    let after = monodromy(&moved, 0.0)?;
    Ok((before.trace - after.trace).abs() + (before.winding as f64 - after.winding as f64).abs())
}

/// Samples the fundamental solutions `g = y₁` (`g(0)=1, g'(0)=0`) and
/// `f = y₂` (`f(0)=0, f'(0)=1`) on the window `x0 + j·step`, `x0 >= 0`.
pub fn local_solutions(
    op: &HillOperator,
    x0: f64,
    step: f64,
    len: usize,
) -> Result<(LocalSamples, LocalSamples)> {
    if x0 < 0.0 || step <= 0.0 {
        return Err(Error::InvalidArgument("window must start at x0 >= 0 with step > 0".into()));
    }
    let pot = Potential::new(op, 0.0)?;
    let rhs = |x: f64, y: &[f64; 4]| {
        let q = pot.at(x);
        [y[1], -q * y[0], y[3], -q * y[2]]
    };
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut x = 0.0;
    let mut g = Vec::with_capacity(len);
    let mut f = Vec::with_capacity(len);
    for j in 0..len {
        let target = x0 + j as f64 * step;
        if target > x {
            y = ode::integrate(rhs, x, target, y, FRAME_TOLERANCE)?;
            x = target;
        }
        g.push(y[0]);
        f.push(y[2]);
    }
    Ok((
        LocalSamples { x0, step, values: f },
        LocalSamples { x0, step, values: g },
    ))
}

/// Potential recovered from a pair of solutions through their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPotential {
    pub x: Vec<f64>,
    /// `u = S(η)/2`.
    pub u: Vec<f64>,
    /// `g = 1/√η_x`.
    pub g: Vec<f64>,
    /// `f = g·η`.
    pub f: Vec<f64>,
}

/// Recovers the potential of `∂_x² + u` from two solutions via `u = S(η)/2`
/// with `η = f/g`.
pub fn potential_from_ratio(f: &LocalSamples, g: &LocalSamples) -> Result<RatioPotential> {
    if f.values.len() != g.values.len() || f.x0 != g.x0 || f.step != g.step {
        return Err(Error::InvalidArgument("solutions must share a window".into()));
    }
    if let Some(&z) = g.values.iter().find(|&&v| v == 0.0) {
        return Err(Error::CriticalRatio(z));
    }
    let eta = LocalSamples {
        x0: f.x0,
        step: f.step,
        values: f.values.iter().zip(&g.values).map(|(a, b)| a / b).collect(),
    };
    // η_x at round-off level counts as a critical point
    let floor = 1e-12 * eta.values.iter().fold(1.0_f64, |m, v| m.max(v.abs())) / eta.step;
    if let Some(i) = eta.interior().find(|&i| eta.derivatives(i).0 <= floor) {
        return Err(Error::CriticalRatio(eta.x(i)));
    }
    let s = schwarzian_local(&eta)?;
    let mut out = RatioPotential {
        x: Vec::with_capacity(s.len()),
        u: Vec::with_capacity(s.len()),
        g: Vec::with_capacity(s.len()),
        f: Vec::with_capacity(s.len()),
    };
    for (i, (x, sv)) in eta.interior().zip(s) {
        let eta_x = eta.derivatives(i).0;
        let gn = eta_x.sqrt().recip();
        out.x.push(x);
        out.u.push(0.5 * sv);
        out.g.push(gn);
        out.f.push(gn * eta.values[i]);
    }
    Ok(out)
}
