//! Periodic-grid calculus on the circle `[0, 2π)`.
//!
//! Fields are sampled at `x_j = 2πj/N` with `N` a power of two. All
//! differential operators act diagonally on the discrete Fourier modes; the
//! Nyquist mode is dropped by every derivative. Products are dealiased by the
//! 2/3 rule: the pointwise product is projected onto `|k| <= N/3`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance (against the sup-norm) under which a mean counts as zero.
pub const MEAN_TOLERANCE: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Normalized forward transform: `c_k = (1/N) Σ_j f_j e^{-ikx_j}`.
fn forward(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`forward`]; keeps the real part.
fn inverse(mut modes: Vec<Complex64>) -> Vec<f64> {
    let n = modes.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut modes));
    modes.into_iter().map(|c| c.re).collect()
}

/// Signed wavenumber of FFT slot `j`. The Nyquist slot maps to `+N/2`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Largest retained wavenumber under the 2/3 rule.
#[inline]
pub fn dealias_cutoff(n: usize) -> i64 {
    (n / 3) as i64
}

fn check_grid(n: usize) -> Result<()> {
    if n >= 8 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(n))
    }
}

/// Uniform grid points `2πj/N`.
pub fn grid_points(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// A real function on the circle sampled on the uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PeriodicField {
    samples: Vec<f64>,
}

impl TryFrom<Vec<f64>> for PeriodicField {
    type Error = Error;

    fn try_from(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples)
    }
}

impl From<PeriodicField> for Vec<f64> {
    fn from(f: PeriodicField) -> Self {
        f.samples
    }
}

impl PeriodicField {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_grid(samples.len())?;
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSamples);
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid_points(n).into_iter().map(f).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    /// Rebuilds a field from normalized Fourier coefficients (FFT ordering).
    pub fn from_modes(modes: Vec<Complex64>) -> Result<Self> {
        check_grid(modes.len())?;
        Self::new(inverse(modes))
    }

    // Internal constructor for results of operations on valid fields.
    pub(crate) fn from_raw(samples: Vec<f64>) -> Self {
        debug_assert!(samples.len().is_power_of_two());
        Self { samples }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Normalized Fourier coefficients in FFT ordering.
    pub fn modes(&self) -> Vec<Complex64> {
        forward(&self.samples)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// `∫_0^{2π} f dx` by the trapezoid rule (spectrally accurate).
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.mean()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.samples.iter().map(|&s| f(s)).collect())
    }

    /// Pointwise combination. Panics if the grids differ.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        Self::from_raw(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Undealiased pointwise product.
    pub fn pointwise_mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let n = self.len();
        Self::from_raw((0..n).map(|j| self.samples[(n - j) % n]).collect())
    }

    /// Projection onto the modes kept by the 2/3 rule.
    pub fn dealiased(&self) -> Self {
        apply_multiplier(self, |k| {
            if k.abs() <= dealias_cutoff(self.len()) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn interpolator(&self) -> BandLimited {
        BandLimited::new(self)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.len(), other.len()))
        }
    }
}

impl Add for &PeriodicField {
    type Output = PeriodicField;
    fn add(self, rhs: Self) -> PeriodicField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &PeriodicField {
    type Output = PeriodicField;
    fn sub(self, rhs: Self) -> PeriodicField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Neg for &PeriodicField {
    type Output = PeriodicField;
    fn neg(self) -> PeriodicField {
        self.map(|a| -a)
    }
}

impl Mul<f64> for &PeriodicField {
    type Output = PeriodicField;
    fn mul(self, rhs: f64) -> PeriodicField {
        self.map(|a| a * rhs)
    }
}

/// Applies the Fourier multiplier `m(k)` to `f`. The Nyquist slot is passed
/// as `k = N/2`; callers decide whether to keep it.
pub(crate) fn apply_multiplier(f: &PeriodicField, m: impl Fn(i64) -> Complex64) -> PeriodicField {
    let n = f.len();
    let mut modes = forward(&f.samples);
    for (j, c) in modes.iter_mut().enumerate() {
        *c *= m(wavenumber(j, n));
    }
    PeriodicField::from_raw(inverse(modes))
}

/// Symbol of `∂_x^order` with the Nyquist mode removed.
fn derivative_symbol(k: i64, n: usize, order: u32) -> Complex64 {
    if k == (n / 2) as i64 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k as f64).powu(order)
}

/// Spectral derivative `∂_x^order f`, `1 <= order <= 4`.
pub fn derivative(f: &PeriodicField, order: u32) -> Result<PeriodicField> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "derivative order {order} outside 1..=4"
        )));
    }
    let n = f.len();
    Ok(apply_multiplier(f, |k| derivative_symbol(k, n, order)))
}

// Infallible variant for internal use with a fixed, valid order.
pub(crate) fn d(f: &PeriodicField, order: u32) -> PeriodicField {
    let n = f.len();
    apply_multiplier(f, |k| derivative_symbol(k, n, order))
}

fn check_zero_mean(f: &PeriodicField) -> Result<()> {
    let mean = f.mean();
    let tol = MEAN_TOLERANCE * f.sup_norm();
    if mean.abs() > tol {
        Err(Error::NonZeroMean { mean, tol })
    } else {
        Ok(())
    }
}

/// `∂_x^{-1}` on mean-zero input, returning the mean-zero primitive.
pub fn antiderivative_zero_mean(f: &PeriodicField) -> Result<PeriodicField> {
    check_zero_mean(f)?;
    let n = f.len();
    Ok(apply_multiplier(f, |k| {
        if k == 0 || k == (n / 2) as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / k as f64)
        }
    }))
}

/// Product projected onto the modes retained by the 2/3 rule.
pub fn multiply_dealiased(f: &PeriodicField, g: &PeriodicField) -> Result<PeriodicField> {
    f.same_grid(g)?;
    Ok(f.pointwise_mul(g).dealiased())
}

// Grid sizes are checked by the caller.
pub(crate) fn mul(f: &PeriodicField, g: &PeriodicField) -> PeriodicField {
    f.pointwise_mul(g).dealiased()
}

/// `∫_0^{2π} f g dx`.
pub fn inner_product(f: &PeriodicField, g: &PeriodicField) -> Result<f64> {
    f.same_grid(g)?;
    Ok(dot(f, g))
}

pub(crate) fn dot(f: &PeriodicField, g: &PeriodicField) -> f64 {
    let s: f64 = f.samples.iter().zip(&g.samples).map(|(a, b)| a * b).sum();
    2.0 * PI * s / f.len() as f64
}

/// Parameters of the inertia operator `Λ = α − β∂_x²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl InertiaParams {
    /// `L²` metric: KdV.
    pub const KDV: Self = Self { alpha: 1.0, beta: 0.0 };
    /// `H¹` metric: Camassa–Holm.
    pub const CH: Self = Self { alpha: 1.0, beta: 1.0 };
    /// Homogeneous `Ḣ¹` metric: Hunter–Saxton.
    pub const HS: Self = Self { alpha: 0.0, beta: 1.0 };

    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// The Hunter–Saxton stratum `α = 0, β ≠ 0`.
    pub fn is_degenerate(&self) -> bool {
        self.alpha == 0.0 && self.beta != 0.0
    }

    /// Fourier symbol `α + βk²`.
    #[inline]
    pub fn symbol(&self, k: i64) -> f64 {
        self.alpha + self.beta * (k * k) as f64
    }

    /// Errors if the symbol vanishes at some resolved, non-zero wavenumber of an
    /// `n`-point grid (for example `α = 1, β = -1` at `k = 1`).
    pub fn check_invertible(&self, n: usize) -> Result<()> {
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err(Error::SingularInertia(0));
        }
        for k in 1..(n / 2) as i64 {
            let s = self.symbol(k);
            let scale = self.alpha.abs().max(self.beta.abs() * (k * k) as f64);
            if s.abs() <= 1e-14 * scale {
                return Err(Error::SingularInertia(k));
            }
        }
        Ok(())
    }
}

/// Field part of the inertia operator: `αv − βv_xx`.
pub fn apply_inertia(p: InertiaParams, v: &PeriodicField) -> PeriodicField {
    let n = v.len();
    apply_multiplier(v, |k| {
        let s = if k == (n / 2) as i64 { p.alpha } else { p.symbol(k) };
        Complex64::new(s, 0.0)
    })
}

/// Solves `Λv = u`. For `α = 0` the mean-zero preimage is returned and `u`
/// must have zero mean.
pub fn invert_inertia(p: InertiaParams, u: &PeriodicField) -> Result<PeriodicField> {
    let n = u.len();
    p.check_invertible(n)?;
    if p.alpha == 0.0 {
        let mean = u.mean();
        if mean.abs() > MEAN_TOLERANCE * u.sup_norm() {
            return Err(Error::DegenerateOutsideImage { mean });
        }
    } else if p.alpha.abs() <= 1e-14 * p.beta.abs() {
        return Err(Error::SingularInertia(0));
    }
    Ok(inverse_inertia_unchecked(p, u))
}

pub(crate) fn inverse_inertia_unchecked(p: InertiaParams, u: &PeriodicField) -> PeriodicField {
    let n = u.len();
    apply_multiplier(u, |k| {
        let s = if k == (n / 2) as i64 { p.alpha } else { p.symbol(k) };
        if s == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / s, 0.0)
        }
    })
}

/// Band-limited (trigonometric) interpolant of a sampled field.
#[derive(Debug, Clone)]
pub struct BandLimited {
    mean: f64,
    // c_k for k = 1..=kmax (< N/2)
    coeffs: Vec<Complex64>,
    nyquist: f64,
    half_n: f64,
}

impl BandLimited {
    pub fn new(f: &PeriodicField) -> Self {
        let n = f.len();
        let modes = forward(&f.samples);
        let scale = modes.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let mut coeffs: Vec<Complex64> = modes[1..n / 2].to_vec();
        while coeffs.last().is_some_and(|c| c.norm() <= 1e-14 * scale) {
            coeffs.pop();
        }
        Self {
            mean: modes[0].re,
            coeffs,
            nyquist: modes[n / 2].re,
            half_n: (n / 2) as f64,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let rot = Complex64::new(x.cos(), x.sin());
        let mut z = rot;
        let mut acc = 0.0;
        for c in &self.coeffs {
            acc += c.re * z.re - c.im * z.im;
            z *= rot;
        }
        let mut value = self.mean + 2.0 * acc;
        if self.nyquist != 0.0 {
            value += self.nyquist * (self.half_n * x).cos();
        }
        value
    }

    /// Highest retained wavenumber.
    pub fn bandwidth(&self) -> usize {
        self.coeffs.len()
    }
}

/// A random trigonometric polynomial with modes `1..=max_mode` and
/// coefficients uniform in `[-amplitude/k, amplitude/k]`. Mean zero.
pub fn random_bandlimited<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_mode: usize,
    amplitude: f64,
) -> Result<PeriodicField> {
    check_grid(n)?;
    if max_mode as i64 > dealias_cutoff(n) {
        return Err(Error::InvalidArgument(format!(
            "max_mode {max_mode} exceeds the dealiasing cutoff {}",
            dealias_cutoff(n)
        )));
    }
    let terms: Vec<(f64, f64, f64)> = (1..=max_mode)
        .map(|k| {
            let w = amplitude / k as f64;
            (k as f64, rng.gen_range(-w..=w), rng.gen_range(-w..=w))
        })
        .collect();
    PeriodicField::from_fn(n, |x| {
        terms
            .iter()
            .map(|&(k, a, b)| a * (k * x).cos() + b * (k * x).sin())
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const N: usize = 64;

    fn field(f: impl Fn(f64) -> f64) -> PeriodicField {
        PeriodicField::from_fn(N, f).unwrap()
    }

    fn close(a: &PeriodicField, b: &PeriodicField, tol: f64) {
        let err = (a - b).sup_norm();
        assert!(err < tol, "sup error {err:e} >= {tol:e}");
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(PeriodicField::new(vec![0.0; 4]), Err(Error::InvalidGrid(4)));
        assert_eq!(PeriodicField::new(vec![0.0; 12]), Err(Error::InvalidGrid(12)));
        let mut s = vec![0.0; 8];
        s[3] = f64::NAN;
        assert_eq!(PeriodicField::new(s), Err(Error::NonFiniteSamples));
    }

    #[test]
    fn modes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_bandlimited(&mut rng, N, 10, 1.0).unwrap();
        let g = PeriodicField::from_modes(f.modes()).unwrap();
        assert!((&f - &g).sup_norm() <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn derivative_examples() {
        close(&derivative(&field(f64::cos), 1).unwrap(), &field(|x| -x.sin()), 1e-12);
        close(
            &derivative(&PeriodicField::constant(N, 5.0).unwrap(), 1).unwrap(),
            &PeriodicField::zeros(N).unwrap(),
            1e-12,
        );
        close(
            &derivative(&field(|x| (3.0 * x).sin()), 3).unwrap(),
            &field(|x| -27.0 * (3.0 * x).cos()),
            1e-10,
        );
        assert!(derivative(&field(f64::cos), 5).is_err());
        assert!(derivative(&field(f64::cos), 0).is_err());
    }

    #[test]
    fn derivative_drops_nyquist() {
        let nyq = field(|x| (N as f64 / 2.0 * x).cos());
        assert!(derivative(&nyq, 1).unwrap().sup_norm() < 1e-12);
        assert!(derivative(&nyq, 2).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn antiderivative_examples() {
        close(&antiderivative_zero_mean(&field(f64::cos)).unwrap(), &field(f64::sin), 1e-13);
        close(
            &antiderivative_zero_mean(&field(|x| (2.0 * x).cos())).unwrap(),
            &field(|x| 0.5 * (2.0 * x).sin()),
            1e-13,
        );
        assert!(matches!(
            antiderivative_zero_mean(&PeriodicField::constant(N, 1.0).unwrap()),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn product_examples() {
        let f = field(|x| (2.0 * x).sin() + 0.3);
        close(&multiply_dealiased(&f, &PeriodicField::constant(N, 1.0).unwrap()).unwrap(), &f, 1e-13);
        close(
            &multiply_dealiased(&field(f64::sin), &field(f64::sin)).unwrap(),
            &field(|x| (1.0 - (2.0 * x).cos()) / 2.0),
            1e-13,
        );
        close(
            &multiply_dealiased(&field(f64::cos), &field(f64::sin)).unwrap(),
            &field(|x| 0.5 * (2.0 * x).sin()),
            1e-13,
        );
        let g = PeriodicField::zeros(128).unwrap();
        assert_eq!(multiply_dealiased(&f, &g), Err(Error::GridMismatch(64, 128)));
    }

    #[test]
    fn product_truncates_high_modes() {
        // cos(20x)^2 = 1/2 + cos(40x)/2; 40 > 64/3 is removed.
        let f = field(|x| (20.0 * x).cos());
        let p = multiply_dealiased(&f, &f).unwrap();
        close(&p, &PeriodicField::constant(N, 0.5).unwrap(), 1e-13);
    }

    #[test]
    fn inner_product_examples() {
        let s = field(f64::sin);
        assert!((inner_product(&s, &s).unwrap() - PI).abs() < 1e-13);
        assert!(inner_product(&s, &field(f64::cos)).unwrap().abs() < 1e-13);
        let one = PeriodicField::constant(N, 1.0).unwrap();
        assert!((inner_product(&one, &one).unwrap() - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn inertia_examples() {
        let v = field(|x| x.sin() + 0.2 * (3.0 * x).cos());
        close(&apply_inertia(InertiaParams::KDV, &v), &v, 1e-12);
        close(&apply_inertia(InertiaParams::CH, &field(f64::cos)), &field(|x| 2.0 * x.cos()), 1e-12);
        let c = PeriodicField::constant(N, 3.0).unwrap();
        assert!(apply_inertia(InertiaParams::HS, &c).sup_norm() < 1e-12);

        close(
            &invert_inertia(InertiaParams::CH, &field(|x| 2.0 * x.cos())).unwrap(),
            &field(f64::cos),
            1e-12,
        );
        close(&invert_inertia(InertiaParams::HS, &field(f64::cos)).unwrap(), &field(f64::cos), 1e-12);
        assert!(matches!(
            invert_inertia(InertiaParams::HS, &field(|x| 1.0 + x.cos())),
            Err(Error::DegenerateOutsideImage { .. })
        ));
        assert_eq!(
            invert_inertia(InertiaParams::new(0.0, 0.0), &v),
            Err(Error::SingularInertia(0))
        );
        assert_eq!(
            invert_inertia(InertiaParams::new(1.0, -1.0), &v),
            Err(Error::SingularInertia(1))
        );
    }

    #[test]
    fn hs_inverse_is_mean_zero() {
        let u = field(|x| (2.0 * x).sin() - 0.4 * x.cos());
        let v = invert_inertia(InertiaParams::HS, &u).unwrap();
        assert!(v.mean().abs() < 1e-15);
        close(&apply_inertia(InertiaParams::HS, &v), &u, 1e-12);
    }

    #[test]
    fn interpolation_reproduces_band_limited_functions() {
        let f = field(|x| x.sin() - 0.5 * (4.0 * x).cos() + 0.1);
        let b = f.interpolator();
        for x in [0.1_f64, 1.234, 3.0, 5.9, 7.5, -2.0] {
            let exact = x.sin() - 0.5 * (4.0 * x).cos() + 0.1;
            assert!((b.eval(x) - exact).abs() < 1e-13);
        }
        assert_eq!(b.bandwidth(), 4);
    }

    #[test]
    fn reflect_negates_argument() {
        let f = field(|x| x.sin() + (2.0 * x).cos());
        close(&f.reflect(), &field(|x| -x.sin() + (2.0 * x).cos()), 1e-13);
    }

    #[test]
    fn serde_as_plain_array() {
        let f = field(f64::cos);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.starts_with('['));
        let back: PeriodicField = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<PeriodicField>("[1.0, 2.0, 3.0]").is_err());
    }
}
