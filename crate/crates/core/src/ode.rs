//! Adaptive Dormand–Prince 5(4) for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights are the last row of A; E = b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Integrates `y' = f(x, y)` from `x0` to `x1 > x0`.
pub fn integrate<const D: usize>(
    f: impl Fn(f64, &[f64; D]) -> [f64; D],
    x0: f64,
    x1: f64,
    y0: [f64; D],
    tol: Tolerance,
) -> Result<[f64; D]> {
    let span = x1 - x0;
    if span <= 0.0 {
        return Err(Error::InvalidArgument(format!("empty interval [{x0}, {x1}]")));
    }
    let mut x = x0;
    let mut y = y0;
    let mut h = span * 1e-3;
    let mut k = [[0.0; D]; 7];
    k[0] = f(x, &y);
    for _ in 0..MAX_STEPS {
        if x >= x1 {
            return Ok(y);
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                *yi += h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            k[s] = f(x + C[s] * h, &ys);
        }
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            *yi += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
        }
        let mut err = 0.0_f64;
        for i in 0..D {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::IntegratorFailure(format!("non-finite error at x = {x}")));
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + h };
            y = y_new;
            // FSAL: the last stage is f at the new point
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < span * 1e-14 {
            return Err(Error::IntegratorFailure(format!("step size underflow at x = {x}")));
        }
    }
    Err(Error::IntegratorFailure("too many steps".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_period() {
        let tol = Tolerance { rtol: 1e-12, atol: 1e-14 };
        let y = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, 2.0 * std::f64::consts::PI, [1.0, 0.0], tol)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn exponential_growth() {
        let tol = Tolerance { rtol: 1e-12, atol: 0.0 };
        let y = integrate(|_, y: &[f64; 1]| [3.0 * y[0]], 0.0, 2.0, [1.0], tol).unwrap();
        assert!((y[0] / 6f64.exp() - 1.0).abs() < 1e-10);
    }
}
