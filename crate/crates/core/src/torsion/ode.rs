//! Dormand–Prince 5(4) for the second-order linear equations of the model
//! operators, and the Gel'fand–Yaglom determinant oracle built on it.

use crate::error::{Error, Result};

// Butcher tableau.
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
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

const MAX_STEPS: usize = 2_000_000;

#[derive(Clone, Copy, Debug)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate f″ = q(x) f from `x0` to `x1` (either direction) with
/// mixed relative/absolute tolerance `rtol` on (f, f′).
pub fn integrate_linear<Q: Fn(f64) -> f64>(
    q: Q,
    x0: f64,
    x1: f64,
    y0: [f64; 2],
    rtol: f64,
) -> Result<([f64; 2], OdeStats)> {
    let rhs = |x: f64, y: &[f64; 2]| [y[1], q(x) * y[0]];
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut h = 1e-3 * span;
    let mut stats = OdeStats { accepted: 0, rejected: 0 };
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(x, &y);
    while (x1 - x) * dir > 0.0 {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Stiff(format!("more than {MAX_STEPS} steps near x = {x}")));
        }
        if h < 1e-14 * x.abs().max(1.0) {
            return Err(Error::Stiff(format!(
                "step size underflow at x = {x}; use the scaled Bessel closed forms instead"
            )));
        }
        let last = h >= (x1 - x).abs();
        let step = if last { (x1 - x).abs() } else { h };
        let hs = dir * step;
        for i in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i) {
                yi[0] += hs * A[i][j] * kj[0];
                yi[1] += hs * A[i][j] * kj[1];
            }
            k[i] = rhs(x + C[i] * hs, &yi);
        }
        let mut y5 = y;
        let mut e = [0.0; 2];
        for i in 0..7 {
            for c in 0..2 {
                y5[c] += hs * B5[i] * k[i][c];
                e[c] += hs * (B5[i] - B4[i]) * k[i][c];
            }
        }
        let scale_abs = rtol * 1e-30;
        let mut err: f64 = 0.0;
        for c in 0..2 {
            let sc = scale_abs + rtol * y[c].abs().max(y5[c].abs());
            err = err.max((e[c] / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Overflow(format!("ODE solution overflowed near x = {x}")));
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + hs };
            y = y5;
            k[0] = k[6];
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * fac;
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        // f″ = 4f, f(0)=1, f′(0)=2 ⇒ f = e^{2x}.
        let (y, _) = integrate_linear(|_| 4.0, 0.0, 3.0, [1.0, 2.0], 1e-12).unwrap();
        assert!((y[0] / 6f64.exp() - 1.0).abs() < 1e-10);
        assert!((y[1] / (2.0 * 6f64.exp()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn backward_power_law() {
        // f″ = 2/x² f has f = x², x^{−1}; start at x=1 on x^{−1} and go to 0.1.
        let (y, _) = integrate_linear(|x| 2.0 / (x * x), 1.0, 0.1, [1.0, -1.0], 1e-12).unwrap();
        assert!((y[0] - 10.0).abs() < 1e-9);
        assert!((y[1] + 100.0).abs() < 1e-7);
    }
}
