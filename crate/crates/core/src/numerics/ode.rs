//! Embedded Dormand-Prince 4(5) integrator for small first-order systems.
//!
//! Fixed-size state keeps the shooting loop allocation-free. Callers split
//! the integration at potential breakpoints themselves; within a segment the
//! right-hand side is smooth.

use crate::error::{PfError, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Optional cap on the step size (used for finely tabulated potentials).
    pub max_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 2_000_000,
            max_step: None,
        }
    }
}

/// Integrate y' = rhs(t, y) from t0 to t1 and return y(t1).
///
/// `observe` is called after every accepted step with (t, y); pass a no-op
/// closure when dense output is not needed.
pub fn integrate_dp45<const N: usize, F, O>(
    rhs: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut observe: O,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    if !(t1 > t0) {
        return Err(PfError::OdeFailure(format!("bad span [{t0}, {t1}]")));
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut h = (span / 100.0).min(opts.max_step.unwrap_or(f64::INFINITY));
    let mut k1 = rhs(t, &y);
    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t).min(opts.max_step.unwrap_or(f64::INFINITY));
        let mut y2 = [0.0; N];
        for i in 0..N {
            y2[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = rhs(t + h / 5.0, &y2);
        let mut y3 = [0.0; N];
        for i in 0..N {
            y3[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = rhs(t + 3.0 * h / 10.0, &y3);
        let mut y4 = [0.0; N];
        for i in 0..N {
            y4[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = rhs(t + 4.0 * h / 5.0, &y4);
        let mut y5 = [0.0; N];
        for i in 0..N {
            y5[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = rhs(t + 8.0 * h / 9.0, &y5);
        let mut y6 = [0.0; N];
        for i in 0..N {
            y6[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = rhs(t + h, &y6);
        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = rhs(t + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            observe(t, &y);
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-15 * span {
            return Err(PfError::OdeFailure(format!(
                "step size underflow at t = {t:.6e}"
            )));
        }
    }
    Err(PfError::OdeFailure("step budget exhausted".into()))
}
