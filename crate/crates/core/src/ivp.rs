//! Adaptive Dormand-Prince 5(4) stepper for small systems.
//!
//! The step size is controlled by the embedded 4th-order error estimate with
//! the usual PI-free controller `h <- h * clamp(0.9 err^{-1/5}, 0.2, 5)` and
//! an explicit cap `max_dt`. The cap is load-bearing: dense output downstream
//! is cubic Hermite on the accepted nodes, and a small maximum step keeps the
//! interpolation error a couple of orders below the step tolerance.

use crate::error::{Error, Result};

pub(crate) struct StepOpts {
    pub rtol: f64,
    pub atol: f64,
    pub max_dt: f64,
    pub max_steps: usize,
}

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
// Error weights (5th order minus embedded 4th order solution).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `on_node(t, y, dy)` is invoked at `t0` and at every accepted step;
/// `stop(t, y)` is consulted after each accepted step and ends the
/// integration early when it returns true. Returns the final `(t, y)`.
pub(crate) fn dopri5<const N: usize>(
    f: &mut dyn FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &StepOpts,
    on_node: &mut dyn FnMut(f64, &[f64; N], &[f64; N]),
    stop: &mut dyn FnMut(f64, &[f64; N]) -> bool,
) -> Result<(f64, [f64; N])> {
    let dir = (t_end - t0).signum();
    if dir == 0.0 {
        let k = f(t0, &y0);
        on_node(t0, &y0, &k);
        return Ok((t0, y0));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    on_node(t, &y, &k1);
    if stop(t, &y) {
        return Ok((t, y));
    }

    let mut h = dir * opts.max_dt.min((t_end - t0).abs());
    let mut steps = 0usize;
    while (t_end - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::ToleranceFailure(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        if h.abs() > opts.max_dt {
            h = dir * opts.max_dt;
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::ToleranceFailure(format!(
                "step size underflow at t = {t}"
            )));
        }

        let add = |y: &[f64; N], parts: &[(f64, &[f64; N])]| -> [f64; N] {
            let mut out = *y;
            for i in 0..N {
                let mut acc = 0.0;
                for (c, k) in parts {
                    acc += c * k[i];
                }
                out[i] += h * acc;
            }
            out
        };

        let k2 = f(t + 0.2 * h, &add(&y, &[(A21, &k1)]));
        let k3 = f(t + 0.3 * h, &add(&y, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + 0.8 * h, &add(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + 8.0 / 9.0 * h,
            &add(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &add(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = add(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / N as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            on_node(t, &y, &k1);
            if stop(t, &y) {
                return Ok((t, y));
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok((t, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = StepOpts {
            rtol: 1e-10,
            atol: 1e-12,
            max_dt: 0.05,
            max_steps: 100_000,
        };
        let mut f = |_t: f64, y: &[f64; 1]| [-1.5 * y[0]];
        let (tf, yf) = dopri5(&mut f, 0.0, [1.0], 4.0, &opts, &mut |_, _, _| {}, &mut |_, _| false)
            .unwrap();
        assert_eq!(tf, 4.0);
        assert!((yf[0] - (-6.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn backwards_and_stop() {
        let opts = StepOpts {
            rtol: 1e-10,
            atol: 1e-12,
            max_dt: 0.02,
            max_steps: 100_000,
        };
        // Integrate y' = y backward from t=0, y=1; stop when y >= 2.
        let mut f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let mut nodes = Vec::new();
        let (tf, yf) = dopri5(
            &mut f,
            0.0,
            [1.0],
            -10.0,
            &opts,
            &mut |t, y, _| nodes.push((t, y[0])),
            &mut |_, y| y[0] >= 2.0,
        )
        .unwrap();
        assert!(yf[0] >= 2.0 && yf[0] < 2.1);
        assert!((tf - (-yf[0].ln())).abs() < 1e-9);
        assert!(nodes.len() > 10);
    }
}
