//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 5(4)) for the
//! travelling-wave ODE. Works in either direction of the independent
//! variable; the caller observes every accepted step and may stop early.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Integrator tolerances and step limits.
#[derive(Debug, Clone, Copy)]
pub struct OdeOpts {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude.
    pub h_init: f64,
    /// Smallest allowed step magnitude; shrinking below it is an error.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-12,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

/// Observer verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Outcome of an integration run.
#[derive(Debug, Clone)]
pub struct OdeResult {
    pub t: f64,
    pub y: Vec<f64>,
    /// True if the observer requested the stop (rather than reaching
    /// `t_end`).
    pub stopped_by_observer: bool,
    pub steps: usize,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t_end` (either direction),
/// calling `observer` after each accepted step. Returns when `t_end` is
/// reached or the observer stops the run.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOpts,
    mut observer: O,
) -> Result<OdeResult>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]) -> Control,
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.h_init.min(opts.h_max).max(opts.h_min) * dir;
    let mut k = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut steps = 0usize;

    f(t, &y, &mut k[0]);
    while (t_end - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::NoConvergence(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        if math::abs(h) > math::abs(t_end - t) {
            h = t_end - t;
        }
        // stages 2..7
        for s in 0..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate().take(s + 1) {
                    acc += a * k[j][i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            f(t + h * stage_node(s), &ytmp, &mut k[s + 1]);
        }
        // 5th-order solution and embedded error
        let mut err = 0.0_f64;
        for i in 0..n {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for j in 0..7 {
                s5 += B5[j] * k[j][i];
                s4 += B4[j] * k[j][i];
            }
            y5[i] = y[i] + h * s5;
            let scale = opts.atol + opts.rtol * math::abs(y[i]).max(math::abs(y5[i]));
            let e = h * (s5 - s4) / scale;
            err += e * e;
        }
        let err = math::sqrt(err / n as f64);
        if !err.is_finite() || !y5.iter().all(|v| v.is_finite()) {
            // non-finite stage: shrink hard
            h *= 0.1;
            if math::abs(h) < opts.h_min {
                return Err(Error::BlowUp { time: t });
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            // FSAL property: k7 at the accepted point is k1 of the next step
            let k_last = k[6].clone();
            k[0].copy_from_slice(&k_last);
            steps += 1;
            if observer(t, &y) == Control::Stop {
                return Ok(OdeResult {
                    t,
                    y,
                    stopped_by_observer: true,
                    steps,
                });
            }
        }
        // PI-free classical step-size update with safety factor
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * math::pow(1.0 / err, 0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if math::abs(h) > opts.h_max {
            h = opts.h_max * dir;
        }
        if math::abs(h) < opts.h_min {
            return Err(Error::NoConvergence(format!(
                "step size underflow at t = {t}"
            )));
        }
    }
    Ok(OdeResult {
        t,
        y,
        stopped_by_observer: false,
        steps,
    })
}

#[inline]
fn stage_node(s: usize) -> f64 {
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    C[s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let r = integrate(
            |_t, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            5.0,
            &OdeOpts::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert!((r.y[0] - math::exp(-5.0)).abs() < 1e-9);
        assert!(!r.stopped_by_observer);
    }

    #[test]
    fn backward_integration() {
        // y' = y integrated from 0 back to -3 gives exp(-3)
        let r = integrate(
            |_t, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            -3.0,
            &OdeOpts::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert!((r.y[0] - math::exp(-3.0)).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let r = integrate(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            20.0 * core::f64::consts::PI,
            &OdeOpts::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        let energy = r.y[0] * r.y[0] + r.y[1] * r.y[1];
        assert!((energy - 1.0).abs() < 1e-7);
    }

    #[test]
    fn observer_stop() {
        let r = integrate(
            |_t, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            50.0,
            &OdeOpts::default(),
            |_t, y| {
                if y[0] > 10.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        assert!(r.stopped_by_observer);
        assert!(r.t < 3.0 && r.y[0] >= 10.0);
    }

    #[test]
    fn blow_up_reported() {
        // y' = y^2 from y(0) = 1 blows up at t = 1
        let res = integrate(
            |_t, y, dy| dy[0] = y[0] * y[0],
            0.0,
            &[1.0],
            2.0,
            &OdeOpts {
                max_steps: 100_000,
                ..OdeOpts::default()
            },
            |_, _| Control::Continue,
        );
        assert!(res.is_err());
    }
}
