//! Adaptive Dormand–Prince 5(4) integrator for small real ODE systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e}) after {accepted} accepted / {rejected} rejected steps")]
    StepUnderflow {
        t: f64,
        h: f64,
        accepted: usize,
        rejected: usize,
    },
    #[error("exceeded {max_steps} steps at t = {t} of {t_end}")]
    TooManySteps {
        t: f64,
        t_end: f64,
        max_steps: usize,
    },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = f(t, y)` from `t = 0` to `t_end`, returning the final state.
pub fn integrate<F>(
    mut f: F,
    y0: &[f64],
    t_end: f64,
    tol: Tolerance,
) -> Result<(Vec<f64>, StepStats), OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut stats = StepStats::default();
    if t_end <= 0.0 {
        return Ok((y, stats));
    }

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).min(1e-2);
    f(t, &y, &mut k[0]);

    loop {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(OdeError::TooManySteps {
                t,
                t_end,
                max_steps: tol.max_steps,
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let stage = |coeffs: &[f64], k: &[Vec<f64>; 7], tmp: &mut [f64]| {
            for i in 0..n {
                let mut acc = 0.0;
                for (s, c) in coeffs.iter().enumerate() {
                    acc += c * k[s][i];
                }
                tmp[i] = y[i] + h * acc;
            }
        };
        stage(&[A21], &k, &mut tmp);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&[A31, A32], &k, &mut tmp);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&[A41, A42, A43], &k, &mut tmp);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&[A51, A52, A53, A54], &k, &mut tmp);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&[A61, A62, A63, A64, A65], &k, &mut tmp);
        f(t + h, &tmp, &mut k[5]);
        stage(&[B1, 0.0, B3, B4, B5, B6], &k, &mut y_new);
        f(t + h, &y_new, &mut k[6]);

        let mut err = 0.0f64;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(OdeError::NonFinite { t });
        }

        if err <= 1.0 {
            stats.accepted += 1;
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            if last {
                return Ok((y, stats));
            }
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * t_end.max(1.0) {
            return Err(OdeError::StepUnderflow {
                t,
                h,
                accepted: stats.accepted,
                rejected: stats.rejected,
            });
        }
    }
}
