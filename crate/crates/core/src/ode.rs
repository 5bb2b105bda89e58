//! Explicit Runge–Kutta integrators for complex linear systems `y' = f(t, y)`.
//!
//! [`dopri5`] is the Dormand–Prince 5(4) embedded pair with step-size control
//! and the fourth-order continuous extension for dense output. [`rk4_fixed`] is
//! the classical fixed-step scheme, kept as an independent convergence check.
//! Both integrate forward or backward in time.

use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Initial step magnitude; estimated from the right-hand side when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// `out = y + h Σ coeff_i k_i`.
fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

fn rms_norm(v: &[C64], scale: impl Fn(usize) -> f64) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().enumerate().map(|(i, z)| (z.norm() / scale(i)).powi(2)).sum::<f64>() / n).sqrt()
}

// Step control uses the worst component rather than the RMS so that every
// amplitude individually meets the requested tolerance.
fn max_norm(v: &[C64], scale: impl Fn(usize) -> f64) -> f64 {
    v.iter().enumerate().map(|(i, z)| z.norm() / scale(i)).fold(0.0, f64::max)
}

/// Dormand–Prince 5(4) from `t0` to `t1`, reporting the state at every time in
/// `outputs` through `on_output`.
///
/// `outputs` must be monotone in the direction of integration and lie inside
/// the interval. Returns the final state and step statistics.
pub fn dopri5<F, O>(
    mut rhs: F,
    t0: f64,
    y0: &[C64],
    t1: f64,
    outputs: &[f64],
    opts: &AdaptiveOptions,
    mut on_output: O,
) -> Result<(Vec<C64>, Stats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(f64, &[C64]),
{
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) || !(opts.max_step > 0.0) {
        return Err(Error::Tolerance("tolerances and max step must be positive".into()));
    }
    if opts.rel_tol < 10.0 * f64::EPSILON && opts.abs_tol < 1e-300 {
        return Err(Error::Tolerance("requested accuracy is below machine precision".into()));
    }
    let dim = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut stats = Stats::default();

    let mut next_out = 0;
    let emit_pending = |upto: f64, next_out: &mut usize, f: &mut dyn FnMut(f64)| {
        while *next_out < outputs.len() && dir * (outputs[*next_out] - upto) <= 0.0 {
            f(outputs[*next_out]);
            *next_out += 1;
        }
    };

    let mut y = y0.to_vec();
    if span == 0.0 {
        emit_pending(t0, &mut next_out, &mut |t| on_output(t, &y));
        return Ok((y, stats));
    }

    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut ys = k1.clone();
    let mut y1 = k1.clone();
    let mut err = k1.clone();
    let mut dense: [Vec<C64>; 5] = [k1.clone(), k1.clone(), k1.clone(), k1.clone(), k1.clone()];
    let mut buf = k1.clone();

    let mut t = t0;
    rhs(t, &y, &mut k1);
    stats.evaluations += 1;

    let scale_of = |y: &[C64], i: usize| opts.abs_tol + opts.rel_tol * y[i].norm();
    let mut h = match opts.initial_step {
        Some(h) => h.abs().min(opts.max_step).min(span),
        None => {
            // Hairer's starting-step heuristic
            let d0 = rms_norm(&y, |i| scale_of(&y, i));
            let d1 = rms_norm(&k1, |i| scale_of(&y, i));
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            let h0 = h0.min(opts.max_step).min(span);
            combine(&mut ys, &y, dir * h0, &[(1.0, &k1)]);
            rhs(t + dir * h0, &ys, &mut k2);
            stats.evaluations += 1;
            for i in 0..dim {
                err[i] = k2[i] - k1[i];
            }
            let d2 = rms_norm(&err, |i| scale_of(&y, i)) / h0;
            let h1 = if d1.max(d2) <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            };
            (100.0 * h0).min(h1).min(opts.max_step).min(span)
        }
    };

    emit_pending(t0, &mut next_out, &mut |tt| on_output(tt, &y));

    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Tolerance("maximum number of steps exceeded".into()));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { time: t });
        }
        let remaining = (t1 - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;

        combine(&mut ys, &y, hs, &[(A21, &k1)]);
        rhs(t + C2 * hs, &ys, &mut k2);
        combine(&mut ys, &y, hs, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * hs, &ys, &mut k3);
        combine(&mut ys, &y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * hs, &ys, &mut k4);
        combine(&mut ys, &y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * hs, &ys, &mut k5);
        combine(&mut ys, &y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { t1 } else { t + hs };
        rhs(t_new, &ys, &mut k6);
        combine(&mut y1, &y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        rhs(t_new, &y1, &mut k7);
        stats.evaluations += 6;

        for i in 0..dim {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
        }
        let e = max_norm(&err, |i| opts.abs_tol + opts.rel_tol * y[i].norm().max(y1[i].norm()));
        if !e.is_finite() {
            return Err(Error::Tolerance(alloc::format!("non-finite error estimate at t = {t}")));
        }

        let fac11 = e.powf(expo1);
        if e <= 1.0 {
            // continuous extension on [t, t_new]
            for i in 0..dim {
                let ydiff = y1[i] - y[i];
                let bspl = k1[i] * hs - ydiff;
                dense[0][i] = y[i];
                dense[1][i] = ydiff;
                dense[2][i] = bspl;
                dense[3][i] = ydiff - k7[i] * hs - bspl;
                dense[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * hs;
            }
            emit_pending(t_new, &mut next_out, &mut |tt| {
                let theta = (tt - t) / hs;
                let s1 = 1.0 - theta;
                for i in 0..dim {
                    buf[i] = dense[0][i]
                        + (dense[1][i] + (dense[2][i] + (dense[3][i] + dense[4][i] * s1) * theta) * s1) * theta;
                }
                on_output(tt, &buf);
            });

            stats.accepted += 1;
            core::mem::swap(&mut y, &mut y1);
            core::mem::swap(&mut k1, &mut k7);
            t = t_new;
            if last {
                break;
            }
            let fac = (fac11 / fac_old.powf(beta) / 0.9).clamp(0.2, 10.0);
            fac_old = e.max(1e-4);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            h = h_new.min(opts.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / 0.9).min(5.0);
            last_rejected = true;
        }
    }
    Ok((y, stats))
}

/// Classical fourth-order Runge–Kutta with `steps` equal steps from `t0` to `t1`.
pub fn rk4_fixed<F>(mut rhs: F, t0: f64, y0: &[C64], t1: f64, steps: usize) -> Vec<C64>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let dim = y0.len();
    let h = (t1 - t0) / steps.max(1) as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut ys = k1.clone();
    for s in 0..steps.max(1) {
        let t = t0 + h * s as f64;
        rhs(t, &y, &mut k1);
        combine(&mut ys, &y, 0.5 * h, &[(1.0, &k1)]);
        rhs(t + 0.5 * h, &ys, &mut k2);
        combine(&mut ys, &y, 0.5 * h, &[(1.0, &k2)]);
        rhs(t + 0.5 * h, &ys, &mut k3);
        combine(&mut ys, &y, h, &[(1.0, &k3)]);
        rhs(t + h, &ys, &mut k4);
        let y_prev = y.clone();
        combine(&mut y, &y_prev, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
    }
    y
}
