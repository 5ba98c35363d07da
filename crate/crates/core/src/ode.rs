//! Dormand–Prince 5(4) integrator with PI step control and a fourth-order
//! continuous extension for sampling at fixed output points.

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};

/// A state vector the integrator can work on in place.
pub trait OdeState: Clone {
    fn components(&self) -> &[f64];
    fn components_mut(&mut self) -> &mut [f64];
}

impl OdeState for Vector3<f64> {
    fn components(&self) -> &[f64] {
        self.as_slice()
    }
    fn components_mut(&mut self) -> &mut [f64] {
        self.as_mut_slice()
    }
}

impl OdeState for DVector<f64> {
    fn components(&self) -> &[f64] {
        self.as_slice()
    }
    fn components_mut(&mut self) -> &mut [f64] {
        self.as_mut_slice()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
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

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const MAX_SHRINK: f64 = 5.0;
const MAX_GROWTH: f64 = 10.0;

fn combine<S: OdeState>(out: &mut S, base: &S, h: f64, terms: &[(f64, &S)]) {
    let dst = out.components_mut();
    dst.copy_from_slice(base.components());
    for &(coef, k) in terms {
        if coef == 0.0 {
            continue;
        }
        let c = h * coef;
        for (d, x) in dst.iter_mut().zip(k.components()) {
            *d += c * x;
        }
    }
}

/// Integrates `y' = rhs(s, y)` from `s_start` to `s_end` (`s_end > s_start`)
/// and returns the state at each of `outputs`, which must be sorted and lie
/// within `[s_start, s_end]`.
///
/// `max_step(s)` caps the step starting at `s`.
pub fn integrate<S, F, M>(
    mut rhs: F,
    y0: S,
    s_start: f64,
    s_end: f64,
    outputs: &[f64],
    control: &StepControl,
    max_step: M,
) -> Result<(Vec<S>, Stats)>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
    M: Fn(f64) -> f64,
{
    let mut stats = Stats::default();
    let mut results = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= s_start {
        results.push(y0.clone());
        next_out += 1;
    }
    if s_end <= s_start {
        while next_out < outputs.len() {
            results.push(y0.clone());
            next_out += 1;
        }
        return Ok((results, stats));
    }

    let mut y = y0;
    let mut s = s_start;
    let mut k1 = y.clone();
    let mut k2 = y.clone();
    let mut k3 = y.clone();
    let mut k4 = y.clone();
    let mut k5 = y.clone();
    let mut k6 = y.clone();
    let mut k7 = y.clone();
    let mut stage = y.clone();
    let mut y_new = y.clone();
    let mut dense = y.clone();

    rhs(s, &y, &mut k1);
    stats.rhs_evals += 1;

    let span = s_end - s_start;
    let mut h = control.initial_step.min(max_step(s)).min(span);
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(Error::Integration {
                reached_s: s,
                reason: format!("step budget of {} exhausted", control.max_steps),
            });
        }
        let cap = max_step(s);
        if h > cap {
            h = cap;
        }
        let mut finishing = false;
        if s + h >= s_end || s_end - (s + h) < 1e-12 * span {
            h = s_end - s;
            finishing = true;
        }
        if h <= 1e-15 * span.max(s.abs()) {
            return Err(Error::Integration {
                reached_s: s,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        combine(&mut stage, &y, h, &[(A21, &k1)]);
        rhs(s + C2 * h, &stage, &mut k2);
        combine(&mut stage, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(s + C3 * h, &stage, &mut k3);
        combine(&mut stage, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(s + C4 * h, &stage, &mut k4);
        combine(
            &mut stage,
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        );
        rhs(s + C5 * h, &stage, &mut k5);
        combine(
            &mut stage,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let s_next = if finishing { s_end } else { s + h };
        rhs(s_next, &stage, &mut k6);
        combine(
            &mut y_new,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        rhs(s_next, &y_new, &mut k7);
        stats.rhs_evals += 6;

        // scaled RMS norm of the embedded error estimate
        let mut acc = 0.0;
        let comps = y.components();
        let new_comps = y_new.components();
        let dim = comps.len();
        for i in 0..dim {
            let e = h
                * (E1 * k1.components()[i]
                    + E3 * k3.components()[i]
                    + E4 * k4.components()[i]
                    + E5 * k5.components()[i]
                    + E6 * k6.components()[i]
                    + E7 * k7.components()[i]);
            let scale = control.abs_tol + control.rel_tol * comps[i].abs().max(new_comps[i].abs());
            acc += (e / scale).powi(2);
        }
        let err = (acc / dim.max(1) as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                reached_s: s,
                reason: "non-finite error estimate".into(),
            });
        }

        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            stats.accepted += 1;
            // emit samples falling inside (s, s_next]
            while next_out < outputs.len() && outputs[next_out] <= s_next {
                let t = outputs[next_out];
                if t >= s_next {
                    results.push(y_new.clone());
                } else {
                    let theta = (t - s) / h;
                    let theta1 = 1.0 - theta;
                    let d = dense.components_mut();
                    let (y0c, y1c) = (y.components(), y_new.components());
                    for i in 0..dim {
                        let rc1 = y0c[i];
                        let rc2 = y1c[i] - y0c[i];
                        let rc3 = h * k1.components()[i] - rc2;
                        let rc4 = rc2 - h * k7.components()[i] - rc3;
                        let rc5 = h
                            * (D1 * k1.components()[i]
                                + D3 * k3.components()[i]
                                + D4 * k4.components()[i]
                                + D5 * k5.components()[i]
                                + D6 * k6.components()[i]
                                + D7 * k7.components()[i]);
                        d[i] = rc1 + theta * (rc2 + theta1 * (rc3 + theta * (rc4 + theta1 * rc5)));
                    }
                    results.push(dense.clone());
                }
                next_out += 1;
            }
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            s = s_next;
            if finishing {
                break;
            }
            let mut fac = fac11 / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / MAX_GROWTH, MAX_SHRINK);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(MAX_SHRINK);
            last_rejected = true;
        }
    }
    while next_out < outputs.len() {
        results.push(y.clone());
        next_out += 1;
    }
    Ok((results, stats))
}
