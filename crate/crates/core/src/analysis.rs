//! Run-time search, `(N, T)` sweeps and log–log slope fits.

use rayon::prelude::*;

use crate::dynamics::{evolve, initial_ground_state, SimOptions};
use crate::error::{domain, Error, Result};
use crate::model::{ModelParams, Schedule};

pub const DEFAULT_P_TOL: f64 = 1e-3;
pub const DEFAULT_CEILING: f64 = (1u64 << 30) as f64;

/// Settings for [`find_runtime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindOptions {
    pub p_tol: f64,
    /// Largest run time tried while bracketing.
    pub ceiling: f64,
    /// Extra evaluations spread over the final doubling interval, used to
    /// locate the first crossing when `p(T)` is not monotone.
    pub scan_points: usize,
    pub sim: SimOptions,
}

impl Default for FindOptions {
    fn default() -> Self {
        FindOptions {
            p_tol: DEFAULT_P_TOL,
            ceiling: DEFAULT_CEILING,
            scan_points: 3,
            sim: SimOptions::default().with_samples(2),
        }
    }
}

impl FindOptions {
    pub fn with_p_tol(mut self, p_tol: f64) -> Self {
        self.p_tol = p_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_tol > 0.0 && self.p_tol < 1.0) {
            return domain(format!("p_tol must lie in (0, 1), got {}", self.p_tol));
        }
        if !(self.ceiling >= 1.0) || !self.ceiling.is_finite() {
            return domain(format!(
                "ceiling must be finite and >= 1, got {}",
                self.ceiling
            ));
        }
        self.sim.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeResult {
    pub n_items: u64,
    pub run_time: f64,
    pub p_achieved: f64,
    /// `(low, high)` with `p(low) < target ≤ p(high)` at the last step.
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

/// Final success probability after an evolution of length `run_time`,
/// starting in the ground state.
pub fn final_probability(params: &ModelParams, run_time: f64, sim: &SimOptions) -> Result<f64> {
    Ok(evolve(params, run_time, initial_ground_state(), sim)?.final_p())
}

/// Smallest run time, up to bisection accuracy, whose final success
/// probability reaches `p_target`.
///
/// Doubling from `T = 1` brackets the target; the last doubling interval is
/// scanned at `scan_points` interior points so that the earliest crossing
/// inside it is kept, then bisected (geometric midpoints) until
/// `p_target ≤ p ≤ p_target + p_tol`.
pub fn find_runtime(
    params: &ModelParams,
    p_target: f64,
    opts: &FindOptions,
) -> Result<RuntimeResult> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return domain(format!("p_target must lie in (0, 1), got {p_target}"));
    }
    opts.validate()?;
    let mut evaluations = 0;
    let mut eval = |t: f64| -> Result<f64> {
        evaluations += 1;
        final_probability(params, t, &opts.sim)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut p_hi = eval(hi)?;
    let mut best_p = p_hi;
    while p_hi < p_target {
        if hi >= opts.ceiling {
            return Err(Error::Bracket {
                ceiling: opts.ceiling,
                p_target,
                best_p,
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(opts.ceiling);
        p_hi = eval(hi)?;
        best_p = best_p.max(p_hi);
    }

    // earliest crossing among the scan points
    if opts.scan_points > 0 {
        let width = hi - lo;
        for k in 1..=opts.scan_points {
            let t = lo + width * k as f64 / (opts.scan_points + 1) as f64;
            let p = eval(t)?;
            if p >= p_target {
                hi = t;
                p_hi = p;
                break;
            }
            lo = t;
        }
    }

    // only the upper end is ever returned, so p_achieved >= p_target
    while p_hi - p_target > opts.p_tol {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        if !(mid > lo && mid < hi) {
            break;
        }
        let p = eval(mid)?;
        if p >= p_target {
            hi = mid;
            p_hi = p;
        } else {
            lo = mid;
        }
    }
    Ok(RuntimeResult {
        n_items: params.n_items,
        run_time: hi,
        p_achieved: p_hi,
        bracket: (lo, hi),
        evaluations,
    })
}

/// `n_min, 2·n_min, …, n_max`; both ends must be powers of two.
pub fn power_of_two_grid(n_min: u64, n_max: u64) -> Result<Vec<u64>> {
    if !n_min.is_power_of_two() || !n_max.is_power_of_two() || n_min < 2 || n_max < n_min {
        return domain(format!(
            "N grid needs powers of two with 2 <= n_min <= n_max, got {n_min}..{n_max}"
        ));
    }
    let mut out = vec![n_min];
    while *out.last().unwrap() < n_max {
        out.push(out.last().unwrap() * 2);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_items: u64,
    pub p_target: f64,
    pub omega: f64,
    pub sigma: f64,
    pub schedule: Schedule,
    pub outcome: Result<RuntimeResult>,
}

impl SweepRow {
    pub fn run_time(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.run_time)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// `(N, T)` for the rows that succeeded, in row order.
    pub fn points(&self) -> Vec<(u64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.run_time().map(|t| (r.n_items, t)))
            .collect()
    }
}

/// One [`find_runtime`] per entry of `n_list`, evaluated in parallel on the
/// current rayon pool. Failed rows keep their error.
pub fn sweep(
    n_list: &[u64],
    p_target: f64,
    base: &ModelParams,
    opts: &FindOptions,
) -> Result<SweepTable> {
    if n_list.is_empty() {
        return domain("empty N list");
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 2 {
        return domain("N list must be strictly increasing with every N >= 2");
    }
    opts.validate()?;
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let outcome = base
                .with_n(n)
                .and_then(|params| find_runtime(&params, p_target, opts));
            SweepRow {
                n_items: n,
                p_target,
                omega: base.omega(),
                sigma: base.sigma,
                schedule: base.schedule,
                outcome,
            }
        })
        .collect();
    Ok(SweepTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Smallest and largest `N` in the fit.
    pub window: (u64, u64),
    /// Root-mean-square residual in `log₂T`.
    pub residual: f64,
}

/// Least-squares fit of `log₂T` against `log₂N` over the largest-`N`
/// `window_fraction` of the successful rows.
pub fn fit_slope(table: &SweepTable, window_fraction: f64) -> Result<SlopeFit> {
    fit_log2(&table.points(), window_fraction)
}

/// Same as [`fit_slope`] for bare `(N, value)` pairs.
pub fn fit_log2(points: &[(u64, f64)], window_fraction: f64) -> Result<SlopeFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return domain(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        ));
    }
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    let take = ((pts.len() as f64 * window_fraction).ceil() as usize).min(pts.len());
    let window = &pts[pts.len() - take..];
    if window.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: window.len(),
        });
    }
    if window.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return domain("slope fit needs positive finite values");
    }
    let xs: Vec<f64> = window.iter().map(|p| (p.0 as f64).log2()).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1.log2()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return domain("slope fit needs at least two distinct N");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        window: (window[0].0, window[window.len() - 1].0),
        residual: (ss / m).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<(u64, f64)> {
        (4..=14)
            .map(|k| (1u64 << k, f((1u64 << k) as f64)))
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_log2(&synthetic(|n| 7.0 * n.powf(1.5)), 1.0).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-9);
        assert!((fit.intercept - 7f64.log2()).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn constant_runtime_has_zero_slope() {
        let fit = fit_log2(&synthetic(|_| 42.0), 0.5).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert_eq!(fit.window, (1 << 9, 1 << 14));
    }

    #[test]
    fn too_few_points() {
        let pts = synthetic(|n| n);
        assert!(matches!(
            fit_log2(&pts[..5], 0.4),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn grid_of_powers() {
        assert_eq!(power_of_two_grid(4, 32).unwrap(), vec![4, 8, 16, 32]);
        assert!(power_of_two_grid(3, 32).is_err());
        assert!(power_of_two_grid(64, 32).is_err());
    }

    #[test]
    fn runtime_round_trip() {
        let params = ModelParams::from_omega(16, 0.5, 1.0, Schedule::Global).unwrap();
        let opts = FindOptions::default();
        let p_ref = final_probability(&params, 37.0, &opts.sim).unwrap();
        let res = find_runtime(&params, p_ref, &opts).unwrap();
        let p = final_probability(&params, res.run_time, &opts.sim).unwrap();
        assert!((p - p_ref).abs() <= opts.p_tol);
        assert_eq!(p, res.p_achieved);
        assert!(res.bracket.0 < res.run_time && res.run_time <= res.bracket.1);
        let again = find_runtime(&params, p_ref, &opts).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn closed_case_matches_grid_scan() {
        let params = ModelParams::from_omega(4, 0.0, 1.0, Schedule::Global).unwrap();
        let opts = FindOptions::default();
        let res = find_runtime(&params, 0.9, &opts).unwrap();
        // first grid point whose p reaches the target
        let mut t = 0.0;
        let t_grid = loop {
            if final_probability(&params, t, &opts.sim).unwrap() >= 0.9 {
                break t;
            }
            t += 0.01;
        };
        let p_grid = final_probability(&params, t_grid, &opts.sim).unwrap();
        assert!(
            (p_grid - res.p_achieved).abs() <= 2.0 * opts.p_tol,
            "{t_grid} vs {}",
            res.run_time
        );
        assert!(
            (t_grid - res.run_time).abs() < 0.05 * t_grid,
            "{t_grid} vs {}",
            res.run_time
        );
    }

    #[test]
    fn unreachable_target_reports_bracket_failure() {
        let params = ModelParams::from_omega(16, 0.0, 1.0, Schedule::Global).unwrap();
        let opts = FindOptions {
            ceiling: 4.0,
            ..FindOptions::default()
        };
        assert!(matches!(
            find_runtime(&params, 0.99, &opts),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn sweep_rows_follow_input_order() {
        let base = ModelParams::from_omega(4, 0.0, 1.0, Schedule::Local).unwrap();
        let opts = FindOptions::default();
        let table = sweep(&[4, 8, 16, 32], 0.8, &base, &opts).unwrap();
        let ns: Vec<u64> = table.rows.iter().map(|r| r.n_items).collect();
        assert_eq!(ns, vec![4, 8, 16, 32]);
        let single = sweep(&[4], 0.8, &base, &opts).unwrap();
        assert_eq!(single.rows[0].outcome, find_runtime(&base, 0.8, &opts));
        assert!(sweep(&[8, 4], 0.8, &base, &opts).is_err());
    }

    #[test]
    fn failed_rows_do_not_abort() {
        let base = ModelParams::from_omega(4, 0.0, 1.0, Schedule::Global).unwrap();
        let opts = FindOptions {
            ceiling: 8.0,
            ..FindOptions::default()
        };
        let table = sweep(&[4, 1 << 12], 0.6, &base, &opts).unwrap();
        assert_eq!(table.failures(), 1);
        assert!(table.rows[1].outcome.is_err());
    }
}
