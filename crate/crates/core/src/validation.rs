//! Invariant suites shared by the test harness and `adia validate`.
//!
//! Every suite is deterministic: random draws come from a seeded ChaCha
//! stream.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{condition_integral, deviation_report};
use crate::dynamics::{evolve, evolve_with, BlochGenerator, SimOptions};
use crate::error::{domain, Result};
use crate::model::{ModelParams, Schedule, SearchInstance};
use crate::oracle::evolve_full;
use crate::quadrature::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    /// `‖v‖` never increases along a trajectory.
    Purity,
    /// `v_y` stays zero in the wide-open regime.
    Planarity,
    /// Monotonicity of projections onto rotated unit vectors.
    Lemma1,
    /// `v·q(s) ≥ q(0)·q(s)` for wide-open runs started in the ground state.
    Lemma3,
    /// Full-space simulation agrees with the two-level model.
    Oracle,
    /// Schedule round trips, coupling integral and condition integral.
    Schedule,
    /// Random draws of the deviation bounds.
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Purity,
        Suite::Planarity,
        Suite::Lemma1,
        Suite::Lemma3,
        Suite::Oracle,
        Suite::Schedule,
        Suite::Bounds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Purity => "purity",
            Suite::Planarity => "planarity",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma3 => "lemma3",
            Suite::Oracle => "oracle",
            Suite::Schedule => "schedule",
            Suite::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s))
            .map_or_else(|| domain(format!("unknown suite `{s}`")), Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    pub seed: u64,
    pub lemma1_draws: usize,
    pub bound_draws: usize,
    /// Flips the sign of the decoherence term in the purity suite. A correct
    /// build must then fail.
    pub flip_damping: bool,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            seed: 0x5eed,
            lemma1_draws: 10_000,
            bound_draws: 100,
            flip_damping: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checks: usize,
    pub failures: usize,
    /// Largest violation seen (positive means a failed check), or the
    /// smallest slack when everything passed.
    pub worst: f64,
    pub detail: String,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Running tally of `value ≤ limit` checks.
struct Tally {
    checks: usize,
    failures: usize,
    worst: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
            first_failure: None,
        }
    }

    /// Records `excess = value − limit`; the check fails when it is positive
    /// or not a number.
    fn record(&mut self, excess: f64, label: impl FnOnce() -> String) {
        self.checks += 1;
        let bad = !(excess <= 0.0);
        if bad {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(label());
            }
        }
        if excess.is_nan() || excess > self.worst {
            self.worst = if excess.is_nan() {
                f64::INFINITY
            } else {
                excess
            };
        }
    }

    fn error(&mut self, label: String) {
        self.record(f64::INFINITY, || label);
    }

    fn finish(self, suite: Suite) -> SuiteResult {
        SuiteResult {
            suite,
            checks: self.checks,
            failures: self.failures,
            worst: self.worst,
            detail: self.first_failure.unwrap_or_default(),
        }
    }
}

pub fn run(suites: &[Suite], cfg: &ValidationConfig) -> Vec<SuiteResult> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

pub fn run_suite(suite: Suite, cfg: &ValidationConfig) -> SuiteResult {
    let tally = match suite {
        Suite::Purity => purity(cfg),
        Suite::Planarity => planarity(cfg),
        Suite::Lemma1 => lemma1(cfg),
        Suite::Lemma3 => lemma3(),
        Suite::Oracle => oracle(),
        Suite::Schedule => schedule(),
        Suite::Bounds => bound_fuzz(cfg),
    };
    tally.finish(suite)
}

const PURITY_SLACK: f64 = 1e-9;
const PLANARITY_TOL: f64 = 1e-12;
const LEMMA_SLACK: f64 = 1e-9;

fn purity(cfg: &ValidationConfig) -> Tally {
    let mut tally = Tally::new();
    // the closed case conserves ‖v‖, so drift must stay below the slack
    let opts = SimOptions::default().with_tolerances(1e-12, 1e-14);
    let starts = [Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.3, 0.4, 0.5)];
    for n in [2, 16, 256] {
        for omega in [0.0, 0.5, 1.0] {
            for schedule in [Schedule::Global, Schedule::Local] {
                for sigma in [0.5, 1.0, 2.0] {
                    for t in [1.0, 10.0, 100.0] {
                        for v0 in starts {
                            let params = ModelParams::from_omega(n, omega, sigma, schedule)
                                .expect("valid grid");
                            let sign = if cfg.flip_damping { -1.0 } else { 1.0 };
                            let gen = BlochGenerator::with_weights(
                                &params,
                                t * params.coeff_a,
                                sign * t * params.coeff_b,
                            );
                            let label = || {
                                format!(
                                    "N={n} omega={omega} {schedule} sigma={sigma} T={t} v0={v0:?}"
                                )
                            };
                            match evolve_with(&gen, &params, t, v0, &opts) {
                                Ok(tr) => {
                                    let growth = tr
                                        .samples
                                        .windows(2)
                                        .map(|w| w[1].v.norm() - w[0].v.norm())
                                        .fold(f64::NEG_INFINITY, f64::max);
                                    tally.record(growth - PURITY_SLACK, label);
                                }
                                Err(e) => tally.error(format!("{}: {e}", label())),
                            }
                        }
                    }
                }
            }
        }
    }
    tally
}

fn planarity(cfg: &ValidationConfig) -> Tally {
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x91a7);
    let opts = SimOptions::default();
    for n in [2, 16, 256, 4096] {
        for schedule in [Schedule::Global, Schedule::Local] {
            for sigma in [0.5, 1.0, 2.0] {
                for t in [1.0, 100.0, 1e4] {
                    let params =
                        ModelParams::from_omega(n, 1.0, sigma, schedule).expect("valid grid");
                    let angle = rng.gen_range(0.0..2.0 * PI);
                    let radius: f64 = rng.gen_range(0.0..1.0);
                    let v0 = Vector3::new(radius * angle.cos(), 0.0, radius * angle.sin());
                    let label = || format!("N={n} {schedule} sigma={sigma} T={t}");
                    match evolve(&params, t, v0, &opts) {
                        Ok(tr) => {
                            let worst = tr.samples.iter().map(|x| x.v.y.abs()).fold(0.0, f64::max);
                            tally.record(worst - PLANARITY_TOL, label);
                        }
                        Err(e) => tally.error(format!("{}: {e}", label())),
                    }
                }
            }
        }
    }
    tally
}

/// Draws `(q₀, q′, q″, v)` with the angle from `q₀` to `q″` no smaller than
/// the angle to `q′` (both in `[0, π]`, same orientation) and checks that
/// `v·q′ ≥ q₀·q′` implies `v·q″ ≥ q₀·q″`.
fn lemma1(cfg: &ValidationConfig) -> Tally {
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1e1);
    let unit = |a: f64| Vector2::new(a.cos(), a.sin());
    let mut premises = 0;
    for k in 0..cfg.lemma1_draws {
        let base: f64 = rng.gen_range(0.0..2.0 * PI);
        let orient = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut a1: f64 = rng.gen_range(0.0..=PI);
        let mut a2: f64 = rng.gen_range(0.0..=PI);
        if a1 > a2 {
            std::mem::swap(&mut a1, &mut a2);
        }
        let r = rng.gen_range(0.0f64..=1.0).sqrt();
        let v = unit(rng.gen_range(0.0..2.0 * PI)) * r;
        let q0 = unit(base);
        let q1 = unit(base + orient * a1);
        let q2 = unit(base + orient * a2);
        if v.dot(&q1) >= q0.dot(&q1) {
            premises += 1;
            let excess = q0.dot(&q2) - v.dot(&q2) - 1e-12;
            tally.record(excess, || format!("draw {k}: a1={a1} a2={a2} v={v:?}"));
        }
    }
    if premises == 0 {
        tally.error("no draw satisfied the premise".into());
    }
    tally
}

fn lemma3() -> Tally {
    let mut tally = Tally::new();
    let opts = SimOptions::default();
    for n in [2, 16, 256] {
        let inst = SearchInstance::new(n).expect("valid N");
        for schedule in [Schedule::Global, Schedule::Local] {
            for sigma in [0.5, 1.0, 2.0] {
                for t in [0.0, 1.0, 10.0, 100.0, 1000.0] {
                    let params =
                        ModelParams::from_omega(n, 1.0, sigma, schedule).expect("valid grid");
                    let q0 = inst.ground_bloch(0.0);
                    let label = || format!("N={n} {schedule} sigma={sigma} T={t}");
                    match evolve(&params, t, q0, &opts) {
                        Ok(tr) => {
                            let worst = tr
                                .samples
                                .iter()
                                .map(|x| {
                                    let lambda = inst.hamiltonian_parameter(x.s, schedule);
                                    q0.dot(&inst.ground_bloch(lambda)) - x.y
                                })
                                .fold(f64::NEG_INFINITY, f64::max);
                            tally.record(worst - LEMMA_SLACK, label);
                        }
                        Err(e) => tally.error(format!("{}: {e}", label())),
                    }
                }
            }
        }
    }
    tally
}

fn oracle() -> Tally {
    let mut tally = Tally::new();
    let opts = SimOptions::default()
        .with_tolerances(1e-10, 1e-12)
        .with_samples(101);
    for n in [2, 4, 8] {
        for omega in [0.0, 0.5, 1.0] {
            for t in [1.0, 10.0, 100.0] {
                let params =
                    ModelParams::from_omega(n, omega, 1.0, Schedule::Global).expect("valid grid");
                let label = || format!("N={n} omega={omega} T={t}");
                let full = evolve_full(&params, t, &opts);
                let red = evolve(&params, t, Vector3::new(0.0, 0.0, 1.0), &opts);
                match (full, red) {
                    (Ok(full), Ok(red)) => {
                        for (a, b) in full.samples.iter().zip(&red.samples) {
                            tally.record((a.p - b.p).abs() - 1e-6, || {
                                format!("{} s={} p", label(), a.s)
                            });
                            tally.record(a.leakage.abs() - 1e-10, || {
                                format!("{} s={} leakage", label(), a.s)
                            });
                            tally.record(a.trace_error - 1e-10, || {
                                format!("{} s={} trace", label(), a.s)
                            });
                            tally.record(a.hermiticity_error - 1e-12, || {
                                format!("{} s={} hermiticity", label(), a.s)
                            });
                            tally.record(-a.min_eigenvalue - 1e-9, || {
                                format!("{} s={} positivity", label(), a.s)
                            });
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => tally.error(format!("{}: {e}", label())),
                }
            }
        }
    }
    tally
}

fn schedule() -> Tally {
    let mut tally = Tally::new();
    for k in [2u32, 6, 10, 14, 20] {
        let n = 1u64 << k;
        let inst = SearchInstance::new(n).expect("valid N");
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let r = inst.local_schedule(inst.local_schedule_inverse(x));
            let s = inst.local_schedule_inverse(inst.local_schedule(x));
            tally.record((r - x).abs().max((s - x).abs()) - 1e-12, || {
                format!("round trip N={n} x={x}")
            });
        }
        let tol = Tolerance::relative(1e-10);
        match quadrature::integrate_split(|s| inst.z_coupling(s), &[0.0, 0.5, 1.0], tol) {
            Ok(z) => tally.record(z - FRAC_PI_2, || format!("Z integral N={n} = {z}")),
            Err(e) => tally.error(format!("Z integral N={n}: {e}")),
        }
    }
    for k in 1..=20 {
        let n = 1u64 << k;
        match condition_integral(n, 0.5) {
            Ok(c) => tally.record(c - 2.0, || format!("condition integral N={n} = {c}")),
            Err(e) => tally.error(format!("condition integral N={n}: {e}")),
        }
    }
    tally
}

/// One random draw for the bound fuzz: regime, instance, run time and start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundDraw {
    pub params: ModelParams,
    pub run_time: f64,
    pub v0: Vector3<f64>,
}

/// `count` deterministic draws spread over the four bound regimes.
pub fn bound_draws(seed: u64, count: usize) -> Vec<BoundDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0);
    (0..count)
        .map(|k| {
            let n = 2f64.powf(rng.gen_range(2.0..=12.0)).round() as u64;
            let schedule = if k % 2 == 0 {
                Schedule::Global
            } else {
                Schedule::Local
            };
            let wide = k % 4 >= 2;
            let (omega, sigma) = match (wide, schedule) {
                (true, Schedule::Global) => (1.0, rng.gen_range(0.0..=2.0)),
                (true, Schedule::Local) => (1.0, rng.gen_range(1.0..=2.5)),
                (false, _) => (rng.gen_range(0.0..=0.9), rng.gen_range(0.0..=2.0)),
            };
            let run_time = 10f64.powf(rng.gen_range(0.0..=6.0));
            let dir = loop {
                let d = Vector3::new(
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                );
                let norm: f64 = d.norm();
                if norm > 1e-3 && norm <= 1.0 {
                    break d / norm;
                }
            };
            let v0 = dir * rng.gen_range(0.0f64..=1.0).cbrt();
            BoundDraw {
                params: ModelParams::from_omega(n, omega, sigma, schedule).expect("valid draw"),
                run_time,
                v0,
            }
        })
        .collect()
}

fn bound_fuzz(cfg: &ValidationConfig) -> Tally {
    let mut tally = Tally::new();
    let opts = SimOptions::default().with_samples(64);
    for (k, d) in bound_draws(cfg.seed, cfg.bound_draws).iter().enumerate() {
        let label = || {
            format!(
                "draw {k}: N={} omega={} sigma={} {} T={}",
                d.params.n_items,
                d.params.omega(),
                d.params.sigma,
                d.params.schedule,
                d.run_time
            )
        };
        match evolve(&d.params, d.run_time, d.v0, &opts)
            .and_then(|tr| deviation_report(&d.params, &tr))
        {
            Ok(rep) => tally.record(-rep.margin - 1e-9, label),
            Err(e) => tally.error(format!("{}: {e}", label())),
        }
    }
    tally
}
