//! Time evolution of the reduced two-level state.
//!
//! The density matrix on the `{|ψ⟩, |ψ̄⟩}` plane is stored as its Bloch
//! vector `v` (`ρ = (1 + v·σ)/2`) in that fixed basis. With `q` the Bloch
//! vector of the instantaneous ground state and `λ` the Hamiltonian parameter
//! (`λ = s` globally, `λ = f(s)` locally), the master equation becomes
//!
//! ```text
//! dv/ds = T·A·Δ(λ)·(v × q(λ)) − T·B·Γ²(λ)·[v − q(λ)(q(λ)·v)]
//! ```
//!
//! The first term is a precession about `q`; the second damps the components
//! of `v` orthogonal to `q`.

use nalgebra::Vector3;

use crate::error::{domain, Result};
use crate::model::{pow_gap_sq, ModelParams, Schedule, SearchInstance};
use crate::ode::{self, StepControl};

/// Number of samples recorded when no other count is requested.
pub const DEFAULT_SAMPLE_COUNT: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub sample_count: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 500_000_000,
            sample_count: DEFAULT_SAMPLE_COUNT,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return domain(format!(
                "tolerances must be positive, got rel_tol={}, abs_tol={}",
                self.rel_tol, self.abs_tol
            ));
        }
        if self.sample_count < 2 {
            return domain(format!(
                "sample_count must be >= 2, got {}",
                self.sample_count
            ));
        }
        if self.max_steps == 0 {
            return domain("max_steps must be positive");
        }
        Ok(())
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub(crate) fn sample_grid(&self) -> Vec<f64> {
        let last = (self.sample_count - 1) as f64;
        (0..self.sample_count).map(|k| k as f64 / last).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub v: Vector3<f64>,
    /// Ground-state population `(1 + v·q)/2` of the instantaneous Hamiltonian.
    pub p: f64,
    /// Population difference `2p − 1`.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub run_time: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectories hold at least two samples")
    }

    /// Success probability at the end of the sweep.
    pub fn final_p(&self) -> f64 {
        self.last().p
    }

    /// `max_s |ρ₀₀(0) − ρ₀₀(s)|` over the recorded samples.
    pub fn max_deviation(&self) -> f64 {
        let p0 = self.samples[0].p;
        self.samples
            .iter()
            .map(|x| (x.p - p0).abs())
            .fold(0.0, f64::max)
    }

    fn from_states(
        params: ModelParams,
        run_time: f64,
        grid: &[f64],
        states: Vec<Vector3<f64>>,
    ) -> Self {
        let inst = params.instance();
        let samples = grid
            .iter()
            .zip(states)
            .map(|(&s, v)| {
                let lambda = inst.hamiltonian_parameter(s, params.schedule);
                let y = v.dot(&inst.ground_bloch(lambda));
                Sample {
                    s,
                    v,
                    p: clamp_probability((1.0 + y) / 2.0),
                    y,
                }
            })
            .collect();
        Trajectory {
            params,
            run_time,
            samples,
        }
    }
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `(1 + v·q(s))/2`, the population of the ground state of `H(s)`.
pub fn success_probability(v: &Vector3<f64>, s: f64, n: u64) -> Result<f64> {
    let q = crate::model::ground_bloch(s, n)?;
    Ok(clamp_probability((1.0 + v.dot(&q)) / 2.0))
}

/// Right-hand side of the Bloch equation in normalized time `s`.
///
/// The weights are taken as given, so a generator can be built with
/// coefficients that [`ModelParams`] would reject (used by the mutation
/// canary of the validation suite).
#[derive(Debug, Clone, Copy)]
pub struct BlochGenerator {
    inst: SearchInstance,
    sigma: f64,
    schedule: Schedule,
    /// `T·A`
    precession: f64,
    /// `T·B`
    damping: f64,
}

impl BlochGenerator {
    pub fn new(params: &ModelParams, run_time: f64) -> Self {
        Self::with_weights(params, run_time * params.coeff_a, run_time * params.coeff_b)
    }

    pub fn with_weights(params: &ModelParams, precession: f64, damping: f64) -> Self {
        BlochGenerator {
            inst: params.instance(),
            sigma: params.sigma,
            schedule: params.schedule,
            precession,
            damping,
        }
    }

    #[inline]
    pub fn rhs(&self, s: f64, v: &Vector3<f64>) -> Vector3<f64> {
        let lambda = self.inst.hamiltonian_parameter(s, self.schedule);
        self.rhs_at(lambda, 1.0, v)
    }

    /// Evaluates the generator at Hamiltonian parameter `lambda`, scaled by `speed`.
    #[inline]
    fn rhs_at(&self, lambda: f64, speed: f64, v: &Vector3<f64>) -> Vector3<f64> {
        let gap_sq = self.inst.gap_sq(lambda);
        let gap = gap_sq.sqrt();
        let q = self.inst.ground_bloch(lambda);
        let mut out = Vector3::zeros();
        if self.precession != 0.0 {
            out += v.cross(&q) * (speed * self.precession * gap);
        }
        if self.damping != 0.0 {
            let rate = speed * self.damping * pow_gap_sq(gap_sq, self.sigma);
            out -= (v - q * q.dot(v)) * rate;
        }
        out
    }

    /// Step ceiling: at most a quarter radian of precession per step.
    fn max_step(&self, lambda: f64, speed: f64) -> f64 {
        let rate = speed * self.precession.abs() * self.inst.gap(lambda);
        (0.25 / (1.0 + rate)).min(MAX_STEP)
    }
}

const MAX_STEP: f64 = 0.02;

fn check_inputs(run_time: f64, v0: &Vector3<f64>, opts: &SimOptions) -> Result<()> {
    if !(run_time >= 0.0) || !run_time.is_finite() {
        return domain(format!("run time must be finite and >= 0, got {run_time}"));
    }
    if !(v0.norm() <= 1.0 + 1e-12) {
        return domain(format!("initial Bloch vector has norm {} > 1", v0.norm()));
    }
    opts.validate()
}

fn step_control(run_time: f64, opts: &SimOptions) -> StepControl {
    StepControl {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: opts.max_steps,
        initial_step: 1e-4 / (1.0 + run_time),
    }
}

/// Integrates the Bloch equation over `s ∈ [0, 1]` with the adaptive
/// Dormand–Prince pair and samples `opts.sample_count` equally spaced points.
pub fn evolve(
    params: &ModelParams,
    run_time: f64,
    v0: Vector3<f64>,
    opts: &SimOptions,
) -> Result<Trajectory> {
    check_inputs(run_time, &v0, opts)?;
    evolve_with(
        &BlochGenerator::new(params, run_time),
        params,
        run_time,
        v0,
        opts,
    )
}

/// Like [`evolve`] but with an explicit generator.
pub fn evolve_with(
    generator: &BlochGenerator,
    params: &ModelParams,
    run_time: f64,
    v0: Vector3<f64>,
    opts: &SimOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    let grid = opts.sample_grid();
    let schedule = params.schedule;
    let inst = params.instance();
    let (states, _) = ode::integrate(
        |s, v: &Vector3<f64>, dv: &mut Vector3<f64>| *dv = generator.rhs(s, v),
        v0,
        0.0,
        1.0,
        &grid,
        &step_control(run_time, opts),
        |s| generator.max_step(inst.hamiltonian_parameter(s, schedule), 1.0),
    )?;
    Ok(Trajectory::from_states(*params, run_time, &grid, states))
}

/// Integrates the local schedule in the Hamiltonian parameter `r = f(s)`,
/// where the generator picks up the factor `df⁻¹/dr`. Samples are taken at
/// `r = f(s_k)` for the same equally spaced `s_k` as [`evolve`], so the two
/// trajectories are directly comparable.
pub fn evolve_local_reparametrized(
    params: &ModelParams,
    run_time: f64,
    v0: Vector3<f64>,
    opts: &SimOptions,
) -> Result<Trajectory> {
    check_inputs(run_time, &v0, opts)?;
    if params.schedule != Schedule::Local {
        return domain("reparametrized evolution requires the local schedule");
    }
    let generator = BlochGenerator::new(params, run_time);
    let inst = params.instance();
    let grid = opts.sample_grid();
    let r_grid: Vec<f64> = grid.iter().map(|&s| inst.local_schedule(s)).collect();
    let (states, _) = ode::integrate(
        |r, v: &Vector3<f64>, dv: &mut Vector3<f64>| {
            *dv = generator.rhs_at(r, inst.local_schedule_inverse_derivative(r), v)
        },
        v0,
        0.0,
        1.0,
        &r_grid,
        &step_control(run_time, opts),
        |r| generator.max_step(r, inst.local_schedule_inverse_derivative(r)),
    )?;
    Ok(Trajectory::from_states(*params, run_time, &grid, states))
}

/// First-order Cauchy–Euler polygon for the Bloch equation in `s`, with
/// `M = ⌈1/step⌉` uniform steps. The returned samples linearly interpolate
/// the polygon vertices on the default sample grid.
pub fn euler_polygon(
    params: &ModelParams,
    run_time: f64,
    v0: Vector3<f64>,
    step: f64,
) -> Result<Trajectory> {
    euler_polygon_sampled(params, run_time, v0, step, DEFAULT_SAMPLE_COUNT)
}

pub fn euler_polygon_sampled(
    params: &ModelParams,
    run_time: f64,
    v0: Vector3<f64>,
    step: f64,
    sample_count: usize,
) -> Result<Trajectory> {
    let opts = SimOptions::default().with_samples(sample_count);
    check_inputs(run_time, &v0, &opts)?;
    if !(step > 0.0 && step <= 1.0) {
        return domain(format!("polygon step must lie in (0, 1], got {step}"));
    }
    // ξ ≤ 1 in s for every σ ≥ 0, so Ds·T·B ≤ 1 keeps |1 − Ds·T·ξ| ≤ 1
    if params.is_wide_open() && step * run_time * params.coeff_b > 1.0 + 1e-12 {
        return domain(format!(
            "polygon step {step} violates the stability bound Ds <= 1/(T·B) = {}",
            1.0 / (run_time * params.coeff_b)
        ));
    }
    let segments = (1.0 / step - 1e-9).ceil().max(1.0) as usize;
    let ds = 1.0 / segments as f64;
    let generator = BlochGenerator::new(params, run_time);
    let grid = opts.sample_grid();

    let mut states = Vec::with_capacity(grid.len());
    let mut next = 0;
    let mut v = v0;
    for k in 0..segments {
        let s0 = k as f64 * ds;
        let s1 = if k + 1 == segments {
            1.0
        } else {
            (k + 1) as f64 * ds
        };
        let v_next = v + generator.rhs(s0, &v) * ds;
        while next < grid.len() && grid[next] <= s1 {
            let w = ((grid[next] - s0) / (s1 - s0)).clamp(0.0, 1.0);
            states.push(v * (1.0 - w) + v_next * w);
            next += 1;
        }
        v = v_next;
    }
    while next < grid.len() {
        states.push(v);
        next += 1;
    }
    Ok(Trajectory::from_states(*params, run_time, &grid, states))
}

/// Ground state of `H(0)`, i.e. `|ψ⟩`.
pub fn initial_ground_state() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, 1.0)
}
