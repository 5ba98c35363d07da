//! Density-matrix simulation on the full `N`-dimensional space.
//!
//! Used to check the two-level reduction: nothing here relies on the
//! `{|ψ⟩, |ψ̄⟩}` plane being invariant. The density matrix is split as
//! `ρ = X + iY` with `X` symmetric and `Y` antisymmetric, so that with real
//! `H` and `W`
//!
//! ```text
//! dX/ds =  T·A·[H, Y] − T·B·[W, [W, X]]
//! dY/ds = −T·A·[H, X] − T·B·[W, [W, Y]]
//! ```
//!
//! `W(s)` has eigenvalue `−Γ/2` on the ground state of `H` restricted to
//! `span{|ψ⟩, |μ⟩}`, `+Γ/2` on the excited state and `0` on the complement.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;

use crate::dynamics::SimOptions;
use crate::error::{domain, Result};
use crate::model::{ModelParams, SearchInstance};
use crate::ode::{self, StepControl};

/// Largest list length accepted by [`evolve_full`].
pub const MAX_FULL_N: u64 = 32;

/// Full density matrix in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub rho: DMatrix<Complex64>,
    pub marked_index: usize,
}

impl FullState {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `max |ρ − ρ†|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.rho.adjoint();
        self.rho
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part of `ρ`.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨μ|ρ|μ⟩`.
    pub fn marked_population(&self) -> f64 {
        self.rho[(self.marked_index, self.marked_index)].re
    }

    /// `⟨e|ρ|e⟩` for a real vector `e`.
    pub fn population(&self, e: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                acc += e[i] * self.rho[(i, j)].re * e[j];
            }
        }
        acc
    }

    /// Embeds a reduced Bloch vector given in the `{|ψ⟩, |ψ̄⟩}` basis.
    pub fn from_reduced_bloch(n_items: u64, v: &Vector3<f64>) -> Result<Self> {
        let basis = Basis::new(n_items)?;
        let n = basis.n;
        let (psi, bar) = (&basis.psi, &basis.psi_bar);
        // ρ = ½[(1+vz)|ψ⟩⟨ψ| + (1−vz)|ψ̄⟩⟨ψ̄| + (vx − i vy)|ψ⟩⟨ψ̄| + (vx + i vy)|ψ̄⟩⟨ψ|]
        let rho = DMatrix::from_fn(n, n, |i, j| {
            let re = (1.0 + v.z) * psi[i] * psi[j]
                + (1.0 - v.z) * bar[i] * bar[j]
                + v.x * (psi[i] * bar[j] + bar[i] * psi[j]);
            let im = -v.y * (psi[i] * bar[j] - bar[i] * psi[j]);
            Complex64::new(0.5 * re, 0.5 * im)
        });
        Ok(FullState {
            rho,
            marked_index: basis.marked,
        })
    }

    fn from_parts(x: &DMatrix<f64>, y: &DMatrix<f64>, marked_index: usize) -> Self {
        let rho = x.zip_map(y, Complex64::new);
        FullState { rho, marked_index }
    }
}

/// Observables recorded at one sample of a full simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSample {
    pub s: f64,
    /// Population of the ground state of `H` on the reduced plane.
    pub p: f64,
    pub marked_population: f64,
    /// Weight outside `span{|ψ⟩, |μ⟩}`.
    pub leakage: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct FullTrajectory {
    pub params: ModelParams,
    pub run_time: f64,
    pub samples: Vec<FullSample>,
    pub final_state: FullState,
}

impl FullTrajectory {
    pub fn final_p(&self) -> f64 {
        self.samples.last().map(|x| x.p).unwrap_or(f64::NAN)
    }

    pub fn max_leakage(&self) -> f64 {
        self.samples
            .iter()
            .map(|x| x.leakage.abs())
            .fold(0.0, f64::max)
    }
}

/// Real orthonormal vectors of the reduced plane, embedded in `R^N`.
struct Basis {
    n: usize,
    marked: usize,
    psi: DVector<f64>,
    psi_bar: DVector<f64>,
}

impl Basis {
    fn new(n_items: u64) -> Result<Self> {
        if !(2..=MAX_FULL_N).contains(&n_items) {
            return domain(format!(
                "full simulation needs 2 <= N <= {MAX_FULL_N}, got {n_items}"
            ));
        }
        let n = n_items as usize;
        let nf = n as f64;
        let marked = n - 1;
        let psi = DVector::from_element(n, 1.0 / nf.sqrt());
        let norm = (nf - 1.0).sqrt();
        let psi_bar = DVector::from_fn(n, |k, _| {
            let delta = if k == marked { nf.sqrt() } else { 0.0 };
            (delta - 1.0 / nf.sqrt()) / norm
        });
        Ok(Basis {
            n,
            marked,
            psi,
            psi_bar,
        })
    }

    fn embed(&self, c: nalgebra::Vector2<f64>) -> DVector<f64> {
        &self.psi * c.x + &self.psi_bar * c.y
    }

    /// `I − |ψ⟩⟨ψ| − |ψ̄⟩⟨ψ̄|`.
    fn complement_projector(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n)
            - &self.psi * self.psi.transpose()
            - &self.psi_bar * self.psi_bar.transpose()
    }
}

/// `H(λ)` and `W(λ)` on the full space.
fn operators(
    basis: &Basis,
    inst: &SearchInstance,
    lambda: f64,
    sigma: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = basis.n;
    let mut h = &basis.psi * basis.psi.transpose() * (-(1.0 - lambda));
    h[(basis.marked, basis.marked)] -= lambda;

    let e0 = basis.embed(inst.ground_eigenvector(lambda));
    let e1 = basis.embed(inst.excited_eigenvector(lambda));
    let half = 0.5 * inst.gamma(lambda, sigma);
    let w = (&e1 * e1.transpose() - &e0 * e0.transpose()) * half;
    debug_assert_eq!(w.nrows(), n);
    (h, w)
}

fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

fn split(state: &DVector<f64>, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = n * n;
    (
        DMatrix::from_column_slice(n, n, &state.as_slice()[..m]),
        DMatrix::from_column_slice(n, n, &state.as_slice()[m..]),
    )
}

/// Integrates the full master equation from `|ψ⟩⟨ψ|`.
pub fn evolve_full(
    params: &ModelParams,
    run_time: f64,
    opts: &SimOptions,
) -> Result<FullTrajectory> {
    evolve_full_from(params, run_time, &Vector3::new(0.0, 0.0, 1.0), opts)
}

/// Integrates the full master equation from the embedding of `v0`.
pub fn evolve_full_from(
    params: &ModelParams,
    run_time: f64,
    v0: &Vector3<f64>,
    opts: &SimOptions,
) -> Result<FullTrajectory> {
    if !(run_time >= 0.0) || !run_time.is_finite() {
        return domain(format!("run time must be finite and >= 0, got {run_time}"));
    }
    opts.validate()?;
    let basis = Basis::new(params.n_items)?;
    let start = FullState::from_reduced_bloch(params.n_items, v0)?;
    let inst = params.instance();
    let n = basis.n;
    let (ta, tb) = (run_time * params.coeff_a, run_time * params.coeff_b);

    let mut y0 = DVector::zeros(2 * n * n);
    for (k, z) in start.rho.iter().enumerate() {
        y0[k] = z.re;
        y0[n * n + k] = z.im;
    }

    let rhs = |s: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
        let lambda = inst.hamiltonian_parameter(s, params.schedule);
        let (h, w) = operators(&basis, &inst, lambda, params.sigma);
        let (x, im) = split(y, n);
        let dx = commutator(&h, &im) * ta - commutator(&w, &commutator(&w, &x)) * tb;
        let dim = commutator(&h, &x) * (-ta) - commutator(&w, &commutator(&w, &im)) * tb;
        let m = n * n;
        dy.as_mut_slice()[..m].copy_from_slice(dx.as_slice());
        dy.as_mut_slice()[m..].copy_from_slice(dim.as_slice());
    };
    let control = StepControl {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: opts.max_steps,
        initial_step: 1e-4 / (1.0 + run_time),
    };
    let grid = opts.sample_grid();
    let max_step = (0.25 / (1.0 + ta.abs() + tb.abs())).min(0.02);
    let (states, _) = ode::integrate(rhs, y0, 0.0, 1.0, &grid, &control, |_| max_step)?;

    let complement = basis.complement_projector();
    let samples = grid
        .iter()
        .zip(&states)
        .map(|(&s, y)| {
            let (x, im) = split(y, n);
            let state = FullState::from_parts(&x, &im, basis.marked);
            let lambda = inst.hamiltonian_parameter(s, params.schedule);
            let e0 = basis.embed(inst.ground_eigenvector(lambda));
            FullSample {
                s,
                p: state.population(&e0),
                marked_population: state.marked_population(),
                leakage: complement_weight(&complement, &x),
                trace_error: (state.trace() - Complex64::new(1.0, 0.0)).norm(),
                hermiticity_error: state.hermiticity_error(),
                min_eigenvalue: state.min_eigenvalue(),
            }
        })
        .collect();
    let (x, im) = split(states.last().expect("sample grid is never empty"), n);
    Ok(FullTrajectory {
        params: *params,
        run_time,
        samples,
        final_state: FullState::from_parts(&x, &im, basis.marked),
    })
}

/// `tr(P⊥ X P⊥) = Σ_ij (P⊥)_ij X_ij` for a projector `P⊥` and symmetric `X`.
fn complement_weight(projector: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    projector.iter().zip(x.iter()).map(|(p, v)| p * v).sum()
}

/// Weight of `state` outside `span{|ψ⟩, |μ⟩}`. The plane does not move with
/// `s`, so no schedule information is needed.
pub fn reduction_residual(state: &FullState) -> Result<f64> {
    let basis = Basis::new(state.dim() as u64)?;
    if state.marked_index != basis.marked {
        return domain(format!(
            "marked index {} does not match the oracle convention {}",
            state.marked_index, basis.marked
        ));
    }
    let x = state.rho.map(|z| z.re);
    Ok(complement_weight(&basis.complement_projector(), &x))
}
