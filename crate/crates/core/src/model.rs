//! Closed-form quantities of the two-level search problem.
//!
//! The `N`-item search Hamiltonian `H(s) = -(1-s)|ψ⟩⟨ψ| - s|μ⟩⟨μ|` leaves
//! the plane spanned by the uniform superposition `|ψ⟩` and the marked state
//! `|μ⟩` invariant. Everything in this module is expressed in the orthonormal
//! basis `{|ψ⟩, |ψ̄⟩}` of that plane, with `|ψ̄⟩ ∝ √N|μ⟩ - |ψ⟩`.
//!
//! All lengths `N` are stored as integers but evaluated in floating point;
//! expressions use the `(2s-1)` form so that `N` up to `2^24` and beyond stay
//! well conditioned.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{domain, Result};
use crate::quadrature::{self, Tolerance};

/// How the interpolation parameter of `H` advances with normalized time `s = t/T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    /// `H(s)`: linear sweep.
    Global,
    /// `H(f(s))`: slows down near the minimum gap so that `df⁻¹/dr ∝ Δ⁻²`.
    Local,
}

impl Schedule {
    pub fn as_str(self) -> &'static str {
        match self {
            Schedule::Global => "global",
            Schedule::Local => "local",
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Schedule {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(Schedule::Global),
            "local" => Ok(Schedule::Local),
            other => domain(format!("unknown schedule `{other}`")),
        }
    }
}

/// A complete problem instance: `dρ/dt = -iA[H,ρ] - B[W,[W,ρ]]` with
/// `W` diagonal in the eigenbasis of `H` and eigenvalue gap `Γ = Δ^σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_items: u64,
    pub sigma: f64,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub schedule: Schedule,
}

impl ModelParams {
    pub fn new(
        n_items: u64,
        sigma: f64,
        coeff_a: f64,
        coeff_b: f64,
        schedule: Schedule,
    ) -> Result<Self> {
        check_n(n_items)?;
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return domain(format!("sigma must be a finite value >= 0, got {sigma}"));
        }
        if !(coeff_a >= 0.0 && coeff_b >= 0.0) || !coeff_a.is_finite() || !coeff_b.is_finite() {
            return domain(format!(
                "A and B must be finite and >= 0, got A={coeff_a}, B={coeff_b}"
            ));
        }
        if coeff_a == 0.0 && coeff_b == 0.0 {
            return domain("A and B cannot both vanish");
        }
        Ok(ModelParams {
            n_items,
            sigma,
            coeff_a,
            coeff_b,
            schedule,
        })
    }

    /// Builds the instance with `A = cos(ωπ/2)`, `B = sin(ωπ/2)`.
    pub fn from_omega(n_items: u64, omega: f64, sigma: f64, schedule: Schedule) -> Result<Self> {
        let (a, b) = coefficients(omega)?;
        Self::new(n_items, sigma, a, b, schedule)
    }

    pub fn with_n(&self, n_items: u64) -> Result<Self> {
        Self::new(
            n_items,
            self.sigma,
            self.coeff_a,
            self.coeff_b,
            self.schedule,
        )
    }

    pub fn is_wide_open(&self) -> bool {
        self.coeff_a == 0.0
    }

    pub fn is_closed(&self) -> bool {
        self.coeff_b == 0.0
    }

    /// The degree of openness `ω` with `(A, B) ∝ (cos(ωπ/2), sin(ωπ/2))`.
    pub fn omega(&self) -> f64 {
        self.coeff_b.atan2(self.coeff_a) / FRAC_PI_2
    }

    pub fn instance(&self) -> SearchInstance {
        SearchInstance::from_validated(self.n_items)
    }
}

/// Energies at one point of the sweep, in units of the initial gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub d_helper: f64,
}

/// Precomputed constants for a fixed list length; all methods are
/// infallible and expect `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchInstance {
    n: f64,
    root: f64,
    atan_root: f64,
}

impl SearchInstance {
    pub fn new(n_items: u64) -> Result<Self> {
        check_n(n_items)?;
        Ok(Self::from_validated(n_items))
    }

    fn from_validated(n_items: u64) -> Self {
        let n = n_items as f64;
        let root = (n - 1.0).sqrt();
        SearchInstance {
            n,
            root,
            atan_root: root.atan(),
        }
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// `√(N-1)`.
    pub fn root(&self) -> f64 {
        self.root
    }

    /// `Δ²(s) = (1 + (N-1)(2s-1)²)/N`.
    #[inline]
    pub fn gap_sq(&self, s: f64) -> f64 {
        let u = 2.0 * s - 1.0;
        (1.0 + (self.n - 1.0) * u * u) / self.n
    }

    #[inline]
    pub fn gap(&self, s: f64) -> f64 {
        self.gap_sq(s).sqrt()
    }

    /// `D(s) = -1 + 2s(N-1)/N`.
    #[inline]
    pub fn d_helper(&self, s: f64) -> f64 {
        -1.0 + 2.0 * s * (self.n - 1.0) / self.n
    }

    pub fn spectrum(&self, s: f64) -> Spectrum {
        let gap = self.gap(s);
        Spectrum {
            e0: -0.5 - 0.5 * gap,
            e1: -0.5 + 0.5 * gap,
            gap,
            d_helper: self.d_helper(s),
        }
    }

    /// Restriction of `H(s)` to the `{|ψ⟩, |ψ̄⟩}` plane.
    pub fn hamiltonian_matrix(&self, s: f64) -> Matrix2<f64> {
        let diag = s * (self.n - 1.0) / self.n;
        let off = -s * self.root / self.n;
        Matrix2::new(diag - 1.0, off, off, -diag)
    }

    /// `Δ(s) - D(s)`, evaluated without cancellation when `D > 0`.
    fn gap_minus_d(&self, s: f64) -> f64 {
        let gap = self.gap(s);
        let d = self.d_helper(s);
        if d > 0.0 {
            4.0 * s * s * (self.n - 1.0) / (self.n * self.n * (gap + d))
        } else {
            gap - d
        }
    }

    /// Ground eigenvector of [`Self::hamiltonian_matrix`], phase fixed so that
    /// the `|ψ⟩` component is positive.
    pub fn ground_eigenvector(&self, s: f64) -> Vector2<f64> {
        let gap = self.gap(s);
        let first = (0.5 * self.gap_minus_d(s) / gap).sqrt();
        let second = s * self.root / (self.n * gap * first);
        Vector2::new(first, second)
    }

    /// First excited eigenvector, with non-negative `|ψ⟩` component.
    pub fn excited_eigenvector(&self, s: f64) -> Vector2<f64> {
        let g = self.ground_eigenvector(s);
        Vector2::new(g.y, -g.x)
    }

    /// Bloch vector of the instantaneous ground state; it stays in the x–z plane.
    #[inline]
    pub fn ground_bloch(&self, s: f64) -> Vector3<f64> {
        let gap = self.gap(s);
        Vector3::new(
            2.0 * s * self.root / self.n / gap,
            0.0,
            (1.0 - 2.0 * s * (self.n - 1.0) / self.n) / gap,
        )
    }

    /// `cos θ(s) = q(s)·q(0)`.
    pub fn cos_theta(&self, s: f64) -> f64 {
        self.ground_bloch(s).z
    }

    /// `|Z₀₁(s)|`, the non-adiabatic coupling between the two levels.
    #[inline]
    pub fn z_coupling(&self, s: f64) -> f64 {
        let u = 2.0 * s - 1.0;
        self.root / (1.0 + (self.n - 1.0) * u * u)
    }

    /// `Γ(s) = Δ(s)^σ`.
    pub fn gamma(&self, s: f64, sigma: f64) -> f64 {
        self.gap(s).powf(sigma)
    }

    /// `Γ²(s) = Δ(s)^{2σ}`, with fast paths for the common exponents.
    #[inline]
    pub fn gamma_sq(&self, s: f64, sigma: f64) -> f64 {
        pow_gap_sq(self.gap_sq(s), sigma)
    }

    /// `L = ∫₀¹ Δ⁻² = N arctan(√(N-1))/√(N-1)`.
    pub fn schedule_norm(&self) -> f64 {
        self.n * self.atan_root / self.root
    }

    /// `f(s)`, the local schedule.
    #[inline]
    pub fn local_schedule(&self, s: f64) -> f64 {
        if s > 0.5 {
            return 1.0 - self.local_schedule(1.0 - s);
        }
        // tan(a − w) expanded so that f(0) = 0 holds without cancellation
        let t = (2.0 * s * self.atan_root).tan();
        (self.n * t / (2.0 * self.root * (1.0 + self.root * t))).clamp(0.0, 0.5)
    }

    /// `f⁻¹(r) = (1/L)∫₀ʳ Δ⁻²`.
    pub fn local_schedule_inverse(&self, r: f64) -> f64 {
        if r > 0.5 {
            return 1.0 - self.local_schedule_inverse(1.0 - r);
        }
        // arctan(x) + arctan(c) = arctan((x + c)/(1 − xc)) for xc ≤ 0
        let num = 2.0 * r * self.root;
        let den = 1.0 + (self.n - 1.0) * (1.0 - 2.0 * r);
        ((num / den).atan() / (2.0 * self.atan_root)).clamp(0.0, 0.5)
    }

    /// `df⁻¹/dr = 1/(L Δ²(r))`.
    #[inline]
    pub fn local_schedule_inverse_derivative(&self, r: f64) -> f64 {
        1.0 / (self.schedule_norm() * self.gap_sq(r))
    }

    /// `df/ds = L Δ²(f(s))`.
    #[inline]
    pub fn local_schedule_derivative(&self, s: f64) -> f64 {
        self.schedule_norm() * self.gap_sq(self.local_schedule(s))
    }

    /// Maps normalized time to the Hamiltonian parameter for a schedule.
    #[inline]
    pub fn hamiltonian_parameter(&self, s: f64, schedule: Schedule) -> f64 {
        match schedule {
            Schedule::Global => s,
            Schedule::Local => self.local_schedule(s),
        }
    }

    /// `κ(x) = 1/2 + x/(2√(N-1))`.
    pub fn kappa(&self, x: f64) -> f64 {
        0.5 + x / (2.0 * self.root)
    }
}

/// `(Δ²)^σ` with exact fast paths for `σ ∈ {0, 1/2, 1, 2}`.
#[inline]
pub(crate) fn pow_gap_sq(gap_sq: f64, sigma: f64) -> f64 {
    if sigma == 1.0 {
        gap_sq
    } else if sigma == 0.0 {
        1.0
    } else if sigma == 2.0 {
        gap_sq * gap_sq
    } else if sigma == 0.5 {
        gap_sq.sqrt()
    } else {
        gap_sq.powf(sigma)
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return domain(format!("list length must be >= 2, got {n}"));
    }
    Ok(())
}

fn check_unit(name: &str, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("{name} must lie in [0, 1], got {s}"));
    }
    Ok(())
}

fn checked(s: f64, n: u64) -> Result<SearchInstance> {
    check_unit("s", s)?;
    SearchInstance::new(n)
}

pub fn gap(s: f64, n: u64) -> Result<f64> {
    Ok(checked(s, n)?.gap(s))
}

pub fn spectrum(s: f64, n: u64) -> Result<Spectrum> {
    Ok(checked(s, n)?.spectrum(s))
}

pub fn ground_bloch(s: f64, n: u64) -> Result<Vector3<f64>> {
    Ok(checked(s, n)?.ground_bloch(s))
}

pub fn z_coupling(s: f64, n: u64) -> Result<f64> {
    Ok(checked(s, n)?.z_coupling(s))
}

pub fn gamma(s: f64, n: u64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return domain(format!("sigma must be >= 0, got {sigma}"));
    }
    Ok(checked(s, n)?.gamma(s, sigma))
}

pub fn hamiltonian_matrix(s: f64, n: u64) -> Result<Matrix2<f64>> {
    Ok(checked(s, n)?.hamiltonian_matrix(s))
}

pub fn local_schedule(s: f64, n: u64) -> Result<f64> {
    Ok(checked(s, n)?.local_schedule(s))
}

pub fn local_schedule_inverse(r: f64, n: u64) -> Result<f64> {
    check_unit("r", r)?;
    Ok(SearchInstance::new(n)?.local_schedule_inverse(r))
}

pub fn schedule_norm(n: u64) -> Result<f64> {
    Ok(SearchInstance::new(n)?.schedule_norm())
}

/// `(A, B) = (cos(ωπ/2), sin(ωπ/2))`.
pub fn coefficients(omega: f64) -> Result<(f64, f64)> {
    check_unit("omega", omega)?;
    // exact endpoints so that ω = 1 is truly wide-open and ω = 0 truly closed
    if omega == 0.0 {
        return Ok((1.0, 0.0));
    }
    if omega == 1.0 {
        return Ok((0.0, 1.0));
    }
    let angle = omega * FRAC_PI_2;
    Ok((angle.cos(), angle.sin()))
}

const QUAD_TOL: f64 = 1e-10;

fn quad_to(s: f64, integrand: impl FnMut(f64) -> f64) -> Result<f64> {
    // split at the gap minimum, where the integrands have their narrow feature
    let points: &[f64] = if s > 0.5 { &[0.0, 0.5, s] } else { &[0.0, s] };
    quadrature::integrate_split(integrand, points, Tolerance::relative(QUAD_TOL))
}

/// `Q(s) = ∫₀ˢ Γ²` for the global schedule, or
/// `Q̃(r) = (1/L)∫₀ʳ Γ²/Δ²` for the local one.
pub fn quadrature_q(s: f64, n: u64, sigma: f64, schedule: Schedule) -> Result<f64> {
    let inst = checked(s, n)?;
    if !(sigma >= 0.0) {
        return domain(format!("sigma must be >= 0, got {sigma}"));
    }
    match schedule {
        Schedule::Global => quad_to(s, |x| inst.gamma_sq(x, sigma)),
        Schedule::Local => {
            let norm = inst.schedule_norm();
            Ok(quad_to(s, |x| pow_gap_sq(inst.gap_sq(x), sigma - 1.0))? / norm)
        }
    }
}

/// `R(s) = ∫₀ˢ Δ`.
pub fn quadrature_r(s: f64, n: u64) -> Result<f64> {
    let inst = checked(s, n)?;
    quad_to(s, |x| inst.gap(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gap_examples() {
        assert_relative_eq!(gap(0.0, 64).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(gap(1.0, 64).unwrap(), 1.0, epsilon = 1e-15);
        for n in [2u64, 16, 1000, 1 << 24] {
            assert_relative_eq!(
                gap(0.5, n).unwrap(),
                1.0 / (n as f64).sqrt(),
                max_relative = 1e-14
            );
        }
        assert!(gap(1.2, 4).is_err());
        assert!(gap(0.5, 1).is_err());
        assert!(gap(-0.1, 4).is_err());
    }

    #[test]
    fn spectrum_matches_matrix_eigenvalues() {
        let inst = SearchInstance::new(37).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let m = inst.hamiltonian_matrix(s);
            let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            let sp = inst.spectrum(s);
            assert_relative_eq!(eig[0], sp.e0, epsilon = 1e-13);
            assert_relative_eq!(eig[1], sp.e1, epsilon = 1e-13);
            assert_relative_eq!(sp.e1 - sp.e0, sp.gap, epsilon = 1e-15);
        }
        assert_eq!(
            hamiltonian_matrix(0.0, 9).unwrap(),
            Matrix2::new(-1.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn eigenvectors() {
        let n = 64u64;
        let inst = SearchInstance::new(n).unwrap();
        let g = inst.ground_eigenvector(1.0);
        assert_relative_eq!(g.x, 1.0 / (n as f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(g.y, ((n as f64 - 1.0) / n as f64).sqrt(), epsilon = 1e-14);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let m = inst.hamiltonian_matrix(s);
            let g = inst.ground_eigenvector(s);
            let e = inst.excited_eigenvector(s);
            let sp = inst.spectrum(s);
            assert!((m * g - g * sp.e0).norm() < 1e-13);
            assert!((m * e - e * sp.e1).norm() < 1e-13);
            assert_relative_eq!(g.norm(), 1.0, epsilon = 1e-14);
            assert!(g.x > 0.0);
            // Bloch vector of the ground eigenvector
            let q = inst.ground_bloch(s);
            assert_relative_eq!(2.0 * g.x * g.y, q.x, epsilon = 1e-13);
            assert_relative_eq!(g.x * g.x - g.y * g.y, q.z, epsilon = 1e-13);
        }
    }

    #[test]
    fn ground_bloch_examples() {
        for n in [2u64, 7, 1024] {
            let nf = n as f64;
            let q0 = ground_bloch(0.0, n).unwrap();
            assert_eq!(q0, Vector3::new(0.0, 0.0, 1.0));
            let q1 = ground_bloch(1.0, n).unwrap();
            assert_relative_eq!(q1.dot(&q0), 2.0 / nf - 1.0, epsilon = 1e-14);
            let qh = ground_bloch(0.5, n).unwrap();
            assert_relative_eq!(qh.x, ((nf - 1.0) / nf).sqrt(), epsilon = 1e-14);
            assert_relative_eq!(qh.z, 1.0 / nf.sqrt(), epsilon = 1e-14);
        }
    }

    #[test]
    fn z_coupling_examples() {
        for n in [2u64, 16, 1024] {
            let nf = n as f64;
            assert_relative_eq!(
                z_coupling(0.5, n).unwrap(),
                (nf - 1.0).sqrt(),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                z_coupling(0.0, n).unwrap(),
                (nf - 1.0).sqrt() / nf,
                epsilon = 1e-15
            );
            let inst = SearchInstance::new(n).unwrap();
            let integral =
                quadrature::integrate(|s| inst.z_coupling(s), 0.0, 1.0, Tolerance::relative(1e-12))
                    .unwrap();
            assert!(integral <= FRAC_PI_2);
        }
    }

    #[test]
    fn gamma_examples() {
        let inst = SearchInstance::new(50).unwrap();
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            assert_relative_eq!(gamma(s, 50, 1.0).unwrap(), inst.gap(s), epsilon = 1e-15);
            assert_eq!(gamma(s, 50, 0.0).unwrap(), 1.0);
        }
        assert_relative_eq!(gamma(0.5, 50, 2.0).unwrap(), 1.0 / 50.0, epsilon = 1e-15);
        assert!(gamma(0.5, 50, -1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        for n in [2u64, 64, 1 << 20] {
            assert_eq!(local_schedule_inverse(0.0, n).unwrap(), 0.0);
            assert_relative_eq!(
                local_schedule_inverse(1.0, n).unwrap(),
                1.0,
                epsilon = 1e-15
            );
            assert_relative_eq!(
                local_schedule_inverse(0.5, n).unwrap(),
                0.5,
                epsilon = 1e-15
            );
            assert_relative_eq!(local_schedule(0.0, n).unwrap(), 0.0, epsilon = 1e-15);
            assert_relative_eq!(local_schedule(1.0, n).unwrap(), 1.0, epsilon = 1e-15);
            assert_relative_eq!(local_schedule(0.5, n).unwrap(), 0.5, epsilon = 1e-15);
        }
        assert!(local_schedule(1.5, 4).is_err());
        assert!(local_schedule_inverse(-0.5, 4).is_err());
    }

    #[test]
    fn schedule_round_trip() {
        let inst = SearchInstance::new(64).unwrap();
        for k in 0..=100 {
            let r = k as f64 / 100.0;
            assert!((inst.local_schedule(inst.local_schedule_inverse(r)) - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn schedule_inverse_matches_quadrature() {
        let n = 256u64;
        let inst = SearchInstance::new(n).unwrap();
        let norm = quadrature::integrate(
            |r| 1.0 / inst.gap_sq(r),
            0.0,
            1.0,
            Tolerance::relative(1e-13),
        )
        .unwrap();
        for k in 1..=9 {
            let r = k as f64 / 10.0;
            let q =
                quadrature::integrate(|x| 1.0 / inst.gap_sq(x), 0.0, r, Tolerance::relative(1e-13))
                    .unwrap();
            assert!((q / norm - inst.local_schedule_inverse(r)).abs() < 1e-10);
        }
    }

    #[test]
    fn schedule_norm_examples() {
        assert_relative_eq!(schedule_norm(2).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        for n in [2u64, 64, 4096] {
            let nf = n as f64;
            assert!(schedule_norm(n).unwrap() <= FRAC_PI_2 * nf / (nf - 1.0).sqrt() + 1e-12);
        }
        let inst = SearchInstance::new(100).unwrap();
        let q = quadrature::integrate(
            |r| 1.0 / inst.gap_sq(r),
            0.0,
            1.0,
            Tolerance::relative(1e-13),
        )
        .unwrap();
        assert!((q - inst.schedule_norm()).abs() < 1e-10);
    }

    #[test]
    fn schedule_derivatives_are_reciprocal() {
        let inst = SearchInstance::new(300).unwrap();
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let r = inst.local_schedule(s);
            let prod =
                inst.local_schedule_derivative(s) * inst.local_schedule_inverse_derivative(r);
            assert_relative_eq!(prod, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coefficients_examples() {
        assert_eq!(coefficients(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(coefficients(1.0).unwrap(), (0.0, 1.0));
        let (a, b) = coefficients(0.5).unwrap();
        assert_relative_eq!(a, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(b, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(coefficients(1.01).is_err());
        let p = ModelParams::from_omega(8, 0.3, 1.0, Schedule::Global).unwrap();
        assert_relative_eq!(p.omega(), 0.3, epsilon = 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 1.0, 1.0, 0.0, Schedule::Global).is_err());
        assert!(ModelParams::new(4, -1.0, 1.0, 0.0, Schedule::Global).is_err());
        assert!(ModelParams::new(4, 1.0, 0.0, 0.0, Schedule::Global).is_err());
        assert!(ModelParams::new(4, 1.0, -0.1, 1.0, Schedule::Global).is_err());
        assert!(ModelParams::new(4, 1.0, 0.0, 1.0, Schedule::Local)
            .unwrap()
            .is_wide_open());
        assert_eq!("LOCAL".parse::<Schedule>().unwrap(), Schedule::Local);
    }

    #[test]
    fn quadrature_q_examples() {
        assert_relative_eq!(
            quadrature_q(1.0, 40, 0.0, Schedule::Global).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        for &sigma in &[0.0, 0.5, 1.0, 1.7, 3.0] {
            for k in 1..=10 {
                let s = k as f64 / 10.0;
                let q = quadrature_q(s, 128, sigma, Schedule::Global).unwrap();
                assert!(q >= s * 128f64.powf(-sigma) * (1.0 - 1e-12));
            }
        }
        // σ = 1 has the closed form ∫Δ² = s + 4(N-1)/N (s³/3 - s²/2)
        let n = 33.0;
        let s: f64 = 0.8;
        let exact = s + 4.0 * (n - 1.0) / n * (s.powi(3) / 3.0 - s * s / 2.0);
        assert_relative_eq!(
            quadrature_q(s, 33, 1.0, Schedule::Global).unwrap(),
            exact,
            max_relative = 1e-12
        );
        // local, σ = 1: Q̃(r) = r/L
        let inst = SearchInstance::new(33).unwrap();
        assert_relative_eq!(
            quadrature_q(0.7, 33, 1.0, Schedule::Local).unwrap(),
            0.7 / inst.schedule_norm(),
            max_relative = 1e-12
        );
        // local, σ ≥ 1: Q̃(r) ≥ r/(L N^{σ-1})
        for &sigma in &[1.0, 1.5, 2.0] {
            let r = 0.6;
            let q = quadrature_q(r, 33, sigma, Schedule::Local).unwrap();
            assert!(q >= r / (inst.schedule_norm() * 33f64.powf(sigma - 1.0)) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn quadrature_r_example() {
        // ∫₀¹ Δ for N = 2 is ∫ √((1 + (2s-1)²)/2)
        let exact = (2f64.sqrt() + 1f64.asinh()) / 2.0 / 2f64.sqrt();
        assert_relative_eq!(quadrature_r(1.0, 2).unwrap(), exact, max_relative = 1e-12);
        assert_eq!(quadrature_r(0.0, 9).unwrap(), 0.0);
    }

    #[test]
    fn large_n_does_not_overflow() {
        let inst = SearchInstance::new(1 << 24).unwrap();
        let q = inst.ground_bloch(0.999_999);
        assert!((q.norm() - 1.0).abs() < 1e-12);
        assert!(inst.ground_eigenvector(1.0).iter().all(|c| c.is_finite()));
    }

    proptest! {
        #[test]
        fn gap_bounded_below(s in 0.0f64..=1.0, n in 2u64..1_000_000) {
            let inst = SearchInstance::new(n).unwrap();
            prop_assert!(inst.gap(s) >= (1.0 / (n as f64).sqrt()) * (1.0 - 1e-14));
            prop_assert!((inst.gap(s) - inst.gap(1.0 - s)).abs() <= 1e-14);
        }

        #[test]
        fn ground_bloch_is_unit(s in 0.0f64..=1.0, n in 2u64..10_000_000) {
            let q = ground_bloch(s, n).unwrap();
            prop_assert!((q.norm() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(q.y, 0.0);
        }

        #[test]
        fn cos_theta_strictly_decreasing(s in 0.0f64..0.999, ds in 1e-6f64..1e-3, n in 2u64..100_000) {
            let inst = SearchInstance::new(n).unwrap();
            let t = (s + ds).min(1.0);
            prop_assert!(inst.cos_theta(t) < inst.cos_theta(s));
        }

        #[test]
        fn z_times_gap_sq_is_constant(s in 0.0f64..=1.0, n in 2u64..10_000_000) {
            let inst = SearchInstance::new(n).unwrap();
            let nf = n as f64;
            let lhs = inst.z_coupling(s) * inst.gap_sq(s);
            prop_assert!((lhs - (nf - 1.0).sqrt() / nf).abs() <= 1e-12);
        }

        #[test]
        fn schedule_inverse_strictly_increasing(r in 0.0f64..0.999, dr in 1e-6f64..1e-3, n in 2u64..100_000) {
            let inst = SearchInstance::new(n).unwrap();
            prop_assert!(inst.local_schedule_inverse((r + dr).min(1.0)) > inst.local_schedule_inverse(r));
        }
    }
}
