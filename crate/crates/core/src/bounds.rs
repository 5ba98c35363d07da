//! Analytical bounds on the deviation from the ground state and on the run
//! time needed for a given success probability.
//!
//! Sufficiency bounds (`*_bound`) cap `|ρ₀₀(0) − ρ₀₀(s)|` for any `s`; they
//! invert into upper bounds on `T`. The necessity functional `C(α)` gives
//! lower bounds on `T` in the wide-open regime through `1 − p ≥ C(α)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::dynamics::Trajectory;
use crate::error::{domain, Error, Result};
use crate::model::{pow_gap_sq, ModelParams, Schedule, SearchInstance};
use crate::quadrature::{self, Tolerance};

/// Slack below which a bound still counts as satisfied.
pub const HOLD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundName {
    SemiOpenGlobal,
    SemiOpenLocal,
    WideOpenGlobal,
    WideOpenLocal,
    RuntimeUpper,
    RuntimeLower,
}

impl BoundName {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::SemiOpenGlobal => "semi_open_global",
            BoundName::SemiOpenLocal => "semi_open_local",
            BoundName::WideOpenGlobal => "wide_open_global",
            BoundName::WideOpenLocal => "wide_open_local",
            BoundName::RuntimeUpper => "runtime_upper",
            BoundName::RuntimeLower => "runtime_lower",
        }
    }
}

/// An evaluated bound next to the quantity it constrains.
///
/// `margin` is the slack in the direction of the inequality: `value − observed`
/// for upper bounds and `observed − value` for [`BoundName::RuntimeLower`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub name: BoundName,
    pub value: f64,
    pub observed: f64,
    pub holds: bool,
    pub margin: f64,
}

impl BoundReport {
    pub fn upper(name: BoundName, value: f64, observed: f64) -> Self {
        Self::with_margin(name, value, observed, value - observed)
    }

    pub fn lower(name: BoundName, value: f64, observed: f64) -> Self {
        Self::with_margin(name, value, observed, observed - value)
    }

    fn with_margin(name: BoundName, value: f64, observed: f64, margin: f64) -> Self {
        BoundReport {
            name,
            value,
            observed,
            holds: margin >= -HOLD_SLACK,
            margin,
        }
    }
}

/// Whether the Hamiltonian term is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Openness {
    WideOpen,
    SemiOpen,
}

/// `α` (global) or `α̃` (local) together with the exponent it was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessityParams {
    pub alpha: f64,
    pub sigma: f64,
    pub regime: Schedule,
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("{name} must be finite and > 0, got {x}"));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<f64> {
    if n < 2 {
        return domain(format!("list length must be >= 2, got {n}"));
    }
    Ok(n as f64)
}

fn check_semi_open(a: f64, b: f64, k: f64, rho10_abs: f64) -> Result<()> {
    if !(a > 0.0) {
        return domain(format!(
            "semi-open bounds need A > 0, got A = {a}; use the wide-open bounds"
        ));
    }
    if !(b >= 0.0 && k >= 0.0 && rho10_abs >= 0.0) {
        return domain(format!(
            "B, K and |ρ₁₀(0)| must be >= 0, got {b}, {k}, {rho10_abs}"
        ));
    }
    Ok(())
}

/// Deviation bound for the semi-open global sweep; leading term `∝ N/T`.
pub fn semi_open_global_bound(
    n: u64,
    t: f64,
    a: f64,
    b: f64,
    k: f64,
    rho10_abs: f64,
) -> Result<f64> {
    let nf = check_n(n)?;
    check_positive("T", t)?;
    check_semi_open(a, b, k, rho10_abs)?;
    let ratio = nf / t;
    Ok(2.0 * rho10_abs / (t * nf.sqrt() * a)
        + 2.0 * rho10_abs * ratio * (b * k + 5.0 * a) / (a * a)
        + PI * ratio * (b * k + 6.0 * a) / (a * a))
}

/// Deviation bound for the semi-open local sweep; leading term `∝ √N/T`.
pub fn semi_open_local_bound(
    n: u64,
    t: f64,
    a: f64,
    b: f64,
    k: f64,
    rho10_abs: f64,
) -> Result<f64> {
    let nf = check_n(n)?;
    check_positive("T", t)?;
    check_semi_open(a, b, k, rho10_abs)?;
    let ratio = nf.sqrt() / t;
    Ok(
        (rho10_abs + PI / 2.0) * SQRT_2 * PI * b * k / (a * a) * ratio
            + (3.0 * rho10_abs + 2.0 * PI) * (PI / a) * ratio
            + rho10_abs * (PI / a) / t,
    )
}

/// Deviation bound for the wide-open global sweep (`A = 0`, `B = 1`).
pub fn wide_open_global_bound(n: u64, t: f64, sigma: f64, rho10_abs: f64) -> Result<f64> {
    let nf = check_n(n)?;
    check_positive("T", t)?;
    if !(sigma >= 0.0) {
        return domain(format!(
            "wide-open global bound needs sigma >= 0, got {sigma}"
        ));
    }
    Ok((2.0 * rho10_abs + PI) * nf.powf(sigma + 0.5) / t)
}

/// Deviation bound for the wide-open local sweep (`A = 0`, `B = 1`, `σ ≥ 1`).
pub fn wide_open_local_bound(n: u64, t: f64, sigma: f64, rho10_abs: f64) -> Result<f64> {
    let nf = check_n(n)?;
    check_positive("T", t)?;
    if !(sigma >= 1.0) {
        return domain(format!(
            "wide-open local bound needs sigma >= 1, got {sigma}"
        ));
    }
    Ok((2.0 * rho10_abs + PI) * (PI / 2.0) * nf.powf(sigma) / t)
}

/// `Φ(x) = ∫₀ˣ (1 + t²)^m dt`, closed form for integer `m`.
#[derive(Debug, Clone, Copy)]
struct PhiIntegral {
    exponent: f64,
    integer: Option<u32>,
}

impl PhiIntegral {
    fn new(exponent: f64) -> Self {
        let integer = (exponent.fract() == 0.0 && exponent <= 16.0).then_some(exponent as u32);
        PhiIntegral { exponent, integer }
    }

    fn eval(&self, x: f64) -> Result<f64> {
        match self.integer {
            Some(m) => {
                // Σ_k C(m,k) x^{2k+1}/(2k+1)
                let x2 = x * x;
                let mut binom = 1.0;
                let mut power = x;
                let mut sum = 0.0;
                for k in 0..=m {
                    sum += binom * power / (2 * k + 1) as f64;
                    binom = binom * (m - k) as f64 / (k + 1) as f64;
                    power *= x2;
                }
                Ok(sum)
            }
            None => {
                let m = self.exponent;
                quadrature::integrate(
                    |t| (1.0 + t * t).powf(m),
                    0.0,
                    x,
                    Tolerance::relative(1e-13).with_abs(1e-300),
                )
            }
        }
    }
}

/// `Φ(x) = ∫₀ˣ (1 + x′²)^σ dx′`.
pub fn phi(x: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return domain(format!("sigma must be >= 0, got {sigma}"));
    }
    PhiIntegral::new(sigma).eval(x)
}

fn phi_exponent(sigma: f64, regime: Schedule) -> Result<f64> {
    match regime {
        Schedule::Global if sigma >= 0.0 => Ok(sigma),
        Schedule::Local if sigma >= 1.0 => Ok(sigma - 1.0),
        Schedule::Global => domain(format!("global necessity needs sigma >= 0, got {sigma}")),
        Schedule::Local => domain(format!("local necessity needs sigma >= 1, got {sigma}")),
    }
}

const NECESSITY_TOL: f64 = 1e-10;

/// `F(α, β) = 2β e^{−αΦ(β)} (1+β²)^{−3/2} ∫₀^β e^{−αΦ(x)}/(1+x²) dx`
/// (with `Φ̃` in the local regime).
pub fn necessity_f(alpha: f64, beta: f64, sigma: f64, regime: Schedule) -> Result<f64> {
    let phi = PhiIntegral::new(phi_exponent(sigma, regime)?);
    f_integrand(&phi, alpha, beta)
}

fn f_integrand(phi: &PhiIntegral, alpha: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Ok(0.0);
    }
    let mut err = None;
    let inner = quadrature::integrate(
        |x| match phi.eval(x) {
            Ok(p) => (-alpha * p).exp() / (1.0 + x * x),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        beta,
        Tolerance::relative(NECESSITY_TOL),
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let outer = 2.0 * beta * (-alpha * phi.eval(beta)?).exp() / (1.0 + beta * beta).powf(1.5);
    Ok(outer * inner)
}

/// `C(α) = (1/(2√2)) ∫₀¹ F(α, β) dβ` by nested adaptive quadrature.
pub fn necessity_c(alpha: f64, sigma: f64, regime: Schedule) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return domain(format!("alpha must be finite and >= 0, got {alpha}"));
    }
    let phi = PhiIntegral::new(phi_exponent(sigma, regime)?);
    let mut err = None;
    let integral = quadrature::integrate(
        |beta| match f_integrand(&phi, alpha, beta) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        Tolerance::relative(NECESSITY_TOL),
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(integral * FRAC_1_SQRT_2 / 2.0)
}

/// Inverse of the strictly decreasing `C`: the `α` with `C(α) = y`.
pub fn necessity_c_inverse(y: f64, sigma: f64, regime: Schedule) -> Result<f64> {
    if !(y > 0.0) {
        return domain(format!("C⁻¹ needs y > 0, got {y}"));
    }
    let c0 = necessity_c(0.0, sigma, regime)?;
    if y > c0 {
        return Err(Error::Range(format!("y = {y} exceeds C(0) = {c0}")));
    }
    if y == c0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while necessity_c(hi, sigma, regime)? > y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Range(format!(
                "C(α) stays above {y} for α up to 1e12"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = necessity_c(mid, sigma, regime)?;
        if (c - y).abs() <= 1e-8 * y.min(1.0) || hi - lo <= 1e-14 * hi {
            return Ok(mid);
        }
        if c > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `α = T/(2N^σ√(N−1))` (global) or `α̃ = T/(2N^σ arctan√(N−1))` (local).
pub fn alpha_of(n: u64, t: f64, sigma: f64, regime: Schedule) -> Result<NecessityParams> {
    let nf = check_n(n)?;
    let root = (nf - 1.0).sqrt();
    let denom = match regime {
        Schedule::Global => 2.0 * nf.powf(sigma) * root,
        Schedule::Local => 2.0 * nf.powf(sigma) * root.atan(),
    };
    Ok(NecessityParams {
        alpha: t / denom,
        sigma,
        regime,
    })
}

/// Run-time bracket for a target success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeSandwich {
    /// `None` where only sufficiency (upper) bounds exist.
    pub low: Option<f64>,
    pub high: f64,
    /// Set when `1 − p > C(0)`: the necessity bound carries no information
    /// and `low` is reported as zero.
    pub lower_vacuous: bool,
}

/// Semi-open coefficients: openness weights and the condition constant `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiOpenTerms {
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

pub fn runtime_bounds_for_p(
    n: u64,
    p: f64,
    sigma: f64,
    regime: Schedule,
    openness: Openness,
    terms: SemiOpenTerms,
) -> Result<RuntimeSandwich> {
    let nf = check_n(n)?;
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p must lie in (0, 1), got {p}"));
    }
    let miss = 1.0 - p;
    match openness {
        Openness::WideOpen => {
            let high = match regime {
                Schedule::Global => {
                    if !(sigma >= 0.0) {
                        return domain(format!("sigma must be >= 0, got {sigma}"));
                    }
                    nf.powf(sigma + 0.5) * PI / miss
                }
                Schedule::Local => {
                    if !(sigma >= 1.0) {
                        return domain(format!(
                            "wide-open local bounds need sigma >= 1, got {sigma}"
                        ));
                    }
                    PI * PI / 2.0 * nf.powf(sigma) / miss
                }
            };
            let scale = alpha_of(n, 1.0, sigma, regime)?.alpha.recip();
            let (low, lower_vacuous) = match necessity_c_inverse(miss, sigma, regime) {
                Ok(alpha) => (scale * alpha, false),
                Err(Error::Range(_)) => (0.0, true),
                Err(e) => return Err(e),
            };
            Ok(RuntimeSandwich {
                low: Some(low),
                high,
                lower_vacuous,
            })
        }
        Openness::SemiOpen => {
            let SemiOpenTerms { a, b, k } = terms;
            check_semi_open(a, b, k, 0.0)?;
            let high = match regime {
                Schedule::Global => PI * nf * (b * k + 6.0 * a) / (a * a * miss),
                Schedule::Local => {
                    nf.sqrt() / miss * 2.0 * PI * PI / a * (1.0 + SQRT_2 * b * k / (4.0 * a))
                }
            };
            Ok(RuntimeSandwich {
                low: None,
                high,
                lower_vacuous: false,
            })
        }
    }
}

/// `∫₀¹ Z(s) |dΓ²/ds| ds` for `Γ = Δ^σ`, split at the kink `s = 1/2`.
pub fn condition_integral(n: u64, sigma: f64) -> Result<f64> {
    let inst = SearchInstance::new(n)?;
    if !(sigma >= 0.0) {
        return domain(format!("sigma must be >= 0, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let nf = inst.n();
    let integrand = |s: f64| {
        let gap_sq = inst.gap_sq(s);
        let d_gap_sq = 4.0 * (nf - 1.0) * (2.0 * s - 1.0) / nf;
        inst.z_coupling(s) * (sigma * pow_gap_sq(gap_sq, sigma - 1.0) * d_gap_sq).abs()
    };
    quadrature::integrate_split(integrand, &[0.0, 0.5, 1.0], Tolerance::relative(1e-10))
}

/// `ζ = min_s Γ²(s)/Δ(s) = min_s Δ^{2σ−1}(s)`: grid search refined by a
/// golden-section polish.
pub fn zeta_min(n: u64, sigma: f64) -> Result<f64> {
    let inst = SearchInstance::new(n)?;
    if !(sigma >= 0.0) {
        return domain(format!("sigma must be >= 0, got {sigma}"));
    }
    let value = |s: f64| pow_gap_sq(inst.gap_sq(s), sigma - 0.5);
    const GRID: usize = 2000;
    let (best_k, best) = (0..=GRID)
        .map(|k| (k, value(k as f64 / GRID as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    let mut lo = (best_k.saturating_sub(1)) as f64 / GRID as f64;
    let mut hi = ((best_k + 1).min(GRID)) as f64 / GRID as f64;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (value(x1), value(x2));
    for _ in 0..100 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = value(x2);
        }
    }
    Ok(best.min(f1).min(f2).min(value(0.5 * (lo + hi))))
}

/// Evaluates the sufficiency bound that applies to `params` at run time `t`
/// and compares it with the largest deviation along `trajectory`.
///
/// `|ρ₁₀(0)|` is read off the initial Bloch vector, and `K` is the condition
/// integral of the instance.
pub fn deviation_report(params: &ModelParams, trajectory: &Trajectory) -> Result<BoundReport> {
    let t = trajectory.run_time;
    let v0 = trajectory.samples[0].v;
    let rho10_abs = 0.5 * v0.x.hypot(v0.y);
    let n = params.n_items;
    let (name, value) = if params.is_wide_open() {
        // the wide-open bounds are stated for B = 1; rescaling B rescales T
        let t_eff = t * params.coeff_b;
        match params.schedule {
            Schedule::Global => (
                BoundName::WideOpenGlobal,
                wide_open_global_bound(n, t_eff, params.sigma, rho10_abs)?,
            ),
            Schedule::Local => (
                BoundName::WideOpenLocal,
                wide_open_local_bound(n, t_eff, params.sigma, rho10_abs)?,
            ),
        }
    } else {
        let k = condition_integral(n, params.sigma)?;
        let (a, b) = (params.coeff_a, params.coeff_b);
        match params.schedule {
            Schedule::Global => (
                BoundName::SemiOpenGlobal,
                semi_open_global_bound(n, t, a, b, k, rho10_abs)?,
            ),
            Schedule::Local => (
                BoundName::SemiOpenLocal,
                semi_open_local_bound(n, t, a, b, k, rho10_abs)?,
            ),
        }
    };
    Ok(BoundReport::upper(name, value, trajectory.max_deviation()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn no_terms() -> SemiOpenTerms {
        SemiOpenTerms {
            a: 0.0,
            b: 0.0,
            k: 0.0,
        }
    }

    #[test]
    fn semi_open_examples() {
        assert_relative_eq!(
            semi_open_global_bound(16, 160.0, 1.0, 0.0, 0.0, 0.0).unwrap(),
            0.6 * PI,
            epsilon = 1e-14
        );
        let t = 8.0 * PI * PI;
        assert_relative_eq!(
            semi_open_local_bound(64, t, 1.0, 0.0, 0.0, 0.0).unwrap(),
            2.0,
            epsilon = 1e-13
        );
        let a = semi_open_local_bound(64, 100.0, 0.7, 0.7, 2.0, 0.0).unwrap();
        let b = semi_open_local_bound(64, 200.0, 0.7, 0.7, 2.0, 0.0).unwrap();
        assert_relative_eq!(a / b, 2.0, epsilon = 1e-13);
        let far = semi_open_global_bound(16, 1e12, 0.5, 0.5, 1.0, 0.3).unwrap();
        assert!(far < 1e-9);
        assert!(semi_open_global_bound(16, 10.0, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(semi_open_local_bound(16, 10.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn wide_open_examples() {
        assert_relative_eq!(
            wide_open_global_bound(4, 8.0 * PI, 1.0, 0.0).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            wide_open_local_bound(9, 9.0 * PI * PI, 1.0, 0.0).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        assert!(wide_open_local_bound(9, 1.0, 0.5, 0.0).is_err());
        assert!(wide_open_global_bound(9, 1.0, -0.5, 0.0).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_relative_eq!(phi(2.0, 1.0).unwrap(), 14.0 / 3.0, epsilon = 1e-14);
        assert_eq!(phi(1.3, 0.0).unwrap(), 1.3);
        for &sigma in &[0.0, 0.3, 1.0, 1.5, 2.0, 2.7] {
            for &x in &[0.1, 0.9, 3.0] {
                assert_relative_eq!(
                    phi(-x, sigma).unwrap(),
                    -phi(x, sigma).unwrap(),
                    epsilon = 1e-13
                );
            }
        }
        // non-integer path against the closed form for σ = 1/2
        let x: f64 = 1.7;
        let exact = 0.5 * (x * (1.0 + x * x).sqrt() + x.asinh());
        assert_relative_eq!(phi(x, 0.5).unwrap(), exact, max_relative = 1e-12);
        // integer path against quadrature
        let q = quadrature::integrate(
            |t| (1.0 + t * t).powi(3),
            0.0,
            1.4,
            Tolerance::relative(1e-14),
        )
        .unwrap();
        assert_relative_eq!(phi(1.4, 3.0).unwrap(), q, max_relative = 1e-13);
    }

    #[test]
    fn necessity_c_is_decreasing_and_vanishes() {
        let c1 = necessity_c(1.0, 1.0, Schedule::Global).unwrap();
        let c2 = necessity_c(2.0, 1.0, Schedule::Global).unwrap();
        assert!(c2 < c1);
        let c0 = necessity_c(0.0, 1.0, Schedule::Global).unwrap();
        let c50 = necessity_c(50.0, 1.0, Schedule::Global).unwrap();
        assert!(c50 < 1e-3 * c0, "C(50) = {c50}, C(0) = {c0}");
        let l1 = necessity_c(1.0, 1.0, Schedule::Local).unwrap();
        let l2 = necessity_c(2.0, 1.0, Schedule::Local).unwrap();
        assert!(l2 < l1);
        assert!(necessity_c(1.0, 0.5, Schedule::Local).is_err());
        assert!(necessity_c(-1.0, 1.0, Schedule::Global).is_err());
    }

    #[test]
    fn necessity_c_at_zero_matches_closed_inner_integral() {
        // at α = 0 the inner integral is arctan β, so C(0) is a single integral
        let reference = quadrature::integrate(
            |b| 2.0 * b * b.atan() / (1.0 + b * b).powf(1.5),
            0.0,
            1.0,
            Tolerance::relative(1e-14),
        )
        .unwrap()
            / (2.0 * SQRT_2);
        let c0 = necessity_c(0.0, 1.0, Schedule::Global).unwrap();
        assert_relative_eq!(c0, reference, max_relative = 1e-9);
        // α = 0 removes every dependence on Φ
        assert_relative_eq!(
            necessity_c(0.0, 2.5, Schedule::Local).unwrap(),
            reference,
            max_relative = 1e-9
        );
    }

    #[test]
    fn necessity_inverse_round_trip() {
        for &y in &[0.01, 0.05, 0.1] {
            let alpha = necessity_c_inverse(y, 1.0, Schedule::Global).unwrap();
            assert!((necessity_c(alpha, 1.0, Schedule::Global).unwrap() - y).abs() <= 1e-7);
        }
        let a1 = necessity_c_inverse(0.01, 1.0, Schedule::Global).unwrap();
        let a2 = necessity_c_inverse(0.05, 1.0, Schedule::Global).unwrap();
        assert!(a1 > a2);
        let c3 = necessity_c(3.0, 1.0, Schedule::Global).unwrap();
        assert!((necessity_c_inverse(c3, 1.0, Schedule::Global).unwrap() - 3.0).abs() < 1e-6);
        assert!(matches!(
            necessity_c_inverse(0.5, 1.0, Schedule::Global),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn alpha_examples() {
        assert_relative_eq!(
            alpha_of(2, 2.0, 0.0, Schedule::Global).unwrap().alpha,
            1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            alpha_of(2, 2.0 * 1f64.atan(), 0.0, Schedule::Local)
                .unwrap()
                .alpha,
            1.0,
            epsilon = 1e-15
        );
        let a = alpha_of(50, 3.0, 1.3, Schedule::Global).unwrap().alpha;
        let b = alpha_of(50, 6.0, 1.3, Schedule::Global).unwrap().alpha;
        assert_relative_eq!(b, 2.0 * a, epsilon = 1e-15);
    }

    #[test]
    fn runtime_sandwich_examples() {
        let wo = runtime_bounds_for_p(
            16,
            0.5,
            1.0,
            Schedule::Global,
            Openness::WideOpen,
            no_terms(),
        )
        .unwrap();
        assert_relative_eq!(wo.high, 128.0 * PI, epsilon = 1e-12);
        assert!(wo.lower_vacuous);
        assert_eq!(wo.low, Some(0.0));
        let so = runtime_bounds_for_p(
            16,
            0.5,
            1.0,
            Schedule::Global,
            Openness::SemiOpen,
            SemiOpenTerms {
                a: 1.0,
                b: 0.0,
                k: 0.0,
            },
        )
        .unwrap();
        assert_relative_eq!(so.high, PI * 16.0 * 6.0 / 0.5, epsilon = 1e-12);
        assert_eq!(so.low, None);
        // p close to one makes the necessity bound informative
        for regime in [Schedule::Global, Schedule::Local] {
            let tight = runtime_bounds_for_p(64, 0.97, 1.0, regime, Openness::WideOpen, no_terms())
                .unwrap();
            assert!(!tight.lower_vacuous);
            let low = tight.low.unwrap();
            assert!(low > 0.0 && low <= tight.high);
        }
        assert!(runtime_bounds_for_p(
            16,
            0.5,
            1.0,
            Schedule::Global,
            Openness::SemiOpen,
            no_terms()
        )
        .is_err());
        assert!(runtime_bounds_for_p(
            16,
            1.0,
            1.0,
            Schedule::Global,
            Openness::WideOpen,
            no_terms()
        )
        .is_err());
    }

    /// `∫Z|dΓ²/ds|` reduces to an elementary antiderivative after substituting
    /// `x = √(N−1)(2s−1)`.
    fn condition_integral_closed_form(n: f64, sigma: f64) -> f64 {
        if sigma == 1.0 {
            2.0 * (n - 1.0).sqrt() * n.ln() / n
        } else {
            2.0 * sigma * (n - 1.0).sqrt() * (1.0 / n - n.powf(-sigma)) / (sigma - 1.0)
        }
    }

    #[test]
    fn condition_integral_examples() {
        assert_eq!(condition_integral(64, 0.0).unwrap(), 0.0);
        for k in [1u32, 4, 8, 12, 16, 20] {
            let n = 1u64 << k;
            assert!(condition_integral(n, 0.5).unwrap() <= 2.0);
            for &sigma in &[0.25, 0.5, 1.0, 2.0] {
                let v = condition_integral(n, sigma).unwrap();
                let exact = condition_integral_closed_form(n as f64, sigma);
                assert_relative_eq!(v, exact, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn zeta_examples() {
        for n in [2u64, 16, 1000] {
            assert_relative_eq!(zeta_min(n, 0.5).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(zeta_min(16, 1.0).unwrap(), 0.25, epsilon = 1e-9);
        for &sigma in &[0.5, 1.0, 2.0] {
            for n in [3u64, 64, 4097] {
                let analytic = (n as f64).powf(-(sigma - 0.5));
                assert!((zeta_min(n, sigma).unwrap() - analytic).abs() < 1e-9);
            }
        }
        // σ < 1/2: minimum at the endpoints where Δ = 1
        assert_relative_eq!(zeta_min(64, 0.2).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn report_margins() {
        let up = BoundReport::upper(BoundName::RuntimeUpper, 10.0, 4.0);
        assert!(up.holds && up.margin == 6.0);
        let low = BoundReport::lower(BoundName::RuntimeLower, 10.0, 4.0);
        assert!(!low.holds && low.margin == -6.0);
        assert!(BoundReport::upper(BoundName::WideOpenGlobal, 1.0, 1.0 + 5e-10).holds);
    }
}
