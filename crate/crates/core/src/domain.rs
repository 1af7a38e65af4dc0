//! Time-periodic moving intervals and reaction terms.
//!
//! The physical domain is Ω(t) = (A(t), A(t) + L(t)) with
//!
//! ```text
//! L(t) = L0 · l(ωt/2π),      A(t) = A0 · a(ωt/2π),
//! ```
//!
//! where `l` and `a` are 1-periodic shape profiles. Pulling the diffusion
//! equation back to the fixed reference interval ξ ∈ (0, L0) via
//! ξ = (x − A(t))·L0/L(t) produces
//!
//! ```text
//! u_t = D·L0²/L² · u_ξξ + (Ȧ·L0 + ξ·L̇)/L · u_ξ + f(u),
//! ```
//!
//! the advective "u-form". Substituting u = w·H⁻¹·e^{f'(0)t} with the weight
//! [`DomainSpec::h_factor`] removes the advection and leaves the "w-form"
//! with multiplicative potential [`DomainSpec::w_potential`]:
//!
//! ```text
//! w_t = D·L0²/L² · w_ξξ + ( ξ²·L̈L/(4DL0²) + ξ·ÄL/(2DL0) ) · w.
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::{periodic_quadrature, validate_finite_series, PeriodicFn1};
use crate::scalar::Real;

const PROFILE_SAMPLES: usize = 4096;

/// Geometry of a time-periodic moving interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec<T> {
    #[serde(rename = "L0")]
    l0: T,
    #[serde(rename = "A0")]
    a0: T,
    l: PeriodicFn1<T>,
    a: PeriodicFn1<T>,
    omega: T,
}

impl<T: Real> DomainSpec<T> {
    pub fn new(l0: T, a0: T, l: PeriodicFn1<T>, a: PeriodicFn1<T>, omega: T) -> Result<Self> {
        if !(l0.is_finite() && l0 > T::zero()) {
            return Err(Error::invalid("domain", "L0 must be positive and finite"));
        }
        if !(a0.is_finite() && a0 >= T::zero()) {
            return Err(Error::invalid("domain", "A0 must be non-negative and finite"));
        }
        if !(omega.is_finite() && omega > T::zero()) {
            return Err(Error::invalid("domain", "omega must be positive and finite"));
        }
        validate_finite_series(&l, "domain length profile")?;
        validate_finite_series(&a, "domain position profile")?;
        for i in 0..PROFILE_SAMPLES {
            let s = T::of_usize(i) / T::of_usize(PROFILE_SAMPLES);
            if l.value(s) <= T::zero() {
                return Err(Error::invalid(
                    "domain",
                    format!("length profile is not positive at s = {}", s.as_f64()),
                ));
            }
        }
        Ok(DomainSpec { l0, a0, l, a, omega })
    }

    /// Fixed interval (0, L0): constant profiles, period still 2π/ω.
    pub fn fixed(l0: T, omega: T) -> Result<Self> {
        Self::new(
            l0,
            T::zero(),
            PeriodicFn1::constant(T::one()),
            PeriodicFn1::constant(T::zero()),
            omega,
        )
    }

    pub fn l0(&self) -> T {
        self.l0
    }

    pub fn a0(&self) -> T {
        self.a0
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn length_profile(&self) -> &PeriodicFn1<T> {
        &self.l
    }

    pub fn position_profile(&self) -> &PeriodicFn1<T> {
        &self.a
    }

    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }

    /// Phase variable s = ωt/2π fed to the unit-period profiles.
    pub fn phase(&self, t: T) -> T {
        self.omega * t / T::TAU()
    }

    fn dphase(&self) -> T {
        self.omega / T::TAU()
    }

    pub fn length(&self, t: T) -> T {
        self.l0 * self.l.value(self.phase(t))
    }

    pub fn length_dot(&self, t: T) -> T {
        self.l0 * self.l.derivative1(self.phase(t)) * self.dphase()
    }

    pub fn length_ddot(&self, t: T) -> T {
        self.l0 * self.l.derivative2(self.phase(t)) * self.dphase() * self.dphase()
    }

    pub fn position(&self, t: T) -> T {
        self.a0 * self.a.value(self.phase(t))
    }

    pub fn position_dot(&self, t: T) -> T {
        self.a0 * self.a.derivative1(self.phase(t)) * self.dphase()
    }

    pub fn position_ddot(&self, t: T) -> T {
        self.a0 * self.a.derivative2(self.phase(t)) * self.dphase() * self.dphase()
    }

    /// Diffusion and advection coefficients of the u-form at (ξ, t).
    pub fn u_coefficients(&self, d: T, xi: T, t: T) -> (T, T) {
        let len = self.length(t);
        let diffusion = d * self.l0 * self.l0 / (len * len);
        let advection = (self.position_dot(t) * self.l0 + xi * self.length_dot(t)) / len;
        (diffusion, advection)
    }

    /// Multiplicative potential of the advection-free w-form at (ξ, t).
    pub fn w_potential(&self, d: T, xi: T, t: T) -> T {
        let len = self.length(t);
        let four = T::of(4.0);
        let two = T::of(2.0);
        xi * xi * self.length_ddot(t) * len / (four * d * self.l0 * self.l0)
            + xi * self.position_ddot(t) * len / (two * d * self.l0)
    }

    /// Running integral ∫₀ᵗ Ȧ(ζ)²/(4D) dζ, reduced to the phase variable and
    /// evaluated by a cumulative midpoint rule (resolution well below 1e-6).
    pub fn position_dot_sq_integral(&self, d: T, t: T) -> T {
        if self.a0 == T::zero() || t == T::zero() {
            return T::zero();
        }
        let s_end = self.phase(t);
        let n = ((s_end.as_f64().abs() * 4096.0).ceil() as usize).max(256);
        let h = s_end / T::of_usize(n);
        let half = T::of(0.5);
        let mut acc = T::zero();
        for i in 0..n {
            let s = (T::of_usize(i) + half) * h;
            let da = self.a0 * self.a.derivative1(s) * self.dphase();
            acc += da * da;
        }
        // dζ = (2π/ω) ds turns the phase-step h back into a time step.
        acc * h * T::TAU() / self.omega / (T::of(4.0) * d)
    }

    /// Weight H(ξ, t) relating the u- and w-forms:
    /// H = (L(t)/L(0))^{1/2} · exp( ∫₀ᵗ Ȧ²/4D + ξ²L̇L/(4DL0²) + ξȦL/(2DL0) ).
    pub fn h_factor(&self, d: T, xi: T, t: T) -> T {
        let len = self.length(t);
        let four = T::of(4.0);
        let two = T::of(2.0);
        let exponent = self.position_dot_sq_integral(d, t)
            + xi * xi * self.length_dot(t) * len / (four * d * self.l0 * self.l0)
            + xi * self.position_dot(t) * len / (two * d * self.l0);
        (len / self.length(T::zero())).sqrt() * exponent.exp()
    }

    /// The domain running backwards in time: Ω_r(t) = Ω(-t).
    pub fn time_reverse(&self) -> Self {
        DomainSpec {
            l0: self.l0,
            a0: self.a0,
            l: self.l.time_reversed(),
            a: self.a.time_reversed(),
            omega: self.omega,
        }
    }

    /// Same geometry driven at a different frequency.
    pub fn with_omega(&self, omega: T) -> Result<Self> {
        Self::new(self.l0, self.a0, self.l.clone(), self.a.clone(), omega)
    }

    /// Period average (1/T)·∫₀ᵀ g(t) dt computed in the phase variable.
    pub fn period_average(&self, g: impl Fn(T) -> T) -> T {
        let period = self.period();
        crate::periodic::adaptive_periodic_quadrature(|s| g(s * period))
    }
}

/// Monostable reaction kinetics: f(0) = f(K) = 0, f'(0) > 0, f(k)/k
/// non-increasing on (0, K].
#[derive(Clone)]
pub enum ReactionKind<T> {
    /// f(u) = f'(0)·u — no saturation; used for growth/energy diagnostics.
    Linear,
    /// f(u) = f'(0)·u·(1 − u/K).
    Logistic,
    /// Caller-supplied kinetics, validated by sampling at construction.
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T> fmt::Debug for ReactionKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReactionKind::Linear => write!(f, "Linear"),
            ReactionKind::Logistic => write!(f, "Logistic"),
            ReactionKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReactionSpec<T> {
    kind: ReactionKind<T>,
    fprime0: T,
    k: T,
    d: T,
}

impl<T: Real> ReactionSpec<T> {
    pub fn linear(fprime0: T, d: T) -> Result<Self> {
        Self::build(ReactionKind::Linear, fprime0, T::one(), d)
    }

    pub fn logistic(fprime0: T, k: T, d: T) -> Result<Self> {
        Self::build(ReactionKind::Logistic, fprime0, k, d)
    }

    pub fn custom(f: Arc<dyn Fn(T) -> T + Send + Sync>, fprime0: T, k: T, d: T) -> Result<Self> {
        Self::build(ReactionKind::Custom(f), fprime0, k, d)
    }

    fn build(kind: ReactionKind<T>, fprime0: T, k: T, d: T) -> Result<Self> {
        if !fprime0.is_finite() {
            return Err(Error::invalid("reaction", "f'(0) must be finite"));
        }
        // Monostable kinds need a genuinely positive growth rate at zero;
        // the linear kind is a diagnostic coefficient and may be any sign.
        if !matches!(kind, ReactionKind::Linear) && !(fprime0 > T::zero()) {
            return Err(Error::invalid("reaction", "f'(0) must be positive"));
        }
        if !(k.is_finite() && k > T::zero()) {
            return Err(Error::invalid("reaction", "K must be positive and finite"));
        }
        if !(d.is_finite() && d > T::zero()) {
            return Err(Error::invalid("reaction", "D must be positive and finite"));
        }
        let spec = ReactionSpec { kind, fprime0, k, d };
        spec.validate_kinetics()?;
        Ok(spec)
    }

    /// Sampling checks of the monostable structure. Only the custom kind can
    /// actually fail them, but every kind goes through the same gate.
    fn validate_kinetics(&self) -> Result<()> {
        if matches!(self.kind, ReactionKind::Linear) {
            return Ok(()); // no carrying-capacity structure to check
        }
        let tol_zero = T::of(1e-14);
        if self.f(T::zero()).abs() > tol_zero {
            return Err(Error::invalid("reaction", "f(0) must vanish"));
        }
        if self.f(self.k).abs() > tol_zero * (T::one() + self.fprime0 * self.k) {
            return Err(Error::invalid("reaction", "f(K) must vanish"));
        }
        // f(k)/k non-increasing on a geometric grid K·2^{-20} … K.
        let mut prev = T::infinity();
        for j in (0..=20).rev() {
            let u = self.k * T::of(0.5).powi(j);
            let ratio = self.f(u) / u;
            if ratio > prev + T::of(1e-12) * (T::one() + prev.abs()) {
                return Err(Error::invalid(
                    "reaction",
                    format!("f(k)/k increases near k = {}", u.as_f64()),
                ));
            }
            prev = ratio;
        }
        Ok(())
    }

    pub fn f(&self, u: T) -> T {
        match &self.kind {
            ReactionKind::Linear => self.fprime0 * u,
            ReactionKind::Logistic => self.fprime0 * u * (T::one() - u / self.k),
            ReactionKind::Custom(f) => f(u),
        }
    }

    pub fn kind(&self) -> &ReactionKind<T> {
        &self.kind
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, ReactionKind::Linear)
    }

    pub fn fprime0(&self) -> T {
        self.fprime0
    }

    pub fn carrying_capacity(&self) -> T {
        self.k
    }

    pub fn diffusivity(&self) -> T {
        self.d
    }
}

/// Period average of Ȧ²/(4D): the exact offset between the u- and w-form
/// principal eigenvalues.
pub fn position_dot_sq_average<T: Real>(spec: &DomainSpec<T>, d: T) -> T {
    let scale = spec.a0() * spec.omega() / T::TAU();
    if scale == T::zero() {
        return T::zero();
    }
    let a = spec.position_profile().clone();
    periodic_quadrature(
        |s| {
            let da = scale * a.derivative1(s);
            da * da
        },
        2048,
    ) / (T::of(4.0) * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    pub(crate) fn breathing(omega: f64) -> DomainSpec<f64> {
        DomainSpec::new(
            PI,
            0.0,
            PeriodicFn1::offset_sine(1.0, 1, 0.5),
            PeriodicFn1::constant(0.0),
            omega,
        )
        .unwrap()
    }

    pub(crate) fn translating(a0: f64, omega: f64) -> DomainSpec<f64> {
        DomainSpec::new(
            PI,
            a0,
            PeriodicFn1::constant(1.0),
            PeriodicFn1::offset_sine(0.0, 1, 1.0),
            omega,
        )
        .unwrap()
    }

    /// Centered finite differences of the physical length/position, the
    /// oracle for every chain-rule coefficient below.
    fn fd1(f: impl Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-6;
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    fn fd2(f: impl Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-4;
        (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
    }

    #[test]
    fn chain_rule_derivatives_match_finite_differences() {
        let omega = 1.7;
        let spec = DomainSpec::new(
            2.0,
            0.8,
            PeriodicFn1::constant(1.0).with_harmonic(1, 0.1, 0.3).with_harmonic(2, -0.05, 0.0),
            PeriodicFn1::constant(0.0).with_harmonic(1, 0.2, 1.0),
            omega,
        )
        .unwrap();
        for t in [0.0, 0.3, 1.1, 2.9] {
            assert_relative_eq!(spec.length_dot(t), fd1(|t| spec.length(t), t), max_relative = 1e-7);
            assert_relative_eq!(spec.position_dot(t), fd1(|t| spec.position(t), t), max_relative = 1e-7);
            assert_relative_eq!(spec.length_ddot(t), fd2(|t| spec.length(t), t), max_relative = 1e-5);
            assert_relative_eq!(spec.position_ddot(t), fd2(|t| spec.position(t), t), max_relative = 1e-5);
        }
    }

    #[test]
    fn u_coefficients_on_fixed_interval_are_pure_diffusion() {
        let spec = DomainSpec::fixed(PI, 1.0).unwrap();
        let (diff, adv) = spec.u_coefficients(1.0, 1.0, 0.37);
        assert_eq!(diff, 1.0);
        assert_eq!(adv, 0.0);
    }

    #[test]
    fn u_coefficients_of_breathing_interval_at_right_edge() {
        // At t = 0: L = L0, L̇(0) = L0·(0.5·2π)·(ω/2π) = 0.5·π·ω, so the
        // advection at ξ = L0 is L0·L̇/L = L̇(0) = 0.5·π·ω. Verified against
        // the finite-difference oracle rather than hand arithmetic.
        let omega = 2.0;
        let spec = breathing(omega);
        let (diff, adv) = spec.u_coefficients(1.0, PI, 0.0);
        assert_relative_eq!(diff, 1.0, max_relative = 1e-14);
        let ldot_fd = fd1(|t| spec.length(t), 0.0);
        assert_relative_eq!(adv, ldot_fd, max_relative = 1e-7);
        assert_relative_eq!(adv, 0.5 * PI * omega, max_relative = 1e-13);
    }

    #[test]
    fn u_coefficients_of_translating_interval_at_left_edge() {
        // Ȧ(0) = A0·(2π)·(ω/2π) = A0·ω; with A0 = 1 the advection at ξ = 0
        // is Ȧ·L0/L = ω.
        let omega = 3.0;
        let spec = translating(1.0, omega);
        let (_, adv) = spec.u_coefficients(1.0, 0.0, 0.0);
        assert_relative_eq!(adv, omega, max_relative = 1e-13);
        assert_relative_eq!(adv, fd1(|t| spec.position(t), 0.0), max_relative = 1e-7);
    }

    #[test]
    fn w_potential_of_translating_interval_at_quarter_period() {
        // At t = 3π/(2ω): Ä = A0·ω² and L = L0, so the potential at ξ = L0
        // is ξ·Ä·L/(2DL0) = π·ω²/2 for A0 = 1, D = 1.
        let omega = 2.0;
        let spec = translating(1.0, omega);
        let t = 1.5 * PI / omega;
        let pot = spec.w_potential(1.0, PI, t);
        assert_relative_eq!(pot, PI * omega * omega / 2.0, max_relative = 1e-10);
        let addot_fd = fd2(|t| spec.position(t), t);
        assert_relative_eq!(pot, PI * addot_fd * PI / (2.0 * PI), max_relative = 1e-5);
    }

    #[test]
    fn w_potential_vanishes_exactly_iff_domain_is_static() {
        let fixed = DomainSpec::fixed(PI, 1.0).unwrap();
        let moving = breathing(1.0);
        let mut sup_fixed: f64 = 0.0;
        let mut sup_moving: f64 = 0.0;
        for i in 0..64 {
            for j in 0..64 {
                let xi = PI * i as f64 / 63.0;
                let t = 2.0 * PI * j as f64 / 63.0;
                sup_fixed = sup_fixed.max(fixed.w_potential(1.0, xi, t).abs());
                sup_moving = sup_moving.max(moving.w_potential(1.0, xi, t).abs());
            }
        }
        assert!(sup_fixed < 1e-12, "static domain must have zero potential, sup {sup_fixed}");
        assert!(sup_moving > 1.0, "breathing domain must have a live potential");
    }

    #[test]
    fn h_factor_reduces_to_length_ratio_on_left_edge() {
        let spec = breathing(2.0);
        for t in [0.2, 0.9, 2.5] {
            let expected = (spec.length(t) / spec.length(0.0)).sqrt();
            assert_relative_eq!(spec.h_factor(1.0, 0.0, t), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn h_factor_accumulates_translation_energy_over_a_period() {
        // For A = A0 sin(ωt): ∫₀ᵀ Ȧ²/(4D) dt = A0²ω²T/(8D).
        let (a0, omega, d) = (0.5, 1.0, 1.0);
        let spec = translating(a0, omega);
        let t = spec.period();
        let expected = (a0 * omega).powi(2) * t / (8.0 * d);
        assert_relative_eq!(spec.position_dot_sq_integral(d, t), expected, max_relative = 1e-9);
        // At ξ = 0 and t = T the weight is exp of exactly that integral.
        assert_relative_eq!(spec.h_factor(d, 0.0, t), expected.exp(), max_relative = 1e-9);
    }

    #[test]
    fn position_dot_sq_average_closed_form() {
        let (a0, omega, d) = (0.5, 1.0, 1.0);
        let spec = translating(a0, omega);
        assert_relative_eq!(
            position_dot_sq_average(&spec, d),
            a0 * a0 * omega * omega / (8.0 * d),
            max_relative = 1e-12
        );
        assert_relative_eq!(position_dot_sq_average(&spec, d), 0.03125, max_relative = 1e-12);
    }

    #[test]
    fn diffusion_coefficient_is_uniformly_positive() {
        let spec = breathing(2.0 * PI);
        let lmax = 1.5 * PI;
        let floor = 1.0 * PI * PI / (lmax * lmax);
        for i in 0..33 {
            for j in 0..33 {
                let xi = PI * i as f64 / 32.0;
                let t = j as f64 / 32.0;
                let (diff, _) = spec.u_coefficients(1.0, xi, t);
                assert!(diff >= floor - 1e-12);
            }
        }
    }

    #[test]
    fn time_reverse_runs_the_geometry_backwards() {
        let spec = DomainSpec::new(
            PI,
            0.7,
            PeriodicFn1::constant(1.0).with_harmonic(1, 0.2, 0.3),
            PeriodicFn1::constant(0.0).with_harmonic(2, -0.1, 1.0),
            2.0,
        )
        .unwrap();
        let rev = spec.time_reverse();
        for t in [0.0, 0.4, 1.3] {
            assert_relative_eq!(rev.length(t), spec.length(-t), max_relative = 1e-13);
            assert_relative_eq!(rev.position(t), spec.position(-t), max_relative = 1e-13);
        }
        assert_eq!(rev.time_reverse(), spec);
    }

    #[test]
    fn degenerate_length_profile_is_rejected() {
        let err = DomainSpec::new(
            PI,
            0.0,
            PeriodicFn1::offset_sine(1.0, 1, 1.0), // touches zero
            PeriodicFn1::constant(0.0),
            1.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not positive"), "got: {err}");
    }

    #[test]
    fn logistic_reaction_satisfies_monostable_checks() {
        let r = ReactionSpec::logistic(2.0, 1.0, 1.0).unwrap();
        assert_eq!(r.f(0.0), 0.0);
        assert_eq!(r.f(1.0), 0.0);
        assert_relative_eq!(r.f(0.5), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn custom_monostable_reaction_is_accepted() {
        // f(u) = sin(πu) has f(0) = f(1) = 0 and sin(πu)/u decreasing.
        let f = Arc::new(|u: f64| (PI * u).sin());
        let r = ReactionSpec::custom(f, PI, 1.0, 1.0).unwrap();
        assert_relative_eq!(r.f(0.5), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn custom_reaction_with_increasing_ratio_is_rejected() {
        // f(u) = u² (plus a zero at K) has f(u)/u increasing.
        let f = Arc::new(|u: f64| u * u * (1.0 - u));
        let err = ReactionSpec::custom(f, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("f(k)/k"), "got: {err}");
    }

    #[test]
    fn reaction_rejects_nonvanishing_endpoints() {
        let f = Arc::new(|u: f64| u + 0.1);
        assert!(ReactionSpec::custom(f, 1.0, 1.0, 1.0).is_err());
    }
}
