//! Closed-form bounds, limits, and scaling laws for the principal periodic
//! eigenvalue, plus the audit that checks a computed μ against all of them
//! and the frequency sweep that exercises monotonicity in ω.
//!
//! All bound evaluations are pure quadratures/extremizations of the domain
//! profiles — no time stepping — so they form an independent cross-check of
//! the power-iteration eigenvalue.

use crate::domain::{position_dot_sq_average, DomainSpec};
use crate::error::{Error, Result};
use crate::floquet::{principal_eigenvalue, principal_eigenvalue_of, FloquetConfig};
use crate::periodic::{
    adaptive_periodic_quadrature, refined_extremum, sign_change_points, split_quadrature,
};
use crate::scalar::Real;
use crate::solver::{Grid1D, StepConfig, WTransport};
use serde::Serialize;

const EXTREMUM_SAMPLES: usize = 4096;
const KINK_SAMPLES: usize = 4096;

/// Time-averaged fixed-length comparison bound:
/// μ ≥ (1/T)∫₀ᵀ Dπ²/L(t)² dt = (Dπ²/L0²)·∫₀¹ l(s)⁻² ds.
pub fn lower_bound_average<T: Real>(spec: &DomainSpec<T>, d: T) -> T {
    let l = spec.length_profile().clone();
    let integral = adaptive_periodic_quadrature(move |s| {
        let v = l.value(s);
        T::one() / (v * v)
    });
    d * T::PI() * T::PI() / (spec.l0() * spec.l0()) * integral
}

/// Static-core comparison bound: if some fixed interval of width
/// `min(A+L) − max(A) > 0` sits inside the moving interval at all times,
/// then μ ≤ Dπ²/width². Returns `None` when no such interval exists.
pub fn upper_bound_inclusion<T: Real>(spec: &DomainSpec<T>, d: T) -> Option<T> {
    let l0 = spec.l0();
    let a0 = spec.a0();
    let lp = spec.length_profile().clone();
    let ap = spec.position_profile().clone();
    let (_, right_min) = refined_extremum(
        {
            let lp = lp.clone();
            let ap = ap.clone();
            move |s| a0 * ap.value(s) + l0 * lp.value(s)
        },
        EXTREMUM_SAMPLES,
        false,
    );
    let (_, left_max) = refined_extremum(move |s| a0 * ap.value(s), EXTREMUM_SAMPLES, true);
    let width = right_min - left_max;
    if width > T::zero() {
        Some(d * T::PI() * T::PI() / (width * width))
    } else {
        None
    }
}

/// Acceleration-potential envelopes at time `t`:
/// q(η) = η²·L̈L/2 + η·ÄL over η ∈ [0, 1];
/// returns (Q̄, Q) = (max q, −min q). Exact via the three candidate points
/// (endpoints and the interior vertex of the parabola).
pub fn q_envelopes<T: Real>(spec: &DomainSpec<T>, t: T) -> (T, T) {
    let len = spec.length(t);
    let qa = spec.length_ddot(t) * len * T::of(0.5);
    let qb = spec.position_ddot(t) * len;
    let mut lo = T::zero();
    let mut hi = T::zero();
    let mut consider = |v: T| {
        lo = lo.min(v);
        hi = hi.max(v);
    };
    consider(qa + qb);
    if qa != T::zero() {
        let eta = -qb / (qa + qa);
        if eta > T::zero() && eta < T::one() {
            consider(qa * eta * eta + qb * eta);
        }
    }
    (hi, -lo)
}

/// Period-phase positions where the q-envelope's active candidate can
/// switch: sign changes of the parabola's coefficients and of its endpoint
/// and vertex-crossing combinations.
fn envelope_kinks<T: Real>(spec: &DomainSpec<T>) -> Vec<T> {
    let period = spec.period();
    let coeff = |which: usize| {
        move |s: T| {
            let t = s * period;
            let len = spec.length(t);
            let qa = spec.length_ddot(t) * len * T::of(0.5);
            let qb = spec.position_ddot(t) * len;
            match which {
                0 => qa,
                1 => qb,
                2 => qa + qb,
                _ => qa + qa + qb,
            }
        }
    };
    let mut breaks: Vec<T> = Vec::new();
    for which in 0..4 {
        breaks.extend(sign_change_points(coeff(which), KINK_SAMPLES));
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < T::of(1e-9));
    breaks
}

/// Two-sided envelope window:
/// lower = avg(Dπ²/L² + Ȧ²/4D − Q̄/2D),
/// upper = avg(Dπ²/L² + Ȧ²/4D + Q/2D),
/// integrated on kink-split panels so the piecewise-smooth envelopes do not
/// degrade the quadrature order.
pub fn q_bounds<T: Real>(spec: &DomainSpec<T>, d: T) -> (T, T) {
    let period = spec.period();
    let breaks = envelope_kinks(spec);
    let four_d = T::of(4.0) * d;
    let two_d = T::of(2.0) * d;
    let smooth = |s: T| {
        let t = s * period;
        let len = spec.length(t);
        let adot = spec.position_dot(t);
        d * T::PI() * T::PI() / (len * len) + adot * adot / four_d
    };
    let lower = split_quadrature(
        |s| {
            let (q_bar, _) = q_envelopes(spec, s * period);
            smooth(s) - q_bar / two_d
        },
        &breaks,
    );
    let upper = split_quadrature(
        |s| {
            let (_, q_under) = q_envelopes(spec, s * period);
            smooth(s) + q_under / two_d
        },
        &breaks,
    );
    (lower, upper)
}

/// Eigenvalues of the advective form and the potential form side by side.
/// The exact relation is μ_u = μ_w + avg(Ȧ²/4D); `gap` is the normalized
/// defect |μ_u − μ_w − avg| / (1 + |μ_u|).
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct WRelation<T> {
    pub mu_u: T,
    pub mu_w: T,
    pub adot_sq_average: T,
    pub gap: T,
}

pub fn mu_w_relation<T: Real>(
    spec: &DomainSpec<T>,
    d: T,
    grid: &Grid1D<T>,
    step: &StepConfig<T>,
    fl: &FloquetConfig<T>,
) -> Result<WRelation<T>> {
    let mu_u = principal_eigenvalue(spec, d, grid, step, fl)?.mu;
    let mu_w = principal_eigenvalue_of(grid, &WTransport::new(spec, d), step, fl)?.mu;
    let adot_sq_average = position_dot_sq_average(spec, d);
    let gap = (mu_u - mu_w - adot_sq_average).abs() / (T::one() + mu_u.abs());
    Ok(WRelation {
        mu_u,
        mu_w,
        adot_sq_average,
        gap,
    })
}

/// Profile integrals governing the high-frequency behaviour:
/// c1 = ∫l⁻², c2 = ∫(a′)², c3 = ∫l·[a″]⁺, c4 = ∫l·[l″]⁺,
/// c5 = ∫l·[a″]⁻, c6 = ∫l·[l″]⁻ over one unit period of phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct AsymptoticConstants<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
    pub c5: T,
    pub c6: T,
}

pub fn asymptotic_constants<T: Real>(spec: &DomainSpec<T>) -> AsymptoticConstants<T> {
    let l = spec.length_profile().clone();
    let a = spec.position_profile().clone();
    let c1 = {
        let l = l.clone();
        adaptive_periodic_quadrature(move |s| {
            let v = l.value(s);
            T::one() / (v * v)
        })
    };
    let c2 = {
        let a = a.clone();
        adaptive_periodic_quadrature(move |s| {
            let v = a.derivative1(s);
            v * v
        })
    };
    let a_kinks = sign_change_points(|s| a.derivative2(s), KINK_SAMPLES);
    let l_kinks = sign_change_points(|s| l.derivative2(s), KINK_SAMPLES);
    let c3 = split_quadrature(|s| l.value(s) * a.derivative2(s).max(T::zero()), &a_kinks);
    let c5 = split_quadrature(|s| l.value(s) * (-a.derivative2(s)).max(T::zero()), &a_kinks);
    let c4 = split_quadrature(|s| l.value(s) * l.derivative2(s).max(T::zero()), &l_kinks);
    let c6 = split_quadrature(|s| l.value(s) * (-l.derivative2(s)).max(T::zero()), &l_kinks);
    AsymptoticConstants {
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
    }
}

/// Frequency-scaling window:
/// lower(ω) = Dπ²c1/L0² + (ω/2π)²·(A0²c2/4D − A0L0c3/2D − L0²c4/4D),
/// upper(ω) = Dπ²c1/L0² + (ω/2π)²·(A0²c2/4D + A0L0c5/2D + L0²c6/4D).
/// A positive ω² coefficient on the lower side certifies μ = Θ(ω²); the
/// upper side alone gives μ = O(ω²).
pub fn omega_scaling_window<T: Real>(spec: &DomainSpec<T>, d: T, omega: T) -> (T, T) {
    let c = asymptotic_constants(spec);
    scaling_window_from(&c, spec.l0(), spec.a0(), d, omega)
}

/// Same window evaluated from precomputed constants (for sweeps).
pub fn scaling_window_from<T: Real>(
    c: &AsymptoticConstants<T>,
    l0: T,
    a0: T,
    d: T,
    omega: T,
) -> (T, T) {
    let base = d * T::PI() * T::PI() * c.c1 / (l0 * l0);
    let freq = omega / T::TAU();
    let freq2 = freq * freq;
    let four_d = T::of(4.0) * d;
    let two_d = T::of(2.0) * d;
    let lower = base + freq2 * (a0 * a0 * c.c2 / four_d - a0 * l0 * c.c3 / two_d - l0 * l0 * c.c4 / four_d);
    let upper = base + freq2 * (a0 * a0 * c.c2 / four_d + a0 * l0 * c.c5 / two_d + l0 * l0 * c.c6 / four_d);
    (lower, upper)
}

/// Quasi-static limit of μ as ω → 0: the phase average of the frozen-domain
/// eigenvalue, ∫₀¹ Dπ²/(L0·l(s))² ds. Coincides with
/// [`lower_bound_average`] on intervals.
pub fn omega_zero_limit<T: Real>(spec: &DomainSpec<T>, d: T) -> T {
    lower_bound_average(spec, d)
}

/// Which side of μ a bound constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// One audited bound: its value, side, signed margin (μ − bound for lower
/// bounds, bound − μ for upper; negative means violated beyond slack only
/// if `passed` is false), and the verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct BoundCheck<T> {
    pub name: &'static str,
    pub side: BoundSide,
    pub bound: T,
    pub margin: T,
    pub passed: bool,
}

/// Full audit of a computed μ against every applicable closed-form bound.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct BoundsReport<T> {
    pub mu_computed: T,
    pub lower_avg: T,
    pub upper_inclusion: Option<T>,
    pub q_lower: T,
    pub q_upper: T,
    pub slack: T,
    pub flags: Vec<BoundCheck<T>>,
}

impl<T: Real> BoundsReport<T> {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }
}

/// Audit `mu` against the average lower bound, the inclusion upper bound
/// (when it applies), and the two-sided envelope window, each with slack
/// 1e-6·(1 + |μ|).
pub fn audit<T: Real>(spec: &DomainSpec<T>, d: T, mu: T) -> BoundsReport<T> {
    let lower_avg = lower_bound_average(spec, d);
    let upper_inclusion = upper_bound_inclusion(spec, d);
    let (q_lower, q_upper) = q_bounds(spec, d);
    let slack = T::of(1e-6) * (T::one() + mu.abs());
    let mut flags = Vec::new();
    let mut check = |name: &'static str, side: BoundSide, bound: T| {
        let margin = match side {
            BoundSide::Lower => mu - bound,
            BoundSide::Upper => bound - mu,
        };
        flags.push(BoundCheck {
            name,
            side,
            bound,
            margin,
            passed: margin >= -slack,
        });
    };
    check("lower-average", BoundSide::Lower, lower_avg);
    if let Some(b) = upper_inclusion {
        check("upper-inclusion", BoundSide::Upper, b);
    }
    check("window-lower", BoundSide::Lower, q_lower);
    check("window-upper", BoundSide::Upper, q_upper);
    BoundsReport {
        mu_computed: mu,
        lower_avg,
        upper_inclusion,
        q_lower,
        q_upper,
        slack,
        flags,
    }
}

/// One frequency of a sweep. `mu` and `error` are mutually exclusive: a
/// failed eigen-solve is recorded, not fatal.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct SweepPoint<T> {
    pub omega: T,
    pub steps_per_period: usize,
    pub mu: Option<T>,
    pub error: Option<String>,
    pub q_lower: T,
    pub q_upper: T,
    pub scaling_lower: T,
    pub scaling_upper: T,
}

/// Sweep result: per-ω values plus the ω-independent bounds and verdicts.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct SweepReport<T> {
    pub points: Vec<SweepPoint<T>>,
    pub lower_avg: T,
    pub upper_inclusion: Option<T>,
    pub zero_limit: T,
    /// |μ(smallest ω) − zero_limit|, when that point solved.
    pub zero_gap: Option<T>,
    /// μ(ω_{k+1}) ≥ μ(ω_k) − slack_k across consecutive solved points,
    /// slack_k = 1e6·tol·(1 + |μ(ω_k)|).
    pub monotone: bool,
}

/// Eigen-solve μ over a strictly increasing frequency grid, in parallel.
///
/// The step size is locked across the sweep: the configured
/// steps-per-period applies at the largest ω and smaller frequencies scale
/// it up so dt is identical everywhere. This removes the dt-dependent bias
/// from cross-ω comparisons — a time-independent domain then reports the
/// same μ at every ω to solver precision.
pub fn sweep<T: Real>(
    spec: &DomainSpec<T>,
    d: T,
    omegas: &[T],
    grid: &Grid1D<T>,
    step_at_max: &StepConfig<T>,
    fl: &FloquetConfig<T>,
) -> Result<SweepReport<T>> {
    if omegas.is_empty() {
        return Err(Error::invalid("sweep", "need at least one frequency"));
    }
    for w in omegas.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("sweep", "frequencies must be strictly increasing"));
        }
    }
    if !(omegas[0] > T::zero()) {
        return Err(Error::invalid("sweep", "frequencies must be positive"));
    }
    let omega_max = omegas[omegas.len() - 1];
    let constants = asymptotic_constants(spec);
    let base_nt = step_at_max.steps_per_period();
    let theta = step_at_max.theta();

    use rayon::prelude::*;
    let points: Vec<SweepPoint<T>> = omegas
        .par_iter()
        .map(|&omega| {
            let nt = ((T::of_usize(base_nt) * omega_max / omega).as_f64().round() as usize).max(32);
            let local = spec
                .with_omega(omega)
                .expect("validated geometry stays valid under a frequency change");
            let (q_lower, q_upper) = q_bounds(&local, d);
            let (scaling_lower, scaling_upper) =
                scaling_window_from(&constants, spec.l0(), spec.a0(), d, omega);
            let solved = StepConfig::new(nt, theta)
                .and_then(|step| principal_eigenvalue(&local, d, grid, &step, fl));
            let (mu, error) = match solved {
                Ok(r) => (Some(r.mu), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepPoint {
                omega,
                steps_per_period: nt,
                mu,
                error,
                q_lower,
                q_upper,
                scaling_lower,
                scaling_upper,
            }
        })
        .collect();

    let lower_avg = lower_bound_average(spec, d);
    let upper_inclusion = upper_bound_inclusion(spec, d);
    let zero_limit = omega_zero_limit(spec, d);
    let zero_gap = points[0].mu.map(|m| (m - zero_limit).abs());
    let slack_factor = T::of(1e6) * fl.tol;
    let mut monotone = true;
    let solved: Vec<T> = points.iter().filter_map(|p| p.mu).collect();
    for pair in solved.windows(2) {
        let slack = slack_factor * (T::one() + pair[0].abs());
        if pair[1] < pair[0] - slack {
            monotone = false;
        }
    }
    Ok(SweepReport {
        points,
        lower_avg,
        upper_inclusion,
        zero_limit,
        zero_gap,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::PeriodicFn1;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fixed() -> DomainSpec<f64> {
        DomainSpec::fixed(PI, 2.0 * PI).unwrap()
    }

    fn breathing(omega: f64) -> DomainSpec<f64> {
        DomainSpec::new(
            PI,
            0.0,
            PeriodicFn1::offset_sine(1.0, 1, 0.5),
            PeriodicFn1::constant(0.0),
            omega,
        )
        .unwrap()
    }

    fn translating(a0: f64, omega: f64) -> DomainSpec<f64> {
        DomainSpec::new(
            PI,
            a0,
            PeriodicFn1::constant(1.0),
            PeriodicFn1::offset_sine(0.0, 1, 1.0),
            omega,
        )
        .unwrap()
    }

    #[test]
    fn lower_average_closed_forms() {
        assert_relative_eq!(lower_bound_average(&fixed(), 1.0), 1.0, max_relative = 1e-13);
        // ∫(1+0.5 sin)⁻² = (1−0.25)^{−3/2}.
        assert_relative_eq!(
            lower_bound_average(&breathing(2.0 * PI), 1.0),
            1.539600717839002,
            max_relative = 1e-12
        );
        // Position motion does not enter the length average.
        assert_relative_eq!(
            lower_bound_average(&translating(0.5, 1.0), 1.0),
            1.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn inclusion_bound_widths() {
        assert_relative_eq!(upper_bound_inclusion(&fixed(), 1.0).unwrap(), 1.0, max_relative = 1e-12);
        // Breathing to half width: common core (0, π/2), bound π²/(π/2)² = 4.
        assert_relative_eq!(
            upper_bound_inclusion(&breathing(2.0 * PI), 1.0).unwrap(),
            4.0,
            max_relative = 1e-9
        );
        // A0 = L0: left edge sweeps past the right edge's minimum — no core.
        assert!(upper_bound_inclusion(&translating(PI, 1.0), 1.0).is_none());
        // A0 = 0.5: width = π − 2·0.5 = π − 1.
        assert_relative_eq!(
            upper_bound_inclusion(&translating(0.5, 1.0), 1.0).unwrap(),
            PI * PI / ((PI - 1.0) * (PI - 1.0)),
            max_relative = 1e-9
        );
    }

    #[test]
    fn envelopes_of_static_domain_vanish() {
        let (hi, lo) = q_envelopes(&fixed(), 0.3);
        assert_eq!((hi, lo), (0.0, 0.0));
    }

    #[test]
    fn envelopes_of_position_oscillation_pick_the_linear_term() {
        // q(η) = η·Ä·L with Ä = −A0ω² sin(ωt).
        let a0 = 0.5;
        let omega = 1.0;
        let spec = translating(a0, omega);
        let amp = a0 * PI * omega * omega;
        let (hi, lo) = q_envelopes(&spec, 3.0 * PI / (2.0 * omega));
        assert_relative_eq!(hi, amp, max_relative = 1e-10);
        assert!(lo.abs() <= 1e-12);
        let (hi2, lo2) = q_envelopes(&spec, PI / (2.0 * omega));
        assert!(hi2.abs() <= 1e-12);
        assert_relative_eq!(lo2, amp, max_relative = 1e-10);
    }

    #[test]
    fn envelope_window_of_position_oscillation() {
        // Frozen arithmetic: avg = 1 + 1/32 ∓ A0ω²/2 at A0=0.5, ω=1, D=1.
        let spec = translating(0.5, 1.0);
        let (lower, upper) = q_bounds(&spec, 1.0);
        assert_relative_eq!(lower, 0.78125, max_relative = 1e-9);
        assert_relative_eq!(upper, 1.28125, max_relative = 1e-9);
    }

    #[test]
    fn envelope_window_of_breathing_interval() {
        // Closed forms: avg(Q̄/2D) = L0²εω²(1−επ/4)/(4πD) and
        // avg(Q/2D) = L0²εω²(1+επ/4)/(4πD).
        let eps = 0.5;
        let omega = 2.0 * PI;
        let spec = breathing(omega);
        let base = 1.539600717839002;
        let arm = PI * PI * eps * omega * omega / (4.0 * PI);
        let (lower, upper) = q_bounds(&spec, 1.0);
        assert_relative_eq!(lower, base - arm * (1.0 - eps * PI / 4.0), max_relative = 1e-9);
        assert_relative_eq!(upper, base + arm * (1.0 + eps * PI / 4.0), max_relative = 1e-9);
    }

    #[test]
    fn envelope_window_of_static_domain_collapses_to_the_eigenvalue() {
        let (lower, upper) = q_bounds(&fixed(), 1.0);
        assert_relative_eq!(lower, 1.0, max_relative = 1e-12);
        assert_relative_eq!(upper, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn asymptotic_constants_of_position_profile() {
        let c = asymptotic_constants(&translating(1.0, 1.0));
        assert_relative_eq!(c.c1, 1.0, max_relative = 1e-13);
        assert_relative_eq!(c.c2, 2.0 * PI * PI, max_relative = 1e-11);
        assert_relative_eq!(c.c3, 4.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(c.c5, 4.0 * PI, max_relative = 1e-10);
        assert!(c.c4.abs() <= 1e-12 && c.c6.abs() <= 1e-12);
    }

    #[test]
    fn asymptotic_constants_of_breathing_profile() {
        // Direct integration gives c4 = 2π − π²/4 and c6 = 2π + π²/4:
        // the two positive/negative parts weight l differently, so they are
        // NOT equal despite the symmetry of the sine (the product l·[l″]^±
        // breaks it).
        let c = asymptotic_constants(&breathing(2.0 * PI));
        assert_relative_eq!(c.c1, 1.539600717839002, max_relative = 1e-11);
        assert!(c.c2.abs() <= 1e-12 && c.c3.abs() <= 1e-12 && c.c5.abs() <= 1e-12);
        assert_relative_eq!(c.c4, 2.0 * PI - PI * PI / 4.0, max_relative = 1e-9);
        assert_relative_eq!(c.c6, 2.0 * PI + PI * PI / 4.0, max_relative = 1e-9);
    }

    #[test]
    fn scaling_window_of_wide_position_oscillation() {
        // A0/L0 = 2: coefficients (π²/2 − π) and (π²/2 + π) on ω².
        let spec = translating(2.0 * PI, 1.0);
        let (lo1, up1) = omega_scaling_window(&spec, 1.0, 1.0);
        assert_relative_eq!(lo1, 1.0 + (PI * PI / 2.0 - PI), max_relative = 1e-9);
        assert_relative_eq!(up1, 1.0 + (PI * PI / 2.0 + PI), max_relative = 1e-9);
        let (lo8, up8) = omega_scaling_window(&spec, 1.0, 8.0);
        assert_relative_eq!(lo8 - 1.0, 64.0 * (lo1 - 1.0), max_relative = 1e-9);
        assert_relative_eq!(up8 - 1.0, 64.0 * (up1 - 1.0), max_relative = 1e-9);
        // Positive ω² coefficient on the lower side ⇔ Θ(ω²) growth.
        assert!(lo1 - 1.0 > 0.0);
    }

    #[test]
    fn scaling_window_is_degenerate_for_static_domain() {
        let (lo, up) = omega_scaling_window(&fixed(), 1.0, 5.0);
        assert_relative_eq!(lo, 1.0, max_relative = 1e-12);
        assert_relative_eq!(up, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_limit_equals_lower_average() {
        for spec in [fixed(), breathing(2.0 * PI), translating(0.5, 1.0)] {
            let a = omega_zero_limit(&spec, 1.0);
            let b = lower_bound_average(&spec, 1.0);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn zero_limit_of_cosine_profile_matches_quadrature() {
        let spec = DomainSpec::new(
            PI,
            0.0,
            PeriodicFn1::constant(1.0).with_harmonic(1, 0.3, 0.0),
            PeriodicFn1::constant(0.0),
            1.0,
        )
        .unwrap();
        let brute: f64 = (0..8192)
            .map(|i| {
                let s = (i as f64 + 0.5) / 8192.0;
                (1.0 + 0.3 * (2.0 * PI * s).cos()).powi(-2)
            })
            .sum::<f64>()
            / 8192.0;
        assert_relative_eq!(omega_zero_limit(&spec, 1.0), brute, max_relative = 1e-10);
    }

    #[test]
    fn relation_between_forms_on_position_fixture() {
        let spec = translating(0.5, 1.0);
        let grid = Grid1D::new(PI, 200).unwrap();
        let step = StepConfig::crank_nicolson(800).unwrap();
        let rel = mu_w_relation(&spec, 1.0, &grid, &step, &FloquetConfig::default()).unwrap();
        assert_relative_eq!(rel.adot_sq_average, 0.03125, max_relative = 1e-12);
        assert!(rel.gap <= 1e-5, "gap {}", rel.gap);
        assert!(rel.mu_u > rel.mu_w, "advective form must sit above by the Ȧ² average");
    }

    #[test]
    fn relation_on_fixed_domain_is_exact() {
        let spec = fixed();
        let grid = Grid1D::new(PI, 100).unwrap();
        let step = StepConfig::crank_nicolson(128).unwrap();
        let rel = mu_w_relation(&spec, 1.0, &grid, &step, &FloquetConfig::default()).unwrap();
        // Identical discrete operators: gap limited only by solver tolerance.
        assert!(rel.gap <= 1e-10, "gap {}", rel.gap);
    }

    #[test]
    fn audit_passes_for_honest_eigenvalue_and_flags_a_fake() {
        let spec = breathing(2.0 * PI);
        let grid = Grid1D::new(PI, 200).unwrap();
        let step = StepConfig::crank_nicolson(800).unwrap();
        let mu = principal_eigenvalue(&spec, 1.0, &grid, &step, &FloquetConfig::default())
            .unwrap()
            .mu;
        let report = audit(&spec, 1.0, mu);
        assert!(report.all_pass(), "flags: {:?}", report.flags);
        assert_eq!(report.flags.len(), 4);

        let fake = audit(&spec, 1.0, 5.0); // above the inclusion bound 4.0
        assert!(!fake.all_pass());
        let failed: Vec<_> = fake.flags.iter().filter(|f| !f.passed).map(|f| f.name).collect();
        assert!(failed.contains(&"upper-inclusion"));
    }

    #[test]
    fn sweep_of_static_domain_is_flat_and_monotone() {
        let spec = fixed();
        let grid = Grid1D::new(PI, 100).unwrap();
        let step = StepConfig::crank_nicolson(128).unwrap();
        let report = sweep(
            &spec,
            1.0,
            &[1.0, 2.0, 4.0],
            &grid,
            &step,
            &FloquetConfig::default(),
        )
        .unwrap();
        assert!(report.monotone);
        let mus: Vec<f64> = report.points.iter().map(|p| p.mu.unwrap()).collect();
        // dt-locked: the discrete eigenvalue is identical across ω.
        assert!((mus[0] - mus[1]).abs() <= 1e-9 && (mus[1] - mus[2]).abs() <= 1e-9);
        assert_eq!(report.points[0].steps_per_period, 512);
        assert_eq!(report.points[2].steps_per_period, 128);
        assert!(report.zero_gap.unwrap() <= 1e-3);
    }

    #[test]
    fn sweep_of_breathing_domain_is_increasing() {
        let spec = breathing(1.0);
        let grid = Grid1D::new(PI, 100).unwrap();
        let step = StepConfig::crank_nicolson(64).unwrap();
        let report = sweep(
            &spec,
            1.0,
            &[2.0, 4.0, 8.0],
            &grid,
            &step,
            &FloquetConfig::default(),
        )
        .unwrap();
        assert!(report.monotone);
        let mus: Vec<f64> = report.points.iter().map(|p| p.mu.unwrap()).collect();
        assert!(mus[0] < mus[1] && mus[1] < mus[2], "{mus:?}");
        assert_relative_eq!(report.lower_avg, 1.539600717839002, max_relative = 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_frequency_grids() {
        let spec = fixed();
        let grid = Grid1D::new(PI, 64).unwrap();
        let step = StepConfig::crank_nicolson(64).unwrap();
        let fl = FloquetConfig::default();
        assert!(sweep(&spec, 1.0, &[], &grid, &step, &fl).is_err());
        assert!(sweep(&spec, 1.0, &[2.0, 1.0], &grid, &step, &fl).is_err());
        assert!(sweep(&spec, 1.0, &[0.0, 1.0], &grid, &step, &fl).is_err());
    }

    #[test]
    fn sweep_records_per_point_failures_without_aborting() {
        // An unattainable tolerance fails every point; the sweep must still
        // return a full report with errors recorded.
        let spec = breathing(1.0);
        let grid = Grid1D::new(PI, 64).unwrap();
        let step = StepConfig::crank_nicolson(64).unwrap();
        let fl = FloquetConfig {
            tol: 1e-16,
            max_periods: 2,
        };
        let report = sweep(&spec, 1.0, &[1.0, 2.0], &grid, &step, &fl).unwrap();
        assert!(report.points.iter().all(|p| p.mu.is_none() && p.error.is_some()));
        assert!(report.monotone, "vacuously monotone with no solved points");
        assert!(report.zero_gap.is_none());
    }
}
