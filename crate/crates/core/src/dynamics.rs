//! Monostable reaction–diffusion dynamics on the periodic moving interval.
//!
//! The principal periodic eigenvalue μ of the diffusion operator splits the
//! behaviour sharply: if f′(0) < μ every solution dies out; if f′(0) > μ
//! there is a unique positive periodic solution u* and every non-trivial
//! solution in [0, K] converges to it. This module realizes that dichotomy
//! constructively: the period (Poincaré) map is monotone and sublinear, u*
//! is found by squeezing it between a constant supersolution K and a small
//! multiple of the linear periodic mode, and the approach/decay rates are
//! measured and compared against the spectral prediction.
//!
//! All bracketing runs should use the fully implicit step (θ = 1): that
//! discretization inherits the comparison principle exactly, so the
//! monotone machinery is justified at the discrete level, not just in the
//! continuum limit.

use crate::domain::{DomainSpec, ReactionSpec};
use crate::error::{Error, Result};
use crate::floquet::{lsq_slope, principal_eigenvalue, FloquetConfig, FloquetResult};
use crate::scalar::Real;
use crate::solver::{
    evolve_nonlinear, step_linear, step_nonlinear, Field, Grid1D, StepConfig, UTransport,
};

/// Sup-norm agreement at which the two-sided bracket is declared closed.
const BRACKET_GAP: f64 = 1e-6;
/// Periodicity defect allowed in the returned periodic solution.
const PERIODICITY_TOL: f64 = 1e-6;
/// Eigenvalue-threshold slack factor: f′(0) must exceed μ by more than
/// 1e-4·(1 + |μ|) before the supercritical machinery is allowed to run.
const THRESHOLD_SLACK: f64 = 1e-4;

/// The positive periodic solution u*: one period of snapshots, the defect
/// between its endpoints, and its minimum interior value at t = 0.
#[derive(Clone, Debug)]
pub struct PeriodicSolution<T> {
    pub snapshots: Vec<Field<T>>,
    pub periodicity_residual: T,
    pub floor: T,
    /// Bracket iterations used before the gap closed.
    pub iterations: usize,
    /// sup|upper_n − lower_n| after each iteration.
    pub gap_history: Vec<T>,
}

impl<T: Real> PeriodicSolution<T> {
    /// u*(·, 0).
    pub fn initial(&self) -> &Field<T> {
        &self.snapshots[0]
    }
}

fn require_in_band<T: Real>(u0: &Field<T>, k: T) -> Result<()> {
    for (i, &v) in u0.values.iter().enumerate() {
        if v < T::zero() || v > k * (T::one() + T::of(1e-12)) {
            return Err(Error::RangeViolation {
                node: i + 1,
                value: v.as_f64(),
                lo: 0.0,
                hi: k.as_f64(),
                time: u0.time.as_f64(),
            });
        }
    }
    Ok(())
}

/// The period map: nonlinear evolution over exactly one period.
pub fn poincare_map<T: Real>(
    u0: &Field<T>,
    grid: &Grid1D<T>,
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    step: &StepConfig<T>,
) -> Result<Field<T>> {
    require_in_band(u0, reaction.carrying_capacity())?;
    evolve_nonlinear(u0, grid, spec, reaction, u0.time + spec.period(), step)
}

/// Find the positive periodic solution by the two-sided monotone bracket.
///
/// The upper sequence starts from the constant supersolution u ≡ K and
/// decreases; the lower starts from a small multiple of the linear periodic
/// mode (scaled to sup = 1e-3·K) and increases. Both converge to the same
/// limit when f′(0) > μ; the bracket closes when they agree to 1e-6 in
/// sup-norm.
pub fn find_periodic_solution<T: Real>(
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    grid: &Grid1D<T>,
    step: &StepConfig<T>,
    fl: &FloquetConfig<T>,
    max_iters: usize,
) -> Result<PeriodicSolution<T>> {
    if max_iters < 64 {
        return Err(Error::invalid("periodic solution", "need max_iters >= 64"));
    }
    let d = reaction.diffusivity();
    let k = reaction.carrying_capacity();
    let fprime0 = reaction.fprime0();
    let linear = principal_eigenvalue(spec, d, grid, step, fl)?;
    let slack = T::of(THRESHOLD_SLACK) * (T::one() + linear.mu.abs());
    if fprime0 <= linear.mu + slack {
        return Err(Error::ThresholdNotExceeded {
            fprime0: fprime0.as_f64(),
            mu: linear.mu.as_f64(),
            slack: slack.as_f64(),
        });
    }

    let mut upper = Field::constant(grid, T::zero(), k);
    let mut lower = linear.phi_snapshots[0].clone();
    lower.scale(T::of(1e-3) * k / lower.sup_norm());
    lower.time = T::zero();

    let mut gap_history = Vec::new();
    let mut closed_at = None;
    for n in 1..=max_iters {
        upper = poincare_map(&upper, grid, spec, reaction, step)?;
        lower = poincare_map(&lower, grid, spec, reaction, step)?;
        upper.time = T::zero();
        lower.time = T::zero();
        let gap = upper.sup_distance(&lower);
        gap_history.push(gap);
        if gap <= T::of(BRACKET_GAP) {
            closed_at = Some(n);
            break;
        }
    }
    let iterations = closed_at.ok_or_else(|| Error::NoConvergence {
        max_periods: max_iters,
        residual: gap_history.last().map(|g| g.as_f64()).unwrap_or(f64::NAN),
    })?;

    // Record one period of the common limit.
    let nt = step.steps_per_period();
    let period = spec.period();
    let dt = period / T::of_usize(nt);
    let mut snapshots = Vec::with_capacity(nt + 1);
    let mut current = upper.clone();
    snapshots.push(current.clone());
    for j in 0..nt {
        current.time = period * T::of_usize(j) / T::of_usize(nt);
        current = step_nonlinear(&current, grid, spec, reaction, dt, step.theta())?;
        snapshots.push(current.clone());
    }
    let periodicity_residual = snapshots[nt].sup_distance(&snapshots[0]);
    if periodicity_residual > T::of(PERIODICITY_TOL) {
        return Err(Error::NoConvergence {
            max_periods: iterations,
            residual: periodicity_residual.as_f64(),
        });
    }
    let floor = snapshots[0].min_value();
    if !(floor > T::zero()) {
        return Err(Error::PositivityLost { min: floor.as_f64() });
    }
    let ceiling = k + T::of(1e-8);
    for snap in &snapshots {
        for &v in &snap.values {
            if v > ceiling {
                return Err(Error::RangeViolation {
                    node: 0,
                    value: v.as_f64(),
                    lo: 0.0,
                    hi: k.as_f64(),
                    time: snap.time.as_f64(),
                });
            }
        }
    }
    Ok(PeriodicSolution {
        snapshots,
        periodicity_residual,
        floor,
        iterations,
        gap_history,
    })
}

/// Observed sup-norm decay of a subcritical run.
#[derive(Clone, Debug)]
pub struct DecayFit<T> {
    /// Positive decay rate fitted to log sup-norm over the trailing half of
    /// the horizon: sup ~ e^{−rate·t}.
    pub rate: T,
    pub sup_start: T,
    pub sup_end: T,
    /// sup-norm at each period end, 1-indexed by period.
    pub sup_series: Vec<T>,
}

/// Evolve u0 = 0.5·K·sin(πξ/L0) under subcritical kinetics and fit the
/// extinction rate. The caller is responsible for f′(0) < μ; the fit itself
/// carries the verdict (a positive rate close to μ − f′(0)).
pub fn extinction_experiment<T: Real>(
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    grid: &Grid1D<T>,
    step: &StepConfig<T>,
    horizon_periods: usize,
) -> Result<DecayFit<T>> {
    if horizon_periods < 4 {
        return Err(Error::invalid("extinction", "need at least 4 periods"));
    }
    let k = reaction.carrying_capacity();
    let mut u = Field::half_sine(grid, T::zero());
    u.scale(T::of(0.5) * k);
    let sup_start = u.sup_norm();
    let period = spec.period();
    let mut sup_series = Vec::with_capacity(horizon_periods);
    let mut xs = Vec::with_capacity(horizon_periods);
    for n in 1..=horizon_periods {
        u = poincare_map(&u, grid, spec, reaction, step)?;
        u.time = T::zero();
        sup_series.push(u.sup_norm());
        xs.push(period * T::of_usize(n));
    }
    let sup_end = *sup_series.last().unwrap();
    let half = horizon_periods / 2;
    let ys: Vec<T> = sup_series[half..].iter().map(|s| s.ln()).collect();
    let rate = -lsq_slope(&xs[half..], &ys);
    Ok(DecayFit {
        rate,
        sup_start,
        sup_end,
        sup_series,
    })
}

/// Distances of a supercritical trajectory to the periodic solution.
#[derive(Clone, Debug)]
pub struct ConvergenceSeries<T> {
    /// d_n = sup|u(·, nT) − u*(·, 0)| for n = 1..horizon.
    pub distances: Vec<T>,
    /// Discrete H¹-type seminorm of the final difference (reported, not
    /// gated: the sup-norm carries the verdict).
    pub h1_final: T,
    pub final_distance: T,
    /// Largest d_{n+1}/d_n over the last quarter of the horizon (None if
    /// the trailing distances vanish identically).
    pub tail_ratio: Option<T>,
}

fn h1_seminorm<T: Real>(a: &Field<T>, b: &Field<T>, grid: &Grid1D<T>) -> T {
    let h = grid.spacing();
    let m = grid.m();
    let mut acc = T::zero();
    let mut prev = T::zero(); // wall value
    for i in 0..=m {
        let cur = if i < m { a.values[i] - b.values[i] } else { T::zero() };
        let slope = (cur - prev) / h;
        acc += slope * slope * h;
        prev = cur;
    }
    acc.sqrt()
}

/// Iterate the period map from `u0` and measure the sup-norm distance to
/// u*(·, 0) at every period end.
pub fn convergence_experiment<T: Real>(
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    grid: &Grid1D<T>,
    step: &StepConfig<T>,
    u0: &Field<T>,
    horizon_periods: usize,
    ustar: &PeriodicSolution<T>,
) -> Result<ConvergenceSeries<T>> {
    if horizon_periods < 4 {
        return Err(Error::invalid("convergence", "need at least 4 periods"));
    }
    if !(u0.sup_norm() > T::zero()) {
        return Err(Error::invalid("convergence", "start state must not vanish"));
    }
    require_in_band(u0, reaction.carrying_capacity())?;
    let target = ustar.initial();
    let mut u = u0.clone();
    u.time = T::zero();
    let mut distances = Vec::with_capacity(horizon_periods);
    for _ in 0..horizon_periods {
        u = poincare_map(&u, grid, spec, reaction, step)?;
        u.time = T::zero();
        distances.push(u.sup_distance(target));
    }
    let final_distance = *distances.last().unwrap();
    let h1_final = h1_seminorm(&u, target, grid);
    let quarter = (3 * horizon_periods) / 4;
    let mut tail_ratio: Option<T> = None;
    for w in distances[quarter..].windows(2) {
        if w[0] > T::zero() {
            let r = w[1] / w[0];
            tail_ratio = Some(tail_ratio.map_or(r, |m: T| m.max(r)));
        }
    }
    Ok(ConvergenceSeries {
        distances,
        h1_final,
        final_distance,
        tail_ratio,
    })
}

/// Energy-inequality audit along a linear trajectory.
#[derive(Clone, Debug)]
pub struct EnergyReport<T> {
    /// max over steps of [E_{k+1}/(E_k·bound_k) − 1]⁺ where
    /// bound_k = exp(2∫(f′(0) − Dπ²/L²)) over the step.
    pub max_violation: T,
    /// E at each period end (index n = 0..horizon).
    pub period_energies: Vec<T>,
}

/// March the linearized equation (kinetics f′(0)·u) from the half-sine and
/// check the differential energy inequality step by step:
/// E(t) = ½∫_{Ω(t)} ψ² dx must satisfy
/// E(t_{k+1}) ≤ E(t_k)·exp(2∫_{t_k}^{t_{k+1}} (f′(0) − Dπ²/L(τ)²) dτ).
pub fn energy_diagnostic<T: Real>(
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    grid: &Grid1D<T>,
    step: &StepConfig<T>,
    horizon_periods: usize,
) -> Result<EnergyReport<T>> {
    if !reaction.is_linear() {
        return Err(Error::invalid(
            "energy diagnostic",
            "defined along linear trajectories only",
        ));
    }
    if horizon_periods < 1 {
        return Err(Error::invalid("energy diagnostic", "need at least one period"));
    }
    let d = reaction.diffusivity();
    let growth0 = reaction.fprime0();
    let transport = UTransport::with_potential(spec, d, move |_: T, _: T| growth0);
    let period = spec.period();
    let nt = step.steps_per_period();
    let dt = period / T::of_usize(nt);
    let pi2_d = d * T::PI() * T::PI();
    let half = T::of(0.5);
    let energy = |u: &Field<T>, t: T| -> T {
        let sum: T = u.values.iter().map(|&v| v * v).sum();
        half * (spec.length(t) / spec.l0()) * grid.spacing() * sum
    };
    // 2-point Gauss–Legendre on each step for ∫(f′(0) − Dπ²/L²).
    let gauss = T::of(0.5773502691896258);
    let rate_integral = |t0: T, t1: T| -> T {
        let mid = half * (t0 + t1);
        let rad = half * (t1 - t0) * gauss;
        let g = |t: T| {
            let len = spec.length(t);
            growth0 - pi2_d / (len * len)
        };
        half * (t1 - t0) * (g(mid - rad) + g(mid + rad))
    };

    let mut u = Field::half_sine(grid, T::zero());
    let mut e_prev = energy(&u, T::zero());
    let mut max_violation = T::zero();
    let mut period_energies = Vec::with_capacity(horizon_periods + 1);
    period_energies.push(e_prev);
    for n in 0..horizon_periods {
        for j in 0..nt {
            let t0 = period * (T::of_usize(n) + T::of_usize(j) / T::of_usize(nt));
            let t1 = t0 + dt;
            u.time = t0;
            u = step_linear(&u, grid, &transport, dt, step.theta())?;
            let e_next = energy(&u, t1);
            let bound = e_prev * (T::of(2.0) * rate_integral(t0, t1)).exp();
            if bound > T::zero() {
                let violation = e_next / bound - T::one();
                max_violation = max_violation.max(violation);
            }
            e_prev = e_next;
        }
        period_energies.push(e_prev);
    }
    Ok(EnergyReport {
        max_violation,
        period_energies,
    })
}

/// Growth threshold f′(0) = μ, reported with both sides of the dichotomy
/// for a given linear eigen result.
pub fn dichotomy_threshold<T: Real>(linear: &FloquetResult<T>) -> T {
    linear.mu
}
