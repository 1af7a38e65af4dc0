//! θ-scheme finite-difference solver on the fixed reference interval.
//!
//! Space is discretized by central differences on `M` interior nodes
//! ξ_i = i·h, h = L0/(M+1), with homogeneous Dirichlet walls. Time uses the
//! one-parameter θ family (θ = 1/2 Crank–Nicolson, θ = 1 implicit Euler)
//! with all coefficients frozen at the intermediate level t + θ·dt, which
//! keeps Crank–Nicolson second order for time-dependent coefficients. Each
//! step is one tridiagonal (Thomas) solve.
//!
//! Reaction terms are handled IMEX: transport implicit, kinetics explicit at
//! the current level. With θ = 1 the step map is an M-matrix solve of a
//! monotone explicit update, so it preserves ordering and the invariant band
//! [0, K] exactly — the property the nonlinear bracketing machinery relies
//! on. Crank–Nicolson trades that robustness for second-order accuracy and
//! is the default for linear eigenvalue work.

use crate::domain::{DomainSpec, ReactionSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid of `m` interior nodes on (0, L0).
#[derive(Clone, Debug)]
pub struct Grid1D<T> {
    m: usize,
    spacing: T,
    l0: T,
    nodes: Vec<T>,
}

impl<T: Real> Grid1D<T> {
    pub fn new(l0: T, m: usize) -> Result<Self> {
        if !(l0.is_finite() && l0 > T::zero()) {
            return Err(Error::invalid("grid", "L0 must be positive"));
        }
        if m < 8 {
            return Err(Error::invalid("grid", format!("need at least 8 interior points, got {m}")));
        }
        let spacing = l0 / T::of_usize(m + 1);
        let nodes = (1..=m).map(|i| spacing * T::of_usize(i)).collect();
        Ok(Grid1D { m, spacing, l0, nodes })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn l0(&self) -> T {
        self.l0
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn refined(&self) -> Result<Self> {
        Self::new(self.l0, self.m * 2)
    }
}

/// Interior nodal values at one instant. Walls are implicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Real> Field<T> {
    pub fn from_profile(grid: &Grid1D<T>, time: T, f: impl Fn(T) -> T) -> Self {
        Field {
            values: grid.nodes().iter().map(|&xi| f(xi)).collect(),
            time,
        }
    }

    pub fn constant(grid: &Grid1D<T>, time: T, value: T) -> Self {
        Field {
            values: vec![value; grid.m()],
            time,
        }
    }

    /// Positive half-sine of unit sup-norm, the canonical start vector.
    pub fn half_sine(grid: &Grid1D<T>, time: T) -> Self {
        let l0 = grid.l0();
        Self::from_profile(grid, time, |xi| (T::PI() * xi / l0).sin())
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .fold(T::infinity(), |acc, v| acc.min(*v))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, factor: T) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// Interior trapezoid of the product (walls vanish): h·Σ aᵢbᵢ.
    pub fn dot(&self, other: &Self, grid: &Grid1D<T>) -> T {
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a * *b)
            .sum();
        s * grid.spacing()
    }
}

/// Time-step configuration: steps per period and the θ weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig<T> {
    steps_per_period: usize,
    theta: T,
}

impl<T: Real> StepConfig<T> {
    pub fn new(steps_per_period: usize, theta: T) -> Result<Self> {
        if steps_per_period < 32 {
            return Err(Error::invalid(
                "step config",
                format!("need at least 32 steps per period, got {steps_per_period}"),
            ));
        }
        if !(theta >= T::of(0.5) && theta <= T::one()) {
            return Err(Error::invalid("step config", "theta must lie in [1/2, 1]"));
        }
        Ok(StepConfig { steps_per_period, theta })
    }

    /// Second-order scheme; the default for linear/eigenvalue work.
    pub fn crank_nicolson(steps_per_period: usize) -> Result<Self> {
        Self::new(steps_per_period, T::of(0.5))
    }

    /// Fully implicit scheme with the discrete comparison principle; the
    /// right choice for the monotone nonlinear machinery and stiff runs.
    pub fn implicit(steps_per_period: usize) -> Result<Self> {
        Self::new(steps_per_period, T::one())
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps_per_period
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn refined(&self) -> Self {
        StepConfig {
            steps_per_period: self.steps_per_period * 2,
            theta: self.theta,
        }
    }
}

impl<T: Real> Default for StepConfig<T> {
    fn default() -> Self {
        StepConfig {
            steps_per_period: 800,
            theta: T::of(0.5),
        }
    }
}

/// Coefficient field of a transformed transport operator
/// `u_t = diffusion·u_ξξ + advection·u_ξ + potential·u` on (0, L0),
/// with coefficients periodic in t.
pub trait TransportCoefficients<T: Real>: Sync {
    fn period(&self) -> T;
    fn diffusion(&self, xi: T, t: T) -> T;
    fn advection(&self, xi: T, t: T) -> T;
    fn potential(&self, xi: T, t: T) -> T;

    /// Fill per-node coefficient profiles at time `t`. Implementations with
    /// node-independent structure override this to hoist the per-step work.
    fn fill_profiles(&self, grid: &Grid1D<T>, t: T, diff: &mut [T], adv: &mut [T], pot: &mut [T]) {
        for (i, &xi) in grid.nodes().iter().enumerate() {
            diff[i] = self.diffusion(xi, t);
            adv[i] = self.advection(xi, t);
            pot[i] = self.potential(xi, t);
        }
    }
}

/// Zero-potential marker for the plain transport operator.
#[derive(Clone, Copy, Debug)]
pub struct NoPotential;

pub trait PotentialTerm<T>: Sync {
    fn eval(&self, xi: T, t: T) -> T;
}

impl<T: Real> PotentialTerm<T> for NoPotential {
    fn eval(&self, _xi: T, _t: T) -> T {
        T::zero()
    }
}

impl<T: Real, F: Fn(T, T) -> T + Sync> PotentialTerm<T> for F {
    fn eval(&self, xi: T, t: T) -> T {
        self(xi, t)
    }
}

/// The advective u-form of the moving-interval diffusion operator, with an
/// optional zeroth-order term (e.g. the linearized reaction f'(0)).
pub struct UTransport<'a, T, P = NoPotential> {
    spec: &'a DomainSpec<T>,
    d: T,
    potential: P,
}

impl<'a, T: Real> UTransport<'a, T> {
    pub fn new(spec: &'a DomainSpec<T>, d: T) -> Self {
        UTransport {
            spec,
            d,
            potential: NoPotential,
        }
    }
}

impl<'a, T: Real, P: PotentialTerm<T>> UTransport<'a, T, P> {
    pub fn with_potential(spec: &'a DomainSpec<T>, d: T, potential: P) -> Self {
        UTransport { spec, d, potential }
    }
}

impl<'a, T: Real, P: PotentialTerm<T>> TransportCoefficients<T> for UTransport<'a, T, P> {
    fn period(&self) -> T {
        self.spec.period()
    }

    fn diffusion(&self, xi: T, t: T) -> T {
        self.spec.u_coefficients(self.d, xi, t).0
    }

    fn advection(&self, xi: T, t: T) -> T {
        self.spec.u_coefficients(self.d, xi, t).1
    }

    fn potential(&self, xi: T, t: T) -> T {
        self.potential.eval(xi, t)
    }

    fn fill_profiles(&self, grid: &Grid1D<T>, t: T, diff: &mut [T], adv: &mut [T], pot: &mut [T]) {
        let l0 = self.spec.l0();
        let len = self.spec.length(t);
        let ldot = self.spec.length_dot(t);
        let adot_l0 = self.spec.position_dot(t) * l0;
        let dval = self.d * l0 * l0 / (len * len);
        for (i, &xi) in grid.nodes().iter().enumerate() {
            diff[i] = dval;
            adv[i] = (adot_l0 + xi * ldot) / len;
            pot[i] = self.potential.eval(xi, t);
        }
    }
}

/// The advection-free w-form: same diffusion, multiplicative potential.
pub struct WTransport<'a, T> {
    spec: &'a DomainSpec<T>,
    d: T,
}

impl<'a, T: Real> WTransport<'a, T> {
    pub fn new(spec: &'a DomainSpec<T>, d: T) -> Self {
        WTransport { spec, d }
    }
}

impl<'a, T: Real> TransportCoefficients<T> for WTransport<'a, T> {
    fn period(&self) -> T {
        self.spec.period()
    }

    fn diffusion(&self, _xi: T, t: T) -> T {
        let l0 = self.spec.l0();
        let len = self.spec.length(t);
        self.d * l0 * l0 / (len * len)
    }

    fn advection(&self, _xi: T, _t: T) -> T {
        T::zero()
    }

    fn potential(&self, xi: T, t: T) -> T {
        self.spec.w_potential(self.d, xi, t)
    }

    fn fill_profiles(&self, grid: &Grid1D<T>, t: T, diff: &mut [T], adv: &mut [T], pot: &mut [T]) {
        let l0 = self.spec.l0();
        let len = self.spec.length(t);
        let dval = self.d * l0 * l0 / (len * len);
        let four_d = T::of(4.0) * self.d;
        let qa = self.spec.length_ddot(t) * len / (four_d * l0 * l0);
        let qb = self.spec.position_ddot(t) * len / (T::of(2.0) * self.d * l0);
        for (i, &xi) in grid.nodes().iter().enumerate() {
            diff[i] = dval;
            adv[i] = T::zero();
            pot[i] = xi * (xi * qa + qb);
        }
    }
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
pub(crate) fn solve_tridiagonal<T: Real>(
    sub: &[T],
    diag: &[T],
    sup: &[T],
    rhs: &[T],
    time: T,
) -> Result<Vec<T>> {
    let n = diag.len();
    let tiny = T::min_positive_value().sqrt();
    let mut c_star = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    let mut beta = diag[0];
    if beta.abs() <= tiny {
        return Err(Error::SingularSystem { row: 0, time: time.as_f64() });
    }
    c_star[0] = sup[0] / beta;
    x[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c_star[i - 1];
        if beta.abs() <= tiny {
            return Err(Error::SingularSystem { row: i, time: time.as_f64() });
        }
        c_star[i] = sup[i] / beta;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c_star[i] * next;
    }
    Ok(x)
}

pub(crate) struct StepWorkspace<T> {
    diff: Vec<T>,
    adv: Vec<T>,
    pot: Vec<T>,
    sub: Vec<T>,
    diag: Vec<T>,
    sup: Vec<T>,
    rhs: Vec<T>,
}

impl<T: Real> StepWorkspace<T> {
    pub(crate) fn new(m: usize) -> Self {
        StepWorkspace {
            diff: vec![T::zero(); m],
            adv: vec![T::zero(); m],
            pot: vec![T::zero(); m],
            sub: vec![T::zero(); m],
            diag: vec![T::zero(); m],
            sup: vec![T::zero(); m],
            rhs: vec![T::zero(); m],
        }
    }
}

/// One θ step of the linear equation, coefficients sampled at t + θ·dt.
pub(crate) fn theta_step<T: Real, C: TransportCoefficients<T>>(
    values: &[T],
    t: T,
    grid: &Grid1D<T>,
    coeffs: &C,
    dt: T,
    theta: T,
    ws: &mut StepWorkspace<T>,
) -> Result<Vec<T>> {
    let m = grid.m();
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let inv_2h = T::of(0.5) / h;
    let t_star = t + theta * dt;
    coeffs.fill_profiles(grid, t_star, &mut ws.diff, &mut ws.adv, &mut ws.pot);

    let expl = (T::one() - theta) * dt;
    let impl_ = theta * dt;
    for i in 0..m {
        let lower = ws.diff[i] * inv_h2 - ws.adv[i] * inv_2h;
        let upper = ws.diff[i] * inv_h2 + ws.adv[i] * inv_2h;
        let center = ws.pot[i] - (ws.diff[i] + ws.diff[i]) * inv_h2;

        let um = if i > 0 { values[i - 1] } else { T::zero() };
        let up = if i + 1 < m { values[i + 1] } else { T::zero() };
        ws.rhs[i] = values[i] + expl * (lower * um + center * values[i] + upper * up);

        ws.sub[i] = -impl_ * lower;
        ws.diag[i] = T::one() - impl_ * center;
        ws.sup[i] = -impl_ * upper;
    }
    solve_tridiagonal(&ws.sub, &ws.diag, &ws.sup, &ws.rhs, t + dt)
}

/// Single linear θ step.
pub fn step_linear<T: Real, C: TransportCoefficients<T>>(
    state: &Field<T>,
    grid: &Grid1D<T>,
    coeffs: &C,
    dt: T,
    theta: T,
) -> Result<Field<T>> {
    let mut ws = StepWorkspace::new(grid.m());
    let values = theta_step(&state.values, state.time, grid, coeffs, dt, theta, &mut ws)?;
    let next = Field {
        values,
        time: state.time + dt,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite { time: next.time.as_f64() });
    }
    Ok(next)
}

/// Single IMEX step of the reaction–diffusion equation: transport implicit
/// in the θ sense, kinetics explicit at the current level. The result must
/// stay inside [-1e-6, K + 1e-6] (checked, not clamped).
pub fn step_nonlinear<T: Real>(
    state: &Field<T>,
    grid: &Grid1D<T>,
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    dt: T,
    theta: T,
) -> Result<Field<T>> {
    let mut ws = StepWorkspace::new(grid.m());
    step_nonlinear_ws(state, grid, spec, reaction, dt, theta, &mut ws)
}

fn step_nonlinear_ws<T: Real>(
    state: &Field<T>,
    grid: &Grid1D<T>,
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    dt: T,
    theta: T,
    ws: &mut StepWorkspace<T>,
) -> Result<Field<T>> {
    let transport = UTransport::new(spec, reaction.diffusivity());
    // Explicit kinetics folded into the state before the transport step:
    // (I - θ·dt·L) u⁺ = (I + (1-θ)·dt·L) (u + dt·f(u)) would double-count the
    // transport of the reaction part, so the reaction increment rides along
    // as a pure source: u ← u + dt·f(u), then the θ transport step.
    let fed: Vec<T> = state
        .values
        .iter()
        .map(|&u| u + dt * reaction.f(u))
        .collect();
    let values = theta_step(&fed, state.time, grid, &transport, dt, theta, ws)?;
    let next = Field {
        values,
        time: state.time + dt,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite { time: next.time.as_f64() });
    }
    let band = T::of(1e-6);
    let lo = -band;
    let hi = reaction.carrying_capacity() + band;
    let saturating = !reaction.is_linear();
    for (i, &v) in next.values.iter().enumerate() {
        if v < lo || (saturating && v > hi) {
            return Err(Error::RangeViolation {
                node: i + 1,
                value: v.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                time: next.time.as_f64(),
            });
        }
    }
    Ok(next)
}

fn step_count<T: Real>(span: T, dt: T) -> Result<usize> {
    let ratio = (span / dt).as_f64();
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-6 {
        return Err(Error::invalid(
            "time span",
            format!("span/dt = {ratio} is not a whole number of steps"),
        ));
    }
    Ok(n as usize)
}

/// March the linear equation from `state.time` to `t1`; the span must be a
/// whole number of steps of size period/steps_per_period.
pub fn evolve_linear<T: Real, C: TransportCoefficients<T>>(
    state: &Field<T>,
    grid: &Grid1D<T>,
    coeffs: &C,
    t1: T,
    config: &StepConfig<T>,
) -> Result<Field<T>> {
    let dt = coeffs.period() / T::of_usize(config.steps_per_period());
    let t0 = state.time;
    let n = step_count(t1 - t0, dt)?;
    let span = t1 - t0;
    let mut ws = StepWorkspace::new(grid.m());
    let mut values = state.values.clone();
    for k in 0..n {
        let t = t0 + span * T::of_usize(k) / T::of_usize(n);
        values = theta_step(&values, t, grid, coeffs, dt, config.theta(), &mut ws)?;
    }
    let out = Field { values, time: t1 };
    if !out.is_finite() {
        return Err(Error::NonFinite { time: t1.as_f64() });
    }
    Ok(out)
}

/// A field together with the natural log of the factor divided out of it.
#[derive(Clone, Debug)]
pub struct ScaledField<T> {
    pub field: Field<T>,
    pub log_scale: T,
}

/// Linear evolution with on-the-fly renormalization, so one traversal can
/// represent growth or decay factors far outside floating-point range. The
/// true solution is `field · exp(log_scale)`.
pub fn evolve_linear_scaled<T: Real, C: TransportCoefficients<T>>(
    state: &Field<T>,
    grid: &Grid1D<T>,
    coeffs: &C,
    t1: T,
    config: &StepConfig<T>,
) -> Result<ScaledField<T>> {
    let dt = coeffs.period() / T::of_usize(config.steps_per_period());
    let t0 = state.time;
    let n = step_count(t1 - t0, dt)?;
    let span = t1 - t0;
    let mut ws = StepWorkspace::new(grid.m());
    let mut values = state.values.clone();
    let mut log_scale = T::zero();
    let lo = T::of(1e-30);
    let hi = T::of(1e30);
    for k in 0..n {
        let t = t0 + span * T::of_usize(k) / T::of_usize(n);
        values = theta_step(&values, t, grid, coeffs, dt, config.theta(), &mut ws)?;
        let sup = values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if !sup.is_finite() {
            return Err(Error::NonFinite { time: (t + dt).as_f64() });
        }
        if sup == T::zero() {
            return Err(Error::DegenerateState {
                sup: 0.0,
                time: (t + dt).as_f64(),
            });
        }
        if sup < lo || sup > hi {
            let inv = T::one() / sup;
            for v in &mut values {
                *v *= inv;
            }
            log_scale += sup.ln();
        }
    }
    Ok(ScaledField {
        field: Field { values, time: t1 },
        log_scale,
    })
}

/// March the reaction–diffusion equation from `state.time` to `t1`.
pub fn evolve_nonlinear<T: Real>(
    state: &Field<T>,
    grid: &Grid1D<T>,
    spec: &DomainSpec<T>,
    reaction: &ReactionSpec<T>,
    t1: T,
    config: &StepConfig<T>,
) -> Result<Field<T>> {
    let dt = spec.period() / T::of_usize(config.steps_per_period());
    let t0 = state.time;
    let n = step_count(t1 - t0, dt)?;
    let span = t1 - t0;
    let mut ws = StepWorkspace::new(grid.m());
    let mut current = state.clone();
    for k in 0..n {
        current.time = t0 + span * T::of_usize(k) / T::of_usize(n);
        current = step_nonlinear_ws(&current, grid, spec, reaction, dt, config.theta(), &mut ws)?;
    }
    current.time = t1;
    Ok(current)
}
