//! Numerical laboratory for diffusion and reaction–diffusion problems on
//! time-periodic moving intervals.
//!
//! The library maps the moving interval (A(t), A(t) + L(t)) onto the fixed
//! reference interval (0, L0), solves the transformed parabolic equation
//! with a θ-scheme, extracts the principal periodic eigenvalue of the
//! diffusion operator by power iteration on the period map, audits it
//! against closed-form bounds, and runs the monostable reaction–diffusion
//! dynamics that the eigenvalue governs.
//!
//! Everything numerical is generic over the scalar type via [`scalar::Real`]
//! (implemented for `f32` and `f64`); the crate root re-exports `f64`
//! aliases for the common types.

pub mod bounds;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod periodic;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};

/// `f64` alias for [`periodic::PeriodicFn1`].
pub type PeriodicFn = periodic::PeriodicFn1<f64>;
/// `f64` alias for [`periodic::Harmonic`].
pub type Harmonic = periodic::Harmonic<f64>;
/// `f64` alias for [`domain::DomainSpec`].
pub type Domain = domain::DomainSpec<f64>;
/// `f64` alias for [`domain::ReactionSpec`].
pub type Reaction = domain::ReactionSpec<f64>;
/// `f64` alias for [`domain::ReactionKind`].
pub type ReactionKind = domain::ReactionKind<f64>;
/// `f64` alias for [`solver::Grid1D`].
pub type Grid = solver::Grid1D<f64>;
/// `f64` alias for [`solver::Field`].
pub type FieldF64 = solver::Field<f64>;
/// `f64` alias for [`solver::StepConfig`].
pub type StepConfigF64 = solver::StepConfig<f64>;
/// `f64` alias for [`floquet::FloquetConfig`].
pub type EigenConfig = floquet::FloquetConfig<f64>;
/// `f64` alias for [`floquet::FloquetResult`].
pub type EigenResult = floquet::FloquetResult<f64>;
/// `f64` alias for [`bounds::BoundsReport`].
pub type BoundsReportF64 = bounds::BoundsReport<f64>;
/// `f64` alias for [`bounds::SweepReport`].
pub type SweepReportF64 = bounds::SweepReport<f64>;
/// `f64` alias for [`dynamics::PeriodicSolution`].
pub type PeriodicSolutionF64 = dynamics::PeriodicSolution<f64>;
