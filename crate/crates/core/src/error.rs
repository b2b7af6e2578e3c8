//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum GeodevError {
    /// The regularized metric lost positive definiteness; the additive
    /// regularizer is too small for this state.
    #[error("metric not positive definite: min eigenvalue {min_eigenvalue:e} <= floor {floor:e}")]
    NonPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    /// An exponential energy term would overflow double precision.
    #[error("energy exponent {exponent:e} exceeds the overflow bound {bound}")]
    EnergyOverflow { exponent: f64, bound: f64 },

    /// Derivatives of the Ackley energy requested too close to the origin,
    /// where the radial term is singular.
    #[error("state within {eps:e} of the origin singularity")]
    OriginSingularity { eps: f64 },

    /// A trajectory produced a non-finite component.
    #[error("trajectory diverged at step {step}")]
    Diverged { step: usize },

    /// Every member of an ensemble diverged.
    #[error("all {members} ensemble members diverged")]
    AllDiverged { members: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, GeodevError>;
