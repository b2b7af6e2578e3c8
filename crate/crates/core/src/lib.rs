//! Numerical toolkit for integrating Ito SDEs developed on a Riemannian
//! manifold whose metric is half the Hessian of an energy-like function plus
//! an additive regularizer. Ships three experiment pipelines (trapped
//! Brownian motion, drift-preserving Duffing integration, geometric
//! annealed-Langevin optimization) together with their Euclidean
//! comparators.

pub mod applications;
pub mod check;
pub mod energies;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod sde;
pub mod tensor;

pub use energy::EnergyModel;
pub use error::{GeodevError, Result};
pub use geometry::{MetricOptions, MetricState};
pub use sde::{Scheme, SimConfig};
pub use tensor::Rank3;
