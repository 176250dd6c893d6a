//! Law-invariant convex risk measures as statistical functionals.

pub mod distributions;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod orlicz;
pub mod quadrature;
pub mod risk_measures;
pub mod robustness;
pub mod spec;

pub use distributions::{empirical_from_sample, DiscreteLaw, Distribution, EmpiricalMeasure, Parametric};
pub use error::{Error, Result};
pub use orlicz::{Loss, WeightFunction, YoungFunction};
pub use risk_measures::{risk_functional, DistortionFunction, RiskMeasure};
