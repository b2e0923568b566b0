//! Reflected jump-diffusions on `[0, ∞)`: simulation, ordered couplings,
//! Lyapunov rate certificates and Wasserstein convergence bounds.
//!
//! The numerical modules are generic over [`Real`]; the aliases below fix
//! the scalar for the common cases.

// `!(x > 0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod coupling;
pub mod engine;
pub mod error;
pub mod exec;
pub mod model;
pub mod optimize;
pub mod scalar;
pub mod stream;
pub mod wasserstein;

pub use error::{Error, Result};
pub use exec::Executor;
pub use scalar::Real;
pub use stream::StreamSeed;

pub type ProcessSpec = model::ProcessSpec<f64>;
pub type ProcessSpecF32 = model::ProcessSpec<f32>;
pub type DriftSpec = model::DriftSpec<f64>;
pub type JumpFamily = model::JumpFamily<f64>;
pub type DisplacementLaw = model::DisplacementLaw<f64>;
pub type AssumptionReport = model::AssumptionReport<f64>;
pub type RateCertificate = certificate::RateCertificate<f64>;
pub type RateCertificateF32 = certificate::RateCertificate<f32>;
pub type PathSample = engine::PathSample<f64>;
pub type EnsembleSummary = engine::EnsembleSummary<f64>;
pub type CoupledPaths = coupling::CoupledPaths<f64>;
pub type EmpiricalDistribution = wasserstein::EmpiricalDistribution<f64>;
pub type EmpiricalDistributionF32 = wasserstein::EmpiricalDistribution<f32>;
pub type DecayCurve = wasserstein::DecayCurve<f64>;
