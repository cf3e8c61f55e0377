//! Amplitude and phase of oscillatory equations `y'' + q(x) y = 0`.
//!
//! Integrates a pair of solutions, recovers the principal pair (the
//! unit-Wronskian pair whose amplitude `v = y1² + y2²` has a finite limit,
//! or whose `v'` does), classifies it, and relates the critical points of
//! one solution to the zeros of the other. Everything is generic over
//! [`Real`] (`f32` or `f64`); the aliases below fix the scalar.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fmt;
pub mod grid;
pub mod integrate;
mod linalg;
pub mod phasekit;
pub mod pipeline;
pub mod principal;
pub mod qfunc;
pub mod real;
pub mod specfun;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use real::Real;

pub type EquationModelF64 = qfunc::EquationModel<f64>;
pub type EquationModelF32 = qfunc::EquationModel<f32>;
pub type TolerancesF64 = integrate::Tolerances<f64>;
pub type TolerancesF32 = integrate::Tolerances<f32>;
pub type PairTrajectoryF64 = integrate::PairTrajectory<f64>;
pub type PairTrajectoryF32 = integrate::PairTrajectory<f32>;
pub type PhaseDataF64 = phasekit::PhaseData<f64>;
pub type PhaseDataF32 = phasekit::PhaseData<f32>;
pub type CombinationCoefficientsF64 = principal::CombinationCoefficients<f64>;
pub type CombinationCoefficientsF32 = principal::CombinationCoefficients<f32>;
pub type ClassificationF64 = principal::Classification<f64>;
pub type PrincipalReportF64 = principal::PrincipalReport<f64>;
pub type ZeroGapTableF64 = zeros::ZeroGapTable<f64>;
pub type BesselTableF64 = specfun::BesselTable<f64>;
pub type RunConfigF64 = pipeline::RunConfig<f64>;
pub type AnalysisF64 = pipeline::Analysis<f64>;
