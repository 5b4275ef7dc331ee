// Copyright 2026 The casimir-rs authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

//! Casimir force between a metal-coated sphere and a semiconductor plate.
//!
//! The crate covers the full chain from optical data to a theory–experiment
//! comparison:
//!
//! - [`materials`]: ε(iξ) from tabulated Im ε(ω) and Drude parameters,
//! - [`lifshitz`]: the zero-temperature Lifshitz force in the proximity
//!   force approximation, with additive roughness averaging,
//! - [`electrostatics`]: exact sphere–plane capacitance and the voltage-sweep
//!   calibration of contact separation and residual potential,
//! - [`stats`]: random, systematic and theoretical error budgets and the
//!   95 % confidence envelope,
//! - [`pipeline`]: measurement ensembles, file formats and synthetic data,
//! - [`compare`]: difference reports, agreement measure and force ratios.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the I/O layers use.
//!
//! Units are SI throughout. Files use nm and pN.

pub mod compare;
pub mod constants;
pub mod electrostatics;
pub mod lifshitz;
pub mod materials;
pub mod pipeline;
pub mod quadrature;
pub mod scalar;
pub mod stats;
pub mod units;

pub use scalar::Scalar;

pub type DielectricModelF64 = materials::DielectricModel<f64>;
pub type OpticalDataTableF64 = materials::OpticalDataTable<f64>;
pub type GeometryF64 = lifshitz::Geometry<f64>;
pub type ForceCurveF64 = lifshitz::ForceCurve<f64>;
pub type RoughnessProfileF64 = lifshitz::RoughnessProfile<f64>;
pub type MeasurementEnsembleF64 = stats::MeasurementEnsemble<f64>;
pub type ConfidenceEnvelopeF64 = stats::ConfidenceEnvelope<f64>;
pub type ComparisonReportF64 = compare::ComparisonReport<f64>;
pub type ForceRatioF64 = compare::ForceRatio<f64>;
pub type CalibrationFitF64 = electrostatics::CalibrationFit<f64>;
