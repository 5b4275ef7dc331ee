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

//! Dielectric permittivity along the imaginary frequency axis, ε(iξ).
//!
//! Two routes produce ε(iξ): the analytic Drude form for free carriers and
//! the dispersion (Kramers–Kronig) integral over tabulated Im ε(ω),
//!
//! ```text
//! ε(iξ) = 1 + (2/π) ∫₀^∞ ω Im ε(ω) / (ω² + ξ²) dω,
//! ```
//!
//! with analytic tails below and above the table. A doped semiconductor is
//! built by adding the Drude Im ε to a high-resistivity table and using the
//! Drude form below the first tabulated frequency.
//!
//! Every model implements [`Permittivity`]; all models are immutable after
//! construction and can be shared across threads.

mod drude;
mod kramers_kronig;
pub mod reference;
mod sampled;
mod table;

pub use drude::{drude_eps_imag_axis, plasma_frequency_from_resistivity, DrudeParams};
pub use kramers_kronig::{kramers_kronig_imag_axis, Extensions};
pub use sampled::SampledPermittivity;
pub use table::{augment_table_with_drude, load_optical_csv, FreqUnit, OpticalDataTable};

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("{what} must be positive, got {value:e}")]
    Domain { what: &'static str, value: f64 },
    #[error("invalid optical table: {0}")]
    InvalidTable(String),
    #[error(
        "insufficient optical data at ξ = {xi:e} rad/s: no coverage for {} (table spans {:e}–{:e} rad/s)",
        .uncovered.join(", "), .span.0, .span.1
    )]
    InsufficientOpticalData {
        xi: f64,
        uncovered: Vec<String>,
        span: (f64, f64),
    },
    #[error("drude_tail extension selected but the model has no Drude parameters")]
    MissingDrude,
    #[error("dielectric model needs a table or Drude parameters")]
    EmptyModel,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

/// A medium with a real, positive permittivity on the imaginary frequency axis.
pub trait Permittivity<T: Scalar>: Send + Sync {
    /// ε(iξ) for ξ > 0 in rad/s.
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError>;
}

impl<T: Scalar, P: Permittivity<T> + ?Sized> Permittivity<T> for &P {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        (**self).eps_imag_axis(xi)
    }
}

impl<T: Scalar, P: Permittivity<T> + ?Sized> Permittivity<T> for Box<P> {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        (**self).eps_imag_axis(xi)
    }
}

impl<T: Scalar, P: Permittivity<T> + ?Sized> Permittivity<T> for std::sync::Arc<P> {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        (**self).eps_imag_axis(xi)
    }
}

/// Frequency-independent ε. `ConstantPermittivity(1.0)` is vacuum; a large
/// value such as `1e12` stands in for an ideal metal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPermittivity<T>(pub T);

impl<T: Scalar> ConstantPermittivity<T> {
    pub fn vacuum() -> Self {
        Self(T::one())
    }

    /// Ideal-metal stand-in with ε capped at `1e12`.
    pub fn ideal_metal() -> Self {
        Self(T::lit(1e12))
    }
}

impl<T: Scalar> Permittivity<T> for ConstantPermittivity<T> {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        check_xi(xi)?;
        Ok(self.0)
    }
}

/// How Im ε is continued below the first tabulated frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowFrequencyExtension {
    /// Analytic Drude Im ε from the model's Drude parameters.
    DrudeTail,
    /// Im ε held at the value of the first row.
    Constant,
    None,
}

/// How Im ε is continued above the last tabulated frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighFrequencyExtension {
    /// Im ε = 0 above the table.
    Vacuum,
    /// Im ε = C/ω³ fitted to the final two rows.
    PowerLaw,
}

/// ε(iξ) evaluator for one material: a tabulated Im ε(ω) with extensions,
/// an analytic Drude model, or both.
///
/// When a table is present it is authoritative over its band and the Drude
/// parameters (if any) only feed the `DrudeTail` extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DielectricModel<T> {
    table: Option<OpticalDataTable<T>>,
    drude: Option<DrudeParams<T>>,
    low: LowFrequencyExtension,
    high: HighFrequencyExtension,
}

impl<T: Scalar> DielectricModel<T> {
    pub fn new(
        table: Option<OpticalDataTable<T>>,
        drude: Option<DrudeParams<T>>,
        low: LowFrequencyExtension,
        high: HighFrequencyExtension,
    ) -> Result<Self, MaterialError> {
        if table.is_none() && drude.is_none() {
            return Err(MaterialError::EmptyModel);
        }
        if table.is_some() && low == LowFrequencyExtension::DrudeTail && drude.is_none() {
            return Err(MaterialError::MissingDrude);
        }
        Ok(Self {
            table,
            drude,
            low,
            high,
        })
    }

    /// Pure Drude metal.
    pub fn drude(params: DrudeParams<T>) -> Self {
        Self {
            table: None,
            drude: Some(params),
            low: LowFrequencyExtension::DrudeTail,
            high: HighFrequencyExtension::Vacuum,
        }
    }

    pub fn tabulated(
        table: OpticalDataTable<T>,
        low: LowFrequencyExtension,
        high: HighFrequencyExtension,
    ) -> Result<Self, MaterialError> {
        Self::new(Some(table), None, low, high)
    }

    /// Table whose low-frequency side continues as the given Drude metal.
    pub fn tabulated_with_drude_tail(
        table: OpticalDataTable<T>,
        drude: DrudeParams<T>,
        high: HighFrequencyExtension,
    ) -> Self {
        Self {
            table: Some(table),
            drude: Some(drude),
            low: LowFrequencyExtension::DrudeTail,
            high,
        }
    }

    /// Adds the free-carrier Im ε of `drude` to every row of `table` and
    /// continues below the table with the same Drude term.
    pub fn augmented(
        table: &OpticalDataTable<T>,
        drude: DrudeParams<T>,
        high: HighFrequencyExtension,
    ) -> Self {
        Self::tabulated_with_drude_tail(augment_table_with_drude(table, &drude), drude, high)
    }

    pub fn table(&self) -> Option<&OpticalDataTable<T>> {
        self.table.as_ref()
    }

    pub fn drude_params(&self) -> Option<&DrudeParams<T>> {
        self.drude.as_ref()
    }

    pub fn extensions(&self) -> Extensions<T> {
        Extensions {
            low: self.low,
            high: self.high,
            drude: self.drude,
        }
    }

    /// Same model with the Drude plasma frequency multiplied by `factor`.
    /// For a table built by [`DielectricModel::augmented`] use
    /// [`reference::silicon_with_plasma_frequency`] instead, which rebuilds
    /// the augmentation.
    pub fn with_scaled_plasma_frequency(&self, factor: T) -> Result<Self, MaterialError> {
        let mut out = self.clone();
        if let Some(d) = out.drude.as_mut() {
            *d = DrudeParams::new(d.omega_p * factor, d.gamma)?;
        }
        Ok(out)
    }
}

impl<T: Scalar> Permittivity<T> for DielectricModel<T> {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        check_xi(xi)?;
        match (&self.table, &self.drude) {
            (Some(table), _) => kramers_kronig_imag_axis(table, &self.extensions(), xi),
            (None, Some(d)) => drude_eps_imag_axis(d, xi),
            (None, None) => Err(MaterialError::EmptyModel),
        }
    }
}

pub(crate) fn check_xi<T: Scalar>(xi: T) -> Result<(), MaterialError> {
    if xi > T::zero() && xi.is_finite() {
        Ok(())
    } else {
        Err(MaterialError::Domain {
            what: "imaginary frequency ξ",
            value: xi.as_f64(),
        })
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2 && lo > T::zero() && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| (a + step * T::from_usize(i).unwrap()).exp())
        .collect()
}
