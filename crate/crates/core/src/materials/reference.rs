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

//! Default material models.
//!
//! The shipped optical tables are generated from oscillator
//! parameterizations rather than copied from a handbook: gold is a Drude
//! metal (ω_p = 1.37×10¹⁶ rad/s, γ = 5.3×10¹³ rad/s) plus five damped
//! interband oscillators; high-resistivity silicon (ρ₀ = 1000 Ω·cm) is a
//! damped valence oscillator with static ε = 11.87, a weak core-level
//! oscillator, and its small residual Drude term. Each table is sampled at
//! 200 rows per decade over 10¹⁰–10¹⁹ rad/s and then goes through the same
//! dispersion-integral path as user-supplied data. Replace them with
//! measured tables through [`super::load_optical_csv`] when available.

use super::{
    plasma_frequency_from_resistivity, DielectricModel, DrudeParams, HighFrequencyExtension,
    MaterialError, OpticalDataTable,
};
use crate::scalar::Scalar;

const EV: f64 = 1.0 / crate::constants::HBAR_EV_S;

pub const GOLD_PLASMA_FREQUENCY: f64 = 1.37e16;
pub const GOLD_GAMMA: f64 = 5.3e13;

/// Resistivity of the doped plate, Ω·cm.
pub const SILICON_RHO: f64 = 0.0035;
/// Resistivity of the sample the silicon table describes, Ω·cm.
pub const SILICON_RHO0: f64 = 1000.0;
/// Carrier relaxation time in silicon, s.
pub const SILICON_TAU: f64 = 1e-13;

const TABLE_MIN: f64 = 1e10;
const TABLE_MAX: f64 = 1e19;
const ROWS_PER_DECADE: usize = 200;

/// Damped Lorentz oscillator of static strength Δ:
/// Im ε(ω) = Δ ω₀² Γ ω / ((ω₀² − ω²)² + Γ²ω²), ε(iξ) − 1 = Δ ω₀² / (ω₀² + ξ² + Γξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub strength: f64,
    pub omega0: f64,
    pub damping: f64,
}

impl Oscillator {
    pub fn eps_im(&self, omega: f64) -> f64 {
        let d = self.omega0 * self.omega0 - omega * omega;
        let gw = self.damping * omega;
        self.strength * self.omega0 * self.omega0 * gw / (d * d + gw * gw)
    }

    pub fn eps_imag_axis_term(&self, xi: f64) -> f64 {
        let w2 = self.omega0 * self.omega0;
        self.strength * w2 / (w2 + xi * xi + self.damping * xi)
    }
}

/// Gold interband oscillators, (f, Γ, ω₀) in eV with oscillator plasma energy 9.03 eV.
pub fn gold_oscillators() -> Vec<Oscillator> {
    let wp = 9.03 * EV;
    [
        (0.024, 0.241, 0.415),
        (0.010, 0.345, 0.830),
        (0.071, 0.870, 2.969),
        (0.601, 2.494, 4.304),
        (4.384, 2.214, 13.32),
    ]
    .iter()
    .map(|&(f, g, w)| {
        let w0 = w * EV;
        Oscillator {
            strength: f * wp * wp / (w0 * w0),
            omega0: w0,
            damping: g * EV,
        }
    })
    .collect()
}

pub fn silicon_oscillators() -> Vec<Oscillator> {
    vec![
        Oscillator {
            strength: 11.87 - 1.035,
            omega0: 6.6e15,
            damping: 6.6e14,
        },
        Oscillator {
            strength: 0.035,
            omega0: 1.5e17,
            damping: 7.5e16,
        },
    ]
}

fn sample<T: Scalar>(label: &str, eps_im: impl Fn(f64) -> f64) -> OpticalDataTable<T> {
    let decades = (TABLE_MAX / TABLE_MIN).log10().round() as usize;
    let n = decades * ROWS_PER_DECADE + 1;
    let rows = super::log_space(TABLE_MIN, TABLE_MAX, n)
        .into_iter()
        .map(|w| (T::lit(w), T::lit(eps_im(w))))
        .collect();
    OpticalDataTable::new(label, rows).expect("generated table is valid")
}

pub fn gold_drude<T: Scalar>() -> DrudeParams<T> {
    DrudeParams::new(T::lit(GOLD_PLASMA_FREQUENCY), T::lit(GOLD_GAMMA)).unwrap()
}

pub fn gold_table<T: Scalar>() -> OpticalDataTable<T> {
    let drude = gold_drude::<f64>();
    let osc = gold_oscillators();
    sample("Au (reconstructed)", |w| {
        drude.eps_im_real_axis(w) + osc.iter().map(|o| o.eps_im(w)).sum::<f64>()
    })
}

/// Table for the ρ₀ = 1000 Ω·cm sample, including its residual carriers.
pub fn silicon_table<T: Scalar>() -> OpticalDataTable<T> {
    let drude = DrudeParams::from_resistivity(SILICON_RHO0, SILICON_TAU).unwrap();
    let osc = silicon_oscillators();
    sample("Si rho0=1000 Ohm cm (reconstructed)", |w| {
        drude.eps_im_real_axis(w) + osc.iter().map(|o| o.eps_im(w)).sum::<f64>()
    })
}

/// Gold: reconstructed table with a Drude low-frequency tail.
pub fn gold<T: Scalar>() -> DielectricModel<T> {
    gold_with(gold_drude())
}

/// Gold with custom low-frequency Drude parameters for the tail.
pub fn gold_with<T: Scalar>(drude: DrudeParams<T>) -> DielectricModel<T> {
    DielectricModel::tabulated_with_drude_tail(gold_table(), drude, HighFrequencyExtension::PowerLaw)
}

/// Doped silicon of resistivity `rho` (Ω·cm): high-resistivity table plus
/// the Drude term for that resistivity.
pub fn silicon<T: Scalar>(rho: T, tau: T) -> Result<DielectricModel<T>, MaterialError> {
    let omega_p = plasma_frequency_from_resistivity(rho, tau)?;
    silicon_with_plasma_frequency(omega_p, T::one() / tau)
}

pub fn silicon_with_plasma_frequency<T: Scalar>(
    omega_p: T,
    gamma: T,
) -> Result<DielectricModel<T>, MaterialError> {
    let drude = DrudeParams::new(omega_p, gamma)?;
    Ok(DielectricModel::augmented(
        &silicon_table(),
        drude,
        HighFrequencyExtension::PowerLaw,
    ))
}

/// The ρ = 0.0035 Ω·cm plate.
pub fn silicon_default<T: Scalar>() -> DielectricModel<T> {
    silicon(T::lit(SILICON_RHO), T::lit(SILICON_TAU)).unwrap()
}

/// The unaugmented ρ₀ = 1000 Ω·cm table with its own Drude tail.
pub fn silicon_high_resistivity<T: Scalar>() -> DielectricModel<T> {
    let drude = DrudeParams::from_resistivity(T::lit(SILICON_RHO0), T::lit(SILICON_TAU)).unwrap();
    DielectricModel::tabulated_with_drude_tail(silicon_table(), drude, HighFrequencyExtension::PowerLaw)
}
