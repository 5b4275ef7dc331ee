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

use super::{check_xi, MaterialError, Permittivity};
use crate::constants::EPS0;
use crate::scalar::Scalar;

/// Free-carrier parameters: plasma frequency and relaxation rate γ = 1/τ, both in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DrudeParams<T> {
    pub omega_p: T,
    pub gamma: T,
}

impl<T: Scalar> DrudeParams<T> {
    pub fn new(omega_p: T, gamma: T) -> Result<Self, MaterialError> {
        positive("plasma frequency ω_p", omega_p)?;
        positive("relaxation parameter γ", gamma)?;
        Ok(Self { omega_p, gamma })
    }

    /// Parameters for a doped semiconductor of resistivity `rho` (Ω·cm) and
    /// carrier relaxation time `tau` (s).
    pub fn from_resistivity(rho: T, tau: T) -> Result<Self, MaterialError> {
        let omega_p = plasma_frequency_from_resistivity(rho, tau)?;
        Self::new(omega_p, T::one() / tau)
    }

    /// Im ε(ω) = ω_p² γ / (ω (ω² + γ²)) on the real axis.
    pub fn eps_im_real_axis(&self, omega: T) -> T {
        let wp = self.omega_p;
        (wp / omega) * (wp * self.gamma / (omega * omega + self.gamma * self.gamma))
    }
}

impl<T: Scalar> Permittivity<T> for DrudeParams<T> {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        drude_eps_imag_axis(self, xi)
    }
}

fn positive<T: Scalar>(what: &'static str, v: T) -> Result<(), MaterialError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(MaterialError::Domain {
            what,
            value: v.as_f64(),
        })
    }
}

/// Plasma frequency of a semiconductor from its resistivity `rho` in Ω·cm
/// and relaxation time `tau` in s:
///
/// ```text
/// ω_p = 2√π / √(ε₀ ρ τ)
/// ```
///
/// with ε₀ in F/m and ρ converted to Ω·m. This is the Gaussian-unit
/// relation ω_p² = 4πσ/τ evaluated with SI ε₀; for ρ = 0.0035 Ω·cm and
/// τ = 10⁻¹³ s it gives 6.37×10¹⁴ rad/s, the conventional value used for
/// this silicon. Note that the self-consistent SI relation ω_p² = 1/(ε₀ρτ)
/// is smaller by the factor 2√π.
pub fn plasma_frequency_from_resistivity<T: Scalar>(rho: T, tau: T) -> Result<T, MaterialError> {
    positive("resistivity ρ", rho)?;
    positive("relaxation time τ", tau)?;
    let rho_si = rho * T::lit(1e-2);
    let two_sqrt_pi = T::lit(2.0) * T::PI().sqrt();
    Ok(two_sqrt_pi / (T::lit(EPS0) * rho_si * tau).sqrt())
}

/// ε(iξ) = 1 + ω_p² / (ξ (ξ + γ)).
pub fn drude_eps_imag_axis<T: Scalar>(params: &DrudeParams<T>, xi: T) -> Result<T, MaterialError> {
    check_xi(xi)?;
    let wp = params.omega_p;
    Ok(T::one() + (wp / xi) * (wp / (xi + params.gamma)))
}
