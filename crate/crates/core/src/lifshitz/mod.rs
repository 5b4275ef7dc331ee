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

//! Zero-temperature Lifshitz force between a sphere and a plate.
//!
//! In the proximity force approximation the force is
//!
//! ```text
//! F(z) = ħR/2π ∫₀^∞ k⊥ dk⊥ ∫₀^∞ dξ { ln[1 − r∥⁽¹⁾r∥⁽²⁾ e^{−2zq}] + ln[1 − r⊥⁽¹⁾r⊥⁽²⁾ e^{−2zq}] }
//! ```
//!
//! with q² = k⊥² + ξ²/c². It is evaluated in the dimensionless variables
//! t = 2zξ/c and y = 2zq ≥ t, where it becomes
//!
//! ```text
//! |F(z)| = ħcR/(16π z³) ∫₀^{t_max} dt ∫_t^{y_max} y dy Σ_pol −ln(1 − r⁽¹⁾r⁽²⁾ e^{−y}),
//! ```
//!
//! so ε is needed once per outer node. Forces are returned as positive
//! magnitudes of an attraction.

mod curve;
mod roughness;

pub use curve::{
    force_curve, force_curve_interpolated, ideal_metal_curve, separation_grid, ForceCurve, ForceInterpolant, Provenance, SignConvention,
    Surfaces,
};
pub use roughness::{roughness_corrected_force, Body, RoughnessProfile};

use crate::constants::{C, HBAR};
use crate::materials::{MaterialError, Permittivity};
use crate::quadrature::{integrate, QuadratureError, Tolerance};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LifshitzError {
    #[error("{what} out of range: {value:e}")]
    Domain { what: &'static str, value: f64 },
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("force integral not converged: estimate {estimate:e} N, error bound {error:e} N")]
    NotConverged { estimate: f64, error: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(QuadratureError),
    #[error("roughness exceeds separation: z = {z:e} m gives effective separation {z_eff:e} m")]
    RoughnessExceedsSeparation { z: f64, z_eff: f64 },
    #[error("invalid roughness profile: {0}")]
    Roughness(String),
    #[error("force magnitude not decreasing between z = {z0:e} m and z = {z1:e} m")]
    NonMonotone { z0: f64, z1: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl From<QuadratureError> for LifshitzError {
    fn from(e: QuadratureError) -> Self {
        LifshitzError::Quadrature(e)
    }
}

/// Sphere radius and its uncertainty, m.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Geometry<T> {
    pub radius: T,
    pub radius_uncertainty: T,
}

impl<T: Scalar> Geometry<T> {
    pub fn new(radius: T, radius_uncertainty: T) -> Result<Self, LifshitzError> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(LifshitzError::Domain {
                what: "sphere radius",
                value: radius.as_f64(),
            });
        }
        if !(radius_uncertainty >= T::zero() && radius_uncertainty < T::lit(0.1) * radius) {
            return Err(LifshitzError::Domain {
                what: "radius uncertainty",
                value: radius_uncertainty.as_f64(),
            });
        }
        Ok(Self {
            radius,
            radius_uncertainty,
        })
    }

    /// 2R = 202.6 ± 0.3 μm.
    pub fn reference() -> Self {
        Self::new(T::lit(101.3e-6), T::lit(0.15e-6)).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub max_panel_depth: usize,
    /// ξ is integrated up to `xi_cutoff_factor · c/(2z)`.
    pub xi_cutoff_factor: T,
}

impl<T: Scalar> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-6).max(T::lit(10.0) * T::min_rel_tol()),
            max_panel_depth: 40,
            xi_cutoff_factor: T::lit(40.0),
        }
    }
}

impl<T: Scalar> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<(), LifshitzError> {
        if !(self.rel_tol > T::zero() && self.rel_tol < T::lit(1e-2)) {
            return Err(LifshitzError::Domain {
                what: "rel_tol",
                value: self.rel_tol.as_f64(),
            });
        }
        if !(self.xi_cutoff_factor >= T::lit(20.0)) {
            return Err(LifshitzError::Domain {
                what: "xi_cutoff_factor",
                value: self.xi_cutoff_factor.as_f64(),
            });
        }
        if self.max_panel_depth == 0 {
            return Err(LifshitzError::Domain {
                what: "max_panel_depth",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Fresnel coefficients at imaginary frequency for both bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection<T> {
    /// r∥ (transverse magnetic) for body 1 and body 2.
    pub tm: (T, T),
    /// r⊥ (transverse electric) for body 1 and body 2.
    pub te: (T, T),
}

/// Upper limit of y = 2zq; y² e^{−y} < 10⁻¹⁶ beyond it.
const Y_MAX: f64 = 44.0;

/// r∥ and r⊥ in the dimensionless variables y = 2zq, t = 2zξ/c, written
/// without the cancellations of the textbook form:
/// r∥ = (ε−1)((ε+1)y² − t²)/(εy + κ)², r⊥ = (ε−1)t²/(κ + y)², κ² = y² + (ε−1)t².
#[inline]
fn reflection_dimensionless<T: Scalar>(eps: T, y: T, t: T) -> (T, T) {
    let em1 = eps - T::one();
    let t2 = t * t;
    let kappa = (y * y + em1 * t2).sqrt();
    let tm_den = eps * y + kappa;
    let te_den = kappa + y;
    let tm = em1 * ((eps + T::one()) * y * y - t2) / (tm_den * tm_den);
    let te = em1 * t2 / (te_den * te_den);
    (tm, te)
}

/// Reflection coefficients at transverse wavenumber `k_perp` (rad/m) and
/// imaginary frequency `xi` (rad/s).
pub fn reflection_coeffs<T: Scalar>(
    eps1: T,
    eps2: T,
    k_perp: T,
    xi: T,
) -> Result<Reflection<T>, LifshitzError> {
    for (what, e) in [("permittivity ε₁", eps1), ("permittivity ε₂", eps2)] {
        if !(e >= T::one()) {
            return Err(LifshitzError::Domain {
                what,
                value: e.as_f64(),
            });
        }
    }
    if !(k_perp >= T::zero()) || !k_perp.is_finite() {
        return Err(LifshitzError::Domain {
            what: "transverse wavenumber",
            value: k_perp.as_f64(),
        });
    }
    if !(xi > T::zero()) || !xi.is_finite() {
        return Err(LifshitzError::Domain {
            what: "imaginary frequency",
            value: xi.as_f64(),
        });
    }
    // Only ratios enter, so scale by 2/c: t = 2ξ/c, y = 2q.
    let t = T::lit(2.0 / C) * xi;
    let y = (T::lit(4.0) * k_perp * k_perp + t * t).sqrt();
    let (tm1, te1) = reflection_dimensionless(eps1, y, t);
    let (tm2, te2) = reflection_dimensionless(eps2, y, t);
    Ok(Reflection {
        tm: (tm1, tm2),
        te: (te1, te2),
    })
}

/// π³ħcR/(360 z³): the ideal-metal limit of the force.
pub fn ideal_metal_force<T: Scalar>(z: T, radius: T) -> T {
    T::PI().powi(3) * T::lit(HBAR * C) * radius / (T::lit(360.0) * z * z * z)
}

/// Force magnitude at separation `z` (m) between a sphere of material 1 and
/// a plate of material 2, in N.
pub fn lifshitz_force<T, A, B>(
    z: T,
    geom: &Geometry<T>,
    mat1: &A,
    mat2: &B,
    spec: &QuadratureSpec<T>,
) -> Result<T, LifshitzError>
where
    T: Scalar,
    A: Permittivity<T> + ?Sized,
    B: Permittivity<T> + ?Sized,
{
    if !(z > T::zero() && z.is_finite()) {
        return Err(LifshitzError::Domain {
            what: "separation",
            value: z.as_f64(),
        });
    }
    spec.validate()?;
    let prefactor = T::lit(HBAR * C) * geom.radius / (T::lit(16.0) * T::PI() * z * z * z);
    let y_max = T::lit(Y_MAX);
    let t_max = spec.xi_cutoff_factor.min(y_max);
    let xi_per_t = T::lit(C) / (T::lit(2.0) * z);
    let outer_tol = Tolerance::relative(spec.rel_tol, spec.max_panel_depth);
    let inner_tol = Tolerance::relative(
        (spec.rel_tol * T::lit(0.1)).max(T::lit(10.0) * T::min_rel_tol()),
        spec.max_panel_depth,
    );

    let result = integrate(T::zero(), t_max, outer_tol, |t: T| -> Result<T, LifshitzError> {
        let xi = xi_per_t * t;
        let e1 = mat1.eps_imag_axis(xi)?;
        let e2 = mat2.eps_imag_axis(xi)?;
        if e1 == T::one() || e2 == T::one() {
            return Ok(T::zero());
        }
        let inner = integrate(t, y_max, inner_tol, |y: T| -> Result<T, LifshitzError> {
            let (tm1, te1) = reflection_dimensionless(e1, y, t);
            let (tm2, te2) = reflection_dimensionless(e2, y, t);
            let decay = (-y).exp();
            Ok(-y * ((-tm1 * tm2 * decay).ln_1p() + (-te1 * te2 * decay).ln_1p()))
        })?;
        Ok(inner.value)
    });
    match result {
        Ok(est) => Ok(prefactor * est.value),
        Err(LifshitzError::Quadrature(QuadratureError::NotConverged { estimate, error, .. })) => {
            Err(LifshitzError::NotConverged {
                estimate: prefactor.as_f64() * estimate,
                error: prefactor.as_f64() * error,
            })
        }
        Err(e) => Err(e),
    }
}
