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

//! Sphere-plate electrostatics and the voltage-sweep calibration fit.
//!
//! The capacitance of a sphere of radius R at gap z above a grounded plane
//! follows from the image-charge series
//!
//! ```text
//! C(z) = 4πε₀R sinh α Σ_{n≥1} 1/sinh(nα),   cosh α = 1 + z/R,
//! ```
//!
//! and the attraction at potential difference V − V₀ is ½(V − V₀)²|dC/dz|.

mod calibration;

pub use calibration::{
    fit_calibration, synthesize_sweep, CalibrationFit, CalibrationRun, CalibrationSweep,
    FitOptions, SweepDesign,
};

use crate::constants::EPS0;
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElectrostaticsError {
    #[error("{what} out of range: {value:e}")]
    Domain { what: &'static str, value: f64 },
    #[error("image series not converged after {terms} terms (partial sum {partial:e})")]
    NotConverged { terms: usize, partial: f64 },
    #[error("invalid calibration sweep: {0}")]
    InvalidSweep(String),
    #[error("calibration fit failed: {0}")]
    FitFailed(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Default cap on the number of image terms.
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

/// cosh α = 1 + z/R, computed without cancellation for z ≪ R.
fn alpha<T: Scalar>(z: T, radius: T) -> T {
    let u = z / radius;
    (u + (u * (u + T::lit(2.0))).sqrt()).ln_1p()
}

fn check<T: Scalar>(z: T, radius: T) -> Result<(), ElectrostaticsError> {
    if !(z > T::zero() && z.is_finite()) {
        return Err(ElectrostaticsError::Domain {
            what: "separation",
            value: z.as_f64(),
        });
    }
    if !(radius > T::zero() && radius.is_finite()) {
        return Err(ElectrostaticsError::Domain {
            what: "sphere radius",
            value: radius.as_f64(),
        });
    }
    Ok(())
}

/// Σ csch(nα) and Σ n coth(nα) csch(nα), summed until the next term of
/// both falls below 1e-15 of its running sum.
fn image_sums<T: Scalar>(a: T, max_terms: usize) -> Result<(T, T), ElectrostaticsError> {
    let q = (-a).exp();
    let tiny = T::lit(1e-15).max(T::epsilon());
    let (mut s0, mut s1) = (T::zero(), T::zero());
    let mut qn = T::one();
    for n in 1..=max_terms {
        qn = qn * q;
        let q2n = qn * qn;
        let csch = T::lit(2.0) * qn / (T::one() - q2n);
        let coth = (T::one() + q2n) / (T::one() - q2n);
        let t0 = csch;
        let t1 = T::lit(n as f64) * coth * csch;
        s0 = s0 + t0;
        s1 = s1 + t1;
        if t0 < tiny * s0 && t1 < tiny * s1 {
            return Ok((s0, s1));
        }
    }
    Err(ElectrostaticsError::NotConverged {
        terms: max_terms,
        partial: s0.as_f64(),
    })
}

/// Capacitance of the sphere-plate pair, F.
pub fn sphere_plate_capacitance<T: Scalar>(
    z: T,
    radius: T,
    max_terms: usize,
) -> Result<T, ElectrostaticsError> {
    check(z, radius)?;
    let a = alpha(z, radius);
    let (s0, _) = image_sums(a, max_terms)?;
    Ok(T::lit(4.0 * EPS0) * T::PI() * radius * a.sinh() * s0)
}

/// dC/dz, F/m (negative), from the term-by-term derivative of the series.
pub fn capacitance_gradient<T: Scalar>(
    z: T,
    radius: T,
    max_terms: usize,
) -> Result<T, ElectrostaticsError> {
    check(z, radius)?;
    let a = alpha(z, radius);
    let (s0, s1) = image_sums(a, max_terms)?;
    // d/dα [sinh α Σ csch nα] · dα/dz with dα/dz = 1/(R sinh α).
    let ds = a.cosh() * s0 - a.sinh() * s1;
    Ok(T::lit(4.0 * EPS0) * T::PI() * ds / a.sinh())
}

/// Magnitude of the attraction ½(V − V₀)²|dC/dz|, N.
pub fn electrostatic_force<T: Scalar>(
    z: T,
    radius: T,
    v: T,
    v0: T,
) -> Result<T, ElectrostaticsError> {
    let dv = v - v0;
    let g = capacitance_gradient(z, radius, DEFAULT_MAX_TERMS)?;
    Ok(T::lit(0.5) * dv * dv * g.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const R: f64 = 101.3e-6;

    #[test]
    fn isolated_sphere_limit() {
        let c = sphere_plate_capacitance(1e3 * R, R, DEFAULT_MAX_TERMS).unwrap();
        assert_relative_eq!(c, 4.0 * PI * EPS0 * R, max_relative = 1e-3);
    }

    #[test]
    fn small_gap_asymptote() {
        let z = 32.1e-9;
        let c = sphere_plate_capacitance(z, R, DEFAULT_MAX_TERMS).unwrap();
        let asym = 2.0 * PI * EPS0 * R * ((R / z).ln() + 2f64.ln() + 23.0 / 20.0);
        assert_relative_eq!(c, asym, max_relative = 1e-2);
    }

    #[test]
    fn scales_with_radius() {
        let a = sphere_plate_capacitance(1e-7, R, DEFAULT_MAX_TERMS).unwrap();
        let b = sphere_plate_capacitance(2e-7, 2.0 * R, DEFAULT_MAX_TERMS).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
    }

    #[test]
    fn term_cap_reports_partial_sum() {
        match sphere_plate_capacitance(32.1e-9, R, 10) {
            Err(ElectrostaticsError::NotConverged { terms, partial }) => {
                assert_eq!(terms, 10);
                assert!(partial > 0.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(sphere_plate_capacitance(0.0, R, 10).is_err());
        assert!(sphere_plate_capacitance(1e-9, -R, 10).is_err());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        for z in crate::materials::log_space(10e-9, 50e-6, 20) {
            let g = capacitance_gradient(z, R, DEFAULT_MAX_TERMS).unwrap();
            assert!(g < 0.0);
            let h = 1e-4 * z;
            let c = |z| sphere_plate_capacitance(z, R, DEFAULT_MAX_TERMS).unwrap();
            // fourth-order central difference
            let fd = (c(z - 2.0 * h) - 8.0 * c(z - h) + 8.0 * c(z + h) - c(z + 2.0 * h)) / (12.0 * h);
            assert_relative_eq!(g, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn force_limits() {
        assert_eq!(electrostatic_force(1e-7, R, -0.114, -0.114).unwrap(), 0.0);
        let a = electrostatic_force(1e-7, R, 0.2, -0.114).unwrap();
        let b = electrostatic_force(1e-7, R, -0.428, -0.114).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        let pfa = PI * EPS0 * R * 0.09 / 1e-7;
        let f = electrostatic_force(1e-7, R, 0.3, 0.0).unwrap();
        assert_relative_eq!(f, pfa, max_relative = 2e-2);
    }

    #[test]
    fn single_precision() {
        let c = sphere_plate_capacitance(1e-6f32, 101.3e-6, DEFAULT_MAX_TERMS).unwrap();
        let d = sphere_plate_capacitance(1e-6f64, R, DEFAULT_MAX_TERMS).unwrap();
        assert_relative_eq!(c as f64, d, max_relative = 1e-4);
    }
}
