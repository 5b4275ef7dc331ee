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

//! Dispersion integral from tabulated Im ε(ω) to ε(iξ).
//!
//! Between rows Im ε is interpolated linearly in ln ω, so the result is
//! linear in the tabulated values. Each panel is integrated in u = ln ω,
//! where the kernel ω²/(ω² + ξ²) is a smooth logistic step, using
//! Gauss–Legendre on sub-panels no wider than 0.35 in u. Tails below the
//! first and above the last row are integrated in closed form.

use super::{check_xi, DrudeParams, HighFrequencyExtension, LowFrequencyExtension};
use super::{MaterialError, OpticalDataTable};
use crate::quadrature::{gauss_legendre8, integrate, QuadratureError, Tolerance};
use crate::scalar::Scalar;

/// Continuations of a table outside its frequency band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extensions<T> {
    pub low: LowFrequencyExtension,
    pub high: HighFrequencyExtension,
    /// Required for [`LowFrequencyExtension::DrudeTail`].
    pub drude: Option<DrudeParams<T>>,
}

impl<T> Extensions<T> {
    pub fn none() -> Self {
        Self {
            low: LowFrequencyExtension::None,
            high: HighFrequencyExtension::Vacuum,
            drude: None,
        }
    }
}

const MAX_SUBPANEL_WIDTH: f64 = 0.35;

/// ε(iξ) from the table and its extensions.
///
/// The table together with its extensions must cover at least one decade
/// on either side of ξ, otherwise the missing decades are reported as
/// [`MaterialError::InsufficientOpticalData`].
pub fn kramers_kronig_imag_axis<T: Scalar>(
    table: &OpticalDataTable<T>,
    ext: &Extensions<T>,
    xi: T,
) -> Result<T, MaterialError> {
    check_xi(xi)?;
    check_coverage(table, ext, xi)?;

    let two_over_pi = T::lit(2.0) / T::PI();
    let xi2 = xi * xi;
    let kernel = |u: T, f: T| {
        let w = u.exp();
        f / (T::one() + xi2 / (w * w))
    };

    let omega = table.omega();
    let eps_im = table.eps_im();
    let mut body = T::zero();
    for i in 0..omega.len() - 1 {
        let (fa, fb) = (eps_im[i], eps_im[i + 1]);
        if fa == T::zero() && fb == T::zero() {
            continue;
        }
        let (ua, ub) = (omega[i].ln(), omega[i + 1].ln());
        let du = ub - ua;
        let slope = (fb - fa) / du;
        let n = (du / T::lit(MAX_SUBPANEL_WIDTH)).ceil().to_usize().unwrap_or(1).max(1);
        let h = du / T::from_usize(n).unwrap();
        for j in 0..n {
            let a = ua + h * T::from_usize(j).unwrap();
            body = body + gauss_legendre8(a, a + h, |u| kernel(u, fa + slope * (u - ua)));
        }
    }

    let (w_lo, w_hi) = table.span();
    let low = match ext.low {
        LowFrequencyExtension::None => T::zero(),
        LowFrequencyExtension::Constant => {
            let c = eps_im[0];
            // ∫₀^ω₁ ω c/(ω²+ξ²) dω = (c/2) ln(1 + ω₁²/ξ²)
            let r = w_lo / xi;
            let log_term = if r > T::one() {
                T::lit(2.0) * r.ln() + (T::one() / (r * r)).ln_1p()
            } else {
                (r * r).ln_1p()
            };
            c * T::lit(0.5) * log_term
        }
        LowFrequencyExtension::DrudeTail => {
            let d = ext.drude.ok_or(MaterialError::MissingDrude)?;
            drude_tail(&d, w_lo, xi)?
        }
    };

    let high = match ext.high {
        HighFrequencyExtension::Vacuum => T::zero(),
        HighFrequencyExtension::PowerLaw => {
            let n = omega.len();
            let ln_c = ln_power_law_coefficient(&omega[n - 2..], &eps_im[n - 2..]);
            // ∫_{ω_N}^∞ C ω⁻²/(ω²+ξ²) dω = C/(ξ² ω_N) · (1 − atan(x)/x), x = ξ/ω_N
            let x = xi / w_hi;
            let bracket = if x < T::lit(1e-2) {
                let x2 = x * x;
                x2 * (T::one() / T::lit(3.0) - x2 * (T::lit(0.2) - x2 / T::lit(7.0)))
            } else {
                T::one() - x.atan() / x
            };
            match ln_c {
                Some(ln_c) => (ln_c - T::lit(2.0) * xi.ln() - w_hi.ln()).exp() * bracket,
                None => T::zero(),
            }
        }
    };

    Ok(T::one() + two_over_pi * (body + low + high))
}

/// ln C for Im ε = C/ω³: the geometric mean of ω³ Im ε over the given rows,
/// or the last row alone when an earlier one is zero. `None` when C = 0.
fn ln_power_law_coefficient<T: Scalar>(omega: &[T], eps_im: &[T]) -> Option<T> {
    let last = omega.len() - 1;
    if eps_im.iter().all(|&e| e > T::zero()) {
        let n = T::from_usize(omega.len()).unwrap();
        let sum: T = omega
            .iter()
            .zip(eps_im)
            .map(|(&w, &e)| e.ln() + T::lit(3.0) * w.ln())
            .sum();
        Some(sum / n)
    } else if eps_im[last] > T::zero() {
        Some(eps_im[last].ln() + T::lit(3.0) * omega[last].ln())
    } else {
        None
    }
}

/// ∫₀^ω₁ ω Im ε_D(ω)/(ω²+ξ²) dω = ω_p²γ ∫₀^ω₁ dω / ((ω²+γ²)(ω²+ξ²)).
/// Evaluated in `f64` regardless of `T`: ω_p²γ overflows single precision.
fn drude_tail<T: Scalar>(d: &DrudeParams<T>, w1: T, xi: T) -> Result<T, MaterialError> {
    let (wp, g, w1, xi) = (d.omega_p.as_f64(), d.gamma.as_f64(), w1.as_f64(), xi.as_f64());
    Ok(T::lit(drude_tail_f64(wp, g, w1, xi)?))
}

fn drude_tail_f64(wp: f64, g: f64, w1: f64, xi: f64) -> Result<f64, MaterialError> {
    let wp2g = wp * wp * g;
    let denom = xi * xi - g * g;
    if denom.abs() > 1e-2 * (xi * xi).max(g * g) {
        let i = ((w1 / g).atan() / g - (w1 / xi).atan() / xi) / denom;
        return Ok(wp2g * i);
    }
    // ξ ≈ γ: the partial-fraction form cancels, integrate directly in ln ω.
    let (xi2, g2) = (xi * xi, g * g);
    let ub = w1.ln();
    let est = integrate(
        g.min(xi).min(w1).ln() - 40.0,
        ub,
        Tolerance::relative(1e-12, 40),
        |u: f64| -> Result<f64, QuadratureError> {
            let w = u.exp();
            let w2 = w * w;
            Ok(w / ((w2 + g2) * (w2 + xi2)))
        },
    )
    .map_err(|e| MaterialError::InvalidTable(format!("Drude tail: {e}")))?;
    Ok(wp2g * est.value)
}

fn check_coverage<T: Scalar>(
    table: &OpticalDataTable<T>,
    ext: &Extensions<T>,
    xi: T,
) -> Result<(), MaterialError> {
    let (lo, hi) = table.span();
    let (lo, hi) = (lo.as_f64(), hi.as_f64());
    let x = xi.as_f64();
    let mut uncovered = Vec::new();
    if ext.low == LowFrequencyExtension::None && lo > x / 10.0 {
        uncovered.extend(decades(x / 10.0, lo));
    }
    if ext.high == HighFrequencyExtension::Vacuum && hi < x * 10.0 {
        uncovered.extend(decades(hi, x * 10.0));
    }
    if uncovered.is_empty() {
        Ok(())
    } else {
        Err(MaterialError::InsufficientOpticalData {
            xi: x,
            uncovered,
            span: (lo, hi),
        })
    }
}

fn decades(lo: f64, hi: f64) -> Vec<String> {
    let a = lo.log10().floor() as i32;
    let b = (hi.log10().ceil() as i32).max(a + 1);
    (a..b).map(|k| format!("10^{k}–10^{} rad/s", k + 1)).collect()
}
