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

//! Random, systematic and theoretical error components.

use super::{pooled_variance_of_mean, MeasurementEnsemble, StatsError};
use crate::constants::PN;
use crate::scalar::Scalar;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::fmt::Write as _;

fn check_confidence(confidence: f64) -> Result<(), StatsError> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(StatsError::Domain {
            what: "confidence",
            value: confidence,
        })
    }
}

/// Two-sided Student coefficient t_p(f) with p = (1 + β)/2.
pub fn student_quantile(dof: f64, confidence: f64) -> Result<f64, StatsError> {
    check_confidence(confidence)?;
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|_| StatsError::Domain {
        what: "degrees of freedom",
        value: dof,
    })?;
    let p = 0.5 * (1.0 + confidence);
    let mut hi = 1.0;
    while t.cdf(hi) < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if t.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Δ^rand = s_mean · t_p(n − 1).
pub fn random_error_student<T: Scalar>(s_mean: T, n: usize, confidence: f64) -> Result<T, StatsError> {
    if n < 2 {
        return Err(StatsError::Domain {
            what: "number of sets",
            value: n as f64,
        });
    }
    if !(s_mean >= T::zero()) {
        return Err(StatsError::Domain {
            what: "s_mean",
            value: s_mean.as_f64(),
        });
    }
    Ok(s_mean * T::lit(student_quantile((n - 1) as f64, confidence)?))
}

/// Coefficient k(β) of the root-sum-square composition rule.
pub fn composition_coefficient(confidence: f64) -> Result<f64, StatsError> {
    if (confidence - 0.95).abs() < 1e-12 {
        Ok(1.1)
    } else if (confidence - 0.99).abs() < 1e-12 {
        Ok(1.4)
    } else {
        Err(StatsError::UnsupportedConfidence(confidence))
    }
}

/// Symmetric β-interval half-width of a sum of independent zero-mean uniform
/// variables with the given half-widths, from the closed-form piecewise
/// polynomial distribution function.
pub fn uniform_sum_quantile(half_widths: &[f64], confidence: f64) -> Result<f64, StatsError> {
    check_confidence(confidence)?;
    let w: Vec<f64> = half_widths.iter().filter(|&&a| a > 0.0).map(|a| 2.0 * a).collect();
    let n = w.len();
    if n == 0 {
        return Ok(0.0);
    }
    if n > 12 {
        return Err(StatsError::Domain {
            what: "component count for the closed form",
            value: n as f64,
        });
    }
    let total: f64 = w.iter().sum();
    let norm: f64 = (1..=n).map(|k| k as f64).product::<f64>() * w.iter().product::<f64>();
    // Distribution function of Σ U_i with U_i ~ U[0, w_i].
    let cdf = |y: f64| -> f64 {
        let mut acc = 0.0;
        for mask in 0u32..(1 << n) {
            let shift: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| w[i]).sum();
            let x = y - shift;
            if x > 0.0 {
                let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * x.powi(n as i32);
            }
        }
        (acc / norm).clamp(0.0, 1.0)
    };
    let target = 0.5 * (1.0 + confidence);
    let (mut lo, mut hi) = (0.5 * total, total);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * total {
            break;
        }
    }
    Ok(0.5 * (lo + hi) - 0.5 * total)
}

/// Δ^syst for uniform components with half-widths `half_widths`:
/// k(β)·√Σa², capped at Σa.
///
/// Up to four components the rule is held between the exact quantile of the
/// composition and 5% above it. The result is never below the largest single
/// half-width.
pub fn compose_uniform_systematics<T: Scalar>(
    half_widths: &[T],
    confidence: f64,
) -> Result<T, StatsError> {
    let k = composition_coefficient(confidence)?;
    let a: Vec<f64> = half_widths.iter().map(|h| h.as_f64()).collect();
    if let Some(bad) = a.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(StatsError::Domain {
            what: "systematic half-width",
            value: *bad,
        });
    }
    let nonzero = a.iter().filter(|&&x| x > 0.0).count();
    let largest = a.iter().copied().fold(0.0, f64::max);
    let rss = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut value = (k * rss).min(a.iter().sum());
    if nonzero <= 4 {
        let exact = uniform_sum_quantile(&a, confidence)?;
        value = value.clamp(exact, 1.05 * exact);
    }
    Ok(T::lit(value.max(largest)))
}

/// Combines random and systematic errors. In the band
/// 0.8 ≤ Δ^syst/s ≤ 8, widened by 5% at each edge, Δ^tot = 0.8(Δ^rand + Δ^syst);
/// elsewhere Δ^tot = √(Δ^rand² + Δ^syst²). Never below either input.
pub fn total_experimental_error<T: Scalar>(
    delta_rand: T,
    delta_syst: T,
    s_mean: T,
    confidence: f64,
) -> Result<T, StatsError> {
    if (confidence - 0.95).abs() > 1e-12 {
        return Err(StatsError::UnsupportedConfidence(confidence));
    }
    for (what, v) in [
        ("delta_rand", delta_rand),
        ("delta_syst", delta_syst),
        ("s_mean", s_mean),
    ] {
        if !(v >= T::zero() && v.is_finite()) {
            return Err(StatsError::Domain {
                what,
                value: v.as_f64(),
            });
        }
    }
    let (r, s, sd) = (delta_rand.as_f64(), delta_syst.as_f64(), s_mean.as_f64());
    let ratio = if sd > 0.0 { s / sd } else if s > 0.0 { f64::INFINITY } else { 0.0 };
    let total = if (0.8 * 0.95..=8.0 * 1.05).contains(&ratio) {
        0.8 * (r + s)
    } else {
        r.hypot(s)
    };
    Ok(T::lit(total.max(r).max(s)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalErrorBudget<T> {
    pub s_mean: T,
    pub n: usize,
    pub t_p: T,
    pub delta_rand: T,
    pub systematic_components: Vec<(String, T)>,
    pub delta_syst: T,
    pub delta_total: T,
    pub confidence: f64,
}

impl<T: Scalar> ExperimentalErrorBudget<T> {
    pub fn from_parts(
        s_mean: T,
        n: usize,
        systematic_components: Vec<(String, T)>,
        confidence: f64,
    ) -> Result<Self, StatsError> {
        let t_p = T::lit(student_quantile(n.saturating_sub(1).max(1) as f64, confidence)?);
        let delta_rand = random_error_student(s_mean, n, confidence)?;
        let halves: Vec<T> = systematic_components.iter().map(|c| c.1).collect();
        let delta_syst = compose_uniform_systematics(&halves, confidence)?;
        let delta_total = total_experimental_error(delta_rand, delta_syst, s_mean, confidence)?;
        Ok(Self {
            s_mean,
            n,
            t_p,
            delta_rand,
            systematic_components,
            delta_syst,
            delta_total,
            confidence,
        })
    }

    /// `key = value` report, forces in pN.
    pub fn report(&self) -> String {
        let pn = |x: T| x.as_f64() / PN;
        let mut s = String::new();
        let _ = writeln!(s, "n_sets = {}", self.n);
        let _ = writeln!(s, "confidence = {}", self.confidence);
        let _ = writeln!(s, "s_mean_pN = {:.6}", pn(self.s_mean));
        let _ = writeln!(s, "t_p = {:.6}", self.t_p.as_f64());
        let _ = writeln!(s, "delta_rand_pN = {:.6}", pn(self.delta_rand));
        for (label, a) in &self.systematic_components {
            let _ = writeln!(s, "systematic.{label}_pN = {:.6}", pn(*a));
        }
        let _ = writeln!(s, "delta_syst_pN = {:.6}", pn(self.delta_syst));
        let _ = writeln!(s, "delta_total_pN = {:.6}", pn(self.delta_total));
        s
    }
}

/// Budget for an ensemble, pooling the variance of the mean over `window`.
pub fn experimental_error_budget<T: Scalar>(
    ens: &MeasurementEnsemble<T>,
    window: T,
    systematic_components: Vec<(String, T)>,
    confidence: f64,
) -> Result<ExperimentalErrorBudget<T>, StatsError> {
    let s_mean = pooled_variance_of_mean(ens, window)?;
    ExperimentalErrorBudget::from_parts(s_mean, ens.n(), systematic_components, confidence)
}

/// Relative theoretical error components at one separation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TheoreticalErrorBudget<T> {
    /// Proximity-force approximation, z/R.
    pub delta1: T,
    /// Optical data.
    pub delta2: T,
    /// δ₁ and δ₂ composed as uniform distributions.
    pub delta0: T,
    /// ΔR/R + 3Δz/z.
    pub delta3: T,
    pub delta_theor: T,
    pub z: T,
    pub radius: T,
    pub radius_uncertainty: T,
    pub separation_uncertainty: T,
}

/// δ^theor combines δ₀, whose standard deviation is taken as δ₀/2, with the
/// uniform δ₃ by [`total_experimental_error`].
pub fn theoretical_error_budget<T: Scalar>(
    z: T,
    radius: T,
    radius_uncertainty: T,
    separation_uncertainty: T,
    delta2: T,
) -> Result<TheoreticalErrorBudget<T>, StatsError> {
    for (what, v, strict) in [
        ("separation", z, true),
        ("radius", radius, true),
        ("radius uncertainty", radius_uncertainty, false),
        ("separation uncertainty", separation_uncertainty, false),
        ("delta2", delta2, false),
    ] {
        let ok = v.is_finite() && if strict { v > T::zero() } else { v >= T::zero() };
        if !ok {
            return Err(StatsError::Domain {
                what,
                value: v.as_f64(),
            });
        }
    }
    let delta1 = z / radius;
    let delta3 = radius_uncertainty / radius + T::lit(3.0) * separation_uncertainty / z;
    if !delta3.is_finite() {
        return Err(StatsError::Domain {
            what: "delta3 (separation too small)",
            value: z.as_f64(),
        });
    }
    let delta0 = compose_uniform_systematics(&[delta1, delta2], 0.95)?;
    let delta_theor = total_experimental_error(delta0, delta3, delta0 * T::lit(0.5), 0.95)?;
    Ok(TheoreticalErrorBudget {
        delta1,
        delta2,
        delta0,
        delta3,
        delta_theor,
        z,
        radius,
        radius_uncertainty,
        separation_uncertainty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn student_coefficients() {
        assert_relative_eq!(student_quantile(64.0, 0.95).unwrap(), 2.0, max_relative = 5e-3);
        assert_relative_eq!(student_quantile(1e7, 0.95).unwrap(), 1.959964, max_relative = 1e-4);
        assert_relative_eq!(student_quantile(1.0, 0.95).unwrap(), 12.7062, max_relative = 1e-4);
        assert_eq!(random_error_student(0.0, 65, 0.95).unwrap(), 0.0);
        assert!(random_error_student(1.0, 1, 0.95).is_err());
        assert!(random_error_student(1.0, 10, 1.0).is_err());
    }

    #[test]
    fn single_uniform_quantile() {
        assert_relative_eq!(uniform_sum_quantile(&[2.0], 0.95).unwrap(), 1.9, max_relative = 1e-12);
        assert_eq!(compose_uniform_systematics(&[2.0], 0.95).unwrap(), 2.0);
        assert_eq!(compose_uniform_systematics::<f64>(&[0.0, 0.0], 0.95).unwrap(), 0.0);
        assert_eq!(compose_uniform_systematics::<f64>(&[], 0.95).unwrap(), 0.0);
    }

    #[test]
    fn two_equal_uniforms_closed_form() {
        // Triangular on [-2a, 2a]: P(|X| > x) = (2a - x)²/(4a²).
        let q = uniform_sum_quantile(&[1.0, 1.0], 0.95).unwrap();
        assert_relative_eq!(q, 2.0 - (0.05f64 * 4.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn composition_rules() {
        let v = compose_uniform_systematics(&[0.82, 0.55, 0.31, 0.12], 0.95).unwrap();
        assert!((v - 1.15f64).abs() <= 0.05, "{v}");
        let many = [0.3, 0.3, 0.3, 0.3, 0.3, 0.3];
        let r = compose_uniform_systematics(&many, 0.95).unwrap();
        assert_relative_eq!(r, 1.1 * (6.0f64 * 0.09).sqrt(), max_relative = 1e-12);
        let r99 = compose_uniform_systematics(&many, 0.99).unwrap();
        assert_relative_eq!(r99, 1.4 * (6.0f64 * 0.09).sqrt(), max_relative = 1e-12);
        assert!(compose_uniform_systematics(&[1.0], 0.9).is_err());
        assert!(compose_uniform_systematics(&[-1.0], 0.95).is_err());
    }

    #[test]
    fn total_error_rules() {
        let t = total_experimental_error(3.0, 1.17, 1.5, 0.95).unwrap();
        assert_relative_eq!(t, 0.8 * 4.17, max_relative = 1e-12);
        assert_eq!(total_experimental_error(3.0, 0.0, 1.5, 0.95).unwrap(), 3.0);
        assert_eq!(total_experimental_error(0.0, 2.0, 0.0, 0.95).unwrap(), 2.0);
        let out = total_experimental_error(1.0, 100.0, 1.0, 0.95).unwrap();
        assert_relative_eq!(out, 1.0f64.hypot(100.0), max_relative = 1e-12);
        assert!(total_experimental_error(1.0, 1.0, 1.0, 0.99).is_err());
    }

    #[test]
    fn reference_budget() {
        let comps = [("a", 0.82), ("b", 0.55), ("c", 0.31), ("d", 0.12)]
            .iter()
            .map(|(l, v)| (l.to_string(), v * PN))
            .collect();
        let b = ExperimentalErrorBudget::from_parts(1.5 * PN, 65, comps, 0.95).unwrap();
        assert_relative_eq!(b.delta_rand / PN, 3.0, max_relative = 1e-2);
        assert!((b.delta_total / PN - 3.33).abs() <= 0.05, "{}", b.delta_total / PN);
        assert!(b.delta_total >= b.delta_rand.max(b.delta_syst));
        assert!(b.report().contains("delta_total_pN"));
    }

    #[test]
    fn theoretical_budget() {
        let t = theoretical_error_budget(62.33e-9, 101.3e-6, 0.15e-6, 0.8e-9, 0.005).unwrap();
        assert_relative_eq!(t.delta3, 0.15 / 101.3 + 2.4 / 62.33, max_relative = 1e-12);
        assert!((t.delta3 - 0.040f64).abs() < 1e-3);
        let top = t.delta0.max(t.delta1).max(t.delta2).max(t.delta3);
        assert!(t.delta_theor >= top);
        let flat = theoretical_error_budget(62.33e-9, 101.3e-6, 0.0, 0.0, 0.005).unwrap();
        assert_eq!(flat.delta3, 0.0);
        assert_eq!(flat.delta_theor, flat.delta0);
        assert!(theoretical_error_budget(0.0, 1.0, 0.0, 1e-9, 0.005).is_err());
        assert!(theoretical_error_budget(1e-300, 1.0, 0.0, 1e10, 0.005).is_err());
    }
}
