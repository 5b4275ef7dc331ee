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

//! Theory against experiment: differences inside the envelope Ξ(z), the
//! agreement measure Ξ/|F^theor|, and force ratios between material pairs.

pub mod svg;

use self::svg::{Figure, Series};
use crate::lifshitz::ForceCurve;
use crate::scalar::Scalar;
use crate::stats::ConfidenceEnvelope;
use crate::units::format_scaled;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no usable points: {0}")]
    Empty(String),
}

fn aligned<T: Scalar>(what: &str, a: &[T], b: &[T]) -> Result<(), CompareError> {
    if a.len() != b.len() {
        return Err(CompareError::GridMismatch(format!(
            "{what}: {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if (*x - *y).abs() > T::lit(1e-9) * x.abs().max(y.abs()) {
            return Err(CompareError::GridMismatch(format!(
                "{what}: point {i} at {:e} m vs {:e} m",
                x.as_f64(),
                y.as_f64()
            )));
        }
    }
    Ok(())
}

/// Minimum of the agreement measure and the contiguous separation range
/// around it where the measure stays within 1% of the minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementMinimum<T> {
    pub value: T,
    pub z_at_min: T,
    pub z_lo: T,
    pub z_hi: T,
}

/// Relative width of the plateau reported around the agreement minimum.
pub const PLATEAU_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementMeasure<T> {
    pub points: Vec<(T, T)>,
    /// Separations skipped because the theoretical force vanishes there.
    pub excluded: Vec<T>,
    pub minimum: AgreementMinimum<T>,
}

/// Pointwise Ξ(z)/|F^theor(z)|.
pub fn agreement_measure<T: Scalar>(
    envelope: &ConfidenceEnvelope<T>,
    f_theor: &ForceCurve<T>,
) -> Result<AgreementMeasure<T>, CompareError> {
    let ze: Vec<T> = envelope.points().iter().map(|p| p.0).collect();
    aligned("envelope vs theory", &ze, &f_theor.separations())?;
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (&(z, xi), &(_, f)) in envelope.points().iter().zip(f_theor.points()) {
        if f.abs() > T::zero() {
            points.push((z, xi / f.abs()));
        } else {
            excluded.push(z);
        }
    }
    let (imin, &(z_at_min, value)) = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).expect("finite measure"))
        .ok_or_else(|| CompareError::Empty("theoretical force is zero everywhere".into()))?;
    let limit = value * T::lit(1.0 + PLATEAU_TOLERANCE);
    let mut lo = imin;
    while lo > 0 && points[lo - 1].1 <= limit {
        lo -= 1;
    }
    let mut hi = imin;
    while hi + 1 < points.len() && points[hi + 1].1 <= limit {
        hi += 1;
    }
    Ok(AgreementMeasure {
        minimum: AgreementMinimum {
            value,
            z_at_min,
            z_lo: points[lo].0,
            z_hi: points[hi].0,
        },
        points,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    /// (z, F^theor − F̄^expt)
    pub differences: Vec<(T, T)>,
    pub envelope: ConfidenceEnvelope<T>,
    pub within: Vec<bool>,
    pub fraction_within: f64,
    pub agreement: AgreementMeasure<T>,
    /// Smallest separation where |F^theor| < Ξ.
    pub cutoff_z: Option<T>,
}

pub fn difference_report<T: Scalar>(
    f_theor: &ForceCurve<T>,
    f_expt: &ForceCurve<T>,
    envelope: &ConfidenceEnvelope<T>,
) -> Result<ComparisonReport<T>, CompareError> {
    let zt = f_theor.separations();
    aligned("theory vs experiment", &zt, &f_expt.separations())?;
    let ze: Vec<T> = envelope.points().iter().map(|p| p.0).collect();
    aligned("theory vs envelope", &zt, &ze)?;
    if zt.is_empty() {
        return Err(CompareError::Empty("empty curves".into()));
    }
    let differences: Vec<(T, T)> = f_theor
        .points()
        .iter()
        .zip(f_expt.points())
        .map(|(a, b)| (a.0, a.1 - b.1))
        .collect();
    let within: Vec<bool> = differences
        .iter()
        .zip(envelope.points())
        .map(|(d, e)| d.1.abs() <= e.1)
        .collect();
    let fraction_within = within.iter().filter(|w| **w).count() as f64 / within.len() as f64;
    let cutoff_z = f_theor
        .points()
        .iter()
        .zip(envelope.points())
        .find(|(f, e)| f.1.abs() < e.1)
        .map(|(f, _)| f.0);
    Ok(ComparisonReport {
        agreement: agreement_measure(envelope, f_theor)?,
        differences,
        envelope: envelope.clone(),
        within,
        fraction_within,
        cutoff_z,
    })
}

impl<T: Scalar> ComparisonReport<T> {
    /// `z_nm,diff_pN,xi_pN,within`
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("z_nm,diff_pN,xi_pN,within\n");
        for ((d, e), w) in self.differences.iter().zip(self.envelope.points()).zip(&self.within) {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                format_scaled(d.0.as_f64(), 9),
                format_scaled(d.1.as_f64(), 12),
                format_scaled(e.1.as_f64(), 12),
                u8::from(*w)
            );
        }
        s
    }

    /// `z_nm,agreement`
    pub fn agreement_csv(&self) -> String {
        let mut s = String::from("z_nm,agreement\n");
        for &(z, a) in &self.agreement.points {
            let _ = writeln!(s, "{},{:e}", format_scaled(z.as_f64(), 9), a.as_f64());
        }
        s
    }

    /// `key = value` summary.
    pub fn summary(&self) -> String {
        let m = &self.agreement.minimum;
        let mut s = String::new();
        let _ = writeln!(s, "points = {}", self.differences.len());
        let _ = writeln!(s, "fraction_within = {:.6}", self.fraction_within);
        let _ = writeln!(s, "agreement_min_percent = {:.4}", 100.0 * m.value.as_f64());
        let _ = writeln!(s, "agreement_min_z_nm = {:.4}", m.z_at_min.as_f64() * 1e9);
        let _ = writeln!(
            s,
            "agreement_plateau_nm = {:.4}..{:.4}",
            m.z_lo.as_f64() * 1e9,
            m.z_hi.as_f64() * 1e9
        );
        match self.cutoff_z {
            Some(z) => {
                let _ = writeln!(s, "cutoff_z_nm = {:.4}", z.as_f64() * 1e9);
            }
            None => {
                let _ = writeln!(s, "cutoff_z_nm = none");
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::Flat => "flat",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceRatio<T> {
    pub points: Vec<(T, T)>,
    pub excluded: Vec<T>,
    /// Least-squares slope of the ratio against z, 1/m.
    pub slope: T,
    pub trend: Trend,
}

impl<T: Scalar> ForceRatio<T> {
    /// Whether the ratio strictly decreases between `z_lo` and `z_hi`.
    pub fn strictly_decreasing_within(&self, z_lo: T, z_hi: T) -> bool {
        let sel: Vec<T> = self
            .points
            .iter()
            .filter(|p| p.0 >= z_lo && p.0 <= z_hi)
            .map(|p| p.1)
            .collect();
        sel.len() >= 2 && sel.windows(2).all(|w| w[1] < w[0])
    }

    /// Linear interpolation of the ratio at `z`.
    pub fn at(&self, z: T) -> Option<T> {
        let i = self.points.iter().position(|p| p.0 >= z)?;
        if self.points[i].0 == z || i == 0 {
            return (self.points[i].0 == z).then_some(self.points[i].1);
        }
        let (a, b) = (self.points[i - 1], self.points[i]);
        Some(a.1 + (b.1 - a.1) * (z - a.0) / (b.0 - a.0))
    }

    /// `z_nm,ratio`
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("z_nm,ratio\n");
        for &(z, r) in &self.points {
            let _ = writeln!(s, "{},{:e}", format_scaled(z.as_f64(), 9), r.as_f64());
        }
        s
    }
}

/// Pointwise `curve_a / curve_b` with a trend classification from the sign
/// of the fitted slope.
pub fn force_ratio<T: Scalar>(
    curve_a: &ForceCurve<T>,
    curve_b: &ForceCurve<T>,
) -> Result<ForceRatio<T>, CompareError> {
    aligned("ratio curves", &curve_a.separations(), &curve_b.separations())?;
    let scale = curve_b
        .points()
        .iter()
        .fold(T::zero(), |m, p| m.max(p.1.abs()));
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (a, b) in curve_a.points().iter().zip(curve_b.points()) {
        if b.1.abs() > T::epsilon() * scale && b.1 != T::zero() {
            points.push((a.0, a.1 / b.1));
        } else {
            excluded.push(a.0);
        }
    }
    if points.is_empty() {
        return Err(CompareError::Empty("denominator vanishes everywhere".into()));
    }
    let n = T::lit(points.len() as f64);
    let mz = points.iter().map(|p| p.0).sum::<T>() / n;
    let mr = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = points.iter().map(|p| (p.0 - mz) * (p.0 - mz)).sum::<T>();
    let sxy = points.iter().map(|p| (p.0 - mz) * (p.1 - mr)).sum::<T>();
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let span = points.last().unwrap().0 - points[0].0;
    let change = slope * span;
    let flat = T::lit(1e-6) * mr.abs().max(T::min_positive_value());
    let trend = if change.abs() <= flat {
        Trend::Flat
    } else if change > T::zero() {
        Trend::Increasing
    } else {
        Trend::Decreasing
    };
    Ok(ForceRatio {
        points,
        excluded,
        slope,
        trend,
    })
}

const NM: f64 = 1e-9;
const PN: f64 = 1e-12;

fn nm_pn<T: Scalar>(pts: &[(T, T)]) -> Vec<(f64, f64)> {
    pts.iter().map(|p| (p.0.as_f64() / NM, p.1.as_f64() / PN)).collect()
}

/// Theoretical force as a line over the experimental mean as points.
pub fn force_figure<T: Scalar>(f_theor: &ForceCurve<T>, f_expt: &ForceCurve<T>) -> Figure {
    Figure::new("Casimir force", "z (nm)", "F (pN)")
        .with(Series::line("theory", nm_pn(f_theor.points()), "black"))
        .with(Series::scatter("experiment, mean", nm_pn(f_expt.points()), "#c0392b"))
}

/// Relative errors δ^expt and δ^theor against separation, in percent.
pub fn error_figure<T: Scalar>(delta_expt: &[(T, T)], delta_theor: &[(T, T)]) -> Figure {
    let pct = |v: &[(T, T)]| -> Vec<(f64, f64)> {
        v.iter().map(|p| (p.0.as_f64() / NM, 100.0 * p.1.as_f64())).collect()
    };
    Figure::new("Relative errors at 95% confidence", "z (nm)", "error (%)")
        .with(Series::line("experimental", pct(delta_expt), "#c0392b"))
        .with(Series::line("theoretical", pct(delta_theor), "#2c3e50"))
}

impl<T: Scalar> ComparisonReport<T> {
    /// Differences as points between the ±Ξ(z) lines.
    pub fn difference_figure(&self) -> Figure {
        let upper = nm_pn(self.envelope.points());
        let lower = upper.iter().map(|p| (p.0, -p.1)).collect();
        Figure::new("Theory minus experiment", "z (nm)", "difference (pN)")
            .with(Series::line("+Xi", upper, "black"))
            .with(Series::line("-Xi", lower, "black"))
            .with(Series::scatter("F_theor - F_expt", nm_pn(&self.differences), "#2980b9"))
    }

    pub fn agreement_figure(&self) -> Figure {
        let pts = self
            .agreement
            .points
            .iter()
            .map(|p| (p.0.as_f64() / NM, 100.0 * p.1.as_f64()))
            .collect();
        Figure::new("Agreement measure", "z (nm)", "Xi / |F_theor| (%)")
            .with(Series::line("agreement", pts, "#2c3e50"))
    }
}

impl<T: Scalar> ForceRatio<T> {
    pub fn figure(&self, label: &str) -> Figure {
        let pts = self.points.iter().map(|p| (p.0.as_f64() / NM, p.1.as_f64())).collect();
        Figure::new("Force ratio", "z (nm)", "ratio").with(Series::line(label, pts, "#2c3e50"))
    }
}
