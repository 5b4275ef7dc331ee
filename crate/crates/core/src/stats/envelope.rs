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

//! The confidence envelope Ξ(z) and its CSV export.

use super::{theoretical_error_budget, ExperimentalErrorBudget, StatsError, TheoreticalErrorBudget};
use crate::constants::{NM, PN};
use crate::lifshitz::ForceCurve;
use crate::scalar::Scalar;
use std::fmt::Write as _;

/// Absolute error Ξ(z) of the difference between theory and experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceEnvelope<T> {
    points: Vec<(T, T)>,
    pub confidence: f64,
}

impl<T: Scalar> ConfidenceEnvelope<T> {
    pub fn new(points: Vec<(T, T)>, confidence: f64) -> Result<Self, StatsError> {
        if let Some(p) = points.iter().find(|p| !(p.1 > T::zero() && p.1.is_finite())) {
            return Err(StatsError::Domain {
                what: "envelope value",
                value: p.1.as_f64(),
            });
        }
        Ok(Self { points, confidence })
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn same_z<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-9) * a.abs().max(b.abs())
}

pub(crate) fn check_aligned<T: Scalar>(
    what: &str,
    a: impl ExactSizeIterator<Item = T>,
    b: impl ExactSizeIterator<Item = T>,
) -> Result<(), StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::GridMismatch(format!(
            "{what}: {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    for (i, (x, y)) in a.zip(b).enumerate() {
        if !same_z(x, y) {
            return Err(StatsError::GridMismatch(format!(
                "{what}: point {i} at {:.6} nm vs {:.6} nm",
                x.as_f64() / NM,
                y.as_f64() / NM
            )));
        }
    }
    Ok(())
}

/// Theoretical budget at every separation of `grid`.
pub fn theoretical_budget_curve<T: Scalar>(
    grid: &[T],
    radius: T,
    radius_uncertainty: T,
    separation_uncertainty: T,
    delta2: T,
) -> Result<Vec<TheoreticalErrorBudget<T>>, StatsError> {
    grid.iter()
        .map(|&z| {
            theoretical_error_budget(z, radius, radius_uncertainty, separation_uncertainty, delta2)
        })
        .collect()
}

/// Ξ(z) = Δ^tot F^expt + δ^theor(z)|F^theor(z)|.
pub fn confidence_envelope<T: Scalar>(
    exp_budget: &ExperimentalErrorBudget<T>,
    theor_budget: &[TheoreticalErrorBudget<T>],
    f_theor: &ForceCurve<T>,
    confidence: f64,
) -> Result<ConfidenceEnvelope<T>, StatsError> {
    if (confidence - exp_budget.confidence).abs() > 1e-12 {
        return Err(StatsError::UnsupportedConfidence(confidence));
    }
    check_aligned(
        "theoretical budget vs force curve",
        theor_budget.iter().map(|b| b.z),
        f_theor.points().iter().map(|p| p.0),
    )?;
    let points = theor_budget
        .iter()
        .zip(f_theor.points())
        .map(|(b, &(z, f))| (z, exp_budget.delta_total + b.delta_theor * f.abs()))
        .collect();
    ConfidenceEnvelope::new(points, confidence)
}

/// `z_nm,delta_expt,delta_theor,Xi_pN`, with δ^expt = Δ^tot/|F̄^expt(z)|.
pub fn budget_csv<T: Scalar>(
    exp_budget: &ExperimentalErrorBudget<T>,
    theor_budget: &[TheoreticalErrorBudget<T>],
    envelope: &ConfidenceEnvelope<T>,
    f_expt_mean: &ForceCurve<T>,
) -> Result<String, StatsError> {
    check_aligned(
        "envelope vs experimental mean",
        envelope.points().iter().map(|p| p.0),
        f_expt_mean.points().iter().map(|p| p.0),
    )?;
    check_aligned(
        "envelope vs theoretical budget",
        envelope.points().iter().map(|p| p.0),
        theor_budget.iter().map(|b| b.z),
    )?;
    let mut s = String::from("z_nm,delta_expt,delta_theor,Xi_pN\n");
    for ((&(z, xi), b), &(_, f)) in envelope
        .points()
        .iter()
        .zip(theor_budget)
        .zip(f_expt_mean.points())
    {
        let _ = writeln!(
            s,
            "{:.6},{:.9e},{:.9e},{:.9e}",
            z.as_f64() / NM,
            (exp_budget.delta_total / f.abs()).as_f64(),
            b.delta_theor.as_f64(),
            xi.as_f64() / PN
        );
    }
    Ok(s)
}
