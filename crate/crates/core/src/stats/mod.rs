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

//! Error analysis of repeated force measurements.
//!
//! Random errors come from the pooled variance of the mean and a Student
//! quantile. Systematic errors are composed as uniform distributions. The two
//! are combined into a total experimental error, and added to the
//! theoretical error to form the confidence envelope Ξ(z).

mod envelope;
mod uncertainty;

pub use envelope::{
    budget_csv, confidence_envelope, theoretical_budget_curve, ConfidenceEnvelope,
};
pub use uncertainty::{
    compose_uniform_systematics, composition_coefficient, experimental_error_budget,
    random_error_student, student_quantile, theoretical_error_budget, total_experimental_error,
    uniform_sum_quantile, ExperimentalErrorBudget, TheoreticalErrorBudget,
};

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("{what} out of range: {value:e}")]
    Domain { what: &'static str, value: f64 },
    #[error("unsupported confidence level {0}")]
    UnsupportedConfidence(f64),
    #[error("ensemble: {0}")]
    Ensemble(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

/// `n` force curves on one shared separation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble<T> {
    grid: Vec<T>,
    sets: Vec<Vec<T>>,
}

impl<T: Scalar> MeasurementEnsemble<T> {
    pub fn new(grid: Vec<T>, sets: Vec<Vec<T>>) -> Result<Self, StatsError> {
        if sets.len() < 2 {
            return Err(StatsError::Ensemble(format!(
                "{} sets, need at least 2",
                sets.len()
            )));
        }
        if grid.is_empty() {
            return Err(StatsError::Ensemble("empty grid".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > T::zero()) {
            return Err(StatsError::Ensemble(
                "grid must be positive and strictly increasing".into(),
            ));
        }
        for (k, s) in sets.iter().enumerate() {
            if s.len() != grid.len() {
                return Err(StatsError::GridMismatch(format!(
                    "set {k} has {} points, grid has {}",
                    s.len(),
                    grid.len()
                )));
            }
            if s.iter().any(|f| !f.is_finite()) {
                return Err(StatsError::Ensemble(format!("set {k}: non-finite force")));
            }
        }
        Ok(Self { grid, sets })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn sets(&self) -> &[Vec<T>] {
        &self.sets
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    /// Pointwise mean over the sets.
    pub fn mean(&self) -> Vec<T> {
        let n = T::lit(self.n() as f64);
        (0..self.grid.len())
            .map(|i| self.sets.iter().map(|s| s[i]).sum::<T>() / n)
            .collect()
    }

    /// A new ensemble without the sets at `indices`.
    pub fn without(&self, indices: &[usize]) -> Result<Self, StatsError> {
        let sets = self
            .sets
            .iter()
            .enumerate()
            .filter(|(k, _)| !indices.contains(k))
            .map(|(_, s)| s.clone())
            .collect();
        Self::new(self.grid.clone(), sets)
    }
}

/// Indices of sets flagged by an iterated two-sided Grubbs test on each set's
/// mean deviation from the ensemble mean.
pub fn screen_outlier_sets<T: Scalar>(
    ens: &MeasurementEnsemble<T>,
    confidence: f64,
) -> Result<Vec<usize>, StatsError> {
    if ens.n() < 3 {
        return Err(StatsError::Ensemble(format!(
            "outlier screening needs at least 3 sets, got {}",
            ens.n()
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::Domain {
            what: "confidence",
            value: confidence,
        });
    }
    let mean = ens.mean();
    let m = ens.grid().len() as f64;
    let summary: Vec<f64> = ens
        .sets()
        .iter()
        .map(|s| {
            s.iter()
                .zip(&mean)
                .map(|(f, g)| (*f - *g).as_f64())
                .sum::<f64>()
                / m
        })
        .collect();
    let mut active: Vec<usize> = (0..summary.len()).collect();
    let mut flagged = Vec::new();
    while active.len() >= 3 {
        let n = active.len() as f64;
        let mu = active.iter().map(|&k| summary[k]).sum::<f64>() / n;
        let sd = (active.iter().map(|&k| (summary[k] - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if !(sd > 0.0) {
            break;
        }
        let (pos, dev) = active
            .iter()
            .enumerate()
            .map(|(p, &k)| (p, (summary[k] - mu).abs()))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let g = dev / sd;
        let alpha = 1.0 - confidence;
        let t = student_quantile(n - 2.0, 1.0 - alpha / n)?;
        let g_crit = (n - 1.0) / n.sqrt() * (t * t / (n - 2.0 + t * t)).sqrt();
        if g > g_crit {
            flagged.push(active.remove(pos));
        } else {
            break;
        }
    }
    flagged.sort_unstable();
    Ok(flagged)
}

/// Per-point variance of the mean, averaged over all grid points within
/// ±window/2, returned as a standard deviation at each point.
pub fn pooled_std_of_mean_profile<T: Scalar>(
    ens: &MeasurementEnsemble<T>,
    window: T,
) -> Result<Vec<T>, StatsError> {
    let grid = ens.grid();
    let min_step = grid
        .windows(2)
        .map(|w| (w[1] - w[0]).as_f64())
        .fold(f64::INFINITY, f64::min);
    let window = window.as_f64();
    if !(window.is_finite() && window > 0.0) || (grid.len() > 1 && window < min_step * (1.0 - 1e-9)) {
        return Err(StatsError::Domain {
            what: "pooling window (must be at least the grid step)",
            value: window,
        });
    }
    let n = ens.n() as f64;
    let mean = ens.mean();
    let var_mean: Vec<f64> = (0..grid.len())
        .map(|i| {
            let m = mean[i].as_f64();
            ens.sets()
                .iter()
                .map(|s| (s[i].as_f64() - m).powi(2))
                .sum::<f64>()
                / (n - 1.0)
                / n
        })
        .collect();
    let mut prefix = vec![0.0f64; grid.len() + 1];
    for (i, v) in var_mean.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let z: Vec<f64> = grid.iter().map(|g| g.as_f64()).collect();
    let half = 0.5 * window * (1.0 + 1e-9);
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut out = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        while z[i] - z[lo] > half {
            lo += 1;
        }
        while hi + 1 < z.len() && z[hi + 1] - z[i] <= half {
            hi += 1;
        }
        let avg = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
        out.push(T::lit(avg.sqrt()));
    }
    Ok(out)
}

/// Grid-wide pooled standard deviation of the mean: the square root of the
/// grid average of the windowed variances.
pub fn pooled_variance_of_mean<T: Scalar>(
    ens: &MeasurementEnsemble<T>,
    window: T,
) -> Result<T, StatsError> {
    let prof = pooled_std_of_mean_profile(ens, window)?;
    let m = prof.len() as f64;
    Ok(T::lit(
        (prof.iter().map(|s| s.as_f64().powi(2)).sum::<f64>() / m).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian_ensemble(n: usize, m: usize, sigma: f64, seed: u64) -> MeasurementEnsemble<f64> {
        let grid: Vec<f64> = (0..m).map(|i| 62.33e-9 + i as f64 * 0.17e-9).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let sets = (0..n)
            .map(|_| grid.iter().map(|z| 1e-30 / z.powi(3) + noise.sample(&mut rng)).collect())
            .collect();
        MeasurementEnsemble::new(grid, sets).unwrap()
    }

    #[test]
    fn ensemble_validation() {
        let g = vec![1e-9, 2e-9];
        assert!(MeasurementEnsemble::new(g.clone(), vec![vec![1.0, 2.0]]).is_err());
        assert!(MeasurementEnsemble::new(g.clone(), vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(MeasurementEnsemble::new(vec![2e-9, 1e-9], vec![vec![1.0, 2.0]; 2]).is_err());
        assert!(MeasurementEnsemble::new(g, vec![vec![1.0, 2.0]; 2]).is_ok());
    }

    #[test]
    fn pooled_std_matches_sampling_theory() {
        let ens = gaussian_ensemble(65, 400, 12e-12, 3);
        let s = pooled_variance_of_mean(&ens, 0.8e-9).unwrap();
        assert_relative_eq!(s, 12e-12 / 65f64.sqrt(), max_relative = 0.1);
    }

    #[test]
    fn pooling_degenerate_cases() {
        let grid = vec![1e-9, 2e-9, 3e-9];
        let same = MeasurementEnsemble::new(grid.clone(), vec![vec![1.0, 2.0, 3.0]; 4]).unwrap();
        assert_eq!(pooled_variance_of_mean(&same, 1e-9).unwrap(), 0.0);
        let ens = MeasurementEnsemble::new(
            grid,
            vec![vec![0.0, 0.0, 0.0], vec![2.0, 4.0, 6.0]],
        )
        .unwrap();
        let p = pooled_std_of_mean_profile(&ens, 1e-9).unwrap();
        // var of mean at each point: s²/n = (d²/2)/2
        for (i, d) in [2.0f64, 4.0, 6.0].iter().enumerate() {
            assert_relative_eq!(p[i], (d * d / 4.0).sqrt(), max_relative = 1e-12);
        }
        assert!(pooled_variance_of_mean(&ens, 0.5e-9).is_err());
        let wide = pooled_std_of_mean_profile(&ens, 2e-9).unwrap();
        assert_relative_eq!(wide[0], ((1.0 + 4.0) / 2.0f64).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn outliers_null_and_planted() {
        let mut clean = 0;
        for seed in 0..40 {
            let ens = gaussian_ensemble(65, 60, 5e-12, seed);
            if screen_outlier_sets(&ens, 0.95).unwrap().is_empty() {
                clean += 1;
            }
        }
        assert!(clean >= 36, "{clean}/40");
        let ens = gaussian_ensemble(65, 60, 5e-12, 99);
        let mut sets = ens.sets().to_vec();
        for f in &mut sets[17] {
            *f += 10.0 * 5e-12;
        }
        let planted = MeasurementEnsemble::new(ens.grid().to_vec(), sets).unwrap();
        assert!(screen_outlier_sets(&planted, 0.95).unwrap().contains(&17));
    }

    #[test]
    fn outliers_identical_sets() {
        let same = MeasurementEnsemble::new(vec![1e-9, 2e-9], vec![vec![1.0, 2.0]; 3]).unwrap();
        assert!(screen_outlier_sets(&same, 0.95).unwrap().is_empty());
        let two = MeasurementEnsemble::new(vec![1e-9], vec![vec![1.0]; 2]).unwrap();
        assert!(screen_outlier_sets(&two, 0.95).is_err());
    }
}
