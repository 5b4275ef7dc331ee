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

//! Measurement ensembles on disk, synthetic ensembles from theory, mean
//! experimental curves and the end-to-end comparison.

use crate::compare::{difference_report, CompareError, ComparisonReport};
use crate::constants::{NM, PN};
use crate::lifshitz::{
    force_curve_interpolated, separation_grid, ForceCurve, Geometry, LifshitzError, Provenance,
    QuadratureSpec, RoughnessProfile, Surfaces,
};
use crate::materials::{reference, MaterialError, Permittivity, SampledPermittivity};
use crate::scalar::Scalar;
use crate::stats::{
    budget_csv, confidence_envelope, experimental_error_budget, screen_outlier_sets,
    theoretical_budget_curve, ConfidenceEnvelope, ExperimentalErrorBudget, MeasurementEnsemble,
    StatsError, TheoreticalErrorBudget,
};
use crate::units::{format_scaled, parse_scaled};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("set {set_id}: {msg}")]
    GridMismatch { set_id: u64, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Lifshitz(#[from] LifshitzError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Compare(#[from] CompareError),
}

/// Uniform separation grid, m.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec<T> {
    pub z_min: T,
    pub z_max: T,
    pub step: T,
}

impl<T: Scalar> GridSpec<T> {
    /// 62.33–600.04 nm in steps of 0.17 nm.
    pub fn reference() -> Self {
        Self {
            z_min: T::lit(62.33 * NM),
            z_max: T::lit(600.04 * NM),
            step: T::lit(0.17 * NM),
        }
    }

    /// Parses `zmin:zmax:step` in nm.
    pub fn from_nm_str(s: &str) -> Result<Self, PipelineError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || PipelineError::Invalid(format!("grid `{s}`: expected zmin:zmax:step in nm"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let g = Self {
            z_min: T::lit(v[0] * NM),
            z_max: T::lit(v[1] * NM),
            step: T::lit(v[2] * NM),
        };
        g.points()?;
        Ok(g)
    }

    pub fn points(&self) -> Result<Vec<T>, PipelineError> {
        Ok(separation_grid(self.z_min, self.z_max, self.step)?)
    }
}

/// Sphere and plate materials, geometry, roughness and quadrature settings.
#[derive(Clone)]
pub struct TheoryModel<T: Scalar> {
    pub sphere: Arc<dyn Permittivity<T>>,
    pub plate: Arc<dyn Permittivity<T>>,
    pub geometry: Geometry<T>,
    pub sphere_roughness: RoughnessProfile<T>,
    pub plate_roughness: RoughnessProfile<T>,
    pub quadrature: QuadratureSpec<T>,
    /// Nodes per decade of the force interpolant.
    pub nodes_per_decade: usize,
}

impl<T: Scalar> std::fmt::Debug for TheoryModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TheoryModel")
            .field("geometry", &self.geometry)
            .field("sphere_roughness", &self.sphere_roughness)
            .field("plate_roughness", &self.plate_roughness)
            .field("quadrature", &self.quadrature)
            .field("nodes_per_decade", &self.nodes_per_decade)
            .finish_non_exhaustive()
    }
}

/// Caches ln(ε − 1) of a material over the frequencies relevant at 10 nm–10 μm.
pub fn sampled<T: Scalar, M: Permittivity<T> + 'static>(
    m: M,
) -> Result<Arc<dyn Permittivity<T>>, MaterialError> {
    Ok(Arc::new(SampledPermittivity::new(
        m,
        T::lit(1e10),
        T::lit(1e19),
        64,
    )?))
}

impl<T: Scalar> TheoryModel<T> {
    pub fn new(
        sphere: Arc<dyn Permittivity<T>>,
        plate: Arc<dyn Permittivity<T>>,
        geometry: Geometry<T>,
    ) -> Self {
        Self {
            sphere,
            plate,
            geometry,
            sphere_roughness: RoughnessProfile::reference_sphere(),
            plate_roughness: RoughnessProfile::reference_plate(),
            quadrature: QuadratureSpec::default(),
            nodes_per_decade: 100,
        }
    }

    /// Gold-coated sphere above a doped silicon plate with the built-in
    /// material models and roughness profiles.
    pub fn reference() -> Result<Self, PipelineError> {
        Ok(Self::new(
            sampled(reference::gold::<T>())?,
            sampled(reference::silicon_default::<T>())?,
            Geometry::reference(),
        ))
    }

    /// The same model with a gold plate.
    pub fn with_plate(&self, plate: Arc<dyn Permittivity<T>>) -> Self {
        Self {
            plate,
            ..self.clone()
        }
    }

    /// Force on `grid`, roughness-corrected when `rough` is set.
    pub fn curve(&self, grid: &[T], rough: bool) -> Result<ForceCurve<T>, PipelineError> {
        let surfaces = if rough {
            Surfaces::Rough {
                sphere: &self.sphere_roughness,
                plate: &self.plate_roughness,
            }
        } else {
            Surfaces::Smooth
        };
        Ok(force_curve_interpolated(
            grid,
            &self.geometry,
            &*self.sphere,
            &*self.plate,
            surfaces,
            &self.quadrature,
            self.nodes_per_decade,
        )?)
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisSpec<T: Scalar> {
    pub model: TheoryModel<T>,
    pub n_sets: usize,
    /// Gaussian noise per point, N.
    pub noise_sigma: T,
    /// Uniform systematic offsets `(label, half-width N)`.
    pub systematic_offsets: Vec<(String, T)>,
    pub grid: GridSpec<T>,
    pub rng_seed: u64,
}

impl<T: Scalar> SynthesisSpec<T> {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.n_sets < 2 {
            return Err(PipelineError::Invalid(format!(
                "n_sets = {}, need at least 2",
                self.n_sets
            )));
        }
        if !(self.noise_sigma >= T::zero() && self.noise_sigma.is_finite()) {
            return Err(PipelineError::Invalid("noise sigma must be non-negative".into()));
        }
        if let Some((l, _)) = self
            .systematic_offsets
            .iter()
            .find(|(_, a)| !(*a >= T::zero() && a.is_finite()))
        {
            return Err(PipelineError::Invalid(format!(
                "systematic offset `{l}` must be non-negative"
            )));
        }
        self.grid.points()?;
        Ok(())
    }
}

/// Half-widths of the systematic force offsets, N.
pub fn reference_systematics<T: Scalar>() -> Vec<(String, T)> {
    [
        ("calibration", 0.82),
        ("deflection", 0.55),
        ("nonlinearity", 0.31),
        ("instrumental", 0.12),
    ]
    .iter()
    .map(|&(l, a)| (l.to_string(), T::lit(a * PN)))
    .collect()
}

/// Synthesizes an ensemble from the roughness-corrected theory curve.
pub fn synthesize_ensemble<T: Scalar>(
    spec: &SynthesisSpec<T>,
) -> Result<MeasurementEnsemble<T>, PipelineError> {
    spec.validate()?;
    let grid = spec.grid.points()?;
    let theory = spec.model.curve(&grid, true)?;
    synthesize_from_curve(
        &theory,
        spec.n_sets,
        spec.noise_sigma,
        &spec.systematic_offsets,
        spec.rng_seed,
    )
}

/// Each set is `theory + Σ uniform offsets + Gaussian noise`. The offsets are
/// drawn once per ensemble from stream 0; set k draws its noise from stream
/// k + 1 of the seeded generator.
pub fn synthesize_from_curve<T: Scalar>(
    theory: &ForceCurve<T>,
    n_sets: usize,
    noise_sigma: T,
    systematic_offsets: &[(String, T)],
    seed: u64,
) -> Result<MeasurementEnsemble<T>, PipelineError> {
    let sigma = noise_sigma.as_f64();
    let noise = Normal::new(0.0, sigma)
        .map_err(|_| PipelineError::Invalid(format!("noise sigma {sigma:e}")))?;
    let mut sys_rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = systematic_offsets
        .iter()
        .map(|(_, a)| {
            let a = a.as_f64();
            if a > 0.0 {
                sys_rng.random_range(-a..=a)
            } else {
                0.0
            }
        })
        .sum();
    let base: Vec<f64> = theory.points().iter().map(|p| p.1.as_f64() + offset).collect();
    let sets = (0..n_sets)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            base.iter()
                .map(|&f| {
                    let e = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    T::lit(f + e)
                })
                .collect()
        })
        .collect();
    Ok(MeasurementEnsemble::new(theory.separations(), sets)?)
}

/// Pointwise mean of the ensemble.
pub fn mean_curve<T: Scalar>(ens: &MeasurementEnsemble<T>) -> Result<ForceCurve<T>, PipelineError> {
    let pts = ens.grid().iter().copied().zip(ens.mean()).collect();
    Ok(ForceCurve::new(pts, Provenance::ExperimentalMean, None)?)
}

/// `set_id,z_nm,F_pN`, grid repeated per set.
pub fn ensemble_to_csv<T: Scalar>(ens: &MeasurementEnsemble<T>) -> String {
    let mut s = String::from("set_id,z_nm,F_pN\n");
    let zs: Vec<String> = ens.grid().iter().map(|z| format_scaled(z.as_f64(), 9)).collect();
    for (k, set) in ens.sets().iter().enumerate() {
        for (z, f) in zs.iter().zip(set) {
            let _ = writeln!(s, "{k},{z},{}", format_scaled(f.as_f64(), 12));
        }
    }
    s
}

pub fn parse_ensemble<T: Scalar>(text: &str) -> Result<MeasurementEnsemble<T>, PipelineError> {
    let mut ids: Vec<u64> = Vec::new();
    let mut sets: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut rows = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') || line.starts_with("set_id") {
            continue;
        }
        let perr = |msg: String| PipelineError::Parse { line: lineno, msg };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(perr("expected `set_id,z_nm,F_pN`".into()));
        }
        let id: u64 = cols[0]
            .parse()
            .map_err(|e| perr(format!("set_id `{}`: {e}", cols[0])))?;
        let z: f64 = parse_scaled(cols[1], -9)
            .map_err(|e| perr(format!("z_nm `{}`: {e}", cols[1])))?;
        let f: f64 = parse_scaled(cols[2], -12)
            .map_err(|e| perr(format!("F_pN `{}`: {e}", cols[2])))?;
        if !(z.is_finite() && f.is_finite()) {
            return Err(perr("non-finite value".into()));
        }
        let k = match ids.iter().position(|&x| x == id) {
            Some(k) => k,
            None => {
                ids.push(id);
                sets.push(Vec::new());
                ids.len() - 1
            }
        };
        sets[k].push((z, f));
        rows += 1;
    }
    if rows == 0 {
        return Err(PipelineError::Invalid("ensemble file has no data rows".into()));
    }
    let grid: Vec<f64> = sets[0].iter().map(|p| p.0).collect();
    for (k, set) in sets.iter().enumerate().skip(1) {
        if set.len() != grid.len() {
            return Err(PipelineError::GridMismatch {
                set_id: ids[k],
                msg: format!("{} points, set {} has {}", set.len(), ids[0], grid.len()),
            });
        }
        if let Some((j, p)) = set.iter().enumerate().find(|(j, p)| p.0 != grid[*j]) {
            return Err(PipelineError::GridMismatch {
                set_id: ids[k],
                msg: format!(
                    "point {j} at z = {} nm, expected {} nm",
                    p.0 / NM,
                    grid[j] / NM
                ),
            });
        }
    }
    let grid_si = grid.iter().map(|&z| T::lit(z)).collect();
    let sets_si = sets
        .iter()
        .map(|s| s.iter().map(|p| T::lit(p.1)).collect())
        .collect();
    Ok(MeasurementEnsemble::new(grid_si, sets_si)?)
}

pub fn load_ensemble<T: Scalar>(path: &Path) -> Result<MeasurementEnsemble<T>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_ensemble(&text)
}

pub fn save_ensemble<T: Scalar>(
    ens: &MeasurementEnsemble<T>,
    path: &Path,
) -> Result<(), PipelineError> {
    std::fs::write(path, ensemble_to_csv(ens)).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Error-budget settings for [`analyze`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings<T> {
    /// Width of the variance pooling window, m.
    pub window: T,
    /// Systematic half-widths `(label, N)`.
    pub systematics: Vec<(String, T)>,
    /// Uncertainty of the absolute separation, m.
    pub separation_uncertainty: T,
    /// Relative error of the optical data.
    pub delta2: T,
    pub confidence: f64,
    /// Drop sets flagged by the outlier screen before the budget.
    pub screen_outliers: bool,
}

impl<T: Scalar> AnalysisSettings<T> {
    pub fn reference() -> Self {
        Self {
            window: T::lit(0.8 * NM),
            systematics: reference_systematics(),
            separation_uncertainty: T::lit(0.8 * NM),
            delta2: T::lit(0.005),
            confidence: 0.95,
            screen_outliers: true,
        }
    }
}

/// Everything produced by one theory–experiment comparison.
#[derive(Debug, Clone)]
pub struct Analysis<T> {
    /// Indices of the sets dropped by the outlier screen.
    pub flagged: Vec<usize>,
    pub experimental: ExperimentalErrorBudget<T>,
    pub theoretical: Vec<TheoreticalErrorBudget<T>>,
    pub mean: ForceCurve<T>,
    pub envelope: ConfidenceEnvelope<T>,
    pub report: ComparisonReport<T>,
}

impl<T: Scalar> Analysis<T> {
    /// `z_nm,delta_expt,delta_theor,Xi_pN`
    pub fn budget_csv(&self) -> Result<String, PipelineError> {
        Ok(budget_csv(&self.experimental, &self.theoretical, &self.envelope, &self.mean)?)
    }

    /// (z, δ^expt) and (z, δ^theor).
    pub fn relative_errors(&self) -> (Vec<(T, T)>, Vec<(T, T)>) {
        let e = self
            .mean
            .points()
            .iter()
            .map(|&(z, f)| (z, self.experimental.delta_total / f.abs()))
            .collect();
        let t = self.theoretical.iter().map(|b| (b.z, b.delta_theor)).collect();
        (e, t)
    }
}

/// Outlier screen, error budgets, envelope and difference report for an
/// ensemble against a theory curve on the same grid.
pub fn analyze<T: Scalar>(
    ens: &MeasurementEnsemble<T>,
    theory: &ForceCurve<T>,
    geometry: &Geometry<T>,
    settings: &AnalysisSettings<T>,
) -> Result<Analysis<T>, PipelineError> {
    let flagged = if settings.screen_outliers && ens.n() >= 3 {
        screen_outlier_sets(ens, settings.confidence)?
    } else {
        Vec::new()
    };
    let kept = if flagged.is_empty() {
        ens.clone()
    } else {
        ens.without(&flagged)?
    };
    if kept.n() < 2 {
        return Err(PipelineError::Invalid(format!(
            "{} sets left after outlier screening, need at least 2",
            kept.n()
        )));
    }
    let experimental = experimental_error_budget(
        &kept,
        settings.window,
        settings.systematics.clone(),
        settings.confidence,
    )?;
    let theoretical = theoretical_budget_curve(
        &theory.separations(),
        geometry.radius,
        geometry.radius_uncertainty,
        settings.separation_uncertainty,
        settings.delta2,
    )?;
    let envelope = confidence_envelope(&experimental, &theoretical, theory, settings.confidence)?;
    let mean = mean_curve(&kept)?;
    let report = difference_report(theory, &mean, &envelope)?;
    Ok(Analysis {
        flagged,
        experimental,
        theoretical,
        mean,
        envelope,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::ConstantPermittivity;
    use crate::stats::pooled_variance_of_mean;

    fn toy_curve() -> ForceCurve<f64> {
        let grid: Vec<f64> = separation_grid(62.33e-9, 120e-9, 0.17e-9).unwrap();
        ForceCurve::new(
            grid.iter().map(|&z| (z, 1.5e-33 / z.powi(3))).collect(),
            Provenance::RoughnessCorrected,
            None,
        )
        .unwrap()
    }

    #[test]
    fn grid_spec_parsing() {
        let g = GridSpec::<f64>::from_nm_str("62.33:600.04:0.17").unwrap();
        assert_eq!(g.points().unwrap().len(), 3164);
        assert!(GridSpec::<f64>::from_nm_str("1:2").is_err());
        assert!(GridSpec::<f64>::from_nm_str("5:2:0.1").is_err());
    }

    #[test]
    fn noiseless_synthesis_reproduces_theory() {
        let c = toy_curve();
        let ens = synthesize_from_curve(&c, 3, 0.0, &[], 1).unwrap();
        for set in ens.sets() {
            assert_eq!(set, &c.forces());
        }
    }

    #[test]
    fn synthesis_is_deterministic_and_scaled() {
        let c = toy_curve();
        let sys = reference_systematics();
        let a = synthesize_from_curve(&c, 65, 12e-12, &sys, 42).unwrap();
        let b = synthesize_from_curve(&c, 65, 12e-12, &sys, 42).unwrap();
        assert_eq!(a, b);
        let s = pooled_variance_of_mean(&a, 0.8e-9).unwrap();
        assert!((s / (12e-12 / 65f64.sqrt()) - 1.0f64).abs() < 0.1, "{s:e}");
        let other = synthesize_from_curve(&c, 65, 12e-12, &sys, 43).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn mean_curve_cases() {
        let grid = vec![1e-7, 2e-7];
        let ens = MeasurementEnsemble::new(grid, vec![vec![3.0, 1.0], vec![-3.0, -1.0]]).unwrap();
        let m = mean_curve(&ens).unwrap();
        assert_eq!(m.forces(), vec![0.0, 0.0]);
        assert_eq!(m.provenance, Provenance::ExperimentalMean);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let c = toy_curve();
        let ens = synthesize_from_curve(&c, 4, 12e-12, &reference_systematics(), 5).unwrap();
        let back: MeasurementEnsemble<f64> = parse_ensemble(&ensemble_to_csv(&ens)).unwrap();
        assert_eq!(back, ens);
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(
            parse_ensemble::<f64>(""),
            Err(PipelineError::Invalid(_))
        ));
        let text = "set_id,z_nm,F_pN\n0,1,2\n0,2,2\n7,1,2\n7,2.5,2\n";
        match parse_ensemble::<f64>(text) {
            Err(PipelineError::GridMismatch { set_id, .. }) => assert_eq!(set_id, 7),
            other => panic!("{other:?}"),
        }
        match parse_ensemble::<f64>("set_id,z_nm,F_pN\n0,1,2\n0,x,2\n") {
            Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(load_ensemble::<f64>(Path::new("/nonexistent/ens.csv")).is_err());
    }

    #[test]
    fn model_curve_with_constant_materials() {
        let m: Arc<dyn Permittivity<f64>> = Arc::new(ConstantPermittivity(1e12));
        let model = TheoryModel::new(m.clone(), m, Geometry::reference());
        let grid = [80e-9, 100e-9];
        let smooth = model.curve(&grid, false).unwrap();
        let rough = model.curve(&grid, true).unwrap();
        assert!(rough.points()[0].1 > smooth.points()[0].1);
        let ideal = crate::lifshitz::ideal_metal_force(100e-9, 101.3e-6);
        assert!((smooth.points()[1].1 / ideal - 1.0).abs() < 1e-4);
    }

    #[test]
    fn analysis_of_null_ensemble() {
        let c = toy_curve();
        let sigma = 1.5e-12 * 65f64.sqrt();
        let ens = synthesize_from_curve(&c, 65, sigma, &reference_systematics(), 9).unwrap();
        let a = analyze(&ens, &c, &Geometry::reference(), &AnalysisSettings::reference()).unwrap();
        let b = &a.experimental;
        assert_eq!(b.n + a.flagged.len(), 65);
        assert!((b.s_mean / 1.5e-12 - 1.0).abs() < 0.1);
        assert!(b.delta_total > b.delta_rand && b.delta_total > b.delta_syst);
        assert!(a.report.fraction_within >= 0.9, "{}", a.report.fraction_within);
        let csv = a.budget_csv().unwrap();
        assert_eq!(csv.lines().count(), c.len() + 1);
        let (de, dt) = a.relative_errors();
        assert_eq!(de.len(), dt.len());
    }

    #[test]
    fn analysis_rejects_misaligned_theory() {
        let c = toy_curve();
        let ens = synthesize_from_curve(&c, 5, 1e-12, &[], 1).unwrap();
        let short = ForceCurve::new(c.points()[..10].to_vec(), Provenance::Smooth, None).unwrap();
        assert!(analyze(&ens, &short, &Geometry::reference(), &AnalysisSettings::reference()).is_err());
    }
}
