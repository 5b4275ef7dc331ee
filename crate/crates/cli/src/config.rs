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

//! TOML run configuration. Lengths are in nm and forces in pN; relative
//! paths resolve against the directory of the config file.

use anyhow::{bail, Context, Result};
use casimir_core::electrostatics::FitOptions;
use casimir_core::lifshitz::{Body, Geometry, QuadratureSpec, RoughnessProfile};
use casimir_core::materials::{
    load_optical_csv, reference, ConstantPermittivity, DielectricModel, DrudeParams, FreqUnit,
    HighFrequencyExtension, LowFrequencyExtension, Permittivity,
};
use casimir_core::pipeline::{AnalysisSettings, GridSpec};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

const NM: f64 = 1e-9;
const PN: f64 = 1e-12;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub freq_unit: Option<String>,
    pub sphere: MaterialConfig,
    pub plate: MaterialConfig,
    pub geometry: GeometryConfig,
    pub roughness: RoughnessConfig,
    pub grid: GridConfig,
    pub quadrature: QuadratureConfig,
    pub budget: BudgetConfig,
    pub synthesis: SynthesisConfig,
    pub calibration: CalibrationConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: None,
            seed: None,
            threads: None,
            freq_unit: None,
            sphere: MaterialConfig::Gold { omega_p: None, gamma: None },
            plate: MaterialConfig::Silicon {
                rho_ohm_cm: reference::SILICON_RHO,
                tau_s: reference::SILICON_TAU,
                omega_p_scale: 1.0,
            },
            geometry: GeometryConfig::default(),
            roughness: RoughnessConfig::default(),
            grid: GridConfig::default(),
            quadrature: QuadratureConfig::default(),
            budget: BudgetConfig::default(),
            synthesis: SynthesisConfig::default(),
            calibration: CalibrationConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

fn default_rho() -> f64 {
    reference::SILICON_RHO
}
fn default_tau() -> f64 {
    reference::SILICON_TAU
}
fn one() -> f64 {
    1.0
}
fn power_law() -> HighFrequencyExtension {
    HighFrequencyExtension::PowerLaw
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeConfig {
    pub omega_p: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialConfig {
    /// Built-in gold table with a Drude tail.
    Gold {
        omega_p: Option<f64>,
        gamma: Option<f64>,
    },
    /// Built-in silicon table plus the Drude term for the given resistivity.
    Silicon {
        #[serde(default = "default_rho")]
        rho_ohm_cm: f64,
        #[serde(default = "default_tau")]
        tau_s: f64,
        #[serde(default = "one")]
        omega_p_scale: f64,
    },
    SiliconHighResistivity,
    Drude {
        omega_p: f64,
        gamma: f64,
    },
    /// Optical data file, `omega_rad_s,n,k` or `omega_rad_s,eps_im`.
    Table {
        path: PathBuf,
        freq_unit: Option<String>,
        drude: Option<DrudeConfig>,
        /// Add the Drude Im ε to every row.
        #[serde(default)]
        augment: bool,
        low: Option<LowFrequencyExtension>,
        #[serde(default = "power_law")]
        high: HighFrequencyExtension,
    },
    Constant {
        eps: f64,
    },
}

impl MaterialConfig {
    /// Built-in material by name.
    pub fn named(name: &str) -> Option<Self> {
        Some(match name {
            "gold" => Self::Gold { omega_p: None, gamma: None },
            "silicon" => Self::Silicon {
                rho_ohm_cm: default_rho(),
                tau_s: default_tau(),
                omega_p_scale: 1.0,
            },
            "silicon-high-resistivity" => Self::SiliconHighResistivity,
            "ideal" => Self::Constant { eps: 1e12 },
            _ => return None,
        })
    }

    pub fn build(&self, base: &Path, unit: FreqUnit) -> Result<Arc<dyn Permittivity<f64>>> {
        Ok(match self {
            Self::Gold { omega_p, gamma } => {
                let d = reference::gold_drude::<f64>();
                let d = DrudeParams::new(omega_p.unwrap_or(d.omega_p), gamma.unwrap_or(d.gamma))?;
                Arc::new(reference::gold_with(d))
            }
            Self::Silicon { rho_ohm_cm, tau_s, omega_p_scale } => {
                let wp = casimir_core::materials::plasma_frequency_from_resistivity(*rho_ohm_cm, *tau_s)?;
                Arc::new(reference::silicon_with_plasma_frequency(wp * omega_p_scale, 1.0 / tau_s)?)
            }
            Self::SiliconHighResistivity => Arc::new(reference::silicon_high_resistivity::<f64>()),
            Self::Drude { omega_p, gamma } => {
                Arc::new(DielectricModel::drude(DrudeParams::new(*omega_p, *gamma)?))
            }
            Self::Table { path, freq_unit, drude, augment, low, high } => {
                let unit = match freq_unit {
                    Some(u) => u.parse().map_err(anyhow::Error::msg)?,
                    None => unit,
                };
                let path = base.join(path);
                let table = load_optical_csv(&path, unit)?;
                let drude = drude.map(|d| DrudeParams::new(d.omega_p, d.gamma)).transpose()?;
                match (augment, drude) {
                    (true, Some(d)) => Arc::new(DielectricModel::augmented(&table, d, *high)),
                    (true, None) => bail!("material table {}: augment needs drude parameters", path.display()),
                    (false, d) => {
                        let low = low.unwrap_or(if d.is_some() {
                            LowFrequencyExtension::DrudeTail
                        } else {
                            LowFrequencyExtension::None
                        });
                        Arc::new(DielectricModel::new(Some(table), d, low, *high)?)
                    }
                }
            }
            Self::Constant { eps } => {
                if !(*eps >= 1.0 && eps.is_finite()) {
                    bail!("constant permittivity must be at least 1, got {eps}");
                }
                Arc::new(ConstantPermittivity(*eps))
            }
        })
    }

    fn check_files(&self, base: &Path) -> Result<()> {
        if let Self::Table { path, .. } = self {
            let p = base.join(path);
            if !p.is_file() {
                bail!("optical data file not found: {}", p.display());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub radius_um: f64,
    pub radius_uncertainty_um: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { radius_um: 101.3, radius_uncertainty_um: 0.15 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessConfig {
    /// `fraction,height_nm` files; the built-in profiles when absent.
    pub sphere: Option<PathBuf>,
    pub plate: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub z_min_nm: f64,
    pub z_max_nm: f64,
    pub step_nm: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { z_min_nm: 62.33, z_max_nm: 600.04, step_nm: 0.17 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: Option<f64>,
    pub max_panel_depth: Option<usize>,
    pub xi_cutoff_factor: Option<f64>,
    /// Nodes per decade of the force interpolant.
    pub nodes_per_decade: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: None, max_panel_depth: None, xi_cutoff_factor: None, nodes_per_decade: 100 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Systematic {
    pub label: String,
    pub half_width_pn: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub window_nm: f64,
    pub separation_uncertainty_nm: f64,
    pub delta2: f64,
    pub confidence: f64,
    pub screen_outliers: bool,
    pub systematics: Vec<Systematic>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            window_nm: 0.8,
            separation_uncertainty_nm: 0.8,
            delta2: 0.005,
            confidence: 0.95,
            screen_outliers: true,
            systematics: casimir_core::pipeline::reference_systematics::<f64>()
                .into_iter()
                .map(|(label, a)| Systematic { label, half_width_pn: a / PN })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub n_sets: usize,
    /// Per-point noise of a single set.
    pub noise_pn: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self { n_sets: 65, noise_pn: 1.5 * 65f64.sqrt() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub z0_min_nm: f64,
    pub z0_max_nm: f64,
    pub scan_points: usize,
    pub bootstrap: usize,
    pub confidence: f64,
    /// Noise of synthesized sweeps.
    pub noise_pn: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let f = FitOptions::default();
        Self {
            z0_min_nm: f.z0_min / NM,
            z0_max_nm: f.z0_max / NM,
            scan_points: f.scan_points,
            bootstrap: f.bootstrap,
            confidence: f.confidence,
            noise_pn: 1.5,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()
            .with_context(|| format!("validating config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sphere.check_files(&self.base_dir)?;
        self.plate.check_files(&self.base_dir)?;
        for p in [&self.roughness.sphere, &self.roughness.plate].into_iter().flatten() {
            let p = self.base_dir.join(p);
            if !p.is_file() {
                bail!("roughness file not found: {}", p.display());
            }
        }
        self.geometry()?;
        self.grid_spec()?;
        self.quadrature()?;
        if let Some(u) = &self.freq_unit {
            u.parse::<FreqUnit>().map_err(anyhow::Error::msg)?;
        }
        if self.synthesis.n_sets < 2 {
            bail!("synthesis.n_sets must be at least 2");
        }
        for (what, v) in [
            ("synthesis.noise_pn", self.synthesis.noise_pn),
            ("budget.delta2", self.budget.delta2),
            ("budget.separation_uncertainty_nm", self.budget.separation_uncertainty_nm),
            ("calibration.noise_pn", self.calibration.noise_pn),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                bail!("{what} must be non-negative, got {v}");
            }
        }
        if !(self.budget.window_nm > 0.0) {
            bail!("budget.window_nm must be positive");
        }
        if self.quadrature.nodes_per_decade < 4 {
            bail!("quadrature.nodes_per_decade must be at least 4");
        }
        Ok(())
    }

    pub fn freq_unit(&self, cli: Option<FreqUnit>) -> Result<FreqUnit> {
        match (cli, &self.freq_unit) {
            (Some(u), _) => Ok(u),
            (None, Some(s)) => s.parse().map_err(anyhow::Error::msg),
            (None, None) => Ok(FreqUnit::RadPerS),
        }
    }

    pub fn geometry(&self) -> Result<Geometry<f64>> {
        Ok(Geometry::new(
            self.geometry.radius_um * 1e-6,
            self.geometry.radius_uncertainty_um * 1e-6,
        )?)
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>> {
        let g = GridSpec {
            z_min: self.grid.z_min_nm * NM,
            z_max: self.grid.z_max_nm * NM,
            step: self.grid.step_nm * NM,
        };
        g.points()?;
        Ok(g)
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec<f64>> {
        let d = QuadratureSpec::<f64>::default();
        let q = QuadratureSpec {
            rel_tol: self.quadrature.rel_tol.unwrap_or(d.rel_tol),
            max_panel_depth: self.quadrature.max_panel_depth.unwrap_or(d.max_panel_depth),
            xi_cutoff_factor: self.quadrature.xi_cutoff_factor.unwrap_or(d.xi_cutoff_factor),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn roughness(&self) -> Result<(RoughnessProfile<f64>, RoughnessProfile<f64>)> {
        let load = |p: &Option<PathBuf>, want: Body, dflt: RoughnessProfile<f64>| -> Result<_> {
            let Some(p) = p else { return Ok(dflt) };
            let p = self.base_dir.join(p);
            let text = std::fs::read_to_string(&p)
                .with_context(|| format!("reading roughness profile {}", p.display()))?;
            let (body, prof) = RoughnessProfile::from_csv_str(&text)
                .with_context(|| format!("parsing roughness profile {}", p.display()))?;
            if body != want {
                bail!("{}: profile is for the {body}, expected {want}", p.display());
            }
            Ok(prof)
        };
        Ok((
            load(&self.roughness.sphere, Body::Sphere, RoughnessProfile::reference_sphere())?,
            load(&self.roughness.plate, Body::Plate, RoughnessProfile::reference_plate())?,
        ))
    }

    pub fn analysis_settings(&self) -> AnalysisSettings<f64> {
        AnalysisSettings {
            window: self.budget.window_nm * NM,
            systematics: self
                .budget
                .systematics
                .iter()
                .map(|s| (s.label.clone(), s.half_width_pn * PN))
                .collect(),
            separation_uncertainty: self.budget.separation_uncertainty_nm * NM,
            delta2: self.budget.delta2,
            confidence: self.budget.confidence,
            screen_outliers: self.budget.screen_outliers,
        }
    }

    pub fn fit_options(&self, seed: u64) -> FitOptions {
        FitOptions {
            z0_min: self.calibration.z0_min_nm * NM,
            z0_max: self.calibration.z0_max_nm * NM,
            scan_points: self.calibration.scan_points,
            bootstrap: self.calibration.bootstrap,
            seed,
            confidence: self.calibration.confidence,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_reference_setup() {
        let c: RunConfig = toml::from_str("").unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid_spec().unwrap().points().unwrap().len(), 3164);
        assert_eq!(c.analysis_settings().systematics.len(), 4);
        assert!(matches!(c.plate, MaterialConfig::Silicon { .. }));
    }

    #[test]
    fn material_variants_parse() {
        let c: RunConfig = toml::from_str(
            r#"
            [sphere]
            kind = "drude"
            omega_p = 1.37e16
            gamma = 5.3e13
            [plate]
            kind = "silicon"
            omega_p_scale = 1.5
            "#,
        )
        .unwrap();
        let eps = c.sphere.build(Path::new("."), FreqUnit::RadPerS).unwrap();
        assert!(eps.eps_imag_axis(1e15).unwrap() > 1.0);
        assert!(toml::from_str::<RunConfig>("[plate]\nkind = \"unobtainium\"").is_err());
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn missing_table_is_reported_by_path() {
        let c: RunConfig =
            toml::from_str("[plate]\nkind = \"table\"\npath = \"nowhere/si.csv\"").unwrap();
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("nowhere/si.csv"), "{e}");
    }
}
