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

//! `casimir`: batch driver for materials, forces, calibration and the
//! theory–experiment comparison.

mod config;

use anyhow::{bail, Context, Result};
use casimir_core::compare::{error_figure, force_figure, force_ratio};
use casimir_core::electrostatics::{fit_calibration, synthesize_sweep, CalibrationSweep, SweepDesign};
use casimir_core::lifshitz::{
    force_curve, force_curve_interpolated, ForceCurve, Provenance, Surfaces,
};
use casimir_core::materials::{log_space, ConstantPermittivity, FreqUnit, Permittivity};
use casimir_core::pipeline::{
    analyze, ensemble_to_csv, load_ensemble, sampled, synthesize_from_curve, GridSpec, TheoryModel,
};
use clap::{Parser, Subcommand, ValueEnum};
use config::{MaterialConfig, RunConfig};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

const NM: f64 = 1e-9;
const PN: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "casimir", version, about = "Casimir force between a gold sphere and a silicon plate")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Unit of the first column of optical data files: rad_s or eV.
    #[arg(long, global = true)]
    freq_unit: Option<FreqUnit>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ForceMode {
    Smooth,
    Rough,
    Ideal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate ε(iξ) on a log-spaced grid.
    Epsilon {
        /// `sphere` or `plate` from the config, or gold, silicon,
        /// silicon-high-resistivity, ideal.
        #[arg(long, default_value = "sphere")]
        material: String,
        /// Optical data file, used instead of --material.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 1e13)]
        xi_min: f64,
        #[arg(long, default_value_t = 1e18)]
        xi_max: f64,
        #[arg(long, default_value_t = 51)]
        points: usize,
    },
    /// Sphere–plate force on the separation grid.
    Force {
        #[arg(long, value_enum, default_value = "rough")]
        mode: ForceMode,
        /// zmin:zmax:step in nm.
        #[arg(long)]
        grid: Option<String>,
        /// Evaluate every grid point instead of interpolating.
        #[arg(long)]
        direct: bool,
    },
    /// Fit z₀ and V₀ to an electrostatic voltage sweep.
    Calibrate {
        /// `V_applied,piezo_nm,F_pN,run_id` CSV.
        sweep: Option<PathBuf>,
        /// Generate the reference sweep instead of reading one.
        #[arg(long)]
        synthesize: bool,
        #[arg(long)]
        noise_pn: Option<f64>,
    },
    /// Synthetic measurement ensemble from the roughness-corrected theory.
    Synthesize {
        #[arg(long)]
        n_sets: Option<usize>,
        #[arg(long)]
        noise_pn: Option<f64>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Error budgets, confidence envelope and comparison with theory.
    Analyze {
        /// `set_id,z_nm,F_pN` CSV.
        ensemble: Option<PathBuf>,
        #[arg(long, conflicts_with = "ensemble")]
        synthesize: bool,
        #[arg(long, requires = "synthesize")]
        n_sets: Option<usize>,
        #[arg(long, requires = "synthesize")]
        noise_pn: Option<f64>,
        #[arg(long, requires = "synthesize")]
        grid: Option<String>,
    },
    /// Ratio of the sphere–plate force to the force with a plate of the
    /// sphere's material.
    Ratio {
        #[arg(long)]
        grid: Option<String>,
        /// Include roughness in both forces.
        #[arg(long)]
        rough: bool,
    },
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    seed: u64,
    unit: FreqUnit,
}

impl Ctx {
    fn model(&self, plate: Option<&MaterialConfig>) -> Result<TheoryModel<f64>> {
        let base = &self.cfg.base_dir;
        let sphere = sampled_arc(self.cfg.sphere.build(base, self.unit)?)?;
        let plate = sampled_arc(plate.unwrap_or(&self.cfg.plate).build(base, self.unit)?)?;
        let mut m = TheoryModel::new(sphere, plate, self.cfg.geometry()?);
        let (rs, rp) = self.cfg.roughness()?;
        m.sphere_roughness = rs;
        m.plate_roughness = rp;
        m.quadrature = self.cfg.quadrature()?;
        m.nodes_per_decade = self.cfg.quadrature.nodes_per_decade;
        Ok(m)
    }

    fn grid(&self, over: &Option<String>) -> Result<Vec<f64>> {
        let g = match over {
            Some(s) => GridSpec::from_nm_str(s)?,
            None => self.cfg.grid_spec()?,
        };
        Ok(g.points()?)
    }

    /// Writes every output only after all of them were produced.
    fn write(&self, files: &[(&str, String)]) -> Result<()> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))?;
        for (name, body) in files {
            let p = self.out.join(name);
            std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }
}

fn sampled_arc(m: Arc<dyn Permittivity<f64>>) -> Result<Arc<dyn Permittivity<f64>>> {
    Ok(sampled(m)?)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads);
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let ctx = Ctx {
        unit: cfg.freq_unit(cli.freq_unit)?,
        out: cli.out.or_else(|| cfg.out.as_ref().map(|o| cfg.base_dir.join(o))).unwrap_or_else(|| "out".into()),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        cfg,
    };
    match cli.command {
        Command::Epsilon { material, table, xi_min, xi_max, points } => {
            cmd_epsilon(&ctx, &material, table, xi_min, xi_max, points)
        }
        Command::Force { mode, grid, direct } => cmd_force(&ctx, mode, &grid, direct),
        Command::Calibrate { sweep, synthesize, noise_pn } => {
            cmd_calibrate(&ctx, sweep.as_deref(), synthesize, noise_pn)
        }
        Command::Synthesize { n_sets, noise_pn, grid } => cmd_synthesize(&ctx, n_sets, noise_pn, &grid),
        Command::Analyze { ensemble, synthesize, n_sets, noise_pn, grid } => {
            cmd_analyze(&ctx, ensemble.as_deref(), synthesize, n_sets, noise_pn, &grid)
        }
        Command::Ratio { grid, rough } => cmd_ratio(&ctx, &grid, rough),
    }
}

fn cmd_epsilon(
    ctx: &Ctx,
    material: &str,
    table: Option<PathBuf>,
    xi_min: f64,
    xi_max: f64,
    points: usize,
) -> Result<()> {
    if !(xi_min > 0.0 && xi_max > xi_min && points >= 2) {
        bail!("need 0 < xi_min < xi_max and at least 2 points");
    }
    let (label, mat) = match table {
        Some(path) => {
            if !path.is_file() {
                bail!("optical data file not found: {}", path.display());
            }
            let m = MaterialConfig::Table {
                path: path.clone(),
                freq_unit: None,
                drude: None,
                augment: false,
                low: None,
                high: casimir_core::materials::HighFrequencyExtension::PowerLaw,
            };
            (path.display().to_string(), m.build(Path::new(""), ctx.unit)?)
        }
        None => {
            let m = match material {
                "sphere" => ctx.cfg.sphere.clone(),
                "plate" => ctx.cfg.plate.clone(),
                other => MaterialConfig::named(other)
                    .with_context(|| format!("unknown material `{other}`"))?,
            };
            (material.to_string(), m.build(&ctx.cfg.base_dir, ctx.unit)?)
        }
    };
    let mut s = String::from("xi_rad_s,eps\n");
    for xi in log_space(xi_min, xi_max, points) {
        let e = mat.eps_imag_axis(xi).with_context(|| format!("ε(iξ) of {label}"))?;
        let _ = writeln!(s, "{xi:e},{e:e}");
    }
    ctx.write(&[("epsilon.csv", s)])?;
    println!("epsilon: {points} rows for {label} -> {}", ctx.out.join("epsilon.csv").display());
    Ok(())
}

fn cmd_force(ctx: &Ctx, mode: ForceMode, grid: &Option<String>, direct: bool) -> Result<()> {
    let z = ctx.grid(grid)?;
    let curve = match mode {
        ForceMode::Ideal => {
            let g = ctx.cfg.geometry()?;
            let q = ctx.cfg.quadrature()?;
            let metal = ConstantPermittivity::<f64>::ideal_metal();
            let mut c = if direct {
                force_curve(&z, &g, &metal, &metal, Surfaces::Smooth, &q)?
            } else {
                force_curve_interpolated(
                    &z,
                    &g,
                    &metal,
                    &metal,
                    Surfaces::Smooth,
                    &q,
                    ctx.cfg.quadrature.nodes_per_decade,
                )?
            };
            c.provenance = Provenance::IdealMetal;
            c
        }
        ForceMode::Smooth | ForceMode::Rough => {
            let m = ctx.model(None)?;
            let rough = matches!(mode, ForceMode::Rough);
            if direct {
                let surfaces = if rough {
                    Surfaces::Rough { sphere: &m.sphere_roughness, plate: &m.plate_roughness }
                } else {
                    Surfaces::Smooth
                };
                force_curve(&z, &m.geometry, &*m.sphere, &*m.plate, surfaces, &m.quadrature)?
            } else {
                m.curve(&z, rough)?
            }
        }
    };
    ctx.write(&[("force.csv", curve.to_csv_string())])?;
    println!(
        "force: {} rows ({}) -> {}",
        curve.len(),
        curve.provenance,
        ctx.out.join("force.csv").display()
    );
    Ok(())
}

fn cmd_calibrate(ctx: &Ctx, sweep: Option<&Path>, synthesize: bool, noise_pn: Option<f64>) -> Result<()> {
    let geom = ctx.cfg.geometry()?;
    let mut files = Vec::new();
    let sweep = match (sweep, synthesize) {
        (Some(p), false) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            CalibrationSweep::from_csv_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        (None, true) => {
            let mut d = SweepDesign::reference(ctx.seed);
            d.radius = geom.radius;
            d.noise_sigma = noise_pn.unwrap_or(ctx.cfg.calibration.noise_pn) * PN;
            let s = synthesize_sweep(&d)?;
            files.push(("sweep.csv", s.to_csv_string()));
            s
        }
        (Some(_), true) => bail!("give either a sweep file or --synthesize, not both"),
        (None, false) => bail!("no sweep: pass a sweep CSV or --synthesize"),
    };
    let fit = fit_calibration(&sweep, geom.radius, &ctx.cfg.fit_options(ctx.seed))?;
    let report = fit.report();
    files.push(("calibration.txt", report.clone()));
    ctx.write(&files)?;
    print!("{report}");
    Ok(())
}

fn cmd_synthesize(ctx: &Ctx, n_sets: Option<usize>, noise_pn: Option<f64>, grid: &Option<String>) -> Result<()> {
    let z = ctx.grid(grid)?;
    let theory = ctx.model(None)?.curve(&z, true)?;
    let n = n_sets.unwrap_or(ctx.cfg.synthesis.n_sets);
    let ens = synthesize(ctx, &theory, n, noise_pn)?;
    ctx.write(&[("ensemble.csv", ensemble_to_csv(&ens)), ("theory.csv", theory.to_csv_string())])?;
    println!(
        "synthesize: {} sets x {} points -> {}",
        ens.n(),
        z.len(),
        ctx.out.join("ensemble.csv").display()
    );
    Ok(())
}

fn synthesize(
    ctx: &Ctx,
    theory: &ForceCurve<f64>,
    n_sets: usize,
    noise_pn: Option<f64>,
) -> Result<casimir_core::MeasurementEnsembleF64> {
    if n_sets < 2 {
        bail!("--n-sets must be at least 2");
    }
    let noise = noise_pn.unwrap_or(ctx.cfg.synthesis.noise_pn);
    if !(noise >= 0.0 && noise.is_finite()) {
        bail!("--noise-pn must be non-negative");
    }
    let sys = ctx.cfg.analysis_settings().systematics;
    Ok(synthesize_from_curve(theory, n_sets, noise * PN, &sys, ctx.seed)?)
}

fn cmd_analyze(
    ctx: &Ctx,
    ensemble: Option<&Path>,
    synth: bool,
    n_sets: Option<usize>,
    noise_pn: Option<f64>,
    grid: &Option<String>,
) -> Result<()> {
    let model = ctx.model(None)?;
    let mut files = Vec::new();
    let (ens, theory) = match (ensemble, synth) {
        (Some(p), _) => {
            let ens = load_ensemble::<f64>(p)?;
            let theory = model.curve(ens.grid(), true)?;
            (ens, theory)
        }
        (None, true) => {
            let z = ctx.grid(grid)?;
            let theory = model.curve(&z, true)?;
            let n = n_sets.unwrap_or(ctx.cfg.synthesis.n_sets);
            let ens = synthesize(ctx, &theory, n, noise_pn)?;
            files.push(("ensemble.csv", ensemble_to_csv(&ens)));
            (ens, theory)
        }
        (None, false) => bail!("no ensemble: pass an ensemble CSV or --synthesize"),
    };
    let a = analyze(&ens, &theory, &model.geometry, &ctx.cfg.analysis_settings())?;

    let mut summary = a.experimental.report();
    let flagged: Vec<String> = a.flagged.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(summary, "outlier_sets = [{}]", flagged.join(", "));
    let first = a.mean.points()[0];
    let _ = writeln!(
        summary,
        "delta_expt_percent_at_zmin = {:.4}",
        100.0 * a.experimental.delta_total / first.1.abs()
    );
    let _ = writeln!(summary, "mean_force_at_zmin_pN = {:.4}", first.1 / PN);
    let t0 = &a.theoretical[0];
    let _ = writeln!(summary, "delta_theor_percent_at_zmin = {:.4}", 100.0 * t0.delta_theor);
    let _ = writeln!(
        summary,
        "delta_theor_combination = approximate (delta0 treated as nonuniform with sd = delta0/2)"
    );
    summary.push_str(&a.report.summary());

    let (de, dt) = a.relative_errors();
    files.extend([
        ("theory.csv", theory.to_csv_string()),
        ("mean.csv", a.mean.to_csv_string()),
        ("budget.txt", a.experimental.report()),
        ("budget.csv", a.budget_csv()?),
        ("report.csv", a.report.to_csv_string()),
        ("agreement.csv", a.report.agreement_csv()),
        ("summary.txt", summary.clone()),
        ("force.svg", force_figure(&theory, &a.mean).render()),
        ("errors.svg", error_figure(&de, &dt).render()),
        ("differences.svg", a.report.difference_figure().render()),
        ("agreement.svg", a.report.agreement_figure().render()),
    ]);
    ctx.write(&files)?;
    print!("{summary}");
    Ok(())
}

fn cmd_ratio(ctx: &Ctx, grid: &Option<String>, rough: bool) -> Result<()> {
    let z = ctx.grid(grid)?;
    let mixed = ctx.model(None)?;
    let same = ctx.model(Some(&ctx.cfg.sphere.clone()))?;
    let r = force_ratio(&mixed.curve(&z, rough)?, &same.curve(&z, rough)?)?;
    let mut s = String::new();
    let (z0, r0) = r.points[0];
    let _ = writeln!(s, "ratio_at_zmin = {r0:.6}");
    let _ = writeln!(s, "zmin_nm = {:.4}", z0 / NM);
    if let Some(v) = r.at(200.0 * NM) {
        let _ = writeln!(s, "ratio_at_200nm = {v:.6}");
    }
    let _ = writeln!(s, "trend = {}", r.trend);
    let _ = writeln!(s, "slope_per_nm = {:e}", r.slope * NM);
    let _ = writeln!(s, "excluded_points = {}", r.excluded.len());
    ctx.write(&[
        ("ratio.csv", r.to_csv_string()),
        ("ratio.txt", s.clone()),
        ("ratio.svg", r.figure("sphere-plate / same-material").render()),
    ])?;
    print!("{s}");
    Ok(())
}
