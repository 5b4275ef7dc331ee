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

//! Voltage-sweep calibration: contact separation z₀ and residual potential V₀.
//!
//! Separations are `z = z₀ + d` with `d` the piezo-derived distance from
//! contact. The model F = g(z₀ + d)(V − V₀)², g = ½|dC/dz|, is quadratic in
//! V₀, so for fixed z₀ the optimal V₀ is a root of a cubic. z₀ is then found
//! by a logarithmic scan refined with golden-section search.

use super::{capacitance_gradient, ElectrostaticsError, DEFAULT_MAX_TERMS};
use crate::constants::{NM, PN};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One run at a fixed applied voltage: `(piezo distance m, force N)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun<T> {
    pub voltage: T,
    pub run_id: usize,
    pub points: Vec<(T, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSweep<T> {
    runs: Vec<CalibrationRun<T>>,
    repeats_per_voltage: usize,
}

impl<T: Scalar> CalibrationSweep<T> {
    pub fn new(runs: Vec<CalibrationRun<T>>) -> Result<Self, ElectrostaticsError> {
        let bad = |m: String| Err(ElectrostaticsError::InvalidSweep(m));
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for r in &runs {
            if !r.voltage.is_finite() {
                return bad(format!("run {}: non-finite voltage", r.run_id));
            }
            if r.points.len() < 5 {
                return bad(format!(
                    "run {}: {} points, need at least 5",
                    r.run_id,
                    r.points.len()
                ));
            }
            if r.points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
                return bad(format!("run {}: non-finite value", r.run_id));
            }
            let up = r.points.windows(2).all(|w| w[1].0 > w[0].0);
            let down = r.points.windows(2).all(|w| w[1].0 < w[0].0);
            if !(up || down) {
                return bad(format!("run {}: piezo extension not monotone", r.run_id));
            }
            *counts.entry(r.voltage.as_f64().to_bits()).or_default() += 1;
        }
        if counts.len() < 2 {
            return bad("need at least two distinct voltages".into());
        }
        let repeats_per_voltage = counts.values().copied().min().unwrap_or(0);
        Ok(Self {
            runs,
            repeats_per_voltage,
        })
    }

    pub fn runs(&self) -> &[CalibrationRun<T>] {
        &self.runs
    }

    /// Smallest number of runs recorded at any one voltage.
    pub fn repeats_per_voltage(&self) -> usize {
        self.repeats_per_voltage
    }

    /// `V_applied,piezo_nm,F_pN,run_id`
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("V_applied,piezo_nm,F_pN,run_id\n");
        for r in &self.runs {
            for &(d, f) in &r.points {
                let _ = writeln!(
                    s,
                    "{:e},{:e},{:e},{}",
                    r.voltage.as_f64(),
                    d.as_f64() / NM,
                    f.as_f64() / PN,
                    r.run_id
                );
            }
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self, ElectrostaticsError> {
        let mut runs: Vec<CalibrationRun<T>> = Vec::new();
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') || line.starts_with("V_applied") {
                continue;
            }
            let perr = |msg: String| ElectrostaticsError::Parse { line: lineno, msg };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(perr("expected `V_applied,piezo_nm,F_pN,run_id`".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| perr(format!("`{s}`: {e}")));
            let v = num(cols[0])?;
            let d = num(cols[1])? * NM;
            let f = num(cols[2])? * PN;
            let id: usize = cols[3]
                .parse()
                .map_err(|e| perr(format!("run_id `{}`: {e}", cols[3])))?;
            let k = *index.entry(id).or_insert_with(|| {
                runs.push(CalibrationRun {
                    voltage: T::lit(v),
                    run_id: id,
                    points: Vec::new(),
                });
                runs.len() - 1
            });
            if runs[k].voltage != T::lit(v) {
                return Err(perr(format!("run {id} changes voltage")));
            }
            runs[k].points.push((T::lit(d), T::lit(f)));
        }
        Self::new(runs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Search bracket for z₀, m.
    pub z0_min: f64,
    pub z0_max: f64,
    pub scan_points: usize,
    /// Residual-bootstrap resamples; 0 disables.
    pub bootstrap: usize,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            z0_min: 1e-9,
            z0_max: 1e-6,
            scan_points: 120,
            bootstrap: 200,
            seed: 0,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFit<T> {
    pub z0: T,
    /// Half-width of the confidence interval on z₀.
    pub dz0: T,
    pub v0: T,
    pub dv0: T,
    pub confidence: f64,
    /// Parabola vertex `(z, V₀, ΔV₀)` at each piezo position shared by all voltages.
    pub per_separation_v0: Vec<(T, T, T)>,
    /// Slope of V₀ against separation and its standard error, V/m.
    pub v0_slope: T,
    pub v0_slope_err: T,
    pub separation_dependent_v0: bool,
    pub residual_rms: T,
    pub n_points: usize,
    pub bootstrap_dz0: Option<T>,
    pub bootstrap_dv0: Option<T>,
}

impl<T: Scalar> CalibrationFit<T> {
    /// `key = value` report.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "z0_nm = {:.6}", self.z0.as_f64() / NM);
        let _ = writeln!(s, "dz0_nm = {:.6}", self.dz0.as_f64() / NM);
        let _ = writeln!(s, "V0_V = {:.6}", self.v0.as_f64());
        let _ = writeln!(s, "dV0_V = {:.6}", self.dv0.as_f64());
        let _ = writeln!(s, "confidence = {}", self.confidence);
        let _ = writeln!(s, "n_points = {}", self.n_points);
        let _ = writeln!(s, "residual_rms_pN = {:.6}", self.residual_rms.as_f64() / PN);
        if let (Some(a), Some(b)) = (self.bootstrap_dz0, self.bootstrap_dv0) {
            let _ = writeln!(s, "bootstrap_dz0_nm = {:.6}", a.as_f64() / NM);
            let _ = writeln!(s, "bootstrap_dV0_V = {:.6}", b.as_f64());
        }
        let _ = writeln!(s, "V0_slope_V_per_um = {:.6e}", self.v0_slope.as_f64() * 1e-6);
        let _ = writeln!(
            s,
            "V0_slope_err_V_per_um = {:.6e}",
            self.v0_slope_err.as_f64() * 1e-6
        );
        let _ = writeln!(s, "separation_dependent_V0 = {}", self.separation_dependent_v0);
        let _ = writeln!(s, "# z_nm, V0_V, dV0_V");
        for &(z, v, dv) in &self.per_separation_v0 {
            let _ = writeln!(s, "{:.4}, {:.6}, {:.6}", z.as_f64() / NM, v.as_f64(), dv.as_f64());
        }
        s
    }
}

/// Averaged data: one entry per distinct voltage, sorted by voltage.
struct Averaged {
    voltages: Vec<f64>,
    /// Per voltage, `(d, F)` points.
    points: Vec<Vec<(f64, f64)>>,
}

fn average_runs<T: Scalar>(sweep: &CalibrationSweep<T>) -> Averaged {
    let mut groups: BTreeMap<i64, Vec<Vec<(f64, f64)>>> = BTreeMap::new();
    for r in sweep.runs() {
        let mut pts: Vec<(f64, f64)> =
            r.points.iter().map(|p| (p.0.as_f64(), p.1.as_f64())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        groups.entry(ordered_key(r.voltage.as_f64())).or_default().push(pts);
    }
    let mut voltages = Vec::new();
    let mut points = Vec::new();
    for (key, runs) in groups {
        voltages.push(from_ordered_key(key));
        let same_grid = runs.iter().all(|r| {
            r.len() == runs[0].len() && r.iter().zip(&runs[0]).all(|(a, b)| a.0 == b.0)
        });
        if same_grid {
            let avg = (0..runs[0].len())
                .map(|j| {
                    let mut fs: Vec<f64> = runs.iter().map(|r| r[j].1).collect();
                    fs.sort_by(f64::total_cmp);
                    (runs[0][j].0, fs.iter().sum::<f64>() / fs.len() as f64)
                })
                .collect();
            points.push(avg);
        } else {
            let mut all: Vec<(f64, f64)> = runs.into_iter().flatten().collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            points.push(all);
        }
    }
    Averaged { voltages, points }
}

/// Monotone map from f64 to i64 for use as an ordered key.
fn ordered_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

fn from_ordered_key(k: i64) -> f64 {
    let b = if k < 0 { k ^ i64::MAX } else { k };
    f64::from_bits(b as u64)
}

/// Flattened data with the distinct piezo positions pre-indexed so that g is
/// evaluated once per position.
struct Problem {
    radius: f64,
    d_unique: Vec<f64>,
    /// (voltage, index into d_unique, force / scale)
    rows: Vec<(f64, usize, f64)>,
    scale: f64,
}

impl Problem {
    fn new(avg: &Averaged, radius: f64) -> Self {
        let mut d_unique: Vec<f64> = avg.points.iter().flatten().map(|p| p.0).collect();
        d_unique.sort_by(f64::total_cmp);
        d_unique.dedup();
        let scale = avg
            .points
            .iter()
            .flatten()
            .fold(0.0f64, |m, p| m.max(p.1.abs()))
            .max(f64::MIN_POSITIVE);
        let mut rows = Vec::new();
        for (v, pts) in avg.voltages.iter().zip(&avg.points) {
            for &(d, f) in pts {
                let k = d_unique.binary_search_by(|x| x.total_cmp(&d)).unwrap();
                rows.push((*v, k, f / scale));
            }
        }
        Self {
            radius,
            d_unique,
            rows,
            scale,
        }
    }

    fn g(&self, z0: f64) -> Result<Vec<f64>, ElectrostaticsError> {
        self.d_unique
            .iter()
            .map(|&d| {
                capacitance_gradient(z0 + d, self.radius, DEFAULT_MAX_TERMS)
                    .map(|c| 0.5 * c.abs() / self.scale)
            })
            .collect()
    }

    /// Optimal V₀ and objective at fixed z₀, for forces `f` (scaled).
    fn profile(&self, g: &[f64], f: &[f64]) -> (f64, f64) {
        let (mut c3, mut c2, mut c1, mut c0) = (0.0, 0.0, 0.0, 0.0);
        for (&(v, k, _), &fi) in self.rows.iter().zip(f) {
            let gi = g[k];
            let g2 = gi * gi;
            c3 += g2;
            c2 -= 3.0 * g2 * v;
            c1 += 3.0 * g2 * v * v - fi * gi;
            c0 += fi * gi * v - g2 * v * v * v;
        }
        let objective = |u: f64| -> f64 {
            self.rows
                .iter()
                .zip(f)
                .map(|(&(v, k, _), &fi)| {
                    let r = fi - g[k] * (v - u) * (v - u);
                    r * r
                })
                .sum()
        };
        real_cubic_roots(c3, c2, c1, c0)
            .into_iter()
            .map(|u| (u, objective(u)))
            .fold((0.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    }

    fn objective_at(&self, z0: f64, f: &[f64]) -> Result<(f64, f64), ElectrostaticsError> {
        Ok(self.profile(&self.g(z0)?, f))
    }

    /// Scan `n` log-spaced z₀ values in `[lo, hi]`, then golden-section refine.
    fn minimize(&self, lo: f64, hi: f64, n: usize, f: &[f64]) -> Result<(f64, f64), ElectrostaticsError> {
        let zs = crate::materials::log_space(lo, hi, n.max(3));
        let mut vals = Vec::with_capacity(zs.len());
        for &z in &zs {
            vals.push(self.objective_at(z, f)?.1);
        }
        let i = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|p| p.0)
            .unwrap();
        let (mut a, mut b) = (
            zs[i.saturating_sub(1)].ln(),
            zs[(i + 1).min(zs.len() - 1)].ln(),
        );
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = self.objective_at(x1.exp(), f)?.1;
        let mut f2 = self.objective_at(x2.exp(), f)?.1;
        for _ in 0..200 {
            if (b - a).abs() < 1e-13 {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = self.objective_at(x1.exp(), f)?.1;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = self.objective_at(x2.exp(), f)?.1;
            }
        }
        let z0 = (0.5 * (a + b)).exp();
        let (v0, _) = self.objective_at(z0, f)?;
        if z0 <= lo * (1.0 + 1e-9) || z0 >= hi * (1.0 - 1e-9) {
            return Err(ElectrostaticsError::FitFailed(format!(
                "z0 = {z0:e} m at the edge of the search bracket [{lo:e}, {hi:e}]"
            )));
        }
        Ok((z0, v0))
    }
}

/// Real roots of c3 u³ + c2 u² + c1 u + c0, polished by Newton steps.
fn real_cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c3 == 0.0 {
        return if c2 != 0.0 {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc < 0.0 {
                vec![-c1 / (2.0 * c2)]
            } else {
                let s = disc.sqrt();
                vec![(-c1 + s) / (2.0 * c2), (-c1 - s) / (2.0 * c2)]
            }
        } else if c1 != 0.0 {
            vec![-c0 / c1]
        } else {
            vec![0.0]
        };
    }
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let shift = -a / 3.0;
    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let phi = if r == 0.0 {
            0.0
        } else {
            (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0).acos() / 3.0
        };
        (0..3)
            .map(|k| 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect()
    };
    for u in &mut roots {
        for _ in 0..3 {
            let f = ((c3 * *u + c2) * *u + c1) * *u + c0;
            let df = (3.0 * c3 * *u + 2.0 * c2) * *u + c1;
            if df != 0.0 {
                *u -= f / df;
            }
        }
    }
    roots
}

fn student_t(confidence: f64, dof: usize) -> f64 {
    crate::stats::student_quantile(dof.max(1) as f64, confidence)
        .expect("validated confidence and positive degrees of freedom")
}

/// Solves the 3×3 normal equations of a parabola F = aV² + bV + c and returns
/// the vertex with its confidence half-width.
fn parabola_vertex(pts: &[(f64, f64)], confidence: f64) -> Option<(f64, f64)> {
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(v, f) in pts {
        let x = [v * v, v, 1.0];
        for i in 0..3 {
            rhs[i] += x[i] * f;
            for j in 0..3 {
                m[i][j] += x[i] * x[j];
            }
        }
    }
    let inv = invert3(m)?;
    let coef: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|j| inv[i][j] * rhs[j]).sum())
        .collect();
    let (a, b) = (coef[0], coef[1]);
    if a == 0.0 {
        return None;
    }
    let v0 = -b / (2.0 * a);
    let ss: f64 = pts
        .iter()
        .map(|&(v, f)| {
            let r = f - (a * v * v + b * v + coef[2]);
            r * r
        })
        .sum();
    let dv0 = if n > 3 {
        let s2 = ss / (n - 3) as f64;
        let grad = [b / (2.0 * a * a), -1.0 / (2.0 * a)];
        let var = s2
            * (grad[0] * grad[0] * inv[0][0]
                + 2.0 * grad[0] * grad[1] * inv[0][1]
                + grad[1] * grad[1] * inv[1][1]);
        student_t(confidence, n - 3) * var.max(0.0).sqrt()
    } else {
        0.0
    };
    Some((v0, dv0))
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
            let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / det;
        }
    }
    Some(r)
}

/// Fits z₀ and V₀ to a calibration sweep for a sphere of radius `radius`.
pub fn fit_calibration<T: Scalar>(
    sweep: &CalibrationSweep<T>,
    radius: T,
    opts: &FitOptions,
) -> Result<CalibrationFit<T>, ElectrostaticsError> {
    let radius = radius.as_f64();
    if !(radius > 0.0) {
        return Err(ElectrostaticsError::Domain {
            what: "sphere radius",
            value: radius,
        });
    }
    if !(opts.z0_min > 0.0 && opts.z0_max > opts.z0_min) {
        return Err(ElectrostaticsError::Domain {
            what: "z0 search bracket",
            value: opts.z0_min,
        });
    }
    if !(opts.confidence > 0.0 && opts.confidence < 1.0) {
        return Err(ElectrostaticsError::Domain {
            what: "confidence",
            value: opts.confidence,
        });
    }
    let avg = average_runs(sweep);
    let prob = Problem::new(&avg, radius);
    let n = prob.rows.len();
    if n < 3 {
        return Err(ElectrostaticsError::InvalidSweep("fewer than 3 points".into()));
    }
    let f: Vec<f64> = prob.rows.iter().map(|r| r.2).collect();
    let (z0, v0) = prob.minimize(opts.z0_min, opts.z0_max, opts.scan_points, &f)?;

    // Linearized covariance.
    let g = prob.g(z0)?;
    let h = 1e-5 * z0;
    let gp = prob.g(z0 + h)?;
    let gm = prob.g(z0 - h)?;
    let (mut jtj, mut ss) = ([[0.0f64; 2]; 2], 0.0);
    let mut fitted = Vec::with_capacity(n);
    for (&(v, k, _), &fi) in prob.rows.iter().zip(&f) {
        let dv = v - v0;
        let m = g[k] * dv * dv;
        fitted.push(m);
        ss += (fi - m) * (fi - m);
        let j = [(gp[k] - gm[k]) / (2.0 * h) * dv * dv, -2.0 * g[k] * dv];
        for a in 0..2 {
            for b in 0..2 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    if !(det > 0.0) {
        return Err(ElectrostaticsError::FitFailed(
            "singular Jacobian at the optimum".into(),
        ));
    }
    let dof = n - 2;
    let s2 = ss / dof as f64;
    let t = student_t(opts.confidence, dof);
    let dz0 = (t * (s2 * jtj[1][1] / det).sqrt()).max(f64::EPSILON * z0);
    let dv0 = (t * (s2 * jtj[0][0] / det).sqrt()).max(f64::EPSILON * v0.abs().max(1e-3));
    let residual_rms = (ss / n as f64).sqrt() * prob.scale;

    let (bootstrap_dz0, bootstrap_dv0) = if opts.bootstrap > 0 {
        let resid: Vec<f64> = f.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let (lo, hi) = (z0 / 1.5, z0 * 1.5);
        let mut zs = Vec::with_capacity(opts.bootstrap);
        let mut vs = Vec::with_capacity(opts.bootstrap);
        for _ in 0..opts.bootstrap {
            let fb: Vec<f64> = fitted
                .iter()
                .map(|m| m + resid[rng.random_range(0..n)])
                .collect();
            if let Ok((zb, vb)) = prob.minimize(lo, hi, 24, &fb) {
                zs.push(zb);
                vs.push(vb);
            }
        }
        (
            percentile_half_width(&mut zs, opts.confidence),
            percentile_half_width(&mut vs, opts.confidence),
        )
    } else {
        (None, None)
    };

    // V₀ at each piezo position common to every voltage.
    let mut per_separation_v0 = Vec::new();
    for &d in &prob.d_unique {
        let pts: Vec<(f64, f64)> = avg
            .voltages
            .iter()
            .zip(&avg.points)
            .filter_map(|(&v, p)| p.iter().find(|q| q.0 == d).map(|q| (v, q.1)))
            .collect();
        if pts.len() == avg.voltages.len() {
            if let Some((v, dv)) = parabola_vertex(&pts, opts.confidence) {
                per_separation_v0.push((z0 + d, v, dv));
            }
        }
    }
    let (v0_slope, v0_slope_err, separation_dependent_v0) =
        drift(&per_separation_v0, dv0, opts.confidence);

    let c = T::lit;
    Ok(CalibrationFit {
        z0: c(z0),
        dz0: c(dz0),
        v0: c(v0),
        dv0: c(dv0),
        confidence: opts.confidence,
        per_separation_v0: per_separation_v0
            .into_iter()
            .map(|(z, v, dv)| (c(z), c(v), c(dv)))
            .collect(),
        v0_slope: c(v0_slope),
        v0_slope_err: c(v0_slope_err),
        separation_dependent_v0,
        residual_rms: c(residual_rms),
        n_points: n,
        bootstrap_dz0: bootstrap_dz0.map(c),
        bootstrap_dv0: bootstrap_dv0.map(c),
    })
}

fn percentile_half_width(xs: &mut [f64], confidence: f64) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (xs.len() - 1) as f64;
        let i = pos.floor() as usize;
        let j = (i + 1).min(xs.len() - 1);
        xs[i] + (pos - i as f64) * (xs[j] - xs[i])
    };
    let tail = 0.5 * (1.0 - confidence);
    Some(0.5 * (q(1.0 - tail) - q(tail)))
}

/// Least-squares slope of V₀ against z; flagged when the slope is
/// significant and the implied drift over the range exceeds the V₀ interval.
fn drift(pts: &[(f64, f64, f64)], dv0: f64, confidence: f64) -> (f64, f64, bool) {
    let m = pts.len();
    if m < 3 {
        return (0.0, 0.0, false);
    }
    let mz = pts.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0, false);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mz) * (p.1 - mv)).sum();
    let slope = sxy / sxx;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - mv - slope * (p.0 - mz)).powi(2))
        .sum();
    let se = (ss / (m - 2) as f64 / sxx).sqrt();
    let span = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let significant = slope.abs() > student_t(confidence, m - 2) * se;
    let large = slope.abs() * span > dv0.max(1e-6);
    (slope, se, significant && large)
}

/// Parameters of a synthetic calibration sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDesign<T> {
    pub radius: T,
    pub z0: T,
    pub v0: T,
    pub voltages: Vec<T>,
    /// Piezo distances from contact, m.
    pub piezo: Vec<T>,
    pub repeats: usize,
    /// Gaussian force noise per point, N.
    pub noise_sigma: T,
    /// Linear drift of V₀ with separation, V/m; zero for a clean surface.
    pub v0_slope: T,
    pub seed: u64,
}

impl<T: Scalar> SweepDesign<T> {
    /// Seven voltages from +0.2 V to −0.4 V, five repeats, 40 piezo
    /// positions from 100 nm to 2 μm.
    pub fn reference(seed: u64) -> Self {
        Self {
            radius: T::lit(101.3e-6),
            z0: T::lit(32.1e-9),
            v0: T::lit(-0.114),
            voltages: [0.2, 0.1, 0.0, -0.1, -0.2, -0.3, -0.4]
                .iter()
                .map(|&v| T::lit(v))
                .collect(),
            piezo: (0..40)
                .map(|i| T::lit(100e-9 + i as f64 * 1900e-9 / 39.0))
                .collect(),
            repeats: 5,
            noise_sigma: T::lit(1.5e-12),
            v0_slope: T::zero(),
            seed,
        }
    }
}

pub fn synthesize_sweep<T: Scalar>(
    design: &SweepDesign<T>,
) -> Result<CalibrationSweep<T>, ElectrostaticsError> {
    let sigma = design.noise_sigma.as_f64();
    let noise = Normal::new(0.0, sigma.max(0.0)).map_err(|_| ElectrostaticsError::Domain {
        what: "noise sigma",
        value: sigma,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    let mut runs = Vec::new();
    let mut id = 0;
    for &v in &design.voltages {
        for _ in 0..design.repeats {
            let mut points = Vec::with_capacity(design.piezo.len());
            for &d in &design.piezo {
                let z = design.z0 + d;
                let v0 = design.v0 + design.v0_slope * z;
                let f = super::electrostatic_force(z, design.radius, v, v0)?;
                let eps = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                points.push((d, f + T::lit(eps)));
            }
            runs.push(CalibrationRun {
                voltage: v,
                run_id: id,
                points,
            });
            id += 1;
        }
    }
    CalibrationSweep::new(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn noiseless() -> SweepDesign<f64> {
        SweepDesign {
            noise_sigma: 0.0,
            ..SweepDesign::reference(1)
        }
    }

    fn quick() -> FitOptions {
        FitOptions {
            bootstrap: 0,
            ..FitOptions::default()
        }
    }

    #[test]
    fn cubic_roots() {
        let mut r = real_cubic_roots(1.0, -6.0, 11.0, -6.0);
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        let r = real_cubic_roots(2.0, 0.0, 2.0, -4.0);
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_round_trip() {
        let sweep = synthesize_sweep(&noiseless()).unwrap();
        let fit = fit_calibration(&sweep, 101.3e-6, &quick()).unwrap();
        assert_relative_eq!(fit.z0, 32.1e-9, max_relative = 1e-6);
        assert_relative_eq!(fit.v0, -0.114, max_relative = 1e-6);
        assert!(fit.dz0 > 0.0);
        assert!(!fit.separation_dependent_v0);
        assert_eq!(fit.per_separation_v0.len(), 40);
    }

    #[test]
    fn noisy_fit_with_bootstrap() {
        let sweep = synthesize_sweep(&SweepDesign::reference(7)).unwrap();
        let fit = fit_calibration(
            &sweep,
            101.3e-6,
            &FitOptions {
                bootstrap: 50,
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!((fit.z0 - 32.1e-9f64).abs() < 0.8e-9);
        assert!((fit.v0 + 0.114f64).abs() < 0.002);
        let b = fit.bootstrap_dz0.unwrap();
        assert!(b > 0.0 && b < 10.0 * fit.dz0, "{b:e} vs {:e}", fit.dz0);
        assert!(fit.report().contains("z0_nm = "));
    }

    #[test]
    fn drift_flagged() {
        let design = SweepDesign {
            v0_slope: 0.02 / 1e-6,
            ..SweepDesign::reference(3)
        };
        let fit = fit_calibration(&synthesize_sweep(&design).unwrap(), 101.3e-6, &quick()).unwrap();
        assert!(fit.separation_dependent_v0);
        let clean = fit_calibration(
            &synthesize_sweep(&SweepDesign::reference(3)).unwrap(),
            101.3e-6,
            &quick(),
        )
        .unwrap();
        assert!(!clean.separation_dependent_v0);
    }

    #[test]
    fn invariant_under_run_reindexing() {
        let sweep = synthesize_sweep(&SweepDesign::reference(11)).unwrap();
        let mut runs = sweep.runs().to_vec();
        runs.reverse();
        for (i, r) in runs.iter_mut().enumerate() {
            r.run_id = 1000 - i;
            r.points.reverse();
        }
        let shuffled = CalibrationSweep::new(runs).unwrap();
        let a = fit_calibration(&sweep, 101.3e-6, &quick()).unwrap();
        let b = fit_calibration(&shuffled, 101.3e-6, &quick()).unwrap();
        assert_eq!(a.z0, b.z0);
        assert_eq!(a.v0, b.v0);
    }

    #[test]
    fn invariant_under_force_units() {
        let sweep = synthesize_sweep(&SweepDesign::reference(5)).unwrap();
        let text = sweep.to_csv_string();
        let back = CalibrationSweep::<f64>::from_csv_str(&text).unwrap();
        let a = fit_calibration(&sweep, 101.3e-6, &quick()).unwrap();
        let b = fit_calibration(&back, 101.3e-6, &quick()).unwrap();
        assert_relative_eq!(a.z0, b.z0, max_relative = 1e-9);
        assert_relative_eq!(a.v0, b.v0, max_relative = 1e-9);
    }

    #[test]
    fn sweep_validation() {
        let run = |v: f64, id| CalibrationRun {
            voltage: v,
            run_id: id,
            points: (0..5).map(|i| (i as f64 * 1e-8, 1e-12)).collect(),
        };
        assert!(CalibrationSweep::new(vec![run(0.1, 0), run(0.1, 1)]).is_err());
        let mut short = run(0.2, 1);
        short.points.pop();
        assert!(CalibrationSweep::new(vec![run(0.1, 0), short]).is_err());
        let mut wiggle = run(0.2, 1);
        wiggle.points.swap(1, 2);
        assert!(CalibrationSweep::new(vec![run(0.1, 0), wiggle]).is_err());
        let ok = CalibrationSweep::new(vec![run(0.1, 0), run(0.2, 1), run(0.2, 2)]).unwrap();
        assert_eq!(ok.repeats_per_voltage(), 1);
        match CalibrationSweep::<f64>::from_csv_str("V_applied,piezo_nm,F_pN,run_id\n0.1,1,2,0\n0.1,x,2,0\n") {
            Err(ElectrostaticsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
