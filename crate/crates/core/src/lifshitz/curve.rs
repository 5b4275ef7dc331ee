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

//! Force curves on a separation grid.

use super::{
    lifshitz_force, roughness_corrected_force, Geometry, LifshitzError, QuadratureSpec,
    RoughnessProfile,
};
use crate::materials::{ConstantPermittivity, Permittivity};
use crate::scalar::Scalar;
use crate::units::{format_scaled, parse_scaled};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Smooth,
    RoughnessCorrected,
    IdealMetal,
    ExperimentalMean,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Smooth => "smooth",
            Provenance::RoughnessCorrected => "roughness_corrected",
            Provenance::IdealMetal => "ideal_metal",
            Provenance::ExperimentalMean => "experimental_mean",
        }
    }
}

impl FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "smooth" => Provenance::Smooth,
            "roughness_corrected" => Provenance::RoughnessCorrected,
            "ideal_metal" => Provenance::IdealMetal,
            "experimental_mean" => Provenance::ExperimentalMean,
            other => return Err(format!("unknown provenance `{other}`")),
        })
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Forces are stored as magnitudes; positive means attraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    AttractivePositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceCurve<T> {
    points: Vec<(T, T)>,
    pub provenance: Provenance,
    pub geometry: Option<Geometry<T>>,
    pub sign_convention: SignConvention,
}

impl<T: Scalar> ForceCurve<T> {
    /// Builds a curve; separations must be positive and strictly increasing.
    pub fn new(
        points: Vec<(T, T)>,
        provenance: Provenance,
        geometry: Option<Geometry<T>>,
    ) -> Result<Self, LifshitzError> {
        check_grid(points.iter().map(|p| p.0))?;
        if let Some(&(z, f)) = points.iter().find(|p| !p.1.is_finite()) {
            return Err(LifshitzError::Domain {
                what: "force",
                value: if f.is_nan() { f64::NAN } else { z.as_f64() },
            });
        }
        Ok(Self {
            points,
            provenance,
            geometry,
            sign_convention: SignConvention::AttractivePositive,
        })
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

    pub fn separations(&self) -> Vec<T> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn forces(&self) -> Vec<T> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Errors at the first pair where |F| fails to decrease.
    pub fn check_monotone(&self) -> Result<(), LifshitzError> {
        for w in self.points.windows(2) {
            if !(w[1].1.abs() < w[0].1.abs()) {
                return Err(LifshitzError::NonMonotone {
                    z0: w[0].0.as_f64(),
                    z1: w[1].0.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// `z_nm,F_pN,provenance`
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("z_nm,F_pN,provenance\n");
        for &(z, f) in &self.points {
            let _ = writeln!(
                s,
                "{},{},{}",
                format_scaled(z.as_f64(), 9),
                format_scaled(f.as_f64(), 12),
                self.provenance
            );
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self, LifshitzError> {
        let mut points = Vec::new();
        let mut provenance = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') || line.starts_with("z_nm") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(LifshitzError::Parse {
                    line: lineno,
                    msg: "expected `z_nm,F_pN,provenance`".into(),
                });
            }
            let num = |s: &str, shift| {
                parse_scaled(s, shift).map_err(|e| LifshitzError::Parse {
                    line: lineno,
                    msg: format!("`{s}`: {e}"),
                })
            };
            let p: Provenance = cols[2].parse().map_err(|msg| LifshitzError::Parse {
                line: lineno,
                msg,
            })?;
            match provenance {
                None => provenance = Some(p),
                Some(q) if q != p => {
                    return Err(LifshitzError::Parse {
                        line: lineno,
                        msg: format!("mixed provenance `{q}` and `{p}`"),
                    })
                }
                _ => {}
            }
            points.push((T::lit(num(cols[0], -9)?), T::lit(num(cols[1], -12)?)));
        }
        let provenance = provenance.ok_or(LifshitzError::Parse {
            line: 1,
            msg: "no data rows".into(),
        })?;
        Self::new(points, provenance, None)
    }
}

fn check_grid<T: Scalar>(zs: impl Iterator<Item = T>) -> Result<(), LifshitzError> {
    let mut prev: Option<T> = None;
    for z in zs {
        if !(z > T::zero() && z.is_finite()) {
            return Err(LifshitzError::Domain {
                what: "separation",
                value: z.as_f64(),
            });
        }
        if let Some(p) = prev {
            if !(z > p) {
                return Err(LifshitzError::Domain {
                    what: "separation grid (not strictly increasing) at",
                    value: z.as_f64(),
                });
            }
        }
        prev = Some(z);
    }
    Ok(())
}

/// Uniform grid `z_min, z_min + step, …` with `round((z_max − z_min)/step) + 1` points.
pub fn separation_grid<T: Scalar>(z_min: T, z_max: T, step: T) -> Result<Vec<T>, LifshitzError> {
    if !(z_min > T::zero() && z_max >= z_min && step > T::zero()) {
        return Err(LifshitzError::Domain {
            what: "grid bounds",
            value: z_min.as_f64(),
        });
    }
    let n = ((z_max - z_min) / step).round().to_usize().unwrap_or(0) + 1;
    Ok((0..n).map(|i| z_min + T::lit(i as f64) * step).collect())
}

/// Surface model used by [`force_curve`].
#[derive(Debug, Clone, Copy)]
pub enum Surfaces<'a, T> {
    Smooth,
    Rough {
        sphere: &'a RoughnessProfile<T>,
        plate: &'a RoughnessProfile<T>,
    },
}

/// Evaluates the force at every grid point in parallel.
pub fn force_curve<T, A, B>(
    grid: &[T],
    geom: &Geometry<T>,
    mat1: &A,
    mat2: &B,
    surfaces: Surfaces<'_, T>,
    spec: &QuadratureSpec<T>,
) -> Result<ForceCurve<T>, LifshitzError>
where
    T: Scalar,
    A: Permittivity<T> + ?Sized,
    B: Permittivity<T> + ?Sized,
{
    check_grid(grid.iter().copied())?;
    let forces: Vec<T> = grid
        .par_iter()
        .map(|&z| match surfaces {
            Surfaces::Smooth => lifshitz_force(z, geom, mat1, mat2, spec),
            Surfaces::Rough { sphere, plate } => {
                roughness_corrected_force(z, geom, mat1, mat2, sphere, plate, spec)
            }
        })
        .collect::<Result<_, _>>()?;
    let provenance = match surfaces {
        Surfaces::Smooth => Provenance::Smooth,
        Surfaces::Rough { .. } => Provenance::RoughnessCorrected,
    };
    let curve = ForceCurve::new(
        grid.iter().copied().zip(forces).collect(),
        provenance,
        Some(*geom),
    )?;
    curve.check_monotone()?;
    Ok(curve)
}

/// Lifshitz force between two bodies with ε capped at 10¹².
pub fn ideal_metal_curve<T: Scalar>(
    grid: &[T],
    geom: &Geometry<T>,
    spec: &QuadratureSpec<T>,
) -> Result<ForceCurve<T>, LifshitzError> {
    let metal = ConstantPermittivity::ideal_metal();
    let mut curve = force_curve(grid, geom, &metal, &metal, Surfaces::Smooth, spec)?;
    curve.provenance = Provenance::IdealMetal;
    Ok(curve)
}

/// Smooth force tabulated on log-spaced separations and interpolated in
/// (ln z, ln F) with four-point Lagrange polynomials.
#[derive(Debug, Clone)]
pub struct ForceInterpolant<T> {
    ln_z0: T,
    step: T,
    ln_f: Vec<T>,
}

impl<T: Scalar> ForceInterpolant<T> {
    /// Tabulates the smooth force over `[z_lo, z_hi]` with `per_decade` nodes.
    pub fn new<A, B>(
        z_lo: T,
        z_hi: T,
        per_decade: usize,
        geom: &Geometry<T>,
        mat1: &A,
        mat2: &B,
        spec: &QuadratureSpec<T>,
    ) -> Result<Self, LifshitzError>
    where
        A: Permittivity<T> + ?Sized,
        B: Permittivity<T> + ?Sized,
    {
        if !(z_lo > T::zero() && z_hi > z_lo && z_hi.is_finite()) || per_decade < 8 {
            return Err(LifshitzError::Domain {
                what: "interpolation range",
                value: z_lo.as_f64(),
            });
        }
        let step = T::LN_10() / T::lit(per_decade as f64);
        let ln_z0 = z_lo.ln() - step;
        let n = ((z_hi.ln() - ln_z0) / step).ceil().to_usize().unwrap_or(0) + 2;
        let ln_f = (0..n)
            .into_par_iter()
            .map(|i| {
                let z = (ln_z0 + T::lit(i as f64) * step).exp();
                let f = lifshitz_force(z, geom, mat1, mat2, spec)?;
                if f > T::zero() {
                    Ok(f.ln())
                } else {
                    Err(LifshitzError::Domain {
                        what: "interpolated force (must be positive)",
                        value: f.as_f64(),
                    })
                }
            })
            .collect::<Result<Vec<T>, _>>()?;
        Ok(Self { ln_z0, step, ln_f })
    }

    /// Separation range covered by the interpolation stencil.
    pub fn range(&self) -> (T, T) {
        let n = self.ln_f.len();
        (
            (self.ln_z0 + self.step).exp(),
            (self.ln_z0 + T::lit((n - 2) as f64) * self.step).exp(),
        )
    }

    pub fn force(&self, z: T) -> Result<T, LifshitzError> {
        let (lo, hi) = self.range();
        if !(z >= lo * T::lit(1.0 - 1e-12) && z <= hi * T::lit(1.0 + 1e-12)) {
            return Err(LifshitzError::Domain {
                what: "separation outside interpolation range",
                value: z.as_f64(),
            });
        }
        let x = (z.ln() - self.ln_z0) / self.step;
        let i = x.floor().to_usize().unwrap_or(1).clamp(1, self.ln_f.len() - 3);
        let u = x - T::lit(i as f64);
        let (one, two, six) = (T::one(), T::lit(2.0), T::lit(6.0));
        let w = [
            -u * (u - one) * (u - two) / six,
            (u + one) * (u - one) * (u - two) / two,
            -(u + one) * u * (u - two) / two,
            (u + one) * u * (u - one) / six,
        ];
        let ln_f = (0..4).map(|k| w[k] * self.ln_f[i - 1 + k]).sum::<T>();
        Ok(ln_f.exp())
    }
}

/// Like [`force_curve`], but every force comes from a [`ForceInterpolant`]
/// spanning all effective separations.
pub fn force_curve_interpolated<T, A, B>(
    grid: &[T],
    geom: &Geometry<T>,
    mat1: &A,
    mat2: &B,
    surfaces: Surfaces<'_, T>,
    spec: &QuadratureSpec<T>,
    per_decade: usize,
) -> Result<ForceCurve<T>, LifshitzError>
where
    T: Scalar,
    A: Permittivity<T> + ?Sized,
    B: Permittivity<T> + ?Sized,
{
    check_grid(grid.iter().copied())?;
    let (Some(&first), Some(&last)) = (grid.first(), grid.last()) else {
        return Err(LifshitzError::Domain {
            what: "grid length",
            value: 0.0,
        });
    };
    let offsets: Vec<(T, T)> = match surfaces {
        Surfaces::Smooth => vec![(T::one(), T::zero())],
        Surfaces::Rough { sphere, plate } => {
            let (h1, h2) = (sphere.zero_level(), plate.zero_level());
            let mut v = Vec::new();
            for &(v1, hk) in sphere.entries() {
                for &(v2, hj) in plate.entries() {
                    v.push((v1 * v2, (h1 - hk) + (h2 - hj)));
                }
            }
            v
        }
    };
    let lo = offsets.iter().fold(T::infinity(), |m, o| m.min(o.1));
    let hi = offsets.iter().fold(T::neg_infinity(), |m, o| m.max(o.1));
    if !(first + lo > T::zero()) {
        return Err(LifshitzError::RoughnessExceedsSeparation {
            z: first.as_f64(),
            z_eff: (first + lo).as_f64(),
        });
    }
    let z_lo = first + lo;
    let z_hi = (last + hi).max(z_lo * T::lit(1.01));
    let table = ForceInterpolant::new(z_lo, z_hi, per_decade, geom, mat1, mat2, spec)?;
    let points = grid
        .iter()
        .map(|&z| {
            let mut f = T::zero();
            for &(w, dz) in &offsets {
                f = f + w * table.force(z + dz)?;
            }
            Ok((z, f))
        })
        .collect::<Result<Vec<_>, LifshitzError>>()?;
    let provenance = match surfaces {
        Surfaces::Smooth => Provenance::Smooth,
        Surfaces::Rough { .. } => Provenance::RoughnessCorrected,
    };
    let curve = ForceCurve::new(points, provenance, Some(*geom))?;
    curve.check_monotone()?;
    Ok(curve)
}
