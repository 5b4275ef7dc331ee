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

//! Fraction-weighted roughness distributions and the averaged force.

use super::{lifshitz_force, Geometry, LifshitzError, QuadratureSpec};
use crate::constants::NM;
use crate::materials::Permittivity;
use crate::scalar::Scalar;
use std::fmt::Write as _;
use std::str::FromStr;

/// Which body a roughness profile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Body {
    Sphere,
    Plate,
}

impl FromStr for Body {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sphere" => Ok(Body::Sphere),
            "plate" => Ok(Body::Plate),
            other => Err(format!("unknown body `{other}`")),
        }
    }
}

impl std::fmt::Display for Body {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Body::Sphere => "sphere",
            Body::Plate => "plate",
        })
    }
}

/// Surface-area fractions `v_k` with roughness heights `h_k` (m).
#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessProfile<T> {
    entries: Vec<(T, T)>,
    zero_level: T,
}

impl<T: Scalar> RoughnessProfile<T> {
    pub fn new(entries: Vec<(T, T)>) -> Result<Self, LifshitzError> {
        if entries.is_empty() {
            return Err(LifshitzError::Roughness("no entries".into()));
        }
        let mut sum = 0.0;
        for (i, &(v, h)) in entries.iter().enumerate() {
            if !(v > T::zero() && v.is_finite()) {
                return Err(LifshitzError::Roughness(format!(
                    "entry {i}: fraction {v} must be positive"
                )));
            }
            if !(h >= T::zero() && h.is_finite()) {
                return Err(LifshitzError::Roughness(format!(
                    "entry {i}: height {h:e} must be non-negative"
                )));
            }
            sum += v.as_f64();
        }
        let tol = 1e-12_f64.max(4.0 * entries.len() as f64 * T::epsilon().as_f64());
        if (sum - 1.0).abs() > tol {
            return Err(LifshitzError::Roughness(format!(
                "fractions sum to {sum}, not 1"
            )));
        }
        let zero_level = Self::weighted_mean(&entries);
        Ok(Self {
            entries,
            zero_level,
        })
    }

    /// A flat surface at height `h`.
    pub fn flat(h: T) -> Self {
        Self::new(vec![(T::one(), h)]).expect("single unit fraction")
    }

    fn weighted_mean(entries: &[(T, T)]) -> T {
        entries.iter().map(|&(v, h)| v * h).sum()
    }

    pub fn entries(&self) -> &[(T, T)] {
        &self.entries
    }

    /// H₀ = Σ v_k h_k.
    pub fn zero_level(&self) -> T {
        self.zero_level
    }

    /// Replaces the entries, revalidating and recomputing H₀.
    pub fn set_entries(&mut self, entries: Vec<(T, T)>) -> Result<(), LifshitzError> {
        *self = Self::new(entries)?;
        Ok(())
    }

    /// Reconstructed gold-coated sphere profile: heights 11–25 nm, H₀ = 15.35 nm.
    pub fn reference_sphere() -> Self {
        Self::from_nm(&[
            (0.105, 11.0),
            (0.195, 13.0),
            (0.30, 15.0),
            (0.25, 17.0),
            (0.14, 19.0),
            (0.01, 25.0),
        ])
    }

    /// Reconstructed silicon plate profile: heights 0.3–0.6 nm, H₀ = 0.545 nm.
    pub fn reference_plate() -> Self {
        Self::from_nm(&[(0.06, 0.3), (0.15, 0.45), (0.29, 0.55), (0.5, 0.6)])
    }

    fn from_nm(rows: &[(f64, f64)]) -> Self {
        Self::new(
            rows.iter()
                .map(|&(v, h)| (T::lit(v), T::lit(h * NM)))
                .collect(),
        )
        .expect("reference profile is valid")
    }

    /// Parses `fraction,height_nm` lines under a `# body: sphere|plate` header.
    pub fn from_csv_str(text: &str) -> Result<(Body, Self), LifshitzError> {
        let mut body = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(b) = comment.trim().strip_prefix("body:") {
                    body = Some(b.parse::<Body>().map_err(|msg| LifshitzError::Parse {
                        line: lineno,
                        msg,
                    })?);
                }
                continue;
            }
            if line.starts_with("fraction") {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (Some(v), Some(h), None) = (it.next(), it.next(), it.next()) else {
                return Err(LifshitzError::Parse {
                    line: lineno,
                    msg: "expected `fraction,height_nm`".into(),
                });
            };
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| LifshitzError::Parse {
                    line: lineno,
                    msg: format!("`{s}`: {e}"),
                })
            };
            entries.push((T::lit(parse(v)?), T::lit(parse(h)? * NM)));
        }
        let body = body.ok_or(LifshitzError::Parse {
            line: 1,
            msg: "missing `# body: sphere|plate` header".into(),
        })?;
        Ok((body, Self::new(entries)?))
    }

    pub fn to_csv_string(&self, body: Body) -> String {
        let mut s = format!("# body: {body}\nfraction,height_nm\n");
        for &(v, h) in &self.entries {
            let _ = writeln!(s, "{},{}", v.as_f64(), h.as_f64() / NM);
        }
        s
    }
}

/// Σ_{k,j} v_k v_j F(z + (H₀⁽¹⁾ − h_k) + (H₀⁽²⁾ − h_j)).
pub fn roughness_corrected_force<T, A, B>(
    z: T,
    geom: &Geometry<T>,
    mat1: &A,
    mat2: &B,
    rough1: &RoughnessProfile<T>,
    rough2: &RoughnessProfile<T>,
    spec: &QuadratureSpec<T>,
) -> Result<T, LifshitzError>
where
    T: Scalar,
    A: Permittivity<T> + ?Sized,
    B: Permittivity<T> + ?Sized,
{
    let h1 = rough1.zero_level();
    let h2 = rough2.zero_level();
    let mut total = T::zero();
    for &(v1, hk) in rough1.entries() {
        for &(v2, hj) in rough2.entries() {
            let z_eff = z + ((h1 - hk) + (h2 - hj));
            if !(z_eff > T::zero()) {
                return Err(LifshitzError::RoughnessExceedsSeparation {
                    z: z.as_f64(),
                    z_eff: z_eff.as_f64(),
                });
            }
            total = total + v1 * v2 * lifshitz_force(z_eff, geom, mat1, mat2, spec)?;
        }
    }
    Ok(total)
}
