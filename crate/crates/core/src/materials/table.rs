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

use super::{DrudeParams, MaterialError};
use crate::constants::HBAR_EV_S;
use crate::scalar::Scalar;
use std::path::Path;

/// Tabulated Im ε(ω) on a strictly increasing grid of positive angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalDataTable<T> {
    label: String,
    omega: Vec<T>,
    eps_im: Vec<T>,
}

impl<T: Scalar> OpticalDataTable<T> {
    /// Builds a table from `(omega, eps_im)` rows.
    pub fn new(label: impl Into<String>, rows: Vec<(T, T)>) -> Result<Self, MaterialError> {
        let (omega, eps_im): (Vec<T>, Vec<T>) = rows.into_iter().unzip();
        let table = Self {
            label: label.into(),
            omega,
            eps_im,
        };
        table.validate()?;
        Ok(table)
    }

    /// Builds a table from refractive-index rows `(omega, n, k)`, Im ε = 2nk.
    pub fn from_nk(label: impl Into<String>, rows: Vec<(T, T, T)>) -> Result<Self, MaterialError> {
        Self::new(
            label,
            rows.into_iter()
                .map(|(w, n, k)| (w, T::lit(2.0) * n * k))
                .collect(),
        )
    }

    fn validate(&self) -> Result<(), MaterialError> {
        if self.omega.len() < 2 {
            return Err(MaterialError::InvalidTable(format!(
                "{}: need at least 2 rows, got {}",
                self.label,
                self.omega.len()
            )));
        }
        for (i, (&w, &e)) in self.omega.iter().zip(&self.eps_im).enumerate() {
            if !(w > T::zero() && w.is_finite()) {
                return Err(MaterialError::InvalidTable(format!(
                    "{}: row {i}: frequency must be positive, got {w:e}",
                    self.label
                )));
            }
            if !(e >= T::zero() && e.is_finite()) {
                return Err(MaterialError::InvalidTable(format!(
                    "{}: row {i}: Im ε must be finite and ≥ 0, got {e:e}",
                    self.label
                )));
            }
            if i > 0 && w <= self.omega[i - 1] {
                return Err(MaterialError::InvalidTable(format!(
                    "{}: row {i}: frequencies must be strictly increasing",
                    self.label
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn eps_im(&self) -> &[T] {
        &self.eps_im
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn span(&self) -> (T, T) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn rows(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.omega.iter().copied().zip(self.eps_im.iter().copied())
    }

    /// Parses the optical-data CSV layout: a header `omega_rad_s,n,k` or
    /// `omega_rad_s,eps_im` (first column may also be named `energy_ev`),
    /// `#` comment lines, one row per frequency.
    pub fn from_csv_str(label: &str, text: &str, unit: FreqUnit) -> Result<Self, MaterialError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(MaterialError::Parse {
            line: 0,
            msg: "empty optical data file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let nk = match cols.as_slice() {
            [_, "n", "k"] => true,
            [_, "eps_im"] => false,
            _ => {
                return Err(MaterialError::Parse {
                    line: hline,
                    msg: format!(
                        "expected header `omega_rad_s,n,k` or `omega_rad_s,eps_im`, got `{header}`"
                    ),
                })
            }
        };
        let mut rows = Vec::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(MaterialError::Parse {
                    line,
                    msg: format!("expected {} fields, got {}", cols.len(), fields.len()),
                });
            }
            let mut vals = Vec::with_capacity(fields.len());
            for f in &fields {
                let v: f64 = f.parse().map_err(|_| MaterialError::Parse {
                    line,
                    msg: format!("not a number: `{f}`"),
                })?;
                vals.push(T::lit(v));
            }
            let omega = unit.to_rad_s(vals[0]);
            let eps_im = if nk {
                T::lit(2.0) * vals[1] * vals[2]
            } else {
                vals[1]
            };
            rows.push((omega, eps_im));
        }
        Self::new(label, rows)
    }

    /// Serializes as `omega_rad_s,eps_im` CSV.
    pub fn to_csv_string(&self) -> String {
        let mut s = format!("# {}\nomega_rad_s,eps_im\n", self.label);
        for (w, e) in self.rows() {
            s.push_str(&format!("{:.10e},{:.10e}\n", w.as_f64(), e.as_f64()));
        }
        s
    }
}

/// Unit of the first column of an optical data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreqUnit {
    #[default]
    RadPerS,
    /// Photon energy in eV, converted with ω = E/ħ.
    ElectronVolt,
}

impl FreqUnit {
    pub fn to_rad_s<T: Scalar>(self, v: T) -> T {
        match self {
            FreqUnit::RadPerS => v,
            FreqUnit::ElectronVolt => v / T::lit(HBAR_EV_S),
        }
    }
}

impl std::str::FromStr for FreqUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rad_s" => Ok(FreqUnit::RadPerS),
            "eV" | "ev" => Ok(FreqUnit::ElectronVolt),
            _ => Err(format!("unknown frequency unit `{s}` (expected rad_s or eV)")),
        }
    }
}

pub fn load_optical_csv<T: Scalar>(
    path: &Path,
    unit: FreqUnit,
) -> Result<OpticalDataTable<T>, MaterialError> {
    let text = std::fs::read_to_string(path).map_err(|e| MaterialError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    OpticalDataTable::from_csv_str(&label, &text, unit).map_err(|e| match e {
        MaterialError::Parse { line, msg } => MaterialError::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

/// Adds the Drude Im ε to every row; the frequency grid is unchanged.
pub fn augment_table_with_drude<T: Scalar>(
    table: &OpticalDataTable<T>,
    params: &DrudeParams<T>,
) -> OpticalDataTable<T> {
    OpticalDataTable {
        label: format!("{} + Drude", table.label),
        omega: table.omega.clone(),
        eps_im: table
            .rows()
            .map(|(w, e)| e + params.eps_im_real_axis(w))
            .collect(),
    }
}
