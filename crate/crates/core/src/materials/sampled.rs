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

use super::{MaterialError, Permittivity};
use crate::scalar::Scalar;

/// Pre-sampled ε(iξ) with local cubic interpolation in ln ξ.
///
/// Dispersion-integral evaluation costs one pass over the optical table;
/// force integrals need ε at hundreds of frequencies per separation, so
/// they run against this lookup instead. Outside the sampled band the
/// wrapped model is evaluated directly.
#[derive(Debug, Clone)]
pub struct SampledPermittivity<T, M> {
    inner: M,
    ln_start: T,
    step: T,
    lo: T,
    hi: T,
    /// ln(ε − 1) when every sample exceeds 1, otherwise ε − 1.
    values: Vec<T>,
    logarithmic: bool,
}

impl<T: Scalar, M: Permittivity<T>> SampledPermittivity<T, M> {
    pub fn new(inner: M, xi_min: T, xi_max: T, per_decade: usize) -> Result<Self, MaterialError> {
        super::check_xi(xi_min)?;
        if !(xi_max > xi_min) || per_decade < 4 {
            return Err(MaterialError::Domain {
                what: "sampling band width",
                value: (xi_max - xi_min).as_f64(),
            });
        }
        let decades = (xi_max / xi_min).log10();
        let n = (decades * T::from_usize(per_decade).unwrap())
            .ceil()
            .to_usize()
            .unwrap()
            .max(4)
            + 1;
        let xis = super::log_space(xi_min, xi_max, n);
        let excess = xis
            .iter()
            .map(|&x| inner.eps_imag_axis(x).map(|e| e - T::one()))
            .collect::<Result<Vec<T>, _>>()?;
        let logarithmic = excess.iter().all(|&e| e > T::zero());
        let values = if logarithmic {
            excess.iter().map(|e| e.ln()).collect()
        } else {
            excess
        };
        let ln_start = xi_min.ln();
        Ok(Self {
            inner,
            ln_start,
            step: (xi_max.ln() - ln_start) / T::from_usize(n - 1).unwrap(),
            lo: xi_min,
            hi: xi_max,
            values,
            logarithmic,
        })
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<T: Scalar, M: Permittivity<T>> Permittivity<T> for SampledPermittivity<T, M> {
    fn eps_imag_axis(&self, xi: T) -> Result<T, MaterialError> {
        if !(xi >= self.lo && xi <= self.hi) {
            return self.inner.eps_imag_axis(xi);
        }
        let p = (xi.ln() - self.ln_start) / self.step;
        let n = self.values.len();
        let i = p.floor().to_usize().unwrap_or(0).clamp(1, n - 3);
        let t = p - T::from_usize(i).unwrap();
        let y = &self.values[i - 1..i + 3];
        // Lagrange cubic through nodes at -1, 0, 1, 2
        let one = T::one();
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        let v = -y[0] * t * (t - one) * (t - two) / six
            + y[1] * (t + one) * (t - one) * (t - two) / two
            - y[2] * (t + one) * t * (t - two) / two
            + y[3] * (t + one) * t * (t - one) / six;
        Ok(one + if self.logarithmic { v.exp() } else { v })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{log_space, reference, ConstantPermittivity};
    use approx::assert_relative_eq;

    #[test]
    fn matches_direct_evaluation() {
        for model in [reference::gold::<f64>(), reference::silicon_default()] {
            let s = SampledPermittivity::new(&model, 1e9, 1e19, 64).unwrap();
            for xi in log_space(1.3e9, 0.9e19, 157) {
                let a = s.eps_imag_axis(xi).unwrap();
                let b = model.eps_imag_axis(xi).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-6);
            }
            // outside the band falls through to the model
            assert_eq!(s.eps_imag_axis(1e8).unwrap(), model.eps_imag_axis(1e8).unwrap());
        }
    }

    #[test]
    fn vacuum_samples_linearly() {
        let s = SampledPermittivity::new(ConstantPermittivity::<f64>::vacuum(), 1e10, 1e12, 8).unwrap();
        assert_eq!(s.eps_imag_axis(3.3e11).unwrap(), 1.0);
    }
}
