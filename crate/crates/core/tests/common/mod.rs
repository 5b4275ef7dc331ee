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


//! Oracles shared by the integration test targets.

/// 95% half-width of a sum of uniforms by repeated moving-average
/// convolution of a sampled density.
pub fn convolution_quantile(half_widths: &[f64], confidence: f64) -> f64 {
    let total: f64 = half_widths.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h = total / 500_000.0;
    let n = 500_002;
    let len = 2 * n + 1;
    let mut dens = vec![0.0f64; len];
    let mut placed = false;
    for &a in half_widths.iter().filter(|a| **a > 0.0) {
        let m = (a / h).round() as usize;
        if !placed {
            for (i, d) in dens.iter_mut().enumerate() {
                if (i as isize - n as isize).unsigned_abs() <= m {
                    *d = 1.0;
                }
            }
            placed = true;
            continue;
        }
        let mut prefix = vec![0.0f64; len + 1];
        for i in 0..len {
            prefix[i + 1] = prefix[i] + dens[i];
        }
        for (i, d) in dens.iter_mut().enumerate() {
            let lo = i.saturating_sub(m);
            let hi = (i + m + 1).min(len);
            *d = prefix[hi] - prefix[lo];
        }
    }
    let mass: f64 = dens.iter().sum();
    let target = 0.5 * (1.0 - confidence) * mass;
    let mut tail = 0.0;
    for k in (n..len).rev() {
        tail += dens[k];
        if tail >= target {
            return (k - n) as f64 * h;
        }
    }
    0.0
}
