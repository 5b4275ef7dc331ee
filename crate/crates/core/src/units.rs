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

//! Exact decimal rescaling for text I/O.
//!
//! Values are written as the shortest round-trip decimal of the SI value with
//! the decimal point moved, and read back by moving it again before parsing,
//! so `parse_scaled(&format_scaled(x, k), -k) == x` for every finite `x`.

/// `x · 10^shift` as plain decimal text, or scientific outside 1e-7..1e16.
pub fn format_scaled(x: f64, shift: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:?}");
    }
    let sci = format!("{x:e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let e = exp + shift;
    if !(-7..16).contains(&e) {
        return format!("{sign}{mant}e{e}");
    }
    let n = digits.len() as i32;
    let p = e + 1;
    let body = if p <= 0 {
        format!("0.{}{digits}", "0".repeat((-p) as usize))
    } else if p >= n {
        format!("{digits}{}", "0".repeat((p - n) as usize))
    } else {
        format!("{}.{}", &digits[..p as usize], &digits[p as usize..])
    };
    format!("{sign}{body}")
}

/// Parses decimal text and multiplies it by `10^shift` in one rounding.
pub fn parse_scaled(s: &str, shift: i32) -> Result<f64, std::num::ParseFloatError> {
    let s = s.trim();
    s.parse::<f64>()?;
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().unwrap_or(0)),
        None => (s, 0),
    };
    format!("{mant}e{}", exp + shift).parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting() {
        assert_eq!(format_scaled(62.33e-9, 9), "62.33");
        assert_eq!(format_scaled(-1.5e-12, 12), "-1.5");
        assert_eq!(format_scaled(2e-9, 9), "2");
        assert_eq!(format_scaled(3e-13, 12), "0.3");
        assert_eq!(format_scaled(1e-30, 12), "1e-18");
        assert_eq!(format_scaled(0.0, 9), "0.0");
        assert_eq!(parse_scaled("62.33", -9).unwrap(), 62.33e-9);
        assert_eq!(parse_scaled("1.5E3", -12).unwrap(), 1.5e-9);
        assert!(parse_scaled("x", -9).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(x in proptest::num::f64::NORMAL, shift in -20i32..20) {
            prop_assert_eq!(parse_scaled(&format_scaled(x, shift), -shift).unwrap(), x);
        }
    }
}
