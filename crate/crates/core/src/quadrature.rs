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

//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7/15) and a
//! fixed Gauss–Legendre rule for smooth panels.
//!
//! Each panel is integrated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss result gives the panel error estimate. The panel with the
//! largest error is bisected until the summed error meets the tolerance.
//! Panels may not be split beyond `max_depth` bisections of the original
//! interval; hitting that limit is reported as non-convergence together
//! with the best estimate reached.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge at panel depth {depth}: estimate {estimate:e}, error bound {error:e}"
    )]
    NotConverged { estimate: f64, error: f64, depth: usize },
    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },
    #[error("invalid quadrature interval [{a:e}, {b:e}]")]
    BadInterval { a: f64, b: f64 },
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
    pub max_depth: usize,
}

impl<T: Scalar> Tolerance<T> {
    pub fn relative(rel: T, max_depth: usize) -> Self {
        Self {
            rel,
            abs: T::zero(),
            max_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre8<T: Scalar, F: FnMut(T) -> T>(a: T, b: T, mut f: F) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut acc = T::zero();
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        let dx = half * T::lit(*x);
        acc = acc + T::lit(*w) * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    depth: usize,
}

fn kronrod15<T, E, F>(a: T, b: T, f: &mut F) -> Result<(T, T), E>
where
    T: Scalar,
    E: From<QuadratureError>,
    F: FnMut(T) -> Result<T, E>,
{
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut eval = |x: T| -> Result<T, E> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x: x.as_f64() }.into())
        }
    };
    let fc = eval(mid)?;
    let mut kronrod = T::lit(WGK[7]) * fc;
    let mut gauss = T::lit(WG[3]) * fc;
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = eval(mid - dx)? + eval(mid + dx)?;
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    let floor = T::epsilon() * T::lit(50.0) * value.abs();
    if error < floor {
        error = floor;
    }
    Ok((value, error))
}

/// Integrates `f` over `[a, b]` to `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<T, E, F>(a: T, b: T, tol: Tolerance<T>, mut f: F) -> Result<Estimate<T>, E>
where
    T: Scalar,
    E: From<QuadratureError>,
    F: FnMut(T) -> Result<T, E>,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadratureError::BadInterval {
            a: a.as_f64(),
            b: b.as_f64(),
        }
        .into());
    }
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    let (value, error) = kronrod15(a, b, &mut f)?;
    let mut panels = vec![Panel {
        a,
        b,
        value,
        error,
        depth: 0,
    }];
    let mut evaluations = 15;
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let err: T = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
                evaluations,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels.swap_remove(worst);
        if p.depth >= tol.max_depth {
            return Err(QuadratureError::NotConverged {
                estimate: total.as_f64(),
                error: err.as_f64(),
                depth: p.depth,
            }
            .into());
        }
        let m = (p.a + p.b) * T::lit(0.5);
        let (lv, le) = kronrod15(p.a, m, &mut f)?;
        let (rv, re) = kronrod15(m, p.b, &mut f)?;
        evaluations += 30;
        panels.push(Panel {
            a: p.a,
            b: m,
            value: lv,
            error: le,
            depth: p.depth + 1,
        });
        panels.push(Panel {
            a: m,
            b: p.b,
            value: rv,
            error: re,
            depth: p.depth + 1,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ok<T>(x: T) -> Result<T, QuadratureError> {
        Ok(x)
    }

    #[test]
    fn polynomial_exact() {
        let est = integrate(0.0, 2.0, Tolerance::relative(1e-12, 10), |x: f64| {
            ok(3.0 * x * x + 1.0)
        })
        .unwrap();
        assert_relative_eq!(est.value, 10.0, max_relative = 1e-14);
        assert_eq!(est.evaluations, 15);
    }

    #[test]
    fn peaked_integrand_adapts() {
        // ∫ 1/(x²+a²) over [-1, 1] = 2 atan(1/a)/a
        let a = 1e-3;
        let est = integrate(-1.0, 1.0, Tolerance::relative(1e-10, 40), |x: f64| {
            ok(1.0 / (x * x + a * a))
        })
        .unwrap();
        assert_relative_eq!(est.value, 2.0 * (1.0 / a).atan() / a, max_relative = 1e-9);
        assert!(est.evaluations > 15);
    }

    #[test]
    fn depth_limit_reports_estimate() {
        let err = integrate(0.0, 1.0, Tolerance::relative(1e-12, 2), |x: f64| {
            ok(x.sqrt().sin() / (x + 1e-9).sqrt())
        })
        .unwrap_err();
        match err {
            QuadratureError::NotConverged { estimate, error, .. } => {
                assert!(estimate.is_finite() && error > 0.0)
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn non_finite_is_an_error() {
        let err = integrate(-1.0, 1.0, Tolerance::relative(1e-8, 10), |x: f64| ok(1.0 / x));
        assert!(err.is_err());
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let est = integrate(0.0, 5.0, Tolerance::relative(1e-8, 10), |_x: f64| ok(0.0)).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn single_precision() {
        let est = integrate(0.0f32, 1.0, Tolerance::relative(1e-5, 20), |x: f32| ok(x.exp())).unwrap();
        assert_relative_eq!(est.value, 1f32.exp() - 1.0, max_relative = 1e-5);
    }

    #[test]
    fn gauss_legendre_degree_15() {
        let v = gauss_legendre8(0.0, 1.0, |x: f64| x.powi(15));
        assert_relative_eq!(v, 1.0 / 16.0, max_relative = 1e-14);
    }
}
