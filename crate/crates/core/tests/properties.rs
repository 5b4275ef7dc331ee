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


mod common;

use casimir_core::compare::{force_ratio, Trend};
use casimir_core::electrostatics::{capacitance_gradient, DEFAULT_MAX_TERMS};
use casimir_core::lifshitz::{
    lifshitz_force, roughness_corrected_force, ForceCurve, Geometry, Provenance, QuadratureSpec,
    RoughnessProfile,
};
use casimir_core::materials::{
    kramers_kronig_imag_axis, log_space, reference, ConstantPermittivity, DielectricModel,
    DrudeParams, Extensions, OpticalDataTable, Permittivity,
};
use casimir_core::pipeline::{ensemble_to_csv, parse_ensemble, synthesize_from_curve};
use casimir_core::stats::{
    compose_uniform_systematics, pooled_variance_of_mean, student_quantile, MeasurementEnsemble,
};
use proptest::prelude::*;

const NM: f64 = 1e-9;

fn drude(wp: f64, g: f64) -> DielectricModel<f64> {
    DielectricModel::drude(DrudeParams::new(wp, g).unwrap())
}

fn eps_is_monotone(m: &dyn Permittivity<f64>) {
    let mut prev = f64::INFINITY;
    for xi in log_space(1e11, 1e19, 100) {
        let e = m.eps_imag_axis(xi).unwrap();
        assert!(e >= 1.0 && e <= prev, "ε(i{xi:e}) = {e} after {prev}");
        prev = e;
    }
}

#[test]
fn reference_materials_are_monotone() {
    eps_is_monotone(&reference::gold::<f64>());
    eps_is_monotone(&reference::silicon_default::<f64>());
    eps_is_monotone(&reference::silicon_high_resistivity::<f64>());
}

#[test]
fn student_quantile_at_64_dof() {
    let t = student_quantile(64.0, 0.95).unwrap();
    assert!((t / 2.0 - 1.0).abs() < 5e-3, "{t}");
}

#[test]
fn ideal_metal_limit_is_approached_monotonically() {
    let geom = Geometry::new(101.3e-6, 0.0).unwrap();
    let q = QuadratureSpec::default();
    for z in [62.33 * NM, 200.0 * NM, 600.0 * NM] {
        let exact = std::f64::consts::PI.powi(3) * 1.054_571_817e-34 * 299_792_458.0 * 101.3e-6
            / (360.0 * z.powi(3));
        let gaps: Vec<f64> = [1e6, 1e8, 1e10, 1e12]
            .iter()
            .map(|&cap| {
                let m = ConstantPermittivity(cap);
                exact - lifshitz_force(z, &geom, &m, &m, &q).unwrap()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[3] >= 0.0 && gaps[3] < 1e-4 * exact);
    }
}

#[test]
fn halving_tolerance_stays_within_previous_tolerance() {
    let geom = Geometry::reference();
    let (a, b) = (reference::gold::<f64>(), reference::silicon_default::<f64>());
    let coarse = QuadratureSpec { rel_tol: 1e-5, ..QuadratureSpec::default() };
    let fine = QuadratureSpec { rel_tol: 5e-6, ..coarse };
    for z in log_space(62.33 * NM, 600.0 * NM, 10) {
        let f1 = lifshitz_force(z, &geom, &a, &b, &coarse).unwrap();
        let f2 = lifshitz_force(z, &geom, &a, &b, &fine).unwrap();
        assert!((f1 / f2 - 1.0).abs() < 1e-5, "z = {z:e}");
    }
}

#[test]
fn synthesis_pooled_estimator_is_unbiased() {
    let grid: Vec<f64> = (0..200).map(|i| 62.33 * NM + 0.17 * NM * i as f64).collect();
    let theory = ForceCurve::new(
        grid.iter().map(|&z| (z, 1.5e-33 / z.powi(3))).collect(),
        Provenance::RoughnessCorrected,
        None,
    )
    .unwrap();
    let sigma = 12e-12;
    let target = sigma / 65f64.sqrt();
    let mean = (0..50)
        .map(|seed| {
            let ens = synthesize_from_curve(&theory, 65, sigma, &[], seed).unwrap();
            pooled_variance_of_mean(&ens, 0.8 * NM).unwrap()
        })
        .sum::<f64>()
        / 50.0;
    assert!((mean / target - 1.0).abs() < 0.05, "{mean:e} vs {target:e}");
}

fn power_curve(grid: &[f64], k: f64, p: i32, bend: f64) -> ForceCurve<f64> {
    ForceCurve::new(
        grid.iter().map(|&z| (z, k / z.powi(p) * (1.0 + bend * z / grid[0]))).collect(),
        Provenance::Smooth,
        None,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn drude_eps_monotone(wp in 1e13f64..1e17, g in 1e11f64..1e15) {
        eps_is_monotone(&drude(wp, g));
    }

    #[test]
    fn kramers_kronig_is_linear(a in 0.1f64..10.0, b in 0.1f64..10.0, xi in 1e13f64..1e16) {
        let grid = log_space(1e10, 1e19, 9 * 40 + 1);
        let t1: Vec<(f64, f64)> = grid.iter().map(|&w| (w, 1.0 / (1.0 + (w / 1e15f64).powi(2)))).collect();
        let t2: Vec<(f64, f64)> = grid.iter().map(|&w| (w, (w / 1e14) / (1.0 + (w / 1e14f64).powi(4)))).collect();
        let sum: Vec<(f64, f64)> = t1.iter().zip(&t2).map(|(p, q)| (p.0, a * p.1 + b * q.1)).collect();
        let kk = |rows: Vec<(f64, f64)>| {
            let t = OpticalDataTable::new("t", rows).unwrap();
            kramers_kronig_imag_axis(&t, &Extensions::none(), xi).unwrap() - 1.0
        };
        let lhs = kk(sum);
        let rhs = a * kk(t1) + b * kk(t2);
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-9, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn capacitance_gradient_is_negative(z in 1e-9f64..1e-4, r in 1e-6f64..1e-3) {
        prop_assert!(capacitance_gradient(z, r, DEFAULT_MAX_TERMS).unwrap() < 0.0);
    }

    #[test]
    fn composition_matches_convolution(a in proptest::collection::vec(0.01f64..1.0, 1..=4)) {
        let exact = common::convolution_quantile(&a, 0.95);
        let got = compose_uniform_systematics(&a, 0.95).unwrap();
        prop_assert!((got / exact - 1.0).abs() <= 0.06, "{} vs {}", got, exact);
    }

    #[test]
    fn ensemble_round_trip(
        sets in proptest::collection::vec(proptest::collection::vec(-1e-9f64..1e-9, 7), 2..6),
        step in 0.01f64..5.0,
    ) {
        let grid: Vec<f64> = (0..7).map(|i| (60.0 + step * i as f64) * NM).collect();
        let ens = MeasurementEnsemble::new(grid, sets).unwrap();
        let back: MeasurementEnsemble<f64> = parse_ensemble(&ensemble_to_csv(&ens)).unwrap();
        prop_assert_eq!(back, ens);
    }

    #[test]
    fn ratio_scale_covariance(c in 1e-3f64..1e3, k in 1e-35f64..1e-30, bend in -0.3f64..0.3) {
        let grid: Vec<f64> = (0..40).map(|i| (62.0 + 5.0 * i as f64) * NM).collect();
        let a = power_curve(&grid, k, 3, bend);
        let b = power_curve(&grid, k, 3, 0.0);
        let scale = |f: &ForceCurve<f64>| ForceCurve::new(
            f.points().iter().map(|p| (p.0, c * p.1)).collect(), Provenance::Smooth, None).unwrap();
        let r1 = force_ratio(&a, &b).unwrap();
        let r2 = force_ratio(&scale(&a), &scale(&b)).unwrap();
        prop_assert_eq!(r1.trend, r2.trend);
        for (p, q) in r1.points.iter().zip(&r2.points) {
            prop_assert!((p.1 / q.1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_trend_survives_subsampling(p in 2i32..5, bend in prop_oneof![-0.5f64..-0.01, 0.01f64..0.5, Just(0.0)]) {
        let grid: Vec<f64> = (0..60).map(|i| (62.0 + 4.0 * i as f64) * NM).collect();
        let half: Vec<f64> = grid.iter().step_by(2).copied().collect();
        let full = force_ratio(&power_curve(&grid, 1e-33, p, bend), &power_curve(&grid, 1e-33, p, 0.0)).unwrap();
        let sub = force_ratio(&power_curve(&half, 1e-33, p, bend), &power_curve(&half, 1e-33, p, 0.0)).unwrap();
        prop_assert_eq!(full.trend, sub.trend);
        if bend == 0.0 {
            prop_assert_eq!(full.trend, Trend::Flat);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn force_positive_and_symmetric(
        wp1 in 1e14f64..1e17, g1 in 1e12f64..1e15,
        wp2 in 1e14f64..1e17, g2 in 1e12f64..1e15,
        z in 20e-9f64..2e-6,
    ) {
        let geom = Geometry::reference();
        let q = QuadratureSpec::default();
        let (m1, m2) = (drude(wp1, g1), drude(wp2, g2));
        let f12 = lifshitz_force(z, &geom, &m1, &m2, &q).unwrap();
        let f21 = lifshitz_force(z, &geom, &m2, &m1, &q).unwrap();
        prop_assert!(f12 > 0.0);
        prop_assert!((f12 / f21 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_roughness_is_smooth(h1 in 0.0f64..30.0, h2 in 0.0f64..5.0, n in 1usize..5, z in 62e-9f64..600e-9) {
        let geom = Geometry::reference();
        let q = QuadratureSpec::default();
        let m = drude(1.37e16, 5.3e13);
        let flat = |h: f64| RoughnessProfile::new(vec![(1.0 / n as f64, h * NM); n]).unwrap();
        let rough = roughness_corrected_force(z, &geom, &m, &m, &flat(h1), &flat(h2), &q).unwrap();
        let smooth = lifshitz_force(z, &geom, &m, &m, &q).unwrap();
        prop_assert!((rough / smooth - 1.0).abs() < 4.0 * n as f64 * n as f64 * f64::EPSILON);
    }
}
