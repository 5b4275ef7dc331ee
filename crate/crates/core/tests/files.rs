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


use casimir_core::lifshitz::{Body, ForceCurve, RoughnessProfile};
use casimir_core::materials::{load_optical_csv, FreqUnit, MaterialError};
use casimir_core::pipeline::{load_ensemble, save_ensemble, synthesize_from_curve, PipelineError};
use casimir_core::ForceCurveF64;
use std::fs;

#[test]
fn ensemble_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ens.csv");
    let grid: Vec<f64> = (0..30).map(|i| 62.33e-9 + 0.17e-9 * i as f64).collect();
    let theory = ForceCurve::new(
        grid.iter().map(|&z| (z, 1.4e-33 / z.powi(3))).collect(),
        casimir_core::lifshitz::Provenance::RoughnessCorrected,
        None,
    )
    .unwrap();
    let ens = synthesize_from_curve(&theory, 6, 1e-11, &[], 3).unwrap();
    save_ensemble(&ens, &p).unwrap();
    assert_eq!(load_ensemble::<f64>(&p).unwrap(), ens);
    let missing = load_ensemble::<f64>(&dir.path().join("nope.csv")).unwrap_err();
    assert!(matches!(missing, PipelineError::Io { ref path, .. } if path.ends_with("nope.csv")));
}

#[test]
fn ragged_ensemble_names_the_set() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ragged.csv");
    fs::write(&p, "set_id,z_nm,F_pN\n0,62.33,100\n0,62.5,99\n1,62.33,101\n").unwrap();
    let e = load_ensemble::<f64>(&p).unwrap_err();
    assert!(e.to_string().contains('1'), "{e}");
}

#[test]
fn optical_table_in_electron_volts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("au.csv");
    fs::write(&p, "# n,k sample\nenergy_ev,n,k\n1.0,0.2,6.0\n2.0,0.5,3.0\n").unwrap();
    let t = load_optical_csv::<f64>(&p, FreqUnit::ElectronVolt).unwrap();
    assert_eq!(t.label(), "au");
    assert!((t.omega()[0] / 1.519_267_447e15 - 1.0).abs() < 1e-8);
    assert!((t.eps_im()[0] - 2.4).abs() < 1e-12);

    fs::write(&p, "energy_ev,n,k\n1.0,0.2\n").unwrap();
    match load_optical_csv::<f64>(&p, FreqUnit::ElectronVolt) {
        Err(MaterialError::Parse { line, msg }) => {
            assert_eq!(line, 2);
            assert!(msg.contains("au.csv"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn force_curve_and_roughness_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = ForceCurveF64::new(
        vec![(62.33e-9, 3.8e-10), (100e-9, 1.1e-10)],
        casimir_core::lifshitz::Provenance::Smooth,
        None,
    )
    .unwrap();
    let p = dir.path().join("force.csv");
    fs::write(&p, c.to_csv_string()).unwrap();
    let back = ForceCurveF64::from_csv_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(back.points(), c.points());

    let r = RoughnessProfile::<f64>::reference_sphere();
    let p = dir.path().join("sphere.csv");
    fs::write(&p, r.to_csv_string(Body::Sphere)).unwrap();
    let (body, back) = RoughnessProfile::<f64>::from_csv_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(body, Body::Sphere);
    assert!((back.zero_level() - r.zero_level()).abs() < 1e-20);
}
