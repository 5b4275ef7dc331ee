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


use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn casimir(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn casimir")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = casimir(out, args);
    assert!(
        o.status.success(),
        "casimir {args:?} failed:\n{}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

fn key(report: &str, k: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{k} = ")))
        .unwrap_or_else(|| panic!("{k} missing from\n{report}"))
        .parse()
        .unwrap()
}

#[test]
fn ideal_force_at_100_nm() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["force", "--mode", "ideal", "--grid", "100:100:1", "--direct"]);
    let f = column(&fs::read_to_string(d.path().join("force.csv")).unwrap(), 1);
    assert!((f[0] / 276.0 - 1.0).abs() < 2e-3, "{}", f[0]);
}

#[test]
fn full_grid_has_3164_rows() {
    let d = tempfile::tempdir().unwrap();
    let s = ok(d.path(), &["force", "--mode", "ideal"]);
    assert!(s.contains("3164 rows"));
    let csv = fs::read_to_string(d.path().join("force.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3165);
    assert!(csv.starts_with("z_nm,F_pN,provenance\n"));
}

#[test]
fn roughness_enhances_force_at_shortest_separation() {
    let d = tempfile::tempdir().unwrap();
    let grid = "62.33:62.33:1";
    ok(d.path(), &["force", "--mode", "smooth", "--grid", grid, "--direct"]);
    let smooth = column(&fs::read_to_string(d.path().join("force.csv")).unwrap(), 1)[0];
    ok(d.path(), &["force", "--mode", "rough", "--grid", grid, "--direct"]);
    let rough = column(&fs::read_to_string(d.path().join("force.csv")).unwrap(), 1)[0];
    assert!(rough > smooth, "{rough} vs {smooth}");
}

#[test]
fn epsilon_is_monotone_and_augmentation_is_low_frequency() {
    let d = tempfile::tempdir().unwrap();
    let args = ["--xi-min", "1e11", "--xi-max", "1e18", "--points", "29"];
    ok(d.path(), &[&["epsilon", "--material", "gold"][..], &args].concat());
    let gold = column(&fs::read_to_string(d.path().join("epsilon.csv")).unwrap(), 1);
    assert!(gold.windows(2).all(|w| w[1] < w[0]));

    ok(d.path(), &[&["epsilon", "--material", "silicon"][..], &args].concat());
    let doped = column(&fs::read_to_string(d.path().join("epsilon.csv")).unwrap(), 1);
    ok(d.path(), &[&["epsilon", "--material", "silicon-high-resistivity"][..], &args].concat());
    let pure = column(&fs::read_to_string(d.path().join("epsilon.csv")).unwrap(), 1);
    let rel: Vec<f64> = doped.iter().zip(&pure).map(|(a, b)| a / b - 1.0).collect();
    assert!(rel[0] > 1.0, "{rel:?}");
    assert!(rel.last().unwrap().abs() < 1e-3, "{rel:?}");
    assert!(rel.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn missing_table_fails_with_path() {
    let d = tempfile::tempdir().unwrap();
    let o = casimir(d.path(), &["epsilon", "--table", "no/such/table.csv"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/table.csv"));
    assert!(!d.path().join("epsilon.csv").exists());

    let cfg = d.path().join("run.toml");
    fs::write(&cfg, "[plate]\nkind = \"table\"\npath = \"si_missing.csv\"\n").unwrap();
    let o = casimir(d.path(), &["--config", cfg.to_str().unwrap(), "ratio"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("si_missing.csv"));
}

#[test]
fn table_material_from_config() {
    let d = tempfile::tempdir().unwrap();
    let mut csv = String::from("# drude-like metal\nomega_rad_s,eps_im\n");
    for i in 0..=80 {
        let w = 10f64.powf(12.0 + i as f64 * 0.1);
        let (wp, g) = (1.37e16f64, 5.3e13f64);
        let _ = std::fmt::Write::write_fmt(
            &mut csv,
            format_args!("{w:e},{:e}\n", wp * wp * g / (w * (w * w + g * g))),
        );
    }
    fs::write(d.path().join("metal.csv"), csv).unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(
        &cfg,
        "[sphere]\nkind = \"table\"\npath = \"metal.csv\"\n[sphere.drude]\nomega_p = 1.37e16\ngamma = 5.3e13\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    ok(d.path(), &["--config", c, "epsilon", "--material", "sphere", "--points", "3"]);
    let eps = column(&fs::read_to_string(d.path().join("epsilon.csv")).unwrap(), 1);
    let exact = |xi: f64| 1.0 + 1.37e16f64.powi(2) / (xi * (xi + 5.3e13));
    for (e, xi) in eps.iter().zip([1e13, 10f64.powf(15.5), 1e18]) {
        assert!((e / exact(xi) - 1.0).abs() < 0.02, "{e} vs {}", exact(xi));
    }
}

#[test]
fn bad_config_and_flags_fail() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nz_min_nm = 600\nz_max_nm = 60\nstep_nm = 1\n").unwrap();
    assert!(!casimir(d.path(), &["--config", cfg.to_str().unwrap(), "force"]).status.success());
    assert!(!casimir(d.path(), &["force", "--grid", "1:2"]).status.success());
    assert!(!casimir(d.path(), &["analyze"]).status.success());
    assert!(!casimir(d.path(), &["calibrate"]).status.success());
    assert!(!casimir(d.path(), &["synthesize", "--n-sets", "1"]).status.success());
    assert!(!casimir(d.path(), &["--threads", "0", "force"]).status.success());
}

#[test]
fn empty_ensemble_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("empty.csv");
    fs::write(&p, "set_id,z_nm,F_pN\n").unwrap();
    let o = casimir(d.path(), &["analyze", p.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!d.path().join("report.csv").exists());
}

#[test]
fn analyze_reproduces_budget_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "analyze", "--synthesize", "--grid", "62.33:150:0.17"];
    let sa = ok(a.path(), &args);
    let sb = ok(b.path(), &args);
    assert_eq!(sa, sb);
    for f in [
        "ensemble.csv",
        "theory.csv",
        "mean.csv",
        "budget.csv",
        "report.csv",
        "agreement.csv",
        "differences.svg",
        "errors.svg",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    assert!((key(&sa, "s_mean_pN") / 1.5 - 1.0).abs() < 0.1);
    assert!((key(&sa, "delta_syst_pN") - 1.15).abs() < 0.05);
    assert!(key(&sa, "fraction_within") >= 0.9);
    let report = fs::read_to_string(a.path().join("report.csv")).unwrap();
    assert!(report.starts_with("z_nm,diff_pN,xi_pN,within\n"));

    let other = ok(b.path(), &["--seed", "12", "analyze", "--synthesize", "--grid", "62.33:150:0.17"]);
    assert_ne!(sa, other);
}

#[test]
fn synthesize_then_analyze_file_matches_inline_run() {
    let a = tempfile::tempdir().unwrap();
    let g = ["--grid", "62.33:100:0.17", "--n-sets", "20", "--noise-pn", "6"];
    ok(a.path(), &[&["--seed", "4", "synthesize"][..], &g].concat());
    let ens = a.path().join("ensemble.csv");
    let from_file = ok(a.path(), &["analyze", ens.to_str().unwrap()]);
    let inline = ok(a.path(), &[&["--seed", "4", "analyze", "--synthesize"][..], &g].concat());
    assert_eq!(from_file, inline);
}

#[test]
fn calibrate_noiseless_synthetic_sweep() {
    let d = tempfile::tempdir().unwrap();
    let s = ok(d.path(), &["calibrate", "--synthesize", "--noise-pn", "0"]);
    assert!((key(&s, "z0_nm") / 32.1 - 1.0).abs() < 1e-6, "{s}");
    assert!((key(&s, "V0_V") / -0.114 - 1.0).abs() < 1e-6, "{s}");
    let sweep = d.path().join("sweep.csv");
    let again = ok(d.path(), &["calibrate", sweep.to_str().unwrap()]);
    assert_eq!(key(&again, "z0_nm"), key(&s, "z0_nm"));
}

#[test]
fn ratio_subcommand() {
    let d = tempfile::tempdir().unwrap();
    let s = ok(d.path(), &["ratio", "--grid", "62.33:300:2"]);
    assert!((key(&s, "ratio_at_zmin") - 0.74).abs() < 0.05);
    assert!((key(&s, "ratio_at_200nm") - 0.63).abs() < 0.05);
    assert!(s.contains("trend = decreasing"));
    assert!(fs::read_to_string(d.path().join("ratio.svg")).unwrap().starts_with("<svg"));
}
