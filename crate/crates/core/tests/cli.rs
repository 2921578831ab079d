use std::process::Command;

use edge_spectra::cli::{format_number, run};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edge-spectra"))
}

fn exit_code(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

fn csv_body(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn exit_code_contract() {
    assert_eq!(exit_code(&["fig2", "--n-points", "5"]), 0);
    assert_eq!(exit_code(&["fig2", "--c-min", "3", "--c-max", "1"]), 2);
    assert_eq!(exit_code(&["no-such-command"]), 2);
    assert_eq!(exit_code(&["fig3", "--alpha", "0.3"]), 3);
    assert_eq!(exit_code(&["bounds", "--delta", "1.2"]), 4);
    assert_eq!(exit_code(&["bounds", "--weight", "flat", "--r0", "2", "--epsilon", "1.9"]), 0);
    assert_eq!(exit_code(&["validate", "--suite", "aps"]), 0);
}

#[test]
fn in_process_runner_matches_binary() {
    assert_eq!(run(["edge-spectra", "fig2", "--c-min", "3", "--c-max", "1"]), 2);
    assert_eq!(run(["edge-spectra", "--help"]), 0);
}

#[test]
fn fig2_dataset() {
    let out = bin().args(["fig2"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# command: fig2\n"));
    let rows = csv_body(&text);
    assert_eq!(rows[0], ["c", "kappa_exact", "kappa_m", "kappa_M"]);
    assert_eq!(rows.len(), 81);
    for r in &rows[1..] {
        let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        assert!(v[3] < v[1] && v[1] < v[2]);
    }
    let one = bin()
        .args(["fig2", "--c-min", "0.5", "--c-max", "1", "--n-points", "2"])
        .output()
        .unwrap();
    let rows = csv_body(&String::from_utf8(one.stdout).unwrap());
    let v: Vec<f64> = rows[2].iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v[0], 1.0);
    assert!((v[1] - 1.199679).abs() < 1e-6);
    assert!((v[2] - 1.25498).abs() < 2e-5);
    assert!((v[3] - 0.761594).abs() < 1e-6);
}

#[test]
fn fig3_density_ratios() {
    let ratio = |args: &[&str]| -> f64 {
        let out = bin().args(args).output().unwrap();
        assert!(out.status.success());
        let rows = csv_body(&String::from_utf8(out.stdout).unwrap());
        let first: f64 = rows[1][3].parse().unwrap();
        let last: f64 = rows[rows.len() - 1][3].parse().unwrap();
        last / first
    };
    let r1 = ratio(&["fig3", "--alpha", "1.16144", "--n-points", "200"]);
    // the first grid point sits at R0/200, so the grid ratio is within
    // O((νr)²) of the r → 0 limit
    assert!((r1 - 1.51642).abs() < 1e-4, "{r1}");
    let r5 = ratio(&["fig3", "--m", "5", "--n-points", "200"]);
    assert!(r5 > 10.0);
}

#[test]
fn fig4_counts_and_flags() {
    let out = bin().args(["fig4", "--alphas", "0.3"]).output().unwrap();
    let rows = csv_body(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[1][1], "0");
    let out = bin().args(["fig4", "--alphas", "0.5,1,1.5,2,2.5"]).output().unwrap();
    let rows = csv_body(&String::from_utf8(out.stdout).unwrap());
    let counts: Vec<u64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(rows[0], ["alpha", "count", "reference_count", "mismatch"]);
}

#[test]
fn fig4_json_has_breakdown_and_calibration() {
    let out = bin().args(["--format", "json", "fig4", "--alphas", "1,2"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["config", "results", "checks"] {
        assert!(v.get(key).is_some());
    }
    let levels = &v["results"]["counts"][0]["levels"];
    assert!(levels.as_array().unwrap().iter().all(|l| l["degeneracy"].as_u64().unwrap() >= 2));
    let cal = &v["results"]["calibration"];
    assert_eq!(cal["candidates"].as_array().unwrap().len(), 8);
    assert!(cal["locked"].is_null() == !cal["discrepancies"].as_array().unwrap().is_empty());
}

#[test]
fn bounds_report() {
    let out = bin().args(["--format", "json", "bounds", "--fd", "--k-bar", "1"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["results"];
    assert!((r["geometry"]["delta"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!((r["mu0"].as_f64().unwrap() - 8.8547).abs() < 1e-4);
    assert!((r["upper_edge"].as_f64().unwrap() + 0.0067928).abs() < 2e-7);
    assert_eq!(r["fd_enclosure"], true);
    assert!(r["gauge"]["first_power"].is_number() && r["gauge"]["squared"].is_number());

    let out = bin()
        .args(["--format", "json", "bounds", "--weight", "flat", "--r0", "2", "--epsilon", "1", "--mu-bar", "0"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["mu0"], 0.0);
    assert_eq!(v["results"]["edge_certificate"], false);
}

#[test]
fn bounds_from_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("w.csv");
    let rows: String = (0..=20)
        .map(|i| {
            let r = 0.8 + 0.01 * f64::from(i);
            format!("{r},{}\n", r * r)
        })
        .collect();
    std::fs::write(&table, format!("r,w\n{rows}")).unwrap();
    let out = bin()
        .args(["--format", "json", "bounds", "--weight", "table", "--table"])
        .arg(&table)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["results"]["geometry"]["delta"].as_f64().unwrap() - 0.1).abs() < 1e-3);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        for fmt in ["csv", "json"] {
            let path = dir.path().join(format!("{fmt}{i}"));
            let status = bin()
                .args(["--threads", threads, "--format", fmt, "--output"])
                .arg(&path)
                .args(["fig4", "--alphas", "1,2,3"])
                .status()
                .unwrap();
            assert!(status.success());
        }
    }
    for fmt in ["csv", "json"] {
        let a = std::fs::read(dir.path().join(format!("{fmt}0"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("{fmt}1"))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn thread_env_is_honoured() {
    let out = bin().env("EDGE_SPECTRA_THREADS", "0").args(["fig2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("EDGE_SPECTRA_THREADS", "2").args(["fig2"]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn csv_numbers_round_trip() {
    let out = bin().args(["--precision", "7", "fig2"]).output().unwrap();
    for row in csv_body(&String::from_utf8(out.stdout).unwrap()).iter().skip(1) {
        for cell in row {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format_number(x, 7), *cell);
        }
    }
    for &x in &[1.0 / 3.0, 2.5e-9, -7.25e12, 123456.789, 0.000_001, 1e6] {
        for digits in [3, 9, 15] {
            let s = format_number(x, digits);
            let back: f64 = s.parse().unwrap();
            let unit = 10f64.powi(x.abs().log10().floor() as i32 - digits as i32 + 1);
            assert!((back - x).abs() <= 0.5 * unit * (1.0 + 1e-9), "{x} {digits} {s}");
        }
    }
}
