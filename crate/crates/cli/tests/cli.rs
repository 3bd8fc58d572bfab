use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = include_str!("../../../configs/si_bi.toml");

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_purcellsim"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stdout_ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows (after the comment and header lines), split on commas.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn param(json: &str, name: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["params"].as_array().unwrap().iter().find(|p| p["name"] == name).unwrap()["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn transition_table_at_3mt() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, BASE);
    let csv = stdout_ok(&run(&["transitions"], &cfg));
    let mut lines = csv.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# purcellsim ") && comment.contains("config_sha256="));
    assert_eq!(
        lines.next().unwrap(),
        "fromF,frommF,toF,tomF,frequency_Hz,matrix_element,dfdB_Hz_per_T,branch"
    );
    let table = rows(&csv);
    assert_eq!(table.len(), 18);
    let first = &table[0];
    assert_eq!(&first[..4], &[4.0, -4.0, 5.0, -5.0]);
    assert!((first[4] - 7.300e9).abs() < 1e6);
    assert!((first[5] - 0.474).abs() < 0.002);
    assert!((first[6] + 25.1e9).abs() < 0.1e9);
}

#[test]
fn zero_field_lines_sit_at_the_hyperfine_splitting() {
    let dir = TempDir::new().unwrap();
    let text = BASE
        .replace("B0_T = 3e-3", "B0_T = 0.0")
        .replace("A_Hz = 1.47517e9", "A_Hz = 1.475e9");
    let table = rows(&stdout_ok(&run(&["transitions"], &write_config(&dir, &text))));
    assert_eq!(table.len(), 18);
    for r in &table {
        assert!((r[4] - 7.375e9).abs() < 1e3, "{}", r[4]);
    }
}

#[test]
fn matrix_element_threshold() {
    let dir = TempDir::new().unwrap();
    let text = BASE.replace("B0_T = 3e-3", "B0_T = 3e-3\nmin_matrix_element = 0.25");
    assert_eq!(rows(&stdout_ok(&run(&["transitions"], &write_config(&dir, &text)))).len(), 10);
}

#[test]
fn purcell_rows() {
    let dir = TempDir::new().unwrap();
    let kappa = 7.305e9 / 8.9e4;
    let text = BASE.replace("gamma_nr_per_s = 6.25e-4", "gamma_nr_per_s = 0.0").replace(
        "detunings_Hz = { start = 1e4, stop = 12e6, points = 21, log = true }",
        &format!("detunings_Hz = [{kappa:e}]"),
    );
    let table = rows(&stdout_ok(&run(&["purcell"], &write_config(&dir, &text))));
    assert_eq!(table[0], vec![0.0, 1.68]);
    assert!((table[1][1] - 5.0 * 1.68).abs() < 1e-9);

    let table = rows(&stdout_ok(&run(&["purcell"], &write_config(&dir, BASE))));
    assert_eq!(table.len(), 22);
    let last = table.last().unwrap()[1];
    assert!((last - 1600.0).abs() < 0.02 * 1600.0, "{last}");
}

#[test]
fn simulate_then_fit_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, BASE);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();

    stdout_ok(&run(&["simulate", "inversion", "--out", o], &cfg));
    stdout_ok(&run(&["simulate", "rabi", "--out", o], &cfg));
    stdout_ok(&run(&["simulate", "saturation", "--out", o], &cfg));
    stdout_ok(&run(&["purcell", "--out", o], &cfg));

    let fit = |model: &str, file: &str| {
        let input = out.join(file);
        stdout_ok(&run(&["fit", model, "--input", input.to_str().unwrap()], &cfg))
    };
    let t1 = param(&fit("exp", "inversion.csv"), "T1");
    assert!((t1 - 0.365).abs() < 0.01, "{t1}");
    let g = param(&fit("rabi", "rabi.csv"), "g");
    assert!((g - 58.0).abs() < 0.58, "{g}");
    let t1 = param(&fit("exp", "saturation.csv"), "T1");
    assert!((t1 - 1440.0).abs() < 144.0, "{t1}");
    let gamma = param(&fit("purcell", "purcell.csv"), "gamma_nr");
    assert!((1.0 / gamma - 1600.0).abs() < 1.0, "{gamma}");
}

#[test]
fn field_sweep_output() {
    let dir = TempDir::new().unwrap();
    let text = BASE.replace(
        "fields_T = { start = 0.0, stop = 6e-3, points = 601 }",
        "fields_T = { start = 4.5e-3, stop = 6e-3, points = 301 }",
    );
    let csv = stdout_ok(&run(&["simulate", "fieldsweep"], &write_config(&dir, &text)));
    assert_eq!(csv.lines().nth(1).unwrap(), "B0_T,A_Q");
    let table = rows(&csv);
    let peak = table.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((peak[0] - 5.2e-3).abs() < 0.2e-3, "{}", peak[0]);
}

#[test]
fn reproduce_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let text = BASE.replace("g_Hz = 51.134", "g_Hz = 51.134\nnoise_sigma = 0.02");
    let cfg = write_config(&dir, &text);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    stdout_ok(&run(&["reproduce", "--out", a.to_str().unwrap()], &cfg));
    stdout_ok(&run(&["reproduce", "--out", b.to_str().unwrap()], &cfg));
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 15);
    for n in &names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n:?}");
    }
    for n in [
        "transitions.csv",
        "inversion.csv",
        "rabi.csv",
        "purcell.csv",
        "fieldsweep_A.csv",
        "fit_purcell.json",
    ] {
        assert!(a.join(n).exists(), "{n}");
    }

    // the seed reaches the noisy curve and nothing else
    let c = dir.path().join("c");
    stdout_ok(&run(&["reproduce", "--out", c.to_str().unwrap(), "--seed", "99"], &cfg));
    assert_ne!(
        std::fs::read(a.join("inversion.csv")).unwrap(),
        std::fs::read(c.join("inversion.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(a.join("rabi.csv")).unwrap(),
        std::fs::read(c.join("rabi.csv")).unwrap()
    );
}

#[test]
fn missing_section_is_named() {
    let dir = TempDir::new().unwrap();
    let start = BASE.find("[rabi]").unwrap();
    let end = BASE.find("[fieldsweep]").unwrap();
    let text = format!("{}{}", &BASE[..start], &BASE[end..]);
    let out = run(
        &["reproduce", "--out", dir.path().join("o").to_str().unwrap()],
        &write_config(&dir, &text),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[rabi]"));
    // nothing is written when validation fails
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let text = BASE.replace("[line]", "[line]\nwidth_Hz = 1.0");
    let out = run(&["transitions"], &write_config(&dir, &text));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width_Hz"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, BASE);

    // reproduce without an output directory
    assert_eq!(run(&["reproduce"], &cfg).status.code(), Some(1));

    let bad = dir.path().join("flat.csv");
    std::fs::write(
        &bad,
        "power_W,A_Q\n0,0.5\n1e-11,0.5\n2e-11,0.5\n3e-11,0.5\n4e-11,0.5\n5e-11,0.5\n",
    )
    .unwrap();
    let out = run(&["fit", "rabi", "--input", bad.to_str().unwrap()], &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["fit", "exp", "--input", bad.to_str().unwrap()], &cfg);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["simulate", "nonsense"], &cfg);
    assert_eq!(out.status.code(), Some(1));

    let text = BASE.replace("Q = 3.15e5", "Q = -1.0");
    assert_eq!(
        run(&["simulate", "inversion"], &write_config(&dir, &text)).status.code(),
        Some(1)
    );
}
