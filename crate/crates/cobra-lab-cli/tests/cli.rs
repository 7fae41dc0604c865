//! End-to-end tests driving the compiled `cobra-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cobra-lab"));
    // Keep tests hermetic: the ambient environment must not change seeds.
    cmd.env_remove("COBRA_LAB_SEED");
    cmd
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn cobra-lab");
    assert!(
        out.status.success(),
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

/// Splits one CSV record, honoring double-quoted fields.
fn split_csv(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

/// Returns the data records of a CSV dump (everything after the two
/// header lines), split into fields.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    let header = lines.next().expect("header line");
    assert!(header.starts_with("experiment,graph_family,"), "{header}");
    lines.map(split_csv).collect()
}

// Column indices in the CSV schema.
const COL_EXPERIMENT: usize = 0;
const COL_FAMILY: usize = 1;
const COL_N: usize = 2;
const COL_K: usize = 4;
const COL_SEED: usize = 5;
const COL_QUANTITY: usize = 6;
const COL_TRIALS: usize = 7;
const COL_MEAN: usize = 8;
const COL_EXTRA: usize = 16;

#[test]
fn simulate_is_deterministic_and_labeled() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        run_ok(&[
            "simulate",
            "--graph",
            "cycle:8",
            "--process",
            "cobra:k=2",
            "--quantity",
            "cover",
            "--trials",
            "400",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let text_a = std::fs::read_to_string(&a).unwrap();
    let text_b = std::fs::read_to_string(&b).unwrap();
    assert_eq!(text_a, text_b, "same config + seed must give same bytes");
    let rows = data_rows(&text_a);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[COL_EXPERIMENT], "simulate");
    assert_eq!(row[COL_FAMILY], "cycle:8");
    assert_eq!(row[COL_N], "8");
    assert_eq!(row[COL_K], "2");
    assert_eq!(row[COL_SEED], "42");
    assert_eq!(row[COL_QUANTITY], "cover:0");
    assert_eq!(row[COL_TRIALS], "400");
    let mean: f64 = row[COL_MEAN].parse().unwrap();
    assert!(mean > 1.0 && mean < 50.0, "cover time {mean} implausible");
    assert!(row[COL_EXTRA].contains("process=cobra:k=2"));
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.csv");
    let four = dir.path().join("four.csv");
    for (workers, out) in [("1", &one), ("4", &four)] {
        run_ok(&[
            "simulate",
            "--workers",
            workers,
            "--graph",
            "petersen",
            "--process",
            "srw",
            "--quantity",
            "hit:0,7",
            "--trials",
            "500",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read_to_string(&one).unwrap(),
        std::fs::read_to_string(&four).unwrap()
    );
}

#[test]
fn seed_env_var_matches_explicit_flag() {
    let with_flag = run_ok(&[
        "simulate", "--graph", "path:6", "--process", "cobra:k=3", "--quantity", "hit:0,5",
        "--trials", "200", "--seed", "99",
    ]);
    let with_env = bin()
        .env("COBRA_LAB_SEED", "99")
        .args([
            "simulate", "--graph", "path:6", "--process", "cobra:k=3", "--quantity", "hit:0,5",
            "--trials", "200",
        ])
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert_eq!(stdout(&with_flag), stdout(&with_env.clone()));
    let bad_env = bin()
        .env("COBRA_LAB_SEED", "not-a-number")
        .args([
            "simulate", "--graph", "path:6", "--process", "srw", "--quantity", "cover",
            "--trials", "10",
        ])
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn exact_path3_and_k3_match_known_values() {
    let out = run_ok(&[
        "exact", "--graph", "path:3", "--process", "cobra:k=2", "--quantity", "hit:0,2",
    ]);
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows[0][COL_QUANTITY], "hit:0,2");
    assert_eq!(rows[0][COL_TRIALS], "0");
    let mean: f64 = rows[0][COL_MEAN].parse().unwrap();
    assert!((mean - 8.0 / 3.0).abs() < 1e-12, "path:3 hit should be 8/3, got {mean}");

    let out = run_ok(&[
        "exact", "--graph", "complete:3", "--process", "cobra:k=2", "--quantity", "cover",
    ]);
    let rows = data_rows(&stdout(&out));
    let mean: f64 = rows[0][COL_MEAN].parse().unwrap();
    assert!((mean - 5.0 / 3.0).abs() < 1e-12, "complete:3 cover should be 5/3, got {mean}");

    // The single-walk solver agrees with the k=1 subset chain.
    let srw = run_ok(&[
        "exact", "--graph", "path:3", "--process", "srw", "--quantity", "hit:0,2",
    ]);
    let srw_mean: f64 = data_rows(&stdout(&srw))[0][COL_MEAN].parse().unwrap();
    assert!((srw_mean - 4.0).abs() < 1e-9, "path:3 single-walk hit is 4, got {srw_mean}");
}

#[test]
fn exact_rejects_oversized_state_space() {
    let out = bin()
        .args([
            "exact", "--graph", "complete:13", "--process", "cobra:k=2", "--quantity", "cover",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "runtime failure must exit 1");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "stderr should explain: {err}");
}

#[test]
fn usage_errors_exit_2() {
    // Missing required flag (validated after config merge).
    let out = bin()
        .args(["simulate", "--graph", "cycle:8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown graph family.
    let out = bin()
        .args([
            "simulate", "--graph", "blorp:8", "--process", "srw", "--quantity", "cover",
            "--trials", "10",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown subcommand (clap's own exit code).
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown experiment name.
    let out = bin().args(["experiment", "warp-drive"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_azar_star_center_is_half() {
    let out = run_ok(&[
        "bounds", "--which", "azar", "--graph", "star:32", "--set", "0", "--eps", "0.3",
    ]);
    let rows = data_rows(&stdout(&out));
    let mean: f64 = rows[0][COL_MEAN].parse().unwrap();
    assert!((mean - 0.5).abs() < 1e-12, "star center mass bound is 1/2, got {mean}");
    assert_eq!(rows[0][COL_FAMILY], "star:32");
}

#[test]
fn bounds_epoch_and_regular_are_closed_form() {
    let out = run_ok(&[
        "bounds", "--which", "epoch", "--phi", "0.5", "--d", "2", "--n", "4",
    ]);
    let rows = data_rows(&stdout(&out));
    let mean: f64 = rows[0][COL_MEAN].parse().unwrap();
    assert_eq!(mean, 28849.0);

    let out = run_ok(&["bounds", "--which", "regular", "--n", "64", "--delta", "3"]);
    let rows = data_rows(&stdout(&out));
    let mean: f64 = rows[0][COL_MEAN].parse().unwrap();
    let expected = 54.0 * 64f64.powf(5.0 / 3.0);
    assert!(
        (mean - expected).abs() / expected < 1e-12,
        "degree-3 envelope at n=64: expected {expected}, got {mean}"
    );

    // Missing parameter for a calculator is a usage error.
    let out = bin()
        .args(["bounds", "--which", "epoch", "--phi", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_merges_and_rejects_unknown_keys() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"graph": "cycle:8", "process": "cobra:k=2", "quantity": "cover", "trials": 50, "seed": 7}"#,
    )
    .unwrap();
    let from_file = run_ok(&["simulate", "--config", config.to_str().unwrap()]);
    let rows = data_rows(&stdout(&from_file));
    assert_eq!(rows[0][COL_TRIALS], "50");
    assert_eq!(rows[0][COL_SEED], "7");

    // Flags override file values.
    let overridden = run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--trials",
        "60",
    ]);
    let rows = data_rows(&stdout(&overridden));
    assert_eq!(rows[0][COL_TRIALS], "60");
    assert_eq!(rows[0][COL_SEED], "7");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"graph": "cycle:8", "tirals": 50}"#).unwrap();
    let out = bin()
        .args(["simulate", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "unknown config key must exit 2");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tirals"), "message should name the bad key: {err}");
}

#[test]
fn edge_list_files_are_accepted() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("p3.edges");
    std::fs::write(&path, "# tiny path\n3 2\n0 1\n1 2\n").unwrap();
    let spec = format!("file:{}", path.display());
    let out = run_ok(&[
        "simulate", "--graph", &spec, "--process", "srw", "--quantity", "hit:0,2",
        "--trials", "300", "--seed", "3",
    ]);
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows[0][COL_FAMILY], spec);
    assert_eq!(rows[0][COL_N], "3");
    let mean: f64 = rows[0][COL_MEAN].parse().unwrap();
    // Exact value is 4; 300 trials stay well inside ±1.
    assert!((mean - 4.0).abs() < 1.0, "single-walk hit on a 3-path ≈ 4, got {mean}");

    let missing = bin()
        .args([
            "simulate", "--graph", "file:/nonexistent.edges", "--process", "srw",
            "--quantity", "cover", "--trials", "10",
        ])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1), "unreadable file is a runtime error");
}

#[test]
fn walt_process_reports_pebble_count() {
    let out = run_ok(&[
        "simulate", "--graph", "cycle:8", "--process", "walt:delta=0.5,lazy",
        "--quantity", "cover", "--trials", "100", "--seed", "2",
    ]);
    let rows = data_rows(&stdout(&out));
    let extra = &rows[0][COL_EXTRA];
    assert!(extra.contains("pebbles=4"), "{extra}");
    assert!(extra.contains("lazy=true"), "{extra}");
}

#[test]
fn experiment_grid_linear_writes_rows_and_fit() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("grid.csv");
    let out = run_ok(&[
        "experiment", "grid-linear", "--sides", "4,6,8,10", "--trials", "40",
        "--seed", "5", "--out", out_path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 5, "four sizes + one fit row");
    let fit = rows.iter().find(|r| r[COL_QUANTITY] == "fit").expect("fit row");
    assert!(fit[COL_EXTRA].contains("slope="), "{:?}", fit[COL_EXTRA]);
    // Check verdicts go to stdout when the CSV goes to a file.
    let console = stdout(&out);
    assert!(console.contains("check"), "{console}");
}

#[test]
fn experiment_uses_config_file() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("exp.json");
    let out_path = dir.path().join("drift.csv");
    std::fs::write(
        &config,
        format!(
            r#"{{"name": "drift", "samples": 20000, "seed": 11, "out": {:?}}}"#,
            out_path.to_str().unwrap()
        ),
    )
    .unwrap();
    run_ok(&["experiment", "--config", config.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2, "one row per unstick policy");
    for row in &rows {
        assert_eq!(row[COL_EXPERIMENT], "drift");
        assert!(row[COL_EXTRA].contains("policy="), "{:?}", row[COL_EXTRA]);
    }
}
