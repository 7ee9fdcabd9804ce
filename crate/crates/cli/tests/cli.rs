//! End-to-end tests of the `pcclone` binary: flag handling, CSV contents,
//! exit codes, config-file merging and topology persistence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcclone"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).expect("output file exists");
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn col(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let idx = rows[0]
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("missing column {name}"));
    rows[1..]
        .iter()
        .map(|r| r[idx].parse::<f64>().expect("parses as f64"))
        .collect()
}

#[test]
fn fidelity_endpoints_and_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fid.csv");
    let res = run_in(
        dir.path(),
        &["fidelity", "--grid", "201", "--out", out.to_str().unwrap()],
    );
    assert!(res.status.success());

    let rows = read_csv(&out);
    assert_eq!(rows[0], vec!["r", "f_bob", "f_eve", "p_suc"]);
    assert_eq!(rows.len(), 202);

    let r = col(&rows, "r");
    let f_bob = col(&rows, "f_bob");
    let f_eve = col(&rows, "f_eve");
    let p_suc = col(&rows, "p_suc");

    assert_eq!(f_bob[0], 1.0);
    assert_eq!(f_eve[0], 0.5);
    assert_eq!(p_suc[0], 0.25);
    assert_eq!(f_bob[200], 1.0);
    assert_eq!(f_eve[200], 0.5);
    assert_eq!(p_suc[200], 1.0);

    // Bob's minimum and Eve's maximum are 5/6 at the same grid point.
    let (i_min, _) = f_bob
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let (i_max, _) = f_eve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    assert_eq!(i_min, i_max);
    assert!((f_bob[i_min] - 5.0 / 6.0).abs() < 1e-4);
    assert!((f_eve[i_max] - 5.0 / 6.0).abs() < 1e-4);
    assert!((r[i_min] - 1.0 / 3.0).abs() < 5e-3);
}

#[test]
fn theta_curve_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theta.csv");
    let res = run_in(
        dir.path(),
        &["theta", "--grid", "101", "--out", out.to_str().unwrap()],
    );
    assert!(res.status.success());

    let rows = read_csv(&out);
    assert_eq!(rows[0], vec!["d", "theta"]);
    let theta = col(&rows, "theta");
    assert_eq!(theta[0], std::f64::consts::FRAC_PI_2);
    assert_eq!(*theta.last().unwrap(), 0.0);
    assert!(theta.windows(2).all(|w| w[1] < w[0]), "strictly decreasing");
}

#[test]
fn info_closed_form_dominates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("info.csv");
    let res = run_in(
        dir.path(),
        &["info", "--grid", "41", "--out", out.to_str().unwrap()],
    );
    assert!(res.status.success());

    let rows = read_csv(&out);
    assert_eq!(
        rows[0],
        vec!["r", "d", "i_conventional", "i_optimal_closed"]
    );
    let conv = col(&rows, "i_conventional");
    let opt = col(&rows, "i_optimal_closed");
    let d = col(&rows, "d");
    assert!(d[0] == 0.0 && conv[0].abs() <= 1e-10 && opt[0].abs() <= 1e-10);
    for i in 0..conv.len() {
        assert!(
            opt[i] >= conv[i] - 1e-12,
            "row {i}: {} < {}",
            opt[i],
            conv[i]
        );
    }
    assert!(d.windows(2).all(|w| w[1] >= w[0]), "sorted by disturbance");
}

#[test]
fn info_numeric_column_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("info_num.csv");
    let res = run_in(
        dir.path(),
        &[
            "info",
            "--grid",
            "4",
            "--numeric",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert!(res.status.success());

    let rows = read_csv(&out);
    assert_eq!(
        rows[0],
        vec![
            "r",
            "d",
            "i_conventional",
            "i_optimal_closed",
            "i_optimal_numeric",
            "status"
        ]
    );
    let closed = col(&rows, "i_optimal_closed");
    let numeric = col(&rows, "i_optimal_numeric");
    for i in 0..closed.len() {
        assert!((numeric[i] - closed[i]).abs() <= 1e-3);
    }
    for row in &rows[1..] {
        assert_eq!(row[5], "ok");
    }
}

#[test]
fn info_both_branches_cover_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("info_both.csv");
    let res = run_in(
        dir.path(),
        &[
            "info",
            "--grid",
            "5",
            "--branch",
            "both",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert!(res.status.success());
    let rows = read_csv(&out);
    let r = col(&rows, "r");
    assert_eq!(r.len(), 10);
    assert!(r.iter().any(|&x| x < 1.0 / 3.0 - 1e-9));
    assert!(r.iter().any(|&x| x > 1.0 / 3.0 + 1e-9));
}

#[test]
fn qber_without_dark_counts_equals_disturbance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qber.csv");
    let res = run_in(
        dir.path(),
        &[
            "qber",
            "--grid",
            "41",
            "--pd",
            "0",
            "--pb0",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert!(res.status.success());
    let rows = read_csv(&out);
    assert_eq!(rows[0], vec!["r", "d", "qber"]);
    let d = col(&rows, "d");
    let q = col(&rows, "qber");
    for i in 0..d.len() {
        assert!((q[i] - d[i]).abs() <= 1e-15);
    }
}

#[test]
fn qber_dark_count_dominated_is_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qber_dark.csv");
    let res = run_in(
        dir.path(),
        &[
            "qber",
            "--grid",
            "11",
            "--pd",
            "0.01",
            "--pb0",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert!(res.status.success());
    for q in col(&read_csv(&out), "qber") {
        assert_eq!(q, 0.5);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");

    // Usage: degenerate channel.
    let res = run_in(
        dir.path(),
        &[
            "qber",
            "--pd",
            "0",
            "--pb0",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(res.status.code(), Some(1));

    // Usage: bad branch value (rejected by the parser).
    let res = run_in(
        dir.path(),
        &[
            "info",
            "--branch",
            "sideways",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(res.status.code(), Some(1));

    // Usage: missing output path.
    let res = run_in(dir.path(), &["fidelity"]);
    assert_eq!(res.status.code(), Some(1));

    // Usage: unknown flag.
    let res = run_in(dir.path(), &["fidelity", "--frequency", "3"]);
    assert_eq!(res.status.code(), Some(1));

    // I/O: unwritable output path.
    let res = run_in(
        dir.path(),
        &[
            "fidelity",
            "--grid",
            "3",
            "--out",
            "/nonexistent-dir-pcclone/x.csv",
        ],
    );
    assert_eq!(res.status.code(), Some(2));

    // Help is not an error.
    let res = run_in(dir.path(), &["--help"]);
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let res = run_in(
            dir.path(),
            &[
                "info",
                "--grid",
                "4",
                "--numeric",
                "--seed",
                "42",
                "--out",
                path.to_str().unwrap(),
            ],
        );
        assert!(res.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn fock_verify_persists_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("topology.txt");

    let first = run_in(
        dir.path(),
        &["fock-verify", "--topology", topo.to_str().unwrap()],
    );
    assert_eq!(first.status.code(), Some(0));
    assert!(topo.exists());
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.contains("searched 96 candidate topologies"));
    assert!(stdout.contains("verdict: EQUIVALENT"));

    let second = run_in(
        dir.path(),
        &["fock-verify", "--topology", topo.to_str().unwrap()],
    );
    assert_eq!(second.status.code(), Some(0));
    let stdout2 = String::from_utf8(second.stdout).unwrap();
    assert!(stdout2.contains("loaded from"));
}

#[test]
fn fock_verify_forced_wrong_convention_fails() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_in(dir.path(), &["fock-verify", "--convention", "real-asym"]);
    assert_eq!(res.status.code(), Some(3));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("verdict: NOT EQUIVALENT"));

    let res = run_in(dir.path(), &["fock-verify", "--convention", "symmetric-i"]);
    assert_eq!(res.status.code(), Some(0));

    let res = run_in(dir.path(), &["fock-verify", "--convention", "diagonal"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn config_file_defaults_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out: PathBuf = dir.path().join("from_cfg.csv");
    std::fs::write(
        &cfg,
        format!("# defaults\ngrid=11\nout={}\n", out.display()),
    )
    .unwrap();

    let res = run_in(dir.path(), &["fidelity", "--config", cfg.to_str().unwrap()]);
    assert!(res.status.success());
    assert_eq!(read_csv(&out).len(), 12);

    // Explicit flag beats the config value.
    let res = run_in(
        dir.path(),
        &["fidelity", "--config", cfg.to_str().unwrap(), "--grid", "5"],
    );
    assert!(res.status.success());
    assert_eq!(read_csv(&out).len(), 6);
}

#[test]
fn config_file_rejects_unknown_keys_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");

    std::fs::write(&cfg, "gird=11\n").unwrap();
    let res = run_in(dir.path(), &["fidelity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));

    std::fs::write(&cfg, "format=json\n").unwrap();
    let res = run_in(dir.path(), &["fidelity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));

    std::fs::write(&cfg, "grid=eleven\n").unwrap();
    let res = run_in(dir.path(), &["fidelity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}
