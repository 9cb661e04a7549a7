use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fock"))
        .args(args)
        .env_remove("FOCK_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = fock(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn code(args: &[&str]) -> i32 {
    fock(args).status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const HOP: &str = "STATISTICS FERMION\nN 1\nM 2\nH 1 2 -0.7\nH 2 1 -0.7\n";
const HUBBARD: &str = "STATISTICS BOSON\nN 3\nM 3\n\
    H 1 2 -1\nH 2 1 -1\nH 2 3 -1\nH 3 2 -1\n\
    W 1 1 1 1 2\nW 2 2 2 2 2\nW 3 3 3 3 2\n";

#[test]
fn enum_worked_examples() {
    assert_eq!(
        ok(&[
            "enum",
            "--fermion",
            "-N",
            "7",
            "-M",
            "10",
            "--holes",
            "2,6,8"
        ]),
        "65\n"
    );
    let all = ok(&["enum", "--boson", "-N", "2", "-M", "2", "--all"]);
    assert_eq!(all.lines().count(), 3);
    assert_eq!(
        ok(&["enum", "--fermion", "-N", "2", "-M", "4", "-J", "1"]),
        "|1100⟩\n"
    );
    assert_eq!(
        ok(&["enum", "--boson", "-N", "2", "-M", "3", "--occ", "0,0,2"]),
        "6\n"
    );
}

#[test]
fn enum_listing_round_trips() {
    let all = ok(&["enum", "--fermion", "-N", "2", "-M", "4", "--all"]);
    for line in all.lines() {
        let (j, cfg) = line.split_once(' ').unwrap();
        assert_eq!(
            ok(&["enum", "--fermion", "-N", "2", "-M", "4", "--occ", cfg]).trim(),
            j
        );
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        code(&["enum", "--fermion", "-N", "5", "-M", "3", "--all"]),
        1
    );
    assert_eq!(
        code(&["enum", "--fermion", "-N", "2", "-M", "4", "-J", "7"]),
        1
    );
    assert_eq!(code(&["gs"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "STATISTICS BOSON\nN 2\nM 2\nH 1 3 1.0\n");
    let o = fock(&["gs", "--file", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    assert_eq!(
        code(&["gs", "--file", s(&dir.path().join("missing.txt"))]),
        2
    );
}

#[test]
fn flags_must_agree_with_the_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HOP);
    assert_eq!(code(&["gs", "--boson", "--file", s(&f)]), 1);
    assert_eq!(code(&["gs", "--fermion", "-N", "2", "--file", s(&f)]), 1);
    assert_eq!(code(&["gs", "--mix", "--file", s(&f)]), 1);
    ok(&["gs", "--fermion", "-N", "1", "-M", "2", "--file", s(&f)]);
}

#[test]
fn ground_state_report() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HUBBARD);
    let out = ok(&[
        "gs",
        "--file",
        s(&f),
        "--oracle",
        "--densities",
        "--seed",
        "4",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["format"], "fock-gs/1");
    assert_eq!(v["dim"], 10);
    let e = v["energy"].as_f64().unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
    assert!(v["oracle"]["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert!((v["oracle"]["energy"].as_f64().unwrap() - e).abs() <= 1e-10);
    let occ: Vec<f64> = serde_json::from_value(v["natural_occupations"].clone()).unwrap();
    assert!((occ.iter().sum::<f64>() - 3.0).abs() < 1e-10);
    assert!(v["rho1"].is_object() && v["rho2"].is_object());
}

#[test]
fn ground_state_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HUBBARD);
    let run = || ok(&["gs", "--file", s(&f), "--workers", "3", "--seed", "9"]);
    assert_eq!(run(), run());
    let out = dir.path().join("gs.json");
    ok(&[
        "gs",
        "--file",
        s(&f),
        "--workers",
        "3",
        "--seed",
        "9",
        "--out",
        s(&out),
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), run());
}

#[test]
fn workers_from_environment() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HOP);
    let with_env = |val: &str, extra: &[&str]| {
        let mut args = vec!["gs", "--file", s(&f)];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_fock"))
            .args(&args)
            .env("FOCK_WORKERS", val)
            .output()
            .unwrap()
    };
    let o = with_env("3", &[]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["workers"], 3);
    let o = with_env("3", &["--workers", "2"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["workers"], 2);
    assert_eq!(with_env("lots", &[]).status.code(), Some(1));
}

#[test]
fn convergence_failure_exits_three() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HUBBARD);
    assert_eq!(code(&["gs", "--file", s(&f), "--max-iter", "2"]), 3);
}

#[test]
fn oracle_refuses_large_spaces() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "big.txt", "STATISTICS FERMION\nN 8\nM 16\n");
    assert_eq!(code(&["gs", "--file", s(&f), "--oracle"]), 1);
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# fock-prop/1"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn zero_operator_gives_a_flat_series() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "zero.txt", "STATISTICS BOSON\nN 2\nM 3\n");
    let out = ok(&[
        "prop",
        "--file",
        s(&f),
        "--init",
        "1,1,0",
        "--dt",
        "0.5",
        "--t-final",
        "2",
    ]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["time", "norm", "energy", "n1", "n2", "n3"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(&r[1..], &[1.0, 0.0, 1.0, 1.0, 0.0]);
    }
}

#[test]
fn rabi_oscillation_series() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HOP);
    let out = ok(&[
        "prop",
        "--file",
        s(&f),
        "--init",
        "10",
        "--dt",
        "0.25",
        "--t-final",
        "5",
        "--oracle",
    ]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header.last().unwrap(), "oracle_dev");
    assert_eq!(rows.len(), 21);
    for r in &rows {
        let c = (0.7 * r[0]).cos();
        assert!((r[3] - c * c).abs() < 1e-10, "t = {}", r[0]);
        assert!((r[1] - 1.0).abs() < 1e-12);
        assert!(r[5] <= 1e-8);
    }
}

#[test]
fn step_failure_exits_four() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "stiff.txt",
        "STATISTICS FERMION\nN 1\nM 3\nH 1 2 1e8\nH 2 1 1e8\nH 2 3 1e8\nH 3 2 1e8\n",
    );
    let args = [
        "prop",
        "--file",
        s(&f),
        "--init",
        "100",
        "--krylov-dim",
        "2",
        "--dt",
        "1",
    ];
    assert_eq!(code(&args), 4);
}

#[test]
fn apply_number_operator_and_zero() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "h.txt", HUBBARD);
    let psi = dir.path().join("psi.bin");
    ok(&["gs", "--file", s(&h), "--save-state", s(&psi)]);

    let mut number = String::from("STATISTICS BOSON\nN 3\nM 3\n");
    for k in 1..=3 {
        number.push_str(&format!("H {k} {k} 1\n"));
    }
    let nfile = write(&dir, "n.txt", &number);
    let out_path = dir.path().join("npsi.bin");
    let report = ok(&[
        "apply",
        "--file",
        s(&nfile),
        "--input",
        s(&psi),
        "--out",
        s(&out_path),
        "--oracle",
    ]);
    let v: Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["format"], "fock-apply/1");
    assert!((v["expectation"]["re"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!(v["oracle"]["max_deviation"].as_f64().unwrap() < 1e-12);

    let input = std::fs::read(&psi).unwrap();
    let output = std::fs::read(&out_path).unwrap();
    assert_eq!(input[..33], output[..33]);
    for (a, b) in input[33..].chunks(8).zip(output[33..].chunks(8)) {
        let a = f64::from_le_bytes(a.try_into().unwrap());
        let b = f64::from_le_bytes(b.try_into().unwrap());
        assert!((3.0 * a - b).abs() < 1e-14);
    }

    let zero = write(&dir, "zero.txt", "STATISTICS BOSON\nN 3\nM 3\n");
    let zero_out = dir.path().join("zero.bin");
    ok(&[
        "apply",
        "--file",
        s(&zero),
        "--input",
        s(&psi),
        "--out",
        s(&zero_out),
    ]);
    let bytes = std::fs::read(&zero_out).unwrap();
    assert!(bytes[33..].iter().all(|&b| b == 0));
}

#[test]
fn apply_rejects_a_foreign_vector() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "h.txt", HUBBARD);
    let psi = dir.path().join("psi.bin");
    ok(&["gs", "--file", s(&h), "--save-state", s(&psi)]);
    let other = write(&dir, "o.txt", HOP);
    assert_eq!(code(&["apply", "--file", s(&other), "--input", s(&psi)]), 1);
    let junk = write(&dir, "junk.bin", "not a vector");
    assert_eq!(code(&["apply", "--file", s(&h), "--input", s(&junk)]), 2);
}

const MIX: &str = "STATISTICS MIX FERMION BOSON\nNA 1\nMA 2\nNB 2\nMB 2\n\
    HA 1 2 -1\nHA 2 1 -1\nHB 1 2 -0.5\nHB 2 1 -0.5\nWB 1 1 1 1 1\nWB 2 2 2 2 1\n\
    X 1 1 1 1 0.8\nX 2 2 2 2 0.8\n";

#[test]
fn mixtures_end_to_end() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "mix.txt", MIX);
    let psi = dir.path().join("mix.bin");
    let gs = ok(&[
        "gs",
        "--mix",
        "-N",
        "1",
        "-M",
        "2",
        "-NB",
        "2",
        "-MB",
        "2",
        "--file",
        s(&f),
        "--oracle",
        "--save-state",
        s(&psi),
    ]);
    let v: Value = serde_json::from_str(&gs).unwrap();
    assert_eq!(v["dim"], 6);
    assert!(v["oracle"]["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert!(v["natural_occupations"]["b"].is_array());

    let report = ok(&["apply", "--file", s(&f), "--input", s(&psi), "--oracle"]);
    let a: Value = serde_json::from_str(&report).unwrap();
    let e = v["energy"].as_f64().unwrap();
    assert!((a["expectation"]["re"].as_f64().unwrap() - e).abs() < 1e-9);

    let out = ok(&[
        "prop",
        "--file",
        s(&f),
        "--init",
        "10/2,0",
        "--t-final",
        "1",
        "--oracle",
    ]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header[3..7], ["nA1", "nA2", "nB1", "nB2"]);
    for r in &rows {
        assert!((r[3] + r[4] - 1.0).abs() < 1e-10);
        assert!((r[5] + r[6] - 2.0).abs() < 1e-10);
        assert!(r[7] <= 1e-8);
    }
    assert_eq!(code(&["gs", "--mix", "-NB", "3", "--file", s(&f)]), 1);
    assert_eq!(code(&["prop", "--file", s(&f), "--init", "10"]), 1);
}

#[test]
fn propagation_final_state_round_trips() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.txt", HOP);
    let fin = dir.path().join("fin.bin");
    let first = ok(&[
        "prop",
        "--file",
        s(&f),
        "--init",
        "10",
        "--t-final",
        "1",
        "--final-state",
        s(&fin),
    ]);
    let second = ok(&[
        "prop",
        "--file",
        s(&f),
        "--state",
        s(&fin),
        "--t-final",
        "1",
    ]);
    let (_, a) = csv_rows(&first);
    let (_, b) = csv_rows(&second);
    assert!((a.last().unwrap()[3] - b[0][3]).abs() < 1e-14);
    // two seconds in total
    let c = (1.4f64).cos();
    assert!((b.last().unwrap()[3] - c * c).abs() < 1e-10);
}
