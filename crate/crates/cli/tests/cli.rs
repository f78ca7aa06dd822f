use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ffrestrict"));
    for (k, _) in std::env::vars() {
        if k.starts_with("FFR_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn mlem1_verify_emits_one_row_per_trial() {
    let o = run(&["verify", "--p", "3,5", "--d", "4", "--suites", "mlem1", "--trials", "500", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("suite,p,d,case,lhs,rhs,ratio,pass,seed,ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r.split(',').nth(7) == Some("true")));
}

#[test]
fn characteristic_two_is_a_usage_error() {
    let o = run(&["verify", "--p", "2", "--d", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("characteristic 2"));
}

#[test]
fn identities_suite_passes() {
    let o = run(&["verify", "--p", "3", "--d", "2", "--suites", "identities", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains(",parseval-0,"));
    assert!(out.contains(",orthogonality-0,"));
}

#[test]
fn empty_suite_list_is_rejected() {
    assert_eq!(run(&["scan", "--suites", ""]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suites", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn scan_appends_max_rows() {
    let o = run(&["scan", "--p", "3", "--d", "4", "--suites", "energy,pipeline", "--trials", "4", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let maxes: Vec<&str> = out.lines().filter(|l| l.split(',').nth(3) == Some("max")).collect();
    assert_eq!(maxes.len(), 2);
}

#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["verify", "--p", "3,5", "--d", "2,4", "--trials", "3", "--seed", "7", "--out"];
    for dir in [&a, &b] {
        let mut full: Vec<&str> = args.to_vec();
        full.push(dir.path().to_str().unwrap());
        assert_eq!(run(&full).status.code(), Some(0));
    }
    for file in ["report.csv", "report.ndjson"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file} differs between runs");
    }
}

#[test]
fn records_format_is_json_lines() {
    let o = run(&["verify", "--p", "3", "--d", "2", "--suites", "charsums", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        assert!(line.starts_with("{\"suite\":\"charsums\""), "{line}");
    }
}

#[test]
fn precedence_flag_env_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "p = 5\nd = 2\nsuites = charsums\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let p_of = |o: &Output| stdout(o).lines().nth(1).unwrap().split(',').nth(1).unwrap().to_string();

    let from_file = run(&["verify", "--config", cfg]);
    assert_eq!(p_of(&from_file), "5");

    let from_env = bin().args(["verify", "--config", cfg]).env("FFR_P", "7").output().unwrap();
    assert_eq!(p_of(&from_env), "7");

    let from_flag = bin().args(["verify", "--config", cfg, "--p", "3"]).env("FFR_P", "7").output().unwrap();
    assert_eq!(p_of(&from_flag), "3");
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let o = run(&["verify", "--p", "3", "--d", "2", "--suites", "charsums", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn norms_and_subspace_commands() {
    let o = run(&["norms", "--p", "3", "--d", "2", "--p-exp", "2", "--r", "4", "--iters", "20", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let best: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
    assert!((1.0..=4.0).contains(&best), "{line}");

    let o = run(&["subspace", "--p", "3", "--d", "4", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("flat-k1-[1 1 1 0]"));

    assert_eq!(run(&["subspace", "--p", "3", "--d", "4", "--k", "3"]).status.code(), Some(2));
    assert_eq!(run(&["norms", "--p", "3", "--d", "2", "--r", "1"]).status.code(), Some(2));
}
