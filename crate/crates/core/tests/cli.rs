use std::fs;
use std::process::{Command, Output};

use hermite_gutzmer::cli::report_body;

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gutzmer-verify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn mehler_suite_passes() {
    let o = verify(&["mehler"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().next().unwrap().contains("\"header\""));
    assert!(out.lines().last().unwrap().contains("\"failures\":0"));
}

#[test]
fn zero_tolerance_reports_failures() {
    let o = verify(&["gutzmer", "--n", "1", "--seed", "3", "--grid-points", "4", "--rtol", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL gutzmer/"));
}

#[test]
fn negative_truncation_is_a_config_error() {
    let o = verify(&["lemmas", "--k-max", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k_max"), "{}", stderr(&o));
}

#[test]
fn config_file_errors_name_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "n = 1\nseed = 5\nmc_samples = 0\n").unwrap();
    let o = verify(&["gutzmer", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("mc_samples") && e.contains("line 3"), "{e}");
}

#[test]
fn monte_carlo_suites_need_a_seed() {
    let o = verify(&["kaverage", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn reports_are_deterministic_apart_from_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let out = dir.path().join(name);
        let o = verify(&[
            "gutzmer", "--n", "2", "--seed", "11", "--mc-samples", "200", "--grid-points", "2",
            "--functions", "1", "--mc-budget", "1", "--out", out.to_str().unwrap(),
        ]);
        assert_ne!(o.status.code(), Some(2), "{}", stderr(&o));
        bodies.push(fs::read_to_string(out).unwrap());
    }
    assert_eq!(report_body(&bodies[0]), report_body(&bodies[1]));
    assert!(report_body(&bodies[0]).lines().count() >= 4);
}

#[test]
fn truncated_expansion_file_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    fs::write(&path, "hermite-expansion 1\nn 2\nk_max 3\n0 0 1 0\n1 0 0.5\n").unwrap();
    let o = verify(&["expansion", "show", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn random_expansion_round_trips_through_show() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.txt");
    let p = path.to_str().unwrap();
    let o = verify(&["expansion", "random", "--n", "2", "--k-max", "4", "--seed", "9", "--out", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = verify(&["expansion", "show", p]);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("n = 2\nk_max = 4\n"), "{out}");
}

#[test]
fn fixture_norm() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/h0_plus_half_h3.txt");
    let o = verify(&["expansion", "show", path]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("norm^2 = 1.25"));
}
