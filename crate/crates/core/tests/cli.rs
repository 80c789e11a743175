//! Runs the `todalab` binary and checks outputs and exit codes.

use std::io::Write;
use std::process::{Command, Output};

use todalab::tau::{macmahon, MacMahonProduct};
use todalab::ExactScalar;

fn todalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_todalab")).args(args).env("TODALAB_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn partitions_of_four() {
    let o = todalab(&["partitions", "--n", "4", "--format", "tsv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0], ["partition", "length", "dim", "kappa", "hooks"]);
    assert_eq!(rows.len(), 6);
    let dims: u32 = rows[1..].iter().map(|r| r[2].parse::<u32>().unwrap().pow(2)).sum();
    assert_eq!(dims, 24);
}

#[test]
fn crystal_partition_function_is_macmahon() {
    let o = todalab(&["zcrystal", "--model", "1", "--s", "0", "--W", "5", "--D", "0", "--format", "tsv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("monomial\tQ_degree\tcoefficient"));
    let product = macmahon(MacMahonProduct::Standard, 5);
    let mut seen = 0;
    for line in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols[0], "1");
        let d: i32 = cols[1].parse().unwrap();
        let c: ExactScalar = cols[2].parse().unwrap();
        assert_eq!(c, product.q_coefficient(d).unwrap(), "Q^{d}");
        seen += 1;
    }
    assert_eq!(seen, 6);
    let q1: ExactScalar = "q/(1 - q)^2".parse().unwrap();
    assert_eq!(q1, product.q_coefficient(1).unwrap());
}

#[test]
fn passing_verification_exits_zero() {
    let o = todalab(&["verify", "hirota", "--provider", "cauchy", "--D", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "verify hirota");
}

#[test]
fn failing_verification_exits_one() {
    let o = todalab(&["verify", "hirota", "--provider", "constant", "--D", "2", "--format", "tsv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("# pass\tfalse\n"));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("FAIL:"));
}

#[test]
fn shift_symmetry_literal_form_is_reported_red() {
    let o = todalab(&["verify", "shift-symmetries", "--k", "1", "--m", "0", "--window=-6:6", "--band", "6", "--format", "tsv"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let failing: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && l.split('\t').nth(3) == Some("false")).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|l| l.starts_with("(i) literal")), "{failing:?}");
    assert!(text.lines().any(|l| l.starts_with("(i) split form\t") && l.contains("\ttrue")));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["partitions", "--bogus", "1"][..],
        &["partitions", "--n", "4", "--k", "1"],
        &["zcrystal", "--model", "3", "--s", "0"],
        &["verify", "nothing"],
        &[],
    ] {
        let o = todalab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn config_file_matches_flags() {
    let dir = std::env::temp_dir().join(format!("todalab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("job.json");
    let mut f = std::fs::File::create(&path).unwrap();
    write!(f, r#"{{"command": "schur", "params": {{"lambda": "(2,1)", "mu": "(1)", "D": 3}}, "format": "tsv"}}"#).unwrap();
    drop(f);
    let from_file = todalab(&["--config", path.to_str().unwrap()]);
    let from_flags = todalab(&["schur", "--lambda", "(2,1)", "--mu", "(1)", "--D", "3", "--format", "tsv"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), stdout(&from_flags));
    let both = todalab(&["--config", path.to_str().unwrap(), "partitions", "--n", "2"]);
    assert_eq!(both.status.code(), Some(2));
    std::fs::write(&path, r#"{"command": "schur", "params": {"lambda": "(1)", "colour": 2}}"#).unwrap();
    assert_eq!(todalab(&["--config", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
