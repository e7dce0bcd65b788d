use std::path::Path;
use std::process::{Command, Output};

fn difftop(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_difftop"))
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .env_remove("DIFFTOP_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn omega_is_cached_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = difftop(dir.path(), &["omega", "--g", "1", "--n", "1"]);
    assert_eq!(first.status.code(), Some(0));
    assert!(dir.path().join("cache.jsonl").exists());
    let second = difftop(dir.path(), &["omega", "--g", "1", "--n", "1"]);
    assert_eq!(first.stdout, second.stdout);
    let checked = difftop(dir.path(), &["--check-cache", "omega", "--g", "1", "--n", "1"]);
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(first.stdout, checked.stdout);
}

#[test]
fn tampered_cache_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gw", "--g", "0", "--n", "3", "--kmax", "1"];
    assert_eq!(difftop(dir.path(), &args).status.code(), Some(0));
    let path = dir.path().join("cache.jsonl");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("0,0,0,1", "0,0,0,2")).unwrap();
    // plain reads trust the cache, the check recomputes
    assert!(stdout(&difftop(dir.path(), &args)).contains("0,0,0,2"));
    let mut checked = vec!["--check-cache"];
    checked.extend_from_slice(&args);
    assert_eq!(difftop(dir.path(), &checked).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["omega", "--g", "0", "--n", "2"][..],
        &["omega", "--g", "1", "--n", "0"],
        &["omega", "--g", "x", "--n", "1"],
        &["dy", "--kind", "Z", "--hbar", "2", "--terms", "4"],
        &["verify", "nonsense"],
        &["verify", "parity", "--nmax", "9"],
    ] {
        let o = difftop(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failing_clause_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = difftop(dir.path(), &["verify", "parity", "--lambda", "0", "--hbar-order", "3", "--nmax", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["clauses"][0]["pass"], false);
}

#[test]
fn identities_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = difftop(
        dir.path(),
        &["verify", "identities", "--smax", "3", "--pmax", "3", "--report", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["suite"], "identities");
    assert!(rep["clauses"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn q_grid_lives_on_odd_hbar_even_x() {
    let dir = tempfile::tempdir().unwrap();
    let o = difftop(dir.path(), &["dy", "--kind", "Q", "--hbar", "5", "--terms", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 12);
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let h: u32 = cells[0].parse().unwrap();
        for (n, c) in cells[1..].iter().enumerate() {
            if *c != "0" {
                assert!(h % 2 == 1 && n % 2 == 0 && n >= 2, "cell hbar^{h} x^-{n} = {c}");
            }
        }
    }
}

#[test]
fn m_tower_x_form_shows_square_roots() {
    let dir = tempfile::tempdir().unwrap();
    let o = difftop(dir.path(), &["--no-cache", "m", "--order", "2", "--x-form"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["chart"], "x");
    assert_eq!(v["orders"].as_array().unwrap().len(), 3);
    assert!(v["orders"][1]["entries"][0][1].as_str().unwrap().contains("(x^2-4)^(3/2)"));
    assert!(!dir.path().join("cache.jsonl").exists());
}
