use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_matchlaw"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const SMALL: &str = r#"
master_seed = 5

[[experiment]]
name = "small-coin"
kind = "lcs_law"
trials = 6
schedule = { log2_start = 6, log2_end = 10 }
source = { type = "iid", probs = [0.5, 0.5] }
tolerance = { relative = 0.5 }
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn writes_csv_and_exits_zero_when_gates_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("rows.csv");
    let o = run(&["lcs-law"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("experiment,trial,n,statistic,log_n,theory_limit"));
    assert_eq!(lines.count(), 6 * 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS slope"));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let outs: Vec<Vec<u8>> = ["1", "1", "3"]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let out = dir.path().join(format!("r{i}.csv"));
            run(&["lcs-law", "--threads", t], &cfg, &out);
            std::fs::read(out).unwrap()
        })
        .collect();
    assert!(!outs[0].is_empty());
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
}

#[test]
fn seed_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run(&["lcs-law"], &cfg, &a);
    run(&["lcs-law", "--seed", "6"], &cfg, &b);
    assert_ne!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn failing_gate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(
        "tolerance = { relative = 0.5 }",
        "theory_limit = 100.0\ntolerance = { absolute = 0.01 }",
    );
    let cfg = write(dir.path(), "fail.toml", &text);
    let o = run(&["lcs-law"], &cfg, &dir.path().join("x.csv"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL slope"));
}

#[test]
fn wrong_subcommand_and_bad_config_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let o = run(&["orbit-law"], &cfg, &dir.path().join("x.csv"));
    assert_eq!(o.status.code(), Some(2));
    let bad = write(
        dir.path(),
        "bad.toml",
        "[[experiment]]\nname = \"x\"\nkind = \"nope\"\n",
    );
    let o = run(&["lcs-law"], &bad, &dir.path().join("y.csv"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn committed_collapse_demo_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&["orbit-law"], &repo_config("collapse.toml"), &out);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("collapse detected"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("inf")));
}

#[test]
fn quick_selftest_passes() {
    let o = bin().args(["selftest", "--quick"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.lines().count() >= 6 && text.lines().all(|l| l.starts_with("PASS")),
        "{text}"
    );
}
