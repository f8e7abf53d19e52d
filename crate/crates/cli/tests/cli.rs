use std::path::Path;
use std::process::{Command, Output};

use micromaser_cli::{load, run, CliError};

fn micromaser(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_micromaser"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("sweep.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const TRAPPED: &str = r#"
name = "trapped"

[sweep]
axis = "nex"
min = 0.1
max = 50
steps = 50
spacing = "log"
methods = ["direct", "spectral"]
windows = ["inf", "N=20;t=5"]

[params]
gt_int = "pi/sqrt(2)"
nbar = 0
p = 0.5
"#;

#[test]
fn a_sweep_writes_one_row_per_point_method_and_window() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TRAPPED);
    let out = micromaser(&["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trapped.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 50 * 2 * 2);
    assert_eq!(lines[0], micromaser_cli::output::HEADER);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
    assert!(lines[1].starts_with("0.1,"));
    assert!(lines.last().unwrap().starts_with("50,"));
    let script = std::fs::read_to_string(dir.path().join("trapped.gp")).unwrap();
    assert!(script.contains("set logscale x"));
    assert!(script.contains("\"trapped.csv\""));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let path = write_config(a.path(), TRAPPED);
    let sets = ["sweep.steps=6".to_string()];
    let cfg = load(Some(&path), None, &sets).unwrap();
    run(&cfg, a.path()).unwrap();
    let cfg = load(Some(&path), None, &sets).unwrap();
    run(&cfg, b.path()).unwrap();
    for f in ["trapped.csv", "trapped.gp"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn impossible_parameters_fail_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = micromaser(&[
        "run",
        "--recipe",
        "fig3",
        "--set",
        "p=1.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!out_dir.exists());
}

#[test]
fn misspelled_keys_get_a_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &TRAPPED.replace("nbar = 0", "nbr = 0"));
    match load(Some(&path), None, &[]) {
        Err(CliError::UnknownKey { key, suggestion }) => {
            assert!(key.ends_with("nbr"));
            assert_eq!(suggestion.as_deref(), Some("params.nbar"));
        }
        other => panic!("{other:?}"),
    }
    let out = micromaser(&["run", "--recipe", "fig1", "--set", "stpes=5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps"));
}

#[test]
fn unknown_recipes_are_rejected_with_a_suggestion() {
    let out = micromaser(&["show-recipe", "fig01"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig1"));
}

#[test]
fn recipes_are_listed_and_printable() {
    let out = micromaser(&["list-recipes"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 15);
    let out = micromaser(&["show-recipe", "fig14"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let table: toml::Table = text.parse().unwrap();
    assert_eq!(table["name"].as_str(), Some("fig14"));
}

#[test]
fn monte_carlo_sweeps_depend_only_on_the_seed() {
    let text = r#"
name = "mc"
seed = 11

[sweep]
axis = "nex"
min = 0.5
max = 2
steps = 3
methods = ["monte_carlo", "direct"]
windows = ["N=10;t=5"]

[params]
gt_int = 1.54
nbar = 0.1
p = 0

[monte_carlo]
trajectories = 1000
"#;
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), text);
    let serial = load(Some(&path), None, &["jobs=1".into()]).unwrap();
    let parallel = load(Some(&path), None, &["jobs=3".into()]).unwrap();
    let reseeded = load(Some(&path), None, &["seed=12".into()]).unwrap();
    let csv = |c| micromaser_cli::output::csv(&micromaser_cli::sweep::evaluate(c).unwrap());
    let a = csv(&serial);
    assert_eq!(a, csv(&parallel));
    assert_ne!(a, csv(&reseeded));
    assert_eq!(a.lines().count(), 1 + 3 * 2);
    assert!(a.lines().skip(1).all(|l| l.ends_with(",ok")));
}
