//! End-to-end runs through the command-line entry point.

use std::fs;
use std::path::Path;

use fdhap::cli::main_with_args;

const SMALL: &str = r#"
seed = 11

[system]
n_tx = 4
n_rx = 8
k_ul = 2
k_dl = 2
p_ap_db = 10.0

[grids]
alpha = [0.2, 0.5]
r_ul = [0.0, 0.5]
n_tx = [4, 8]

[trials]
rate = 200
region = 2
"#;

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["fdhap".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    main_with_args(full)
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn experiments_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    for cmd in ["validate-bounds", "ul-rate-vs-antennas", "rate-region", "optimize-once"] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        for out in [&a, &b] {
            let code = run(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
            assert_eq!(code, 0, "{cmd}");
        }
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        assert!(!fa.is_empty(), "{cmd} wrote no CSV");
        assert_eq!(fa, fb, "{cmd}");
        assert!(a.join("run_report.json").exists());
    }
}

#[test]
fn every_row_carries_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let code = run(&["validate-bounds", "--config", &cfg, "--seed", "987", "--out", out.to_str().unwrap(), "--trials", "50"],
    );
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_path(out.join("validate_bounds.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "seed");
    let mut rows = 0;
    for rec in rdr.records() {
        assert_eq!(&rec.unwrap()[0], "987");
        rows += 1;
    }
    assert!(rows > 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run_report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 987);
    assert_eq!(report["config"]["trials"]["rate"], 50);
}

#[test]
fn different_seeds_give_different_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&["validate-bounds", "--config", &cfg, "--seed", "1", "--out", a.to_str().unwrap()]), 0);
    assert_eq!(run(&["validate-bounds", "--config", &cfg, "--seed", "2", "--out", b.to_str().unwrap()]), 0);
    assert_ne!(csv_files(&a), csv_files(&b));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();

    let bad_alpha = write_config(tmp.path(), "[system]\nalpha = 1.0\n");
    assert_eq!(run(&["optimize-once", "--config", &bad_alpha, "--out", out]), 2);

    let unknown = write_config(tmp.path(), "[system]\nn_txx = 4\n");
    assert_eq!(run(&["check-config", "--config", &unknown]), 2);

    let short_tau = write_config(tmp.path(), "[system]\nn_tx = 4\nk_dl = 2\ntau = 3\n");
    assert_eq!(run(&["validate-bounds", "--config", &short_tau, "--out", out]), 2);

    let unreachable = write_config(
        tmp.path(),
        "[system]\nn_tx = 4\nn_rx = 8\nk_ul = 2\nk_dl = 2\nr_ul_min = 1000.0\n[grids]\nalpha = [0.5]\n",
    );
    assert_eq!(run(&["optimize-once", "--config", &unreachable, "--out", out]), 3);

    let missing = tmp.path().join("nope.toml");
    assert_ne!(run(&["check-config", "--config", missing.to_str().unwrap()]), 0);

    assert_eq!(run(&["no-such-command"]), 2);
}

#[test]
fn run_uses_the_configured_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let named = write_config(tmp.path(), &format!("experiment = \"validate-bounds\"\n{SMALL}"));
    let out = tmp.path().join("out");
    assert_eq!(run(&["run", "--config", &named, "--out", out.to_str().unwrap()]), 0);
    assert!(out.join("validate_bounds.csv").exists());
    let unnamed = write_config(tmp.path(), SMALL);
    assert_eq!(run(&["run", "--config", &unnamed, "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn empty_config_is_valid() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write_config(tmp.path(), "");
    assert_eq!(run(&["check-config", "--config", &empty]), 0);
}
