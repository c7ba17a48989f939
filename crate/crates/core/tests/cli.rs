use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lorentz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentz")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_in(dir: &TempDir, experiment: &str, config: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let out = dir.path().join(format!("out-{}", extra.join("-")));
    let cfg = write_config(dir.path(), config);
    let mut args = vec![experiment, "--config", &cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (lorentz(&args), out)
}

const SMALL_FLIGHTS: &str = "rho = [0.02]\nsamples = 6000\npaths = 20\ncollisions = 10\nblock = 500\n";

#[test]
fn trajectory_dump_writes_stamped_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let (res, out) = run_in(&dir, "trajectory-dump", SMALL_FLIGHTS, &["--seed", "7"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("PASS seed=7 flight_chains_admissible"));

    let chains = fs::read_to_string(out.join("flight-chains.csv")).unwrap();
    let mut lines = chains.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# lorentz "), "{header}");
    assert!(header.contains("experiment=trajectory-dump") && header.ends_with("seed=7"));
    assert_eq!(lines.next(), Some("path_id,j,Sx,Sy,T_j"));
    assert_eq!(lines.count(), 20 * 11);

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "trajectory-dump");
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["runs"][0]["seed"], 7);
    let hash = summary["config_hash"].as_str().unwrap();
    assert!(header.contains(&format!("config={hash}")));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let (a, out_a) = run_in(&dir, "semigroup", SMALL_FLIGHTS, &["--workers", "1"]);
    let (b, out_b) = run_in(&dir, "semigroup", SMALL_FLIGHTS, &["--workers", "4"]);
    assert_eq!(a.status.code(), b.status.code());
    for file in ["semigroup.csv", "summary.json"] {
        let x = fs::read(out_a.join(file)).unwrap();
        let y = fs::read(out_b.join(file)).unwrap();
        assert!(x == y, "{file} differs between worker counts");
    }
}

#[test]
fn several_seeds_get_their_own_directories() {
    let dir = TempDir::new().unwrap();
    let (res, out) = run_in(&dir, "trajectory-dump", &format!("{SMALL_FLIGHTS}seeds = [3, 4]\n"), &[]);
    assert_eq!(res.status.code(), Some(0));
    for seed in [3, 4] {
        let csv = fs::read_to_string(out.join(format!("seed-{seed}")).join("billiard-trajectory.csv")).unwrap();
        assert!(csv.lines().next().unwrap().ends_with(&format!("seed={seed}")));
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn failed_check_exits_with_one() {
    // 1000 free paths cannot reach a KS distance below 0.01.
    let dir = TempDir::new().unwrap();
    let (res, out) = run_in(&dir, "poisson-baseline", "rho = [0.05]\nsamples = 1000\n", &[]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8(res.stdout).unwrap().contains("FAIL"));
    assert!(out.join("summary.json").exists());
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let (res, _) = run_in(&dir, "no-such-experiment", SMALL_FLIGHTS, &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("unknown experiment"));

    for (body, field) in [("seeds = []\n", "seeds"), ("rho = [0.7]\n", "rho"), ("sample = 10\n", "sample"), ("alpha = 2.0\n", "alpha")] {
        let (res, _) = run_in(&dir, "semigroup", body, &[]);
        assert_eq!(res.status.code(), Some(2), "{body}");
        let err = String::from_utf8(res.stderr).unwrap();
        assert!(err.contains(field), "{body}: {err}");
    }

    let missing = dir.path().join("missing.toml");
    let res = lorentz(&["semigroup", "--config", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}
