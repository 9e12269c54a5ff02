use std::path::Path;
use std::process::Command;

const SMALL: &str = r#"
seed = 7
[charge]
family = "reference"
radius = 1.5
[grid]
n = 16
l = 8.0
[initial]
b = [0.2, -0.1, 0.0]
v = [0.3, 0.0, 0.0]
[initial.perturbation]
kind = "bump"
amplitude = 1e-3
width = 0.5
[integrator]
dt = 0.02
t_final = 2.0
output_stride = 10
[analysis]
fit_window = [0.5, 2.0]
extraction_times = [0.5, 1.0, 2.0]
"#;

fn mlsim(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_mlsim")).args(args).output().expect("runs");
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn simulate_is_bit_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(mlsim(&["simulate", "--config", &cfg, "--out-dir", d.to_str().unwrap()]), 0);
    }
    let csv_a = std::fs::read(a.join("run_samples.csv")).unwrap();
    let csv_b = std::fs::read(b.join("run_samples.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let header = String::from_utf8_lossy(&csv_a).lines().next().unwrap().to_owned();
    assert!(header.starts_with("t [time],q_x [length]"));

    let fit = mlsim(&[
        "fit-decay",
        "--input",
        a.join("run_samples.csv").to_str().unwrap(),
        "--y",
        "Z_decay",
        "--window",
        "0.5,2",
    ]);
    assert_eq!(fit, 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mlsim(&["no-such-command"]), 1);
    assert_eq!(mlsim(&["simulate", "--config", "/nonexistent/config.toml"]), 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[grid]\nn = 16\nl = 8.0\nbogus = 1\n");
    assert_eq!(mlsim(&["soliton", "--config", &bad]), 1);
}

#[test]
fn non_neutral_density_is_a_physics_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ball = write(dir.path(), "ball.toml", "[charge]\nfamily = \"ball\"\nradius = 1.0\ncharge = 1.0\n");
    assert_eq!(mlsim(&["check-rho", "--config", &ball, "--out-dir", out]), 2);
    assert_eq!(mlsim(&["check-rho", "--out-dir", out]), 0);
}

#[test]
fn soliton_snapshots_feed_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().to_str().unwrap();
    assert_eq!(mlsim(&["soliton", "--config", &cfg, "--out-dir", out, "--t-final", "1"]), 0);
    let snap = dir.path().join("run_soliton.snap");
    let fin = dir.path().join("run_soliton_final.snap");
    let s0 = format!("0={}", snap.display());
    let s1 = format!("1={}", fin.display());
    let s2 = format!("2={}", fin.display());
    let code = mlsim(&[
        "scatter",
        "--config",
        &cfg,
        "--out-dir",
        out,
        "--snapshot",
        &s0,
        "--snapshot",
        &s1,
        "--snapshot",
        &s2,
    ]);
    assert_eq!(code, 0);
    assert!(dir.path().join("run_scatter.json").exists());
}

#[test]
fn spectral_sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        mlsim(&[
            "spectral",
            "--out-dir",
            out,
            "--omega-min",
            "0.5",
            "--omega-max",
            "2",
            "--points",
            "4",
            "--threads",
            "2"
        ]),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("run_spectral.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("omega [1/time],re_c1 [1]"));
    assert_eq!(mlsim(&["spectral", "--out-dir", out, "--omega-min", "-1", "--omega-max", "1", "--log"]), 1);
}
