use std::path::Path;
use std::process::{Command, Output};

const SCALAR: &str = r#"
[scenario]
n_tx = 1
n_rx = 1
n_info = 1
n_eh = 1
noise_power_dbm = 30
p_max_dbm = 36.02059991327962
sinr_req_db = 0
cap_limit_bps_hz = 1
efficiency = 0.5

[channels]
h = [[[1.0, 0.0]]]
g = [[[[1.0, 0.0]]]]
"#;

fn swipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_scalar_instance_and_check_saved_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "scalar.toml", SCALAR);
    let out = dir.path().join("sol.json");
    let dump = dir.path().join("p.dump");
    let log = dir.path().join("iter.log");
    let o = swipt(&[
        "solve",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--dump",
        dump.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("status      optimal"));
    assert!(text.contains("harvested 2.000000e0 W"), "{text}");
    assert!(std::fs::read_to_string(&dump).unwrap().starts_with("# swipt-sdp 1"));
    assert!(std::fs::read_to_string(&log)
        .unwrap()
        .trim_end()
        .ends_with("status: optimal"));

    let o = swipt(&["check", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("result              pass"));

    let json = std::fs::read_to_string(&out).unwrap();
    let tampered = json.replacen("\"status\": \"optimal\"", "\"status\": \"iter_limit\"", 1);
    let bad = write(dir.path(), "bad.json", &tampered);
    assert_eq!(swipt(&["check", &bad]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[scenario]\nn_tx = \"eight\"\n");
    assert_eq!(swipt(&["solve", &bad]).status.code(), Some(2));
    assert_eq!(swipt(&["sweep", &bad]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.toml", "[sweep]\nn_trial = 3\n");
    assert_eq!(swipt(&["sweep", &unknown]).status.code(), Some(2));
    assert_eq!(swipt(&["solve", "/nonexistent/file.toml"]).status.code(), Some(2));
    let junk = write(dir.path(), "junk.json", "{}");
    assert_eq!(swipt(&["check", &junk]).status.code(), Some(2));
}

#[test]
fn infeasible_runs_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "hard.toml",
        &SCALAR.replace("sinr_req_db = 0", "sinr_req_db = 10"),
    );
    let o = swipt(&["solve", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("status      infeasible"));

    let sweep = format!("{SCALAR}\n[sweep]\ngamma_db = [10, 20]\nn_tx = [1]\nn_trials = 2\nschemes = [\"optimal\"]\n");
    let cfg = write(dir.path(), "sweep.toml", &sweep);
    assert_eq!(swipt(&["sweep", &cfg, "--quiet"]).status.code(), Some(3));
}

#[test]
fn sweep_writes_csv_with_fixed_columns_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "[scenario]\nn_tx = 4\nn_info = 2\nn_eh = 1\n\n[sweep]\ngamma_db = [0, 5]\nn_tx = [4]\nn_trials = 2\nseed = 9\n",
    );
    let mut runs = Vec::new();
    for i in 0..2 {
        let csv = dir.path().join(format!("t{i}.csv"));
        let summary = dir.path().join(format!("s{i}.csv"));
        let o = swipt(&[
            "sweep",
            &cfg,
            "--quiet",
            "--csv",
            csv.to_str().unwrap(),
            "--summary",
            summary.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&csv).unwrap();
        let rows: Vec<String> = text
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        runs.push((rows, std::fs::read_to_string(&summary).unwrap()));
    }
    let (rows, summary) = &runs[0];
    assert_eq!(
        rows[0],
        "trial,seed,gamma_req_db,n_tx,scheme,status,min_harvested_dbm,mean_secrecy_bps_hz,infeasible_flag,c2_violation_flag,solve_iters"
    );
    assert_eq!(rows.len(), 1 + 2 * 2 * 3);
    assert_eq!(summary.lines().count(), 1 + 2 * 3);
    assert_eq!(runs[0], runs[1]);
}
