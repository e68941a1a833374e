//! End-to-end runs of the compiled binary: every subcommand, every exit code.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const INTERRUPTED: &str = r#"
n = 2
truth = "1/4"
epsilon = "1/4"
alpha_floor = "1/2"
beta_floor = "1/2"
x0 = ["1/2", "1/64"]

[[alphas]]
constant = "1/2"

[[alphas]]
constant = "0"

[weights]
kind = "uniform"
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wasbocos"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_the_exact_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", INTERRUPTED);
    let out_path = dir.path().join("traj.csv");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(
        csv,
        "# truth = 1/4\n# epsilon = 1/4\nt,x_1,x_2\n0,1/2,1/64\n1,3/8,1/64\n2,5/16,1/64\n"
    );
}

#[test]
fn simulate_with_zero_steps_exports_only_the_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", INTERRUPTED);
    let out_path = dir.path().join("traj.csv");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let data_rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with('t')).collect();
    assert_eq!(data_rows, vec!["0,1/2,1/64"]);
}

#[test]
fn decimal_mode_is_lossy_and_conflicts_with_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", INTERRUPTED);
    let out_path = dir.path().join("traj.csv");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        out_path.to_str().unwrap(),
        "--decimal",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.contains("0.500000000000"), "12 significant digits: {csv}");
    assert!(csv.contains("# truth = 1/4"), "metadata stays exact: {csv}");

    let conflict = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        out_path.to_str().unwrap(),
        "--exact",
        "--decimal",
    ]);
    assert_eq!(conflict.status.code(), Some(2), "flag conflict is a usage error");
}

#[test]
fn analyze_writes_one_record_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", INTERRUPTED);
    let out_path = dir.path().join("analysis.csv");
    let out = run(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.contains("lower_vertex,upper_vertex,lower_value,upper_value"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 5, "header + 4 steps");
    assert!(csv.contains("0,2,1,1/64,1/2,15/64,1/4,2,0,"), "t=0 interval structure");
}

#[test]
fn certify_reports_the_single_interruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", INTERRUPTED);
    let out_path = dir.path().join("cert.toml");
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "40",
        "--gamma",
        "1/400",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("converged = true"));
    assert!(report.contains("interruption_count = 1"));
    assert!(report.contains("first_distraction = 5"));
    assert!(report.contains("\"neighborhood-containment\" = \"pass\""));
    assert!(stdout(&out).contains("interruptions = 1"));
}

#[test]
fn certify_exits_one_when_the_tail_never_settles() {
    // A lonely seeker halves its distance each step; three steps cannot
    // reach a 1/1000 tolerance, so the final window never forms.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.toml",
        r#"
n = 1
truth = "1"
epsilon = "1/5"
alpha_floor = "1/2"
beta_floor = "1/2"
x0 = ["0"]

[[alphas]]
constant = "1/2"

[weights]
kind = "matrix"
matrix = [["1/2"]]
"#,
    );
    let out_path = dir.path().join("cert.toml");
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "3",
        "--gamma",
        "1/1000",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "not converged is a finding");
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("converged = false"));
    assert!(stdout(&out).contains("no in-tolerance window"));
}

#[test]
fn certify_rejects_a_population_without_seekers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.toml",
        r#"
n = 1
truth = "1/2"
epsilon = "1/5"
alpha_floor = "1/2"
beta_floor = "1/2"
x0 = ["1/2"]

[[alphas]]
constant = "0"

[weights]
kind = "matrix"
matrix = [["1/2"]]
"#,
    );
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "5",
        "--gamma",
        "1/100",
        "--out",
        dir.path().join("cert.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "nothing to certify is a usage error");
    assert!(stderr(&out).contains("truth seeker"));
}

#[test]
fn reproduce_prints_the_cluster_table_and_passes() {
    let out = run(&["reproduce", "--fixture", "five_clusters"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("t=2: 17/36 17/36 17/36 2 15/4 4 4 17/4 6 271/36 271/36 271/36"));
    assert!(text.contains("fixed point from step 3"));
    assert!(text.trim_end().ends_with("result: pass"));
}

#[test]
fn reproduce_passes_while_flagging_published_claims() {
    let out = run(&["reproduce", "--fixture", "beta_decay"]);
    assert_eq!(out.status.code(), Some(0), "oracle match wins; claims are informational");
    let text = stdout(&out);
    assert!(text.contains("published claim does not hold"));
    assert!(text.contains("result: pass"));
}

#[test]
fn reproduce_rejects_unknown_fixtures() {
    let out = run(&["reproduce", "--fixture", "sixteen_clusters"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("five_clusters"), "lists the valid names");
}

#[test]
fn reproduce_honors_a_shorter_horizon() {
    let out = run(&["reproduce", "--fixture", "five_clusters", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("horizon 2"));
    assert!(!text.contains("t=3:"), "no rows past the horizon");
}

#[test]
fn sweep_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for path in [&a, &b] {
        let out = run(&[
            "sweep",
            "--seed",
            "3",
            "--count",
            "5",
            "--max-n",
            "4",
            "--steps",
            "10",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let first = std::fs::read(&a).unwrap();
    let second = std::fs::read(&b).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, second, "same seed, same bytes");
}

#[test]
fn plot_renders_the_exported_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", INTERRUPTED);
    let csv = dir.path().join("traj.csv");
    let svg = dir.path().join("traj.svg");
    let sim = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(sim.status.code(), Some(0));
    let out = run(&["plot", "--in", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let image = std::fs::read_to_string(&svg).unwrap();
    assert!(image.starts_with("<svg"));
    assert_eq!(image.matches("<polyline").count(), 2, "one polyline per agent");
    assert!(stdout(&out).contains("plotted 2 series over 6 steps"));
}

#[test]
fn plot_with_a_missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "plot",
        "--in",
        dir.path().join("nope.csv").to_str().unwrap(),
        "--out",
        dir.path().join("x.svg").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_syntax_errors_carry_position_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", "n = 2\ntruth = ???\n");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "got: {}", stderr(&out));
}

#[test]
fn out_of_range_opinions_fail_validation_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = INTERRUPTED.replace("x0 = [\"1/2\", \"1/64\"]", "x0 = [\"3/2\", \"1/64\"]");
    let cfg = write_cfg(dir.path(), "c.toml", &bad);
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x0"), "names the offending field: {}", stderr(&out));
}
