//! Command-line front end: simulate, analyze, certify, reproduce, sweep, plot.
//!
//! Exit status: 0 = success / all checks pass, 1 = a monitor or oracle
//! finding, 2 = usage or IO error (clap uses 2 for bad invocations too).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wasbocos::config_io::read_config;
use wasbocos::export::{analysis_csv, plot_svg, read_trajectory_csv, trajectory_csv, NumberFormat};
use wasbocos::fixtures::{check_fixture, fixture, FixtureId};
use wasbocos::model::{simulate, validate_config, SystemConfig, Trajectory};
use wasbocos::rational::{parse_rational, render_rational};
use wasbocos::sweep::{run_sweep, SweepKind, SweepParams};
use wasbocos::verify::{
    analyze_trajectory, certify_convergence, ConvergenceCertificate, MonitorReport, Verdict,
};

#[derive(Parser)]
#[command(name = "wasbocos", version, about = "Exact-arithmetic opinion dynamics with truth seekers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured system and export the trajectory as CSV
    Simulate(SimulateArgs),
    /// Export the per-step interval structure (end vertices, side lengths, bands)
    Analyze(AnalyzeArgs),
    /// Run all monitors and write a convergence certificate
    Certify(CertifyArgs),
    /// Re-run a built-in worked example against its stored oracle
    Reproduce(ReproduceArgs),
    /// Push seeded random configurations through every monitor
    Sweep(SweepArgs),
    /// Render an exported trajectory CSV as a static SVG
    Plot(PlotArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML system description
    #[arg(long)]
    config: PathBuf,
    /// Number of update steps (the export always includes the t=0 row)
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
    /// Write opinions as exact rationals p/q (the default)
    #[arg(long, conflicts_with = "decimal")]
    exact: bool,
    /// Write opinions as 12-significant-digit decimals (lossy)
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    steps: usize,
    /// Tolerance, an exact rational like 1/400
    #[arg(long)]
    gamma: String,
    /// Required length of the final in-tolerance window (defaults from the floors)
    #[arg(long)]
    tail: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of: interrupted_2agent, five_clusters, asymmetric_pair,
    /// single_seeker, reordering, beta_decay, symmetry_note
    #[arg(long)]
    fixture: String,
    /// Override the fixture's default horizon
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Trajectory CSV produced by `simulate`
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Anything that should stop the run: `Usage` exits 2, `Finding` exits 1.
enum Failure {
    Usage(String),
    Finding(String),
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn load_config(path: &Path) -> Result<SystemConfig, Failure> {
    let cfg = read_config(path).map_err(usage)?;
    let report = validate_config(&cfg);
    if !report.ok() {
        let mut msg = format!("invalid configuration ({} problem(s)):", report.violations.len());
        for v in &report.violations {
            let _ = write!(msg, "\n  {v}");
        }
        return Err(Failure::Usage(msg));
    }
    Ok(cfg)
}

fn run_trajectory(cfg: &SystemConfig, steps: usize) -> Result<Trajectory, Failure> {
    simulate(cfg, steps, None).map_err(usage)
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<String, Failure> {
    let cfg = load_config(&args.config)?;
    let traj = run_trajectory(&cfg, args.steps)?;
    let format = if args.decimal { NumberFormat::Decimal } else { NumberFormat::Exact };
    write_out(&args.out, &trajectory_csv(&traj, format))?;
    Ok(format!("wrote {} rows to {}", traj.states.len(), args.out.display()))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<String, Failure> {
    let cfg = load_config(&args.config)?;
    let traj = run_trajectory(&cfg, args.steps)?;
    let analysis = analyze_trajectory(&traj).map_err(usage)?;
    write_out(&args.out, &analysis_csv(&traj, &analysis, NumberFormat::Exact))?;
    Ok(format!("wrote {} step records to {}", analysis.steps.len(), args.out.display()))
}

fn verdict_text(report: &MonitorReport) -> String {
    match report.verdict {
        Verdict::Pass => "pass".to_string(),
        Verdict::Vacuous if report.note.is_empty() => "vacuous".to_string(),
        Verdict::Vacuous => format!("vacuous ({})", report.note),
        Verdict::Fail => match report.first_violation() {
            Some(t) => format!("fail at step {t}"),
            None => "fail".to_string(),
        },
    }
}

fn render_certificate(cert: &ConvergenceCertificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "gamma = \"{}\"", render_rational(&cert.gamma));
    let _ = writeln!(out, "tail_window = {}", cert.tail_window);
    let _ = writeln!(out, "horizon = {}", cert.distances.len().saturating_sub(1));
    let _ = writeln!(out, "converged = {}", cert.converged);
    let _ = writeln!(out, "interruption_count = {}", cert.interruption_count);
    if let Some(t) = cert.first_distraction {
        let _ = writeln!(out, "first_distraction = {t}");
    }
    let windows: Vec<String> = cert.windows.iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
    let _ = writeln!(out, "windows = [{}]", windows.join(", "));
    if let Some(d) = cert.distances.last() {
        let _ = writeln!(out, "final_distance = \"{}\"", render_rational(d));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[envelope]");
    let _ = writeln!(out, "bound_step = \"{}\"", cert.envelope.bound_step);
    let _ = writeln!(out, "applicable = {}", cert.envelope.applicable);
    if let Some(t) = cert.envelope.pre_holds_through {
        let _ = writeln!(out, "pre_holds_through = {t}");
    }
    if let Some(t) = cert.envelope.fitted_switch {
        let _ = writeln!(out, "fitted_switch = {t}");
    }
    if let Some(ok) = cert.envelope.post_holds {
        let _ = writeln!(out, "post_holds = {ok}");
    }
    let _ = writeln!(out, "note = \"{}\"", cert.envelope.note);
    let _ = writeln!(out);
    let _ = writeln!(out, "[monitors]");
    for report in &cert.monitor_verdicts {
        let _ = writeln!(out, "\"{}\" = \"{}\"", report.monitor, verdict_text(report));
    }
    out
}

fn cmd_certify(args: &CertifyArgs) -> Result<String, Failure> {
    let cfg = load_config(&args.config)?;
    let gamma = parse_rational(&args.gamma)
        .map_err(|e| Failure::Usage(format!("--gamma {}: {e}", args.gamma)))?;
    let traj = run_trajectory(&cfg, args.steps)?;
    let cert = certify_convergence(&traj, &gamma, args.tail).map_err(usage)?;
    write_out(&args.out, &render_certificate(&cert))?;
    let mut pass = 0usize;
    let mut vacuous = 0usize;
    let mut failed: Vec<&str> = Vec::new();
    for report in &cert.monitor_verdicts {
        match report.verdict {
            Verdict::Pass => pass += 1,
            Verdict::Vacuous => vacuous += 1,
            Verdict::Fail => failed.push(report.monitor),
        }
    }
    let summary = format!(
        "wrote certificate to {}\nconverged = {}; interruptions = {}; monitors: {} pass, {} vacuous, {} fail",
        args.out.display(),
        cert.converged,
        cert.interruption_count,
        pass,
        vacuous,
        failed.len()
    );
    if !failed.is_empty() {
        return Err(Failure::Finding(format!(
            "{summary}\nfailing monitors: {}",
            failed.join(", ")
        )));
    }
    if !cert.converged {
        return Err(Failure::Finding(format!(
            "{summary}\nno in-tolerance window of at least {} steps reaches the horizon",
            cert.tail_window
        )));
    }
    Ok(summary)
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<String, Failure> {
    let id = FixtureId::parse(&args.fixture).ok_or_else(|| {
        let names: Vec<&str> = FixtureId::ALL.iter().map(|f| f.name()).collect();
        Failure::Usage(format!(
            "unknown fixture \"{}\"; expected one of: {}",
            args.fixture,
            names.join(", ")
        ))
    })?;
    let fx = fixture(id);
    let horizon = args.steps.unwrap_or(fx.default_horizon);
    let report = check_fixture(id, horizon);
    let traj = fx.trajectory(horizon);
    let eps = &fx.config.epsilon;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "fixture {}: n={}, epsilon = {}, horizon {}",
        id.name(),
        fx.config.n,
        render_rational(eps),
        horizon
    );
    let _ = writeln!(out, "opinions in units of epsilon:");
    for state in &traj.states {
        let row: Vec<String> = state.x.iter().map(|x| render_rational(&(x / eps))).collect();
        let _ = writeln!(out, "t={}: {}", state.t, row.join(" "));
    }
    if let Some(t) = traj.stabilized_at() {
        let _ = writeln!(out, "fixed point from step {t}");
    }
    for line in report.lines(eps) {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "result: {}", if report.passed() { "pass" } else { "FAIL" });
    if report.passed() {
        Ok(out.trim_end().to_string())
    } else {
        Err(Failure::Finding(out.trim_end().to_string()))
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<String, Failure> {
    let params = SweepParams {
        seed: args.seed,
        count: args.count,
        max_n: args.max_n,
        steps: args.steps,
    };
    let report = run_sweep(&params, SweepKind::FixedHorizon);
    write_out(&args.out, &report.text)?;
    let summary = format!(
        "wrote findings to {}\nsummary: instances={} flagged={} monitor_findings={}",
        args.out.display(),
        report.instances,
        report.flagged_instances,
        report.findings.len()
    );
    if report.flagged_instances == 0 {
        Ok(summary)
    } else {
        Err(Failure::Finding(summary))
    }
}

fn cmd_plot(args: &PlotArgs) -> Result<String, Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let data = read_trajectory_csv(&text).map_err(usage)?;
    write_out(&args.out, &plot_svg(&data))?;
    Ok(format!(
        "plotted {} series over {} steps to {}",
        data.series.len(),
        data.steps(),
        args.out.display()
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Plot(args) => cmd_plot(args),
    };
    // Ignore stdout errors so `wasbocos ... | head` dies quietly, not loudly.
    let mut stdout = std::io::stdout();
    match result {
        Ok(message) => {
            let _ = writeln!(stdout, "{message}");
            ExitCode::SUCCESS
        }
        Err(Failure::Finding(message)) => {
            let _ = writeln!(stdout, "{message}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
