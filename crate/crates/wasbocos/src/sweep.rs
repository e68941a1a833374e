//! Seeded random configurations and a sweep harness that drives every
//! monitor over them.
//!
//! The sampler only draws strict-mode configs with denominators ≤ 64, so
//! exact arithmetic stays small across desk-scale horizons. Any instance
//! with a failing monitor is shrunk by greedy agent removal to a minimal
//! reproducing config, and the whole run is rendered to a deterministic
//! findings file: same parameters, byte-identical text.

use crate::config_io::render_config;
use crate::model::{
    agent_kinds, simulate, validate_config, AlphaRule, BetaRule, BoundsMode, OpinionState,
    SimError, StopRule, SystemConfig, Trajectory,
};
use crate::rational::{rat, Rational};
use crate::structure::analyze_step;
use crate::verify::{
    analyze_trajectory, phase_bounds, phase_one_margin, run_all_monitors, run_monitors_with,
    Verdict,
};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// How instance horizons are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Every instance runs exactly `steps` steps.
    FixedHorizon,
    /// Every instance runs to its own phase-one deadline (capped at
    /// [`PHASE_ONE_CAP`]), stopping early once the hope interval has settled
    /// into the target band. Parameters are kept small enough that the
    /// deadline itself stays under the cap, and a truth seeker is always
    /// present because the deadline is only promised when one exists.
    PhaseOneBound,
}

impl SweepKind {
    fn name(&self) -> &'static str {
        match self {
            SweepKind::FixedHorizon => "fixed-horizon",
            SweepKind::PhaseOneBound => "phase-one-bound",
        }
    }
}

/// Ceiling on any phase-one horizon actually simulated.
pub const PHASE_ONE_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepParams {
    pub seed: u64,
    pub count: usize,
    pub max_n: usize,
    /// Horizon for [`SweepKind::FixedHorizon`]; ignored by the phase-one kind.
    pub steps: usize,
}

fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())].clone()
}

fn sixty_fourth(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(0..=64), 64)
}

fn seeker_alpha(rng: &mut ChaCha8Rng, floor: &Rational) -> AlphaRule {
    // halfway between the floor and full attraction
    let lifted = (Rational::one() + floor) / rat(2, 1);
    let choices = [floor.clone(), lifted, Rational::one()];
    if rng.gen_bool(0.3) {
        AlphaRule::Cycle(vec![pick(rng, &choices), pick(rng, &choices)])
    } else {
        AlphaRule::Constant(pick(rng, &choices))
    }
}

fn sample_fixed(rng: &mut ChaCha8Rng, max_n: usize) -> SystemConfig {
    let n = rng.gen_range(1..=max_n.max(1));
    let q = pick(rng, &[4i64, 8, 16, 32]);
    let epsilon = rat(rng.gen_range(1..=q / 2), q);
    let truth = sixty_fourth(rng);
    let alpha_floor = pick(rng, &[rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4)]);
    let (weights, beta_floor) = if n == 1 {
        // uniform weights would pin the single weight at 1, outside any
        // strict band; a half self-weight normalizes away and stays in band
        (BetaRule::Matrix(vec![vec![rat(1, 2)]]), rat(1, 2))
    } else if rng.gen_bool(0.5) {
        (BetaRule::Uniform, rat(1, n as i64))
    } else {
        let entries =
            [rat(1, 8), rat(1, 4), rat(3, 8), rat(1, 2), rat(5, 8), rat(3, 4), rat(7, 8)];
        let m = (0..n).map(|_| (0..n).map(|_| pick(rng, &entries)).collect()).collect();
        (BetaRule::Matrix(m), rat(1, 8))
    };
    let alphas = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                AlphaRule::Constant(Rational::zero())
            } else {
                seeker_alpha(rng, &alpha_floor)
            }
        })
        .collect();
    let x0 = (0..n).map(|_| sixty_fourth(rng)).collect();
    SystemConfig {
        n,
        truth,
        epsilon,
        alpha_floor,
        beta_floor,
        alphas,
        weights,
        x0,
        mode: BoundsMode::Strict,
    }
}

fn sample_phase_one(rng: &mut ChaCha8Rng, max_n: usize) -> SystemConfig {
    let n = rng.gen_range(1..=max_n.clamp(1, 4));
    let epsilon = pick(rng, &[rat(1, 4), rat(1, 2)]);
    let truth = rat(rng.gen_range(0..=4), 4);
    let alpha_floor = pick(rng, &[rat(1, 4), rat(1, 2), rat(3, 4)]);
    let (weights, beta_floor) = if n == 1 {
        (BetaRule::Matrix(vec![vec![rat(1, 2)]]), rat(1, 2))
    } else if rng.gen_bool(0.5) {
        (BetaRule::Uniform, rat(1, n as i64))
    } else {
        let entries = [rat(1, 4), rat(1, 2), rat(3, 4)];
        let m = (0..n).map(|_| (0..n).map(|_| pick(rng, &entries)).collect()).collect();
        (BetaRule::Matrix(m), rat(1, 4))
    };
    let mut alphas: Vec<AlphaRule> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                AlphaRule::Constant(Rational::zero())
            } else {
                AlphaRule::Constant(pick(rng, &[alpha_floor.clone(), Rational::one()]))
            }
        })
        .collect();
    if !alphas.iter().any(|a| matches!(a, AlphaRule::Constant(v) if !v.is_zero())) {
        alphas[0] = AlphaRule::Constant(alpha_floor.clone());
    }
    let x0 = (0..n).map(|_| rat(rng.gen_range(0..=4), 4)).collect();
    SystemConfig {
        n,
        truth,
        epsilon,
        alpha_floor,
        beta_floor,
        alphas,
        weights,
        x0,
        mode: BoundsMode::Strict,
    }
}

/// Draw one strict-mode config appropriate for the sweep kind.
pub fn sample_config(rng: &mut ChaCha8Rng, max_n: usize, kind: SweepKind) -> SystemConfig {
    match kind {
        SweepKind::FixedHorizon => sample_fixed(rng, max_n),
        SweepKind::PhaseOneBound => sample_phase_one(rng, max_n),
    }
}

/// The config's own phase-one deadline, capped for desk use.
pub fn phase_one_horizon(cfg: &SystemConfig) -> usize {
    let bounds = phase_bounds(cfg.n, &cfg.epsilon, &cfg.alpha_floor, &cfg.beta_floor);
    bounds.t1.to_usize().map_or(PHASE_ONE_CAP, |v| v.min(PHASE_ONE_CAP))
}

fn run_instance(cfg: &SystemConfig, steps: usize, kind: SweepKind) -> Result<Trajectory, SimError> {
    match kind {
        SweepKind::FixedHorizon => simulate(cfg, steps, None),
        SweepKind::PhaseOneBound => {
            let seekers = match agent_kinds(cfg) {
                Ok(classes) => classes.seekers,
                Err(_) => Vec::new(),
            };
            let margin = phase_one_margin(cfg);
            let settled = move |c: &SystemConfig, s: &OpinionState| {
                let step = analyze_step(c, s, &seekers);
                step.hope.lower_len <= margin && step.hope.upper_len <= margin
            };
            let rule = StopRule::When(&settled);
            simulate(cfg, phase_one_horizon(cfg), Some(&rule))
        }
    }
}

/// Remove one agent (1-based), shrinking weight matrices with it.
fn drop_agent(cfg: &SystemConfig, agent: usize) -> SystemConfig {
    let idx = agent - 1;
    let strip = |m: &Vec<Vec<Rational>>| -> Vec<Vec<Rational>> {
        m.iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, row)| {
                row.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, v)| v.clone()).collect()
            })
            .collect()
    };
    let weights = match &cfg.weights {
        BetaRule::Uniform => BetaRule::Uniform,
        BetaRule::GeometricFade => BetaRule::GeometricFade,
        BetaRule::Matrix(m) => BetaRule::Matrix(strip(m)),
        BetaRule::Table { steps, tail } => {
            BetaRule::Table { steps: steps.iter().map(strip).collect(), tail: strip(tail) }
        }
    };
    let mut alphas = cfg.alphas.clone();
    alphas.remove(idx);
    let mut x0 = cfg.x0.clone();
    x0.remove(idx);
    SystemConfig { n: cfg.n - 1, alphas, x0, weights, ..cfg.clone() }
}

fn reproduces(cfg: &SystemConfig, monitors: &[&'static str], steps: usize, kind: SweepKind) -> bool {
    if !validate_config(cfg).ok() {
        return false;
    }
    let Ok(traj) = run_instance(cfg, steps, kind) else {
        return false;
    };
    let Ok(suite) = run_all_monitors(&traj) else {
        return false;
    };
    monitors.iter().any(|name| suite.report(name).verdict == Verdict::Fail)
}

/// Greedily remove agents while at least one of the named monitors still
/// fails, keeping the config valid in its own mode.
pub fn shrink_reproducer(
    cfg: &SystemConfig,
    monitors: &[&'static str],
    steps: usize,
    kind: SweepKind,
) -> SystemConfig {
    let mut best = cfg.clone();
    'outer: while best.n > 1 {
        for agent in 1..=best.n {
            let candidate = drop_agent(&best, agent);
            if reproduces(&candidate, monitors, steps, kind) {
                best = candidate;
                continue 'outer;
            }
        }
        break;
    }
    best
}

/// One failing monitor on one sampled instance.
#[derive(Debug, Clone)]
pub struct SweepFinding {
    pub instance: usize,
    pub monitor: &'static str,
    pub first_step: Option<usize>,
    pub findings: usize,
    pub detail: String,
    /// Shrunk config that still reproduces the failure.
    pub minimal: SystemConfig,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub params: SweepParams,
    pub instances: usize,
    pub flagged_instances: usize,
    pub findings: Vec<SweepFinding>,
    /// Deterministic findings file.
    pub text: String,
}

pub fn run_sweep(params: &SweepParams, kind: SweepKind) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut text = String::new();
    let _ = writeln!(
        text,
        "sweep seed={} count={} max_n={} steps={} kind={}",
        params.seed,
        params.count,
        params.max_n,
        params.steps,
        kind.name()
    );
    let mut findings: Vec<SweepFinding> = Vec::new();
    let mut flagged = 0usize;
    for instance in 0..params.count {
        let cfg = sample_config(&mut rng, params.max_n, kind);
        debug_assert!(validate_config(&cfg).ok(), "sampler left its own bounds");
        let traj = run_instance(&cfg, params.steps, kind).expect("sampled weights are positive");
        let analysis = analyze_trajectory(&traj).expect("sampled schedules classify");
        let suite = run_monitors_with(&traj, &analysis);
        let failing: Vec<_> = suite
            .reports
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .map(|r| {
                (
                    r.monitor,
                    r.first_violation(),
                    r.findings.len(),
                    r.findings.first().map(|f| f.detail.clone()).unwrap_or_default(),
                )
            })
            .collect();
        if failing.is_empty() {
            continue;
        }
        flagged += 1;
        let names: Vec<&'static str> = failing.iter().map(|f| f.0).collect();
        let minimal = shrink_reproducer(&cfg, &names, params.steps, kind);
        let _ = writeln!(text, "\n[instance {instance}] n={} horizon={}", cfg.n, traj.horizon());
        for (monitor, first_step, count, detail) in &failing {
            let at = first_step.map_or_else(|| "-".to_string(), |s| s.to_string());
            let _ = writeln!(text, "monitor={monitor} findings={count} first_step={at} detail={detail}");
        }
        let _ = writeln!(text, "minimal reproducing config ({} of {} agents):", minimal.n, cfg.n);
        text.push_str(&render_config(&minimal));
        for (monitor, first_step, count, detail) in failing {
            findings.push(SweepFinding {
                instance,
                monitor,
                first_step,
                findings: count,
                detail,
                minimal: minimal.clone(),
            });
        }
    }
    let _ = writeln!(
        text,
        "\nsummary: instances={} flagged={} monitor_findings={}",
        params.count,
        flagged,
        findings.len()
    );
    SweepReport {
        kind,
        params: *params,
        instances: params.count,
        flagged_instances: flagged,
        findings,
        text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AgentKind;

    #[test]
    fn samples_are_valid_and_classify_in_both_kinds() {
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for kind in [SweepKind::FixedHorizon, SweepKind::PhaseOneBound] {
                let cfg = sample_config(&mut rng, 8, kind);
                let report = validate_config(&cfg);
                assert!(report.ok(), "seed {seed}: {:?}", report.violations);
                let classes = agent_kinds(&cfg).unwrap();
                assert_eq!(classes.kinds.len(), cfg.n);
                if kind == SweepKind::PhaseOneBound {
                    assert!(
                        classes.kinds.contains(&AgentKind::TruthSeeker),
                        "phase-one instances always carry a truth seeker"
                    );
                    assert!(phase_one_horizon(&cfg) <= PHASE_ONE_CAP);
                    assert!(
                        phase_one_horizon(&cfg) < PHASE_ONE_CAP,
                        "sampled deadlines stay strictly under the cap"
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_horizon_sweep_finds_nothing_on_strict_instances() {
        let params = SweepParams { seed: 11, count: 30, max_n: 5, steps: 12 };
        let report = run_sweep(&params, SweepKind::FixedHorizon);
        assert_eq!(report.flagged_instances, 0, "{}", report.text);
        assert!(report.text.ends_with("summary: instances=30 flagged=0 monitor_findings=0\n"));
    }

    #[test]
    fn phase_one_sweep_settles_every_instance() {
        let params = SweepParams { seed: 5, count: 10, max_n: 3, steps: 0 };
        let report = run_sweep(&params, SweepKind::PhaseOneBound);
        assert_eq!(report.flagged_instances, 0, "{}", report.text);
    }

    #[test]
    fn sweeps_are_reproducible_byte_for_byte() {
        let params = SweepParams { seed: 7, count: 20, max_n: 6, steps: 10 };
        let a = run_sweep(&params, SweepKind::FixedHorizon);
        let b = run_sweep(&params, SweepKind::FixedHorizon);
        assert_eq!(a.text, b.text);
        let c = run_sweep(&SweepParams { seed: 8, ..params }, SweepKind::FixedHorizon);
        assert!(a.text.lines().next() != c.text.lines().next());
    }

    #[test]
    fn dropping_an_agent_shrinks_every_schedule_shape() {
        let cfg = SystemConfig {
            n: 3,
            truth: rat(1, 2),
            epsilon: rat(1, 4),
            alpha_floor: rat(1, 2),
            beta_floor: rat(1, 8),
            alphas: vec![
                AlphaRule::Constant(rat(1, 2)),
                AlphaRule::Constant(Rational::zero()),
                AlphaRule::Cycle(vec![rat(1, 2), rat(3, 4)]),
            ],
            weights: BetaRule::Matrix(vec![
                vec![rat(1, 8), rat(1, 4), rat(3, 8)],
                vec![rat(1, 2), rat(5, 8), rat(3, 4)],
                vec![rat(7, 8), rat(1, 8), rat(1, 4)],
            ]),
            x0: vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            mode: BoundsMode::Strict,
        };
        let smaller = drop_agent(&cfg, 2);
        assert_eq!(smaller.n, 2);
        assert_eq!(smaller.x0, vec![rat(0, 1), rat(1, 1)]);
        assert_eq!(
            smaller.weights,
            BetaRule::Matrix(vec![vec![rat(1, 8), rat(3, 8)], vec![rat(7, 8), rat(1, 4)]])
        );
        assert_eq!(smaller.alphas.len(), 2);
        assert!(matches!(smaller.alphas[1], AlphaRule::Cycle(_)));
    }

    #[test]
    fn shrinking_keeps_the_failing_core_and_drops_spectators() {
        // A fading-weight pair that defeats the one-step contraction, plus a
        // spectator parked out of everyone's confidence range. The shrink
        // must discard the spectator and nothing else: without the seeker or
        // without its partner the failure disappears.
        let cfg = SystemConfig {
            n: 3,
            truth: Rational::one(),
            epsilon: rat(1, 5),
            alpha_floor: rat(1, 5),
            beta_floor: rat(1, 100),
            alphas: vec![
                AlphaRule::Constant(rat(1, 5)),
                AlphaRule::Constant(Rational::zero()),
                AlphaRule::Constant(Rational::zero()),
            ],
            weights: BetaRule::GeometricFade,
            x0: vec![rat(24, 25), rat(4, 5), Rational::zero()],
            mode: BoundsMode::Relaxed,
        };
        let traj = run_instance(&cfg, 50, SweepKind::FixedHorizon).unwrap();
        let suite = run_all_monitors(&traj).unwrap();
        assert_eq!(suite.report("side-shrink-one-step").verdict, Verdict::Fail);

        let minimal = shrink_reproducer(&cfg, &["side-shrink-one-step"], 50, SweepKind::FixedHorizon);
        assert_eq!(minimal.n, 2);
        assert_eq!(minimal.x0, vec![rat(24, 25), rat(4, 5)]);
    }
}
