//! Runtime monitors for the model's step-to-step guarantees, the two phase
//! bounds, good-iteration accounting, and the convergence certificate.
//!
//! Monitors never abort a run. Every claim is re-checked exactly on the
//! simulated trajectory and a violation becomes a finding; the published
//! contraction constants are exactly the kind of thing a desk-scale audit
//! wants to probe rather than assume.
//!
//! Several statements are qualified by "after the first phase bound". That
//! bound step is usually far beyond any desk-scale horizon, but its only role
//! is to guarantee that the hope interval has entered the band
//! [h−ε−εαβ/12, h+ε+εαβ/12], and once entered the interval never leaves
//! (its side lengths are non-increasing). The monitors therefore activate at
//! the first step where the interval is inside that band, which checks a
//! superset of the qualified windows.

use crate::model::{
    agent_kinds, confidence_set, AgentKind, ClassifyError, SystemConfig, Trajectory,
};
use crate::rational::{ceil_big, ceil_capped, int, render_rational, Rational};
use crate::structure::{analyze_step, SidePartition, StepStructure};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Vacuous,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub step: usize,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct MonitorReport {
    pub monitor: &'static str,
    pub verdict: Verdict,
    /// Vacuous reason or activation info; empty when there is nothing to say.
    pub note: String,
    /// How often the monitored hypothesis actually fired.
    pub hypotheses_checked: usize,
    pub findings: Vec<Finding>,
}

impl MonitorReport {
    fn new(monitor: &'static str) -> Self {
        MonitorReport {
            monitor,
            verdict: Verdict::Pass,
            note: String::new(),
            hypotheses_checked: 0,
            findings: Vec::new(),
        }
    }

    fn vacuous(monitor: &'static str, note: impl Into<String>) -> Self {
        MonitorReport { verdict: Verdict::Vacuous, note: note.into(), ..MonitorReport::new(monitor) }
    }

    fn record(&mut self, step: usize, detail: String) {
        self.verdict = Verdict::Fail;
        self.findings.push(Finding { step, detail });
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.findings.first().map(|f| f.step)
    }
}

/// Per-step structural analyses of a whole trajectory plus the population
/// split, computed once and shared by the monitors.
#[derive(Debug, Clone)]
pub struct TrajectoryAnalysis {
    pub kinds: Vec<AgentKind>,
    pub seekers: Vec<usize>,
    pub steps: Vec<StepStructure>,
}

pub fn analyze_trajectory(traj: &Trajectory) -> Result<TrajectoryAnalysis, ClassifyError> {
    let classes = agent_kinds(&traj.config)?;
    let steps = traj
        .states
        .iter()
        .map(|s| analyze_step(&traj.config, s, &classes.seekers))
        .collect();
    Ok(TrajectoryAnalysis { kinds: classes.kinds, seekers: classes.seekers, steps })
}

impl TrajectoryAnalysis {
    /// Value at the lower interval end; the sentinel rules pin it at or below
    /// the truth, so it is h − ℓ₁.
    pub fn lower_value(&self, cfg: &SystemConfig, t: usize) -> Rational {
        &cfg.truth - &self.steps[t].hope.lower_len
    }

    /// Value at the upper interval end (h + ℓ₂).
    pub fn upper_value(&self, cfg: &SystemConfig, t: usize) -> Rational {
        &cfg.truth + &self.steps[t].hope.upper_len
    }
}

/// ε + εαβ/12, the half-width beyond ε of the phase-one target band.
pub fn phase_one_margin(cfg: &SystemConfig) -> Rational {
    &cfg.epsilon + &cfg.epsilon * &cfg.alpha_floor * &cfg.beta_floor / int(12)
}

/// First step at which the hope interval is inside
/// [h−ε−εαβ/12, h+ε+εαβ/12]; it stays inside from then on.
pub fn settled_step(traj: &Trajectory, analysis: &TrajectoryAnalysis) -> Option<usize> {
    let margin = phase_one_margin(&traj.config);
    (0..=traj.horizon()).find(|&t| {
        analysis.steps[t].hope.lower_len <= margin && analysis.steps[t].hope.upper_len <= margin
    })
}

/// The two a-priori step bounds: the hope interval is inside the target band
/// by `t1 = ⌈3(n + 2 + 24/(εαβ²))⌉`, and both side lengths are small in the
/// sense of the final convergence argument by `t2 = t1 + ⌈36/(α²β⁴)⌉`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseBounds {
    pub t1: BigInt,
    pub t2: BigInt,
}

pub fn phase_bounds(n: usize, epsilon: &Rational, alpha: &Rational, beta: &Rational) -> PhaseBounds {
    let inner = int(n as i64 + 2) + int(24) / (epsilon * alpha * (beta * beta));
    let t1 = ceil_big(&(int(3) * inner));
    let tail = int(36) / (alpha * alpha * beta * beta * beta * beta);
    let t2 = &t1 + ceil_big(&tail);
    PhaseBounds { t1, t2 }
}

/// A single truth seeker is pulled to the truth at least geometrically: the
/// distance shrinks by the factor (1−α) every step. Checking the one-step
/// factor at every step is equivalent to the bound over every window, since
/// the per-window factors multiply.
pub fn monitor_lonely_contraction(traj: &Trajectory) -> MonitorReport {
    let name = "lonely-seeker-decay";
    let cfg = &traj.config;
    let lonely = cfg.n == 1 && matches!(agent_kinds(cfg), Ok(c) if c.seekers == [1]);
    if !lonely {
        return MonitorReport::vacuous(name, "population is not a single truth seeker");
    }
    let mut report = MonitorReport::new(name);
    let factor = Rational::one() - &cfg.alpha_floor;
    for t in 0..traj.horizon() {
        report.hypotheses_checked += 1;
        let before = (traj.state(t).opinion(1) - &cfg.truth).abs();
        let after = (traj.state(t + 1).opinion(1) - &cfg.truth).abs();
        if after > &before * &factor {
            report.record(
                t + 1,
                format!(
                    "distance to the truth went from {} to {}, above the one-step decay bound",
                    render_rational(&before),
                    render_rational(&after)
                ),
            );
        }
    }
    report
}

/// Every update is a convex combination: an agent with zero attraction this
/// step stays inside the value span of its confidence set, and an attracted
/// agent stays inside that span extended to the truth.
pub fn monitor_containment(traj: &Trajectory) -> MonitorReport {
    let mut report = MonitorReport::new("neighborhood-containment");
    let cfg = &traj.config;
    for t in 0..traj.horizon() {
        let state = traj.state(t);
        let next = traj.state(t + 1);
        for i in 1..=cfg.n {
            report.hypotheses_checked += 1;
            let set = confidence_set(&state.x, state.opinion(i), &cfg.epsilon);
            let mut lo = state.opinion(set[0]).clone();
            let mut hi = lo.clone();
            for &j in &set[1..] {
                let v = state.opinion(j);
                if *v < lo {
                    lo = v.clone();
                }
                if *v > hi {
                    hi = v.clone();
                }
            }
            if !cfg.alphas[i - 1].at(t).is_zero() {
                lo = lo.min(cfg.truth.clone());
                hi = hi.max(cfg.truth.clone());
            }
            let moved = next.opinion(i);
            if *moved < lo || *moved > hi {
                report.record(
                    t + 1,
                    format!(
                        "agent {i} moved to {} outside its allowed interval [{}, {}]",
                        render_rational(moved),
                        render_rational(&lo),
                        render_rational(&hi)
                    ),
                );
            }
        }
    }
    report
}

/// The hope interval never widens: the lower end is non-decreasing and the
/// upper end non-increasing, equivalently both side lengths shrink weakly.
pub fn monitor_hope_monotone(traj: &Trajectory, analysis: &TrajectoryAnalysis) -> MonitorReport {
    let mut report = MonitorReport::new("hope-interval-monotone");
    for t in 0..traj.horizon() {
        report.hypotheses_checked += 1;
        let (before, after) = (&analysis.steps[t].hope, &analysis.steps[t + 1].hope);
        if after.lower_len > before.lower_len {
            report.record(
                t + 1,
                format!(
                    "lower side length grew from {} to {}",
                    render_rational(&before.lower_len),
                    render_rational(&after.lower_len)
                ),
            );
        }
        if after.upper_len > before.upper_len {
            report.record(
                t + 1,
                format!(
                    "upper side length grew from {} to {}",
                    render_rational(&before.upper_len),
                    render_rational(&after.upper_len)
                ),
            );
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoodClause {
    /// The number of agents inside the hope interval decreased.
    MemberDrop,
    /// The lower interval end reached or passed h−ε−εαβ/12 from below.
    LowerCrossed,
    /// The upper interval end reached or passed h+ε+εαβ/12 from above.
    UpperCrossed,
    /// The upper end moved by at least εαβ²/12.
    UpperMoved,
    /// The lower end moved by at least εαβ²/12.
    LowerMoved,
}

impl GoodClause {
    pub fn label(self) -> &'static str {
        match self {
            GoodClause::MemberDrop => "member-drop",
            GoodClause::LowerCrossed => "lower-end-crossed-band",
            GoodClause::UpperCrossed => "upper-end-crossed-band",
            GoodClause::UpperMoved => "upper-end-moved-quantum",
            GoodClause::LowerMoved => "lower-end-moved-quantum",
        }
    }
}

/// One firing of one clause over the window (t, t+r).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodIterationEvent {
    pub t: usize,
    pub r: usize,
    pub clause: GoodClause,
}

#[derive(Debug, Clone)]
pub struct GoodIterationScan {
    pub events: Vec<GoodIterationEvent>,
    /// Budget n + 2 + 24/(εαβ²) on disjoint good windows before settling.
    pub ceiling: Rational,
    pub settled_at: Option<usize>,
    /// Size of a maximum family of pairwise disjoint event windows that start
    /// before the settling step.
    pub disjoint_count: usize,
    pub within_ceiling: bool,
}

/// Scan all windows of length 1..=3 for the five progress clauses. Crossing
/// clauses compare against the closed band thresholds, firing exactly when
/// the window starts outside and ends at or inside.
pub fn detect_good_iterations(traj: &Trajectory, analysis: &TrajectoryAnalysis) -> GoodIterationScan {
    let cfg = &traj.config;
    let horizon = traj.horizon();
    let margin = phase_one_margin(cfg);
    let lo_target = &cfg.truth - &margin;
    let hi_target = &cfg.truth + &margin;
    let quantum =
        &cfg.epsilon * &cfg.alpha_floor * &cfg.beta_floor * &cfg.beta_floor / int(12);

    let mut events = Vec::new();
    for t in 0..horizon {
        let members_start = analysis.steps[t].hope.members.len();
        let lo_start = analysis.lower_value(cfg, t);
        let hi_start = analysis.upper_value(cfg, t);
        for r in 1..=3.min(horizon - t) {
            let end = t + r;
            if analysis.steps[end].hope.members.len() < members_start {
                events.push(GoodIterationEvent { t, r, clause: GoodClause::MemberDrop });
            }
            let lo_end = analysis.lower_value(cfg, end);
            let hi_end = analysis.upper_value(cfg, end);
            if lo_start < lo_target && lo_end >= lo_target {
                events.push(GoodIterationEvent { t, r, clause: GoodClause::LowerCrossed });
            }
            if hi_start > hi_target && hi_end <= hi_target {
                events.push(GoodIterationEvent { t, r, clause: GoodClause::UpperCrossed });
            }
            if (&hi_end - &hi_start).abs() >= quantum {
                events.push(GoodIterationEvent { t, r, clause: GoodClause::UpperMoved });
            }
            if (&lo_end - &lo_start).abs() >= quantum {
                events.push(GoodIterationEvent { t, r, clause: GoodClause::LowerMoved });
            }
        }
    }

    let settled_at = settled_step(traj, analysis);
    // maximum disjoint selection: earliest window end first; windows may touch
    let mut spans: Vec<(usize, usize)> = events
        .iter()
        .filter(|e| settled_at.is_none_or(|s| e.t < s))
        .map(|e| (e.t + e.r, e.t))
        .collect();
    spans.sort_unstable();
    let mut disjoint_count = 0usize;
    let mut free_from = 0usize;
    for (end, start) in spans {
        if start >= free_from {
            disjoint_count += 1;
            free_from = end;
        }
    }
    let ceiling = int(cfg.n as i64 + 2)
        + int(24) / (&cfg.epsilon * &cfg.alpha_floor * &cfg.beta_floor * &cfg.beta_floor);
    let within_ceiling = int(disjoint_count as i64) <= ceiling;
    GoodIterationScan { events, ceiling, settled_at, disjoint_count, within_ceiling }
}

/// Pass/fail wrapper around the good-iteration budget. Progress before the
/// settling step is measurable and bounded; exceeding the budget would mean
/// the accounting behind the first phase bound is broken.
pub fn good_iteration_budget_report(
    traj: &Trajectory,
    analysis: &TrajectoryAnalysis,
    scan: &GoodIterationScan,
) -> MonitorReport {
    let name = "good-iteration-budget";
    if traj.config.mode != crate::model::BoundsMode::Strict {
        return MonitorReport::vacuous(name, "budget argument needs strict weight bounds");
    }
    if analysis.seekers.is_empty() {
        return MonitorReport::vacuous(name, "no truth seekers");
    }
    let mut report = MonitorReport::new(name);
    report.hypotheses_checked = 1;
    report.note = format!(
        "{} disjoint good windows before settling, budget {}",
        scan.disjoint_count,
        render_rational(&scan.ceiling)
    );
    if !scan.within_ceiling {
        report.record(
            scan.events.first().map(|e| e.t).unwrap_or(0),
            format!(
                "counted {} disjoint good windows, above the budget {}",
                scan.disjoint_count,
                render_rational(&scan.ceiling)
            ),
        );
    }
    report
}

/// The hope interval must be inside the target band at the first phase
/// bound. When the horizon ends earlier, an early entry still decides the
/// claim: the side lengths are non-increasing, so the interval cannot leave
/// the band again before the bound step.
pub fn monitor_phase1(
    traj: &Trajectory,
    analysis: &TrajectoryAnalysis,
    bounds: &PhaseBounds,
) -> MonitorReport {
    let name = "phase-one-entry";
    if analysis.seekers.is_empty() {
        return MonitorReport::vacuous(name, "no truth seekers");
    }
    let margin = phase_one_margin(&traj.config);
    if BigInt::from(traj.horizon()) >= bounds.t1 {
        let t1 = bounds.t1.to_usize().expect("t1 fits: it is at most the horizon");
        let mut report = MonitorReport::new(name);
        report.hypotheses_checked = 1;
        let hope = &analysis.steps[t1].hope;
        if hope.lower_len > margin || hope.upper_len > margin {
            report.record(
                t1,
                format!(
                    "hope interval sides ({}, {}) still outside the band half-width {} at the bound step",
                    render_rational(&hope.lower_len),
                    render_rational(&hope.upper_len),
                    render_rational(&margin)
                ),
            );
        }
        report
    } else if let Some(s) = settled_step(traj, analysis) {
        let mut report = MonitorReport::new(name);
        report.hypotheses_checked = 1;
        report.note = format!(
            "interval entered the band at step {s}; monotone side lengths keep it there through the bound step {}",
            bounds.t1
        );
        report
    } else {
        MonitorReport::vacuous(
            name,
            format!(
                "horizon {} is below the bound step {} and the interval has not entered the band",
                traj.horizon(),
                bounds.t1
            ),
        )
    }
}

fn side<'a>(structure: &'a StepStructure, k: usize) -> (&'a Rational, &'a SidePartition) {
    match k {
        1 => (&structure.hope.lower_len, &structure.partitions.scaled_lower),
        _ => (&structure.hope.upper_len, &structure.partitions.scaled_upper),
    }
}

/// The contraction statements, each checked independently wherever its
/// hypothesis fires:
///
/// * hope-sum-two-step: once ℓ₁+ℓ₂ ≤ ε, the sum shrinks by (1−αβ/2) every
///   two steps (active everywhere);
/// * side-shrink-one-step: an occupied scaled mid band shrinks that side by
///   (1−αβ²/12) in one step;
/// * near-far-two-step: an ignorant in the near band seeing someone in the
///   far set shrinks the side by (1−αβ²/12) in two steps;
/// * three-step-progress: some side shrinks by (1−αβ²/12) every three steps;
/// * past-epsilon-three-step: a side length above ε decays toward ε at the
///   same rate.
///
/// All but the first are meaningful only after the interval has entered the
/// phase-one band and there is at least one truth seeker.
pub fn monitor_contraction(traj: &Trajectory, analysis: &TrajectoryAnalysis) -> Vec<MonitorReport> {
    let cfg = &traj.config;
    let horizon = traj.horizon();
    let eps = &cfg.epsilon;

    // Every contraction statement leans on at least one truth seeker pulling
    // its side toward h; without seekers a stationary cluster sitting inside
    // the radius keeps the side lengths constant and no decay is promised.
    let mut sum_two = if analysis.seekers.is_empty() {
        MonitorReport::vacuous("hope-sum-two-step", "no truth seekers")
    } else {
        MonitorReport::new("hope-sum-two-step")
    };
    let two_step_factor = Rational::one() - &cfg.alpha_floor * &cfg.beta_floor / int(2);
    if !analysis.seekers.is_empty() {
        for t in 0..horizon.saturating_sub(1) {
            let sum_now = &analysis.steps[t].hope.lower_len + &analysis.steps[t].hope.upper_len;
            if sum_now <= *eps {
                sum_two.hypotheses_checked += 1;
                let sum_later =
                    &analysis.steps[t + 2].hope.lower_len + &analysis.steps[t + 2].hope.upper_len;
                if sum_later > &sum_now * &two_step_factor {
                    sum_two.record(
                        t + 2,
                        format!(
                            "side-length sum went from {} to {}, above the two-step factor",
                            render_rational(&sum_now),
                            render_rational(&sum_later)
                        ),
                    );
                }
            }
        }
    }

    let settled = settled_step(traj, analysis);
    let gated = |name: &'static str| -> MonitorReport {
        if analysis.seekers.is_empty() {
            MonitorReport::vacuous(name, "no truth seekers")
        } else if let Some(s) = settled {
            let mut r = MonitorReport::new(name);
            r.note = format!("active from step {s}");
            r
        } else {
            MonitorReport::vacuous(name, "hope interval never entered the phase-one band")
        }
    };
    let mut one_step = gated("side-shrink-one-step");
    let mut near_far = gated("near-far-two-step");
    let mut three_step = gated("three-step-progress");
    let mut past_eps = gated("past-epsilon-three-step");

    if let Some(gate) = settled.filter(|_| !analysis.seekers.is_empty()) {
        let shrink = Rational::one()
            - &cfg.alpha_floor * &cfg.beta_floor * &cfg.beta_floor / int(12);
        for t in gate..horizon {
            let state = traj.state(t);
            for k in [1usize, 2] {
                let (len_now, part) = side(&analysis.steps[t], k);
                if !part.mid.is_empty() {
                    one_step.hypotheses_checked += 1;
                    let (len_next, _) = side(&analysis.steps[t + 1], k);
                    if *len_next > len_now * &shrink {
                        one_step.record(
                            t + 1,
                            format!(
                                "side {k} went from {} to {} with its mid band occupied",
                                render_rational(len_now),
                                render_rational(len_next)
                            ),
                        );
                    }
                }
                if t + 2 <= horizon {
                    let pair_fires = part.near.iter().any(|&i| {
                        analysis.kinds[i - 1] == AgentKind::Ignorant
                            && part.far.iter().any(|&j| {
                                (state.opinion(i) - state.opinion(j)).abs() <= *eps
                            })
                    });
                    if pair_fires {
                        near_far.hypotheses_checked += 1;
                        let (len_later, _) = side(&analysis.steps[t + 2], k);
                        if *len_later > len_now * &shrink {
                            near_far.record(
                                t + 2,
                                format!(
                                    "side {k} went from {} to {} despite a near ignorant seeing the far set",
                                    render_rational(len_now),
                                    render_rational(len_later)
                                ),
                            );
                        }
                    }
                }
                if t + 3 <= horizon && *len_now > *eps {
                    past_eps.hypotheses_checked += 1;
                    let (len_later, _) = side(&analysis.steps[t + 3], k);
                    let excess_ok =
                        len_later - eps <= (len_now - eps) * &shrink;
                    if !(*len_later <= *eps || excess_ok) {
                        past_eps.record(
                            t + 3,
                            format!(
                                "side {k} excess over the radius went from {} to {}",
                                render_rational(&(len_now - eps)),
                                render_rational(&(len_later - eps))
                            ),
                        );
                    }
                }
            }
            if t + 3 <= horizon {
                three_step.hypotheses_checked += 1;
                let fine = [1usize, 2].into_iter().any(|k| {
                    let (len_now, _) = side(&analysis.steps[t], k);
                    let (len_later, _) = side(&analysis.steps[t + 3], k);
                    *len_later <= len_now * &shrink
                });
                if !fine {
                    three_step.record(
                        t + 3,
                        format!(
                            "neither side shrank by the three-step factor (lower {} to {}, upper {} to {})",
                            render_rational(&analysis.steps[t].hope.lower_len),
                            render_rational(&analysis.steps[t + 3].hope.lower_len),
                            render_rational(&analysis.steps[t].hope.upper_len),
                            render_rational(&analysis.steps[t + 3].hope.upper_len)
                        ),
                    );
                }
            }
        }
    }

    vec![sum_two, one_step, near_far, three_step, past_eps]
}

/// A truth seeker inside a scaled near band halves that side's length at
/// rate α/2 over the step that put it there.
pub fn monitor_near_seeker(traj: &Trajectory, analysis: &TrajectoryAnalysis) -> MonitorReport {
    let name = "near-seeker-halving";
    if analysis.seekers.is_empty() {
        return MonitorReport::vacuous(name, "no truth seekers");
    }
    let Some(gate) = settled_step(traj, analysis) else {
        return MonitorReport::vacuous(name, "hope interval never entered the phase-one band");
    };
    let mut report = MonitorReport::new(name);
    report.note = format!("active from step {gate}");
    let factor = Rational::one() - &traj.config.alpha_floor / int(2);
    for t in gate..traj.horizon() {
        for k in [1usize, 2] {
            let (_, part_next) = side(&analysis.steps[t + 1], k);
            let seeker_near = part_next
                .near
                .iter()
                .any(|i| analysis.seekers.binary_search(i).is_ok());
            if seeker_near {
                report.hypotheses_checked += 1;
                let (len_now, _) = side(&analysis.steps[t], k);
                let (len_next, _) = side(&analysis.steps[t + 1], k);
                if *len_next > len_now * &factor {
                    report.record(
                        t + 1,
                        format!(
                            "side {k} went from {} to {} with a truth seeker in the near band",
                            render_rational(len_now),
                            render_rational(len_next)
                        ),
                    );
                }
            }
        }
    }
    report
}

/// Everything the monitor suite produces for one trajectory.
#[derive(Debug, Clone)]
pub struct MonitorSuite {
    pub settled_at: Option<usize>,
    pub bounds: PhaseBounds,
    pub good_iterations: GoodIterationScan,
    pub reports: Vec<MonitorReport>,
}

impl MonitorSuite {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed())
    }

    pub fn report(&self, monitor: &str) -> &MonitorReport {
        self.reports
            .iter()
            .find(|r| r.monitor == monitor)
            .unwrap_or_else(|| panic!("unknown monitor {monitor}"))
    }
}

pub fn run_monitors_with(traj: &Trajectory, analysis: &TrajectoryAnalysis) -> MonitorSuite {
    let cfg = &traj.config;
    let bounds = phase_bounds(cfg.n, &cfg.epsilon, &cfg.alpha_floor, &cfg.beta_floor);
    let scan = detect_good_iterations(traj, analysis);
    let mut reports = vec![
        monitor_lonely_contraction(traj),
        monitor_containment(traj),
        monitor_hope_monotone(traj, analysis),
        monitor_phase1(traj, analysis, &bounds),
        good_iteration_budget_report(traj, analysis, &scan),
    ];
    reports.extend(monitor_contraction(traj, analysis));
    reports.push(monitor_near_seeker(traj, analysis));
    MonitorSuite {
        settled_at: settled_step(traj, analysis),
        bounds,
        good_iterations: scan,
        reports,
    }
}

pub fn run_all_monitors(traj: &Trajectory) -> Result<MonitorSuite, ClassifyError> {
    let analysis = analyze_trajectory(traj)?;
    Ok(run_monitors_with(traj, &analysis))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertifyError {
    #[error("tolerance gamma must be positive")]
    NonpositiveGamma,
    #[error("certificate needs at least one truth seeker")]
    NoTruthSeekers,
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// 2·⌈2/(αβ)⌉ steps: long enough that the two-step sum contraction would
/// visibly shrink a spurious tail.
pub fn default_tail_window(alpha: &Rational, beta: &Rational) -> usize {
    2 * ceil_capped(&(int(2) / (alpha * beta)), usize::MAX / 4).max(1)
}

/// The two decay envelopes of the final convergence argument, fitted to the
/// observed distances when the horizon reaches the second bound step.
#[derive(Debug, Clone)]
pub struct EnvelopeCheck {
    /// Second phase bound this check is anchored at.
    pub bound_step: BigInt,
    /// Whether the horizon reaches the bound step at all.
    pub applicable: bool,
    /// Last step up to which the tight pre-interruption envelope held.
    pub pre_holds_through: Option<usize>,
    /// Fitted switch step when the tight envelope broke.
    pub fitted_switch: Option<usize>,
    /// Whether the looser post-switch envelope held from switch+3 on.
    pub post_holds: Option<bool>,
    pub note: String,
}

/// Convergence summary of the truth seekers' worst distance to the truth.
///
/// Windows are the maximal runs with that distance strictly below γ.
/// Interruptions are counted without reference to γ: a distraction episode
/// is a maximal run of steps where the distance sits strictly above its
/// running minimum, so the count is invariant under enlarging γ.
#[derive(Debug, Clone)]
pub struct ConvergenceCertificate {
    pub gamma: Rational,
    pub tail_window: usize,
    /// max over truth seekers of |x_k(t) − h|, one entry per step.
    pub distances: Vec<Rational>,
    /// Maximal γ-windows as inclusive step ranges.
    pub windows: Vec<(usize, usize)>,
    pub interruption_count: usize,
    pub first_distraction: Option<usize>,
    /// Final window reaches the horizon and is at least tail_window long.
    pub converged: bool,
    pub envelope: EnvelopeCheck,
    pub monitor_verdicts: Vec<MonitorReport>,
}

fn check_envelopes(distances: &[Rational], cfg: &SystemConfig, bounds: &PhaseBounds) -> EnvelopeCheck {
    let horizon = distances.len() - 1;
    if BigInt::from(horizon) < bounds.t2 {
        return EnvelopeCheck {
            bound_step: bounds.t2.clone(),
            applicable: false,
            pre_holds_through: None,
            fitted_switch: None,
            post_holds: None,
            note: "horizon ends before the second bound step".into(),
        };
    }
    let t2 = bounds.t2.to_usize().expect("t2 fits: it is at most the horizon");
    let per_two_steps = Rational::one() - &cfg.alpha_floor * &cfg.beta_floor / int(2);
    let tight_base = &cfg.epsilon
        * &cfg.alpha_floor
        * &cfg.alpha_floor
        * &cfg.beta_floor
        * &cfg.beta_floor
        * &cfg.beta_floor
        / int(60);

    let mut bound = tight_base;
    let mut pre_holds_through = None;
    let mut first_break = None;
    for t in t2..=horizon {
        if t > t2 && (t - t2) % 2 == 0 {
            bound = &bound * &per_two_steps;
        }
        if distances[t] <= bound {
            pre_holds_through = Some(t);
        } else {
            first_break = Some(t);
            break;
        }
    }

    match first_break {
        None => EnvelopeCheck {
            bound_step: bounds.t2.clone(),
            applicable: true,
            pre_holds_through,
            fitted_switch: None,
            post_holds: None,
            note: "distances stay under the tight envelope from the bound step on".into(),
        },
        Some(broke) if broke == t2 => EnvelopeCheck {
            bound_step: bounds.t2.clone(),
            applicable: true,
            pre_holds_through: None,
            fitted_switch: None,
            post_holds: None,
            note: "tight envelope already fails at the bound step".into(),
        },
        Some(broke) => {
            let switch = broke - 1;
            let mut post_ok = true;
            let mut post_bound = cfg.epsilon.clone();
            for t in (switch + 3)..=horizon {
                if t > switch + 3 && (t - switch - 3) % 2 == 0 {
                    post_bound = &post_bound * &per_two_steps;
                }
                if distances[t] > post_bound {
                    post_ok = false;
                    break;
                }
            }
            EnvelopeCheck {
                bound_step: bounds.t2.clone(),
                applicable: true,
                pre_holds_through,
                fitted_switch: Some(switch),
                post_holds: Some(post_ok),
                note: format!("tight envelope broke at step {broke}; switch fitted at {switch}"),
            }
        }
    }
}

pub fn certify_convergence(
    traj: &Trajectory,
    gamma: &Rational,
    tail_window: Option<usize>,
) -> Result<ConvergenceCertificate, CertifyError> {
    if *gamma <= Rational::zero() {
        return Err(CertifyError::NonpositiveGamma);
    }
    let analysis = analyze_trajectory(traj)?;
    if analysis.seekers.is_empty() {
        return Err(CertifyError::NoTruthSeekers);
    }
    let cfg = &traj.config;
    let horizon = traj.horizon();
    let tail = tail_window
        .unwrap_or_else(|| default_tail_window(&cfg.alpha_floor, &cfg.beta_floor));

    let distances: Vec<Rational> = (0..=horizon)
        .map(|t| {
            analysis
                .seekers
                .iter()
                .map(|&k| (traj.state(t).opinion(k) - &cfg.truth).abs())
                .max()
                .expect("seekers nonempty")
        })
        .collect();

    let mut windows = Vec::new();
    let mut open: Option<usize> = None;
    for (t, d) in distances.iter().enumerate() {
        if d < gamma {
            open.get_or_insert(t);
        } else if let Some(s) = open.take() {
            windows.push((s, t - 1));
        }
    }
    if let Some(s) = open {
        windows.push((s, horizon));
    }

    let mut best = distances[0].clone();
    let mut in_episode = false;
    let mut interruption_count = 0usize;
    let mut first_distraction = None;
    for (t, d) in distances.iter().enumerate().skip(1) {
        if *d > best {
            if !in_episode {
                interruption_count += 1;
                first_distraction.get_or_insert(t);
                in_episode = true;
            }
        } else {
            in_episode = false;
        }
        if *d < best {
            best = d.clone();
        }
    }

    let converged = windows
        .last()
        .is_some_and(|&(s, e)| e == horizon && e - s + 1 >= tail);

    let bounds = phase_bounds(cfg.n, &cfg.epsilon, &cfg.alpha_floor, &cfg.beta_floor);
    let envelope = check_envelopes(&distances, cfg, &bounds);
    let suite = run_monitors_with(traj, &analysis);

    Ok(ConvergenceCertificate {
        gamma: gamma.clone(),
        tail_window: tail,
        distances,
        windows,
        interruption_count,
        first_distraction,
        converged,
        envelope,
        monitor_verdicts: suite.reports,
    })
}
