//! Core dynamics: population configuration, schedule rules, the confidence
//! set, and the exact simultaneous update.
//!
//! Agents are numbered 1..=n everywhere in the public API; 0 is reserved for
//! the virtual truth vertex used by the structural analysis. Opinions live in
//! [0, 1] and the truth value `h` is constant over time.

use crate::rational::{rat, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Population dichotomy. Truth seekers keep their truth attraction at or
/// above the configured floor forever; ignorants never have any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    TruthSeeker,
    Ignorant,
}

/// Per-agent truth-attraction schedule α_i(t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaRule {
    Constant(Rational),
    /// Explicit prefix, then `tail` repeats forever.
    Table { values: Vec<Rational>, tail: Rational },
    /// Periodic repetition of the listed values.
    Cycle(Vec<Rational>),
}

impl AlphaRule {
    pub fn at(&self, t: usize) -> Rational {
        match self {
            AlphaRule::Constant(a) => a.clone(),
            AlphaRule::Table { values, tail } => values.get(t).unwrap_or(tail).clone(),
            AlphaRule::Cycle(values) => values[t % values.len()].clone(),
        }
    }

    /// Every value the rule can ever produce, with the first step it occurs.
    /// Finite for all rule forms, which is what makes validation and
    /// classification by inspection possible.
    pub fn witnesses(&self) -> Vec<(usize, Rational)> {
        match self {
            AlphaRule::Constant(a) => vec![(0, a.clone())],
            AlphaRule::Table { values, tail } => {
                let mut w: Vec<(usize, Rational)> =
                    values.iter().cloned().enumerate().collect();
                w.push((values.len(), tail.clone()));
                w
            }
            AlphaRule::Cycle(values) => values.iter().cloned().enumerate().collect(),
        }
    }

    fn is_time_invariant(&self) -> bool {
        matches!(self, AlphaRule::Constant(_))
    }
}

/// Interaction-weight schedule β_ij(t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BetaRule {
    /// β_ij(t) = 1/n for everyone.
    Uniform,
    /// Time-constant weight matrix, row i = weights agent i puts on others.
    Matrix(Vec<Vec<Rational>>),
    /// Explicit per-step matrices, then `tail` repeats forever.
    Table { steps: Vec<Vec<Vec<Rational>>>, tail: Vec<Vec<Rational>> },
    /// Closed form: everyone's weight on agent 1 is (1/2)^(t+1); the
    /// remainder is split evenly over agents 2..=n. The weight on agent 1
    /// sinks below any fixed positive floor eventually, which is exactly the
    /// point of the construction.
    GeometricFade,
}

/// (1/2)^(t+1) as an exact rational.
fn half_pow(t: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2).pow(t as u32 + 1))
}

impl BetaRule {
    /// Weight agent `i` puts on agent `j` at step `t` (both 1-based).
    pub fn weight(&self, n: usize, i: usize, j: usize, t: usize) -> Rational {
        match self {
            BetaRule::Uniform => rat(1, n as i64),
            BetaRule::Matrix(m) => m[i - 1][j - 1].clone(),
            BetaRule::Table { steps, tail } => {
                steps.get(t).unwrap_or(tail)[i - 1][j - 1].clone()
            }
            BetaRule::GeometricFade => {
                let fade = half_pow(t);
                if j == 1 {
                    fade
                } else {
                    (Rational::one() - fade) / rat(n as i64 - 1, 1)
                }
            }
        }
    }

    fn is_time_invariant(&self) -> bool {
        matches!(self, BetaRule::Uniform | BetaRule::Matrix(_))
    }
}

/// Whether schedule bounds are enforced (`Strict`) or only positivity of the
/// weights is required (`Relaxed`). The relaxed mode exists so that the
/// counterexample constructions with decaying weights or switched-on truth
/// attraction remain expressible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundsMode {
    #[default]
    Strict,
    Relaxed,
}

/// Full system description. All quantities are exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n: usize,
    /// The truth value h, constant over time.
    pub truth: Rational,
    /// Confidence radius ε (closed comparison: |x_i - x_j| <= ε).
    pub epsilon: Rational,
    /// Floor α for truth-seeker attraction.
    pub alpha_floor: Rational,
    /// Floor β for interaction weights (strict mode: β <= β_ij(t) <= 1-β).
    pub beta_floor: Rational,
    pub alphas: Vec<AlphaRule>,
    pub weights: BetaRule,
    pub x0: Vec<Rational>,
    pub mode: BoundsMode,
}

impl SystemConfig {
    /// True when the update map depends only on the state, not on t.
    /// Only then does x(t+1) = x(t) imply the trajectory is constant forever.
    pub fn is_time_invariant(&self) -> bool {
        self.alphas.iter().all(|a| a.is_time_invariant()) && self.weights.is_time_invariant()
    }
}

/// Opinion vector at a single step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpinionState {
    pub t: usize,
    pub x: Vec<Rational>,
}

impl OpinionState {
    /// Opinion of agent `i` (1-based).
    pub fn opinion(&self, i: usize) -> &Rational {
        &self.x[i - 1]
    }
}

/// A simulated run: states[t] is the opinion vector at step t.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SystemConfig,
    pub states: Vec<OpinionState>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn state(&self, t: usize) -> &OpinionState {
        &self.states[t]
    }

    /// First t with x(t) == x(t+1), if the run contains one.
    pub fn stabilized_at(&self) -> Option<usize> {
        (0..self.states.len().saturating_sub(1)).find(|&t| self.states[t].x == self.states[t + 1].x)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("agent {agent} at step {t}: weights over its confidence set sum to zero")]
    DegenerateWeights { agent: usize, t: usize },
}

/// Agents whose opinion lies within ε of `value` (closed inequality),
/// as a sorted list of 1-based ids.
pub fn confidence_set(x: &[Rational], value: &Rational, epsilon: &Rational) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, xj)| (*xj - value).abs() <= *epsilon)
        .map(|(idx, _)| idx + 1)
        .collect()
}

/// One simultaneous update of the whole population.
///
/// Each agent averages the opinions in its confidence set with its current
/// weights (the weight sum self-normalizes, so rows need not sum to one) and
/// then mixes the result with the truth according to its attraction schedule.
/// The truth vertex itself is never part of a confidence set.
pub fn update_step(cfg: &SystemConfig, state: &OpinionState) -> Result<OpinionState, SimError> {
    let t = state.t;
    let mut next = Vec::with_capacity(cfg.n);
    for i in 1..=cfg.n {
        let xi = state.opinion(i);
        let peers = confidence_set(&state.x, xi, &cfg.epsilon);
        let mut weighted = Rational::zero();
        let mut total = Rational::zero();
        for &j in &peers {
            let w = cfg.weights.weight(cfg.n, i, j, t);
            weighted += &w * state.opinion(j);
            total += w;
        }
        if total.is_zero() {
            return Err(SimError::DegenerateWeights { agent: i, t });
        }
        let average = weighted / total;
        let a = cfg.alphas[i - 1].at(t);
        next.push(&a * &cfg.truth + (Rational::one() - &a) * average);
    }
    Ok(OpinionState { t: t + 1, x: next })
}

/// Early-exit condition for `simulate`, checked after every produced step.
pub enum StopRule<'a> {
    /// Stop once two consecutive states are equal. Only honored when the
    /// config is time-invariant; under time-varying schedules a repeated
    /// state proves nothing about later steps.
    FixedPoint,
    /// Stop once the predicate holds on the newly produced state.
    When(&'a dyn Fn(&SystemConfig, &OpinionState) -> bool),
}

/// Run the dynamics from x0 for at most `horizon` steps.
pub fn simulate(
    cfg: &SystemConfig,
    horizon: usize,
    stop: Option<&StopRule>,
) -> Result<Trajectory, SimError> {
    let mut states = vec![OpinionState { t: 0, x: cfg.x0.clone() }];
    if let Some(StopRule::When(f)) = stop {
        if f(cfg, &states[0]) {
            return Ok(Trajectory { config: cfg.clone(), states });
        }
    }
    let time_invariant = cfg.is_time_invariant();
    for _ in 0..horizon {
        let next = update_step(cfg, states.last().unwrap())?;
        let done = match stop {
            Some(StopRule::FixedPoint) => time_invariant && next.x == states.last().unwrap().x,
            Some(StopRule::When(f)) => f(cfg, &next),
            None => false,
        };
        states.push(next);
        if done {
            break;
        }
    }
    Ok(Trajectory { config: cfg.clone(), states })
}

// ---------------------------------------------------------------------------
// Validation and classification
// ---------------------------------------------------------------------------

/// A single validation finding. Violations are data: callers decide whether
/// to print, abort, or collect them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyPopulation,
    WrongLength { field: String, expected: usize, got: usize },
    ValueOutOfRange { field: String, value: Rational, interval: &'static str },
    /// Strict mode only: the schedule is neither identically zero nor a
    /// truth-seeker schedule bounded below by the floor.
    UnclassifiableAlpha { agent: usize },
    AlphaOutOfRange { agent: usize, step: usize, value: Rational },
    WeightOutOfBounds { from: usize, to: usize, step: usize, value: Rational },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EmptyPopulation => write!(f, "population is empty"),
            Violation::WrongLength { field, expected, got } => {
                write!(f, "{field}: expected {expected} entries, got {got}")
            }
            Violation::ValueOutOfRange { field, value, interval } => {
                write!(f, "{field} = {value} outside {interval}")
            }
            Violation::UnclassifiableAlpha { agent } => write!(
                f,
                "agent {agent}: attraction schedule is neither identically zero nor kept at or above the floor"
            ),
            Violation::AlphaOutOfRange { agent, step, value } => {
                write!(f, "agent {agent}: alpha({step}) = {value} outside [0, 1]")
            }
            Violation::WeightOutOfBounds { from, to, step, value } => {
                write!(f, "weight {from}->{to} at step {step}: {value} outside the permitted band")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub mode: BoundsMode,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All weight values a rule can produce, each with the first step it appears
/// at. For the closed-form fade this is the finite prefix up to (and
/// including) the first step that leaves the strict band, which is enough for
/// both validation modes.
fn weight_witnesses(rule: &BetaRule, n: usize, beta_floor: &Rational) -> Vec<(usize, usize, usize, Rational)> {
    let mut out = Vec::new();
    match rule {
        BetaRule::Uniform => {
            if n > 0 {
                out.push((1, 1, 0, rat(1, n as i64)));
            }
        }
        BetaRule::Matrix(m) => {
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out.push((i + 1, j + 1, 0, v.clone()));
                }
            }
        }
        BetaRule::Table { steps, tail } => {
            for (t, m) in steps.iter().enumerate() {
                for (i, row) in m.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        out.push((i + 1, j + 1, t, v.clone()));
                    }
                }
            }
            for (i, row) in tail.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out.push((i + 1, j + 1, steps.len(), v.clone()));
                }
            }
        }
        BetaRule::GeometricFade => {
            // The fade is monotone decreasing, so the first step below the
            // floor witnesses the strict-mode violation; earlier steps are in
            // band whenever the floor is. Walk until that step.
            let mut t = 0usize;
            loop {
                let fade = half_pow(t);
                out.push((1, 1, t, fade.clone()));
                if n > 1 {
                    out.push((1, 2, t, (Rational::one() - &fade) / rat(n as i64 - 1, 1)));
                }
                if fade < *beta_floor || t > 4096 {
                    break;
                }
                t += 1;
            }
        }
    }
    out
}

/// Check every config invariant under the config's own strictness mode.
pub fn validate_config(cfg: &SystemConfig) -> ValidationReport {
    let mut v = Vec::new();
    let zero = Rational::zero();
    let one = Rational::one();
    let half = rat(1, 2);

    if cfg.n == 0 {
        v.push(Violation::EmptyPopulation);
    }
    if cfg.x0.len() != cfg.n {
        v.push(Violation::WrongLength { field: "x0".into(), expected: cfg.n, got: cfg.x0.len() });
    }
    if cfg.alphas.len() != cfg.n {
        v.push(Violation::WrongLength {
            field: "alphas".into(),
            expected: cfg.n,
            got: cfg.alphas.len(),
        });
    }
    match &cfg.weights {
        BetaRule::Matrix(m) => check_matrix_shape(m, cfg.n, "weights", &mut v),
        BetaRule::Table { steps, tail } => {
            for (t, m) in steps.iter().enumerate() {
                check_matrix_shape(m, cfg.n, &format!("weights step {t}"), &mut v);
            }
            check_matrix_shape(tail, cfg.n, "weights tail", &mut v);
        }
        _ => {}
    }
    if !v.is_empty() {
        // Shape errors make the value checks below index out of bounds.
        return ValidationReport { mode: cfg.mode, violations: v };
    }

    if cfg.truth < zero || cfg.truth > one {
        v.push(Violation::ValueOutOfRange { field: "h".into(), value: cfg.truth.clone(), interval: "[0, 1]" });
    }
    if cfg.epsilon < zero || cfg.epsilon > one {
        v.push(Violation::ValueOutOfRange {
            field: "epsilon".into(),
            value: cfg.epsilon.clone(),
            interval: "[0, 1]",
        });
    }
    if cfg.alpha_floor <= zero || cfg.alpha_floor > one {
        v.push(Violation::ValueOutOfRange {
            field: "alpha".into(),
            value: cfg.alpha_floor.clone(),
            interval: "(0, 1]",
        });
    }
    if cfg.beta_floor <= zero || cfg.beta_floor > half {
        v.push(Violation::ValueOutOfRange {
            field: "beta".into(),
            value: cfg.beta_floor.clone(),
            interval: "(0, 1/2]",
        });
    }
    for (idx, x) in cfg.x0.iter().enumerate() {
        if *x < zero || *x > one {
            v.push(Violation::ValueOutOfRange {
                field: format!("x0[{}]", idx + 1),
                value: x.clone(),
                interval: "[0, 1]",
            });
        }
    }

    for (idx, rule) in cfg.alphas.iter().enumerate() {
        let agent = idx + 1;
        let witnesses = rule.witnesses();
        for (step, a) in &witnesses {
            if *a < zero || *a > one {
                v.push(Violation::AlphaOutOfRange { agent, step: *step, value: a.clone() });
            }
        }
        if cfg.mode == BoundsMode::Strict {
            let all_zero = witnesses.iter().all(|(_, a)| a.is_zero());
            let all_seeker = witnesses.iter().all(|(_, a)| *a >= cfg.alpha_floor);
            if !all_zero && !all_seeker {
                v.push(Violation::UnclassifiableAlpha { agent });
            }
        }
    }

    let upper = &one - &cfg.beta_floor;
    for (from, to, step, w) in weight_witnesses(&cfg.weights, cfg.n, &cfg.beta_floor) {
        let bad = match cfg.mode {
            BoundsMode::Strict => w < cfg.beta_floor || w > upper,
            BoundsMode::Relaxed => w <= zero,
        };
        if bad {
            v.push(Violation::WeightOutOfBounds { from, to, step, value: w });
        }
    }

    ValidationReport { mode: cfg.mode, violations: v }
}

fn check_matrix_shape(m: &[Vec<Rational>], n: usize, field: &str, v: &mut Vec<Violation>) {
    if m.len() != n {
        v.push(Violation::WrongLength { field: field.into(), expected: n, got: m.len() });
        return;
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            v.push(Violation::WrongLength {
                field: format!("{field} row {}", i + 1),
                expected: n,
                got: row.len(),
            });
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("agent {agent}: attraction schedule mixes zero and truth-seeking steps (strict mode)")]
    Unclassifiable { agent: usize },
}

/// Population split derived from the schedules alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentClassification {
    /// kinds[i-1] for agent i.
    pub kinds: Vec<AgentKind>,
    /// Agents with attraction at or above the floor at every step.
    pub seekers: Vec<usize>,
    /// Everyone else.
    pub others: Vec<usize>,
}

/// Classify each agent by inspecting its schedule.
///
/// In strict mode a schedule that is neither identically zero nor always at
/// or above the floor is an error; in relaxed mode such an agent simply does
/// not count as a truth seeker.
pub fn agent_kinds(cfg: &SystemConfig) -> Result<AgentClassification, ClassifyError> {
    let mut kinds = Vec::with_capacity(cfg.n);
    let mut seekers = Vec::new();
    let mut others = Vec::new();
    for (idx, rule) in cfg.alphas.iter().enumerate() {
        let agent = idx + 1;
        let witnesses = rule.witnesses();
        let all_zero = witnesses.iter().all(|(_, a)| a.is_zero());
        let is_seeker = witnesses.iter().all(|(_, a)| *a >= cfg.alpha_floor);
        if cfg.mode == BoundsMode::Strict && !all_zero && !is_seeker {
            return Err(ClassifyError::Unclassifiable { agent });
        }
        if is_seeker {
            kinds.push(AgentKind::TruthSeeker);
            seekers.push(agent);
        } else {
            kinds.push(AgentKind::Ignorant);
            others.push(agent);
        }
    }
    Ok(AgentClassification { kinds, seekers, others })
}
