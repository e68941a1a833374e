//! Executable encodings of the worked examples and counterexamples, each
//! paired with its exact expected values: an explicit table, a closed form,
//! or a distance floor. Where a published value contradicts exact
//! evaluation, the fixture carries both and the check reports which one the
//! simulation actually matches.

use crate::model::{simulate, AlphaRule, BetaRule, BoundsMode, SystemConfig, Trajectory};
use crate::rational::{int, rat, render_rational, Rational};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixtureId {
    Interrupted2Agent,
    FiveClusters,
    AsymmetricPair,
    SingleSeeker,
    Reordering,
    BetaDecay,
    SymmetryNote,
}

impl FixtureId {
    pub const ALL: [FixtureId; 7] = [
        FixtureId::Interrupted2Agent,
        FixtureId::FiveClusters,
        FixtureId::AsymmetricPair,
        FixtureId::SingleSeeker,
        FixtureId::Reordering,
        FixtureId::BetaDecay,
        FixtureId::SymmetryNote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureId::Interrupted2Agent => "interrupted_2agent",
            FixtureId::FiveClusters => "five_clusters",
            FixtureId::AsymmetricPair => "asymmetric_pair",
            FixtureId::SingleSeeker => "single_seeker",
            FixtureId::Reordering => "reordering",
            FixtureId::BetaDecay => "beta_decay",
            FixtureId::SymmetryNote => "symmetry_note",
        }
    }

    pub fn parse(name: &str) -> Option<FixtureId> {
        FixtureId::ALL.into_iter().find(|id| id.name() == name)
    }
}

/// What the simulation is expected to produce.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// Explicit rows, one opinion vector per step starting at 0. With
    /// `stable_after` the last row must persist forever.
    Table { rows: Vec<Vec<Rational>>, stable_after: bool },
    /// Closed-form opinion vector per step, valid from the given step on.
    ClosedForm { valid_from: usize, expected: fn(&SystemConfig, usize) -> Vec<Rational> },
    /// One agent keeps at least this distance to the truth from a step on.
    DistanceFloor { agent: usize, from: usize, at_least: Rational },
}

/// A published value re-checked for the record, pass or fail.
#[derive(Debug, Clone)]
pub enum PublishedClaim {
    SeekerFormula {
        agent: usize,
        valid_from: usize,
        expected: fn(&SystemConfig, usize) -> Rational,
        description: &'static str,
    },
    DistanceFloor {
        agent: usize,
        from: usize,
        at_least: Rational,
        description: &'static str,
    },
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: FixtureId,
    pub config: SystemConfig,
    pub oracle: Oracle,
    pub published_claims: Vec<PublishedClaim>,
    pub notes: Vec<&'static str>,
    /// Horizon used when the caller does not pick one.
    pub default_horizon: usize,
}

impl Fixture {
    pub fn trajectory(&self, horizon: usize) -> Trajectory {
        simulate(&self.config, horizon, None)
            .expect("fixture weights are positive at every step")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureDiff {
    pub step: usize,
    pub agent: usize,
    pub expected: Rational,
    pub actual: Rational,
}

impl FixtureDiff {
    fn line(&self, eps: &Rational) -> String {
        format!(
            "step {}, agent {}: expected {} ({} eps), got {} ({} eps)",
            self.step,
            self.agent,
            render_rational(&self.expected),
            render_rational(&(&self.expected / eps)),
            render_rational(&self.actual),
            render_rational(&(&self.actual / eps)),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ClaimCheck {
    pub description: &'static str,
    pub holds: bool,
    pub first_divergence: Option<FixtureDiff>,
}

#[derive(Debug, Clone)]
pub struct FixtureReport {
    pub id: FixtureId,
    pub horizon: usize,
    /// Last step the binding oracle covers at this horizon.
    pub checked_through: usize,
    pub diffs: Vec<FixtureDiff>,
    pub claims: Vec<ClaimCheck>,
    pub notes: Vec<&'static str>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn lines(&self, eps: &Rational) -> Vec<String> {
        let mut out = vec![format!(
            "{}: oracle checked through step {} over horizon {} -> {}",
            self.id.name(),
            self.checked_through,
            self.horizon,
            if self.passed() { "match" } else { "MISMATCH" }
        )];
        for d in &self.diffs {
            out.push(format!("  {}", d.line(eps)));
        }
        for c in &self.claims {
            out.push(format!(
                "  published claim {}: {}",
                if c.holds { "holds" } else { "does not hold" },
                c.description
            ));
            if let Some(d) = &c.first_divergence {
                out.push(format!("    first divergence at {}", d.line(eps)));
            }
        }
        for n in &self.notes {
            out.push(format!("  note: {n}"));
        }
        out
    }
}

pub fn fixture(id: FixtureId) -> Fixture {
    match id {
        FixtureId::Interrupted2Agent => interrupted_2agent(),
        FixtureId::FiveClusters => five_clusters(),
        FixtureId::AsymmetricPair => asymmetric_pair(),
        FixtureId::SingleSeeker => single_seeker(),
        FixtureId::Reordering => reordering(),
        FixtureId::BetaDecay => beta_decay(),
        FixtureId::SymmetryNote => symmetry_note(),
    }
}

/// Simulate a fixture and diff every covered step against its oracle, then
/// re-check any published claims it carries.
pub fn check_fixture(id: FixtureId, horizon: usize) -> FixtureReport {
    let fx = fixture(id);
    let traj = fx.trajectory(horizon);
    let cfg = &fx.config;

    let mut diffs = Vec::new();
    let checked_through = match &fx.oracle {
        Oracle::Table { rows, stable_after } => {
            let last = rows.len() - 1;
            let through = if *stable_after { horizon } else { horizon.min(last) };
            for t in 0..=through {
                let row = &rows[t.min(last)];
                for (idx, expected) in row.iter().enumerate() {
                    let actual = traj.state(t).opinion(idx + 1);
                    if actual != expected {
                        diffs.push(FixtureDiff {
                            step: t,
                            agent: idx + 1,
                            expected: expected.clone(),
                            actual: actual.clone(),
                        });
                    }
                }
            }
            through
        }
        Oracle::ClosedForm { valid_from, expected } => {
            for t in *valid_from..=horizon {
                let row = expected(cfg, t);
                for (idx, want) in row.iter().enumerate() {
                    let actual = traj.state(t).opinion(idx + 1);
                    if actual != want {
                        diffs.push(FixtureDiff {
                            step: t,
                            agent: idx + 1,
                            expected: want.clone(),
                            actual: actual.clone(),
                        });
                    }
                }
            }
            horizon
        }
        Oracle::DistanceFloor { agent, from, at_least } => {
            for t in *from..=horizon {
                let dist = (traj.state(t).opinion(*agent) - &cfg.truth).abs();
                if dist < *at_least {
                    diffs.push(FixtureDiff {
                        step: t,
                        agent: *agent,
                        expected: at_least.clone(),
                        actual: dist,
                    });
                }
            }
            horizon
        }
    };

    let claims = fx
        .published_claims
        .iter()
        .map(|claim| check_claim(claim, cfg, &traj, horizon))
        .collect();

    FixtureReport {
        id,
        horizon,
        checked_through,
        diffs,
        claims,
        notes: fx.notes.clone(),
    }
}

fn check_claim(
    claim: &PublishedClaim,
    cfg: &SystemConfig,
    traj: &Trajectory,
    horizon: usize,
) -> ClaimCheck {
    match claim {
        PublishedClaim::SeekerFormula { agent, valid_from, expected, description } => {
            let mut first = None;
            for t in *valid_from..=horizon {
                let want = expected(cfg, t);
                let actual = traj.state(t).opinion(*agent);
                if *actual != want {
                    first = Some(FixtureDiff {
                        step: t,
                        agent: *agent,
                        expected: want,
                        actual: actual.clone(),
                    });
                    break;
                }
            }
            ClaimCheck { description, holds: first.is_none(), first_divergence: first }
        }
        PublishedClaim::DistanceFloor { agent, from, at_least, description } => {
            let mut first = None;
            for t in *from..=horizon {
                let dist = (traj.state(t).opinion(*agent) - &cfg.truth).abs();
                if dist < *at_least {
                    first = Some(FixtureDiff {
                        step: t,
                        agent: *agent,
                        expected: at_least.clone(),
                        actual: dist,
                    });
                    break;
                }
            }
            ClaimCheck { description, holds: first.is_none(), first_divergence: first }
        }
    }
}

fn zeros(n: usize) -> Vec<AlphaRule> {
    vec![AlphaRule::Constant(Rational::zero()); n]
}

fn eps_row(eps: &Rational, multiples: &[(i64, i64)]) -> Vec<Rational> {
    multiples.iter().map(|&(p, q)| rat(p, q) * eps).collect()
}

/// Truth seeker at 2ε decays toward the truth h = ε, alone, until it picks
/// up a frozen ignorant sitting at ε̃ = ε/16 on the far side; the pickup at
/// step 4 (the least T with 2^{-T} ≤ 1/16) yanks it away at step 5.
fn interrupted_2agent() -> Fixture {
    let eps = rat(1, 4);
    let config = SystemConfig {
        n: 2,
        truth: eps.clone(),
        epsilon: eps.clone(),
        alpha_floor: rat(1, 2),
        beta_floor: rat(1, 2),
        alphas: vec![AlphaRule::Constant(rat(1, 2)), AlphaRule::Constant(Rational::zero())],
        weights: BetaRule::Uniform,
        x0: eps_row(&eps, &[(2, 1), (1, 16)]),
        mode: BoundsMode::Strict,
    };
    let rows = vec![
        eps_row(&eps, &[(2, 1), (1, 16)]),
        eps_row(&eps, &[(3, 2), (1, 16)]),
        eps_row(&eps, &[(5, 4), (1, 16)]),
        eps_row(&eps, &[(9, 8), (1, 16)]),
        eps_row(&eps, &[(17, 16), (1, 16)]),
        eps_row(&eps, &[(25, 32), (9, 16)]),
    ];
    Fixture {
        id: FixtureId::Interrupted2Agent,
        config,
        oracle: Oracle::Table { rows, stable_after: false },
        published_claims: vec![],
        notes: vec![
            "while alone the seeker follows x1(t) = (1 + 2^-t) eps; the distance halves each step",
            "at step 4 the gap to the frozen ignorant is exactly eps, so the ignorant enters the confidence set and drags the seeker below the truth at step 5",
        ],
        default_horizon: 5,
    }
}

/// Twelve ignorants on an ε ladder collapse into five clusters in three
/// steps; the published table is the oracle.
fn five_clusters() -> Fixture {
    let eps = rat(1, 10);
    let config = SystemConfig {
        n: 12,
        truth: rat(1, 2),
        epsilon: eps.clone(),
        alpha_floor: rat(1, 2),
        beta_floor: rat(1, 12),
        alphas: zeros(12),
        weights: BetaRule::Uniform,
        x0: eps_row(
            &eps,
            &[(0, 1), (0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (4, 1), (5, 1), (6, 1), (7, 1), (8, 1), (8, 1)],
        ),
        mode: BoundsMode::Strict,
    };
    let rows = vec![
        eps_row(
            &eps,
            &[(0, 1), (0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (4, 1), (5, 1), (6, 1), (7, 1), (8, 1), (8, 1)],
        ),
        eps_row(
            &eps,
            &[
                (1, 3),
                (1, 3),
                (3, 4),
                (2, 1),
                (13, 4),
                (4, 1),
                (4, 1),
                (19, 4),
                (6, 1),
                (29, 4),
                (23, 3),
                (23, 3),
            ],
        ),
        eps_row(
            &eps,
            &[
                (17, 36),
                (17, 36),
                (17, 36),
                (2, 1),
                (15, 4),
                (4, 1),
                (4, 1),
                (17, 4),
                (6, 1),
                (271, 36),
                (271, 36),
                (271, 36),
            ],
        ),
        eps_row(
            &eps,
            &[
                (17, 36),
                (17, 36),
                (17, 36),
                (2, 1),
                (4, 1),
                (4, 1),
                (4, 1),
                (4, 1),
                (6, 1),
                (271, 36),
                (271, 36),
                (271, 36),
            ],
        ),
    ];
    Fixture {
        id: FixtureId::FiveClusters,
        config,
        oracle: Oracle::Table { rows, stable_after: true },
        published_claims: vec![],
        notes: vec![
            "stable from step 3 on with five distinct values 17/36, 2, 4, 6, 271/36 in units of eps",
        ],
        default_horizon: 4,
    }
}

fn asymmetric_pair_form(cfg: &SystemConfig, t: usize) -> Vec<Rational> {
    let pow = int(6).pow(t as i32);
    vec![
        (rat(2, 5) - rat(2, 5) / &pow) * &cfg.epsilon,
        (rat(2, 5) + rat(3, 5) / &pow) * &cfg.epsilon,
    ]
}

/// Two ignorants with asymmetric weights: the gap ε/6^t never vanishes, so
/// no step is a fixed point, yet both opinions converge to (2/5)ε.
fn asymmetric_pair() -> Fixture {
    let eps = rat(1, 2);
    let config = SystemConfig {
        n: 2,
        truth: rat(1, 4),
        epsilon: eps.clone(),
        alpha_floor: rat(1, 2),
        beta_floor: rat(1, 3),
        alphas: zeros(2),
        weights: BetaRule::Matrix(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 2), rat(1, 2)],
        ]),
        x0: vec![Rational::zero(), eps],
        mode: BoundsMode::Strict,
    };
    Fixture {
        id: FixtureId::AsymmetricPair,
        config,
        oracle: Oracle::ClosedForm { valid_from: 0, expected: asymmetric_pair_form },
        published_claims: vec![],
        notes: vec![
            "the gap |x1 - x2| = eps/6^t is positive at every finite step, so the run never stabilizes",
            "the truth and the attraction floor are irrelevant: both agents are ignorants",
        ],
        default_horizon: 20,
    }
}

fn single_seeker_base(cfg: &SystemConfig, t: usize) -> Rational {
    // (1/2 - 1/n)(1 - alpha/n)^(t-1)
    let n = int(cfg.n as i64);
    let alpha = &cfg.alpha_floor;
    (rat(1, 2) - int(1) / &n) * (Rational::one() - alpha / &n).pow(t as i32 - 1)
}

fn single_seeker_form(cfg: &SystemConfig, t: usize) -> Vec<Rational> {
    if t == 0 {
        return cfg.x0.clone();
    }
    let base = single_seeker_base(cfg, t);
    let ignorant = (rat(1, 2) + &base) * &cfg.epsilon;
    let seeker = (rat(1, 2) + (Rational::one() - &cfg.alpha_floor) * &base) * &cfg.epsilon;
    let mut row = vec![ignorant; cfg.n];
    row[0] = seeker;
    row
}

fn single_seeker_quoted(cfg: &SystemConfig, t: usize) -> Rational {
    // published form with the seeker below the truth: [1/2 - alpha * base] eps
    (rat(1, 2) - &cfg.alpha_floor * single_seeker_base(cfg, t)) * &cfg.epsilon
}

/// One truth seeker at 0 below a herd of five ignorants at ε. The herd
/// follows its published closed form exactly; the published seeker formula
/// puts it below the truth, while direct iteration pulls it above, so the
/// fixture carries the derived form as oracle and re-checks the published
/// one for the record.
fn single_seeker() -> Fixture {
    let eps = rat(1, 2);
    let mut alphas = zeros(6);
    alphas[0] = AlphaRule::Constant(rat(2, 3));
    let mut x0 = vec![eps.clone(); 6];
    x0[0] = Rational::zero();
    let config = SystemConfig {
        n: 6,
        truth: rat(1, 4),
        epsilon: eps,
        alpha_floor: rat(2, 3),
        beta_floor: rat(1, 6),
        alphas,
        weights: BetaRule::Uniform,
        x0,
        mode: BoundsMode::Strict,
    };
    Fixture {
        id: FixtureId::SingleSeeker,
        config,
        oracle: Oracle::ClosedForm { valid_from: 0, expected: single_seeker_form },
        published_claims: vec![PublishedClaim::SeekerFormula {
            agent: 1,
            valid_from: 1,
            expected: single_seeker_quoted,
            description: "quoted seeker formula [1/2 - alpha(1/2 - 1/n)(1 - alpha/n)^(t-1)] eps",
        }],
        notes: vec![
            "the quoted seeker formula carries a sign slip: it places the seeker below the truth, but direct iteration gives [1/2 + (1-alpha)(1/2 - 1/n)(1 - alpha/n)^(t-1)] eps above it; at step 1 the quoted value is (5/18) eps against a simulated (11/18) eps",
            "the ignorants' quoted closed form matches simulation exactly",
        ],
        default_horizon: 30,
    }
}

/// Three ignorants whose asymmetric weights reverse the opinion order in a
/// single step: the lowest jumps to the top.
fn reordering() -> Fixture {
    let eps = rat(1, 4);
    let config = SystemConfig {
        n: 3,
        truth: rat(1, 4),
        epsilon: eps.clone(),
        alpha_floor: rat(1, 2),
        beta_floor: rat(1, 100),
        alphas: zeros(3),
        weights: BetaRule::Matrix(vec![
            vec![rat(1, 100), rat(1, 100), rat(49, 50)],
            vec![rat(49, 50), rat(1, 100), rat(1, 100)],
            vec![rat(2, 5), rat(2, 5), rat(1, 5)],
        ]),
        x0: eps_row(&eps, &[(1, 1), (3, 2), (2, 1)]),
        mode: BoundsMode::Strict,
    };
    let rows = vec![
        eps_row(&eps, &[(1, 1), (3, 2), (2, 1)]),
        eps_row(&eps, &[(397, 200), (203, 200), (7, 5)]),
    ];
    Fixture {
        id: FixtureId::Reordering,
        config,
        oracle: Oracle::Table { rows, stable_after: false },
        published_claims: vec![],
        notes: vec![
            "after one step the opinions are (1.985, 1.015, 1.4) eps: the order is fully reversed",
            "any ordering is reachable in one step with suitable weights",
        ],
        default_horizon: 1,
    }
}

/// Weights on the leading agent fade as (1/2)^{t+1} — no positive lower
/// weight bound — and the truth seeker stays bounded away from the truth.
fn beta_decay() -> Fixture {
    let eps = rat(1, 5);
    let config = SystemConfig {
        n: 2,
        truth: int(1),
        epsilon: eps.clone(),
        alpha_floor: rat(1, 5),
        beta_floor: rat(1, 2),
        alphas: vec![AlphaRule::Constant(rat(1, 5)), AlphaRule::Constant(Rational::zero())],
        weights: BetaRule::GeometricFade,
        x0: vec![int(1) - &eps / int(5), int(1) - &eps],
        mode: BoundsMode::Relaxed,
    };
    Fixture {
        id: FixtureId::BetaDecay,
        config,
        oracle: Oracle::DistanceFloor { agent: 1, from: 1, at_least: rat(2, 5) * &eps },
        published_claims: vec![PublishedClaim::DistanceFloor {
            agent: 1,
            from: 1,
            at_least: &eps / int(2),
            description: "quoted floor eps/2 on the seeker's distance to the truth",
        }],
        notes: vec![
            "the quoted floor eps/2 fails at step 1, where the exact distance is (12/25) eps; the weaker floor (2/5) eps holds at every checked step",
            "weights on agent 1 fade as (1/2)^(t+1), so no fixed positive lower weight bound exists; contraction monitors report findings here by design",
        ],
        default_horizon: 200,
    }
}

/// Two ignorants with symmetric weights meet in the middle after one step —
/// the stable-after-finitely-many-steps remark in its smallest instance.
fn symmetry_note() -> Fixture {
    let eps = rat(1, 2);
    let config = SystemConfig {
        n: 2,
        truth: rat(1, 4),
        epsilon: eps.clone(),
        alpha_floor: rat(1, 2),
        beta_floor: rat(1, 2),
        alphas: zeros(2),
        weights: BetaRule::Uniform,
        x0: vec![Rational::zero(), eps],
        mode: BoundsMode::Strict,
    };
    let rows = vec![
        vec![Rational::zero(), rat(1, 2)],
        vec![rat(1, 4), rat(1, 4)],
    ];
    Fixture {
        id: FixtureId::SymmetryNote,
        config,
        oracle: Oracle::Table { rows, stable_after: true },
        published_claims: vec![],
        notes: vec![
            "symmetric weights without truth seekers stabilize after finitely many steps; this instance does so in one",
        ],
        default_horizon: 3,
    }
}
