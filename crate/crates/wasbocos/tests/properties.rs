//! Invariants that must hold on every strict-mode configuration, checked
//! over the seeded random sampler rather than hand-picked examples.

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasbocos::config_io::{parse_config_str, render_config};
use wasbocos::model::{agent_kinds, simulate, BetaRule, SystemConfig};
use wasbocos::rational::{rat, Rational};
use wasbocos::sweep::{sample_config, SweepKind};
use wasbocos::verify::{
    analyze_trajectory, certify_convergence, monitor_containment, monitor_hope_monotone, Verdict,
};

fn sampled(seed: u64, max_n: usize) -> SystemConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_config(&mut rng, max_n, SweepKind::FixedHorizon)
}

fn hull(values: impl IntoIterator<Item = Rational>) -> (Rational, Rational) {
    let mut it = values.into_iter();
    let first = it.next().expect("nonempty");
    let mut lo = first.clone();
    let mut hi = first;
    for v in it {
        if v < lo {
            lo = v.clone();
        }
        if v > hi {
            hi = v;
        }
    }
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    // Each opinion is a convex mix of current opinions and the truth, so the
    // population never leaves the hull of its previous state plus h.
    #[test]
    fn opinions_never_leave_the_running_hull(seed in any::<u64>()) {
        let cfg = sampled(seed, 8);
        let traj = simulate(&cfg, 10, None).unwrap();
        for t in 0..traj.horizon() {
            let (lo, hi) = hull(
                traj.state(t).x.iter().cloned().chain(std::iter::once(cfg.truth.clone())),
            );
            for v in &traj.state(t + 1).x {
                prop_assert!(*v >= lo && *v <= hi, "step {} left [{lo}, {hi}]", t + 1);
            }
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let cfg = sampled(seed, 6);
        let a = simulate(&cfg, 8, None).unwrap();
        let b = simulate(&cfg, 8, None).unwrap();
        prop_assert_eq!(a.states, b.states);
    }

    // Agent labels carry no meaning: relabeling the population relabels the
    // trajectory and nothing else.
    #[test]
    fn relabeling_agents_relabels_the_trajectory(seed in any::<u64>(), shuffle_seed in any::<u64>()) {
        let cfg = sampled(seed, 6);
        let mut order: Vec<usize> = (0..cfg.n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));

        let weights = match &cfg.weights {
            BetaRule::Uniform => BetaRule::Uniform,
            BetaRule::Matrix(m) => BetaRule::Matrix(
                order.iter().map(|&i| order.iter().map(|&j| m[i][j].clone()).collect()).collect(),
            ),
            other => {
                prop_assert!(false, "sampler only draws uniform or matrix weights, got {other:?}");
                unreachable!()
            }
        };
        let permuted = SystemConfig {
            alphas: order.iter().map(|&i| cfg.alphas[i].clone()).collect(),
            x0: order.iter().map(|&i| cfg.x0[i].clone()).collect(),
            weights,
            ..cfg.clone()
        };

        let base = simulate(&cfg, 8, None).unwrap();
        let moved = simulate(&permuted, 8, None).unwrap();
        for t in 0..=base.horizon() {
            for (new_idx, &old_idx) in order.iter().enumerate() {
                prop_assert_eq!(
                    &moved.state(t).x[new_idx],
                    &base.state(t).x[old_idx],
                    "step {} agent {}", t, new_idx + 1
                );
            }
        }
    }

    // The dynamics are homogeneous: scaling opinions, truth, and radius by
    // the same positive factor scales the whole trajectory.
    #[test]
    fn scaling_the_geometry_scales_the_trajectory(seed in any::<u64>(), pick in 0usize..3) {
        let cfg = sampled(seed, 6);
        let s = [rat(1, 2), rat(1, 3), rat(2, 1)][pick].clone();
        let scaled = SystemConfig {
            truth: &cfg.truth * &s,
            epsilon: &cfg.epsilon * &s,
            x0: cfg.x0.iter().map(|v| v * &s).collect(),
            ..cfg.clone()
        };
        let base = simulate(&cfg, 8, None).unwrap();
        let big = simulate(&scaled, 8, None).unwrap();
        for t in 0..=base.horizon() {
            for i in 0..cfg.n {
                prop_assert_eq!(&big.state(t).x[i], &(&base.state(t).x[i] * &s));
            }
        }
    }

    // The scaled near/mid/far split is a partition of the interval members,
    // on both sides, at every step.
    #[test]
    fn scaled_bands_partition_the_members(seed in any::<u64>()) {
        let cfg = sampled(seed, 8);
        let traj = simulate(&cfg, 10, None).unwrap();
        let analysis = analyze_trajectory(&traj).unwrap();
        for (t, step) in analysis.steps.iter().enumerate() {
            for part in [&step.partitions.scaled_lower, &step.partitions.scaled_upper] {
                let mut union: Vec<usize> =
                    part.near.iter().chain(&part.mid).chain(&part.far).copied().collect();
                union.sort_unstable();
                let before = union.len();
                union.dedup();
                prop_assert_eq!(before, union.len(), "step {}: bands overlap", t);
                prop_assert_eq!(&union, &step.hope.members, "step {}", t);
            }
        }
    }

    // Core soundness on random instances: opinions stay inside their
    // neighborhoods' spans and the hope interval never widens.
    #[test]
    fn containment_and_monotonicity_hold_everywhere(seed in any::<u64>()) {
        let cfg = sampled(seed, 8);
        let traj = simulate(&cfg, 10, None).unwrap();
        let analysis = analyze_trajectory(&traj).unwrap();
        prop_assert_eq!(monitor_containment(&traj).verdict, Verdict::Pass);
        prop_assert_eq!(monitor_hope_monotone(&traj, &analysis).verdict, Verdict::Pass);
    }

    // Interruption counting ignores the tolerance entirely, and a run that
    // certifies at a tolerance certifies at every looser one.
    #[test]
    fn certificates_respect_tolerance_ordering(seed in any::<u64>()) {
        let cfg = sampled(seed, 6);
        prop_assume!(agent_kinds(&cfg).is_ok_and(|c| !c.seekers.is_empty()));
        let traj = simulate(&cfg, 12, None).unwrap();
        let tight = certify_convergence(&traj, &(&cfg.epsilon / rat(100, 1)), None).unwrap();
        let loose = certify_convergence(&traj, &(&cfg.epsilon / rat(10, 1)), None).unwrap();
        prop_assert_eq!(tight.interruption_count, loose.interruption_count);
        if tight.converged {
            prop_assert!(loose.converged);
        }
    }

    // Text round trip is exact for every sampled config, both sweep kinds.
    #[test]
    fn rendered_configs_parse_back(seed in any::<u64>(), phase in any::<bool>()) {
        let kind = if phase { SweepKind::PhaseOneBound } else { SweepKind::FixedHorizon };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = sample_config(&mut rng, 8, kind);
        prop_assert_eq!(parse_config_str(&render_config(&cfg)).unwrap(), cfg);
    }
}

#[test]
fn seeker_distances_are_nonnegative_and_vanish_exactly_at_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let cfg = sample_config(&mut rng, 5, SweepKind::PhaseOneBound);
        let seekers = agent_kinds(&cfg).unwrap().seekers;
        let traj = simulate(&cfg, 6, None).unwrap();
        let cert = certify_convergence(&traj, &rat(1, 100), None).unwrap();
        assert_eq!(cert.distances.len(), traj.horizon() + 1);
        for (t, d) in cert.distances.iter().enumerate() {
            assert!(!d.is_negative(), "distance negative at step {t}");
            let all_at_truth = seekers.iter().all(|&k| traj.state(t).opinion(k) == &cfg.truth);
            assert_eq!(d.is_zero(), all_at_truth, "step {t}");
        }
    }
}
