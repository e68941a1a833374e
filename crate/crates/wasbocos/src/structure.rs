//! Structural analysis of a single step: the confidence graph over agents
//! plus a virtual truth vertex, the extremal agents that frame the hope
//! interval, and the near/mid/far partitions used by the contraction
//! monitors.
//!
//! Vertex ids: 0 is the virtual truth vertex (its value is `h`); agents keep
//! their 1-based ids. The truth vertex participates in connectivity only —
//! it never appears in a confidence set and exerts no averaging pull.

use crate::model::{OpinionState, SystemConfig};
use crate::rational::Rational;
use num_traits::{Signed, Zero};

/// Id of the virtual truth vertex.
pub const TRUTH_VERTEX: usize = 0;

/// Value carried by a vertex: the truth for vertex 0, the opinion otherwise.
pub fn vertex_value<'a>(state: &'a OpinionState, truth: &'a Rational, v: usize) -> &'a Rational {
    if v == TRUTH_VERTEX {
        truth
    } else {
        state.opinion(v)
    }
}

/// Plain union-find over vertex ids 0..=n.
struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(len: usize) -> Self {
        DisjointSets { parent: (0..len).collect() }
    }

    fn find(&mut self, v: usize) -> usize {
        if self.parent[v] != v {
            let root = self.find(self.parent[v]);
            self.parent[v] = root;
        }
        self.parent[v]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller id as root so components sort naturally
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Proximity graph on [n] ∪ {0}: an edge joins two vertices whose values are
/// within ε of each other (closed comparison).
#[derive(Debug, Clone)]
pub struct ConfidenceGraph {
    pub n: usize,
    /// Unordered edges as (low, high) pairs.
    pub edges: Vec<(usize, usize)>,
    /// Connected components; each sorted ascending, components ordered by
    /// smallest member.
    pub components: Vec<Vec<usize>>,
    component_index: Vec<usize>,
}

impl ConfidenceGraph {
    /// The component containing vertex `v`.
    pub fn component_of(&self, v: usize) -> &[usize] {
        &self.components[self.component_index[v]]
    }

    pub fn same_component(&self, a: usize, b: usize) -> bool {
        self.component_index[a] == self.component_index[b]
    }
}

pub fn build_confidence_graph(cfg: &SystemConfig, state: &OpinionState) -> ConfidenceGraph {
    let n = cfg.n;
    let mut edges = Vec::new();
    let mut sets = DisjointSets::new(n + 1);
    for a in 0..=n {
        let va = vertex_value(state, &cfg.truth, a);
        for b in (a + 1)..=n {
            let vb = vertex_value(state, &cfg.truth, b);
            if (va - vb).abs() <= cfg.epsilon {
                edges.push((a, b));
                sets.union(a, b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut component_index = vec![usize::MAX; n + 1];
    for v in 0..=n {
        let root = sets.find(v);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(v),
            None => groups.push((root, vec![v])),
        }
    }
    // roots are the smallest ids of their components, and vertices were
    // scanned ascending, so groups are already in canonical order
    let components: Vec<Vec<usize>> = groups.into_iter().map(|(_, m)| m).collect();
    for (ci, comp) in components.iter().enumerate() {
        for &v in comp {
            component_index[v] = ci;
        }
    }
    ConfidenceGraph { n, edges, components, component_index }
}

/// The four framing vertices of a step.
///
/// `top_seeker` is the smallest-index truth seeker whose opinion is at or
/// above the truth and maximal among all seekers (0 when no seeker sits at or
/// above the truth); `bottom_seeker` is the mirror image. `hope_upper` /
/// `hope_lower` extremize value over the component of the corresponding
/// seeker sentinel, smallest vertex id winning ties — so either may be 0 when
/// the truth vertex itself is the extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extremes {
    pub top_seeker: usize,
    pub bottom_seeker: usize,
    pub hope_upper: usize,
    pub hope_lower: usize,
}

pub fn extremal_agents(
    cfg: &SystemConfig,
    state: &OpinionState,
    graph: &ConfidenceGraph,
    seekers: &[usize],
) -> Extremes {
    let h = &cfg.truth;

    let seeker_max = seekers.iter().map(|&k| state.opinion(k)).max();
    let top_seeker = match seeker_max {
        Some(m) if m >= h => seekers.iter().copied().find(|&k| state.opinion(k) == m).unwrap(),
        _ => TRUTH_VERTEX,
    };
    let seeker_min = seekers.iter().map(|&k| state.opinion(k)).min();
    let bottom_seeker = match seeker_min {
        Some(m) if m <= h => seekers.iter().copied().find(|&k| state.opinion(k) == m).unwrap(),
        _ => TRUTH_VERTEX,
    };

    let extreme_of = |anchor: usize, want_max: bool| -> usize {
        let mut best = anchor;
        let mut best_val = vertex_value(state, h, anchor);
        for &v in graph.component_of(anchor) {
            let val = vertex_value(state, h, v);
            let better = if want_max { val > best_val } else { val < best_val };
            // components are sorted ascending, so strict improvement keeps
            // the smallest id among ties — except the anchor seed itself,
            // which an earlier equal vertex must displace
            if better || (val == best_val && v < best) {
                best = v;
                best_val = val;
            }
        }
        best
    };

    Extremes {
        top_seeker,
        bottom_seeker,
        hope_upper: extreme_of(top_seeker, true),
        hope_lower: extreme_of(bottom_seeker, false),
    }
}

/// The hope interval [x_lower, x_upper] framed by the extremes, its two side
/// lengths measured from the truth, and the membership split.
#[derive(Debug, Clone, PartialEq)]
pub struct HopeState {
    pub extremes: Extremes,
    /// |x_{hope_lower} - h|
    pub lower_len: Rational,
    /// |x_{hope_upper} - h|
    pub upper_len: Rational,
    /// Agents whose opinion lies inside the interval (ascending ids).
    pub members: Vec<usize>,
    /// Agents outside it.
    pub lost: Vec<usize>,
}

pub fn hope_state(cfg: &SystemConfig, state: &OpinionState, extremes: &Extremes) -> HopeState {
    let h = &cfg.truth;
    let lo = vertex_value(state, h, extremes.hope_lower).clone();
    let hi = vertex_value(state, h, extremes.hope_upper).clone();
    let mut members = Vec::new();
    let mut lost = Vec::new();
    for i in 1..=cfg.n {
        let x = state.opinion(i);
        if *x >= lo && *x <= hi {
            members.push(i);
        } else {
            lost.push(i);
        }
    }
    HopeState {
        extremes: *extremes,
        lower_len: (&lo - h).abs(),
        upper_len: (&hi - h).abs(),
        members,
        lost,
    }
}

/// One side's split by distance from an anchor vertex: `near` within the
/// side's movement quantum, `mid` from the quantum out to ε, `far` past ε on
/// the interval side of the anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidePartition {
    pub near: Vec<usize>,
    pub mid: Vec<usize>,
    pub far: Vec<usize>,
}

/// Both phases' partitions around the two interval ends.
///
/// Coarse sets use the fixed quantum εαβ/12; scaled sets use αβℓ/12 with the
/// side's own current length ℓ and additionally clamp `far` to the hope
/// interval, which makes the two scaled unions coincide with the member set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSets {
    pub coarse_lower: SidePartition,
    pub coarse_upper: SidePartition,
    pub scaled_lower: SidePartition,
    pub scaled_upper: SidePartition,
}

/// Distance threshold note: `near` is the half-open [0, θ); when a side
/// length collapses to θ = 0 the anchor's value-equal agents stay in `near`
/// and `mid` becomes the punctured (0, ε].
fn split_side(
    state: &OpinionState,
    n: usize,
    anchor_value: &Rational,
    theta: &Rational,
    epsilon: &Rational,
    far_extra: impl Fn(&Rational) -> bool,
    lower_side: bool,
) -> SidePartition {
    let mut part = SidePartition { near: vec![], mid: vec![], far: vec![] };
    for i in 1..=n {
        let x = state.opinion(i);
        let d = (x - anchor_value).abs();
        if d.is_zero() || d < *theta {
            part.near.push(i);
        } else if d <= *epsilon {
            part.mid.push(i);
        } else {
            let beyond = if lower_side { x - anchor_value > *epsilon } else { anchor_value - x > *epsilon };
            if beyond && far_extra(x) {
                part.far.push(i);
            }
        }
    }
    part
}

pub fn partition_sets(cfg: &SystemConfig, state: &OpinionState, hope: &HopeState) -> PartitionSets {
    let h = &cfg.truth;
    let twelve = crate::rational::int(12);
    let coarse_theta = &cfg.epsilon * &cfg.alpha_floor * &cfg.beta_floor / &twelve;
    let scale = &cfg.alpha_floor * &cfg.beta_floor / &twelve;
    let lower_theta = &scale * &hope.lower_len;
    let upper_theta = &scale * &hope.upper_len;

    let lower_anchor = vertex_value(state, h, hope.extremes.hope_lower).clone();
    let upper_anchor = vertex_value(state, h, hope.extremes.hope_upper).clone();
    let upper_cap = h + &hope.upper_len; // x_{hope_upper}
    let lower_cap = h - &hope.lower_len; // x_{hope_lower}

    PartitionSets {
        coarse_lower: split_side(state, cfg.n, &lower_anchor, &coarse_theta, &cfg.epsilon, |_| true, true),
        coarse_upper: split_side(state, cfg.n, &upper_anchor, &coarse_theta, &cfg.epsilon, |_| true, false),
        scaled_lower: split_side(
            state,
            cfg.n,
            &lower_anchor,
            &lower_theta,
            &cfg.epsilon,
            |x| *x <= upper_cap,
            true,
        ),
        scaled_upper: split_side(
            state,
            cfg.n,
            &upper_anchor,
            &upper_theta,
            &cfg.epsilon,
            |x| *x >= lower_cap,
            false,
        ),
    }
}

/// Everything the monitors need about one step.
#[derive(Debug, Clone)]
pub struct StepStructure {
    pub graph: ConfidenceGraph,
    pub extremes: Extremes,
    pub hope: HopeState,
    pub partitions: PartitionSets,
}

pub fn analyze_step(cfg: &SystemConfig, state: &OpinionState, seekers: &[usize]) -> StepStructure {
    let graph = build_confidence_graph(cfg, state);
    let extremes = extremal_agents(cfg, state, &graph, seekers);
    let hope = hope_state(cfg, state, &extremes);
    let partitions = partition_sets(cfg, state, &hope);
    StepStructure { graph, extremes, hope, partitions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{agent_kinds, AlphaRule, BetaRule, BoundsMode, SystemConfig};
    use crate::rational::{int, rat, Rational};

    fn config_with_seekers(
        eps: Rational,
        truth: Rational,
        positions: Vec<Rational>,
        seekers: &[usize],
    ) -> SystemConfig {
        let n = positions.len();
        let alphas = (1..=n)
            .map(|i| {
                if seekers.contains(&i) {
                    AlphaRule::Constant(rat(1, 2))
                } else {
                    AlphaRule::Constant(Rational::zero())
                }
            })
            .collect();
        SystemConfig {
            n,
            truth,
            epsilon: eps,
            alpha_floor: rat(1, 2),
            beta_floor: rat(1, n as i64),
            alphas,
            weights: BetaRule::Uniform,
            x0: positions,
            mode: BoundsMode::Strict,
        }
    }

    fn state_of(cfg: &SystemConfig) -> OpinionState {
        OpinionState { t: 0, x: cfg.x0.clone() }
    }

    /// Twelve agents spread over [0, 3.4ε] with five truth seekers and the
    /// truth at 2.625ε; one agent sits isolated at the bottom.
    fn spread_population() -> SystemConfig {
        let eps = rat(1, 5);
        let multiples = [
            int(0),
            rat(27, 20),
            rat(33, 20),
            int(2),
            rat(87, 40),
            rat(47, 20),
            rat(5, 2),
            rat(11, 4),
            int(3),
            int(3),
            rat(16, 5),
            rat(17, 5),
        ];
        let positions = multiples.iter().map(|m| m * &eps).collect();
        config_with_seekers(eps.clone(), rat(21, 8) * &eps, positions, &[4, 6, 7, 9, 10])
    }

    #[test]
    fn graph_separates_the_isolated_agent() {
        let cfg = spread_population();
        let state = state_of(&cfg);
        let graph = build_confidence_graph(&cfg, &state);
        assert_eq!(graph.components.len(), 2);
        assert_eq!(graph.components[0], vec![0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
        assert_eq!(graph.components[1], vec![1]);
        assert!(graph.same_component(0, 9));
        assert!(!graph.same_component(1, 2));
    }

    #[test]
    fn extremes_and_hope_interval_on_the_spread_population() {
        let cfg = spread_population();
        let state = state_of(&cfg);
        let seekers = agent_kinds(&cfg).unwrap().seekers;
        assert_eq!(seekers, vec![4, 6, 7, 9, 10]);
        let graph = build_confidence_graph(&cfg, &state);
        let ex = extremal_agents(&cfg, &state, &graph, &seekers);
        assert_eq!(
            ex,
            Extremes { top_seeker: 9, bottom_seeker: 4, hope_upper: 12, hope_lower: 2 }
        );
        let hope = hope_state(&cfg, &state, &ex);
        let eps = &cfg.epsilon;
        assert_eq!(hope.lower_len, rat(51, 40) * eps);
        assert_eq!(hope.upper_len, rat(31, 40) * eps);
        assert_eq!(hope.members, (2..=12).collect::<Vec<_>>());
        assert_eq!(hope.lost, vec![1]);
    }

    /// Five agents where no seeker sits at or above the truth: the top
    /// sentinel falls back to the truth vertex and the upper interval end is
    /// found inside the truth vertex's component.
    #[test]
    fn truth_vertex_substitutes_for_missing_seekers() {
        let eps = rat(1, 5);
        let positions = [int(0), rat(3, 2), rat(11, 4), rat(16, 5), rat(17, 5)]
            .iter()
            .map(|m| m * &eps)
            .collect();
        let cfg = config_with_seekers(eps.clone(), rat(21, 8) * &eps, positions, &[2]);
        let state = state_of(&cfg);
        let graph = build_confidence_graph(&cfg, &state);
        assert_eq!(graph.components.len(), 3);
        assert_eq!(graph.components[0], vec![0, 3, 4, 5]);
        assert_eq!(graph.components[1], vec![1]);
        assert_eq!(graph.components[2], vec![2]);

        let ex = extremal_agents(&cfg, &state, &graph, &[2]);
        assert_eq!(
            ex,
            Extremes { top_seeker: 0, bottom_seeker: 2, hope_upper: 5, hope_lower: 2 }
        );

        // the lone mid-range agent sees nobody but itself
        assert_eq!(
            crate::model::confidence_set(&state.x, state.opinion(2), &cfg.epsilon),
            vec![2]
        );
    }

    #[test]
    fn all_ignorants_fall_back_to_the_truth_component() {
        let eps = rat(1, 10);
        let multiples =
            [int(0), int(0), int(1), int(2), int(3), int(4), int(4), int(5), int(6), int(7), int(8), int(8)];
        let positions = multiples.iter().map(|m| m * &eps).collect();
        let cfg = config_with_seekers(eps.clone(), rat(1, 2), positions, &[]);
        let state = state_of(&cfg);
        let structure = analyze_step(&cfg, &state, &[]);
        assert_eq!(structure.graph.components.len(), 1);
        assert_eq!(
            structure.extremes,
            Extremes { top_seeker: 0, bottom_seeker: 0, hope_upper: 11, hope_lower: 1 }
        );
        assert_eq!(structure.hope.lower_len, rat(1, 2));
        assert_eq!(structure.hope.upper_len, rat(8, 10) - rat(1, 2));
        assert_eq!(structure.hope.members.len(), 12);
        assert!(structure.hope.lost.is_empty());
    }

    #[test]
    fn seeker_parked_on_the_truth_collapses_the_interval() {
        let cfg = config_with_seekers(rat(1, 2), rat(1, 2), vec![rat(1, 2)], &[1]);
        let state = state_of(&cfg);
        let structure = analyze_step(&cfg, &state, &[1]);
        // value tie between the truth vertex and the seeker: vertex 0 wins
        assert_eq!(
            structure.extremes,
            Extremes { top_seeker: 1, bottom_seeker: 1, hope_upper: 0, hope_lower: 0 }
        );
        assert!(structure.hope.lower_len.is_zero());
        assert!(structure.hope.upper_len.is_zero());
        assert_eq!(structure.hope.members, vec![1]);
    }

    /// Six agents one step into the single-seeker run: the seeker has moved
    /// to (11/18)ε while the five ignorants share (5/6)ε; the truth vertex is
    /// the interval's lower end.
    #[test]
    fn partitions_put_truth_seeker_and_ignorants_on_opposite_sides() {
        let eps = rat(1, 2);
        let h = rat(1, 4); // eps/2
        let mut positions = vec![rat(11, 18) * &eps];
        positions.extend(std::iter::repeat_n(rat(5, 6) * &eps, 5));
        let mut cfg = config_with_seekers(eps.clone(), h, positions, &[1]);
        cfg.alpha_floor = rat(2, 3);
        cfg.alphas[0] = AlphaRule::Constant(rat(2, 3));
        let state = OpinionState { t: 1, x: cfg.x0.clone() };
        let structure = analyze_step(&cfg, &state, &[1]);

        assert_eq!(
            structure.extremes,
            Extremes { top_seeker: 1, bottom_seeker: 0, hope_upper: 2, hope_lower: 0 }
        );
        assert!(structure.hope.lower_len.is_zero());
        assert_eq!(structure.hope.upper_len, rat(1, 6));

        let p = &structure.partitions;
        // lower side length is zero: nobody sits exactly on the truth, so
        // near is empty and everyone is in mid
        assert!(p.scaled_lower.near.is_empty());
        assert_eq!(p.scaled_lower.mid, vec![1, 2, 3, 4, 5, 6]);
        assert!(p.scaled_lower.far.is_empty());
        // upper side: the ignorants sit on the anchor, the seeker is mid
        assert_eq!(p.scaled_upper.near, vec![2, 3, 4, 5, 6]);
        assert_eq!(p.scaled_upper.mid, vec![1]);
        assert!(p.scaled_upper.far.is_empty());
    }

    /// Later step of the twelve-agent cascade: five value-clusters, the hope
    /// interval spans [4ε, 6ε], and the two scaled unions agree exactly.
    #[test]
    fn scaled_partitions_cover_the_members_from_both_sides() {
        let eps = rat(1, 10);
        let multiples = [
            rat(17, 36),
            rat(17, 36),
            rat(17, 36),
            int(2),
            int(4),
            int(4),
            int(4),
            int(4),
            int(6),
            rat(271, 36),
            rat(271, 36),
            rat(271, 36),
        ];
        let positions: Vec<Rational> = multiples.iter().map(|m| m * &eps).collect();
        let mut cfg = config_with_seekers(eps.clone(), rat(1, 2), positions, &[]);
        cfg.beta_floor = rat(1, 12);
        let state = OpinionState { t: 3, x: cfg.x0.clone() };
        let structure = analyze_step(&cfg, &state, &[]);

        assert_eq!(structure.extremes.hope_lower, 5);
        assert_eq!(structure.extremes.hope_upper, 9);
        assert_eq!(structure.hope.members, vec![5, 6, 7, 8, 9]);

        let p = &structure.partitions;
        assert_eq!(p.scaled_lower.near, vec![5, 6, 7, 8]);
        assert!(p.scaled_lower.mid.is_empty());
        assert_eq!(p.scaled_lower.far, vec![9]);
        assert_eq!(p.scaled_upper.near, vec![9]);
        assert!(p.scaled_upper.mid.is_empty());
        assert_eq!(p.scaled_upper.far, vec![5, 6, 7, 8]);

        let mut union_lower: Vec<usize> =
            [p.scaled_lower.near.clone(), p.scaled_lower.mid.clone(), p.scaled_lower.far.clone()].concat();
        union_lower.sort_unstable();
        let mut union_upper: Vec<usize> =
            [p.scaled_upper.near.clone(), p.scaled_upper.mid.clone(), p.scaled_upper.far.clone()].concat();
        union_upper.sort_unstable();
        assert_eq!(union_lower, structure.hope.members);
        assert_eq!(union_upper, structure.hope.members);
    }
}
