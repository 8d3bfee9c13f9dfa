use std::collections::BTreeMap;

use crate::env::{
    extract_feature, kind_vocabulary, ContextInstance, EnvKind, FeatureKey, FeatureKind, Pos, State,
    StateGraph,
};

/// Optimal values of every reachable state of one context.
#[derive(Debug, Clone)]
pub struct StateValues {
    graph: StateGraph,
    values: Vec<f64>,
}

impl StateValues {
    pub fn graph(&self) -> &StateGraph {
        &self.graph
    }

    /// Values indexed like `graph().states()`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of `s` (its step counter is ignored); `None` if unreachable.
    pub fn get(&self, s: &State) -> Option<f64> {
        let mut s = *s;
        s.t = 0;
        self.graph.index_of(&s).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&State, f64)> {
        self.graph.states().iter().zip(self.values.iter().copied())
    }
}

/// `V*(s) = gamma^k(s)` with `k` the shortest step count to the goal; 0 where
/// the goal cannot be reached.
pub fn optimal_values(ctx: &ContextInstance, gamma: f64) -> StateValues {
    let graph = StateGraph::build(ctx);
    let values = graph
        .goal_distances()
        .into_iter()
        .map(|d| d.map_or(0.0, |k| gamma.powi(k as i32)))
        .collect();
    StateValues { graph, values }
}

/// A context's optimal values projected onto a feature space. Only features
/// with a reachable preimage are stored; every other feature reads as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueMap {
    pub context_id: u64,
    pub kind: EnvKind,
    pub psi: FeatureKind,
    pub entries: BTreeMap<FeatureKey, f64>,
}

impl ValueMap {
    pub fn value(&self, z: &FeatureKey) -> f64 {
        self.entries.get(z).copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    /// Equal as functions on the feature space, up to `tol`.
    pub fn approx_eq(&self, other: &ValueMap, tol: f64) -> bool {
        self.context_id == other.context_id
            && self.kind == other.kind
            && self.psi == other.psi
            && self
                .entries
                .keys()
                .chain(other.entries.keys())
                .all(|z| (self.value(z) - other.value(z)).abs() <= tol)
    }
}

/// Minimum of `V*` over each feature's preimage.
pub fn project_value(values: &StateValues, psi: FeatureKind, ctx: &ContextInstance) -> ValueMap {
    let graph = values.graph();
    let mut entries: BTreeMap<FeatureKey, f64> = BTreeMap::new();
    for (i, (s, v)) in values.iter().enumerate() {
        if graph.is_terminal(i) && !graph.is_goal(i) {
            continue;
        }
        entries
            .entry(extract_feature(psi, s))
            .and_modify(|m| *m = m.min(v))
            .or_insert(v);
    }
    ValueMap {
        context_id: ctx.context_id(),
        kind: *ctx.kind(),
        psi,
        entries,
    }
}

/// Every feature any context of `kind` can produce: the position lattice or
/// the event vocabulary. Full-state spaces are not enumerated.
pub fn full_domain(kind: &EnvKind, psi: FeatureKind) -> Option<Vec<FeatureKey>> {
    match psi {
        FeatureKind::Position => {
            let (w, h) = kind.lattice();
            Some(
                (0..h as i32)
                    .flat_map(|y| (0..w as i32).map(move |x| FeatureKey::Pos(Pos::new(x, y))))
                    .collect(),
            )
        }
        FeatureKind::Message => Some(kind_vocabulary(kind).into_iter().map(FeatureKey::Msg).collect()),
        FeatureKind::FullState => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_context, reset, EventId};

    const KEY_ROOM: &str = "\
#######
#>#...#
#.L...#
###.k.#
#..<..#
#.....#
#######";

    #[test]
    fn chain_values_are_powers_of_gamma() {
        let kind = EnvKind::corridors(3, 4).unwrap();
        let ctx = generate_context(&kind, 0).unwrap();
        let v = optimal_values(&ctx, 0.9);
        let s0 = reset(&ctx);
        // Junction to goal: enter corridor 0, then three advances.
        assert!((v.get(&s0).unwrap() - 0.9f64.powi(4)).abs() < 1e-15);
        let mut s = s0;
        s.pos = Pos::new(0, 1);
        assert!((v.get(&s).unwrap() - 0.729).abs() < 1e-15);
        s.pos = Pos::new(1, 2);
        assert_eq!(v.get(&s), Some(0.0));
        let goal = v.iter().find(|(s, _)| s.last_event == EventId::GoalReached).unwrap();
        assert_eq!(goal.1, 1.0);
    }

    #[test]
    fn position_projection_takes_the_minimum() {
        let kind = EnvKind::key_room(5).unwrap();
        let ctx = ContextInstance::from_ascii(kind, 7, KEY_ROOM).unwrap();
        let v = optimal_values(&ctx, 0.9);
        let vm = project_value(&v, FeatureKind::Position, &ctx);
        // A cell next to the key is reachable with and without the key.
        let cell = Pos::new(4, 2);
        let both: Vec<f64> = v
            .iter()
            .filter(|(s, _)| s.pos == cell)
            .map(|(_, x)| x)
            .collect();
        assert!(both.len() >= 2);
        let lo = both.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = both.iter().copied().fold(0.0, f64::max);
        assert!(lo < hi);
        assert_eq!(vm.value(&FeatureKey::Pos(cell)), lo);
        assert_eq!(vm.value(&FeatureKey::Pos(Pos::new(0, 0))), 0.0);
        assert!(!vm.entries.contains_key(&FeatureKey::Pos(Pos::new(0, 0))));

        let msg = project_value(&v, FeatureKind::Message, &ctx);
        assert_eq!(msg.value(&FeatureKey::Msg(EventId::GoalReached)), 1.0);
        assert_eq!(msg.max(), 1.0);
    }

    #[test]
    fn full_state_projection_relabels() {
        let kind = EnvKind::multi_room(2, true, 9, 9).unwrap();
        let ctx = generate_context(&kind, 5).unwrap();
        let v = optimal_values(&ctx, 0.9);
        let vm = project_value(&v, FeatureKind::FullState, &ctx);
        let g = v.graph();
        let decision = (0..g.len()).filter(|&i| !g.is_terminal(i) || g.is_goal(i)).count();
        assert_eq!(vm.entries.len(), decision);
        for (s, x) in v.iter() {
            if let Some(&y) = vm.entries.get(&extract_feature(FeatureKind::FullState, s)) {
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn lava_neighbours_keep_their_value() {
        let kind = EnvKind::multi_room(2, true, 9, 9).unwrap();
        for seed in 0..10 {
            let ctx = generate_context(&kind, seed).unwrap();
            let vm = project_value(&optimal_values(&ctx, 0.9), FeatureKind::Position, &ctx);
            assert!(vm.entries.values().all(|&x| x > 0.0), "seed {seed}");
        }
    }

    #[test]
    fn domains() {
        let kind = EnvKind::corridors(3, 4).unwrap();
        assert_eq!(full_domain(&kind, FeatureKind::Position).unwrap().len(), 15);
        assert_eq!(full_domain(&kind, FeatureKind::Message).unwrap().len(), 2);
        assert!(full_domain(&kind, FeatureKind::FullState).is_none());
    }
}
