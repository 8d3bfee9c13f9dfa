use std::collections::{HashMap, VecDeque};

use super::{reset, step, ContextInstance, EventId, FullKey, State};

/// Reachable state graph of one context, with the step counter dropped.
#[derive(Debug, Clone)]
pub struct StateGraph {
    states: Vec<State>,
    index: HashMap<FullKey, usize>,
    /// `succ[i][a]` is `(next index, reward, terminal)`; empty for terminal states.
    succ: Vec<Vec<(usize, f64, bool)>>,
    terminal: Vec<bool>,
}

impl StateGraph {
    /// Forward BFS from the reset state. Terminal states are included but not
    /// expanded; `t` is pinned to zero so the budget never truncates the search.
    pub fn build(ctx: &ContextInstance) -> Self {
        let mut g = StateGraph {
            states: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
            terminal: Vec::new(),
        };
        let s0 = reset(ctx);
        g.insert(s0, false);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            if g.terminal[i] {
                continue;
            }
            let s = g.states[i];
            let mut edges = Vec::with_capacity(ctx.n_actions());
            for a in 0..ctx.n_actions() {
                let tr = step(ctx, &s, a).expect("action in range");
                let mut next = tr.next_state;
                next.t = 0;
                let terminal = matches!(tr.event, EventId::GoalReached | EventId::LavaDeath);
                let (j, fresh) = g.insert(next, terminal);
                if fresh {
                    queue.push_back(j);
                }
                edges.push((j, tr.reward, terminal));
            }
            g.succ[i] = edges;
        }
        g
    }

    fn insert(&mut self, s: State, terminal: bool) -> (usize, bool) {
        let key = FullKey::from(&s);
        if let Some(&i) = self.index.get(&key) {
            return (i, false);
        }
        let i = self.states.len();
        self.states.push(s);
        self.index.insert(key, i);
        self.succ.push(Vec::new());
        self.terminal.push(terminal);
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn index_of(&self, s: &State) -> Option<usize> {
        self.index.get(&FullKey::from(s)).copied()
    }

    pub fn is_terminal(&self, i: usize) -> bool {
        self.terminal[i]
    }

    /// Outgoing edges of state `i` as `(next, reward, terminal)` per action.
    pub fn successors(&self, i: usize) -> &[(usize, f64, bool)] {
        &self.succ[i]
    }

    /// Whether state `i` is the rewarding terminal.
    pub fn is_goal(&self, i: usize) -> bool {
        self.terminal[i] && self.states[i].last_event == EventId::GoalReached
    }

    /// Shortest step count from each state to a goal state (`None` if the goal
    /// cannot be reached). Goal states have distance 0.
    pub fn goal_distances(&self) -> Vec<Option<u32>> {
        let n = self.len();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, edges) in self.succ.iter().enumerate() {
            for &(j, _, _) in edges {
                pred[j].push(i);
            }
        }
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for (i, d) in dist.iter_mut().enumerate() {
            if self.is_goal(i) {
                *d = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(j) = queue.pop_front() {
            let dj = dist[j].unwrap();
            for &i in &pred[j] {
                if dist[i].is_none() {
                    dist[i] = Some(dj + 1);
                    queue.push_back(i);
                }
            }
        }
        dist
    }
}

/// The reachable state set (states carry `t = 0`).
pub fn enumerate_reachable(ctx: &ContextInstance) -> Vec<State> {
    StateGraph::build(ctx).states
}

/// Shortest-path oracle policy.
#[derive(Debug, Clone)]
pub struct Planner {
    graph: StateGraph,
    dist: Vec<Option<u32>>,
}

impl Planner {
    pub fn new(ctx: &ContextInstance) -> Self {
        let graph = StateGraph::build(ctx);
        let dist = graph.goal_distances();
        Planner { graph, dist }
    }

    /// Optimal number of steps from the reset state, if solvable.
    pub fn plan_length(&self) -> Option<u32> {
        self.dist[0]
    }

    /// Lowest-index action on a shortest path; `None` off-graph or when stuck.
    pub fn best_action(&self, s: &State) -> Option<usize> {
        let i = self.graph.index_of(s)?;
        let d = self.dist[i]?;
        if d == 0 {
            return None;
        }
        self.graph
            .successors(i)
            .iter()
            .position(|&(j, _, _)| self.dist[j] == Some(d - 1))
    }
}
