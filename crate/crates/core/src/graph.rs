//! Execution-state graphs.
//!
//! [`ExecutionGraph`] has one node per down-closed layer set (order ideal of
//! the layer DAG) and one arc per single-layer step, so source-to-sink paths
//! are exactly the valid execution orders. Arc weights split the anytime
//! quality integral so that every path sums to the quality of its order.
//!
//! [`ExitGraph`] keeps only exit states: two exits are linked when they
//! differ in exactly one sub-exit, the second's features include the
//! first's and its quality is strictly higher. Strictly increasing quality
//! keeps the graph acyclic even between exits with identical features.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layer_set::LayerSet;
use crate::profile::NetworkProfile;
use crate::quality::Weighting;
use crate::timing::{CostModel, Mode};

#[derive(Debug, Clone, PartialEq)]
pub struct ExecState {
    pub executed: LayerSet,
    pub reached_quality: f64,
    pub elapsed: f64,
}

/// Weighted arc. `label` orders paths for deterministic tie-breaking: the
/// executed layer in an [`ExecutionGraph`], the target node in an
/// [`ExitGraph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub label: usize,
}

/// A DAG whose nodes are numbered in topological order and whose arcs are
/// grouped by tail node.
pub trait WeightedDag {
    fn node_count(&self) -> usize;
    fn source(&self) -> usize;
    fn sink(&self) -> usize;
    fn arcs(&self) -> &[Arc];
    fn out_arcs(&self, node: usize) -> &[Arc];
}

fn out_offsets(node_count: usize, arcs: &[Arc]) -> Vec<usize> {
    let mut start = alloc::vec![0; node_count + 1];
    for a in arcs {
        start[a.from + 1] += 1;
    }
    for i in 0..node_count {
        start[i + 1] += start[i];
    }
    start
}

#[derive(Debug, Clone)]
pub struct ExecutionGraph<'p> {
    cost: CostModel<'p>,
    weighting: Weighting,
    states: Vec<ExecState>,
    arcs: Vec<Arc>,
    out_start: Vec<usize>,
    horizon: f64,
}

impl<'p> ExecutionGraph<'p> {
    /// Graph over all order ideals with every exit deployed.
    pub fn build(profile: &'p NetworkProfile, w: &Weighting, mode: Mode, node_limit: usize) -> Result<Self> {
        Self::with_cost_model(CostModel::new(profile, mode), w, node_limit)
    }

    pub fn with_cost_model(cost: CostModel<'p>, w: &Weighting, node_limit: usize) -> Result<Self> {
        if node_limit == 0 {
            return Err(Error::ZeroNodeLimit);
        }
        w.validate()?;
        let profile = cost.profile();
        let n = profile.layer_count();
        let horizon = cost.horizon();

        let mut sets: Vec<LayerSet> = alloc::vec![LayerSet::empty(n)];
        let mut steps: Vec<(usize, usize, usize)> = Vec::new();
        let mut level_start = 0;
        while level_start < sets.len() {
            let level_end = sets.len();
            let mut next: BTreeMap<LayerSet, Vec<(usize, usize)>> = BTreeMap::new();
            for (from, v) in sets.iter().enumerate().take(level_end).skip(level_start) {
                for l in 0..n {
                    if !v.contains(l) && profile.deps(l).iter().all(|&d| v.contains(d)) {
                        let mut s = v.clone();
                        s.insert(l);
                        next.entry(s).or_default().push((from, l));
                    }
                }
            }
            if sets.len() + next.len() > node_limit {
                return Err(Error::NodeLimitExceeded {
                    limit: node_limit,
                    lower_bound: sets.len() + next.len(),
                });
            }
            for (set, incoming) in next {
                let to = sets.len();
                sets.push(set);
                steps.extend(incoming.into_iter().map(|(from, l)| (from, l, to)));
            }
            level_start = level_end;
        }
        steps.sort_unstable_by_key(|&(from, l, _)| (from, l));

        let arcs: Vec<Arc> = steps
            .into_iter()
            .map(|(from, l, to)| Arc {
                from,
                to,
                weight: cost.step_weight(w, &sets[from], l, horizon),
                label: l,
            })
            .collect();
        let states = sets
            .into_iter()
            .map(|s| ExecState {
                reached_quality: cost.reached_quality(&s),
                elapsed: cost.elapsed(&s),
                executed: s,
            })
            .collect::<Vec<_>>();
        let out_start = out_offsets(states.len(), &arcs);
        Ok(Self {
            cost,
            weighting: w.clone(),
            states,
            arcs,
            out_start,
            horizon,
        })
    }

    pub fn profile(&self) -> &'p NetworkProfile {
        self.cost.profile()
    }

    pub fn cost_model(&self) -> &CostModel<'p> {
        &self.cost
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    pub fn states(&self) -> &[ExecState] {
        &self.states
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Layer order (dense indices) spelled by a node path.
    pub fn order_of_path(&self, path: &[usize]) -> Vec<usize> {
        path.windows(2)
            .map(|w| {
                self.out_arcs(w[0])
                    .iter()
                    .find(|a| a.to == w[1])
                    .expect("path follows graph arcs")
                    .label
            })
            .collect()
    }
}

impl WeightedDag for ExecutionGraph<'_> {
    fn node_count(&self) -> usize {
        self.states.len()
    }

    fn source(&self) -> usize {
        0
    }

    fn sink(&self) -> usize {
        self.states.len() - 1
    }

    fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    fn out_arcs(&self, node: usize) -> &[Arc] {
        &self.arcs[self.out_start[node]..self.out_start[node + 1]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitNode {
    /// `None` for the start state.
    pub exit: Option<usize>,
    pub state: ExecState,
}

/// Reduced graph over exit states for exit-subset selection (soft timing).
#[derive(Debug, Clone)]
pub struct ExitGraph<'p> {
    profile: &'p NetworkProfile,
    weighting: Weighting,
    nodes: Vec<ExitNode>,
    arcs: Vec<Arc>,
    out_start: Vec<usize>,
    reduced: Vec<bool>,
    horizon: f64,
}

impl<'p> ExitGraph<'p> {
    pub fn build(profile: &'p NetworkProfile, w: &Weighting) -> Result<Self> {
        w.validate()?;
        let n = profile.layer_count();
        let horizon = profile.latency_sum(&profile.full_set());
        let final_exit = profile.final_exit();

        let mut exits: Vec<usize> = profile
            .distinct_exits()
            .into_iter()
            .filter(|&e| e != final_exit)
            .collect();
        let node_of = |e: usize| ExitNode {
            exit: Some(e),
            state: ExecState {
                executed: profile.exit_features(e).clone(),
                reached_quality: profile.exits()[e].quality,
                elapsed: profile.latency_sum(profile.exit_features(e)),
            },
        };
        let mut middle: Vec<ExitNode> = exits.drain(..).map(node_of).collect();
        middle.sort_by(|a, b| {
            a.state
                .executed
                .len()
                .cmp(&b.state.executed.len())
                .then(a.state.elapsed.total_cmp(&b.state.elapsed))
                .then(a.state.reached_quality.total_cmp(&b.state.reached_quality))
                .then(a.exit.cmp(&b.exit))
        });
        let mut nodes = Vec::with_capacity(middle.len() + 2);
        nodes.push(ExitNode {
            exit: None,
            state: ExecState {
                executed: LayerSet::empty(n),
                reached_quality: profile.default_quality(),
                elapsed: 0.0,
            },
        });
        nodes.extend(middle);
        nodes.push(node_of(final_exit));
        let sink = nodes.len() - 1;

        let mut arcs = Vec::new();
        for u in 0..nodes.len() {
            for v in u + 1..nodes.len() {
                if !Self::linked(profile, &nodes[u], &nodes[v]) {
                    continue;
                }
                let (su, sv) = (&nodes[u].state, &nodes[v].state);
                let mut weight = su.reached_quality * w.mass(su.elapsed, sv.elapsed);
                if v == sink {
                    weight += sv.reached_quality * w.mass(sv.elapsed, horizon);
                    weight += sv.reached_quality * w.terminal_mass(horizon);
                }
                arcs.push(Arc {
                    from: u,
                    to: v,
                    weight,
                    label: v,
                });
            }
        }
        let out_start = out_offsets(nodes.len(), &arcs);

        // reach[v]: nodes reachable from v by at least one arc.
        let mut reach = alloc::vec![LayerSet::empty(nodes.len()); nodes.len()];
        for v in (0..nodes.len()).rev() {
            let mut r = LayerSet::empty(nodes.len());
            for a in &arcs[out_start[v]..out_start[v + 1]] {
                r.insert(a.to);
                r.union_with(&reach[a.to]);
            }
            reach[v] = r;
        }
        if !reach[0].contains(sink) {
            return Err(Error::FinalUnreachable);
        }
        let reduced = arcs
            .iter()
            .map(|a| {
                !arcs[out_start[a.from]..out_start[a.from + 1]]
                    .iter()
                    .any(|b| b.to != a.to && reach[b.to].contains(a.to))
            })
            .collect();

        Ok(Self {
            profile,
            weighting: w.clone(),
            nodes,
            arcs,
            out_start,
            reduced,
            horizon,
        })
    }

    fn linked(profile: &NetworkProfile, u: &ExitNode, v: &ExitNode) -> bool {
        let Some(ve) = v.exit else { return false };
        if v.state.reached_quality <= u.state.reached_quality {
            return false;
        }
        let Some(ue) = u.exit else { return true };
        let differing = profile
            .exit_sub_exits(ue)
            .iter()
            .zip(profile.exit_sub_exits(ve))
            .filter(|(a, b)| a != b)
            .count();
        differing == 1 && u.state.executed.is_subset(&v.state.executed)
    }

    pub fn profile(&self) -> &'p NetworkProfile {
        self.profile
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    pub fn nodes(&self) -> &[ExitNode] {
        &self.nodes
    }

    /// Number of exit nodes, the sink included.
    pub fn exit_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn node_of_exit(&self, exit: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.exit == Some(exit))
    }

    /// Arcs out of `node` that are not implied by a longer path: the
    /// immediate successor exits considered by the greedy baselines.
    pub fn immediate_successors(&self, node: usize) -> impl Iterator<Item = &Arc> + '_ {
        let range = self.out_start[node]..self.out_start[node + 1];
        self.arcs[range.clone()]
            .iter()
            .zip(&self.reduced[range])
            .filter_map(|(a, &keep)| keep.then_some(a))
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.out_arcs(from).iter().any(|a| a.to == to)
    }
}

impl WeightedDag for ExitGraph<'_> {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn source(&self) -> usize {
        0
    }

    fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    fn out_arcs(&self, node: usize) -> &[Arc] {
        &self.arcs[self.out_start[node]..self.out_start[node + 1]]
    }
}
