//! Order optimization, exit selection and the greedy baselines.
//!
//! Path values are always accumulated as a left fold of arc weights from the
//! source, so the DP, Bellman-Ford and exhaustive enumeration produce
//! bit-identical maxima.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Arc, ExecutionGraph, ExitGraph, WeightedDag};
use crate::layer_set::LayerSet;
use crate::profile::{LayerId, NetworkProfile};
use crate::quality::{anytime_quality, max_delta, QualityCurve, Weighting};
use crate::timing::{CostModel, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Optimal,
    GreedyTime,
    GreedyPerf,
    BruteForce,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Optimal => "optimal",
            Method::GreedyTime => "greedy_time",
            Method::GreedyPerf => "greedy_perf",
            Method::BruteForce => "brute_force",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Method::Optimal),
            "greedy_time" | "time" => Ok(Method::GreedyTime),
            "greedy_perf" | "perf" => Ok(Method::GreedyPerf),
            "brute_force" => Ok(Method::BruteForce),
            other => Err(Error::InvalidOrder(alloc::format!("unknown method {other:?}"))),
        }
    }
}

/// An execution order together with its quality curve and metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulePlan {
    pub method: Method,
    pub mode: Mode,
    pub order: Vec<LayerId>,
    /// Deployed exits (indices into the profile's exit table).
    pub selected_exits: Vec<usize>,
    pub curve: QualityCurve,
    pub q_unnormalized: f64,
    pub q_normalized: f64,
    /// `None` when the curve has no steps.
    pub max_delta: Option<f64>,
}

impl SchedulePlan {
    fn new(
        method: Method,
        cost: &CostModel<'_>,
        order: &[usize],
        selected_exits: Vec<usize>,
        q_unnormalized: f64,
        w: &Weighting,
    ) -> Result<Self> {
        let profile = cost.profile();
        let curve = cost.curve_for_indices(order)?;
        let q_normalized = normalize(q_unnormalized, curve.horizon(), w)?;
        let max_delta = max_delta(&curve, false).ok();
        Ok(Self {
            method,
            mode: cost.mode(),
            order: order.iter().map(|&l| profile.layer_id(l)).collect(),
            selected_exits,
            curve,
            q_unnormalized,
            q_normalized,
            max_delta,
        })
    }
}

fn normalize(q: f64, horizon: f64, w: &Weighting) -> Result<f64> {
    if !w.is_density() {
        return Ok(q);
    }
    if horizon == 0.0 {
        return Err(Error::ZeroHorizon);
    }
    Ok(q / horizon)
}

/// Labels along the recorded predecessor chain ending at `node`.
fn labels_to(pred: &[Option<Arc>], mut node: usize) -> Vec<usize> {
    let mut labels = Vec::new();
    while let Some(a) = pred[node] {
        labels.push(a.label);
        node = a.from;
    }
    labels.reverse();
    labels
}

fn arcs_to(pred: &[Option<Arc>], mut node: usize) -> Vec<Arc> {
    let mut arcs = Vec::new();
    while let Some(a) = pred[node] {
        arcs.push(a);
        node = a.from;
    }
    arcs.reverse();
    arcs
}

/// Whether the path `pred[from] + arc` improves on the current best at
/// `arc.to`: larger value first, then lexicographically smaller labels.
fn improves(dist: &[f64], pred: &[Option<Arc>], arc: &Arc, candidate: f64) -> bool {
    match candidate.total_cmp(&dist[arc.to]) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let mut challenger = labels_to(pred, arc.from);
            challenger.push(arc.label);
            challenger < labels_to(pred, arc.to)
        }
    }
}

/// Longest source-to-sink path by one pass in topological order. Returns the
/// path value and its arcs; ties go to the lexicographically smallest label
/// sequence.
pub fn longest_path<G: WeightedDag + ?Sized>(graph: &G) -> Result<(f64, Vec<Arc>)> {
    let n = graph.node_count();
    let mut dist = vec![f64::NEG_INFINITY; n];
    let mut pred: Vec<Option<Arc>> = vec![None; n];
    dist[graph.source()] = 0.0;
    for u in 0..n {
        if dist[u] == f64::NEG_INFINITY {
            continue;
        }
        for arc in graph.out_arcs(u) {
            let candidate = dist[u] + arc.weight;
            if improves(&dist, &pred, arc, candidate) {
                dist[arc.to] = candidate;
                pred[arc.to] = Some(*arc);
            }
        }
    }
    let sink = graph.sink();
    if dist[sink] == f64::NEG_INFINITY {
        return Err(Error::SinkUnreachable);
    }
    Ok((dist[sink], arcs_to(&pred, sink)))
}

/// Longest path as a shortest path over negated weights, by repeated
/// relaxation of every arc until nothing changes.
pub fn bellman_ford_longest<G: WeightedDag + ?Sized>(graph: &G) -> Result<(f64, Vec<Arc>)> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<Arc>> = vec![None; n];
    dist[graph.source()] = 0.0;
    for _ in 1..n.max(2) {
        let mut changed = false;
        for arc in graph.arcs() {
            if dist[arc.from] == f64::INFINITY {
                continue;
            }
            let candidate = dist[arc.from] + -arc.weight;
            if candidate < dist[arc.to] {
                dist[arc.to] = candidate;
                pred[arc.to] = Some(*arc);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let sink = graph.sink();
    if dist[sink] == f64::INFINITY {
        return Err(Error::SinkUnreachable);
    }
    Ok((-dist[sink], arcs_to(&pred, sink)))
}

/// Longest source-to-sink path with at most `k` arcs. Among equal values the
/// path with fewer arcs wins, then the lexicographically smallest labels.
pub fn longest_path_within<G: WeightedDag + ?Sized>(graph: &G, k: usize) -> Result<(f64, Vec<Arc>)> {
    let n = graph.node_count();
    // layers[h][v]: best value and last arc of a path with exactly h arcs.
    let mut layers: Vec<(Vec<f64>, Vec<Option<Arc>>)> = Vec::with_capacity(k + 1);
    let mut start = vec![f64::NEG_INFINITY; n];
    start[graph.source()] = 0.0;
    layers.push((start, vec![None; n]));

    let path_labels = |layers: &[(Vec<f64>, Vec<Option<Arc>>)], mut h: usize, mut v: usize| {
        let mut labels = Vec::new();
        while let Some(a) = layers[h].1[v] {
            labels.push(a.label);
            v = a.from;
            h -= 1;
        }
        labels.reverse();
        labels
    };

    for h in 1..=k {
        let mut dist = vec![f64::NEG_INFINITY; n];
        let mut pred: Vec<Option<Arc>> = vec![None; n];
        let prev = &layers[h - 1].0;
        for arc in graph.arcs() {
            if prev[arc.from] == f64::NEG_INFINITY {
                continue;
            }
            let candidate = prev[arc.from] + arc.weight;
            let better = match candidate.total_cmp(&dist[arc.to]) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    let mut challenger = path_labels(&layers, h - 1, arc.from);
                    challenger.push(arc.label);
                    let incumbent = pred[arc.to].map(|a| {
                        let mut l = path_labels(&layers, h - 1, a.from);
                        l.push(a.label);
                        l
                    });
                    incumbent.is_none_or(|l| challenger < l)
                }
            };
            if better {
                dist[arc.to] = candidate;
                pred[arc.to] = Some(*arc);
            }
        }
        layers.push((dist, pred));
    }

    let sink = graph.sink();
    let mut best: Option<(usize, f64)> = None;
    for (h, (dist, _)) in layers.iter().enumerate() {
        let d = dist[sink];
        if d != f64::NEG_INFINITY && best.is_none_or(|(_, b)| d > b) {
            best = Some((h, d));
        }
    }
    let (mut h, value) = best.ok_or(Error::NoPathWithin(k))?;
    let mut arcs = Vec::with_capacity(h);
    let mut v = sink;
    while let Some(a) = layers[h].1[v] {
        arcs.push(a);
        v = a.from;
        h -= 1;
    }
    arcs.reverse();
    Ok((value, arcs))
}

fn plan_from_execution_path(graph: &ExecutionGraph<'_>, value: f64, arcs: &[Arc], method: Method) -> Result<SchedulePlan> {
    let order: Vec<usize> = arcs.iter().map(|a| a.label).collect();
    let cost = graph.cost_model();
    SchedulePlan::new(method, cost, &order, cost.selected_exits(), value, graph.weighting())
}

/// Order maximizing the anytime quality over all execution orders.
pub fn optimal_order(graph: &ExecutionGraph<'_>) -> Result<SchedulePlan> {
    let (value, arcs) = longest_path(graph)?;
    plan_from_execution_path(graph, value, &arcs, Method::Optimal)
}

/// [`optimal_order`] computed with Bellman-Ford relaxation instead of the
/// topological pass.
pub fn optimal_order_bellman_ford(graph: &ExecutionGraph<'_>) -> Result<SchedulePlan> {
    let (value, arcs) = bellman_ford_longest(graph)?;
    plan_from_execution_path(graph, value, &arcs, Method::Optimal)
}

/// Plan for a given order and set of deployed exits; the value is the
/// closed-form integral of the resulting curve.
pub fn evaluate_order(
    profile: &NetworkProfile,
    order: &[LayerId],
    exits: &[usize],
    mode: Mode,
    w: &Weighting,
    method: Method,
) -> Result<SchedulePlan> {
    let cost = CostModel::with_selection(profile, mode, exits)?;
    let indices = profile.resolve_order(order)?;
    let curve = cost.curve_for_indices(&indices)?;
    let q = anytime_quality(&curve, w, false)?;
    SchedulePlan::new(method, &cost, &indices, exits.to_vec(), q, w)
}

/// Realizes a path of exits as an execution order: the features of each exit
/// in turn (topologically ordered), then every remaining layer. Only the path
/// exits are deployed.
pub fn plan_from_exit_path(
    profile: &NetworkProfile,
    exits: &[usize],
    w: &Weighting,
    method: Method,
    q_unnormalized: f64,
) -> Result<SchedulePlan> {
    let n = profile.layer_count();
    let mut executed = LayerSet::empty(n);
    let mut order = Vec::with_capacity(n);
    let push_closure = |target: &LayerSet, executed: &mut LayerSet, order: &mut Vec<usize>| {
        for &l in profile.topological_order() {
            if target.contains(l) && executed.insert(l) {
                order.push(l);
            }
        }
    };
    for (i, &e) in exits.iter().enumerate() {
        if e >= profile.exits().len() {
            return Err(Error::UnknownExit(e));
        }
        let features = profile.exit_features(e);
        if !executed.is_subset(features) {
            return Err(Error::NonMonotoneExitPath(i));
        }
        push_closure(features, &mut executed, &mut order);
    }
    push_closure(&profile.full_set(), &mut executed, &mut order);
    let cost = CostModel::with_selection(profile, Mode::Soft, exits)?;
    SchedulePlan::new(method, &cost, &order, exits.to_vec(), q_unnormalized, w)
}

fn plan_from_exit_arcs(graph: &ExitGraph<'_>, value: f64, arcs: &[Arc], method: Method) -> Result<SchedulePlan> {
    let exits: Vec<usize> = arcs
        .iter()
        .filter_map(|a| graph.nodes()[a.to].exit)
        .collect();
    plan_from_exit_path(graph.profile(), &exits, graph.weighting(), method, value)
}

/// Best set of at most `k` exits (the final exit included), as the longest
/// exit-graph path with at most `k` arcs.
pub fn select_exits(graph: &ExitGraph<'_>, k: usize) -> Result<SchedulePlan> {
    let max = graph.exit_count();
    if k == 0 || k > max {
        return Err(Error::InvalidExitCount { k, max });
    }
    let (value, arcs) = longest_path_within(graph, k)?;
    plan_from_exit_arcs(graph, value, &arcs, Method::Optimal)
}

fn greedy(graph: &ExitGraph<'_>, method: Method) -> Result<SchedulePlan> {
    let nodes = graph.nodes();
    let time = |v: usize| nodes[v].state.elapsed;
    let quality = |v: usize| nodes[v].state.reached_quality;
    let mut at = graph.source();
    let mut value = 0.0;
    let mut arcs = Vec::new();
    while at != graph.sink() {
        let pick = graph.immediate_successors(at).min_by(|a, b| {
            let by_time = time(a.to).total_cmp(&time(b.to));
            let by_quality = quality(b.to).total_cmp(&quality(a.to));
            let primary = match method {
                Method::GreedyTime => by_time.then(by_quality),
                _ => by_quality.then(by_time),
            };
            primary.then(a.to.cmp(&b.to))
        });
        let Some(arc) = pick.copied() else {
            let state = match nodes[at].exit {
                Some(e) => graph.profile().exit_label(e),
                None => String::from("start"),
            };
            return Err(Error::DeadEnd(state));
        };
        value += arc.weight;
        arcs.push(arc);
        at = arc.to;
    }
    plan_from_exit_arcs(graph, value, &arcs, method)
}

/// Repeatedly moves to the immediate successor exit reachable soonest.
pub fn greedy_time(graph: &ExitGraph<'_>) -> Result<SchedulePlan> {
    greedy(graph, Method::GreedyTime)
}

/// Repeatedly moves to the immediate successor exit of highest quality.
pub fn greedy_perf(graph: &ExitGraph<'_>) -> Result<SchedulePlan> {
    greedy(graph, Method::GreedyPerf)
}

/// Number of topological orders, counting stops once `limit` is exceeded.
pub fn count_orders(profile: &NetworkProfile, limit: usize) -> Result<usize> {
    fn go(profile: &NetworkProfile, executed: &mut LayerSet, count: &mut usize, limit: usize) -> bool {
        if executed.len() == profile.layer_count() {
            *count += 1;
            return *count <= limit;
        }
        for l in 0..profile.layer_count() {
            if !executed.contains(l) && profile.deps(l).iter().all(|&d| executed.contains(d)) {
                executed.insert(l);
                let ok = go(profile, executed, count, limit);
                executed.remove(l);
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut count = 0;
    let mut executed = LayerSet::empty(profile.layer_count());
    if go(profile, &mut executed, &mut count, limit) {
        Ok(count)
    } else {
        Err(Error::TooManyOrders { limit })
    }
}

/// Exhaustive maximum over all topological orders, visited in lexicographic
/// order of layer indices; the first maximum wins.
pub fn brute_force_order(profile: &NetworkProfile, w: &Weighting, mode: Mode, limit: usize) -> Result<SchedulePlan> {
    w.validate()?;
    count_orders(profile, limit)?;
    let cost = CostModel::new(profile, mode);
    let horizon = cost.horizon();

    struct Search<'a, 'p> {
        cost: &'a CostModel<'p>,
        w: &'a Weighting,
        horizon: f64,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_, '_> {
        fn go(&mut self, executed: &mut LayerSet, order: &mut Vec<usize>, value: f64) {
            let profile = self.cost.profile();
            if order.len() == profile.layer_count() {
                if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                    self.best = Some((value, order.clone()));
                }
                return;
            }
            for l in 0..profile.layer_count() {
                if !executed.contains(l) && profile.deps(l).iter().all(|&d| executed.contains(d)) {
                    let step = self.cost.step_weight(self.w, executed, l, self.horizon);
                    executed.insert(l);
                    order.push(l);
                    self.go(executed, order, value + step);
                    order.pop();
                    executed.remove(l);
                }
            }
        }
    }

    let mut search = Search {
        cost: &cost,
        w,
        horizon,
        best: None,
    };
    let mut executed = LayerSet::empty(profile.layer_count());
    search.go(&mut executed, &mut Vec::new(), 0.0);
    let (value, order) = search.best.ok_or(Error::SinkUnreachable)?;
    SchedulePlan::new(Method::BruteForce, &cost, &order, cost.selected_exits(), value, w)
}
