use std::collections::{BTreeSet, HashSet};

use anytime::fixtures;
use anytime_core::optimizer::{evaluate_order, greedy_perf, greedy_time, optimal_order, select_exits, Method};
use anytime_core::quality::anytime_quality;
use anytime_core::testkit::{chain_profile, ChainParams};
use anytime_core::{ExecutionGraph, ExitGraph, LayerId, Mode, NetworkProfile, WeightedDag, Weighting};
use proptest::prelude::*;

fn small(seed: u64) -> NetworkProfile {
    chain_profile(seed, ChainParams { max_layers: 7, ..ChainParams::default() })
}

/// Down-sets of the layer DAG, by DFS over "add one ready layer".
fn count_ideals(p: &NetworkProfile) -> usize {
    let n = p.layer_count();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut stack = vec![vec![false; n]];
    while let Some(set) = stack.pop() {
        if !seen.insert(set.clone()) {
            continue;
        }
        for l in 0..n {
            if !set[l] && p.deps(l).iter().all(|&d| set[d]) {
                let mut next = set.clone();
                next[l] = true;
                stack.push(next);
            }
        }
    }
    seen.len()
}

#[test]
fn transposed_lattice_size_matches_dfs() {
    let p = fixtures::load("gelan-t-transposed").unwrap();
    let g = ExecutionGraph::build(&p, &Weighting::Uniform, Mode::Soft, 1_000_000).unwrap();
    assert_eq!(g.node_count(), count_ideals(&p));
}

/// Every source-to-sink path, as its label sequence.
fn all_paths<G: WeightedDag>(g: &G) -> Vec<(Vec<usize>, f64)> {
    fn go<G: WeightedDag>(g: &G, v: usize, labels: &mut Vec<usize>, value: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if v == g.sink() {
            out.push((labels.clone(), value));
        }
        for a in g.out_arcs(v) {
            labels.push(a.label);
            go(g, a.to, labels, value + a.weight, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(g, g.source(), &mut Vec::new(), 0.0, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Paths are exactly the topological orders, and each path's weight sum is
    /// the integral of that order's curve.
    #[test]
    fn paths_are_orders_and_sum_to_the_integral(seed in 0u64..10_000, hard in any::<bool>()) {
        let p = small(seed);
        let mode = if hard { Mode::Hard } else { Mode::Soft };
        let g = ExecutionGraph::build(&p, &Weighting::Uniform, mode, 100_000).unwrap();
        let paths = all_paths(&g);
        let distinct: BTreeSet<&Vec<usize>> = paths.iter().map(|(l, _)| l).collect();
        prop_assert_eq!(distinct.len(), paths.len());
        let all: Vec<usize> = (0..p.exits().len()).collect();
        for (labels, value) in &paths {
            prop_assert_eq!(labels.len(), p.layer_count());
            let order: Vec<LayerId> = labels.iter().map(|&l| p.layer_id(l)).collect();
            let plan = evaluate_order(&p, &order, &all, mode, &Weighting::Uniform, Method::Optimal).unwrap();
            prop_assert!((plan.q_unnormalized - value).abs() <= 1e-9 * value.abs().max(1.0));
        }
    }

    /// Scaling every latency leaves the optimal order unchanged.
    #[test]
    fn argmax_is_latency_scale_invariant(seed in 0u64..10_000, factor in 0.1f64..10.0) {
        let p = small(seed);
        let mut draft = p.to_draft();
        for l in &mut draft.layers {
            l.latency *= factor;
        }
        for s in &mut draft.sub_exits {
            s.head_latency *= factor;
        }
        let scaled = draft.validate().unwrap();
        let g = ExecutionGraph::build(&p, &Weighting::Uniform, Mode::Soft, 100_000).unwrap();
        let gs = ExecutionGraph::build(&scaled, &Weighting::Uniform, Mode::Soft, 100_000).unwrap();
        let a = optimal_order(&g).unwrap();
        let b = optimal_order(&gs).unwrap();
        prop_assert!((a.q_normalized - b.q_normalized).abs() <= 1e-9 * a.q_normalized.abs().max(1.0));
        // The original argmax stays optimal after scaling.
        let all: Vec<usize> = (0..p.exits().len()).collect();
        let replay = evaluate_order(&scaled, &a.order, &all, Mode::Soft, &Weighting::Uniform, Method::Optimal).unwrap();
        prop_assert!((replay.q_normalized - b.q_normalized).abs() <= 1e-9 * b.q_normalized.abs().max(1.0));
    }

    /// Hard mode never makes an exit available earlier than soft mode.
    #[test]
    fn soft_is_never_slower_than_hard(seed in 0u64..10_000) {
        let p = small(seed);
        let order: Vec<LayerId> = p.topological_order().iter().map(|&i| p.layer_id(i)).collect();
        let all: Vec<usize> = (0..p.exits().len()).collect();
        let soft = evaluate_order(&p, &order, &all, Mode::Soft, &Weighting::Uniform, Method::Optimal).unwrap();
        let hard = evaluate_order(&p, &order, &all, Mode::Hard, &Weighting::Uniform, Method::Optimal).unwrap();
        for s in hard.curve.steps() {
            prop_assert!(soft.curve.value_at(s.time) >= s.quality);
        }
        prop_assert!(soft.curve.horizon() <= hard.curve.horizon());
    }

    /// Deploying more exits in hard mode never shortens a complete run.
    #[test]
    fn hard_total_grows_with_deployed_exits(seed in 0u64..10_000, mask in any::<u64>()) {
        let p = small(seed);
        let order: Vec<LayerId> = p.topological_order().iter().map(|&i| p.layer_id(i)).collect();
        let fewer: Vec<usize> = (0..p.exits().len()).filter(|e| mask >> (e % 64) & 1 == 1).collect();
        let all: Vec<usize> = (0..p.exits().len()).collect();
        let a = evaluate_order(&p, &order, &fewer, Mode::Hard, &Weighting::Uniform, Method::Optimal).unwrap();
        let b = evaluate_order(&p, &order, &all, Mode::Hard, &Weighting::Uniform, Method::Optimal).unwrap();
        prop_assert!(a.curve.horizon() <= b.curve.horizon() + 1e-12);
    }

    /// Exit-graph plans: the plan curve integrates to the path value, and
    /// greedy never beats the optimal selection.
    #[test]
    fn exit_plans_are_consistent(seed in 0u64..10_000) {
        let p = small(seed);
        let g = ExitGraph::build(&p, &Weighting::Uniform).unwrap();
        let best = select_exits(&g, g.exit_count()).unwrap();
        let integral = anytime_quality(&best.curve, &Weighting::Uniform, false).unwrap();
        prop_assert!((integral - best.q_unnormalized).abs() <= 1e-9 * integral.abs().max(1.0));
        for plan in [greedy_time(&g), greedy_perf(&g)].into_iter().flatten() {
            prop_assert!(plan.q_unnormalized <= best.q_unnormalized);
        }
    }
}
