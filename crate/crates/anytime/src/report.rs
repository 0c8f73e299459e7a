//! Multi-plan comparison bundles.

use anyhow::Result;
use anytime_core::optimizer::{greedy_perf, greedy_time, optimal_order, select_exits};
use anytime_core::{ExecutionGraph, ExitGraph, Mode, NetworkProfile, QualityCurve, SchedulePlan, Weighting};
use serde::Serialize;

use crate::render::{MetricRow, PlanView};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub fixtures: Vec<String>,
    pub tool_version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedPlan {
    pub name: String,
    pub plan: PlanView,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    pub plans: Vec<NamedPlan>,
    pub metrics: Vec<MetricRow>,
    #[serde(skip)]
    pub curves: Vec<(String, QualityCurve)>,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub weighting: Weighting,
    pub mode: Mode,
    pub node_limit: usize,
    pub normalized: bool,
    pub include_initial_gap: bool,
    pub seed: u64,
}

/// Per profile: the optimal order under `mode` (all exits deployed), and on
/// the exit graph the optimal exit path and both greedy baselines.
pub fn build_report(profiles: &[NetworkProfile], opts: &ReportOptions) -> Result<ReportBundle> {
    let mut bundle = ReportBundle {
        provenance: Provenance {
            fixtures: profiles.iter().map(|p| p.name().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: opts.seed,
        },
        plans: Vec::new(),
        metrics: Vec::new(),
        curves: Vec::new(),
    };
    for profile in profiles {
        let w = &opts.weighting;
        let graph = ExecutionGraph::build(profile, w, opts.mode, opts.node_limit)?;
        let exits = ExitGraph::build(profile, w)?;
        let plans: [(&str, SchedulePlan); 4] = [
            ("optimal_order", optimal_order(&graph)?),
            ("optimal_exits", select_exits(&exits, exits.exit_count())?),
            ("greedy_time", greedy_time(&exits)?),
            ("greedy_perf", greedy_perf(&exits)?),
        ];
        for (label, plan) in plans {
            let name = format!("{}/{label}", profile.name());
            bundle
                .metrics
                .push(MetricRow::new(name.clone(), &plan, w, opts.include_initial_gap)?);
            bundle.curves.push((name.clone(), plan.curve.clone()));
            bundle.plans.push(NamedPlan {
                name,
                plan: PlanView::new(profile, &plan, opts.normalized, opts.include_initial_gap),
            });
        }
    }
    Ok(bundle)
}
