//! JSON and CSV views of plans, curves and simulation results.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use anytime_core::optimizer::{evaluate_order, Method};
use anytime_core::quality::{max_delta, squared_error_quality};
use anytime_core::{LayerId, Mode, NetworkProfile, QualityCurve, SchedulePlan, SimulationResult, Step, Weighting};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveView {
    pub initial: f64,
    pub horizon_ms: f64,
    /// `[time_ms, quality]` pairs.
    pub steps: Vec<(f64, f64)>,
}

impl CurveView {
    pub fn new(curve: &QualityCurve) -> Self {
        Self {
            initial: curve.initial(),
            horizon_ms: curve.horizon(),
            steps: curve.steps().iter().map(|s| (s.time, s.quality)).collect(),
        }
    }

    pub fn to_curve(&self) -> Result<QualityCurve> {
        let steps = self.steps.iter().map(|&(t, q)| Step::new(t, q)).collect();
        Ok(QualityCurve::new(self.initial, steps, self.horizon_ms)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitView {
    pub index: usize,
    pub label: String,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanView {
    pub profile: String,
    pub method: String,
    pub mode: String,
    pub order: Vec<u32>,
    pub exits: Vec<ExitView>,
    /// The headline value: normalized or not according to `normalized`.
    pub q: f64,
    pub normalized: bool,
    pub q_unnormalized: f64,
    pub q_normalized: f64,
    pub max_delta_ms: Option<f64>,
    pub include_initial_gap: bool,
    pub curve: CurveView,
}

impl PlanView {
    pub fn new(profile: &NetworkProfile, plan: &SchedulePlan, normalized: bool, include_initial_gap: bool) -> Self {
        Self {
            profile: profile.name().to_string(),
            method: plan.method.to_string(),
            mode: plan.mode.to_string(),
            order: plan.order.iter().map(|l| l.0).collect(),
            exits: plan
                .selected_exits
                .iter()
                .map(|&e| ExitView {
                    index: e,
                    label: profile.exit_label(e),
                    quality: profile.exits()[e].quality,
                })
                .collect(),
            q: if normalized { plan.q_normalized } else { plan.q_unnormalized },
            normalized,
            q_unnormalized: plan.q_unnormalized,
            q_normalized: plan.q_normalized,
            max_delta_ms: max_delta(&plan.curve, include_initial_gap).ok(),
            include_initial_gap,
            curve: CurveView::new(&plan.curve),
        }
    }

    /// Re-evaluates the stored order and exits against `profile`.
    pub fn to_plan(&self, profile: &NetworkProfile, w: &Weighting) -> Result<SchedulePlan> {
        for e in &self.exits {
            let label = (e.index < profile.exits().len()).then(|| profile.exit_label(e.index));
            if label.as_deref() != Some(e.label.as_str()) {
                bail!("plan exit #{} {} does not match profile {}", e.index, e.label, profile.name());
            }
        }
        let mode: Mode = self.mode.parse()?;
        let method: Method = self.method.parse()?;
        let order: Vec<LayerId> = self.order.iter().map(|&l| LayerId(l)).collect();
        let exits: Vec<usize> = self.exits.iter().map(|e| e.index).collect();
        Ok(evaluate_order(profile, &order, &exits, mode, w, method)?)
    }
}

pub fn parse_plan(text: &str) -> Result<PlanView> {
    serde_json::from_str(text).context("malformed plan document")
}

/// Curve as CSV: the initial level at 0, each step, and the horizon.
pub fn curve_csv(curve: &QualityCurve) -> String {
    let mut out = String::from("time_ms,quality\n");
    writeln!(out, "0,{}", curve.initial()).unwrap();
    for s in curve.steps() {
        writeln!(out, "{},{}", s.time, s.quality).unwrap();
    }
    writeln!(out, "{},{}", curve.horizon(), curve.final_quality()).unwrap();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationView {
    pub profile: String,
    pub mode: String,
    pub trials: u64,
    pub seed: u64,
    pub mean_delivered_quality: f64,
    pub quality_std_error: f64,
    pub mean_response_delay_ms: f64,
    pub effective_total_time_ms: f64,
    pub default_hits: u64,
    pub per_exit_hit_counts: Vec<ExitHits>,
    pub quality_histogram: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitHits {
    pub index: usize,
    pub label: String,
    pub hits: u64,
}

impl SimulationView {
    pub fn new(profile: &NetworkProfile, mode: Mode, trials: u64, seed: u64, r: &SimulationResult) -> Self {
        Self {
            profile: profile.name().to_string(),
            mode: mode.to_string(),
            trials,
            seed,
            mean_delivered_quality: r.mean_delivered_quality,
            quality_std_error: r.quality_std_error,
            mean_response_delay_ms: r.mean_response_delay,
            effective_total_time_ms: r.effective_total_time,
            default_hits: r.default_hits,
            per_exit_hit_counts: r
                .per_exit_hit_counts
                .iter()
                .map(|&(e, hits)| ExitHits {
                    index: e,
                    label: profile.exit_label(e),
                    hits,
                })
                .collect(),
            quality_histogram: r.quality_histogram.clone(),
        }
    }
}

pub fn histogram_csv(r: &SimulationResult) -> String {
    let mut out = String::from("quality,trials\n");
    for (q, n) in &r.quality_histogram {
        writeln!(out, "{q},{n}").unwrap();
    }
    out
}

/// One row of a metrics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub name: String,
    pub q_norm: f64,
    pub q_se: f64,
    pub final_quality: f64,
    pub max_delta_ms: Option<f64>,
}

impl MetricRow {
    pub fn new(name: String, plan: &SchedulePlan, w: &Weighting, include_initial_gap: bool) -> Result<Self> {
        let final_quality = plan.curve.final_quality();
        Ok(Self {
            name,
            q_norm: plan.q_normalized,
            q_se: squared_error_quality(&plan.curve, final_quality, w)?,
            final_quality,
            max_delta_ms: max_delta(&plan.curve, include_initial_gap).ok(),
        })
    }
}

pub fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from("name,q_norm,q_se,final_quality,max_delta_ms\n");
    for r in rows {
        let delta = r.max_delta_ms.map(|d| d.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{delta}", r.name, r.q_norm, r.q_se, r.final_quality).unwrap();
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("views serialize");
    out.push('\n');
    out
}
