//! Monte Carlo simulation of interrupted anytime execution.
//!
//! A plan is replayed once into a timeline of exit availabilities (layer
//! latencies, per-chunk overheads and, in hard mode, inline exit heads).
//! Each trial then draws an interrupt time and looks up what was available.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layer_set::LayerSet;
use crate::optimizer::SchedulePlan;
use crate::profile::NetworkProfile;
use crate::timing::{CostModel, Mode};

#[derive(Debug, Clone, PartialEq)]
pub enum InterruptDistribution {
    /// Uniform over `[0, end]` of the simulated timeline.
    Uniform,
    /// Exponential with the given rate per ms, truncated at the timeline end.
    Exponential { rate: f64 },
    /// Drawn uniformly from observed interrupt times.
    Empirical(Vec<f64>),
}

impl InterruptDistribution {
    fn validate(&self) -> Result<()> {
        match self {
            InterruptDistribution::Uniform => Ok(()),
            InterruptDistribution::Exponential { rate } => {
                if rate.is_finite() && *rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSimulation(alloc::format!(
                        "exponential rate must be positive, got {rate}"
                    )))
                }
            }
            InterruptDistribution::Empirical(samples) => {
                if samples.is_empty() {
                    return Err(Error::InvalidSimulation("empty interrupt sample set".into()));
                }
                if samples.iter().any(|s| !s.is_finite() || *s < 0.0) {
                    return Err(Error::InvalidSimulation(
                        "interrupt samples must be finite and non-negative".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, end: f64) -> f64 {
        let u: f64 = rng.gen();
        match self {
            InterruptDistribution::Uniform => u * end,
            InterruptDistribution::Exponential { rate } => -libm::log1p(-u) / rate,
            InterruptDistribution::Empirical(samples) => samples[rng.gen_range(0..samples.len())],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub plan: SchedulePlan,
    pub mode: Mode,
    pub interrupt: InterruptDistribution,
    /// Host synchronization cost charged after every layer, in ms.
    pub per_chunk_overhead: f64,
    /// Cost of delivering the answer, in ms.
    pub transfer_delay: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub mean_delivered_quality: f64,
    /// Standard error of the mean delivered quality.
    pub quality_std_error: f64,
    /// `(quality, trials)` by ascending quality.
    pub quality_histogram: Vec<(f64, u64)>,
    pub mean_response_delay: f64,
    pub effective_total_time: f64,
    /// `(exit, trials)` for every deployed exit, by exit index.
    pub per_exit_hit_counts: Vec<(usize, u64)>,
    /// Trials answered with the default quality.
    pub default_hits: u64,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    exit: usize,
}

/// Exit availability times along a plan's order.
#[derive(Debug, Clone)]
pub struct Timeline {
    events: Vec<Event>,
    /// Completion time of the last layer (and inline heads).
    pub end: f64,
}

impl Timeline {
    pub fn build(
        profile: &NetworkProfile,
        plan: &SchedulePlan,
        mode: Mode,
        per_chunk_overhead: f64,
    ) -> Result<Self> {
        let cost = CostModel::with_selection(profile, mode, &plan.selected_exits)?;
        let order = profile.resolve_order(&plan.order)?;
        let mut executed = LayerSet::empty(profile.layer_count());
        let mut fired = vec![false; profile.exits().len()];
        let mut events = Vec::new();
        let mut t = 0.0;
        for l in order {
            t += profile.latency(l) + per_chunk_overhead;
            executed.insert(l);
            let batch: Vec<usize> = plan
                .selected_exits
                .iter()
                .copied()
                .filter(|&e| !fired[e] && cost.is_available(e, &executed))
                .collect();
            if mode == Mode::Hard {
                for &e in &batch {
                    t += profile.inline_head(e);
                }
            }
            for e in batch {
                fired[e] = true;
                events.push(Event { time: t, exit: e });
            }
        }
        Ok(Self { events, end: t })
    }

    /// `(time, exit)` availability events in time order.
    pub fn events(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.events.iter().map(|e| (e.time, e.exit))
    }
}

pub fn simulate(profile: &NetworkProfile, spec: &SimulationSpec) -> Result<SimulationResult> {
    if spec.trials == 0 {
        return Err(Error::InvalidSimulation("trials must be at least 1".into()));
    }
    for (name, v) in [
        ("per_chunk_overhead", spec.per_chunk_overhead),
        ("transfer_delay", spec.transfer_delay),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidSimulation(alloc::format!("{name} must be >= 0, got {v}")));
        }
    }
    spec.interrupt.validate()?;
    let final_exit = profile.final_exit();
    if !spec.plan.selected_exits.contains(&final_exit) {
        return Err(Error::InvalidSimulation("the plan does not deploy the final exit".into()));
    }

    let timeline = Timeline::build(profile, &spec.plan, spec.mode, spec.per_chunk_overhead)?;
    let end = timeline.end;
    let exits = profile.exits();

    // best[i]: best exit among the first i events.
    let mut best: Vec<Option<usize>> = Vec::with_capacity(timeline.events.len() + 1);
    best.push(None);
    for ev in &timeline.events {
        let prev = *best.last().expect("non-empty");
        let better = prev.is_none_or(|p| exits[ev.exit].quality > exits[p].quality);
        best.push(if better { Some(ev.exit) } else { prev });
    }
    let default_quality = profile.default_quality();
    let has_output_layers = !profile.output_layers().is_empty();

    let mut hits = vec![0u64; exits.len()];
    let mut default_hits = 0u64;
    let (mut sum_q, mut sum_q2, mut sum_delay) = (0.0, 0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for trial in 0..spec.trials {
        rng.set_stream(trial);
        rng.set_word_pos(0);
        let tau = spec.interrupt.draw(&mut rng, end);
        let (reached, delay) = if tau >= end {
            (Some(final_exit), spec.transfer_delay)
        } else {
            let n = timeline.events.partition_point(|e| e.time <= tau);
            let reached = best[n];
            let head = match (spec.mode, reached) {
                (Mode::Hard, _) | (_, None) => 0.0,
                (Mode::Soft, Some(e)) if e == final_exit && has_output_layers => {
                    // Remaining output layers finish the run.
                    end - tau
                }
                (Mode::Soft, Some(e)) => profile.grace_head(e),
            };
            (reached, head + spec.transfer_delay)
        };
        let q = match reached {
            Some(e) => {
                hits[e] += 1;
                exits[e].quality
            }
            None => {
                default_hits += 1;
                default_quality
            }
        };
        sum_q += q;
        sum_q2 += q * q;
        sum_delay += delay;
    }

    let n = spec.trials as f64;
    let mean = sum_q / n;
    let variance = if spec.trials > 1 {
        ((sum_q2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };

    let mut histogram: Vec<(f64, u64)> = Vec::new();
    let mut by_quality: Vec<(f64, u64)> = (0..exits.len())
        .filter(|&e| hits[e] > 0)
        .map(|e| (exits[e].quality, hits[e]))
        .collect();
    if default_hits > 0 {
        by_quality.push((default_quality, default_hits));
    }
    by_quality.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (q, c) in by_quality {
        match histogram.last_mut() {
            Some(last) if last.0 == q => last.1 += c,
            _ => histogram.push((q, c)),
        }
    }

    let mut selected = spec.plan.selected_exits.clone();
    selected.sort_unstable();
    selected.dedup();
    let effective_total_time = match spec.mode {
        Mode::Soft if !has_output_layers => end + profile.grace_head(final_exit),
        _ => end,
    };

    Ok(SimulationResult {
        mean_delivered_quality: mean,
        quality_std_error: libm::sqrt(variance / n),
        quality_histogram: histogram,
        mean_response_delay: sum_delay / n,
        effective_total_time,
        per_exit_hit_counts: selected.into_iter().map(|e| (e, hits[e])).collect(),
        default_hits,
    })
}

/// Per-chunk overhead estimated from a baseline and a chunked total latency.
pub fn calibrate_overhead(baseline_total: f64, chunked_total: f64, chunk_count: u32) -> Result<f64> {
    if !baseline_total.is_finite() || !chunked_total.is_finite() {
        return Err(Error::NonFinite("total latency"));
    }
    if chunk_count == 0 {
        return Err(Error::ZeroChunks);
    }
    if chunked_total < baseline_total {
        return Err(Error::ChunkedBelowBaseline {
            baseline: baseline_total,
            chunked: chunked_total,
        });
    }
    Ok((chunked_total - baseline_total) / f64::from(chunk_count))
}
