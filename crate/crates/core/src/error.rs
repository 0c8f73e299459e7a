use alloc::string::String;
use alloc::vec::Vec;

use crate::profile::{LayerId, SubExitId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

fn join_cycle(cycle: &[LayerId]) -> String {
    let mut out = String::new();
    for (i, id) in cycle.iter().enumerate() {
        if i > 0 {
            out.push_str(" -> ");
        }
        out.push_str(&alloc::format!("{id}"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    // Profile validation.
    #[error("duplicate layer id {0}")]
    DuplicateLayer(LayerId),
    #[error("layer {layer} depends on unknown layer {missing}")]
    DanglingDependency { layer: LayerId, missing: LayerId },
    #[error("dependency cycle: {}", join_cycle(.0))]
    Cycle(Vec<LayerId>),
    #[error("layer {layer}: latency must be finite and non-negative, got {value}")]
    InvalidLatency { layer: LayerId, value: f64 },
    #[error("duplicate scale {0:?}")]
    DuplicateScale(String),
    #[error("profile declares no scales")]
    NoScales,
    #[error("duplicate sub-exit id {0}")]
    DuplicateSubExit(SubExitId),
    #[error("sub-exit {sub_exit} attaches to unknown layer {layer}")]
    DanglingAttach { sub_exit: SubExitId, layer: LayerId },
    #[error("sub-exit {sub_exit} uses undeclared scale {scale:?}")]
    UnknownScale { sub_exit: SubExitId, scale: String },
    #[error("sub-exit {sub_exit}: head latency must be finite and non-negative, got {value}")]
    InvalidHeadLatency { sub_exit: SubExitId, value: f64 },
    #[error("exit #{exit}: {reason}")]
    InvalidExit { exit: usize, reason: String },
    #[error("exit #{exit} references unknown sub-exit {sub_exit}")]
    DanglingSubExit { exit: usize, sub_exit: SubExitId },
    #[error("profile declares no exits")]
    NoExits,
    #[error("no exit covers every exit-relevant layer; cannot designate a final exit")]
    NoFinalExit,
    #[error("exits {0:?} all cover every exit-relevant layer; the final exit is ambiguous")]
    AmbiguousFinalExit(Vec<usize>),
    #[error("final exit quality {exit_quality} differs from final_quality {final_quality}")]
    FinalQualityMismatch { exit_quality: f64, final_quality: f64 },
    #[error("{0} must be finite")]
    NonFinite(&'static str),

    // Orders and schedules.
    #[error("invalid execution order: {0}")]
    InvalidOrder(String),
    #[error("unknown exit index {0}")]
    UnknownExit(usize),
    #[error("exit sequence is not dependency-monotone at position {0}")]
    NonMonotoneExitPath(usize),

    // Quality math.
    #[error("invalid weighting: {0}")]
    InvalidWeighting(String),
    #[error("cannot normalize: horizon T is zero")]
    ZeroHorizon,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("curve has no exit steps")]
    EmptyCurve,

    // Graphs and optimizers.
    #[error("node limit must be positive")]
    ZeroNodeLimit,
    #[error("execution graph has at least {lower_bound} states, above the limit of {limit}")]
    NodeLimitExceeded { limit: usize, lower_bound: usize },
    #[error("final exit is not reachable from the start state")]
    FinalUnreachable,
    #[error("sink is not reachable from the source")]
    SinkUnreachable,
    #[error("k = {k} is outside 1..={max}")]
    InvalidExitCount { k: usize, max: usize },
    #[error("no source-to-sink path with at most {0} edges")]
    NoPathWithin(usize),
    #[error("greedy search stuck at {0}: no admissible successor")]
    DeadEnd(String),
    #[error("more than {limit} topological orders")]
    TooManyOrders { limit: usize },

    // Simulation.
    #[error("invalid simulation: {0}")]
    InvalidSimulation(String),
    #[error("chunk count must be at least 1")]
    ZeroChunks,
    #[error("chunked total {chunked} is below baseline total {baseline}")]
    ChunkedBelowBaseline { baseline: f64, chunked: f64 },
}
