//! Anytime inference as DAG scheduling.
//!
//! A [`NetworkProfile`] describes a layer DAG with per-layer latencies and a
//! table of early exits, each exit being a tuple of sub-exits (one per output
//! scale). From a profile this crate computes
//!
//! - quality-versus-time step curves and the weighted anytime-quality metric
//!   ([`quality`]),
//! - the lattice of execution states and the reduced exit-state graph
//!   ([`graph`]),
//! - optimal execution orders, k-exit selections and greedy baselines
//!   ([`optimizer`]),
//! - Monte Carlo interrupt simulation under soft and hard semantics
//!   ([`simulator`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod graph;
pub mod layer_set;
pub mod optimizer;
pub mod profile;
pub mod quality;
pub mod simulator;
pub mod timing;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use error::{Error, Result};
pub use graph::{ExecState, ExecutionGraph, ExitGraph, WeightedDag};
pub use layer_set::LayerSet;
pub use optimizer::{Method, SchedulePlan};
pub use profile::{
    ExitSpec, LayerId, LayerProfile, NetworkProfile, ProfileDraft, SubExitId, SubExitProfile,
};
pub use quality::{QualityCurve, Step, Weighting};
pub use simulator::{InterruptDistribution, SimulationResult, SimulationSpec};
pub use timing::{CostModel, Mode};
