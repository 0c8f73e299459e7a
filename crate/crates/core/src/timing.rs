//! Elapsed time and reached quality of execution states under soft or hard
//! anytime semantics.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::layer_set::LayerSet;
use crate::profile::{LayerId, NetworkProfile};
use crate::quality::{QualityCurve, Step, Weighting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exit heads run after the interrupt, during a grace period.
    #[default]
    Soft,
    /// Exit heads run inline as soon as their features exist.
    Hard,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Soft => "soft",
            Mode::Hard => "hard",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(Mode::Soft),
            "hard" => Ok(Mode::Hard),
            other => Err(Error::InvalidSimulation(alloc::format!("unknown mode {other:?}"))),
        }
    }
}

/// Cost model for a profile, a mode and a set of deployed exits.
///
/// `c(v)` is the latency of the executed set `v`, plus in hard mode the
/// inline heads of every selected exit already triggered by `v`. An exit is
/// triggered once its attach closure has run (soft) or once all of its
/// required layers have run (hard).
#[derive(Debug, Clone)]
pub struct CostModel<'p> {
    profile: &'p NetworkProfile,
    mode: Mode,
    selected: Vec<bool>,
}

impl<'p> CostModel<'p> {
    /// Every listed exit is deployed.
    pub fn new(profile: &'p NetworkProfile, mode: Mode) -> Self {
        Self {
            profile,
            mode,
            selected: vec![true; profile.exits().len()],
        }
    }

    pub fn with_selection(profile: &'p NetworkProfile, mode: Mode, exits: &[usize]) -> Result<Self> {
        let mut selected = vec![false; profile.exits().len()];
        for &e in exits {
            *selected.get_mut(e).ok_or(Error::UnknownExit(e))? = true;
        }
        Ok(Self {
            profile,
            mode,
            selected,
        })
    }

    pub fn profile(&self) -> &'p NetworkProfile {
        self.profile
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn selected_exits(&self) -> Vec<usize> {
        (0..self.selected.len()).filter(|&e| self.selected[e]).collect()
    }

    pub fn is_selected(&self, exit: usize) -> bool {
        self.selected.get(exit).copied().unwrap_or(false)
    }

    /// Layers whose completion makes `exit` usable in this mode.
    pub fn trigger(&self, exit: usize) -> &'p LayerSet {
        match self.mode {
            Mode::Soft => self.profile.exit_features(exit),
            Mode::Hard => self.profile.exit_required(exit),
        }
    }

    pub fn is_available(&self, exit: usize, executed: &LayerSet) -> bool {
        self.trigger(exit).is_subset(executed)
    }

    /// `c(v)`.
    pub fn elapsed(&self, executed: &LayerSet) -> f64 {
        let mut t = self.profile.latency_sum(executed);
        if self.mode == Mode::Hard {
            for e in 0..self.selected.len() {
                if self.selected[e] && self.is_available(e, executed) {
                    t += self.profile.inline_head(e);
                }
            }
        }
        t
    }

    /// Best deployed exit quality usable after `executed`, floored at the
    /// profile's default quality.
    pub fn reached_quality(&self, executed: &LayerSet) -> f64 {
        let mut q = self.profile.default_quality();
        for (e, spec) in self.profile.exits().iter().enumerate() {
            if self.selected[e] && spec.quality > q && self.is_available(e, executed) {
                q = spec.quality;
            }
        }
        q
    }

    /// Total time `T` of a complete run.
    pub fn horizon(&self) -> f64 {
        self.elapsed(&self.profile.full_set())
    }

    /// Weight of the execution step `v -> v + {layer}`: the quality reached
    /// at `v` times the weight mass of `[c(v), c(v + {layer}))`. The step
    /// completing the network also carries the weighting's terminal mass.
    pub fn step_weight(&self, w: &Weighting, executed: &LayerSet, layer: usize, horizon: f64) -> f64 {
        let mut next = executed.clone();
        next.insert(layer);
        let q = self.reached_quality(executed);
        let mut weight = q * w.mass(self.elapsed(executed), self.elapsed(&next));
        if next.len() == next.capacity() {
            weight += self.reached_quality(&next) * w.terminal_mass(horizon);
        }
        weight
    }

    /// Quality curve of executing layers in `order` (dense indices, assumed
    /// valid).
    pub fn curve_for_indices(&self, order: &[usize]) -> Result<QualityCurve> {
        let mut executed = LayerSet::empty(self.profile.layer_count());
        let mut raw = Vec::with_capacity(order.len());
        for &l in order {
            executed.insert(l);
            raw.push(Step::new(self.elapsed(&executed), self.reached_quality(&executed)));
        }
        let horizon = self.elapsed(&executed);
        QualityCurve::from_raw(self.profile.default_quality(), raw, horizon)
    }

    /// Validates `order` and builds its quality curve.
    pub fn curve_for_order(&self, order: &[LayerId]) -> Result<QualityCurve> {
        let idx = self.profile.resolve_order(order)?;
        self.curve_for_indices(&idx)
    }
}

/// Quality curve of `order` with every listed exit deployed.
pub fn build_curve(profile: &NetworkProfile, order: &[LayerId], mode: Mode) -> Result<QualityCurve> {
    CostModel::new(profile, mode).curve_for_order(order)
}
