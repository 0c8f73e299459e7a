//! Quality-versus-time step curves and the weighted anytime-quality metric.
//!
//! All integrals are computed in closed form: the curve is piecewise constant
//! and so is every supported weighting, so each curve interval contributes
//! `quality * weight_mass(interval)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Interrupt-time weighting `w(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// `w(t) = 1`.
    Uniform,
    /// `w(t)` equals the weight of the last breakpoint at or before `t`, and
    /// zero before the first breakpoint.
    PiecewiseConstant(Vec<(f64, f64)>),
    /// Observed interrupt times; the curve is averaged over them. Samples at
    /// or past the horizon see the final quality.
    EmpiricalSamples(Vec<f64>),
}

impl Weighting {
    pub fn piecewise(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let w = Weighting::PiecewiseConstant(breakpoints);
        w.validate()?;
        Ok(w)
    }

    /// Samples are stored sorted.
    pub fn samples(mut samples: Vec<f64>) -> Result<Self> {
        samples.sort_by(f64::total_cmp);
        let w = Weighting::EmpiricalSamples(samples);
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Weighting::Uniform => Ok(()),
            Weighting::PiecewiseConstant(bps) => {
                if bps.is_empty() {
                    return Err(Error::InvalidWeighting("no breakpoints".into()));
                }
                for (i, &(t, w)) in bps.iter().enumerate() {
                    if !t.is_finite() || !w.is_finite() || w < 0.0 || t < 0.0 {
                        return Err(Error::InvalidWeighting(format!(
                            "breakpoint {i} ({t}, {w}) must have finite t >= 0 and weight >= 0"
                        )));
                    }
                    if i > 0 && t <= bps[i - 1].0 {
                        return Err(Error::InvalidWeighting(
                            "breakpoints must be strictly increasing".into(),
                        ));
                    }
                }
                Ok(())
            }
            Weighting::EmpiricalSamples(s) => {
                if s.is_empty() {
                    return Err(Error::InvalidWeighting("empty sample set".into()));
                }
                if s.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(Error::InvalidWeighting(
                        "samples must be finite and non-negative".into(),
                    ));
                }
                if s.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidWeighting("samples must be sorted".into()));
                }
                Ok(())
            }
        }
    }

    /// Whether this weighting is a density over time (as opposed to a sample
    /// average, which is already normalized).
    pub fn is_density(&self) -> bool {
        !matches!(self, Weighting::EmpiricalSamples(_))
    }

    /// Weight mass of `[a, b)`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Weighting::Uniform => b - a,
            Weighting::PiecewiseConstant(bps) => {
                let mut total = 0.0;
                for (i, &(t, w)) in bps.iter().enumerate() {
                    let end = bps.get(i + 1).map_or(f64::INFINITY, |next| next.0);
                    let lo = if a > t { a } else { t };
                    let hi = if b < end { b } else { end };
                    if hi > lo {
                        total += w * (hi - lo);
                    }
                }
                total
            }
            Weighting::EmpiricalSamples(s) => {
                let lo = s.partition_point(|&x| x < a);
                let hi = s.partition_point(|&x| x < b);
                (hi - lo) as f64 / s.len() as f64
            }
        }
    }

    /// Point mass placed at the horizon: the share of samples at or beyond it.
    pub fn terminal_mass(&self, horizon: f64) -> f64 {
        match self {
            Weighting::EmpiricalSamples(s) => {
                let lo = s.partition_point(|&x| x < horizon);
                (s.len() - lo) as f64 / s.len() as f64
            }
            _ => 0.0,
        }
    }

    /// `w(t)` for density weightings.
    pub fn density_at(&self, t: f64) -> Option<f64> {
        match self {
            Weighting::Uniform => Some(1.0),
            Weighting::PiecewiseConstant(bps) => {
                let i = bps.partition_point(|&(b, _)| b <= t);
                Some(if i == 0 { 0.0 } else { bps[i - 1].1 })
            }
            Weighting::EmpiricalSamples(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub time: f64,
    pub quality: f64,
}

impl Step {
    pub fn new(time: f64, quality: f64) -> Self {
        Self { time, quality }
    }
}

/// Keeps a step only when its quality strictly exceeds everything before it
/// (including `floor`). Steps sharing a time collapse to the best of them.
pub fn monotone_filter(raw: &[Step], floor: f64) -> Vec<Step> {
    debug_assert!(raw.windows(2).all(|w| w[0].time <= w[1].time));
    let mut best = floor;
    let mut out: Vec<Step> = Vec::new();
    for s in raw {
        if s.quality > best {
            best = s.quality;
            match out.last_mut() {
                Some(last) if last.time == s.time => last.quality = s.quality,
                _ => out.push(*s),
            }
        }
    }
    out
}

/// Right-continuous, non-decreasing step function on `[0, horizon]`.
///
/// The curve is `initial` on `[0, steps[0].time)`, then `steps[i].quality`
/// on `[steps[i].time, steps[i+1].time)`, and the last step's quality up to
/// the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityCurve {
    initial: f64,
    steps: Vec<Step>,
    horizon: f64,
}

impl QualityCurve {
    pub fn new(initial: f64, steps: Vec<Step>, horizon: f64) -> Result<Self> {
        if !initial.is_finite() || !horizon.is_finite() || horizon < 0.0 {
            return Err(Error::InvalidCurve("initial and horizon must be finite".into()));
        }
        let mut prev_t = -1.0;
        let mut prev_q = initial;
        for s in &steps {
            if !s.time.is_finite() || !s.quality.is_finite() {
                return Err(Error::InvalidCurve("non-finite step".into()));
            }
            if s.time <= prev_t || s.time > horizon || s.time < 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "step time {} out of order or outside [0, {horizon}]",
                    s.time
                )));
            }
            if s.quality <= prev_q {
                return Err(Error::InvalidCurve(format!(
                    "step quality {} does not exceed {prev_q}",
                    s.quality
                )));
            }
            prev_t = s.time;
            prev_q = s.quality;
        }
        Ok(Self {
            initial,
            steps,
            horizon,
        })
    }

    /// Sorts `raw` by time and applies [`monotone_filter`] with `initial` as
    /// the floor.
    pub fn from_raw(initial: f64, mut raw: Vec<Step>, horizon: f64) -> Result<Self> {
        raw.sort_by(|a, b| a.time.total_cmp(&b.time));
        let steps = monotone_filter(&raw, initial);
        Self::new(initial, steps, horizon)
    }

    /// Quality before the first step.
    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn final_quality(&self) -> f64 {
        self.steps.last().map_or(self.initial, |s| s.quality)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.steps.partition_point(|s| s.time <= t);
        if i == 0 {
            self.initial
        } else {
            self.steps[i - 1].quality
        }
    }

    /// `(start, end, quality)` for each constant piece of `[0, horizon)`.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let first = (0.0, self.steps.first().map_or(self.horizon, |s| s.time), self.initial);
        core::iter::once(first).chain(self.steps.iter().enumerate().map(|(i, s)| {
            let end = self.steps.get(i + 1).map_or(self.horizon, |n| n.time);
            (s.time, end, s.quality)
        }))
    }

    /// Multiplies every time (and the horizon) by `factor`.
    pub fn scale_time(&self, factor: f64) -> Self {
        Self {
            initial: self.initial,
            steps: self
                .steps
                .iter()
                .map(|s| Step::new(s.time * factor, s.quality))
                .collect(),
            horizon: self.horizon * factor,
        }
    }

    fn weighted_integral(&self, w: &Weighting, f: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (a, b, q) in self.intervals() {
            total += f(q) * w.mass(a, b);
        }
        total + f(self.final_quality()) * w.terminal_mass(self.horizon)
    }
}

/// Weighted integral of the curve over `[0, T]`, divided by `T` when
/// `normalize` is set. For sample weighting this is the sample mean of the
/// curve and `normalize` has no effect.
pub fn anytime_quality(curve: &QualityCurve, w: &Weighting, normalize: bool) -> Result<f64> {
    w.validate()?;
    let total = curve.weighted_integral(w, |q| q);
    if normalize && w.is_density() {
        if curve.horizon == 0.0 {
            return Err(Error::ZeroHorizon);
        }
        return Ok(total / curve.horizon);
    }
    Ok(total)
}

/// Normalized weighted integral of `(baseline - q(t))^2`; lower is better.
pub fn squared_error_quality(curve: &QualityCurve, baseline: f64, w: &Weighting) -> Result<f64> {
    if !baseline.is_finite() {
        return Err(Error::NonFinite("baseline"));
    }
    w.validate()?;
    let total = curve.weighted_integral(w, |q| (baseline - q) * (baseline - q));
    if w.is_density() {
        if curve.horizon == 0.0 {
            return Err(Error::ZeroHorizon);
        }
        return Ok(total / curve.horizon);
    }
    Ok(total)
}

/// Largest gap between consecutive exit steps. With `include_initial_gap`
/// the gaps `[0, first step]` and `[last step, T]` also count.
pub fn max_delta(curve: &QualityCurve, include_initial_gap: bool) -> Result<f64> {
    let (Some(first), Some(last)) = (curve.steps.first(), curve.steps.last()) else {
        return Err(Error::EmptyCurve);
    };
    let mut gap = curve
        .steps
        .windows(2)
        .map(|w| w[1].time - w[0].time)
        .fold(0.0, f64::max);
    if include_initial_gap {
        gap = gap.max(first.time).max(curve.horizon - last.time);
    }
    Ok(gap)
}
