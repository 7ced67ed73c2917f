//! Deterministic generators for the synthetic benchmark signals.
//!
//! Three families are supported:
//! - `AlmostPeriodic`: cos(2πt) + cos(2t), two incommensurate frequencies, so
//!   the trajectory nearly but never exactly repeats;
//! - `Sine`: sin(t);
//! - `SineTrend`: sin(t) + 0.2t.
//!
//! Gaussian noise of a chosen standard deviation is added on top, drawn from
//! the pinned generator in [`rng`], so equal specs always produce bit-equal
//! series.

pub mod rng;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use rng::SplitMix64;

/// Signal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    AlmostPeriodic,
    Sine,
    SineTrend,
}

impl SynthKind {
    /// Noiseless signal value at time `t`.
    pub fn base(self, t: f64) -> f64 {
        match self {
            SynthKind::AlmostPeriodic => (2.0 * PI * t).cos() + (2.0 * t).cos(),
            SynthKind::Sine => t.sin(),
            SynthKind::SineTrend => t.sin() + 0.2 * t,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SynthKind::AlmostPeriodic => "almost_periodic",
            SynthKind::Sine => "sine",
            SynthKind::SineTrend => "sine_trend",
        }
    }

    /// Noise standard deviations used by the stock benchmark presets.
    pub fn preset_sigmas(self) -> &'static [f64] {
        match self {
            SynthKind::AlmostPeriodic => &[0.0, 0.1, 0.2, 0.3, 0.4],
            SynthKind::Sine => &[0.0, 0.05, 0.1, 0.2],
            SynthKind::SineTrend => &[0.02],
        }
    }
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "almost_periodic" => Ok(SynthKind::AlmostPeriodic),
            "sine" => Ok(SynthKind::Sine),
            "sine_trend" => Ok(SynthKind::SineTrend),
            other => Err(Error::Config(format!(
                "unknown signal kind {other:?}; expected \"almost_periodic\", \"sine\" or \"sine_trend\""
            ))),
        }
    }
}

/// Full recipe for one synthetic series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    /// Gaussian noise standard deviation.
    pub sigma: f64,
    pub n_points: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// The stock grid: `n_points` samples over [0, 8π].
    pub fn over_default_range(kind: SynthKind, sigma: f64, n_points: usize, seed: u64) -> Self {
        SynthSpec {
            kind,
            sigma,
            n_points,
            t_start: 0.0,
            t_end: 8.0 * PI,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_points must be >= 2, got {}",
                self.n_points
            )));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidArgument(format!(
                "t_end {} must exceed t_start {}",
                self.t_end, self.t_start
            )));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Sample the signal on an inclusive-endpoint linspace grid and add noise.
pub fn generate(spec: &SynthSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let n = spec.n_points;
    let step = (spec.t_end - spec.t_start) / (n - 1) as f64;
    let mut rng = SplitMix64::new(spec.seed);
    let mut timestamps = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let t = spec.t_start + i as f64 * step;
        timestamps.push(t);
        let noise = if spec.sigma > 0.0 {
            spec.sigma * rng.next_gaussian()
        } else {
            0.0
        };
        values.push(spec.kind.base(t) + noise);
    }
    let name = format!("{}_sigma{}", spec.kind.label(), spec.sigma);
    TimeSeries::new(timestamps, values, Some(name))
}
