//! Sampled signals, time intervals and evaluation settings.
//!
//! Every robustness trace is suffix indexed: entry `t` is the robustness of
//! the subsignal that starts at sample `t` and runs to the final sample.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};

/// A uniformly sampled real-valued signal with at least one finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
    dt: f64,
}

impl Signal {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimestep(dt));
        }
        Ok(Signal { values, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample spacing in seconds. Carried for IO only; intervals count samples.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Builds a [`Signal`] from raw samples.
pub fn make_signal(samples: &[f64], dt: f64) -> Result<Signal> {
    Signal::new(samples.to_vec(), dt)
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Named channels sharing one length and one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSignals {
    channels: BTreeMap<String, Signal>,
    len: usize,
    dt: f64,
}

impl NamedSignals {
    pub fn new<I, S>(channels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Signal)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        let mut shape: Option<(usize, f64)> = None;
        for (name, signal) in channels {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(Error::InvalidName(name));
            }
            match shape {
                None => shape = Some((signal.len(), signal.dt())),
                Some((len, dt)) => {
                    if signal.len() != len {
                        return Err(Error::LengthMismatch {
                            name,
                            expected: len,
                            found: signal.len(),
                        });
                    }
                    if signal.dt() != dt {
                        return Err(Error::TimestepMismatch {
                            name,
                            expected: dt,
                            found: signal.dt(),
                        });
                    }
                }
            }
            map.insert(name, signal);
        }
        let (len, dt) = shape.ok_or(Error::NoSignals)?;
        Ok(NamedSignals { channels: map, len, dt })
    }

    /// Convenience constructor for a single channel.
    pub fn single(name: &str, samples: &[f64]) -> Result<Self> {
        Self::new([(name, make_signal(samples, 1.0)?)])
    }

    pub fn get(&self, name: &str) -> Option<&Signal> {
        self.channels.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Signal)> {
        self.channels.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn contains(&self, name: &str) -> bool {
        self.channels.contains_key(name)
    }
}

/// Discrete interval `[a, b]` measured in timesteps, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepInterval {
    a: usize,
    b: usize,
}

impl StepInterval {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(StepInterval { a, b })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of timesteps covered, `b - a + 1`.
    pub fn window_size(&self) -> usize {
        self.b - self.a + 1
    }
}

pub fn window_size(iv: StepInterval) -> usize {
    iv.window_size()
}

/// Interval bounds as fractions of the signal length, with the parameters of
/// the sigmoid mask that makes them differentiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothInterval {
    pub a: f64,
    pub b: f64,
    /// Mask sharpness; larger values approach a hard indicator.
    pub c: f64,
    /// Weight tolerance subtracted before clamping at zero.
    pub eps: f64,
}

impl SmoothInterval {
    pub fn new(a: f64, b: f64, c: f64, eps: f64) -> Result<Self> {
        let si = SmoothInterval { a, b, c, eps };
        si.validate()?;
        Ok(si)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.eps.is_finite()) {
            return Err(Error::InvalidSmoothInterval("parameters must be finite"));
        }
        if !(0.0 <= self.a && self.a < self.b && self.b <= 1.0) {
            return Err(Error::InvalidSmoothInterval("requires 0 <= a < b <= 1"));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidSmoothInterval("requires c > 0"));
        }
        if !(0.0..0.5).contains(&self.eps) {
            return Err(Error::InvalidSmoothInterval("requires 0 <= eps < 0.5"));
        }
        Ok(())
    }

    /// The discrete interval whose samples carry mask weight at least one half
    /// when `c` is large: `[ceil(a L), floor(b L)]`, clipped to `[0, L-1]`.
    pub fn to_steps(&self, len: usize) -> Result<StepInterval> {
        let l = len as f64;
        let lo = libm::ceil(self.a * l) as usize;
        let hi = (libm::floor(self.b * l) as usize).min(len.saturating_sub(1));
        StepInterval::new(lo, hi)
    }
}

/// Values supplied for rows past the end of a child trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PaddingPolicy {
    /// Repeat the final trace value.
    LastValue,
    Constant(f64),
}

/// Reduction used for every min/max in the semantics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Hard,
    SoftMax { temperature: f64 },
    LogSumExp { temperature: f64 },
}

impl Mode {
    pub fn temperature(&self) -> Option<f64> {
        match *self {
            Mode::Hard => None,
            Mode::SoftMax { temperature } | Mode::LogSumExp { temperature } => Some(temperature),
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Mode {
        match self {
            Mode::Hard => Mode::Hard,
            Mode::SoftMax { .. } => Mode::SoftMax { temperature },
            Mode::LogSumExp { .. } => Mode::LogSumExp { temperature },
        }
    }
}

/// How masked-out entries are excluded from a column reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskFill {
    /// Reduce only over kept entries.
    #[default]
    KeptOnly,
    /// Reduce over the whole column with masked entries replaced by
    /// `-sentinel` (max) or `+sentinel` (min).
    Sentinel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemanticsConfig {
    pub mode: Mode,
    pub padding: PaddingPolicy,
    pub sentinel: f64,
    /// Robustness of `TRUE`.
    pub top_value: f64,
    pub fill: MaskFill,
}

impl Default for SemanticsConfig {
    fn default() -> Self {
        SemanticsConfig {
            mode: Mode::Hard,
            padding: PaddingPolicy::LastValue,
            sentinel: 1e5,
            top_value: 1e5,
            fill: MaskFill::KeptOnly,
        }
    }
}

impl SemanticsConfig {
    pub fn hard() -> Self {
        Self::default()
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_padding(mut self, padding: PaddingPolicy) -> Self {
        self.padding = padding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.mode.temperature() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidConfig("temperature must be positive".to_string()));
            }
        }
        if !(self.sentinel.is_finite() && self.sentinel > 0.0) {
            return Err(Error::InvalidConfig("sentinel must be positive".to_string()));
        }
        if !(self.top_value.is_finite() && self.top_value > 0.0) {
            return Err(Error::InvalidConfig("top value must be positive".to_string()));
        }
        if let PaddingPolicy::Constant(v) = self.padding {
            if !v.is_finite() {
                return Err(Error::InvalidConfig("padding constant must be finite".to_string()));
            }
        }
        Ok(())
    }
}

/// Robustness of a formula for every suffix of the input signal.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessTrace {
    values: Vec<f64>,
}

impl RobustnessTrace {
    pub fn new(values: Vec<f64>) -> Self {
        RobustnessTrace { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Robustness of the whole signal.
    pub fn first(&self) -> f64 {
        self.values[0]
    }
}

impl From<Vec<f64>> for RobustnessTrace {
    fn from(values: Vec<f64>) -> Self {
        RobustnessTrace { values }
    }
}

impl Index<usize> for RobustnessTrace {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
