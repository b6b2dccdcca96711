//! Mining the time interval of `G[aL, bL] (s > 0)` from a batch of signals.
//!
//! Loss: mean over signals of `relu(-ρ)` plus `γ (a - b)`, with the interval
//! smoothed by the sigmoid mask and `(a, b)` obtained from two free reals
//! through a sigmoid.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::descent::{gradient_descent, logit, sorted_interval, DescentConfig};
use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::formula::{Formula, Interval};
use crate::masking::{robustness_with, Channels, SmoothBinding};
use crate::scalar::Scalar;
use crate::signal::{Mode, SemanticsConfig, Signal, SmoothInterval};
use crate::smoothing::AnnealSchedule;

/// Synthetic data: value 1 on a jittered window around `truth`, 0 elsewhere,
/// plus Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetGen {
    pub len: usize,
    pub truth: (f64, f64),
    pub count: usize,
    /// Window edges move by a uniform offset in `[-jitter, jitter]` samples.
    pub jitter: f64,
    pub noise: f64,
}

impl Default for DatasetGen {
    fn default() -> Self {
        DatasetGen {
            len: 20,
            truth: (0.23, 0.59),
            count: 64,
            jitter: 1.0,
            noise: 0.05,
        }
    }
}

pub fn generate_dataset(gen: &DatasetGen, seed: u64) -> Result<Vec<Signal>> {
    if gen.len == 0 || gen.count == 0 || !(gen.noise >= 0.0) || !(gen.jitter >= 0.0) {
        return Err(Error::InvalidConfig(
            "dataset needs len, count >= 1 and non-negative noise".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, gen.noise).map_err(|_| Error::InvalidConfig("bad noise".into()))?;
    let l = gen.len as f64;
    (0..gen.count)
        .map(|_| {
            let start = gen.truth.0 * l + gen.jitter * rng.random_range(-1.0..=1.0);
            let end = gen.truth.1 * l + gen.jitter * rng.random_range(-1.0..=1.0);
            let values = (0..gen.len)
                .map(|i| {
                    let i = i as f64;
                    let base = if start <= i && i <= end { 1.0 } else { 0.0 };
                    base + noise.sample(&mut rng)
                })
                .collect();
            Signal::new(values, 1.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub steps: usize,
    /// Mask sharpness `c` per step.
    pub c: AnnealSchedule,
    /// Temperature per step.
    pub temperature: AnnealSchedule,
    /// Smooth reduction; its temperature is overridden by the schedule.
    pub mode: Mode,
    pub init: (f64, f64),
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            gamma: 0.15,
            learning_rate: 1e-2,
            steps: 5000,
            c: AnnealSchedule::sigmoid(1.0, 50.0, 5000),
            temperature: AnnealSchedule::sigmoid(1.0, 50.0, 5000),
            mode: Mode::LogSumExp { temperature: 1.0 },
            init: (0.1, 0.9),
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and >= 0");
        }
        if !(0.0 < self.init.0 && self.init.0 < self.init.1 && self.init.1 < 1.0) {
            return bad("init must satisfy 0 < a < b < 1");
        }
        if self.mode == Mode::Hard {
            return bad("mining needs a smooth mode");
        }
        self.c.validate()?;
        self.temperature.validate()?;
        DescentConfig {
            learning_rate: self.learning_rate,
            steps: self.steps,
        }
        .validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningResult {
    pub a: f64,
    pub b: f64,
    pub loss_history: Vec<f64>,
    /// `(a, b)` before every step.
    pub interval_history: Vec<(f64, f64)>,
}

/// `G ~[a,b,c] (s > 0)`; the interval values are placeholders, engines take
/// them from the binding.
pub fn mining_formula() -> Formula {
    let si = SmoothInterval::new(0.0, 1.0, 1.0, 0.0).expect("valid");
    Formula::always(Some(Interval::Smooth(si)), Formula::gt("s", 0.0))
}

fn channels<S: Scalar>(dataset: &[Signal]) -> Result<Vec<Channels<S>>> {
    dataset
        .iter()
        .map(|s| {
            let mut map = BTreeMap::new();
            map.insert(String::from("s"), s.values().iter().map(|&v| S::constant(v)).collect());
            Channels::new(map)
        })
        .collect()
}

fn objective<S: Scalar>(a: S, b: S, c: f64, data: &[Channels<S>], gamma: f64, cfg: &SemanticsConfig) -> Result<S> {
    let f = mining_formula();
    let bind = [SmoothBinding {
        a,
        b,
        c: S::constant(c),
        eps: 0.0,
    }];
    let mut total = S::constant(0.0);
    for ch in data {
        let rho = robustness_with(&f, ch, cfg, &bind)?;
        total = total + (-rho).relu();
    }
    Ok(total * S::constant(1.0 / data.len() as f64) + (a - b).affine(gamma, 0.0))
}

/// The mining loss at `(a, b)` with mask sharpness `c`.
pub fn mining_objective(a: f64, b: f64, c: f64, dataset: &[Signal], gamma: f64, cfg: &SemanticsConfig) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::NoSignals);
    }
    objective(a, b, c, &channels::<f64>(dataset)?, gamma, cfg)
}

/// Gradient descent on the mining loss with annealed `c` and temperature.
pub fn mine_interval(dataset: &[Signal], cfg: &MiningConfig) -> Result<MiningResult> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::NoSignals);
    }
    let mut x = [logit(cfg.init.0), logit(cfg.init.1)];
    let mut intervals = Vec::with_capacity(cfg.steps);
    let descent = DescentConfig {
        learning_rate: cfg.learning_rate,
        steps: cfg.steps,
    };
    let history = gradient_descent(&mut x, &descent, |step, x| {
        let tape = Tape::new();
        let (p, q) = (tape.var(x[0]), tape.var(x[1]));
        let (a, b) = sorted_interval(p, q);
        if !(a.value() < b.value()) {
            return Err(Error::Diverged { step });
        }
        intervals.push((a.value(), b.value()));
        let sem = SemanticsConfig::hard().with_mode(cfg.mode.with_temperature(cfg.temperature.value(step)));
        let vars: Vec<Channels<Var<'_>>> = channels(dataset)?;
        let loss = objective(a, b, cfg.c.value(step), &vars, cfg.gamma, &sem)?;
        let adj = tape.gradient(loss);
        Ok((loss.value(), alloc::vec![adj.wrt(&p), adj.wrt(&q)]))
    })?;
    let (a, b) = sorted_interval(x[0], x[1]);
    Ok(MiningResult {
        a,
        b,
        loss_history: history,
        interval_history: intervals,
    })
}
