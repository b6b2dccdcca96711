//! Masking vs recurrent timing on the six benchmark specifications.
//!
//! Leaves are box memberships over channels `x` and `y`: `φ_j` is
//! `0.4 j < x < 0.4 j + 1`, `ψ_j` the same on `y`; an unindexed leaf is
//! index 1. Timed operators use `I = [0, 5]`. Signals are uniform in
//! `[0, 4.6]`, which covers every box.

use std::hint::black_box;
use std::time::Instant;

use maskstl::autodiff::{value_and_grad, value_and_grad_recurrent};
use maskstl::formula::{Formula, Interval};
use maskstl::recurrent::trace_recurrent;
use maskstl::testing::random_signals;
use maskstl::{robustness_trace, Mode, NamedSignals, SemanticsConfig, StepInterval};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SIZES: [usize; 5] = [32, 64, 128, 256, 512];
pub const SIGNAL_RANGE: (f64, f64) = (0.0, 4.6);

fn leaf(var: &str, j: usize) -> Formula {
    let lo = 0.4 * j as f64;
    Formula::and(Formula::gt(var, lo), Formula::lt(var, lo + 1.0))
}

/// `φ_j ∧ ψ_j`.
fn both(j: usize) -> Formula {
    Formula::and(leaf("x", j), leaf("y", j))
}

fn within() -> Option<Interval> {
    Some(Interval::Steps(StepInterval::new(0, 5).expect("0 <= 5")))
}

/// Specification `φ_k`, `k` in `1..=6`.
pub fn spec(k: usize) -> Option<Formula> {
    let f = match k {
        1 => Formula::always(None, both(1)),
        2 => Formula::eventually(None, Formula::always(None, both(1))),
        3 => Formula::until(None, leaf("x", 1), leaf("y", 1)),
        4 => {
            let mut f = Formula::eventually(within(), both(1));
            for j in 2..=4 {
                f = Formula::eventually(within(), Formula::and(both(j), f));
            }
            f
        }
        5 => Formula::eventually(
            within(),
            Formula::and(
                both(2),
                Formula::eventually(within(), Formula::always(within(), both(1))),
            ),
        ),
        6 => Formula::and_all((0..=9).rev().map(|j| Formula::eventually(within(), both(j)))),
        _ => return None,
    };
    Some(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Masking,
    Recurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Full robustness trace, hard semantics.
    Value,
    /// Robustness and its gradient w.r.t. all samples, log-sum-exp.
    Gradient,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub formulas: Vec<usize>,
    pub sizes: Vec<usize>,
    pub batch: usize,
    pub reps: usize,
    pub warmup: usize,
    pub gradients: bool,
    /// Until gradients are skipped above this length.
    pub until_gradient_max_len: usize,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            formulas: (1..=6).collect(),
            sizes: SIZES.to_vec(),
            batch: 8,
            reps: 10,
            warmup: 3,
            gradients: true,
            until_gradient_max_len: 128,
            temperature: 10.0,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.reps < 10 {
            return Err(CliError::Usage(format!(
                "need at least 10 repetitions, got {}",
                self.reps
            )));
        }
        if self.batch == 0 || self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(CliError::Usage("batch and sizes must be positive".into()));
        }
        if let Some(k) = self.formulas.iter().find(|k| spec(**k).is_none()) {
            return Err(CliError::Usage(format!("no benchmark formula {k} (1..=6)")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchEntry {
    pub formula: String,
    pub engine: Engine,
    pub task: Task,
    pub len: usize,
    pub batch: usize,
    pub reps: usize,
    pub median_ns: f64,
    pub iqr_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relative {
    pub formula: String,
    pub task: Task,
    pub len: usize,
    /// `masking / recurrent - 1`; negative means masking is faster.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub batch: usize,
    pub reps: usize,
    pub warmup: usize,
    pub entries: Vec<BenchEntry>,
    pub relative: Vec<Relative>,
}

impl BenchReport {
    pub fn median(&self, formula: usize, engine: Engine, task: Task, len: usize) -> Option<f64> {
        let name = format!("phi{formula}");
        self.entries
            .iter()
            .find(|e| e.formula == name && e.engine == engine && e.task == task && e.len == len)
            .map(|e| e.median_ns)
    }
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median and interquartile range.
pub fn summarize(samples: &[f64]) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    (quantile(&s, 0.5), quantile(&s, 0.75) - quantile(&s, 0.25))
}

fn time_batch(batch: &[NamedSignals], mut run: impl FnMut(&NamedSignals) -> maskstl::Result<f64>) -> CliResult<f64> {
    let start = Instant::now();
    for s in batch {
        black_box(run(black_box(s))?);
    }
    Ok(start.elapsed().as_nanos() as f64)
}

fn measure(
    cfg: &BenchConfig,
    batch: &[NamedSignals],
    mut run: impl FnMut(&NamedSignals) -> maskstl::Result<f64>,
) -> CliResult<(f64, f64)> {
    for _ in 0..cfg.warmup {
        time_batch(batch, &mut run)?;
    }
    let samples = (0..cfg.reps)
        .map(|_| time_batch(batch, &mut run).map(|ns| ns.max(1.0)))
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(summarize(&samples))
}

/// Runs every (formula, length, engine, task) combination.
pub fn run(cfg: &BenchConfig) -> CliResult<BenchReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hard = SemanticsConfig::hard();
    let lse = SemanticsConfig::hard().with_mode(Mode::LogSumExp {
        temperature: cfg.temperature,
    });
    let mut entries = Vec::new();
    let mut relative = Vec::new();
    for &len in &cfg.sizes {
        let batch: Vec<NamedSignals> = (0..cfg.batch)
            .map(|_| random_signals(&mut rng, &["x", "y"], len, SIGNAL_RANGE.0, SIGNAL_RANGE.1))
            .collect();
        for &k in &cfg.formulas {
            let f = spec(k).expect("validated");
            let mut tasks = vec![Task::Value];
            if cfg.gradients && (k != 3 || len <= cfg.until_gradient_max_len) {
                tasks.push(Task::Gradient);
            }
            for task in tasks {
                let mut medians = [0.0; 2];
                for (slot, engine) in [Engine::Masking, Engine::Recurrent].into_iter().enumerate() {
                    let (median, iqr) = match (engine, task) {
                        (Engine::Masking, Task::Value) => {
                            measure(cfg, &batch, |s| Ok(robustness_trace(&f, s, &hard)?[0]))
                        }
                        (Engine::Recurrent, Task::Value) => {
                            measure(cfg, &batch, |s| Ok(trace_recurrent(&f, s, &hard)?[0]))
                        }
                        (Engine::Masking, Task::Gradient) => {
                            measure(cfg, &batch, |s| Ok(value_and_grad(&f, s, &lse, None)?.value))
                        }
                        (Engine::Recurrent, Task::Gradient) => {
                            measure(cfg, &batch, |s| Ok(value_and_grad_recurrent(&f, s, &lse)?.value))
                        }
                    }?;
                    medians[slot] = median;
                    entries.push(BenchEntry {
                        formula: format!("phi{k}"),
                        engine,
                        task,
                        len,
                        batch: cfg.batch,
                        reps: cfg.reps,
                        median_ns: median,
                        iqr_ns: iqr,
                    });
                }
                relative.push(Relative {
                    formula: format!("phi{k}"),
                    task,
                    len,
                    relative: medians[0] / medians[1] - 1.0,
                });
            }
        }
    }
    Ok(BenchReport {
        batch: cfg.batch,
        reps: cfg.reps,
        warmup: cfg.warmup,
        entries,
        relative,
    })
}
