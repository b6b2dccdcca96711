//! Flat TOML configs for `mine` and `plan`. Every key is optional and falls
//! back to the library default; unknown keys are rejected. The resolved
//! config (all keys filled in) is echoed in the JSON output.
//!
//! Schedules are given as `<kind>_start`, `<kind>_end` plus a shared
//! `schedule = "sigmoid" | "linear" | "constant"` spanning all steps.

use std::path::Path;

use maskstl::apps::{DatasetGen, MiningConfig, PlannerConfig, Region};
use maskstl::smoothing::{AnnealSchedule, ScheduleKind};
use maskstl::Mode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Hard => "hard",
        Mode::SoftMax { .. } => "softmax",
        Mode::LogSumExp { .. } => "lse",
    }
}

pub fn parse_mode(name: &str, temperature: f64) -> CliResult<Mode> {
    match name {
        "hard" => Ok(Mode::Hard),
        "softmax" => Ok(Mode::SoftMax { temperature }),
        "lse" => Ok(Mode::LogSumExp { temperature }),
        other => Err(CliError::Config(format!("unknown mode `{other}` (hard, softmax, lse)"))),
    }
}

fn kind_name(k: ScheduleKind) -> &'static str {
    match k {
        ScheduleKind::Constant => "constant",
        ScheduleKind::Linear => "linear",
        ScheduleKind::Sigmoid => "sigmoid",
    }
}

fn schedule(kind: &str, start: f64, end: f64, total: usize) -> CliResult<AnnealSchedule> {
    Ok(match kind {
        "constant" => AnnealSchedule::constant(start),
        "linear" => AnnealSchedule::linear(start, end, total),
        "sigmoid" => AnnealSchedule::sigmoid(start, end, total),
        other => return Err(CliError::Config(format!("unknown schedule `{other}`"))),
    })
}

fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", p.display(), e.message())))
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MineFile {
    gamma: Option<f64>,
    learning_rate: Option<f64>,
    steps: Option<usize>,
    schedule: Option<String>,
    c_start: Option<f64>,
    c_end: Option<f64>,
    tau_start: Option<f64>,
    tau_end: Option<f64>,
    mode: Option<String>,
    init_a: Option<f64>,
    init_b: Option<f64>,
    len: Option<usize>,
    count: Option<usize>,
    truth_a: Option<f64>,
    truth_b: Option<f64>,
    jitter: Option<f64>,
    noise: Option<f64>,
}

/// Fully resolved mining settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MineSettings {
    pub gamma: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub schedule: String,
    pub c_start: f64,
    pub c_end: f64,
    pub tau_start: f64,
    pub tau_end: f64,
    pub mode: String,
    pub init_a: f64,
    pub init_b: f64,
    pub len: usize,
    pub count: usize,
    pub truth_a: f64,
    pub truth_b: f64,
    pub jitter: f64,
    pub noise: f64,
}

impl MineSettings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let f: MineFile = load(path)?;
        let m = MiningConfig::default();
        let g = DatasetGen::default();
        Ok(MineSettings {
            gamma: f.gamma.unwrap_or(m.gamma),
            learning_rate: f.learning_rate.unwrap_or(m.learning_rate),
            steps: f.steps.unwrap_or(m.steps),
            schedule: f.schedule.unwrap_or_else(|| kind_name(m.c.kind).into()),
            c_start: f.c_start.unwrap_or(m.c.start),
            c_end: f.c_end.unwrap_or(m.c.end),
            tau_start: f.tau_start.unwrap_or(m.temperature.start),
            tau_end: f.tau_end.unwrap_or(m.temperature.end),
            mode: f.mode.unwrap_or_else(|| mode_name(m.mode).into()),
            init_a: f.init_a.unwrap_or(m.init.0),
            init_b: f.init_b.unwrap_or(m.init.1),
            len: f.len.unwrap_or(g.len),
            count: f.count.unwrap_or(g.count),
            truth_a: f.truth_a.unwrap_or(g.truth.0),
            truth_b: f.truth_b.unwrap_or(g.truth.1),
            jitter: f.jitter.unwrap_or(g.jitter),
            noise: f.noise.unwrap_or(g.noise),
        })
    }

    pub fn mining(&self) -> CliResult<MiningConfig> {
        let cfg = MiningConfig {
            gamma: self.gamma,
            learning_rate: self.learning_rate,
            steps: self.steps,
            c: schedule(&self.schedule, self.c_start, self.c_end, self.steps)?,
            temperature: schedule(&self.schedule, self.tau_start, self.tau_end, self.steps)?,
            mode: parse_mode(&self.mode, self.tau_start)?,
            init: (self.init_a, self.init_b),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dataset(&self) -> DatasetGen {
        DatasetGen {
            len: self.len,
            truth: (self.truth_a, self.truth_b),
            count: self.count,
            jitter: self.jitter,
            noise: self.noise,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    gammas: Option<[f64; 4]>,
    nominal: Option<f64>,
    u_max: Option<f64>,
    dt: Option<f64>,
    horizon: Option<usize>,
    x0: Option<[f64; 2]>,
    target_lo: Option<[f64; 2]>,
    target_hi: Option<[f64; 2]>,
    goal_lo: Option<[f64; 2]>,
    goal_hi: Option<[f64; 2]>,
    init_a: Option<f64>,
    init_b: Option<f64>,
    init_control_scale: Option<f64>,
    learning_rate: Option<f64>,
    steps: Option<usize>,
    schedule: Option<String>,
    tau_start: Option<f64>,
    tau_end: Option<f64>,
    c_start: Option<f64>,
    c_end: Option<f64>,
    mode: Option<String>,
}

/// Fully resolved planning settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanSettings {
    pub gammas: [f64; 4],
    pub nominal: f64,
    pub u_max: f64,
    pub dt: f64,
    pub horizon: usize,
    pub x0: [f64; 2],
    pub target_lo: [f64; 2],
    pub target_hi: [f64; 2],
    pub goal_lo: [f64; 2],
    pub goal_hi: [f64; 2],
    pub init_a: f64,
    pub init_b: f64,
    pub init_control_scale: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub schedule: String,
    pub tau_start: f64,
    pub tau_end: f64,
    pub c_start: f64,
    pub c_end: f64,
    pub mode: String,
}

impl PlanSettings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let f: PlanFile = load(path)?;
        let d = PlannerConfig::default();
        Ok(PlanSettings {
            gammas: f.gammas.unwrap_or(d.gammas),
            nominal: f.nominal.unwrap_or(d.nominal),
            u_max: f.u_max.unwrap_or(d.u_max),
            dt: f.dt.unwrap_or(d.dt),
            horizon: f.horizon.unwrap_or(d.horizon),
            x0: f.x0.unwrap_or(d.x0),
            target_lo: f.target_lo.unwrap_or(d.target.lo),
            target_hi: f.target_hi.unwrap_or(d.target.hi),
            goal_lo: f.goal_lo.unwrap_or(d.goal.lo),
            goal_hi: f.goal_hi.unwrap_or(d.goal.hi),
            init_a: f.init_a.unwrap_or(d.init_interval.0),
            init_b: f.init_b.unwrap_or(d.init_interval.1),
            init_control_scale: f.init_control_scale.unwrap_or(d.init_control_scale),
            learning_rate: f.learning_rate.unwrap_or(d.learning_rate),
            steps: f.steps.unwrap_or(d.steps),
            schedule: f.schedule.unwrap_or_else(|| kind_name(d.c.kind).into()),
            tau_start: f.tau_start.unwrap_or(d.temperature.start),
            tau_end: f.tau_end.unwrap_or(d.temperature.end),
            c_start: f.c_start.unwrap_or(d.c.start),
            c_end: f.c_end.unwrap_or(d.c.end),
            mode: f.mode.unwrap_or_else(|| mode_name(d.mode).into()),
        })
    }

    pub fn planner(&self) -> CliResult<PlannerConfig> {
        let cfg = PlannerConfig {
            gammas: self.gammas,
            nominal: self.nominal,
            u_max: self.u_max,
            dt: self.dt,
            horizon: self.horizon,
            x0: self.x0,
            target: Region::new(self.target_lo, self.target_hi)?,
            goal: Region::new(self.goal_lo, self.goal_hi)?,
            init_interval: (self.init_a, self.init_b),
            init_control_scale: self.init_control_scale,
            learning_rate: self.learning_rate,
            steps: self.steps,
            temperature: schedule(&self.schedule, self.tau_start, self.tau_end, self.steps)?,
            c: schedule(&self.schedule, self.c_start, self.c_end, self.steps)?,
            mode: parse_mode(&self.mode, self.tau_start)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
