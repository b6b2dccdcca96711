//! Planning a single-integrator trajectory that stays in a target box over a
//! tunable window `[aL, bL]` and eventually reaches a goal box.
//!
//! Objective over controls `u` and the window:
//! `γ1 relu(-ρ) + γ2 exp(2 (Ĩ - b + a)) + γ3 mean relu(|u_t| - ū) + γ4 mean |u_t|²`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::descent::{gradient_descent, logit, sorted_interval, DescentConfig};
use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::formula::{Formula, Interval};
use crate::masking::{robustness, robustness_with, Channels, SmoothBinding};
use crate::scalar::Scalar;
use crate::signal::{Mode, NamedSignals, SemanticsConfig, Signal, SmoothInterval, StepInterval};
use crate::smoothing::AnnealSchedule;

/// Axis-aligned box in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Region {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        if !(lo[0] < hi[0] && lo[1] < hi[1]) {
            return Err(Error::InvalidConfig("region needs lo < hi".into()));
        }
        Ok(Region { lo, hi })
    }

    /// Membership over channels `x` and `y`; robustness is the smallest of
    /// the four signed margins.
    pub fn inside(&self) -> Formula {
        Formula::and_all([
            Formula::gt("x", self.lo[0]),
            Formula::lt("x", self.hi[0]),
            Formula::gt("y", self.lo[1]),
            Formula::lt("y", self.hi[1]),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Weights of the robustness, interval-size, control-limit and effort terms.
    pub gammas: [f64; 4],
    /// Nominal normalized window size `Ĩ`.
    pub nominal: f64,
    pub u_max: f64,
    pub dt: f64,
    /// Number of control steps; the trajectory has one more state.
    pub horizon: usize,
    pub x0: [f64; 2],
    pub target: Region,
    pub goal: Region,
    pub init_interval: (f64, f64),
    /// Controls start uniform in `[-s, s]` per component.
    pub init_control_scale: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub temperature: AnnealSchedule,
    pub c: AnnealSchedule,
    pub mode: Mode,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            gammas: [1.1, 0.05, 2.0, 0.5],
            nominal: 0.2,
            u_max: 2.0,
            dt: 0.1,
            horizon: 51,
            x0: [0.0, 0.0],
            target: Region {
                lo: [0.8, 0.8],
                hi: [1.2, 1.2],
            },
            goal: Region {
                lo: [1.8, 1.8],
                hi: [2.2, 2.2],
            },
            init_interval: (0.14, 0.82),
            init_control_scale: 1.0,
            learning_rate: 0.05,
            steps: 2000,
            temperature: AnnealSchedule::sigmoid(5.0, 200.0, 2000),
            c: AnnealSchedule::sigmoid(5.0, 50.0, 2000),
            mode: Mode::LogSumExp { temperature: 5.0 },
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("gammas must be finite and >= 0");
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return bad("u_max must be > 0");
        }
        if !(0.0 < self.nominal && self.nominal < 1.0) {
            return bad("nominal interval size must lie in (0, 1)");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if self.horizon < 2 {
            return bad("horizon must be >= 2");
        }
        if !(0.0 < self.init_interval.0 && self.init_interval.0 < self.init_interval.1 && self.init_interval.1 < 1.0) {
            return bad("init_interval must satisfy 0 < a < b < 1");
        }
        if !(self.init_control_scale >= 0.0 && self.init_control_scale.is_finite()) {
            return bad("init_control_scale must be >= 0");
        }
        if self.mode == Mode::Hard {
            return bad("planning needs a smooth mode");
        }
        Region::new(self.target.lo, self.target.hi)?;
        Region::new(self.goal.lo, self.goal.hi)?;
        self.temperature.validate()?;
        self.c.validate()?;
        DescentConfig {
            learning_rate: self.learning_rate,
            steps: self.steps,
        }
        .validate()
    }

    /// `G ~[a,b,c] inside(target) & F inside(goal)`. The smooth interval
    /// values are placeholders; they are bound at evaluation time.
    pub fn formula(&self) -> Formula {
        let si = SmoothInterval::new(0.0, 1.0, 1.0, 0.0).expect("valid");
        Formula::and(
            Formula::always(Some(Interval::Smooth(si)), self.target.inside()),
            Formula::eventually(None, self.goal.inside()),
        )
    }

    /// The same specification with the discrete window `[ceil(aL), floor(bL)]`.
    pub fn hard_formula(&self, window: StepInterval) -> Formula {
        Formula::and(
            Formula::always(Some(Interval::Steps(window)), self.target.inside()),
            Formula::eventually(None, self.goal.inside()),
        )
    }
}

/// `x_{t+1} = x_t + dt u_t`, returning all `T + 1` states.
pub fn rollout_single_integrator<S: Scalar>(x0: [S; 2], controls: &[[S; 2]], dt: f64) -> Vec<[S; 2]> {
    let mut out = Vec::with_capacity(controls.len() + 1);
    out.push(x0);
    let mut x = x0;
    for u in controls {
        x = [x[0] + u[0].affine(dt, 0.0), x[1] + u[1].affine(dt, 0.0)];
        out.push(x);
    }
    out
}

/// The terms of the planning objective, already weighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanTerms<S> {
    pub total: S,
    pub robustness: S,
}

fn objective<S: Scalar>(
    controls: &[[S; 2]],
    p: S,
    q: S,
    cfg: &PlannerConfig,
    sem: &SemanticsConfig,
    c: f64,
    formula: &Formula,
) -> Result<PlanTerms<S>> {
    let x0 = [S::constant(cfg.x0[0]), S::constant(cfg.x0[1])];
    let states = rollout_single_integrator(x0, controls, cfg.dt);
    let mut map = BTreeMap::new();
    map.insert(String::from("x"), states.iter().map(|s| s[0]).collect::<Vec<S>>());
    map.insert(String::from("y"), states.iter().map(|s| s[1]).collect::<Vec<S>>());
    let channels = Channels::new(map)?;
    let (a, b) = sorted_interval(p, q);
    let bind = [SmoothBinding {
        a,
        b,
        c: S::constant(c),
        eps: 0.0,
    }];
    let rho = robustness_with(formula, &channels, sem, &bind)?;
    let [g1, g2, g3, g4] = cfg.gammas;
    let j_stl = (-rho).relu();
    let j_i = (a - b).affine(2.0, 2.0 * cfg.nominal).exp();
    let inv_t = 1.0 / controls.len() as f64;
    let mut j_lim = S::constant(0.0);
    let mut j_eff = S::constant(0.0);
    for u in controls {
        let sq = u[0] * u[0] + u[1] * u[1];
        j_lim = j_lim + sq.sqrt().affine(1.0, -cfg.u_max).relu();
        j_eff = j_eff + sq;
    }
    let total =
        j_stl.affine(g1, 0.0) + j_i.affine(g2, 0.0) + j_lim.affine(g3 * inv_t, 0.0) + j_eff.affine(g4 * inv_t, 0.0);
    Ok(PlanTerms { total, robustness: rho })
}

/// The planning objective at controls `u` and pre-sigmoid window parameters
/// `(p, q)`, with temperature and mask sharpness taken from step `step` of
/// the schedules.
pub fn planning_objective(controls: &[[f64; 2]], p: f64, q: f64, cfg: &PlannerConfig, step: usize) -> Result<f64> {
    if controls.len() != cfg.horizon {
        return Err(Error::ShapeMismatch("one control per horizon step"));
    }
    let sem = SemanticsConfig::hard().with_mode(cfg.mode.with_temperature(cfg.temperature.value(step)));
    Ok(objective(controls, p, q, cfg, &sem, cfg.c.value(step), &cfg.formula())?.total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub controls: Vec<[f64; 2]>,
    pub states: Vec<[f64; 2]>,
    pub a: f64,
    pub b: f64,
    /// Discrete window the final `(a, b)` stands for.
    pub window: StepInterval,
    /// Hard robustness of the specification with that window.
    pub hard_robustness: f64,
    pub history: Vec<f64>,
}

/// Hard robustness of the states against the specification with window
/// `[ceil(aL), floor(bL)]`, last-value padding.
pub fn final_hard_robustness(states: &[[f64; 2]], a: f64, b: f64, cfg: &PlannerConfig) -> Result<(StepInterval, f64)> {
    let window = SmoothInterval::new(a, b, 1.0, 0.0)?.to_steps(states.len())?;
    let signals = NamedSignals::new([
        ("x", Signal::new(states.iter().map(|s| s[0]).collect(), cfg.dt)?),
        ("y", Signal::new(states.iter().map(|s| s[1]).collect(), cfg.dt)?),
    ])?;
    let rho = robustness(&cfg.hard_formula(window), &signals, &SemanticsConfig::hard())?;
    Ok((window, rho))
}

/// Gradient descent over controls and the window, from random controls.
pub fn plan_trajectory(cfg: &PlannerConfig, seed: u64) -> Result<PlanResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.horizon;
    let s = cfg.init_control_scale;
    let mut x: Vec<f64> = (0..2 * n)
        .map(|_| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 })
        .collect();
    x.push(logit(cfg.init_interval.0));
    x.push(logit(cfg.init_interval.1));
    let formula = cfg.formula();
    let descent = DescentConfig {
        learning_rate: cfg.learning_rate,
        steps: cfg.steps,
    };
    let history = gradient_descent(&mut x, &descent, |step, x| {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = x.iter().map(|&v| tape.var(v)).collect();
        let controls: Vec<[Var<'_>; 2]> = (0..n).map(|t| [vars[2 * t], vars[2 * t + 1]]).collect();
        let (p, q) = (vars[2 * n], vars[2 * n + 1]);
        let (a, b) = sorted_interval(p, q);
        if !(a.value() < b.value()) {
            return Err(Error::Diverged { step });
        }
        let sem = SemanticsConfig::hard().with_mode(cfg.mode.with_temperature(cfg.temperature.value(step)));
        let terms = objective(&controls, p, q, cfg, &sem, cfg.c.value(step), &formula)?;
        let adj = tape.gradient(terms.total);
        Ok((terms.total.value(), vars.iter().map(|v| adj.wrt(v)).collect()))
    })?;
    let controls: Vec<[f64; 2]> = (0..n).map(|t| [x[2 * t], x[2 * t + 1]]).collect();
    let states = rollout_single_integrator(cfg.x0, &controls, cfg.dt);
    let (a, b) = sorted_interval(x[2 * n], x[2 * n + 1]);
    let (window, hard_robustness) = final_hard_robustness(&states, a, b, cfg)?;
    Ok(PlanResult {
        controls,
        states,
        a,
        b,
        window,
        hard_robustness,
        history,
    })
}
