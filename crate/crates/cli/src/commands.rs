//! One function per subcommand; each returns the JSON document to print.

use std::path::PathBuf;

use maskstl::apps::{generate_dataset, grid_eval, linspace, mine_interval, mining_objective, plan_trajectory};
use maskstl::formula::parse;
use maskstl::recurrent::trace_recurrent;
use maskstl::reference::trace_ref;
use maskstl::{robustness_trace, Mode, NamedSignals, PaddingPolicy, RobustnessTrace, SemanticsConfig, Signal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{self, BenchConfig};
use crate::config::{parse_mode, MineSettings, PlanSettings};
use crate::csvio;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Masking,
    Recurrent,
    Reference,
}

/// Evaluation settings shared by `eval` and `trace`.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub mode: String,
    pub temperature: f64,
    pub padding: PaddingPolicy,
    pub engine: EngineArg,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            mode: "hard".into(),
            temperature: 1.0,
            padding: PaddingPolicy::LastValue,
            engine: EngineArg::Masking,
        }
    }
}

impl EvalOptions {
    fn semantics(&self) -> CliResult<SemanticsConfig> {
        let cfg = SemanticsConfig::hard()
            .with_mode(parse_mode(&self.mode, self.temperature)?)
            .with_padding(self.padding);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `last` or `const:<v>`.
pub fn parse_padding(text: &str) -> Result<PaddingPolicy, String> {
    if text == "last" {
        return Ok(PaddingPolicy::LastValue);
    }
    text.strip_prefix("const:")
        .and_then(|v| v.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .map(PaddingPolicy::Constant)
        .ok_or_else(|| format!("padding must be `last` or `const:<number>`, got `{text}`"))
}

fn compute_trace(formula: &str, signals: &NamedSignals, opts: &EvalOptions) -> CliResult<RobustnessTrace> {
    let f = parse(formula).map_err(maskstl::Error::from)?;
    let cfg = opts.semantics()?;
    Ok(match opts.engine {
        EngineArg::Masking => robustness_trace(&f, signals, &cfg)?,
        EngineArg::Recurrent => trace_recurrent(&f, signals, &cfg)?,
        EngineArg::Reference => trace_ref(&f, signals, &cfg)?,
    })
}

fn mode_json(mode: Mode) -> Value {
    match mode {
        Mode::Hard => json!("hard"),
        Mode::SoftMax { temperature } => json!({"softmax": temperature}),
        Mode::LogSumExp { temperature } => json!({"lse": temperature}),
    }
}

pub fn eval(formula: &str, signals: &NamedSignals, opts: &EvalOptions) -> CliResult<Value> {
    let tr = compute_trace(formula, signals, opts)?;
    Ok(json!({
        "value": tr.first(),
        "engine": opts.engine,
        "mode": mode_json(opts.semantics()?.mode),
        "L": signals.len(),
    }))
}

pub fn trace(formula: &str, signals: &NamedSignals, opts: &EvalOptions) -> CliResult<Value> {
    Ok(json!(compute_trace(formula, signals, opts)?.values()))
}

pub fn bench(cfg: &BenchConfig) -> CliResult<Value> {
    Ok(serde_json::to_value(bench::run(cfg)?)?)
}

pub struct MineArgs {
    pub config: Option<PathBuf>,
    /// CSV with one column per signal; otherwise a dataset is generated.
    pub data: Option<PathBuf>,
    pub seed: u64,
    pub mode: Option<String>,
    /// Grid resolution for the loss landscape dump.
    pub contour: Option<usize>,
    pub contour_out: Option<PathBuf>,
}

pub fn mine(args: &MineArgs) -> CliResult<Value> {
    let mut settings = MineSettings::load(args.config.as_deref())?;
    if let Some(m) = &args.mode {
        settings.mode = m.clone();
    }
    let cfg = settings.mining()?;
    let dataset: Vec<Signal> = match &args.data {
        Some(path) => {
            let cols = csvio::read_columns(std::fs::File::open(path).map_err(|e| CliError::io(path, e))?)?;
            cols.into_iter()
                .filter(|(n, _)| n != "t")
                .map(|(_, v)| Signal::new(v, 1.0))
                .collect::<Result<_, _>>()?
        }
        None => generate_dataset(&settings.dataset(), args.seed)?,
    };
    let result = mine_interval(&dataset, &cfg)?;
    let mut contour_rows = None;
    if let Some(n) = args.contour {
        if n < 2 {
            return Err(CliError::Usage("--contour needs at least 2 points".into()));
        }
        let path = args
            .contour_out
            .as_ref()
            .ok_or_else(|| CliError::Usage("--contour needs --contour-out".into()))?;
        let grid = linspace(0.0, 1.0, n);
        let sem = SemanticsConfig::hard().with_mode(cfg.mode.with_temperature(settings.tau_end));
        let mut err = None;
        let cells = grid_eval(&grid, &grid, |a, b| {
            mining_objective(a, b, settings.c_end, &dataset, cfg.gamma, &sem).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        let (mut ca, mut cb, mut cl) = (Vec::new(), Vec::new(), Vec::new());
        for (i, row) in cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(v) = cell {
                    ca.push(grid[i]);
                    cb.push(grid[j]);
                    cl.push(*v);
                }
            }
        }
        csvio::write_columns(csvio::create(path)?, &["a", "b", "loss"], &[&ca, &cb, &cl])?;
        contour_rows = Some(cl.len());
    }
    Ok(json!({
        "config": settings,
        "seed": args.seed,
        "history": result.loss_history,
        "final": {"a": result.a, "b": result.b},
        "contour_rows": contour_rows,
    }))
}

pub struct PlanArgs {
    pub config: Option<PathBuf>,
    pub seed: u64,
    pub mode: Option<String>,
    /// Where to write the state sequence as CSV (`t,x,y`).
    pub states_out: Option<PathBuf>,
}

pub fn plan(args: &PlanArgs) -> CliResult<Value> {
    let mut settings = PlanSettings::load(args.config.as_deref())?;
    if let Some(m) = &args.mode {
        settings.mode = m.clone();
    }
    let cfg = settings.planner()?;
    let r = plan_trajectory(&cfg, args.seed)?;
    if let Some(path) = &args.states_out {
        let t: Vec<f64> = (0..r.states.len()).map(|i| i as f64 * cfg.dt).collect();
        let x: Vec<f64> = r.states.iter().map(|s| s[0]).collect();
        let y: Vec<f64> = r.states.iter().map(|s| s[1]).collect();
        csvio::write_columns(csvio::create(path)?, &["t", "x", "y"], &[&t, &x, &y])?;
    }
    Ok(json!({
        "config": settings,
        "seed": args.seed,
        "history": r.history,
        "final": {
            "a": r.a,
            "b": r.b,
            "window": [r.window.a(), r.window.b()],
            "hard_robustness": r.hard_robustness,
            "controls": r.controls,
            "states": r.states,
        },
    }))
}
