//! Reverse-mode gradients of robustness with respect to signal samples and
//! smooth interval parameters.
//!
//! The masking engine is generic over [`Scalar`](crate::Scalar), so running
//! it with [`Var`] records the exact forward computation on a [`Tape`].

mod tape;

pub use tape::{Adjoints, Tape, Var};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::formula::{validate_against, Formula};
use crate::masking::{robustness_with, Channels, SmoothBinding};
use crate::recurrent::trace_recurrent_with;
use crate::scalar::Scalar;
use crate::signal::{NamedSignals, SemanticsConfig, SmoothInterval};

/// Derivatives of one smooth interval's parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntervalGrad {
    pub d_a: f64,
    pub d_b: f64,
    pub d_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// The robustness itself.
    pub value: f64,
    pub d_signal: BTreeMap<String, Vec<f64>>,
    /// One entry per smooth interval, in pre-order.
    pub d_intervals: Vec<IntervalGrad>,
    /// A hard tie or clamp kink was met; the gradient is one subgradient.
    pub at_kink: bool,
}

/// Robustness of `f` and its gradient.
///
/// `smooth` overrides the smooth interval parameters of `f` (pre-order); by
/// default the formula's own are used.
pub fn value_and_grad(
    f: &Formula,
    signals: &NamedSignals,
    cfg: &SemanticsConfig,
    smooth: Option<&[SmoothInterval]>,
) -> Result<Gradients> {
    validate_against(f, signals).map_err(Error::MissingVariables)?;
    let own = f.smooth_intervals();
    let smooth = smooth.unwrap_or(&own);
    if smooth.len() != own.len() {
        return Err(Error::ShapeMismatch("one binding per smooth interval"));
    }
    let tape = Tape::new();
    let channels = var_channels(&tape, signals)?;
    let bindings: Vec<SmoothBinding<Var<'_>>> = smooth
        .iter()
        .map(|si| SmoothBinding {
            a: tape.var(si.a),
            b: tape.var(si.b),
            c: tape.var(si.c),
            eps: si.eps,
        })
        .collect();
    let out = robustness_with(f, &channels, cfg, &bindings)?;
    let adj = tape.gradient(out);
    Ok(Gradients {
        value: out.value(),
        d_signal: signal_grads(&adj, &channels),
        d_intervals: bindings
            .iter()
            .map(|b| IntervalGrad {
                d_a: adj.wrt(&b.a),
                d_b: adj.wrt(&b.b),
                d_c: adj.wrt(&b.c),
            })
            .collect(),
        at_kink: tape.hit_kink(),
    })
}

/// Same as [`value_and_grad`] but differentiating the recurrent engine.
/// Smooth intervals are not supported there.
pub fn value_and_grad_recurrent(f: &Formula, signals: &NamedSignals, cfg: &SemanticsConfig) -> Result<Gradients> {
    validate_against(f, signals).map_err(Error::MissingVariables)?;
    let tape = Tape::new();
    let channels = var_channels(&tape, signals)?;
    let out = trace_recurrent_with(f, &channels, cfg)?[0];
    let adj = tape.gradient(out);
    Ok(Gradients {
        value: out.value(),
        d_signal: signal_grads(&adj, &channels),
        d_intervals: Vec::new(),
        at_kink: tape.hit_kink(),
    })
}

fn var_channels<'t>(tape: &'t Tape, signals: &NamedSignals) -> Result<Channels<Var<'t>>> {
    let mut map = BTreeMap::new();
    for (name, sig) in signals.iter() {
        map.insert(
            String::from(name),
            sig.values().iter().map(|&v| tape.var(v)).collect::<Vec<_>>(),
        );
    }
    Channels::new(map)
}

fn signal_grads(adj: &Adjoints, channels: &Channels<Var<'_>>) -> BTreeMap<String, Vec<f64>> {
    channels
        .iter()
        .map(|(k, v)| (String::from(k), v.iter().map(|x| adj.wrt(x)).collect()))
        .collect()
}

/// Compares `analytic` with central differences of `func` at `point`.
///
/// Returns the largest `|analytic - numeric| / max(1, |numeric|)`.
pub fn finite_diff_check(func: impl Fn(&[f64]) -> f64, analytic: &[f64], point: &[f64], h: f64) -> f64 {
    let mut x = point.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..point.len() {
        x[i] = point[i] + h;
        let up = func(&x);
        x[i] = point[i] - h;
        let down = func(&x);
        x[i] = point[i];
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((analytic[i] - numeric).abs() / numeric.abs().max(1.0));
    }
    worst
}

/// Outcome of checking a formula's gradient against finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradCheck {
    /// Max relative error over all coordinates.
    Checked(f64),
    /// Evaluated at a kink, so no derivative exists to compare against.
    SkippedAtKink,
}

/// Finite-difference check over every signal sample and every smooth
/// interval's `a`, `b` and `c`.
pub fn check_formula_gradient(f: &Formula, signals: &NamedSignals, cfg: &SemanticsConfig, h: f64) -> Result<GradCheck> {
    let grads = value_and_grad(f, signals, cfg, None)?;
    if grads.at_kink {
        return Ok(GradCheck::SkippedAtKink);
    }
    let names: Vec<String> = signals.names().map(String::from).collect();
    let len = signals.len();
    let smooth = f.smooth_intervals();
    let mut point = Vec::new();
    let mut analytic = Vec::new();
    for n in &names {
        point.extend_from_slice(signals.get(n).expect("own channel").values());
        analytic.extend_from_slice(&grads.d_signal[n]);
    }
    for (si, g) in smooth.iter().zip(&grads.d_intervals) {
        point.extend_from_slice(&[si.a, si.b, si.c]);
        analytic.extend_from_slice(&[g.d_a, g.d_b, g.d_c]);
    }
    let func = |x: &[f64]| -> f64 {
        let mut map = BTreeMap::new();
        for (k, n) in names.iter().enumerate() {
            map.insert(n.clone(), x[k * len..(k + 1) * len].to_vec());
        }
        let channels = Channels::new(map).expect("same shape");
        let base = names.len() * len;
        let bindings: Vec<SmoothBinding<f64>> = smooth
            .iter()
            .enumerate()
            .map(|(j, si)| SmoothBinding {
                a: x[base + 3 * j],
                b: x[base + 3 * j + 1],
                c: x[base + 3 * j + 2],
                eps: si.eps,
            })
            .collect();
        robustness_with(f, &channels, cfg, &bindings).unwrap_or(f64::NAN)
    };
    Ok(GradCheck::Checked(finite_diff_check(func, &analytic, &point, h)))
}
