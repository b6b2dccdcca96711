//! Random formulas and signals for property tests and benchmarks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::formula::{Comparison, Formula, Interval};
use crate::signal::{NamedSignals, Signal, SmoothInterval, StepInterval};

/// Shape of generated formulas.
#[derive(Debug, Clone)]
pub struct FormulaGen {
    pub max_depth: usize,
    /// Signal length; discrete upper bounds are drawn from `0..=len + 2`.
    pub len: usize,
    pub vars: Vec<String>,
    pub until: bool,
    /// Only intervals with `a = 0` (or none).
    pub a_zero: bool,
    /// Eventually/Always may carry smooth intervals, with `c` drawn from
    /// `c_range`.
    pub smooth: bool,
    pub c_range: (f64, f64),
}

impl FormulaGen {
    pub fn new(max_depth: usize, len: usize, vars: &[&str]) -> Self {
        FormulaGen {
            max_depth,
            len,
            vars: vars.iter().map(|v| String::from(*v)).collect(),
            until: true,
            a_zero: false,
            smooth: false,
            c_range: (1.0, 5.0),
        }
    }

    fn steps<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Interval> {
        if rng.random_bool(0.3) {
            return None;
        }
        let b = rng.random_range(0..=self.len + 2);
        let a = if self.a_zero { 0 } else { rng.random_range(0..=b) };
        Some(Interval::Steps(StepInterval::new(a, b).expect("a <= b")))
    }

    fn window<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Interval> {
        if self.smooth && rng.random_bool(0.5) {
            let a = rng.random_range(0.0..0.6);
            let b = rng.random_range(a + 0.2..=1.0f64).min(1.0);
            let c = rng.random_range(self.c_range.0..=self.c_range.1);
            return Some(Interval::Smooth(SmoothInterval::new(a, b, c, 0.0).expect("valid")));
        }
        self.steps(rng)
    }

    fn leaf<R: Rng + ?Sized>(&self, rng: &mut R) -> Formula {
        if rng.random_bool(0.05) {
            return Formula::True;
        }
        let var = &self.vars[rng.random_range(0..self.vars.len())];
        let cmp = [Comparison::Gt, Comparison::Lt, Comparison::Ge, Comparison::Le][rng.random_range(0..4)];
        // thresholds on a 1/8 grid keep the formula text exact
        let c = rng.random_range(-8i32..=8) as f64 / 8.0;
        Formula::pred(var, cmp, c)
    }

    pub fn formula<R: Rng + ?Sized>(&self, rng: &mut R) -> Formula {
        self.at_depth(rng, self.max_depth)
    }

    fn at_depth<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize) -> Formula {
        if depth == 0 || rng.random_bool(0.15) {
            return self.leaf(rng);
        }
        let kinds = if self.until { 6 } else { 5 };
        match rng.random_range(0..kinds) {
            0 => Formula::not(self.at_depth(rng, depth - 1)),
            1 => Formula::and(self.at_depth(rng, depth - 1), self.at_depth(rng, depth - 1)),
            2 => Formula::or(self.at_depth(rng, depth - 1), self.at_depth(rng, depth - 1)),
            3 => Formula::eventually(self.window(rng), self.at_depth(rng, depth - 1)),
            4 => Formula::always(self.window(rng), self.at_depth(rng, depth - 1)),
            _ => Formula::until(
                self.steps(rng),
                self.at_depth(rng, depth - 1),
                self.at_depth(rng, depth - 1),
            ),
        }
    }
}

/// Channels named `vars` with samples uniform in `lo..hi`.
pub fn random_signals<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], len: usize, lo: f64, hi: f64) -> NamedSignals {
    NamedSignals::new(vars.iter().map(|v| {
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(lo..hi)).collect();
        (String::from(*v), Signal::new(values, 0.1).expect("finite"))
    }))
    .expect("consistent channels")
}

/// Short description of a case for failure messages.
pub fn describe(f: &Formula, signals: &NamedSignals) -> String {
    let mut out = format!("{f} over L={}:", signals.len());
    for (name, s) in signals.iter() {
        out.push_str(&format!(" {name}={:?}", s.values()));
    }
    out
}
