//! Smooth min/max reductions, the sigmoid time mask and annealing schedules.
//!
//! All exponential reductions subtract the running maximum before
//! exponentiating, so temperatures in the thousands stay finite.

use crate::error::{Error, Result};
use crate::signal::{Mode, SmoothInterval};
use alloc::vec::Vec;

/// Which extremum a reduction approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    fn sign(self) -> f64 {
        match self {
            Extremum::Max => 1.0,
            Extremum::Min => -1.0,
        }
    }

    pub fn dual(self) -> Extremum {
        match self {
            Extremum::Max => Extremum::Min,
            Extremum::Min => Extremum::Max,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

#[inline]
fn weight(weights: Option<&[f64]>, i: usize) -> f64 {
    weights.map_or(1.0, |w| w[i])
}

/// Index of the first kept entry attaining the (signed) maximum, or `None`
/// when no entry has positive weight.
#[inline]
fn arg_extremum(values: &[f64], weights: Option<&[f64]>, sign: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in values.iter().enumerate() {
        if weight(weights, i) <= 0.0 {
            continue;
        }
        let y = sign * x;
        match best {
            Some((_, m)) if y <= m => {}
            _ => best = Some((i, y)),
        }
    }
    best.map(|(i, _)| i)
}

/// Signed hard extremum of an unweighted slice; the hot path of hard mode.
#[inline]
fn hard_unweighted(values: &[f64], which: Extremum) -> f64 {
    let mut chunks = values.chunks_exact(4);
    let mut acc = [values[0]; 4];
    match which {
        Extremum::Max => {
            for c in &mut chunks {
                for k in 0..4 {
                    if c[k] > acc[k] {
                        acc[k] = c[k];
                    }
                }
            }
            let mut m = acc[0];
            for &x in acc[1..].iter().chain(chunks.remainder()) {
                if x > m {
                    m = x;
                }
            }
            m
        }
        Extremum::Min => {
            for c in &mut chunks {
                for k in 0..4 {
                    if c[k] < acc[k] {
                        acc[k] = c[k];
                    }
                }
            }
            let mut m = acc[0];
            for &x in acc[1..].iter().chain(chunks.remainder()) {
                if x < m {
                    m = x;
                }
            }
            m
        }
    }
}

/// Reduces `values` (optionally weighted) to a single max or min.
///
/// Entries with weight `<= 0` are excluded. Hard mode takes the exact
/// extremum over kept entries; `LogSumExp` computes
/// `(1/τ) ln Σ w_i exp(τ x_i)`; `SoftMax` the `exp(τ x)`-weighted average.
/// Min is evaluated as `-max(-x)`.
pub fn reduce(values: &[f64], weights: Option<&[f64]>, which: Extremum, mode: Mode) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if let Some(w) = weights {
        if w.len() != values.len() {
            return Err(Error::ShapeMismatch("weights and values differ in length"));
        }
    }
    if weights.is_none() && mode == Mode::Hard {
        return Ok(hard_unweighted(values, which));
    }
    let s = which.sign();
    let best = arg_extremum(values, weights, s).ok_or(Error::EmptyWindow)?;
    match mode {
        Mode::Hard => Ok(values[best]),
        Mode::LogSumExp { temperature } => {
            let m = s * values[best];
            let mut z = 0.0;
            for (i, &x) in values.iter().enumerate() {
                let w = weight(weights, i);
                if w > 0.0 {
                    z += w * libm::exp(temperature * (s * x - m));
                }
            }
            Ok(s * (m + libm::log(z) / temperature))
        }
        Mode::SoftMax { temperature } => {
            let m = s * values[best];
            let (mut z, mut num) = (0.0, 0.0);
            for (i, &x) in values.iter().enumerate() {
                let w = weight(weights, i);
                if w > 0.0 {
                    let e = w * libm::exp(temperature * (s * x - m));
                    z += e;
                    num += e * s * x;
                }
            }
            Ok(s * (num / z))
        }
    }
}

/// Value of [`reduce`] together with its partial derivatives.
///
/// `d_values[i]` receives `∂out/∂x_i`. When `d_weights` is given it receives
/// `∂out/∂w_i`; entries with zero weight get zero. Returns whether hard mode
/// met a tie at the extremum, where only a subgradient exists (the first tied
/// entry receives it).
pub fn reduce_with_grad(
    values: &[f64],
    weights: Option<&[f64]>,
    which: Extremum,
    mode: Mode,
    d_values: &mut [f64],
    mut d_weights: Option<&mut [f64]>,
) -> Result<(f64, bool)> {
    if values.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if d_values.len() != values.len() || weights.is_some_and(|w| w.len() != values.len()) {
        return Err(Error::ShapeMismatch("gradient buffers differ in length"));
    }
    d_values.iter_mut().for_each(|d| *d = 0.0);
    if let Some(dw) = d_weights.as_deref_mut() {
        dw.iter_mut().for_each(|d| *d = 0.0);
    }
    let s = which.sign();
    let best = arg_extremum(values, weights, s).ok_or(Error::EmptyWindow)?;
    match mode {
        Mode::Hard => {
            d_values[best] = 1.0;
            let tie = values
                .iter()
                .enumerate()
                .any(|(i, &x)| i != best && weight(weights, i) > 0.0 && x == values[best]);
            Ok((values[best], tie))
        }
        Mode::LogSumExp { temperature } => {
            let m = s * values[best];
            let mut z = 0.0;
            for (i, &x) in values.iter().enumerate() {
                let w = weight(weights, i);
                if w > 0.0 {
                    let e = libm::exp(temperature * (s * x - m));
                    d_values[i] = w * e;
                    z += w * e;
                }
            }
            for (i, d) in d_values.iter_mut().enumerate() {
                if let Some(dw) = d_weights.as_deref_mut() {
                    if weight(weights, i) > 0.0 {
                        // d/dw of s (m + ln z / τ) is s e_i / (τ z)
                        dw[i] = s * (*d / weight(weights, i)) / (temperature * z);
                    }
                }
                *d /= z;
            }
            Ok((s * (m + libm::log(z) / temperature), false))
        }
        Mode::SoftMax { temperature } => {
            let m = s * values[best];
            let (mut z, mut num) = (0.0, 0.0);
            for (i, &x) in values.iter().enumerate() {
                let w = weight(weights, i);
                if w > 0.0 {
                    let e = libm::exp(temperature * (s * x - m));
                    d_values[i] = e;
                    z += w * e;
                    num += w * e * s * x;
                }
            }
            let v = num / z;
            for (i, &x) in values.iter().enumerate() {
                let w = weight(weights, i);
                if w > 0.0 {
                    let e = d_values[i];
                    let y = s * x;
                    d_values[i] = w * e / z * (1.0 + temperature * (y - v));
                    if let Some(dw) = d_weights.as_deref_mut() {
                        dw[i] = s * e * (y - v) / z;
                    }
                }
            }
            Ok((s * v, false))
        }
    }
}

pub fn smooth_max(values: &[f64], weights: Option<&[f64]>, mode: Mode) -> Result<f64> {
    reduce(values, weights, Extremum::Max, mode)
}

pub fn smooth_min(values: &[f64], weights: Option<&[f64]>, mode: Mode) -> Result<f64> {
    reduce(values, weights, Extremum::Min, mode)
}

/// Sigmoid window weight of time index `i` for a signal of `len` samples:
/// `max(σ(c(i - aL)) - σ(c(i - bL)) - ε, 0)`.
pub fn smooth_time_mask(i: f64, si: &SmoothInterval, len: usize) -> f64 {
    let l = len as f64;
    let (lo, hi) = (si.a * l, si.b * l);
    let gap = 1.0 - libm::exp(-(si.c * (hi - lo)));
    let w = sigmoid(si.c * (i - lo)) * sigmoid(si.c * (hi - i)) * gap - si.eps;
    w.max(0.0)
}

/// Mask weights for time offsets `0..len`.
pub fn smooth_mask_weights(si: &SmoothInterval, len: usize) -> Result<Vec<f64>> {
    let w: Vec<f64> = (0..len).map(|i| smooth_time_mask(i as f64, si, len)).collect();
    if w.iter().all(|&x| x <= 0.0) {
        return Err(Error::EmptyWindow);
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    Linear,
    Sigmoid,
}

/// Interpolates from `start` to `end` over `total` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub kind: ScheduleKind,
    pub start: f64,
    pub end: f64,
    pub total: usize,
}

impl AnnealSchedule {
    pub fn constant(value: f64) -> Self {
        AnnealSchedule {
            kind: ScheduleKind::Constant,
            start: value,
            end: value,
            total: 1,
        }
    }

    pub fn linear(start: f64, end: f64, total: usize) -> Self {
        AnnealSchedule {
            kind: ScheduleKind::Linear,
            start,
            end,
            total,
        }
    }

    pub fn sigmoid(start: f64, end: f64, total: usize) -> Self {
        AnnealSchedule {
            kind: ScheduleKind::Sigmoid,
            start,
            end,
            total,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok =
            self.total >= 1 && self.start.is_finite() && self.end.is_finite() && self.start > 0.0 && self.end > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::string::String::from(
                "anneal schedule needs positive finite endpoints and total >= 1",
            )))
        }
    }

    pub fn value(&self, step: usize) -> f64 {
        anneal(self, step)
    }
}

/// Scheduled value at `step` (clamped to `total`).
///
/// The sigmoid kind is rescaled so that step 0 and step `total` hit the
/// endpoints exactly; its raw shape is `σ(12 (step/total - 0.5))`.
pub fn anneal(sch: &AnnealSchedule, step: usize) -> f64 {
    let p = step.min(sch.total) as f64 / sch.total as f64;
    let frac = match sch.kind {
        ScheduleKind::Constant => return sch.start,
        ScheduleKind::Linear => p,
        ScheduleKind::Sigmoid => {
            let lo = sigmoid(-6.0);
            let hi = sigmoid(6.0);
            (sigmoid(12.0 * (p - 0.5)) - lo) / (hi - lo)
        }
    };
    sch.start + (sch.end - sch.start) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const LSE1: Mode = Mode::LogSumExp { temperature: 1.0 };

    #[test]
    fn basic_values() {
        assert!((smooth_max(&[0.0, 0.0], None, LSE1).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(smooth_max(&[3.0, 1.0, 2.0], None, Mode::Hard).unwrap(), 3.0);
        assert_eq!(smooth_min(&[3.0, 1.0, 2.0], None, Mode::Hard).unwrap(), 1.0);
        assert!((smooth_min(&[0.0, 0.0], None, LSE1).unwrap() + core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn softmax_approaches_max() {
        let tau = 20.0;
        let out = smooth_max(&[3.0, 1.0, 2.0], None, Mode::SoftMax { temperature: tau }).unwrap();
        assert!((out - 3.0).abs() <= 2.0 * libm::exp(-tau) * 3.0);
        assert!(out < 3.0);
    }

    #[test]
    fn single_effective_entry() {
        let w = [0.0, 1.0, 0.0];
        for mode in [Mode::Hard, LSE1, Mode::SoftMax { temperature: 3.0 }] {
            assert_eq!(smooth_min(&[9.0, 4.0, 7.0], Some(&w), mode).unwrap(), 4.0);
        }
        assert_eq!(
            smooth_max(&[1.0, 2.0], Some(&[0.0, 0.0]), LSE1),
            Err(Error::EmptyWindow)
        );
        assert_eq!(smooth_max(&[], None, Mode::Hard), Err(Error::EmptyWindow));
    }

    #[test]
    fn extreme_temperature_is_finite() {
        let v = [1000.0, -1000.0, 999.0];
        for mode in [Mode::LogSumExp { temperature: 1e3 }, Mode::SoftMax { temperature: 1e3 }] {
            assert!(smooth_max(&v, None, mode).unwrap().is_finite());
            assert!(smooth_min(&v, None, mode).unwrap().is_finite());
        }
    }

    #[test]
    fn softmax_nesting_differs_from_flat() {
        // witness: nested [soft([0,0,0,0]), 1] vs flat [0,0,0,0,1] at τ = 1
        let m = Mode::SoftMax { temperature: 1.0 };
        let xs = [0.0, 0.0, 0.0, 0.0];
        let inner = smooth_max(&xs, None, m).unwrap();
        let nested = smooth_max(&[inner, 1.0], None, m).unwrap();
        let flat = smooth_max(&[0.0, 0.0, 0.0, 0.0, 1.0], None, m).unwrap();
        assert!((nested - flat).abs() > 1e-3);
    }

    #[test]
    fn mask_shape() {
        let si = SmoothInterval::new(0.25, 0.75, 1e4, 0.1).unwrap();
        // centre of the window with a very sharp mask
        assert!((smooth_time_mask(10.0, &si, 20) - 0.9).abs() < 1e-12);
        let si = SmoothInterval::new(0.25, 0.95, 50.0, 0.0).unwrap();
        assert!((smooth_time_mask(5.0, &si, 20) - 0.5).abs() < 1e-9);
        let si = SmoothInterval::new(0.5, 0.9, 5.0, 0.0).unwrap();
        assert!(smooth_time_mask(0.0, &si, 20) < 1e-20);
        let si = SmoothInterval::new(0.5, 0.9, 5.0, 0.01).unwrap();
        assert_eq!(smooth_time_mask(0.0, &si, 20), 0.0);
    }

    #[test]
    fn mask_weights_limits() {
        let si = SmoothInterval::new(0.0, 1.0, 200.0, 0.0).unwrap();
        let w = smooth_mask_weights(&si, 10).unwrap();
        // i = 0 sits on the lower edge
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!(w[1..].iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let si = SmoothInterval::new(0.23, 0.59, 50.0, 0.0).unwrap();
        let w = smooth_mask_weights(&si, 20).unwrap();
        for (i, &x) in w.iter().enumerate() {
            if (5..=11).contains(&i) {
                assert!(x > 0.99, "{i}: {x}");
            } else {
                assert!(x < 1e-4, "{i}: {x}");
            }
        }
        let si = SmoothInterval::new(0.4, 0.41, 1.0, 0.4).unwrap();
        assert_eq!(smooth_mask_weights(&si, 20), Err(Error::EmptyWindow));
    }

    #[test]
    fn schedules() {
        let c = AnnealSchedule::constant(5.0);
        assert_eq!(anneal(&c, 0), 5.0);
        assert_eq!(anneal(&c, 1000), 5.0);
        let s = AnnealSchedule::sigmoid(1.0, 100.0, 5000);
        assert_eq!(anneal(&s, 0), 1.0);
        assert!((anneal(&s, 5000) - 100.0).abs() <= 0.3);
        assert!((anneal(&s, 2500) - 50.5).abs() < 1e-9);
        let l = AnnealSchedule::linear(0.0, 10.0, 10);
        assert_eq!(anneal(&l, 5), 5.0);
        let mut prev = anneal(&s, 0);
        for k in 1..=5000 {
            let v = anneal(&s, k);
            assert!(v >= prev);
            prev = v;
        }
    }

    fn finite_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
        let h = 1e-6;
        let mut p = x.to_vec();
        p[i] += h;
        let hi = f(&p);
        p[i] -= 2.0 * h;
        let lo = f(&p);
        (hi - lo) / (2.0 * h)
    }

    #[test]
    fn gradients_match_differences() {
        let xs = vec![0.3, -1.2, 0.8, 0.1];
        let ws = vec![0.9, 0.4, 0.7, 0.2];
        for mode in [Mode::LogSumExp { temperature: 2.5 }, Mode::SoftMax { temperature: 1.7 }] {
            for which in [Extremum::Max, Extremum::Min] {
                let mut dv = vec![0.0; 4];
                let mut dw = vec![0.0; 4];
                reduce_with_grad(&xs, Some(&ws), which, mode, &mut dv, Some(&mut dw)).unwrap();
                for i in 0..4 {
                    let nv = finite_diff(|p| reduce(p, Some(&ws), which, mode).unwrap(), &xs, i);
                    let nw = finite_diff(|p| reduce(&xs, Some(p), which, mode).unwrap(), &ws, i);
                    assert!((nv - dv[i]).abs() < 1e-7, "{mode:?} {which:?} dx{i}");
                    assert!((nw - dw[i]).abs() < 1e-7, "{mode:?} {which:?} dw{i}");
                }
            }
        }
    }

    #[test]
    fn hard_subgradient_is_first_occurrence() {
        let mut dv = [0.0; 4];
        let (v, tie) = reduce_with_grad(&[1.0, 3.0, 3.0, 2.0], None, Extremum::Max, Mode::Hard, &mut dv, None).unwrap();
        assert_eq!(v, 3.0);
        assert!(tie);
        assert_eq!(dv, [0.0, 1.0, 0.0, 0.0]);
        let (v, tie) = reduce_with_grad(&[1.0, 3.0, 0.5, 2.0], None, Extremum::Min, Mode::Hard, &mut dv, None).unwrap();
        assert_eq!(v, 0.5);
        assert!(!tie);
        assert_eq!(dv.iter().sum::<f64>(), 1.0);
    }

    proptest! {
        #[test]
        fn lse_nesting_matches_flat(xs in proptest::collection::vec(-50.0f64..50.0, 1..20),
                                    y in -50.0f64..50.0,
                                    tau in 0.1f64..100.0) {
            let m = Mode::LogSumExp { temperature: tau };
            let inner = smooth_max(&xs, None, m).unwrap();
            let nested = smooth_max(&[inner, y], None, m).unwrap();
            let mut all = xs.clone();
            all.push(y);
            let flat = smooth_max(&all, None, m).unwrap();
            prop_assert!((nested - flat).abs() <= 1e-12 * (1.0 + flat.abs()));
        }

        #[test]
        fn lse_bounds(xs in proptest::collection::vec(-10.0f64..10.0, 1..40),
                      tau in prop_oneof![Just(1.0), Just(10.0), Just(100.0)]) {
            let hard = smooth_max(&xs, None, Mode::Hard).unwrap();
            let lse = smooth_max(&xs, None, Mode::LogSumExp { temperature: tau }).unwrap();
            let bound = libm::log(xs.len() as f64) / tau;
            prop_assert!(hard <= lse + 1e-12);
            prop_assert!(lse <= hard + bound + 1e-12);
        }

        #[test]
        fn softmax_within_range(xs in proptest::collection::vec(-10.0f64..10.0, 1..40),
                                tau in 0.01f64..1000.0) {
            let lo = smooth_min(&xs, None, Mode::Hard).unwrap();
            let hi = smooth_max(&xs, None, Mode::Hard).unwrap();
            for v in [smooth_max(&xs, None, Mode::SoftMax { temperature: tau }).unwrap(),
                      smooth_min(&xs, None, Mode::SoftMax { temperature: tau }).unwrap()] {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }

        #[test]
        fn min_max_duality(xs in proptest::collection::vec(-10.0f64..10.0, 1..20), tau in 0.1f64..50.0) {
            for mode in [Mode::Hard, Mode::LogSumExp { temperature: tau }, Mode::SoftMax { temperature: tau }] {
                let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
                prop_assert_eq!(smooth_min(&xs, None, mode).unwrap(), -smooth_max(&neg, None, mode).unwrap());
            }
        }

        #[test]
        fn mask_weights_in_unit_range(a in 0.0f64..0.9, w in 0.01f64..0.1, c in 0.1f64..1e3, eps in 0.0f64..0.49) {
            let si = SmoothInterval { a, b: a + w, c, eps };
            for i in 0..40 {
                let m = smooth_time_mask(i as f64, &si, 40);
                prop_assert!((0.0..=1.0).contains(&m));
            }
        }
    }
}
