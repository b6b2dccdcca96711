//! Backward-in-time recurrent evaluation, the baseline the masking engine is
//! compared against.
//!
//! Each temporal node keeps a hidden state while `t` runs from the end of the
//! (padded) child trace down to 0. Reductions are nested: every step folds
//! the newest value into the previous result as the later operand. In hard
//! and log-sum-exp modes this equals a single flat reduction; in softmax mode
//! it does not, since earlier results get softened again at every step.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::formula::{validate_against, Formula, Interval};
use crate::masking::ChannelSource;
use crate::scalar::Scalar;
use crate::signal::{Mode, NamedSignals, PaddingPolicy, RobustnessTrace, SemanticsConfig, StepInterval};
use crate::smoothing::Extremum;

/// Sliding buffer of child values for one temporal node.
///
/// Timed operators keep the `K` values at offsets `a..=b` from the current
/// index; untimed Eventually/Always keep a single running value.
#[derive(Debug, Clone)]
pub struct HiddenState<S = f64> {
    buffer: VecDeque<S>,
    capacity: usize,
    index: usize,
}

impl<S: Copy> HiddenState<S> {
    pub fn new(capacity: usize, index: usize) -> Self {
        HiddenState {
            buffer: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            index,
        }
    }

    /// Moves one step back in time, entering `value` at the front.
    pub fn push_front(&mut self, value: S) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_back();
        }
        self.buffer.push_front(value);
        self.index = self.index.saturating_sub(1);
    }

    pub fn values(&self) -> impl DoubleEndedIterator<Item = S> + '_ {
        self.buffer.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

#[inline]
fn pair<S: Scalar>(acc: S, new: S, which: Extremum, mode: Mode) -> Result<S> {
    S::reduce(&[acc, new], None, which, mode)
}

fn padded<S: Scalar>(child: &[S], j: usize, padding: PaddingPolicy) -> S {
    match child.get(j) {
        Some(&v) => v,
        None => match padding {
            PaddingPolicy::LastValue => child[child.len() - 1],
            PaddingPolicy::Constant(v) => S::constant(v),
        },
    }
}

fn windowed<S: Scalar>(
    child: &[S],
    iv: Option<StepInterval>,
    which: Extremum,
    cfg: &SemanticsConfig,
) -> Result<Vec<S>> {
    let len = child.len();
    let mut out = Vec::with_capacity(len);
    match iv {
        None => {
            let mut state = HiddenState::new(1, len);
            for t in (0..len).rev() {
                let y = match state.values().next() {
                    None => child[t],
                    Some(prev) => pair(prev, child[t], which, cfg.mode)?,
                };
                state.push_front(y);
                out.push(y);
            }
        }
        Some(iv) => {
            let (a, b) = (iv.a(), iv.b());
            let mut state = HiddenState::new(iv.window_size(), len + b);
            // prime with offsets a..=b of the last column
            for j in (len - 1 + a..=len - 1 + b).rev() {
                state.push_front(padded(child, j, cfg.padding));
            }
            for t in (0..len).rev() {
                if t < len - 1 {
                    state.push_front(padded(child, t + a, cfg.padding));
                }
                // fold from offset b down to a
                let mut vals = state.values().rev();
                let mut acc = vals.next().expect("window is non-empty");
                for v in vals {
                    acc = pair(acc, v, which, cfg.mode)?;
                }
                out.push(acc);
            }
        }
    }
    out.reverse();
    Ok(out)
}

/// Until via a hidden vector: `h[i]` is the running minimum of the left
/// trace over offsets `0..=i`, updated as `h'[i] = min(h[i-1], left[t])`.
fn until<S: Scalar>(left: &[S], right: &[S], iv: Option<StepInterval>, cfg: &SemanticsConfig) -> Result<Vec<S>> {
    let len = left.len();
    let mode = cfg.mode;
    let (a, b, start) = match iv {
        Some(iv) => (iv.a(), iv.b(), len - 1 + iv.b()),
        None => (0, len - 1, len - 1),
    };
    let mut out = Vec::with_capacity(len);
    let mut h: Vec<S> = Vec::with_capacity(b + 1);
    let mut next: Vec<S> = Vec::with_capacity(b + 1);
    let mut psi: VecDeque<S> = VecDeque::with_capacity(b + 1);
    for t in (0..=start).rev() {
        let l = padded(left, t, cfg.padding);
        next.clear();
        next.push(l);
        // untimed windows end at the last sample
        let depth = if iv.is_some() { b } else { len - 1 - t.min(len - 1) };
        for i in 1..=depth {
            match h.get(i - 1) {
                Some(&prev) => next.push(pair(prev, l, Extremum::Min, mode)?),
                None => break,
            }
        }
        core::mem::swap(&mut h, &mut next);
        if psi.len() == b + 1 {
            psi.pop_back();
        }
        psi.push_front(padded(right, t, cfg.padding));
        if t >= len {
            continue;
        }
        let top = if iv.is_some() { b } else { len - 1 - t };
        if top < a || h.len() <= top {
            return Err(Error::EmptyWindow);
        }
        let mut acc: Option<S> = None;
        for i in (a..=top).rev() {
            let r = S::reduce(&[psi[i]], None, Extremum::Min, mode)?;
            let cell = S::reduce(&[h[i], r], None, Extremum::Min, mode)?;
            acc = Some(match acc {
                None => cell,
                Some(prev) => pair(prev, cell, Extremum::Max, mode)?,
            });
        }
        out.push(acc.expect("non-empty"));
    }
    out.reverse();
    Ok(out)
}

fn steps(iv: &Option<Interval>) -> Result<Option<StepInterval>> {
    match iv {
        None => Ok(None),
        Some(Interval::Steps(s)) => Ok(Some(*s)),
        Some(Interval::Smooth(_)) => Err(Error::Unsupported("recurrent engine has no smooth intervals")),
    }
}

fn eval<S: Scalar, C: ChannelSource<S>>(f: &Formula, channels: &C, cfg: &SemanticsConfig) -> Result<Vec<S>> {
    let len = channels.len();
    match f {
        Formula::True => Ok(vec![S::constant(cfg.top_value); len]),
        Formula::Pred(p) => {
            let xs = channels
                .channel(&p.var)
                .ok_or_else(|| Error::MissingVariables(vec![p.var.clone()]))?;
            Ok(xs.iter().map(|&x| p.margin_of(x)).collect())
        }
        Formula::Not(g) => Ok(eval(g, channels, cfg)?.into_iter().map(|x| -x).collect()),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let which = if matches!(f, Formula::And(..)) {
                Extremum::Min
            } else {
                Extremum::Max
            };
            let lt = eval(l, channels, cfg)?;
            let rt = eval(r, channels, cfg)?;
            lt.iter().zip(&rt).map(|(&x, &y)| pair(x, y, which, cfg.mode)).collect()
        }
        Formula::Eventually(iv, g) => windowed(&eval(g, channels, cfg)?, steps(iv)?, Extremum::Max, cfg),
        Formula::Always(iv, g) => windowed(&eval(g, channels, cfg)?, steps(iv)?, Extremum::Min, cfg),
        Formula::Until(iv, l, r) => {
            let iv = steps(iv)?;
            until(&eval(l, channels, cfg)?, &eval(r, channels, cfg)?, iv, cfg)
        }
    }
}

/// Recurrent trace over any channel source; with [`Var`](crate::autodiff::Var)
/// channels it records the recurrence on a tape.
pub fn trace_recurrent_with<S: Scalar, C: ChannelSource<S>>(
    f: &Formula,
    channels: &C,
    cfg: &SemanticsConfig,
) -> Result<Vec<S>> {
    cfg.validate()?;
    if channels.is_empty() {
        return Err(Error::EmptySignal);
    }
    eval(f, channels, cfg)
}

/// Robustness trace computed by backward recurrence.
pub fn trace_recurrent(f: &Formula, signals: &NamedSignals, cfg: &SemanticsConfig) -> Result<RobustnessTrace> {
    validate_against(f, signals).map_err(Error::MissingVariables)?;
    Ok(trace_recurrent_with(f, signals, cfg)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn example_one() {
        let sig = NamedSignals::single("s", &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        let f = parse("F[1,3] (s > 0)").unwrap();
        let cfg = SemanticsConfig::hard();
        assert_eq!(
            trace_recurrent(&f, &sig, &cfg).unwrap().values(),
            &[3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, 7.0]
        );
        let cfg = cfg.with_padding(PaddingPolicy::Constant(-1e5));
        assert_eq!(
            trace_recurrent(&f, &sig, &cfg).unwrap().values(),
            &[3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, -1e5]
        );
    }

    #[test]
    fn untimed_state_has_one_value() {
        let mut st = HiddenState::new(1, 3);
        st.push_front(1.0);
        st.push_front(2.0);
        assert_eq!(st.len(), 1);
        assert_eq!(st.index(), 1);
    }

    #[test]
    fn until_untimed() {
        let sig = NamedSignals::new([
            ("p", crate::make_signal(&[1.0, 1.0, -1.0], 1.0).unwrap()),
            ("q", crate::make_signal(&[-1.0, 1.0, 1.0], 1.0).unwrap()),
        ])
        .unwrap();
        let f = parse("(p > 0) U (q > 0)").unwrap();
        let tr = trace_recurrent(&f, &sig, &SemanticsConfig::hard()).unwrap();
        assert_eq!(tr[0], 1.0);
        assert_eq!(tr.values(), &[1.0, 1.0, -1.0]);
    }

    #[test]
    fn smooth_interval_rejected() {
        let sig = NamedSignals::single("s", &[0.0, 1.0]).unwrap();
        let f = parse("F ~[0.1,0.5,10] (s > 0)").unwrap();
        assert!(matches!(
            trace_recurrent(&f, &sig, &SemanticsConfig::hard()),
            Err(Error::Unsupported(_))
        ));
    }
}
