//! Brute-force Boolean and quantitative semantics, used as the oracle for
//! both engines.
//!
//! Quantitative evaluation pads virtually: an index past the final sample
//! reads the child's padding value (its last trace value, or the configured
//! constant). Boolean evaluation instead clips windows at the signal end.
//! Each smooth reduction is applied once per window, in ascending index
//! order, exactly as the masking engine applies it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::formula::{validate_against, Formula, Interval};
use crate::signal::{NamedSignals, PaddingPolicy, RobustnessTrace, SemanticsConfig, SmoothInterval, StepInterval};
use crate::smoothing::{reduce, smooth_mask_weights, Extremum};

fn check(f: &Formula, signals: &NamedSignals, t: usize) -> Result<()> {
    validate_against(f, signals).map_err(Error::MissingVariables)?;
    if t >= signals.len() {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: signals.len(),
        });
    }
    Ok(())
}

/// Truth of `f` on the subsignal starting at `t`.
///
/// Windows are clipped to the last sample: an empty Eventually window is
/// false and an empty Always window is true. Smooth intervals are read as
/// their discrete counterpart [`SmoothInterval::to_steps`].
pub fn eval_bool(f: &Formula, signals: &NamedSignals, t: usize) -> Result<bool> {
    check(f, signals, t)?;
    holds(f, signals, t)
}

fn steps_of(iv: &Option<Interval>, len: usize) -> Result<Option<StepInterval>> {
    match iv {
        None => Ok(None),
        Some(Interval::Steps(s)) => Ok(Some(*s)),
        Some(Interval::Smooth(si)) => si.to_steps(len).map(Some),
    }
}

/// Offsets `i` of the window at `t` that stay inside the signal.
fn clipped(iv: Option<StepInterval>, t: usize, len: usize) -> core::ops::RangeInclusive<usize> {
    let last = len - 1 - t;
    match iv {
        None => 0..=last,
        Some(iv) => iv.a()..=iv.b().min(last),
    }
}

fn holds(f: &Formula, signals: &NamedSignals, t: usize) -> Result<bool> {
    let len = signals.len();
    Ok(match f {
        Formula::True => true,
        Formula::Pred(p) => p.holds(signals.get(&p.var).expect("validated").values()[t]),
        Formula::Not(g) => !holds(g, signals, t)?,
        Formula::And(l, r) => holds(l, signals, t)? && holds(r, signals, t)?,
        Formula::Or(l, r) => holds(l, signals, t)? || holds(r, signals, t)?,
        Formula::Eventually(iv, g) => {
            let mut any = false;
            for i in clipped(steps_of(iv, len)?, t, len) {
                any |= holds(g, signals, t + i)?;
            }
            any
        }
        Formula::Always(iv, g) => {
            let mut all = true;
            for i in clipped(steps_of(iv, len)?, t, len) {
                all &= holds(g, signals, t + i)?;
            }
            all
        }
        Formula::Until(iv, l, r) => {
            let mut found = false;
            for i in clipped(steps_of(iv, len)?, t, len) {
                if holds(r, signals, t + i)? {
                    let mut prefix = true;
                    for tau in 0..=i {
                        prefix &= holds(l, signals, t + tau)?;
                    }
                    found |= prefix;
                }
            }
            found
        }
    })
}

/// Robustness of `f` on the subsignal starting at `t`.
pub fn robustness_ref(f: &Formula, signals: &NamedSignals, t: usize, cfg: &SemanticsConfig) -> Result<f64> {
    check(f, signals, t)?;
    cfg.validate()?;
    let mut smooth = f.smooth_intervals().into_iter();
    Ok(trace(f, signals, cfg, &mut smooth)?[t])
}

/// `[robustness_ref(f, signals, t, cfg) for t in 0..L]`.
pub fn trace_ref(f: &Formula, signals: &NamedSignals, cfg: &SemanticsConfig) -> Result<RobustnessTrace> {
    check(f, signals, 0)?;
    cfg.validate()?;
    let mut smooth = f.smooth_intervals().into_iter();
    Ok(trace(f, signals, cfg, &mut smooth)?.into())
}

/// Child value at index `j`, padded past the end.
fn at(child: &[f64], j: usize, padding: PaddingPolicy) -> f64 {
    match child.get(j) {
        Some(&v) => v,
        None => match padding {
            PaddingPolicy::LastValue => child[child.len() - 1],
            PaddingPolicy::Constant(v) => v,
        },
    }
}

fn trace(
    f: &Formula,
    signals: &NamedSignals,
    cfg: &SemanticsConfig,
    smooth: &mut impl Iterator<Item = SmoothInterval>,
) -> Result<Vec<f64>> {
    let len = signals.len();
    match f {
        Formula::True => Ok(alloc::vec![cfg.top_value; len]),
        Formula::Pred(p) => Ok(signals
            .get(&p.var)
            .expect("validated")
            .values()
            .iter()
            .map(|&x| p.margin(x))
            .collect()),
        Formula::Not(g) => Ok(trace(g, signals, cfg, smooth)?.iter().map(|x| -x).collect()),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let which = if matches!(f, Formula::And(..)) {
                Extremum::Min
            } else {
                Extremum::Max
            };
            let lt = trace(l, signals, cfg, smooth)?;
            let rt = trace(r, signals, cfg, smooth)?;
            (0..len)
                .map(|t| reduce(&[lt[t], rt[t]], None, which, cfg.mode))
                .collect()
        }
        Formula::Eventually(iv, g) | Formula::Always(iv, g) => {
            let which = if matches!(f, Formula::Eventually(..)) {
                Extremum::Max
            } else {
                Extremum::Min
            };
            let weights = match iv {
                Some(Interval::Smooth(_)) => {
                    let si = smooth.next().expect("one binding per smooth interval");
                    Some(smooth_mask_weights(&si, len)?)
                }
                _ => None,
            };
            let child = trace(g, signals, cfg, smooth)?;
            let mut out = Vec::with_capacity(len);
            for t in 0..len {
                let mut window = Vec::new();
                let mut wts = Vec::new();
                match (iv, &weights) {
                    (None, _) => window.extend_from_slice(&child[t..]),
                    (Some(Interval::Steps(s)), _) => {
                        for i in s.a()..=s.b() {
                            window.push(at(&child, t + i, cfg.padding));
                        }
                    }
                    (Some(Interval::Smooth(_)), Some(w)) => {
                        for (i, &wi) in w.iter().enumerate() {
                            window.push(at(&child, t + i, cfg.padding));
                            wts.push(wi);
                        }
                    }
                    (Some(Interval::Smooth(_)), None) => unreachable!(),
                }
                let wts = (!wts.is_empty()).then_some(wts.as_slice());
                out.push(reduce(&window, wts, which, cfg.mode)?);
            }
            Ok(out)
        }
        Formula::Until(iv, l, r) => {
            let steps = match iv {
                None => None,
                Some(Interval::Steps(s)) => Some(*s),
                Some(Interval::Smooth(_)) => return Err(Error::Unsupported("smooth intervals on until")),
            };
            let lt = trace(l, signals, cfg, smooth)?;
            let rt = trace(r, signals, cfg, smooth)?;
            let mut out = Vec::with_capacity(len);
            for t in 0..len {
                let offsets = match steps {
                    None => 0..=len - 1 - t,
                    Some(s) => s.a()..=s.b(),
                };
                let mut cells = Vec::new();
                for i in offsets {
                    let prefix: Vec<f64> = (0..=i).map(|tau| at(&lt, t + tau, cfg.padding)).collect();
                    let lmin = reduce(&prefix, None, Extremum::Min, cfg.mode)?;
                    let rmin = reduce(&[at(&rt, t + i, cfg.padding)], None, Extremum::Min, cfg.mode)?;
                    cells.push(reduce(&[lmin, rmin], None, Extremum::Min, cfg.mode)?);
                }
                out.push(reduce(&cells, None, Extremum::Max, cfg.mode)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::signal::Mode;

    fn ramp() -> NamedSignals {
        NamedSignals::single("s", &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap()
    }

    #[test]
    fn boolean_examples() {
        let x = NamedSignals::single("x", &[1.0, 2.0, 3.0]).unwrap();
        assert!(eval_bool(&parse("G (x>0)").unwrap(), &x, 0).unwrap());
        let x = NamedSignals::single("x", &[1.0, -1.0, 3.0]).unwrap();
        assert!(!eval_bool(&parse("G (x>0)").unwrap(), &x, 0).unwrap());
        let sig = NamedSignals::new([
            ("p", crate::make_signal(&[1.0, 1.0, -1.0], 1.0).unwrap()),
            ("q", crate::make_signal(&[-1.0, 1.0, 1.0], 1.0).unwrap()),
        ])
        .unwrap();
        assert!(eval_bool(&parse("(p > 0) U (q > 0)").unwrap(), &sig, 0).unwrap());
        assert!(matches!(
            eval_bool(&parse("p > 0").unwrap(), &sig, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn clipped_windows() {
        let x = NamedSignals::single("x", &[1.0, 2.0]).unwrap();
        assert!(!eval_bool(&parse("F[4,6] (x > 0)").unwrap(), &x, 0).unwrap());
        assert!(eval_bool(&parse("G[4,6] (x < 0)").unwrap(), &x, 0).unwrap());
    }

    #[test]
    fn example_one() {
        let f = parse("F[1,3] (s > 0)").unwrap();
        let cfg = SemanticsConfig::hard();
        assert_eq!(robustness_ref(&f, &ramp(), 0, &cfg).unwrap(), 3.0);
        let cfg7 = cfg.with_padding(PaddingPolicy::Constant(7.0));
        assert_eq!(
            trace_ref(&f, &ramp(), &cfg7).unwrap().values(),
            &[3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, 7.0]
        );
        let cfg_neg = cfg.with_padding(PaddingPolicy::Constant(-1e5));
        assert_eq!(
            trace_ref(&f, &ramp(), &cfg_neg).unwrap().values(),
            &[3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, -1e5]
        );
    }

    #[test]
    fn until_brute_force() {
        let sig = NamedSignals::new([
            ("p", crate::make_signal(&[1.0, 1.0, -1.0], 1.0).unwrap()),
            ("q", crate::make_signal(&[-1.0, 1.0, 1.0], 1.0).unwrap()),
        ])
        .unwrap();
        let f = parse("(p > 0) U (q > 0)").unwrap();
        assert_eq!(robustness_ref(&f, &sig, 0, &SemanticsConfig::hard()).unwrap(), 1.0);
    }

    #[test]
    fn true_and_negation() {
        let sig = NamedSignals::single("s", &[0.5, -1.0, 2.0, 0.0, 3.0]).unwrap();
        let cfg = SemanticsConfig::hard();
        assert_eq!(
            trace_ref(&parse("TRUE").unwrap(), &sig, &cfg).unwrap().values(),
            &[1e5; 5]
        );
        for text in ["F[0,2] (s > 0.1)", "(s > 0) U[1,2] (s < 1)", "G (s > -0.5) | (s < 2)"] {
            let f = parse(text).unwrap();
            let neg = Formula::not(f.clone());
            for mode in [Mode::Hard, Mode::LogSumExp { temperature: 2.0 }] {
                let cfg = cfg.with_mode(mode);
                let a = trace_ref(&f, &sig, &cfg).unwrap();
                let b = trace_ref(&neg, &sig, &cfg).unwrap();
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert_eq!(*x, -*y);
                }
            }
        }
    }

    #[test]
    fn smooth_interval_approaches_steps() {
        let sig = NamedSignals::single("s", &[0.1, -0.3, 0.8, 0.2, 0.5, -0.6, 0.9, 0.4, 0.0, 0.7]).unwrap();
        let smooth = parse("G ~[0.2,0.5,1000] (s > 0)").unwrap();
        let steps = parse("G[2,5] (s > 0)").unwrap();
        let cfg = SemanticsConfig::hard();
        assert_eq!(
            robustness_ref(&smooth, &sig, 0, &cfg).unwrap(),
            robustness_ref(&steps, &sig, 0, &cfg).unwrap()
        );
    }
}
