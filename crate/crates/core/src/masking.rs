//! Robustness traces computed column-by-column over unrolled, masked arrays.
//!
//! A child trace of length `L` is padded at the end and conceptually repeated
//! as every column of an `R x L` array. Column `t` is the subsignal starting at
//! `t`; a boolean mask keeps the rows inside the time window of that column,
//! and one reduction per column produces trace entry `t`. No column depends on
//! another, so there is no recurrence over time.
//!
//! Until is unrolled into three dimensions: slice `k` of the third axis fixes
//! the satisfaction time `i = a + k` and holds an always-window over `[0, i]`
//! of the left trace and a single row `i` of the right trace.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::formula::{validate_against, Formula, Interval};
use crate::scalar::Scalar;
use crate::signal::{MaskFill, NamedSignals, PaddingPolicy, RobustnessTrace, SemanticsConfig, StepInterval};
use crate::smoothing::Extremum;

/// Boolean mask over an `rows x cols` array. In every mask built here the
/// kept rows of a column form one contiguous run, stored per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask2D {
    rows: usize,
    cols: usize,
    kept: Vec<Option<(usize, usize)>>,
}

impl Mask2D {
    fn from_fn(rows: usize, cols: usize, f: impl Fn(usize) -> Option<(usize, usize)>) -> Self {
        let kept = (0..cols)
            .map(|t| {
                f(t).filter(|&(lo, hi)| lo <= hi && lo < rows)
                    .map(|(lo, hi)| (lo, hi.min(rows - 1)))
            })
            .collect();
        Mask2D { rows, cols, kept }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        matches!(self.kept[col], Some((lo, hi)) if (lo..=hi).contains(&row))
    }

    /// Kept rows of column `col`, or `None` when the column is empty.
    pub fn kept_rows(&self, col: usize) -> Option<RangeInclusive<usize>> {
        self.kept[col].map(|(lo, hi)| lo..=hi)
    }

    pub fn kept_count(&self, col: usize) -> usize {
        self.kept[col].map_or(0, |(lo, hi)| hi - lo + 1)
    }
}

/// Keeps entry `(r, t)` iff `r >= t`: column `t` sees the subsignal from `t`.
pub fn build_subsignal_mask(len: usize, rows: usize) -> Result<Mask2D> {
    if len == 0 || rows < len {
        return Err(Error::ShapeMismatch("subsignal mask needs rows >= len >= 1"));
    }
    Ok(Mask2D::from_fn(rows, len, |t| Some((t, rows - 1))))
}

/// Keeps entry `(r, t)` iff `t + a <= r <= t + b`, over `len + b` rows.
pub fn build_time_mask(len: usize, iv: StepInterval) -> Mask2D {
    Mask2D::from_fn(len + iv.b(), len, |t| Some((t + iv.a(), t + iv.b())))
}

/// Intersection of the kept regions of two masks of equal shape.
pub fn combine_masks(ms: &Mask2D, mt: &Mask2D) -> Result<Mask2D> {
    if ms.rows != mt.rows || ms.cols != mt.cols {
        return Err(Error::ShapeMismatch("masks differ in shape"));
    }
    let kept = ms
        .kept
        .iter()
        .zip(&mt.kept)
        .map(|(a, b)| match (a, b) {
            (Some((l1, h1)), Some((l2, h2))) => {
                let (lo, hi) = ((*l1).max(*l2), (*h1).min(*h2));
                (lo <= hi).then_some((lo, hi))
            }
            _ => None,
        })
        .collect();
    Ok(Mask2D {
        rows: ms.rows,
        cols: ms.cols,
        kept,
    })
}

/// A trace padded at its end and broadcast across `cols` identical columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Unrolled2D<S> {
    column: Vec<S>,
    cols: usize,
}

impl<S: Scalar> Unrolled2D<S> {
    pub fn new(trace: &[S], pad: usize, padding: PaddingPolicy) -> Self {
        let fill = match padding {
            PaddingPolicy::LastValue => *trace.last().expect("trace is non-empty"),
            PaddingPolicy::Constant(v) => S::constant(v),
        };
        let mut column = Vec::with_capacity(trace.len() + pad);
        column.extend_from_slice(trace);
        column.resize(trace.len() + pad, fill);
        Unrolled2D {
            column,
            cols: trace.len(),
        }
    }

    pub fn rows(&self) -> usize {
        self.column.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, _col: usize) -> S {
        self.column[row]
    }

    pub fn column(&self, _col: usize) -> &[S] {
        &self.column
    }
}

/// Stack of per-slice masks for Until. Slice `k` stands for satisfaction
/// time `i = a + k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask3D {
    rows: usize,
    cols: usize,
    depth: usize,
    kept: Vec<Option<(usize, usize)>>,
}

impl Mask3D {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn get(&self, row: usize, col: usize, k: usize) -> bool {
        matches!(self.kept[col * self.depth + k], Some((lo, hi)) if (lo..=hi).contains(&row))
    }

    pub fn kept_rows(&self, col: usize, k: usize) -> Option<RangeInclusive<usize>> {
        self.kept[col * self.depth + k].map(|(lo, hi)| lo..=hi)
    }
}

/// The left-trace and right-trace masks of an Until with interval `iv`
/// (untimed when `None`). Timed: `R = L + b`, `K = b - a + 1`. Untimed:
/// `R = K = L` and slices that run past the final sample are empty.
pub fn build_until_masks(len: usize, iv: Option<StepInterval>) -> (Mask3D, Mask3D) {
    let (a, rows, depth) = match iv {
        Some(iv) => (iv.a(), len + iv.b(), iv.window_size()),
        None => (0, len, len),
    };
    let mut left = Vec::with_capacity(len * depth);
    let mut right = Vec::with_capacity(len * depth);
    for t in 0..len {
        for k in 0..depth {
            let i = a + k;
            if t + i < rows {
                left.push(Some((t, t + i)));
                right.push(Some((t + i, t + i)));
            } else {
                left.push(None);
                right.push(None);
            }
        }
    }
    let mk = |kept| Mask3D {
        rows,
        cols: len,
        depth,
        kept,
    };
    (mk(left), mk(right))
}

/// The unrolled 3D array: the padded trace repeated along columns and slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Unrolled3D<S> {
    plane: Unrolled2D<S>,
    depth: usize,
}

impl<S: Scalar> Unrolled3D<S> {
    pub fn new(trace: &[S], pad: usize, depth: usize, padding: PaddingPolicy) -> Self {
        Unrolled3D {
            plane: Unrolled2D::new(trace, pad, padding),
            depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn get(&self, row: usize, col: usize, _k: usize) -> S {
        self.plane.get(row, col)
    }

    fn column(&self) -> &[S] {
        &self.plane.column
    }
}

/// Source of predicate channels for the generic evaluator.
pub trait ChannelSource<S> {
    fn len(&self) -> usize;
    fn channel(&self, name: &str) -> Option<&[S]>;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ChannelSource<f64> for NamedSignals {
    fn len(&self) -> usize {
        NamedSignals::len(self)
    }

    fn channel(&self, name: &str) -> Option<&[f64]> {
        self.get(name).map(|s| s.values())
    }
}

/// Channels of arbitrary scalars sharing one length.
#[derive(Debug, Clone)]
pub struct Channels<S> {
    map: BTreeMap<String, Vec<S>>,
    len: usize,
}

impl<S> Channels<S> {
    pub fn new(map: BTreeMap<String, Vec<S>>) -> Result<Self> {
        let len = map.values().next().map(Vec::len).ok_or(Error::NoSignals)?;
        if len == 0 {
            return Err(Error::EmptySignal);
        }
        if let Some((name, v)) = map.iter().find(|(_, v)| v.len() != len) {
            return Err(Error::LengthMismatch {
                name: name.clone(),
                expected: len,
                found: v.len(),
            });
        }
        Ok(Channels { map, len })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[S])> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

impl<S> ChannelSource<S> for Channels<S> {
    fn len(&self) -> usize {
        self.len
    }

    fn channel(&self, name: &str) -> Option<&[S]> {
        self.map.get(name).map(Vec::as_slice)
    }
}

/// Values bound to the parameters of one smooth interval.
#[derive(Debug, Clone, Copy)]
pub struct SmoothBinding<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub eps: f64,
}

impl SmoothBinding<f64> {
    pub fn from_interval(si: &crate::signal::SmoothInterval) -> Self {
        SmoothBinding {
            a: si.a,
            b: si.b,
            c: si.c,
            eps: si.eps,
        }
    }
}

/// Sigmoid window weights for offsets `0..len` in scalar arithmetic.
pub fn smooth_weights<S: Scalar>(bind: &SmoothBinding<S>, len: usize) -> Result<Vec<S>> {
    let l = S::constant(len as f64);
    let lo = bind.a * l;
    let hi = bind.b * l;
    let w: Vec<S> = (0..len)
        .map(|i| {
            let i = S::constant(i as f64);
            let up = (bind.c * (i - lo)).sigmoid();
            let down = (bind.c * (hi - i)).sigmoid();
            // σ(x) - σ(y) = σ(x) σ(-y) (1 - e^(y-x)), free of cancellation
            let gap = (-(bind.c * (hi - lo))).exp().affine(-1.0, 1.0);
            (up * down * gap).affine(1.0, -bind.eps).relu()
        })
        .collect();
    if w.iter().all(|x| x.value() <= 0.0) {
        return Err(Error::EmptyWindow);
    }
    Ok(w)
}

/// Resolved window of a temporal operator.
enum Window<S> {
    Untimed,
    Steps(StepInterval),
    Smooth(Vec<S>),
}

fn reduce_column<S: Scalar>(
    column: &[S],
    rows: Option<RangeInclusive<usize>>,
    which: Extremum,
    cfg: &SemanticsConfig,
) -> Result<S> {
    let rows = rows.ok_or(Error::EmptyWindow)?;
    match cfg.fill {
        MaskFill::KeptOnly => S::reduce(&column[rows], None, which, cfg.mode),
        MaskFill::Sentinel => {
            let fill = S::constant(match which {
                Extremum::Max => -cfg.sentinel,
                Extremum::Min => cfg.sentinel,
            });
            let filled: Vec<S> = column
                .iter()
                .enumerate()
                .map(|(r, &v)| if rows.contains(&r) { v } else { fill })
                .collect();
            S::reduce(&filled, None, which, cfg.mode)
        }
    }
}

/// Eventually (`Max`) or Always (`Min`) over a child trace, for the first
/// `columns` trace entries.
fn windowed<S: Scalar>(
    inner: &[S],
    window: &Window<S>,
    which: Extremum,
    cfg: &SemanticsConfig,
    columns: usize,
) -> Result<Vec<S>> {
    let len = inner.len();
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    let (mask, pad) = match window {
        Window::Untimed => (build_subsignal_mask(len, len)?, 0),
        Window::Steps(iv) => {
            let ms = build_subsignal_mask(len, len + iv.b())?;
            (combine_masks(&ms, &build_time_mask(len, *iv))?, iv.b())
        }
        Window::Smooth(_) => {
            let pad = len - 1;
            let ms = build_subsignal_mask(len, len + pad)?;
            let full = StepInterval::new(0, len - 1)?;
            (combine_masks(&ms, &build_time_mask(len, full))?, pad)
        }
    };
    let unrolled = Unrolled2D::new(inner, pad, cfg.padding);
    let mut out = Vec::with_capacity(columns);
    for t in 0..columns.min(len) {
        let col = unrolled.column(t);
        let value = match window {
            Window::Smooth(w) => {
                let rows = mask.kept_rows(t).ok_or(Error::EmptyWindow)?;
                let offsets = rows.start() - t..=rows.end() - t;
                S::reduce(&col[rows], Some(&w[offsets]), which, cfg.mode)?
            }
            _ => reduce_column(col, mask.kept_rows(t), which, cfg)?,
        };
        out.push(value);
    }
    Ok(out)
}

fn until_impl<S: Scalar>(
    left: &[S],
    right: &[S],
    iv: Option<StepInterval>,
    cfg: &SemanticsConfig,
    columns: usize,
) -> Result<Vec<S>> {
    if left.len() != right.len() {
        return Err(Error::ShapeMismatch("until operands differ in length"));
    }
    let len = left.len();
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    let (mask_l, mask_r) = build_until_masks(len, iv);
    let pad = iv.map_or(0, |iv| iv.b());
    let un_l = Unrolled3D::new(left, pad, mask_l.depth(), cfg.padding);
    let un_r = Unrolled3D::new(right, pad, mask_r.depth(), cfg.padding);
    let mut out = Vec::with_capacity(columns);
    let mut cells = Vec::with_capacity(mask_l.depth());
    for t in 0..columns.min(len) {
        cells.clear();
        for k in 0..mask_l.depth() {
            let Some(r_rows) = mask_r.kept_rows(t, k) else {
                continue;
            };
            // S1: per-slice minima of both arrays; S2: min over the pair
            let l_min = reduce_column(un_l.column(), mask_l.kept_rows(t, k), Extremum::Min, cfg)?;
            let r_min = reduce_column(un_r.column(), Some(r_rows), Extremum::Min, cfg)?;
            cells.push(S::min_of(&[l_min, r_min], cfg.mode)?);
        }
        // S3: max over the slice axis
        out.push(S::max_of(&cells, cfg.mode)?);
    }
    Ok(out)
}

struct Evaluator<'a, S, C> {
    channels: &'a C,
    cfg: SemanticsConfig,
    smooth: &'a [SmoothBinding<S>],
    len: usize,
}

impl<S: Scalar, C: ChannelSource<S>> Evaluator<'_, S, C> {
    fn window(&self, iv: &Option<Interval>, next_smooth: &mut usize) -> Result<Window<S>> {
        Ok(match iv {
            None => Window::Untimed,
            Some(Interval::Steps(s)) => Window::Steps(*s),
            Some(Interval::Smooth(_)) => {
                let bind = self
                    .smooth
                    .get(*next_smooth)
                    .ok_or(Error::ShapeMismatch("missing smooth interval binding"))?;
                *next_smooth += 1;
                Window::Smooth(smooth_weights(bind, self.len)?)
            }
        })
    }

    /// Trace entries `0..columns` of `f` (`columns` is `len` or 1).
    fn eval(&self, f: &Formula, next_smooth: &mut usize, columns: usize) -> Result<Vec<S>> {
        let len = self.len;
        match f {
            Formula::True => Ok(vec![S::constant(self.cfg.top_value); columns]),
            Formula::Pred(p) => {
                let ch = self
                    .channels
                    .channel(&p.var)
                    .ok_or_else(|| Error::MissingVariables(vec![p.var.clone()]))?;
                Ok(ch[..columns].iter().map(|&x| p.margin_of(x)).collect())
            }
            Formula::Not(g) => Ok(self.eval(g, next_smooth, columns)?.into_iter().map(|x| -x).collect()),
            Formula::And(l, r) | Formula::Or(l, r) => {
                let which = if matches!(f, Formula::And(..)) {
                    Extremum::Min
                } else {
                    Extremum::Max
                };
                let lt = self.eval(l, next_smooth, columns)?;
                let rt = self.eval(r, next_smooth, columns)?;
                lt.iter()
                    .zip(&rt)
                    .map(|(&x, &y)| S::reduce(&[x, y], None, which, self.cfg.mode))
                    .collect()
            }
            Formula::Eventually(iv, g) | Formula::Always(iv, g) => {
                let which = if matches!(f, Formula::Eventually(..)) {
                    Extremum::Max
                } else {
                    Extremum::Min
                };
                let window = self.window(iv, next_smooth)?;
                let inner = self.eval(g, next_smooth, len)?;
                windowed(&inner, &window, which, &self.cfg, columns)
            }
            Formula::Until(iv, l, r) => {
                let iv = match iv {
                    None => None,
                    Some(Interval::Steps(s)) => Some(*s),
                    Some(Interval::Smooth(_)) => return Err(Error::Unsupported("smooth intervals on until")),
                };
                let lt = self.eval(l, next_smooth, len)?;
                let rt = self.eval(r, next_smooth, len)?;
                until_impl(&lt, &rt, iv, &self.cfg, columns)
            }
        }
    }
}

fn run<S: Scalar, C: ChannelSource<S>>(
    f: &Formula,
    channels: &C,
    cfg: &SemanticsConfig,
    smooth: &[SmoothBinding<S>],
    columns: usize,
) -> Result<Vec<S>> {
    cfg.validate()?;
    if channels.is_empty() {
        return Err(Error::EmptySignal);
    }
    let ev = Evaluator {
        channels,
        cfg: *cfg,
        smooth,
        len: channels.len(),
    };
    let mut next = 0;
    ev.eval(f, &mut next, columns)
}

/// Full robustness trace in any scalar type. Smooth intervals take their
/// parameters from `smooth`, in the order of [`Formula::smooth_intervals`].
pub fn trace_with<S: Scalar, C: ChannelSource<S>>(
    f: &Formula,
    channels: &C,
    cfg: &SemanticsConfig,
    smooth: &[SmoothBinding<S>],
) -> Result<Vec<S>> {
    run(f, channels, cfg, smooth, channels.len())
}

/// Robustness of the whole signal (trace entry 0). Only column 0 of the
/// outermost temporal operators is reduced.
pub fn robustness_with<S: Scalar, C: ChannelSource<S>>(
    f: &Formula,
    channels: &C,
    cfg: &SemanticsConfig,
    smooth: &[SmoothBinding<S>],
) -> Result<S> {
    Ok(run(f, channels, cfg, smooth, 1)?[0])
}

fn formula_bindings(f: &Formula) -> Vec<SmoothBinding<f64>> {
    f.smooth_intervals().iter().map(SmoothBinding::from_interval).collect()
}

fn check_variables(f: &Formula, signals: &NamedSignals) -> Result<()> {
    validate_against(f, signals).map_err(Error::MissingVariables)
}

/// Robustness trace of `f` over `signals`.
pub fn robustness_trace(f: &Formula, signals: &NamedSignals, cfg: &SemanticsConfig) -> Result<RobustnessTrace> {
    check_variables(f, signals)?;
    Ok(trace_with(f, signals, cfg, &formula_bindings(f))?.into())
}

/// Robustness of the whole signal, `robustness_trace(..)[0]`.
pub fn robustness(f: &Formula, signals: &NamedSignals, cfg: &SemanticsConfig) -> Result<f64> {
    check_variables(f, signals)?;
    robustness_with(f, signals, cfg, &formula_bindings(f))
}

/// Eventually over an already computed trace.
pub fn eventually_trace(
    inner: &RobustnessTrace,
    iv: Option<StepInterval>,
    cfg: &SemanticsConfig,
) -> Result<RobustnessTrace> {
    cfg.validate()?;
    let window = iv.map_or(Window::Untimed, Window::Steps);
    Ok(windowed(inner.values(), &window, Extremum::Max, cfg, inner.len())?.into())
}

/// Always over an already computed trace.
pub fn always_trace(
    inner: &RobustnessTrace,
    iv: Option<StepInterval>,
    cfg: &SemanticsConfig,
) -> Result<RobustnessTrace> {
    cfg.validate()?;
    let window = iv.map_or(Window::Untimed, Window::Steps);
    Ok(windowed(inner.values(), &window, Extremum::Min, cfg, inner.len())?.into())
}

/// Until over two already computed traces of equal length.
pub fn until_trace(
    left: &RobustnessTrace,
    right: &RobustnessTrace,
    iv: Option<StepInterval>,
    cfg: &SemanticsConfig,
) -> Result<RobustnessTrace> {
    cfg.validate()?;
    Ok(until_impl(left.values(), right.values(), iv, cfg, left.len())?.into())
}
