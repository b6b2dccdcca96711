use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::signal::Mode;
use crate::smoothing::{self, Extremum};

#[derive(Default)]
struct Inner {
    /// Per node: range into `edges`.
    nodes: Vec<(u32, u32)>,
    /// `(parent, ∂node/∂parent)`.
    edges: Vec<(u32, f64)>,
    kink: bool,
}

/// Wengert list recording local partial derivatives.
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// New independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        let index = self.push(core::iter::empty());
        Var {
            tape: Some(self),
            index,
            value,
        }
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True once a hard extremum met a tie or a clamp sat exactly on its kink.
    pub fn hit_kink(&self) -> bool {
        self.inner.borrow().kink
    }

    fn mark_kink(&self) {
        self.inner.borrow_mut().kink = true;
    }

    fn push(&self, edges: impl Iterator<Item = (u32, f64)>) -> u32 {
        let mut inner = self.inner.borrow_mut();
        let start = inner.edges.len() as u32;
        inner.edges.extend(edges);
        let end = inner.edges.len() as u32;
        let id = inner.nodes.len() as u32;
        inner.nodes.push((start, end));
        id
    }

    /// Adjoints of every recorded node with respect to `output`.
    pub fn gradient(&self, output: Var<'_>) -> Adjoints {
        let inner = self.inner.borrow();
        let mut adj = vec![0.0; inner.nodes.len()];
        if let Some(t) = output.tape {
            debug_assert!(core::ptr::eq(t, self));
            adj[output.index as usize] = 1.0;
            for node in (0..=output.index as usize).rev() {
                let g = adj[node];
                if g == 0.0 {
                    continue;
                }
                let (s, e) = inner.nodes[node];
                for &(p, d) in &inner.edges[s as usize..e as usize] {
                    adj[p as usize] += g * d;
                }
            }
        }
        Adjoints { adj }
    }
}

pub struct Adjoints {
    adj: Vec<f64>,
}

impl Adjoints {
    /// Derivative of the output with respect to `v`; zero for constants.
    pub fn wrt(&self, v: &Var<'_>) -> f64 {
        match v.tape {
            Some(_) => self.adj.get(v.index as usize).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }
}

/// A scalar that records how it was computed.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    index: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var(#{}: {})", self.index, self.value),
            None => write!(f, "Var(const {})", self.value),
        }
    }
}

impl<'t> Var<'t> {
    pub fn is_constant(&self) -> bool {
        self.tape.is_none()
    }

    fn unary(self, value: f64, d: f64) -> Var<'t> {
        match self.tape {
            None => Var::constant(value),
            Some(t) => Var {
                tape: Some(t),
                index: t.push(core::iter::once((self.index, d))),
                value,
            },
        }
    }

    fn binary(self, other: Var<'t>, value: f64, da: f64, db: f64) -> Var<'t> {
        let tape = match (self.tape, other.tape) {
            (None, None) => return Var::constant(value),
            (Some(t), _) | (None, Some(t)) => t,
        };
        let a = self.tape.map(|_| (self.index, da));
        let b = other.tape.map(|_| (other.index, db));
        Var {
            tape: Some(tape),
            index: tape.push(a.into_iter().chain(b)),
            value,
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, o: Var<'t>) -> Var<'t> {
        self.binary(o, self.value + o.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, o: Var<'t>) -> Var<'t> {
        self.binary(o, self.value - o.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, o: Var<'t>) -> Var<'t> {
        self.binary(o, self.value * o.value, o.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, o: Var<'t>) -> Var<'t> {
        let q = self.value / o.value;
        self.binary(o, q, 1.0 / o.value, -q / o.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(-self.value, -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn constant(v: f64) -> Self {
        Var {
            tape: None,
            index: u32::MAX,
            value: v,
        }
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn exp(self) -> Self {
        let e = libm::exp(self.value);
        self.unary(e, e)
    }

    fn ln(self) -> Self {
        self.unary(libm::log(self.value), 1.0 / self.value)
    }

    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.value);
        // subgradient 0 at the origin
        let d = if r > 0.0 { 0.5 / r } else { 0.0 };
        if r == 0.0 {
            if let Some(t) = self.tape {
                t.mark_kink();
            }
        }
        self.unary(r, d)
    }

    fn sigmoid(self) -> Self {
        let s = smoothing::sigmoid(self.value);
        self.unary(s, s * (1.0 - s))
    }

    fn relu(self) -> Self {
        // subgradient 0 at the origin; exact zeros here come from saturated
        // sigmoids, where both one-sided slopes vanish anyway
        if self.value > 0.0 {
            self.unary(self.value, 1.0)
        } else {
            self.unary(0.0, 0.0)
        }
    }

    fn affine(self, k: f64, c: f64) -> Self {
        self.unary(k * self.value + c, k)
    }

    fn reduce(values: &[Self], weights: Option<&[Self]>, which: Extremum, mode: Mode) -> Result<Self> {
        let xs: Vec<f64> = values.iter().map(|v| v.value).collect();
        let ws: Option<Vec<f64>> = weights.map(|w| w.iter().map(|v| v.value).collect());
        let weights_live = weights.is_some_and(|w| w.iter().any(|v| v.tape.is_some()));
        let mut dx = vec![0.0; xs.len()];
        let mut dw = if weights_live { vec![0.0; xs.len()] } else { Vec::new() };
        let (value, tie) = smoothing::reduce_with_grad(
            &xs,
            ws.as_deref(),
            which,
            mode,
            &mut dx,
            if weights_live { Some(&mut dw) } else { None },
        )?;
        let tape = values.iter().chain(weights.unwrap_or(&[])).find_map(|v| v.tape);
        let Some(tape) = tape else {
            return Ok(Var::constant(value));
        };
        if tie {
            tape.mark_kink();
        }
        let from_values = values
            .iter()
            .zip(&dx)
            .filter(|(v, d)| v.tape.is_some() && **d != 0.0)
            .map(|(v, d)| (v.index, *d));
        let from_weights = weights
            .unwrap_or(&[])
            .iter()
            .zip(dw.iter())
            .filter(|(v, d)| v.tape.is_some() && **d != 0.0)
            .map(|(v, d)| (v.index, *d));
        let index = tape.push(from_values.chain(from_weights));
        Ok(Var {
            tape: Some(tape),
            index,
            value,
        })
    }
}
