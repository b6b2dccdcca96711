//! STL abstract syntax tree, text syntax and structural queries.
//!
//! Concrete syntax (tightest binding first):
//!
//! ```text
//! phi      := or_expr ( "U" interval? or_expr )*
//! or_expr  := and_expr ( "|" and_expr )*
//! and_expr := unary ( "&" unary )*
//! unary    := "~" unary | "G" interval? unary | "F" interval? unary | atom
//! atom     := "TRUE" | "(" phi ")" | ident cmp number
//! cmp      := ">" | "<" | ">=" | "<="
//! interval := "[" uint "," uint "]" | "~[" real "," real "," real ( "," real )? "]"
//! ```
//!
//! The `~[a, b, c, eps]` form is a smooth interval: `a` and `b` are fractions
//! of the signal length, `c` the mask sharpness and `eps` the weight tolerance
//! (zero when omitted).

mod parse;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use parse::{parse, ParseError};

use crate::signal::{NamedSignals, SmoothInterval, StepInterval};

/// Comparison in an atomic predicate.
///
/// `>=` and `<=` share the robustness of `>` and `<`; the distinction only
/// matters on a set of measure zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Gt,
    Lt,
    Ge,
    Le,
}

impl Comparison {
    pub fn symbol(&self) -> &'static str {
        match self {
            Comparison::Gt => ">",
            Comparison::Lt => "<",
            Comparison::Ge => ">=",
            Comparison::Le => "<=",
        }
    }

    /// True for `>` and `>=`.
    pub fn is_greater(&self) -> bool {
        matches!(self, Comparison::Gt | Comparison::Ge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub var: String,
    pub cmp: Comparison,
    pub threshold: f64,
}

impl Predicate {
    /// Signed margin of a sample: `x - c` for `>`, `c - x` for `<`.
    pub fn margin(&self, x: f64) -> f64 {
        if self.cmp.is_greater() {
            x - self.threshold
        } else {
            self.threshold - x
        }
    }

    /// [`Predicate::margin`] over any scalar.
    pub fn margin_of<S: crate::scalar::Scalar>(&self, x: S) -> S {
        if self.cmp.is_greater() {
            x.affine(1.0, -self.threshold)
        } else {
            x.affine(-1.0, self.threshold)
        }
    }

    pub fn holds(&self, x: f64) -> bool {
        if self.cmp.is_greater() {
            x > self.threshold
        } else {
            !(x > self.threshold)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Steps(StepInterval),
    Smooth(SmoothInterval),
}

impl From<StepInterval> for Interval {
    fn from(iv: StepInterval) -> Self {
        Interval::Steps(iv)
    }
}

impl From<SmoothInterval> for Interval {
    fn from(si: SmoothInterval) -> Self {
        Interval::Smooth(si)
    }
}

/// An STL formula. A missing interval means the whole remaining signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Pred(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Eventually(Option<Interval>, Box<Formula>),
    Always(Option<Interval>, Box<Formula>),
    Until(Option<Interval>, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn pred(var: &str, cmp: Comparison, threshold: f64) -> Formula {
        Formula::Pred(Predicate {
            var: var.into(),
            cmp,
            threshold,
        })
    }

    pub fn gt(var: &str, threshold: f64) -> Formula {
        Self::pred(var, Comparison::Gt, threshold)
    }

    pub fn lt(var: &str, threshold: f64) -> Formula {
        Self::pred(var, Comparison::Lt, threshold)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    /// Left-nested conjunction of all parts. Panics on an empty iterator.
    pub fn and_all<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut it = parts.into_iter();
        let first = it.next().expect("and_all needs at least one operand");
        it.fold(first, Formula::and)
    }

    pub fn eventually(iv: Option<Interval>, f: Formula) -> Formula {
        Formula::Eventually(iv, Box::new(f))
    }

    pub fn always(iv: Option<Interval>, f: Formula) -> Formula {
        Formula::Always(iv, Box::new(f))
    }

    pub fn until(iv: Option<Interval>, l: Formula, r: Formula) -> Formula {
        Formula::Until(iv, Box::new(l), Box::new(r))
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Formula::Eventually(..) | Formula::Always(..) | Formula::Until(..))
    }

    pub fn interval(&self) -> Option<&Interval> {
        match self {
            Formula::Eventually(iv, _) | Formula::Always(iv, _) | Formula::Until(iv, _, _) => iv.as_ref(),
            _ => None,
        }
    }

    /// Predicate variable names referenced by the formula.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Pred(p) = f {
                out.insert(p.var.as_str());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, visitor: &mut dyn FnMut(&'a Formula)) {
        visitor(self);
        match self {
            Formula::True | Formula::Pred(_) => {}
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Always(_, f) => f.visit(visitor),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(_, l, r) => {
                l.visit(visitor);
                r.visit(visitor);
            }
        }
    }

    /// Smooth intervals in pre-order. Engines bind smooth-interval parameters
    /// by position in this list.
    pub fn smooth_intervals(&self) -> Vec<SmoothInterval> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Some(Interval::Smooth(si)) = f.interval() {
                out.push(*si);
            }
        });
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// Longest chain of nested temporal operators, minus one.
///
/// Until counts as two levels since it nests an always-window inside an
/// eventually-window. A formula without temporal operators has depth 0.
pub fn temporal_depth(f: &Formula) -> usize {
    fn levels(f: &Formula) -> usize {
        match f {
            Formula::True | Formula::Pred(_) => 0,
            Formula::Not(g) => levels(g),
            Formula::And(l, r) | Formula::Or(l, r) => levels(l).max(levels(r)),
            Formula::Eventually(_, g) | Formula::Always(_, g) => 1 + levels(g),
            Formula::Until(_, l, r) => 2 + levels(l).max(levels(r)),
        }
    }
    levels(f).saturating_sub(1)
}

/// Checks that every predicate variable names a channel. Returns the missing
/// names, sorted.
pub fn validate_against(f: &Formula, signals: &NamedSignals) -> core::result::Result<(), Vec<String>> {
    let missing: Vec<String> = f
        .variables()
        .into_iter()
        .filter(|v| !signals.contains(v))
        .map(String::from)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(missing)
    }
}

/// Canonical text form; `parse(&format(f))` reproduces `f`.
pub fn format(f: &Formula) -> String {
    alloc::format!("{f}")
}

fn write_interval(out: &mut fmt::Formatter<'_>, iv: &Option<Interval>) -> fmt::Result {
    match iv {
        None => Ok(()),
        Some(Interval::Steps(s)) => write!(out, "[{},{}]", s.a(), s.b()),
        Some(Interval::Smooth(s)) => {
            if s.eps == 0.0 {
                write!(out, "~[{},{},{}]", s.a, s.b, s.c)
            } else {
                write!(out, "~[{},{},{},{}]", s.a, s.b, s.c, s.eps)
            }
        }
    }
}

/// Operands of binary connectives get parentheses unless self-delimiting.
fn write_operand(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::And(..) | Formula::Or(..) | Formula::Until(..) => write!(out, "({f})"),
        _ => write!(out, "{f}"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => out.write_str("TRUE"),
            Formula::Pred(p) => write!(out, "({} {} {})", p.var, p.cmp.symbol(), p.threshold),
            Formula::Not(f) => {
                out.write_str("~")?;
                write_operand(out, f)
            }
            Formula::And(l, r) => {
                write_operand(out, l)?;
                out.write_str(" & ")?;
                write_operand(out, r)
            }
            Formula::Or(l, r) => {
                write_operand(out, l)?;
                out.write_str(" | ")?;
                write_operand(out, r)
            }
            Formula::Eventually(iv, f) => {
                out.write_str("F")?;
                write_interval(out, iv)?;
                out.write_str(" ")?;
                write_operand(out, f)
            }
            Formula::Always(iv, f) => {
                out.write_str("G")?;
                write_interval(out, iv)?;
                out.write_str(" ")?;
                write_operand(out, f)
            }
            Formula::Until(iv, l, r) => {
                write_operand(out, l)?;
                out.write_str(" U")?;
                write_interval(out, iv)?;
                out.write_str(" ")?;
                write_operand(out, r)
            }
        }
    }
}
