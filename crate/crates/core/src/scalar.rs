//! Numeric abstraction shared by plain evaluation (`f64`) and gradient
//! recording ([`crate::autodiff::Var`]).

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::Result;
use crate::signal::Mode;
use crate::smoothing::{self, Extremum};

pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sigmoid(self) -> Self;
    fn relu(self) -> Self;
    /// `k * self + c`.
    fn affine(self, k: f64, c: f64) -> Self;
    /// Weighted smooth (or hard) extremum, see [`smoothing::reduce`].
    fn reduce(values: &[Self], weights: Option<&[Self]>, which: Extremum, mode: Mode) -> Result<Self>;

    fn max_of(values: &[Self], mode: Mode) -> Result<Self> {
        Self::reduce(values, None, Extremum::Max, mode)
    }

    fn min_of(values: &[Self], mode: Mode) -> Result<Self> {
        Self::reduce(values, None, Extremum::Min, mode)
    }
}

impl Scalar for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    fn exp(self) -> Self {
        libm::exp(self)
    }

    fn ln(self) -> Self {
        libm::log(self)
    }

    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }

    fn sigmoid(self) -> Self {
        smoothing::sigmoid(self)
    }

    fn relu(self) -> Self {
        self.max(0.0)
    }

    #[inline]
    fn affine(self, k: f64, c: f64) -> Self {
        k * self + c
    }

    #[inline]
    fn reduce(values: &[Self], weights: Option<&[Self]>, which: Extremum, mode: Mode) -> Result<Self> {
        smoothing::reduce(values, weights, which, mode)
    }
}
