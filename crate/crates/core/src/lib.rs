//! Signal Temporal Logic robustness over discrete-time signals.
//!
//! Traces are computed by the masking engine ([`masking`]): every trace
//! entry is one masked reduction over an unrolled array, so nothing depends
//! on the previous time step. A backward recurrent engine ([`recurrent`]) and
//! a brute-force oracle ([`reference`]) are provided for comparison.
//! Reductions may be hard or smoothed ([`smoothing`]); gradients with respect
//! to samples and smoothed interval bounds come from [`autodiff`].
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is on.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > y)` is used on purpose so NaN lands on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod apps;
pub mod autodiff;
pub mod error;
pub mod formula;
pub mod masking;
pub mod recurrent;
pub mod reference;
pub mod scalar;
pub mod signal;
pub mod smoothing;
pub mod testing;

pub use error::{Error, Result};
pub use formula::{format, parse, temporal_depth, validate_against, Comparison, Formula, Interval, Predicate};
pub use masking::{robustness, robustness_trace};
pub use scalar::Scalar;
pub use signal::{
    make_signal, window_size, MaskFill, Mode, NamedSignals, PaddingPolicy, RobustnessTrace, SemanticsConfig, Signal,
    SmoothInterval, StepInterval,
};
