use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    pub learning_rate: f64,
    pub steps: usize,
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) || self.steps == 0 {
            return Err(Error::InvalidConfig(
                "descent needs learning_rate > 0 and steps >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Plain fixed-step gradient descent.
///
/// `eval(step, x)` returns the objective and its gradient at `x`. Returns the
/// objective at every step; a non-finite objective or gradient stops the run
/// with [`Error::Diverged`].
pub fn gradient_descent(
    x: &mut [f64],
    cfg: &DescentConfig,
    mut eval: impl FnMut(usize, &[f64]) -> Result<(f64, Vec<f64>)>,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut history = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let (value, grad) = eval(step, x)?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { step });
        }
        history.push(value);
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi -= cfg.learning_rate * gi;
        }
    }
    Ok(history)
}

/// Maps two free reals to `0 <= a <= b <= 1` through a sigmoid, then sorts.
pub fn sorted_interval<S: Scalar>(p: S, q: S) -> (S, S) {
    let (x, y) = (p.sigmoid(), q.sigmoid());
    if x.value() <= y.value() {
        (x, y)
    } else {
        (y, x)
    }
}

/// Inverse of the sigmoid, for initializing free parameters.
pub fn logit(x: f64) -> f64 {
    libm::log(x / (1.0 - x))
}
