//! Probability scalars and the binary entropy function.

use crate::error::{RdError, Result};

/// Slack allowed when arithmetic drifts a probability just outside `[0, 1]`.
pub const PROB_TOL: f64 = 1e-12;

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        Self::named("probability", value)
    }

    /// Like [`Probability::new`] but reports `name` in the error.
    pub fn named(name: &'static str, value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(RdError::OutOfRange { name, value })
        }
    }

    /// Accepts values produced by arithmetic, clamping drift up to [`PROB_TOL`].
    /// Anything further out is a numerical error, not a user error.
    pub(crate) fn from_arith(name: &'static str, value: f64) -> Result<Self> {
        if (-PROB_TOL..=1.0 + PROB_TOL).contains(&value) {
            Ok(Probability(value.clamp(0.0, 1.0)))
        } else {
            Err(RdError::Numerical(format!(
                "{name} = {value} drifted outside [0, 1]"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(t: Probability) -> f64 {
    h2(t.value())
}

/// Unchecked binary entropy on a raw `f64`. Arguments outside `(0, 1)` give 0,
/// which is the exact value at the endpoints.
#[inline]
pub fn h2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
    }
}

/// `t * log2(t)` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn xlog2x(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.log2()
    }
}

/// Binary convolution `t(1 - d) + (1 - t)d`: crossover of two cascaded BSCs.
#[inline]
pub fn binary_convolution(t: f64, d: f64) -> f64 {
    t * (1.0 - d) + (1.0 - t) * d
}
