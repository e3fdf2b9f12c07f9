//! Log-domain representation of nonnegative reals.

use serde::{Deserialize, Serialize};

use crate::math::{log_diff_exp, log_sum_exp};

/// A nonnegative real number stored as its natural logarithm, with an
/// explicit zero. Phase volumes and structure functions routinely exceed
/// e^1000, so all arithmetic on them happens in this representation.
///
/// Zero is canonical: `is_zero == true` always pairs with a
/// `log_magnitude` of negative infinity, so bitwise comparison and
/// serialization are stable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    log_magnitude: f64,
    is_zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        is_zero: true,
    };

    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        is_zero: false,
    };

    /// Value e^ln_v. A negative-infinite argument yields zero.
    pub fn from_ln(ln_v: f64) -> Self {
        if ln_v == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            debug_assert!(!ln_v.is_nan(), "LogValue from NaN log");
            LogValue {
                log_magnitude: ln_v,
                is_zero: false,
            }
        }
    }

    /// Encode a plain nonnegative value. Panics on negative input.
    pub fn from_value(v: f64) -> Self {
        assert!(v >= 0.0, "LogValue requires a nonnegative value, got {v}");
        if v == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(v.ln())
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Natural log of the magnitude; negative infinity for zero.
    #[inline]
    pub fn ln(&self) -> f64 {
        self.log_magnitude
    }

    /// Back to linear scale. Underflows to 0.0 and overflows to +inf as
    /// dictated by f64; prefer staying in the log domain.
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }

    /// Sum of two nonnegative values. Exact when one side is zero; equal
    /// magnitudes gain exactly ln 2.
    pub fn add(&self, other: &LogValue) -> LogValue {
        if self.is_zero {
            return *other;
        }
        if other.is_zero {
            return *self;
        }
        Self::from_ln(log_sum_exp(self.log_magnitude, other.log_magnitude))
    }

    /// Difference self - other, defined only when self > other.
    /// Equal or reversed operands yield None (a degenerate shell).
    pub fn sub(&self, other: &LogValue) -> Option<LogValue> {
        if other.is_zero {
            return if self.is_zero { None } else { Some(*self) };
        }
        log_diff_exp(self.log_magnitude, other.log_magnitude).map(Self::from_ln)
    }

    /// Product (log-domain addition).
    pub fn mul(&self, other: &LogValue) -> LogValue {
        if self.is_zero || other.is_zero {
            return Self::ZERO;
        }
        Self::from_ln(self.log_magnitude + other.log_magnitude)
    }

    /// Multiply by e^ln_c (a strictly positive scale factor).
    pub fn scale_ln(&self, ln_c: f64) -> LogValue {
        if self.is_zero {
            Self::ZERO
        } else {
            Self::from_ln(self.log_magnitude + ln_c)
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self.is_zero, other.is_zero) {
            (true, true) => Some(std::cmp::Ordering::Equal),
            (true, false) => Some(std::cmp::Ordering::Less),
            (false, true) => Some(std::cmp::Ordering::Greater),
            (false, false) => self.log_magnitude.partial_cmp(&other.log_magnitude),
        }
    }
}

impl Default for LogValue {
    fn default() -> Self {
        Self::ZERO
    }
}
