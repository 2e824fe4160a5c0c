//! Integer time scalar.
//!
//! Every duration, start time and flow time in the crate is a value of some
//! `T: Time`. Time is integral so flow-time comparisons and the block ratios
//! used by the relaxation are exact; the crate root fixes `T = i64` through
//! type aliases.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::iter::Sum;

use num_integer::Integer;
use num_traits::{FromPrimitive, NumAssign, PrimInt, Signed, ToPrimitive};

/// Signed primitive integer usable as a time unit (`i32`, `i64`, `i128`).
pub trait Time:
    PrimInt
    + Signed
    + Integer
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Hash
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts a job count into the time scalar.
    ///
    /// Counts are bounded by the instance size, so failure means the chosen
    /// scalar is too narrow for the instance.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("job count does not fit the time scalar")
    }

    /// Sum that clamps at `Self::max_value()` instead of overflowing.
    fn sat_add(self, other: Self) -> Self {
        self.saturating_add(other)
    }

    /// Product that clamps at `Self::max_value()`; both operands non-negative.
    fn sat_mul(self, other: Self) -> Self {
        self.checked_mul(&other).unwrap_or_else(Self::max_value)
    }
}

impl<T> Time for T where
    T: PrimInt
        + Signed
        + Integer
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Hash
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// `n * (n + 1) / 2` as a time value.
pub(crate) fn triangular<T: Time>(n: usize) -> T {
    let n = T::from_count(n);
    n * (n + T::one()) / (T::one() + T::one())
}
