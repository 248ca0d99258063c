//! Scalar types usable as heuristic scores and search priorities.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{NumCast, Zero};

/// A numeric type a heuristic may return.
///
/// Implemented for `f32`, `f64` and `i64`. Floating point scores are
/// rejected when they are NaN, which is how a non-numeric score surfaces
/// once it has been coerced into a float.
pub trait Score: Copy + Debug + PartialOrd + Zero + NumCast + Send + Sync + 'static {
    /// Total order used by the open list. Only called on valid values.
    fn order(&self, other: &Self) -> Ordering;

    /// `false` for values that cannot take part in an ordering (NaN).
    fn is_valid(&self) -> bool;

    /// Path cost lifted into the score type.
    fn from_path_cost(g: u32) -> Self {
        <Self as NumCast>::from(g).expect("path cost fits every score type")
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Score for f64 {
    fn order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
    fn is_valid(&self) -> bool {
        !self.is_nan()
    }
}

impl Score for f32 {
    fn order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
    fn is_valid(&self) -> bool {
        !self.is_nan()
    }
}

impl Score for i64 {
    fn order(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn is_valid(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_is_invalid() {
        assert!(!f64::NAN.is_valid());
        assert!(!f32::NAN.is_valid());
        assert!(f64::INFINITY.is_valid());
        assert!(7i64.is_valid());
    }

    #[test]
    fn path_cost_lifts() {
        assert_eq!(f64::from_path_cost(12), 12.0);
        assert_eq!(i64::from_path_cost(3), 3);
        assert_eq!(f32::from_path_cost(0), 0.0);
    }
}
