//! Cell types for dynamic-programming tables.

use std::fmt::Debug;

use num_traits::{PrimInt, Signed};

/// A signed integer type used to store table cells.
///
/// The largest value is reserved as the "+infinity" sentinel of minimizing
/// tables and the smallest as the "-infinity" sentinel of maximizing ones.
/// Arithmetic happens in `i64`; cells are narrowed only when stored.
pub trait DpValue: PrimInt + Signed + Debug + Send + Sync + 'static {
    fn wide(self) -> i64 {
        self.to_i64().expect("primitive signed integers fit in i64")
    }

    /// Narrows a finite value. Panics if it collides with a sentinel.
    fn narrow(x: i64) -> Self {
        let v = Self::from(x).expect("table value out of range for the cell type");
        assert!(
            v != Self::max_value() && v != Self::min_value(),
            "table value hits a sentinel"
        );
        v
    }

    /// Largest finite value a cell can hold.
    fn finite_limit() -> i64 {
        Self::max_value().wide() - 1
    }
}

impl<T: PrimInt + Signed + Debug + Send + Sync + 'static> DpValue for T {}
