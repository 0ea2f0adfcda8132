use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type usable for transition probabilities.
///
/// Floats are used for model checking; exact rationals make learned
/// probabilities checkable without rounding.
pub trait Scalar:
    Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}
