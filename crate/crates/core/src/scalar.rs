//! Scalar traits the generic algebra is written against.
//!
//! Cyclotomic elements and Newton polygons are generic over their coefficient
//! type. Anything `num-traits` calls a signed number works for the ring
//! operations (including `f64` for quick numerical experiments); valuations
//! and integrality need an [`ExactScalar`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialEq + Num + Signed + FromPrimitive + Send + Sync {}

impl<T> Scalar for T where T: Clone + Debug + PartialEq + Num + Signed + FromPrimitive + Send + Sync {}

/// Scalars with a total order on the values that occur (slopes).
pub trait OrderedScalar: Scalar + PartialOrd {}

impl<T> OrderedScalar for T where T: Scalar + PartialOrd {}

/// Exact scalars: integrality and reduction mod p are decidable.
pub trait ExactScalar: Scalar {
    fn is_integral(&self) -> bool;

    /// Residue mod p of an integral value; `None` otherwise.
    fn residue_mod(&self, p: u32) -> Option<u32>;

    /// self / p when the quotient is representable exactly.
    fn div_exact(&self, p: u32) -> Option<Self>;

    fn to_rational(&self) -> BigRational;
}

impl ExactScalar for BigRational {
    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn residue_mod(&self, p: u32) -> Option<u32> {
        self.is_integer().then(|| {
            self.numer()
                .mod_floor(&BigInt::from(p))
                .to_u32()
                .expect("residue below p")
        })
    }

    fn div_exact(&self, p: u32) -> Option<Self> {
        Some(self / BigRational::from_integer(BigInt::from(p)))
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

impl ExactScalar for BigInt {
    fn is_integral(&self) -> bool {
        true
    }

    fn residue_mod(&self, p: u32) -> Option<u32> {
        self.mod_floor(&BigInt::from(p)).to_u32()
    }

    fn div_exact(&self, p: u32) -> Option<Self> {
        let (q, r) = self.div_rem(&BigInt::from(p));
        r.is_zero().then_some(q)
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
}
