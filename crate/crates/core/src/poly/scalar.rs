use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Coefficient arithmetic shared by the exact and floating polynomial rings.
///
/// Methods take references so that big-number coefficients are not cloned on
/// every operation.
pub trait Scalar: Clone + Debug + Display + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// Squarefree radicand of the quadratic extension this value lives in
    /// (0 when the value is rational or floating).
    fn radicand(&self) -> u64 {
        0
    }

    /// True when arithmetic in this type is exact.
    fn is_exact() -> bool;

    /// Signed summands used by the polynomial printer: `(negative, magnitude)`
    /// where a magnitude of `None` stands for a unit factor.
    fn display_parts(&self) -> Vec<(bool, Option<String>)>;
}

/// An ordered field: what the simplex method and the witness checks need.
pub trait Field: Scalar {
    /// Panics on division by zero.
    fn div(&self, rhs: &Self) -> Self;

    /// Sign of the value. Floating implementations treat `|x| <= tol` as zero;
    /// exact implementations ignore `tol`.
    fn sign(&self, tol: f64) -> Ordering;

    fn abs(&self) -> Self {
        if self.sign(0.0) == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    fn cmp_with(&self, other: &Self, tol: f64) -> Ordering {
        self.sub(other).sign(tol)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_exact() -> bool {
        false
    }
    fn display_parts(&self) -> Vec<(bool, Option<String>)> {
        let mag = self.abs();
        let text = if mag == 1.0 { None } else { Some(fmt_f64(mag)) };
        vec![(*self < 0.0, text)]
    }
}

/// Shortest round-trip text for a float; exponent form outside [1e-4, 1e15).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl Field for f64 {
    fn div(&self, rhs: &Self) -> Self {
        assert!(*rhs != 0.0, "division by zero");
        self / rhs
    }
    fn sign(&self, tol: f64) -> Ordering {
        if self.abs() <= tol {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Nearest binary64 value of a rational.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Only reached when the value overflows the binary64 range.
        if q.numer().sign() == num_bigint::Sign::Minus {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite binary64 number.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
