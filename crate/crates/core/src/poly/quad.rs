use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::scalar::{rational_to_f64, Field, Scalar};

/// An element `rat + rad * sqrt(root)` of the real field Q(sqrt(root)).
///
/// `root` is squarefree and at least 2 whenever `rad != 0`; rational values
/// carry `root == 0`. Two values with different nonzero roots cannot be
/// combined.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadNum {
    rat: BigRational,
    rad: BigRational,
    root: u64,
}

impl QuadNum {
    pub fn new(rat: BigRational, rad: BigRational, root: u64) -> Self {
        let mut v = QuadNum { rat, rad, root };
        v.normalize();
        v
    }

    pub fn rational(q: BigRational) -> Self {
        QuadNum {
            rat: q,
            rad: BigRational::zero(),
            root: 0,
        }
    }

    pub fn integer(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The square root of a nonnegative rational, written as `k * sqrt(s)`
    /// with `s` squarefree. Fails for negative input or when the radicand
    /// does not fit a u64 after reduction.
    pub fn sqrt_of(q: &BigRational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        if q.is_zero() {
            return Some(Self::zero());
        }
        // sqrt(a/b) = sqrt(a*b) / b
        let prod = q.numer() * q.denom();
        let prod = prod.to_u64()?;
        let (square, free) = squarefree_split(prod);
        let coef = BigRational::new(BigInt::from(square), q.denom().clone());
        if free == 1 {
            Some(Self::rational(coef))
        } else {
            Some(QuadNum {
                rat: BigRational::zero(),
                rad: coef,
                root: free,
            })
        }
    }

    pub fn rat_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn rad_part(&self) -> &BigRational {
        &self.rad
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn is_rational(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.is_rational() {
            Some(&self.rat)
        } else {
            None
        }
    }

    /// Square of the value, which is rational when the value is a pure
    /// multiple of one square root.
    pub fn square(&self) -> Self {
        Scalar::mul(self, self)
    }

    fn normalize(&mut self) {
        if self.rad.is_zero() {
            self.root = 0;
        } else if self.root == 1 {
            self.rat = &self.rat + &self.rad;
            self.rad = BigRational::zero();
            self.root = 0;
        } else if self.root == 0 {
            self.rad = BigRational::zero();
        }
    }

    fn joint_root(&self, rhs: &Self) -> u64 {
        match (self.root, rhs.root) {
            (0, r) | (r, 0) => r,
            (a, b) if a == b => a,
            (a, b) => panic!("cannot combine values from Q(sqrt({a})) and Q(sqrt({b}))"),
        }
    }

    pub fn checked_compatible(&self, rhs: &Self) -> bool {
        self.root == 0 || rhs.root == 0 || self.root == rhs.root
    }

    pub fn inverse(&self) -> Self {
        assert!(!Scalar::is_zero(self), "division by zero");
        if self.is_rational() {
            return Self::rational(self.rat.recip());
        }
        // 1/(a + b sqrt s) = (a - b sqrt s) / (a^2 - b^2 s)
        let s = BigRational::from_integer(BigInt::from(self.root));
        let den = &self.rat * &self.rat - &self.rad * &self.rad * s;
        QuadNum::new(&self.rat / &den, -(&self.rad / &den), self.root)
    }
}

/// Splits `v` as `k^2 * s` with `s` squarefree.
fn squarefree_split(mut v: u64) -> (u64, u64) {
    let mut square = 1u64;
    let mut free = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= v {
        let mut e = 0;
        while v.is_multiple_of(p) {
            v /= p;
            e += 1;
        }
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    free *= v;
    (square, free)
}

fn rational_sign(q: &BigRational) -> Ordering {
    match q.numer().sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl Scalar for QuadNum {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.rad.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        let root = self.joint_root(rhs);
        QuadNum::new(&self.rat + &rhs.rat, &self.rad + &rhs.rad, root)
    }
    fn sub(&self, rhs: &Self) -> Self {
        let root = self.joint_root(rhs);
        QuadNum::new(&self.rat - &rhs.rat, &self.rad - &rhs.rad, root)
    }
    fn mul(&self, rhs: &Self) -> Self {
        let root = self.joint_root(rhs);
        if self.rad.is_zero() {
            return QuadNum::new(&self.rat * &rhs.rat, &self.rat * &rhs.rad, root);
        }
        if rhs.rad.is_zero() {
            return QuadNum::new(&self.rat * &rhs.rat, &self.rad * &rhs.rat, root);
        }
        // (a + b√s)(c + d√s) = (ac + bds) + (ad + bc)√s
        let s = BigRational::from_integer(BigInt::from(root));
        let rat = &self.rat * &rhs.rat + &self.rad * &rhs.rad * s;
        let rad = &self.rat * &rhs.rad + &self.rad * &rhs.rat;
        QuadNum::new(rat, rad, root)
    }
    fn neg(&self) -> Self {
        QuadNum {
            rat: -&self.rat,
            rad: -&self.rad,
            root: self.root,
        }
    }
    fn from_rational(q: &BigRational) -> Self {
        Self::rational(q.clone())
    }
    fn from_i64(v: i64) -> Self {
        Self::integer(v)
    }
    fn to_f64(&self) -> f64 {
        if self.rad.is_zero() {
            rational_to_f64(&self.rat)
        } else {
            rational_to_f64(&self.rat) + rational_to_f64(&self.rad) * (self.root as f64).sqrt()
        }
    }
    fn radicand(&self) -> u64 {
        self.root
    }
    fn is_exact() -> bool {
        true
    }
    fn display_parts(&self) -> Vec<(bool, Option<String>)> {
        let mut out = Vec::new();
        if !self.rat.is_zero() {
            let mag = self.rat.abs();
            let text = if mag.is_one() { None } else { Some(rational_text(&mag)) };
            out.push((self.rat.is_negative(), text));
        }
        if !self.rad.is_zero() {
            let mag = self.rad.abs();
            let text = if mag.is_one() {
                format!("sqrt({})", self.root)
            } else {
                format!("{}*sqrt({})", rational_text(&mag), self.root)
            };
            out.push((self.rad.is_negative(), Some(text)));
        }
        out
    }
}

pub(crate) fn rational_text(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl Field for QuadNum {
    fn div(&self, rhs: &Self) -> Self {
        if rhs.is_rational() {
            assert!(!rhs.rat.is_zero(), "division by zero");
            return QuadNum::new(&self.rat / &rhs.rat, &self.rad / &rhs.rat, self.root);
        }
        Scalar::mul(self, &rhs.inverse())
    }

    fn sign(&self, _tol: f64) -> Ordering {
        let a = rational_sign(&self.rat);
        let b = rational_sign(&self.rad);
        match (a, b) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            (x, _) => {
                // Opposite signs: compare a^2 with b^2 s.
                let s = BigRational::from_integer(BigInt::from(self.root));
                let lhs = &self.rat * &self.rat;
                let rhs = &self.rad * &self.rad * s;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => x,
                    Ordering::Less => x.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }
}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.checked_compatible(other) {
            Some(Field::sign(&Scalar::sub(self, other), 0.0))
        } else {
            None
        }
    }
}

fn fmt_rational(q: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str(&rational_text(q))
}

impl fmt::Display for QuadNum {
    /// Prints in the polynomial grammar, e.g. `3/2`, `sqrt(2)`,
    /// `1/2 - 3*sqrt(2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rad.is_zero() {
            return fmt_rational(&self.rat, f);
        }
        if !self.rat.is_zero() {
            fmt_rational(&self.rat, f)?;
            if self.rad.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
        } else if self.rad.is_negative() {
            f.write_str("-")?;
        }
        let mag = self.rad.abs();
        if !mag.is_one() {
            fmt_rational(&mag, f)?;
            f.write_str("*")?;
        }
        write!(f, "sqrt({})", self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sqrt_reduces_to_squarefree() {
        let r = QuadNum::sqrt_of(&q(8, 1)).unwrap();
        assert_eq!(r, QuadNum::new(q(0, 1), q(2, 1), 2));
        let r = QuadNum::sqrt_of(&q(1, 2)).unwrap();
        assert_eq!(r, QuadNum::new(q(0, 1), q(1, 2), 2));
        let r = QuadNum::sqrt_of(&q(9, 4)).unwrap();
        assert_eq!(r, QuadNum::ratio(3, 2));
        assert!(QuadNum::sqrt_of(&q(-1, 1)).is_none());
    }

    #[test]
    fn product_rule() {
        let s2 = QuadNum::sqrt_of(&q(2, 1)).unwrap();
        let a = QuadNum::integer(1).add(&s2);
        let b = QuadNum::integer(3).sub(&s2);
        // (1+√2)(3-√2) = 3 - √2 + 3√2 - 2 = 1 + 2√2
        assert_eq!(a.mul(&b), QuadNum::new(q(1, 1), q(2, 1), 2));
        assert_eq!(s2.square(), QuadNum::integer(2));
    }

    #[test]
    fn ordering_is_exact() {
        let s2 = QuadNum::sqrt_of(&q(2, 1)).unwrap();
        // 6 - 4√2 ≈ 0.343 > 0
        let v = QuadNum::integer(6).sub(&QuadNum::integer(4).mul(&s2));
        assert_eq!(v.sign(0.0), Ordering::Greater);
        // 1.414 - √2 < 0
        let w = QuadNum::ratio(1414, 1000).sub(&s2);
        assert_eq!(w.sign(0.0), Ordering::Less);
        assert_eq!(s2.sub(&s2).sign(0.0), Ordering::Equal);
    }

    #[test]
    fn inverse_round_trip() {
        let s2 = QuadNum::sqrt_of(&q(2, 1)).unwrap();
        let a = QuadNum::integer(2).add(&s2);
        assert_eq!(a.mul(&a.inverse()), QuadNum::one());
        assert_eq!(a.div(&a), QuadNum::one());
    }

    #[test]
    fn display_matches_grammar() {
        let s2 = QuadNum::sqrt_of(&q(2, 1)).unwrap();
        assert_eq!(s2.to_string(), "sqrt(2)");
        assert_eq!(QuadNum::ratio(1, 2).sub(&s2.mul(&QuadNum::integer(3))).to_string(), "1/2 - 3*sqrt(2)");
        assert_eq!(s2.neg().to_string(), "-sqrt(2)");
    }
}
