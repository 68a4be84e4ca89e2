use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::monomial::Monomial;
use super::quad::QuadNum;
use super::scalar::Scalar;
use super::PolyError;

/// Sparse multivariate polynomial with coefficients in `C`.
///
/// Terms are kept in a graded-lex ordered map and no zero coefficient is
/// ever stored.
#[derive(Clone, PartialEq)]
pub struct Poly<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

/// Exact polynomial over Q(sqrt(s)).
pub type ExactPoly = Poly<QuadNum>;
/// Floating mirror.
pub type FloatPoly = Poly<f64>;

impl<C: Scalar> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The variable `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), C::one());
        p
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity differs from ring");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// Adds `c * m` in place, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Squarefree radicand shared by all coefficients (0 when rational).
    pub fn radicand(&self) -> Result<u64, PolyError> {
        let mut root = 0;
        for c in self.terms.values() {
            let r = c.radicand();
            if r != 0 {
                if root != 0 && root != r {
                    return Err(PolyError::RadicandMismatch(root, r));
                }
                root = r;
            }
        }
        Ok(root)
    }

    /// Checks that `self` and `rhs` live in the same ring.
    pub fn check_ring(&self, rhs: &Self) -> Result<(), PolyError> {
        if self.nvars != rhs.nvars {
            return Err(PolyError::VarCountMismatch(self.nvars, rhs.nvars));
        }
        let (a, b) = (self.radicand()?, rhs.radicand()?);
        if a != 0 && b != 0 && a != b {
            return Err(PolyError::RadicandMismatch(a, b));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "variable-count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "variable-count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul(k));
        }
        out
    }

    /// Exact product. Panics on a variable-count mismatch; see
    /// [`Poly::multiply`] for the checked form.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars, "variable-count mismatch");
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn multiply(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_ring(rhs)?;
        Ok(self.mul(rhs))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    /// Exact evaluation by direct summation of the terms.
    pub fn evaluate(&self, point: &[C]) -> Result<C, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength(self.nvars, point.len()));
        }
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t = t.mul(x);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Floating evaluation with compensated (Neumaier) summation of the terms.
    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength(self.nvars, point.len()));
        }
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (x, &e) in point.iter().zip(m.exponents()) {
                t *= x.powi(e as i32);
            }
            let s = sum + t;
            if sum.abs() >= t.abs() {
                comp += (sum - s) + t;
            } else {
                comp += (t - s) + sum;
            }
            sum = s;
        }
        Ok(sum + comp)
    }

    /// Composition `p(args[0], ..., args[s-1])`, fully expanded. `self` must
    /// have exactly `args.len()` variables and all arguments share a ring.
    pub fn substitute(&self, args: &[Poly<C>]) -> Result<Poly<C>, PolyError> {
        if args.len() != self.nvars {
            return Err(PolyError::ArityMismatch(self.nvars, args.len()));
        }
        let target = match args.first() {
            Some(a) => a.nvars,
            None => {
                // Zero-variate polynomial: a constant with no ring to map to.
                return Err(PolyError::ArityMismatch(0, 0));
            }
        };
        for a in args {
            a.check_ring(&args[0])?;
        }
        let mut root = 0;
        for a in args.iter().chain(std::iter::once(self)) {
            let r = a.radicand()?;
            if r != 0 {
                if root != 0 && root != r {
                    return Err(PolyError::RadicandMismatch(root, r));
                }
                root = r;
            }
        }
        let max_exp: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|m| m.exponents()[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<Poly<C>>> = args
            .iter()
            .zip(&max_exp)
            .map(|(a, &e)| {
                let mut v = Vec::with_capacity(e as usize + 1);
                v.push(Poly::one(target));
                for k in 1..=e as usize {
                    let next = v[k - 1].mul(a);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }

    /// Maps coefficients into another scalar type, dropping any that vanish.
    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn to_float(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Re-embeds the polynomial into a ring with more variables; `positions[i]`
    /// is the index of variable `i` in the target ring.
    pub fn embed(&self, target_nvars: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.nvars);
        let mut out = Self::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; target_nvars];
            for (i, &p) in positions.iter().enumerate() {
                e[p] += m.exponents()[i];
            }
            out.add_term(Monomial::new(e), c.clone());
        }
        out
    }

    /// Variables that occur in at least one term.
    pub fn support(&self) -> Vec<usize> {
        let mut used = vec![false; self.nvars];
        for m in self.terms.keys() {
            for i in m.support() {
                used[i] = true;
            }
        }
        (0..self.nvars).filter(|&i| used[i]).collect()
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Squared weighted norm `sum_a a_1!...a_n!(d-|a|)!/d! * g_a^2`, computed
    /// in the coefficient ring with exact integer factorials.
    pub fn weighted_norm_squared(&self, d: u32) -> Result<C, PolyError> {
        if d == 0 || d < self.degree() {
            return Err(PolyError::NormDegree(d, self.degree()));
        }
        let d_fact = factorial(d);
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut num = factorial(d - m.degree());
            for &e in m.exponents() {
                num *= factorial(e);
            }
            let w = C::from_rational(&BigRational::new(num, d_fact.clone()));
            acc = acc.add(&w.mul(&c.mul(c)));
        }
        Ok(acc)
    }

    /// Weighted 2-norm used by the ball bound.
    pub fn weighted_norm(&self, d: u32) -> Result<f64, PolyError> {
        Ok(self.weighted_norm_squared(d)?.to_f64().max(0.0).sqrt())
    }
}

pub(crate) fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

impl Poly<QuadNum> {
    /// Constant polynomial from a rational.
    pub fn from_rational(nvars: usize, q: BigRational) -> Self {
        Self::constant(nvars, QuadNum::rational(q))
    }
}

impl<C: Scalar> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = super::default_names(self.nvars);
        write!(f, "{}", super::format_poly(self, &names))
    }
}

impl<C: Scalar> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = super::default_names(self.nvars);
        write!(f, "{}", super::format_poly(self, &names))
    }
}
