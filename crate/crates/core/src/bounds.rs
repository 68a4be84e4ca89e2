//! Upper bounds for constraints on a ball and the degree/coefficient schedule
//! for the univariate multipliers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::poly::{f64_to_rational, rational_to_f64, ExactPoly, Field, FloatPoly, Poly, QuadNum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid of {0} points exceeds the limit of 10^7")]
    GridTooLarge(u128),
}

/// `||g||_2 (1 + r^2)^(d/2)` with `d = deg g`, an upper bound for `g` on the
/// closed ball of radius `r` around the origin. Constants return `|g|`.
pub fn ball_bound<C: Field>(g: &Poly<C>, r: f64) -> f64 {
    let d = g.degree();
    if d == 0 {
        return g.constant_term().to_f64().abs();
    }
    let norm = g.weighted_norm(d).expect("degree matches");
    norm * (1.0 + r * r).powf(d as f64 / 2.0)
}

/// The ball bound rounded up to a multiple of `1/den`, certified exactly:
/// the returned `k/den` satisfies `(k/den)^2 >= ||g||^2 (1 + r^2)^d`.
/// Needs `r^2` and the squared norm to be rational.
pub fn ball_bound_rational(g: &ExactPoly, r: &QuadNum, den: u64) -> Option<BigRational> {
    let d = g.degree();
    let den_q = BigRational::from_integer(BigInt::from(den));
    if d == 0 {
        let c = g.constant_term();
        let v = c.as_rational()?.abs();
        return Some(ceil_multiple(&v, &den_q));
    }
    let r2 = r.square();
    let r2 = r2.as_rational()?.clone();
    let n2 = g.weighted_norm_squared(d).ok()?;
    let n2 = n2.as_rational()?.clone();
    let target = n2 * pow(&(BigRational::one() + r2), d);
    // Smallest k with k^2 >= target * den^2.
    let scaled = target * &den_q * &den_q;
    let ceil = ceil_int(&scaled);
    let mut k = ceil.sqrt();
    while &k * &k < ceil {
        k += 1;
    }
    Some(BigRational::new(k, BigInt::from(den)))
}

fn ceil_int(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

fn ceil_multiple(v: &BigRational, den: &BigRational) -> BigRational {
    (v * den).ceil() / den
}

fn pow(b: &BigRational, e: u32) -> BigRational {
    num_traits::pow(b.clone(), e as usize)
}

/// Degree and coefficient of `rho(u) = c u^(2d)` for one constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEntry {
    pub d: u32,
    pub c: BigRational,
    /// The real lower bound `d_hat` on the degree.
    pub d_hat: f64,
}

/// Smallest integer `d >= 0` with `(1 + |delta|/U)^(2d) >= 4(m+1)U(eps - M)/(|delta| eps)`,
/// decided in exact rational arithmetic, and `c = eps / (4(m+1) U^(2d+1))`.
pub fn rho_schedule(
    eps: &BigRational,
    m_val: &BigRational,
    delta: &BigRational,
    u: &BigRational,
    m: usize,
) -> Result<RhoEntry, BoundsError> {
    if !eps.is_positive() {
        return Err(BoundsError::Domain("eps must be positive".into()));
    }
    if m_val.is_positive() {
        return Err(BoundsError::Domain("M must be nonpositive".into()));
    }
    if !delta.is_negative() {
        return Err(BoundsError::Domain("delta must be negative".into()));
    }
    if !u.is_positive() {
        return Err(BoundsError::Domain("U must be positive".into()));
    }
    if m == 0 {
        return Err(BoundsError::Domain("need at least one constraint".into()));
    }
    let four_m1 = BigRational::from_integer(BigInt::from(4 * (m as u64 + 1)));
    let ad = delta.abs();
    let target = &four_m1 * u * (eps - m_val) / (&ad * eps);
    let base = BigRational::one() + &ad / u;
    let d_hat = (rational_to_f64(&target).ln()) / (2.0 * rational_to_f64(&base).ln());

    let base2 = &base * &base;
    let holds = |d: u32| pow(&base2, d) >= target;
    let mut d = if d_hat.is_finite() && d_hat > 1.0 { d_hat.floor() as u32 - 1 } else { 0 };
    while d > 0 && holds(d) {
        d -= 1;
    }
    while !holds(d) {
        d += 1;
    }
    let c = eps / (four_m1 * pow(u, 2 * d + 1));
    Ok(RhoEntry { d, c, d_hat })
}

/// `rho_schedule` for binary64 inputs, converted exactly.
pub fn rho_schedule_f64(eps: f64, m_val: f64, delta: f64, u: f64, m: usize) -> Result<RhoEntry, BoundsError> {
    let conv = |x: f64, name: &str| f64_to_rational(x).ok_or_else(|| BoundsError::Domain(format!("{name} is not finite")));
    rho_schedule(&conv(eps, "eps")?, &conv(m_val, "M")?, &conv(delta, "delta")?, &conv(u, "U")?, m)
}

/// Maximum of `g` over the points of a regular `res^n` grid on `[-r, r]^n`
/// that lie in the ball of radius `r`. A lower bound for the true maximum.
pub fn grid_max_oracle(g: &FloatPoly, r: f64, res: usize) -> Result<f64, BoundsError> {
    let n = g.nvars();
    let total = (res as u128).saturating_pow(n as u32);
    if total > 10_000_000 {
        return Err(BoundsError::GridTooLarge(total));
    }
    if res == 0 {
        return Err(BoundsError::Domain("resolution must be positive".into()));
    }
    let coord = |i: usize| if res == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (res - 1) as f64 };
    let mut idx = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    let mut point = vec![0.0; n];
    loop {
        for (x, &i) in point.iter_mut().zip(&idx) {
            *x = coord(i);
        }
        if point.iter().map(|x| x * x).sum::<f64>() <= r * r * (1.0 + 1e-12) {
            best = best.max(g.evaluate_f64(&point).expect("arity"));
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(best);
            }
            idx[k] += 1;
            if idx[k] < res {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `rho(u) = c u^(2d)` as a univariate polynomial.
pub fn rho_polynomial(entry: &RhoEntry) -> ExactPoly {
    let m = crate::poly::Monomial::new(vec![2 * entry.d]);
    Poly::monomial(m, QuadNum::rational(entry.c.clone()))
}
