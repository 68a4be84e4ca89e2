use std::cmp::Ordering;

use crate::poly::{Field, Monomial, Poly, Scalar};

/// `sum_k c_k x^(alpha_k) + c_beta x^beta` where the `alpha_k` are even
/// vertices of a simplex and `beta = sum_k lambda_k alpha_k` lies inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<C> {
    pub vertices: Vec<(Monomial, C)>,
    pub inner: Monomial,
    pub inner_coeff: C,
    pub lambda: Vec<C>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitWitness<C> {
    pub circuits: Vec<Circuit<C>>,
}

impl<C: Scalar> CircuitWitness<C> {
    pub fn polynomial(&self, nvars: usize) -> Poly<C> {
        let mut p = Poly::zero(nvars);
        for c in &self.circuits {
            for (m, v) in &c.vertices {
                p.add_term(m.clone(), v.clone());
            }
            p.add_term(c.inner.clone(), c.inner_coeff.clone());
        }
        p
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> CircuitWitness<D> {
        CircuitWitness {
            circuits: self
                .circuits
                .iter()
                .map(|c| Circuit {
                    vertices: c.vertices.iter().map(|(m, v)| (m.clone(), f(v))).collect(),
                    inner: c.inner.clone(),
                    inner_coeff: f(&c.inner_coeff),
                    lambda: c.lambda.iter().map(&f).collect(),
                })
                .collect(),
        }
    }
}

/// Structural checks plus the circuit-number test: with
/// `theta = prod_k (c_k / lambda_k)^lambda_k`, the circuit is nonnegative iff
/// `|c_beta| <= theta`, or `c_beta >= -theta` when `beta` is even.
///
/// The circuit number is irrational in general and is compared in binary64
/// with relative slack `1e-12` (plus `tol`).
pub fn check_circuit<C: Field>(c: &Circuit<C>, tol: f64) -> Result<(), String> {
    let k = c.vertices.len();
    if k == 0 || c.lambda.len() != k {
        return Err("need one barycentric weight per vertex".into());
    }
    let nvars = c.inner.nvars();
    for (m, v) in &c.vertices {
        if m.nvars() != nvars {
            return Err("vertex arity differs from the inner exponent".into());
        }
        if !m.is_even() {
            return Err(format!("vertex {m:?} is not even"));
        }
        if v.sign(tol) != Ordering::Greater {
            return Err(format!("vertex coefficient {v} is not positive"));
        }
    }
    let mut total = C::zero();
    for l in &c.lambda {
        if l.sign(tol) != Ordering::Greater {
            return Err("barycentric weights must be positive".into());
        }
        total = total.add(l);
    }
    if total.cmp_with(&C::one(), tol) != Ordering::Equal {
        return Err("barycentric weights do not sum to 1".into());
    }
    for i in 0..nvars {
        let mut s = C::zero();
        for ((m, _), l) in c.vertices.iter().zip(&c.lambda) {
            s = s.add(&l.mul(&C::from_i64(m.exponents()[i] as i64)));
        }
        if s.cmp_with(&C::from_i64(c.inner.exponents()[i] as i64), tol) != Ordering::Equal {
            return Err("inner exponent is not the stated convex combination".into());
        }
    }
    if !affinely_independent::<C>(&c.vertices, tol) {
        return Err("vertices are affinely dependent".into());
    }
    let mut log_theta = 0.0f64;
    for ((_, v), l) in c.vertices.iter().zip(&c.lambda) {
        let (v, l) = (v.to_f64(), l.to_f64());
        log_theta += l * (v / l).ln();
    }
    let theta = log_theta.exp();
    let cb = c.inner_coeff.to_f64();
    let slack = 1e-12 * theta + tol;
    let ok = if c.inner.is_even() {
        cb >= -theta - slack
    } else {
        cb.abs() <= theta + slack
    };
    if ok {
        Ok(())
    } else {
        Err(format!("inner coefficient {cb} exceeds the circuit number {theta}"))
    }
}

fn affinely_independent<C: Field>(vertices: &[(Monomial, C)], tol: f64) -> bool {
    let k = vertices.len();
    if k <= 1 {
        return true;
    }
    let base = vertices[0].0.exponents();
    let mut rows: Vec<Vec<C>> = vertices[1..]
        .iter()
        .map(|(m, _)| {
            m.exponents()
                .iter()
                .zip(base)
                .map(|(a, b)| C::from_i64(*a as i64 - *b as i64))
                .collect()
        })
        .collect();
    let cols = base.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col].sign(tol) != Ordering::Equal) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].div(&rows[rank][col]);
                for j in 0..cols {
                    let v = f.mul(&rows[rank][j]);
                    rows[r][j] = rows[r][j].sub(&v);
                }
            }
        }
        rank += 1;
    }
    rank == k - 1
}
