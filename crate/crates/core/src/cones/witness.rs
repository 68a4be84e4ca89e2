use std::cmp::Ordering;

use super::circuit::{check_circuit, CircuitWitness};
use crate::poly::{Field, Monomial, Poly, Scalar};

/// `p = sum lambda * x^(2 alpha)`; stored as `(2 alpha, lambda)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SomsWitness<C> {
    pub terms: Vec<(Monomial, C)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramFlavor {
    /// Diagonally dominant.
    Dd,
    /// Scaled diagonally dominant, given as a sum of 2x2 PSD blocks.
    Sdd,
    /// Plain PSD; accepted from external SOS solvers.
    Psd,
}

impl GramFlavor {
    pub fn name(self) -> &'static str {
        match self {
            GramFlavor::Dd => "dd",
            GramFlavor::Sdd => "sdd",
            GramFlavor::Psd => "psd",
        }
    }
}

/// A PSD block `[[di, offdiag], [offdiag, dj]]` on rows `i, j` of the Gram
/// matrix. `i == j` denotes the 1x1 block `[di]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SddBlock<C> {
    pub i: usize,
    pub j: usize,
    pub di: C,
    pub dj: C,
    pub offdiag: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramWitness<C> {
    pub basis: Vec<Monomial>,
    pub q: Vec<Vec<C>>,
    pub flavor: GramFlavor,
    pub blocks: Vec<SddBlock<C>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness<C> {
    Soms(SomsWitness<C>),
    Gram(GramWitness<C>),
    Circuit(CircuitWitness<C>),
    /// Declared SAGE membership; nothing to check.
    Sage,
}

impl<C: Scalar> Witness<C> {
    /// The polynomial the witness represents, in a ring of `nvars` variables.
    pub fn polynomial(&self, nvars: usize) -> Poly<C> {
        match self {
            Witness::Soms(w) => Poly::from_terms(nvars, w.terms.iter().cloned()),
            Witness::Gram(g) => {
                let mut p = Poly::zero(nvars);
                for (i, row) in g.q.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        p.add_term(g.basis[i].mul(&g.basis[j]), v.clone());
                    }
                }
                p
            }
            Witness::Circuit(c) => c.polynomial(nvars),
            Witness::Sage => Poly::zero(nvars),
        }
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Witness<D> {
        match self {
            Witness::Soms(w) => Witness::Soms(SomsWitness {
                terms: w.terms.iter().map(|(m, c)| (m.clone(), f(c))).collect(),
            }),
            Witness::Gram(g) => Witness::Gram(GramWitness {
                basis: g.basis.clone(),
                q: g.q.iter().map(|r| r.iter().map(&f).collect()).collect(),
                flavor: g.flavor,
                blocks: g
                    .blocks
                    .iter()
                    .map(|b| SddBlock {
                        i: b.i,
                        j: b.j,
                        di: f(&b.di),
                        dj: f(&b.dj),
                        offdiag: f(&b.offdiag),
                    })
                    .collect(),
            }),
            Witness::Circuit(c) => Witness::Circuit(c.map(&f)),
            Witness::Sage => Witness::Sage,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Witness::Soms(_) => "soms",
            Witness::Gram(g) => g.flavor.name(),
            Witness::Circuit(_) => "circuit",
            Witness::Sage => "sage",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessReport<C: Scalar> {
    /// Reconstruction matches and every side condition holds.
    pub ok: bool,
    /// False when the cone is unsupported and membership was not examined.
    pub checked: bool,
    /// Reconstruction minus the witnessed polynomial.
    pub residual: Poly<C>,
    pub issues: Vec<String>,
}

/// Re-checks a witness against `p`. Over an exact field the residual must
/// vanish identically and `tol` is ignored; in floating point every residual
/// coefficient and side condition is allowed an error of `tol`.
pub fn verify_witness<C: Field>(p: &Poly<C>, w: &Witness<C>, tol: f64) -> WitnessReport<C> {
    let mut issues = Vec::new();
    let nvars = p.nvars();
    let arity_ok = match w {
        Witness::Soms(s) => s.terms.iter().all(|(m, _)| m.nvars() == nvars),
        Witness::Gram(g) => g.basis.iter().all(|m| m.nvars() == nvars),
        Witness::Circuit(c) => c.circuits.iter().all(|k| k.inner.nvars() == nvars),
        Witness::Sage => true,
    };
    if !arity_ok {
        return WitnessReport {
            ok: false,
            checked: true,
            residual: p.neg(),
            issues: vec!["witness monomials have the wrong number of variables".into()],
        };
    }
    let residual = w.polynomial(nvars).sub(p);
    let mut checked = true;
    match w {
        Witness::Soms(s) => {
            for (m, c) in &s.terms {
                if !m.is_even() {
                    issues.push(format!("exponent {m:?} is not even"));
                }
                if c.sign(tol) == Ordering::Less {
                    issues.push(format!("negative weight {c} on {m:?}"));
                }
            }
        }
        Witness::Gram(g) => check_gram(g, tol, &mut issues),
        Witness::Circuit(c) => {
            for (k, circ) in c.circuits.iter().enumerate() {
                if let Err(e) = check_circuit(circ, tol) {
                    issues.push(format!("circuit {}: {e}", k + 1));
                }
            }
        }
        Witness::Sage => {
            checked = false;
            issues.push("unchecked: unsupported cone".into());
        }
    }
    let residual_ok = if C::is_exact() {
        residual.is_zero()
    } else {
        residual.max_abs_coeff() <= tol
    };
    if !residual_ok {
        issues.push("reconstruction differs from the polynomial".into());
    }
    WitnessReport {
        ok: residual_ok && issues.iter().all(|s| s.starts_with("unchecked")),
        checked,
        residual,
        issues,
    }
}

fn check_gram<C: Field>(g: &GramWitness<C>, tol: f64, issues: &mut Vec<String>) {
    let n = g.basis.len();
    if g.q.len() != n || g.q.iter().any(|r| r.len() != n) {
        issues.push("Gram matrix shape does not match the basis".into());
        return;
    }
    for i in 0..n {
        for j in i + 1..n {
            if g.q[i][j].cmp_with(&g.q[j][i], tol) != Ordering::Equal {
                issues.push(format!("Gram matrix not symmetric at ({}, {})", i + 1, j + 1));
            }
        }
    }
    match g.flavor {
        GramFlavor::Dd => {
            for i in 0..n {
                let mut off = C::zero();
                for j in 0..n {
                    if j != i {
                        off = off.add(&g.q[i][j].abs());
                    }
                }
                if g.q[i][i].cmp_with(&off, tol) == Ordering::Less {
                    issues.push(format!("row {} is not diagonally dominant", i + 1));
                }
            }
        }
        GramFlavor::Sdd => {
            let mut sum = vec![vec![C::zero(); n]; n];
            for (k, b) in g.blocks.iter().enumerate() {
                if b.i >= n || b.j >= n {
                    issues.push(format!("block {} indexes outside the basis", k + 1));
                    continue;
                }
                if b.i == b.j {
                    if b.di.sign(tol) == Ordering::Less {
                        issues.push(format!("block {} has a negative entry", k + 1));
                    }
                    sum[b.i][b.i] = sum[b.i][b.i].add(&b.di);
                    continue;
                }
                let det = b.di.mul(&b.dj).sub(&b.offdiag.mul(&b.offdiag));
                if b.di.sign(tol) == Ordering::Less
                    || b.dj.sign(tol) == Ordering::Less
                    || det.sign(tol) == Ordering::Less
                {
                    issues.push(format!("block {} is not positive semidefinite", k + 1));
                }
                sum[b.i][b.i] = sum[b.i][b.i].add(&b.di);
                sum[b.j][b.j] = sum[b.j][b.j].add(&b.dj);
                sum[b.i][b.j] = sum[b.i][b.j].add(&b.offdiag);
                sum[b.j][b.i] = sum[b.j][b.i].add(&b.offdiag);
            }
            let mismatch = (0..n).any(|i| (0..n).any(|j| sum[i][j].cmp_with(&g.q[i][j], tol) != Ordering::Equal));
            if mismatch {
                issues.push("blocks do not sum to the Gram matrix".into());
            }
        }
        GramFlavor::Psd => {
            if !psd_check(&g.q, tol) {
                issues.push("Gram matrix is not positive semidefinite".into());
            }
        }
    }
}

/// Symmetric Gaussian elimination without row exchanges: a symmetric matrix
/// is PSD iff every pivot is nonnegative and each zero pivot has a zero row.
pub fn psd_check<C: Field>(q: &[Vec<C>], tol: f64) -> bool {
    let n = q.len();
    let mut a: Vec<Vec<C>> = q.to_vec();
    for k in 0..n {
        match a[k][k].sign(tol) {
            Ordering::Less => return false,
            Ordering::Equal => {
                if (k + 1..n).any(|j| a[k][j].sign(tol) != Ordering::Equal) {
                    return false;
                }
            }
            Ordering::Greater => {
                let piv = a[k][k].clone();
                for i in k + 1..n {
                    if a[i][k].is_zero() {
                        continue;
                    }
                    let f = a[i][k].div(&piv);
                    for j in k..n {
                        let v = f.mul(&a[k][j]);
                        a[i][j] = a[i][j].sub(&v);
                    }
                }
            }
        }
    }
    true
}
