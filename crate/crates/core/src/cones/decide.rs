use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::param::{cone_param, recover_witness, ConeParam};
use super::witness::{GramWitness, SomsWitness, Witness};
use super::{ConeClass, ConeError};
use crate::poly::{format_poly, default_names, ExactPoly, Field, Monomial, Poly, QuadNum, Scalar};
use crate::solver::{solve_lp, solve_socp, Block, ConicProblem, SocpSettings, Status};

#[derive(Debug, Clone, PartialEq)]
pub enum DsosOutcome {
    Feasible(GramWitness<QuadNum>),
    /// No diagonally dominant Gram matrix exists over the basis; `bound` is
    /// the positive phase-1 optimum that proves it.
    Infeasible { bound: QuadNum },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SdsosOutcome {
    Found(GramWitness<f64>),
    NotFound,
    NonConverged,
}

/// Present iff every term of `p` is an even monomial with a nonnegative
/// coefficient.
pub fn soms_check<C: Field>(p: &Poly<C>) -> Option<SomsWitness<C>> {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        if !m.is_even() || c.sign(0.0) == Ordering::Less {
            return None;
        }
        terms.push((m.clone(), c.clone()));
    }
    Some(SomsWitness { terms })
}

/// All monomials of degree at most `ceil(deg p / 2)` in the variables that
/// occur in `p`.
pub fn default_basis<C: Scalar>(p: &Poly<C>) -> Vec<Monomial> {
    let support = p.support();
    let half = p.degree().div_ceil(2);
    crate::poly::monomials_up_to(support.len(), half)
        .into_iter()
        .map(|m| {
            let mut e = vec![0u32; p.nvars()];
            for (k, &v) in support.iter().enumerate() {
                e[v] = m.exponents()[k];
            }
            Monomial::new(e)
        })
        .collect()
}

/// Coefficient matching `sum_k w_k column_k = p` over the monomials the
/// parameterization can produce.
fn matching_system<C: Field>(p: &Poly<C>, param: &ConeParam) -> Result<ConicProblem<C>, ConeError> {
    let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
    for col in &param.columns {
        for (m, _) in &col.terms {
            let next = index.len();
            index.entry(m.clone()).or_insert(next);
        }
    }
    for (m, _) in p.terms() {
        if !index.contains_key(m) {
            let names = default_names(p.nvars());
            let mono = format_poly(&Poly::<QuadNum>::monomial(m.clone(), QuadNum::one()), &names);
            return Err(ConeError::BasisTooSmall(mono));
        }
    }
    let mut rows: Vec<Vec<(usize, C)>> = vec![Vec::new(); index.len()];
    for (k, col) in param.columns.iter().enumerate() {
        for (m, v) in &col.terms {
            rows[index[m]].push((k, C::from_i64(*v)));
        }
    }
    let mut rhs = vec![C::zero(); index.len()];
    for (m, i) in &index {
        rhs[*i] = p.coeff(m);
    }
    Ok(ConicProblem {
        ncols: param.columns.len(),
        rows,
        rhs,
        blocks: param
            .blocks
            .iter()
            .map(|(r, k)| Block {
                range: r.clone(),
                kind: *k,
            })
            .collect(),
        objective: None,
    })
}

fn check_basis<C: Scalar>(p: &Poly<C>, basis: &[Monomial]) -> Result<(), ConeError> {
    match basis.iter().find(|m| m.nvars() != p.nvars()) {
        Some(m) => Err(ConeError::BasisArity(m.nvars(), p.nvars())),
        None => Ok(()),
    }
}

/// Exact decision of DSOS membership over `basis` (default: all monomials of
/// degree at most `ceil(deg p / 2)`), by rational simplex.
pub fn dsos_decide(p: &ExactPoly, basis: Option<Vec<Monomial>>) -> Result<DsosOutcome, ConeError> {
    let basis = basis.unwrap_or_else(|| default_basis(p));
    check_basis(p, &basis)?;
    let param = cone_param(ConeClass::Dsos, basis)?;
    let prob = matching_system(p, &param)?;
    let out = solve_lp(&prob).expect("parameterization yields a linear problem");
    match out.status {
        Status::Feasible(w) => match recover_witness(&param, &w) {
            Witness::Gram(g) => Ok(DsosOutcome::Feasible(g)),
            _ => unreachable!("DSOS parameterization yields a Gram witness"),
        },
        Status::Infeasible { bound } => Ok(DsosOutcome::Infeasible { bound }),
        s => unreachable!("feasibility LP returned {s:?}"),
    }
}

/// Numeric search for an SDD Gram matrix over `basis` with the SOCP solver.
pub fn sdsos_decide<C: Field>(
    p: &Poly<C>,
    basis: Option<Vec<Monomial>>,
    settings: &SocpSettings,
) -> Result<SdsosOutcome, ConeError> {
    let basis = basis.unwrap_or_else(|| default_basis(p));
    check_basis(p, &basis)?;
    let param = cone_param(ConeClass::Sdsos, basis)?;
    let prob = matching_system(&p.to_float(), &param)?;
    let out = solve_socp(&prob, settings).expect("parameterization yields a valid problem");
    match out.status {
        Status::Feasible(w) => match recover_witness(&param, &w) {
            Witness::Gram(g) => Ok(SdsosOutcome::Found(g)),
            _ => unreachable!("SDSOS parameterization yields a Gram witness"),
        },
        Status::NonConverged => Ok(SdsosOutcome::NonConverged),
        _ => Ok(SdsosOutcome::NotFound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{verify_witness, GramFlavor};
    use crate::poly::parse;

    fn p(text: &str, n: usize) -> ExactPoly {
        parse(text, &default_names(n)).unwrap()
    }

    #[test]
    fn soms_decisions() {
        assert!(soms_check(&p("1/4 + x1^2 + 3*x1^2*x2^4", 2)).is_some());
        assert!(soms_check(&p("x1", 1)).is_none());
        assert!(soms_check(&p("-x1^2", 1)).is_none());
        let w = soms_check(&p("0", 1)).unwrap();
        assert!(w.terms.is_empty());
    }

    #[test]
    fn dsos_perfect_square() {
        let q = p("x1^2 + 2*x1*x2 + x2^2", 2);
        let basis = vec![Monomial::var(2, 0), Monomial::var(2, 1)];
        match dsos_decide(&q, Some(basis)).unwrap() {
            DsosOutcome::Feasible(g) => {
                let one = QuadNum::one();
                assert_eq!(g.q, vec![vec![one.clone(), one.clone()], vec![one.clone(), one]]);
                let rep = verify_witness(&q, &Witness::Gram(g), 0.0);
                assert!(rep.ok, "{:?}", rep.issues);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn dsos_rejects_shifted_square() {
        let q = p("4 - 4*x1 - 4*x2 + x1^2 + 2*x1*x2 + x2^2", 2);
        let basis = default_basis(&q);
        assert_eq!(basis.len(), 3);
        match dsos_decide(&q, Some(basis)).unwrap() {
            DsosOutcome::Infeasible { bound } => assert!(bound.sign(0.0) == Ordering::Greater),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn dsos_zero_and_small_basis() {
        match dsos_decide(&p("0", 2), None).unwrap() {
            DsosOutcome::Feasible(g) => assert!(g.q.iter().flatten().all(|v| v.is_zero())),
            o => panic!("{o:?}"),
        }
        let err = dsos_decide(&p("x1^4", 1), Some(vec![Monomial::var(1, 0)])).unwrap_err();
        assert!(matches!(err, ConeError::BasisTooSmall(_)));
    }

    #[test]
    fn sdsos_single_block() {
        let q = p("x1^2 + x2^2 + 1.8*x1*x2", 2);
        let basis = vec![Monomial::var(2, 0), Monomial::var(2, 1)];
        match sdsos_decide(&q, Some(basis), &SocpSettings::default()).unwrap() {
            SdsosOutcome::Found(g) => {
                assert_eq!(g.flavor, GramFlavor::Sdd);
                let rep = verify_witness(&q.to_float(), &Witness::Gram(g), 1e-8);
                assert!(rep.ok, "{:?}", rep.issues);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn sdsos_rejects_shifted_square() {
        let q = p("4 - 4*x1 - 4*x2 + x1^2 + 2*x1*x2 + x2^2", 2);
        let out = sdsos_decide(&q, None, &SocpSettings::default()).unwrap();
        assert_eq!(out, SdsosOutcome::NotFound);
    }

    #[test]
    fn sdsos_accepts_soms() {
        let q = p("2 + x1^2 + 3*x2^4 + x1^2*x2^2", 2);
        let out = sdsos_decide(&q, None, &SocpSettings::default()).unwrap();
        assert!(matches!(out, SdsosOutcome::Found(_)), "{out:?}");
    }
}
