use std::collections::HashMap;

use super::{CertificateTemplate, ProblemSpec, Slot};
use crate::cones::{cone_param, ConeClass, ConeError, ConeParam};
use crate::poly::{binomial, monomials_up_to, ExactPoly, Monomial, Poly, QuadNum, Scalar};
use crate::solver::{Block, ConicProblem};

/// Columns of one slot inside the assembled problem.
#[derive(Debug, Clone)]
pub struct SlotColumns {
    pub offset: usize,
    pub param: ConeParam,
}

/// Coefficient matching of the expanded template against `p`.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub problem: ConicProblem<QuadNum>,
    pub slots: Vec<SlotColumns>,
    /// Number of monomials up to the expansion degree. Rows whose two sides
    /// are both empty are left out of `problem`.
    pub nominal_rows: u128,
    /// A monomial of `p` that no column can produce, if any: the template is
    /// infeasible at this degree without solving anything.
    pub unreachable: Option<Monomial>,
}

/// Expands `alpha(args) * multiplier` one slot-monomial at a time, caching
/// products so that each prefix is multiplied out once.
pub(crate) struct Composer<'a> {
    slot: &'a Slot,
    raw: HashMap<Monomial, ExactPoly>,
    full: HashMap<Monomial, ExactPoly>,
}

impl<'a> Composer<'a> {
    pub(crate) fn new(slot: &'a Slot) -> Self {
        Composer {
            slot,
            raw: HashMap::new(),
            full: HashMap::new(),
        }
    }

    fn raw(&mut self, m: &Monomial) -> ExactPoly {
        if let Some(p) = self.raw.get(m) {
            return p.clone();
        }
        let n = self.slot.multiplier.nvars();
        let out = match m.exponents().iter().position(|&e| e > 0) {
            None => Poly::one(n),
            Some(i) => {
                let mut e = m.exponents().to_vec();
                e[i] -= 1;
                self.raw(&Monomial::new(e)).mul(&self.slot.args[i])
            }
        };
        self.raw.insert(m.clone(), out.clone());
        out
    }

    /// `m(args) * multiplier`.
    pub(crate) fn compose(&mut self, m: &Monomial) -> &ExactPoly {
        if !self.full.contains_key(m) {
            let p = self.raw(m).mul(&self.slot.multiplier);
            self.full.insert(m.clone(), p);
        }
        &self.full[m]
    }
}

/// Builds `sum_slots alpha_s(args_s) * mult_s = p` as linear equalities in
/// the cone parameters, one row per monomial of degree up to the expansion
/// degree.
pub fn assemble(template: &CertificateTemplate, spec: &ProblemSpec, cone: ConeClass) -> Result<Assembled, ConeError> {
    let n = spec.nvars();
    let mut index: HashMap<Monomial, usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, QuadNum)>> = Vec::new();
    let mut rhs: Vec<QuadNum> = Vec::new();
    let mut blocks = Vec::new();
    let mut slots = Vec::with_capacity(template.slots.len());
    let mut ncols = 0;

    for slot in &template.slots {
        let basis = monomials_up_to(slot.arity, slot.max_degree / 2);
        let param = cone_param(cone, basis)?;
        let mut comp = Composer::new(slot);
        for (k, col) in param.columns.iter().enumerate() {
            let mut poly = Poly::zero(n);
            for (m, c) in &col.terms {
                poly = poly.add(&comp.compose(m).scale(&QuadNum::integer(*c)));
            }
            for (m, v) in poly.terms() {
                let r = *index.entry(m.clone()).or_insert_with(|| {
                    rows.push(Vec::new());
                    rhs.push(QuadNum::zero());
                    rows.len() - 1
                });
                rows[r].push((ncols + k, v.clone()));
            }
        }
        for (range, kind) in &param.blocks {
            blocks.push(Block {
                range: range.start + ncols..range.end + ncols,
                kind: *kind,
            });
        }
        slots.push(SlotColumns { offset: ncols, param });
        ncols += slots.last().map_or(0, |s| s.param.len());
    }

    let mut unreachable = None;
    for (m, c) in spec.p.terms() {
        match index.get(m) {
            Some(&r) => rhs[r] = c.clone(),
            None => {
                if unreachable.is_none() {
                    unreachable = Some(m.clone());
                }
            }
        }
    }

    // Deterministic row order: graded-lex by monomial.
    let mut order: Vec<(Monomial, usize)> = index.into_iter().collect();
    order.sort();
    let rows: Vec<_> = order.iter().map(|(_, r)| std::mem::take(&mut rows[*r])).collect();
    let rhs: Vec<_> = order.iter().map(|(_, r)| rhs[*r].clone()).collect();

    Ok(Assembled {
        problem: ConicProblem {
            ncols,
            rows,
            rhs,
            blocks,
            objective: None,
        },
        slots,
        nominal_rows: binomial(n as u64 + template.expansion_degree as u64, n as u64),
        unreachable,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{example3, example4};
    use super::super::build_template;
    use super::*;

    #[test]
    fn example3_rows() {
        let spec = example3();
        let t = build_template(&spec, 2);
        let a = assemble(&t, &spec, ConeClass::Soms).unwrap();
        assert_eq!(a.nominal_rows, 66);
        assert_eq!(a.problem.ncols, 2 * 21);
        assert!(a.problem.nrows() <= 66);
        assert!(a.unreachable.is_none());
    }

    #[test]
    fn unreachable_monomials() {
        let spec = example3();
        let t = build_template(&spec, 0);
        let a = assemble(&t, &spec, ConeClass::Soms).unwrap();
        assert!(a.unreachable.is_some());
    }

    #[test]
    fn example4_sdsos_size() {
        let spec = example4(ConeClass::Sdsos);
        let t = build_template(&spec, 1);
        let a = assemble(&t, &spec, ConeClass::Sdsos).unwrap();
        // Alpha slots: 6 diagonal + 15 pair triples; rho slots: 2 + 1 triple.
        assert_eq!(a.problem.ncols, 4 * (6 + 45) + 6 * (2 + 3));
        assert!(a.problem.validate().is_ok());
    }
}
