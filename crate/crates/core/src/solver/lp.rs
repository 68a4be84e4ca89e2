use std::cmp::Ordering;

use super::{BlockKind, ConicProblem, ProblemError, SolveOutcome, Status};
use crate::poly::Field;

/// Zero threshold used when the field is floating point. Exact fields
/// ignore it.
const LP_TOL: f64 = 1e-9;

/// Two-phase dense-tableau simplex with Bland's rule.
///
/// Over an exact field every answer is a proof: `Infeasible` carries the
/// positive optimal value of the phase-1 problem. Accepts free and
/// nonnegative blocks only.
pub fn solve_lp<C: Field>(prob: &ConicProblem<C>) -> Result<SolveOutcome<C>, ProblemError> {
    prob.validate()?;
    // Map each problem column to one or two tableau columns.
    let mut plus = vec![0usize; prob.ncols];
    let mut minus: Vec<Option<usize>> = vec![None; prob.ncols];
    let mut next = 0;
    let mut kind_of = vec![BlockKind::Nonneg; prob.ncols];
    for b in &prob.blocks {
        if b.kind == BlockKind::Rsoc {
            return Err(ProblemError::ConeNotLinear);
        }
        for j in b.range.clone() {
            kind_of[j] = b.kind;
        }
    }
    for j in 0..prob.ncols {
        plus[j] = next;
        next += 1;
        if kind_of[j] == BlockKind::Free {
            minus[j] = Some(next);
            next += 1;
        }
    }
    let nstruct = next;
    let m = prob.rows.len();
    let width = nstruct + m + 1;
    let last = width - 1;

    let mut tab: Vec<Vec<C>> = Vec::with_capacity(m);
    for (row, b) in prob.rows.iter().zip(&prob.rhs) {
        let mut t = vec![C::zero(); width];
        for (j, v) in row {
            t[plus[*j]] = t[plus[*j]].add(v);
            if let Some(k) = minus[*j] {
                t[k] = t[k].sub(v);
            }
        }
        t[last] = b.clone();
        if b.sign(LP_TOL) == Ordering::Less {
            for e in t.iter_mut() {
                *e = e.neg();
            }
        }
        tab.push(t);
    }
    for (i, t) in tab.iter_mut().enumerate() {
        t[nstruct + i] = C::one();
    }
    let mut basis: Vec<usize> = (nstruct..nstruct + m).collect();

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![C::zero(); width];
    for t in &tab {
        for j in 0..nstruct {
            if !t[j].is_zero() {
                obj[j] = obj[j].sub(&t[j]);
            }
        }
        obj[last] = obj[last].sub(&t[last]);
    }
    let mut iterations = 0;
    run(&mut tab, &mut obj, &mut basis, nstruct + m, &mut iterations);
    let phase1 = obj[last].neg();
    if phase1.sign(LP_TOL) == Ordering::Greater {
        return Ok(SolveOutcome {
            status: Status::Infeasible { bound: phase1 },
            iterations,
            primal_residual: 0.0,
            cone_violation: 0.0,
        });
    }

    // Drive artificials out of the basis; rows where that fails are redundant.
    let mut r = 0;
    while r < tab.len() {
        if basis[r] >= nstruct {
            if let Some(c) = (0..nstruct).find(|&j| tab[r][j].sign(LP_TOL) != Ordering::Equal) {
                pivot(&mut tab, &mut obj, r, c);
                basis[r] = c;
                iterations += 1;
            } else {
                tab.remove(r);
                basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    if let Some(cost) = &prob.objective {
        let mut c2 = vec![C::zero(); width];
        for j in 0..prob.ncols {
            c2[plus[j]] = cost[j].clone();
            if let Some(k) = minus[j] {
                c2[k] = cost[j].neg();
            }
        }
        for (r, &bv) in basis.iter().enumerate() {
            let cb = c2[bv].clone();
            if !cb.is_zero() {
                for j in 0..width {
                    if !tab[r][j].is_zero() {
                        c2[j] = c2[j].sub(&cb.mul(&tab[r][j]));
                    }
                }
            }
        }
        obj = c2;
        if !run(&mut tab, &mut obj, &mut basis, nstruct, &mut iterations) {
            return Ok(SolveOutcome {
                status: Status::Unbounded,
                iterations,
                primal_residual: 0.0,
                cone_violation: 0.0,
            });
        }
    }

    let mut xs = vec![C::zero(); nstruct];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < nstruct {
            xs[bv] = tab[r][last].clone();
        }
    }
    let w: Vec<C> = (0..prob.ncols)
        .map(|j| match minus[j] {
            Some(k) => xs[plus[j]].sub(&xs[k]),
            None => xs[plus[j]].clone(),
        })
        .collect();
    let wf: Vec<f64> = w.iter().map(|v| v.to_f64()).collect();
    Ok(SolveOutcome {
        primal_residual: prob.residual_f64(&wf),
        cone_violation: prob.cone_violation_f64(&wf),
        status: Status::Feasible(w),
        iterations,
    })
}

/// Pivots until optimal over columns `0..allowed`. Returns false when the
/// objective is unbounded below.
fn run<C: Field>(
    tab: &mut [Vec<C>],
    obj: &mut [C],
    basis: &mut [usize],
    allowed: usize,
    iterations: &mut usize,
) -> bool {
    let last = obj.len() - 1;
    loop {
        let Some(c) = (0..allowed).find(|&j| obj[j].sign(LP_TOL) == Ordering::Less) else {
            return true;
        };
        let mut best: Option<(usize, C)> = None;
        for r in 0..tab.len() {
            if tab[r][c].sign(LP_TOL) != Ordering::Greater {
                continue;
            }
            let ratio = tab[r][last].div(&tab[r][c]);
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => match ratio.cmp_with(&bratio, LP_TOL) {
                    Ordering::Less => Some((r, ratio)),
                    Ordering::Equal if basis[r] < basis[br] => Some((r, ratio)),
                    _ => Some((br, bratio)),
                },
            };
        }
        let Some((r, _)) = best else {
            return false;
        };
        pivot(tab, obj, r, c);
        basis[r] = c;
        *iterations += 1;
    }
}

fn pivot<C: Field>(tab: &mut [Vec<C>], obj: &mut [C], r: usize, c: usize) {
    let inv = C::one().div(&tab[r][c]);
    let nz: Vec<usize> = (0..tab[r].len()).filter(|&j| !tab[r][j].is_zero()).collect();
    for &j in &nz {
        tab[r][j] = tab[r][j].mul(&inv);
    }
    tab[r][c] = C::one();
    let prow: Vec<C> = nz.iter().map(|&j| tab[r][j].clone()).collect();
    let eliminate = |row: &mut [C]| {
        let f = row[c].clone();
        if f.is_zero() {
            return;
        }
        for (k, &j) in nz.iter().enumerate() {
            row[j] = row[j].sub(&f.mul(&prow[k]));
        }
        row[c] = C::zero();
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    eliminate(obj);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{QuadNum, Scalar};
    use crate::solver::Block;

    fn q(v: i64) -> QuadNum {
        QuadNum::integer(v)
    }

    fn simplex_sum(rhs: i64) -> ConicProblem<QuadNum> {
        ConicProblem {
            ncols: 2,
            rows: vec![vec![(0, q(1)), (1, q(1))]],
            rhs: vec![q(rhs)],
            blocks: vec![Block {
                range: 0..2,
                kind: BlockKind::Nonneg,
            }],
            objective: None,
        }
    }

    #[test]
    fn feasible_vertex() {
        let out = solve_lp(&simplex_sum(1)).unwrap();
        match out.status {
            Status::Feasible(w) => {
                assert_eq!(w[0].add(&w[1]), q(1));
                assert!(w.iter().all(|v| v.sign(0.0) != Ordering::Less));
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn infeasible_with_bound() {
        let out = solve_lp(&simplex_sum(-1)).unwrap();
        assert_eq!(out.status, Status::Infeasible { bound: q(1) });
    }

    #[test]
    fn objective_and_free_columns() {
        // min w0 - w1  s.t. w0 + w1 = 4, w1 - f = 1, w >= 0, f free, w1 <= ... via f
        let prob = ConicProblem {
            ncols: 3,
            rows: vec![vec![(0, q(1)), (1, q(1))], vec![(1, q(1)), (2, q(-1))]],
            rhs: vec![q(4), q(1)],
            blocks: vec![
                Block {
                    range: 0..2,
                    kind: BlockKind::Nonneg,
                },
                Block {
                    range: 2..3,
                    kind: BlockKind::Free,
                },
            ],
            objective: Some(vec![q(1), q(-1), q(0)]),
        };
        match solve_lp(&prob).unwrap().status {
            Status::Feasible(w) => {
                assert_eq!(w, vec![q(0), q(4), q(3)]);
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn unbounded_objective() {
        let prob = ConicProblem {
            ncols: 2,
            rows: vec![vec![(0, q(1)), (1, q(-1))]],
            rhs: vec![q(0)],
            blocks: vec![Block {
                range: 0..2,
                kind: BlockKind::Nonneg,
            }],
            objective: Some(vec![q(-1), q(0)]),
        };
        assert_eq!(solve_lp(&prob).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let prob = ConicProblem {
            ncols: 2,
            rows: vec![vec![(0, q(1)), (1, q(1))], vec![(0, q(2)), (1, q(2))]],
            rhs: vec![q(1), q(2)],
            blocks: vec![Block {
                range: 0..2,
                kind: BlockKind::Nonneg,
            }],
            objective: None,
        };
        assert!(matches!(solve_lp(&prob).unwrap().status, Status::Feasible(_)));
    }

    #[test]
    fn float_field() {
        let prob = simplex_sum(1).to_float();
        assert!(matches!(solve_lp(&prob).unwrap().status, Status::Feasible(_)));
        let prob = simplex_sum(-1).to_float();
        assert!(matches!(solve_lp(&prob).unwrap().status, Status::Infeasible { .. }));
    }
}
