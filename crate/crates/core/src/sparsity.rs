//! Variable covers, the running intersection property and correlative
//! sparsity patterns.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::poly::{Field, Poly, QuadNum, Scalar};

/// An ordered cover of the variables `0..n` with one radius per clique and
/// the clique each constraint is attached to. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub cliques: Vec<Vec<usize>>,
    pub radii: Vec<QuadNum>,
    pub assign: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("variable x{0} is in no clique")]
    Uncovered(usize),
    #[error("clique {0} references a variable beyond x{1}")]
    OutOfRange(usize, usize),
    #[error("clique {0} is empty")]
    EmptyClique(usize),
    #[error("expected {0} radii, got {1}")]
    RadiiCount(usize, usize),
    #[error("radius of clique {0} is not positive")]
    NonPositiveRadius(usize),
    #[error("constraint g{0} is assigned to a clique that does not contain its variables")]
    BadAssignment(usize),
    #[error("constraint g{0} fits no clique")]
    Unassignable(usize),
    #[error("the clique order violates the running intersection property")]
    NotRip,
    #[error("the polynomial is not sparse with respect to the cover")]
    NotSparse,
}

impl Cover {
    pub fn k(&self) -> usize {
        self.cliques.len()
    }

    /// Checks the structural invariants for an `n`-variable problem with
    /// constraints `gs`.
    pub fn validate<C: Scalar>(&self, n: usize, gs: &[Poly<C>]) -> Result<(), CoverError> {
        let mut seen = vec![false; n];
        for (l, c) in self.cliques.iter().enumerate() {
            if c.is_empty() {
                return Err(CoverError::EmptyClique(l + 1));
            }
            for &i in c {
                if i >= n {
                    return Err(CoverError::OutOfRange(l + 1, n));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(CoverError::Uncovered(i + 1));
        }
        if self.radii.len() != self.cliques.len() {
            return Err(CoverError::RadiiCount(self.cliques.len(), self.radii.len()));
        }
        for (l, r) in self.radii.iter().enumerate() {
            if r.sign(0.0) != std::cmp::Ordering::Greater {
                return Err(CoverError::NonPositiveRadius(l + 1));
            }
        }
        if self.assign.len() != gs.len() {
            return Err(CoverError::BadAssignment(self.assign.len().min(gs.len()) + 1));
        }
        for (j, (g, &l)) in gs.iter().zip(&self.assign).enumerate() {
            if l >= self.cliques.len() || !g.support().iter().all(|v| self.cliques[l].contains(v)) {
                return Err(CoverError::BadAssignment(j + 1));
            }
        }
        Ok(())
    }
}

/// Running intersection property for the given order: for every `l >= 1`,
/// `(I_0 u ... u I_{l-1}) n I_l` lies inside a single earlier `I_j`.
pub fn check_rip(cliques: &[Vec<usize>]) -> bool {
    let mut union: BTreeSet<usize> = BTreeSet::new();
    for (l, c) in cliques.iter().enumerate() {
        if l > 0 && !fits_after(&union, &cliques[..l], c) {
            return false;
        }
        union.extend(c.iter().copied());
    }
    true
}

fn fits_after(union: &BTreeSet<usize>, earlier: &[Vec<usize>], next: &[usize]) -> bool {
    let inter: Vec<usize> = next.iter().copied().filter(|v| union.contains(v)).collect();
    earlier.iter().any(|e| inter.iter().all(|v| e.contains(v)))
}

/// A permutation of `sets` satisfying the running intersection property.
///
/// Up to 12 sets the search is exhaustive (depth-first with the property
/// checked on every prefix). Beyond that only the given order and a greedy
/// order are tried.
pub fn find_rip_order(sets: &[Vec<usize>]) -> Option<Vec<usize>> {
    let k = sets.len();
    if k <= 12 {
        let mut order = Vec::with_capacity(k);
        let mut used = vec![false; k];
        return if dfs(sets, &mut order, &mut used, &BTreeSet::new()) {
            Some(order)
        } else {
            None
        };
    }
    let given: Vec<usize> = (0..k).collect();
    if check_rip(sets) {
        return Some(given);
    }
    let mut order: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; k];
    let mut union = BTreeSet::new();
    while order.len() < k {
        let prefix: Vec<Vec<usize>> = order.iter().map(|&i| sets[i].clone()).collect();
        let pick = (0..k).find(|&i| !used[i] && (order.is_empty() || fits_after(&union, &prefix, &sets[i])))?;
        used[pick] = true;
        union.extend(sets[pick].iter().copied());
        order.push(pick);
    }
    Some(order)
}

fn dfs(sets: &[Vec<usize>], order: &mut Vec<usize>, used: &mut [bool], union: &BTreeSet<usize>) -> bool {
    if order.len() == sets.len() {
        return true;
    }
    let prefix: Vec<Vec<usize>> = order.iter().map(|&i| sets[i].clone()).collect();
    for i in 0..sets.len() {
        if used[i] || (!order.is_empty() && !fits_after(union, &prefix, &sets[i])) {
            continue;
        }
        used[i] = true;
        order.push(i);
        let mut next = union.clone();
        next.extend(sets[i].iter().copied());
        if dfs(sets, order, used, &next) {
            return true;
        }
        order.pop();
        used[i] = false;
    }
    false
}

/// Every monomial of `p` is supported inside a single clique.
pub fn check_i_sparse<C: Scalar>(p: &Poly<C>, cliques: &[Vec<usize>]) -> bool {
    p.terms()
        .all(|(m, _)| cliques.iter().any(|c| m.support().all(|v| c.contains(&v))))
}

/// First clique containing the variables of each constraint.
pub fn assign_constraints<C: Scalar>(cliques: &[Vec<usize>], gs: &[Poly<C>]) -> Result<Vec<usize>, CoverError> {
    gs.iter()
        .enumerate()
        .map(|(j, g)| {
            let s = g.support();
            cliques
                .iter()
                .position(|c| s.iter().all(|v| c.contains(v)))
                .ok_or(CoverError::Unassignable(j + 1))
        })
        .collect()
}

/// Correlative sparsity cover: maximal cliques of the graph linking
/// variables that share a monomial of `p` or appear in the same constraint,
/// ordered by smallest member and then reordered for the running
/// intersection property. Falls back to one clique of all variables.
pub fn build_cover<C: Field>(p: &Poly<C>, gs: &[Poly<C>], radius: &QuadNum) -> Cover {
    let n = p.nvars();
    let mut adj = vec![vec![false; n]; n];
    let mut link = |vs: &[usize]| {
        for &a in vs {
            for &b in vs {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    };
    for (m, _) in p.terms() {
        link(&m.support().collect::<Vec<_>>());
    }
    for g in gs {
        link(&g.support());
    }
    let mut cliques = maximal_cliques(&adj);
    for c in cliques.iter_mut() {
        c.sort_unstable();
    }
    cliques.sort();

    // Merge cliques until every constraint and monomial fits one of them.
    let supports: Vec<Vec<usize>> = p
        .terms()
        .map(|(m, _)| m.support().collect())
        .chain(gs.iter().map(|g| g.support()))
        .collect();
    loop {
        let bad = supports
            .iter()
            .find(|s| !cliques.iter().any(|c| s.iter().all(|v| c.contains(v))));
        let Some(s) = bad else { break };
        let (touch, rest): (Vec<Vec<usize>>, Vec<Vec<usize>>) =
            cliques.into_iter().partition(|c| c.iter().any(|v| s.contains(v)));
        let mut merged: BTreeSet<usize> = touch.into_iter().flatten().collect();
        merged.extend(s.iter().copied());
        cliques = rest;
        cliques.push(merged.into_iter().collect());
        cliques.sort();
    }

    let ordered = find_rip_order(&cliques).map(|ord| ord.into_iter().map(|i| cliques[i].clone()).collect());
    let cliques: Vec<Vec<usize>> = match ordered {
        Some(c) => c,
        None => vec![(0..n).collect()],
    };
    let assign = assign_constraints(&cliques, gs).unwrap_or_else(|_| vec![0; gs.len()]);
    Cover {
        radii: vec![radius.clone(); cliques.len()],
        cliques,
        assign,
    }
}

/// Bron-Kerbosch with pivoting; isolated vertices come out as singletons.
fn maximal_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut out = Vec::new();
    bk(adj, &mut Vec::new(), (0..n).collect(), Vec::new(), &mut out);
    out
}

fn bk(adj: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .unwrap_or(p[0]);
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    let mut p = p;
    for v in candidates {
        let np: Vec<usize> = p.iter().copied().filter(|&w| adj[v][w]).collect();
        let nx: Vec<usize> = x.iter().copied().filter(|&w| adj[v][w]).collect();
        r.push(v);
        bk(adj, r, np, nx, out);
        r.pop();
        p.retain(|&w| w != v);
        x.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{default_names, parse};

    fn sets(v: &[&[usize]]) -> Vec<Vec<usize>> {
        v.iter().map(|s| s.to_vec()).collect()
    }

    #[test]
    fn rip_examples() {
        assert!(check_rip(&sets(&[&[0, 1], &[1, 2]])));
        assert!(!check_rip(&sets(&[&[0, 1], &[2, 3], &[1, 2]])));
        assert!(check_rip(&sets(&[&[0, 1, 2, 3]])));
    }

    #[test]
    fn rip_orders() {
        let s = sets(&[&[1, 2], &[0, 1]]);
        let o = find_rip_order(&s).unwrap();
        let ordered: Vec<Vec<usize>> = o.iter().map(|&i| s[i].clone()).collect();
        assert!(check_rip(&ordered));
        assert!(find_rip_order(&sets(&[&[0, 1], &[2, 3]])).is_some());
        assert!(find_rip_order(&sets(&[&[0, 1], &[1, 2], &[0, 2]])).is_none());
        let s = sets(&[&[0, 1], &[2, 3], &[1, 2]]);
        let o = find_rip_order(&s).unwrap();
        assert!(check_rip(&o.iter().map(|&i| s[i].clone()).collect::<Vec<_>>()));
    }

    #[test]
    fn sparsity_checks() {
        let names = default_names(3);
        let p = parse("11 + 2*x1^2 + 4*x1*x2 - x2^2 - 2*x2*x3 - 3*x3 - 2*x3^3", &names).unwrap();
        let cover = sets(&[&[0, 1], &[1, 2]]);
        assert!(check_i_sparse(&p, &cover));
        assert!(!check_i_sparse(&parse("x1*x3", &names).unwrap(), &cover));
        assert!(check_i_sparse(&parse("5", &names).unwrap(), &cover));
    }

    #[test]
    fn correlative_covers() {
        let one = QuadNum::one();
        let names = default_names(4);
        let p = parse(
            "100*x2^2 - 200*x2*x1^2 + 100*x1^4 + 1 - 2*x2 + x2^2 + 100*x3^2 - 200*x3*x2^2 + 100*x2^4 + 1 - 2*x3 + x3^2 + 100*x4^2 - 200*x4*x3^2 + 100*x3^4 + 1 - 2*x4 + x4^2",
            &names,
        )
        .unwrap();
        let gs: Vec<_> = (1..=4)
            .flat_map(|i| [format!("1 - x{i}"), format!("1 + x{i}")])
            .map(|t| parse(&t, &names).unwrap())
            .collect();
        let c = build_cover(&p, &gs, &one);
        assert_eq!(c.cliques, sets(&[&[0, 1], &[1, 2], &[2, 3]]));
        assert!(c.validate(4, &gs).is_ok());

        let names = default_names(2);
        let c = build_cover(&parse("x1^2 + x2^2", &names).unwrap(), &[], &one);
        assert_eq!(c.cliques, sets(&[&[0], &[1]]));
        let names = default_names(3);
        let c = build_cover(&parse("x1*x2*x3", &names).unwrap(), &[], &one);
        assert_eq!(c.cliques, sets(&[&[0, 1, 2]]));
    }

    #[test]
    fn non_chordal_falls_back() {
        // A 4-cycle has no RIP ordering of its edges.
        let names = default_names(4);
        let p = parse("x1*x2 + x2*x3 + x3*x4 + x4*x1", &names).unwrap();
        let c = build_cover(&p, &[], &QuadNum::one());
        assert_eq!(c.cliques, sets(&[&[0, 1, 2, 3]]));
    }
}
