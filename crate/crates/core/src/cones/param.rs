use std::ops::Range;

use super::witness::{GramFlavor, GramWitness, SddBlock, SomsWitness, Witness};
use super::{ConeClass, ConeError};
use crate::poly::{Field, Monomial};
use crate::solver::BlockKind;

/// One unknown of a cone parameterization: the member polynomial it adds
/// when set to 1, as integer multiples of basis products.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamColumn {
    pub terms: Vec<(Monomial, i64)>,
}

/// Linear parameterization of a cone over a monomial basis: a member is
/// `sum_k w_k * column_k` with `w` constrained blockwise.
///
/// SOMS uses one nonnegative weight per squared basis element. DSOS uses
/// the extreme rays `z_i^2` and `(z_i +- z_j)^2` of the diagonally dominant
/// cone with nonnegative weights. SDSOS adds to the diagonal weights one
/// rotated-cone triple `(a, b, t)` per pair, standing for the PSD block
/// `[[a, t], [t, b]]`.
#[derive(Debug, Clone)]
pub struct ConeParam {
    pub cone: ConeClass,
    pub basis: Vec<Monomial>,
    pub columns: Vec<ParamColumn>,
    /// Blocks with ranges relative to the first column.
    pub blocks: Vec<(Range<usize>, BlockKind)>,
}

impl ConeParam {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

pub fn cone_param(cone: ConeClass, basis: Vec<Monomial>) -> Result<ConeParam, ConeError> {
    let n = basis.len();
    let sq = |i: usize| basis[i].mul(&basis[i]);
    let mut columns = Vec::new();
    let mut blocks = Vec::new();
    match cone {
        ConeClass::Soms => {
            for i in 0..n {
                columns.push(ParamColumn { terms: vec![(sq(i), 1)] });
            }
            blocks.push((0..n, BlockKind::Nonneg));
        }
        ConeClass::Dsos => {
            for i in 0..n {
                columns.push(ParamColumn { terms: vec![(sq(i), 1)] });
            }
            for i in 0..n {
                for j in i + 1..n {
                    let cross = basis[i].mul(&basis[j]);
                    for s in [2, -2] {
                        columns.push(ParamColumn {
                            terms: vec![(sq(i), 1), (sq(j), 1), (cross.clone(), s)],
                        });
                    }
                }
            }
            blocks.push((0..columns.len(), BlockKind::Nonneg));
        }
        ConeClass::Sdsos => {
            for i in 0..n {
                columns.push(ParamColumn { terms: vec![(sq(i), 1)] });
            }
            blocks.push((0..n, BlockKind::Nonneg));
            for i in 0..n {
                for j in i + 1..n {
                    let start = columns.len();
                    columns.push(ParamColumn { terms: vec![(sq(i), 1)] });
                    columns.push(ParamColumn { terms: vec![(sq(j), 1)] });
                    columns.push(ParamColumn {
                        terms: vec![(basis[i].mul(&basis[j]), 2)],
                    });
                    blocks.push((start..start + 3, BlockKind::Rsoc));
                }
            }
        }
        other => return Err(ConeError::Unsupported(other)),
    }
    Ok(ConeParam {
        cone,
        basis,
        columns,
        blocks,
    })
}

/// Turns solved parameter values into a cone witness.
pub fn recover_witness<C: Field>(param: &ConeParam, values: &[C]) -> Witness<C> {
    assert_eq!(values.len(), param.columns.len());
    let n = param.basis.len();
    match param.cone {
        ConeClass::Soms => Witness::Soms(SomsWitness {
            terms: (0..n)
                .filter(|&i| !values[i].is_zero())
                .map(|i| (param.basis[i].mul(&param.basis[i]), values[i].clone()))
                .collect(),
        }),
        ConeClass::Dsos => {
            let mut q = vec![vec![C::zero(); n]; n];
            for i in 0..n {
                q[i][i] = values[i].clone();
            }
            let mut k = n;
            for i in 0..n {
                for j in i + 1..n {
                    let (p, m) = (&values[k], &values[k + 1]);
                    k += 2;
                    let both = p.add(m);
                    q[i][i] = q[i][i].add(&both);
                    q[j][j] = q[j][j].add(&both);
                    let off = p.sub(m);
                    q[i][j] = off.clone();
                    q[j][i] = off;
                }
            }
            Witness::Gram(GramWitness {
                basis: param.basis.clone(),
                q,
                flavor: GramFlavor::Dd,
                blocks: Vec::new(),
            })
        }
        ConeClass::Sdsos => {
            let mut q = vec![vec![C::zero(); n]; n];
            let mut blocks = Vec::new();
            for i in 0..n {
                if !values[i].is_zero() {
                    q[i][i] = values[i].clone();
                    blocks.push(SddBlock {
                        i,
                        j: i,
                        di: values[i].clone(),
                        dj: C::zero(),
                        offdiag: C::zero(),
                    });
                }
            }
            let mut k = n;
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b, t) = (&values[k], &values[k + 1], &values[k + 2]);
                    k += 3;
                    if a.is_zero() && b.is_zero() && t.is_zero() {
                        continue;
                    }
                    q[i][i] = q[i][i].add(a);
                    q[j][j] = q[j][j].add(b);
                    q[i][j] = q[i][j].add(t);
                    q[j][i] = q[j][i].add(t);
                    blocks.push(SddBlock {
                        i,
                        j,
                        di: a.clone(),
                        dj: b.clone(),
                        offdiag: t.clone(),
                    });
                }
            }
            Witness::Gram(GramWitness {
                basis: param.basis.clone(),
                q,
                flavor: GramFlavor::Sdd,
                blocks,
            })
        }
        _ => Witness::Sage,
    }
}
