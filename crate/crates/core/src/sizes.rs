//! Closed-form sizes of certificate templates: total Gram entries and total
//! monomial coefficients over all unknown slots.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::poly::binomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sparsity {
    NonSparse,
    SemiSparse,
    FullySparse,
}

impl Sparsity {
    pub const ALL: [Sparsity; 3] = [Sparsity::NonSparse, Sparsity::SemiSparse, Sparsity::FullySparse];

    pub fn name(self) -> &'static str {
        match self {
            Sparsity::NonSparse => "non-sparse",
            Sparsity::SemiSparse => "semi-sparse",
            Sparsity::FullySparse => "fully-sparse",
        }
    }
}

/// Split templates carry two alpha slots per clique, merged ones a single one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Split,
    Merged,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Split => "split",
            Shape::Merged => "merged",
        }
    }

    pub fn alpha_per_clique(self) -> u64 {
        match self {
            Shape::Split => 2,
            Shape::Merged => 1,
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "split" => Ok(Shape::Split),
            "merged" => Ok(Shape::Merged),
            _ => Err(format!("unknown shape '{s}' (expected split or merged)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SizeError {
    #[error("the fully-sparse count needs a cover")]
    MissingCover,
    #[error("a basis needs at least one variable")]
    NoVariables,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub sparsity: Sparsity,
    pub shape: Shape,
    pub n: usize,
    pub d: u32,
    pub m: usize,
    /// Clique sizes, empty unless fully sparse.
    pub cover: Vec<usize>,
    pub gram_total: u128,
    pub monomial_total: u128,
}

/// Number of monomials of degree at most `deg` in `v` variables.
pub fn basis_count(v: usize, deg: u32) -> u128 {
    binomial(v as u64 + deg as u64, v as u64)
}

/// Gram entries and monomial coefficients of all slots of a template.
///
/// Alpha slots in a clique of size `s` have `2s + 1` arguments; the
/// non-sparse and semi-sparse shapes use one clique of size `n`. Multiplier
/// slots are `n`-variate in the non-sparse shape and univariate otherwise.
pub fn template_sizes(
    sparsity: Sparsity,
    shape: Shape,
    n: usize,
    d: u32,
    m: usize,
    cover: Option<&[usize]>,
) -> Result<SizeReport, SizeError> {
    if n == 0 {
        return Err(SizeError::NoVariables);
    }
    let cliques: Vec<usize> = match sparsity {
        Sparsity::FullySparse => cover.ok_or(SizeError::MissingCover)?.to_vec(),
        _ => vec![n],
    };
    let per = shape.alpha_per_clique() as u128;
    let mut gram = 0u128;
    let mut mono = 0u128;
    for &s in &cliques {
        let b = basis_count(2 * s + 1, d);
        gram += per * b * b;
        mono += per * basis_count(2 * s + 1, 2 * d);
    }
    let rho_vars = if sparsity == Sparsity::NonSparse { n } else { 1 };
    let b = basis_count(rho_vars, d);
    gram += m as u128 * b * b;
    mono += m as u128 * basis_count(rho_vars, 2 * d);
    Ok(SizeReport {
        sparsity,
        shape,
        n,
        d,
        m,
        cover: if sparsity == Sparsity::FullySparse { cliques } else { Vec::new() },
        gram_total: gram,
        monomial_total: mono,
    })
}

/// The chained Rosenbrock preset: cliques `{i, i+1}` and box constraints
/// `1 -+ x_i`, so `k = n - 1` and `m = 2n`.
pub fn rosenbrock_cover(n: usize) -> Vec<usize> {
    vec![2; n.saturating_sub(1)]
}

/// One table row: non-sparse, semi-sparse and fully-sparse counts.
pub fn table_row(shape: Shape, n: usize, d: u32, m: usize, cover: &[usize]) -> Result<[SizeReport; 3], SizeError> {
    Ok([
        template_sizes(Sparsity::NonSparse, shape, n, d, m, None)?,
        template_sizes(Sparsity::SemiSparse, shape, n, d, m, None)?,
        template_sizes(Sparsity::FullySparse, shape, n, d, m, Some(cover))?,
    ])
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<13} {:<6} n={} d={} m={} gram={} monomials={}",
            self.sparsity.name(),
            self.shape.name(),
            self.n,
            self.d,
            self.m,
            self.gram_total,
            self.monomial_total
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn totals(row: &[SizeReport; 3]) -> ([u128; 3], [u128; 3]) {
        (
            [row[0].gram_total, row[1].gram_total, row[2].gram_total],
            [row[0].monomial_total, row[1].monomial_total, row[2].monomial_total],
        )
    }

    #[test]
    fn counts() {
        assert_eq!(basis_count(9, 2), 55);
        assert_eq!(basis_count(5, 2), 21);
        assert_eq!(basis_count(7, 0), 1);
    }

    #[test]
    fn rosenbrock_rows() {
        let cover = rosenbrock_cover(4);
        let split = table_row(Shape::Split, 4, 2, 8, &cover).unwrap();
        assert_eq!(totals(&split), ([7850, 6122, 2718], [1990, 1470, 796]));
        let merged = table_row(Shape::Merged, 4, 2, 8, &cover).unwrap();
        assert_eq!(totals(&merged), ([4825, 3097, 1395], [1275, 755, 418]));
    }

    #[test]
    fn trivial_template() {
        let r = template_sizes(Sparsity::SemiSparse, Shape::Split, 1, 0, 0, None).unwrap();
        assert_eq!((r.gram_total, r.monomial_total), (2, 2));
        assert_eq!(
            template_sizes(Sparsity::FullySparse, Shape::Split, 3, 1, 0, None),
            Err(SizeError::MissingCover)
        );
    }
}
