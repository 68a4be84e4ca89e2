//! Sparse multivariate polynomials over Q(sqrt(s)) and a binary64 mirror.

mod monomial;
mod parse;
mod polynomial;
mod quad;
mod scalar;

pub use monomial::{binomial, monomials_up_to, Monomial};
pub use parse::{parse, parse_float, parse_number};
pub use polynomial::{ExactPoly, FloatPoly, Poly};
pub use quad::QuadNum;
pub use scalar::{f64_to_rational, fmt_f64, rational_to_f64, Field, Scalar};


use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable-count mismatch: {0} vs {1}")]
    VarCountMismatch(usize, usize),
    #[error("radicand mismatch: sqrt({0}) vs sqrt({1})")]
    RadicandMismatch(u64, u64),
    #[error("point has {1} coordinates, polynomial has {0} variables")]
    PointLength(usize, usize),
    #[error("substitution expects {0} arguments, got {1}")]
    ArityMismatch(usize, usize),
    #[error("norm degree {0} is below polynomial degree {1} (or zero)")]
    NormDegree(u32, u32),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable '{name}' at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
}

/// `x1, ..., xn`.
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Prints in the parser grammar, leading term first (descending graded-lex).
pub fn format_poly<C: Scalar>(p: &Poly<C>, names: &[String]) -> String {
    let mut out = String::new();
    for (m, c) in p.terms().rev() {
        let mono = format_monomial(m, names);
        for (neg, mag) in c.display_parts() {
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match (mag, mono.is_empty()) {
                (None, true) => out.push('1'),
                (None, false) => out.push_str(&mono),
                (Some(t), true) => out.push_str(&t),
                (Some(t), false) => {
                    out.push_str(&t);
                    out.push('*');
                    out.push_str(&mono);
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn format_monomial(m: &Monomial, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    parts.join("*")
}
