use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use super::assemble::Composer;
use super::certificate::{AnyCertificate, CertSlot, Certificate};
use super::{build_template, CertificateTemplate, ProblemSpec};
use crate::cones::{GramFlavor, GramWitness, SddBlock, SomsWitness, Witness};
use crate::poly::{monomials_up_to, ExactPoly, Field, Monomial, QuadNum, Scalar};
use crate::solver::{solve_lp, Block, BlockKind, ConicProblem, Status};
use crate::verify::{verify_certificate, VerifyMode};

const MAX_DEN: u64 = 1_000_000;
const PRE_TOL: f64 = 1e-8;
/// Rounding tolerances tried in turn; coarse rounding keeps the exact LP small.
const ROUNDING: [f64; 3] = [1e-5, 1e-7, 1e-10];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RationalizeError {
    #[error("numeric certificate residual {0:e} exceeds {PRE_TOL:e}")]
    ResidualTooLarge(f64),
    #[error("the numeric certificate does not match the problem template")]
    Shape,
    #[error("witness kind {0} cannot be rationalized")]
    Unsupported(&'static str),
    #[error("no exact correction exists near the rounded witness")]
    Infeasible,
}

/// The first continued-fraction convergent of `x` within `tol` of it, or the
/// last one with denominator at most `max_den`.
pub fn approx_rational(x: f64, tol: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::default();
    }
    let neg = x < 0.0;
    let mut r = x.abs();
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e18 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac < 1e-12 || (h1 as f64 / k1 as f64 - x.abs()).abs() <= tol {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return BigRational::default();
    }
    let q = BigRational::new(BigInt::from(h1), BigInt::from(k1));
    if neg {
        -q
    } else {
        q
    }
}

fn approx(x: f64, tol: f64) -> QuadNum {
    QuadNum::rational(approx_rational(x, tol, MAX_DEN))
}

enum Col {
    /// Weight on the square of a basis element (or a SOMS monomial).
    Square(usize),
    /// Weight on `a (z_i + kappa z_j)^2`.
    Ray { i: usize, j: usize, a: QuadNum, kappa: QuadNum },
}

/// Rounds the witness data of a numeric certificate and solves a small exact
/// LP over the diagonal weights and the rounded rank-one blocks (and their
/// mirror images) so that the identity holds exactly.
pub fn rationalize(spec: &ProblemSpec, cert: &Certificate<f64>) -> Result<Certificate<QuadNum>, RationalizeError> {
    let float = AnyCertificate::Float(cert.clone());
    let pre = verify_certificate(spec, &float, VerifyMode::Float(PRE_TOL)).map_err(|_| RationalizeError::Shape)?;
    if !pre.residual_ok {
        return Err(RationalizeError::ResidualTooLarge(pre.residual.max_abs_coeff()));
    }
    let template = build_template(spec, cert.degree);
    for tol in ROUNDING {
        if let Some(c) = round_directly(spec, cert, tol) {
            return Ok(c);
        }
        match attempt(spec, cert, &template, tol) {
            Err(RationalizeError::Infeasible) => continue,
            done => return done,
        }
    }
    Err(RationalizeError::Infeasible)
}

/// Rounds every witness entry and keeps the result if it already verifies
/// exactly, which leaves rational certificates unchanged.
fn round_directly(spec: &ProblemSpec, cert: &Certificate<f64>, tol: f64) -> Option<Certificate<QuadNum>> {
    let slots = cert
        .slots
        .iter()
        .map(|s| {
            let witness = s.witness.map(|c| approx(*c, tol));
            CertSlot {
                key: s.key,
                poly: witness.polynomial(s.poly.nvars()),
                witness,
            }
        })
        .collect();
    let exact = Certificate {
        cone: cert.cone,
        slots,
        degree: cert.degree,
        provenance: cert.provenance,
        approximate: false,
    };
    let any = AnyCertificate::Exact(exact);
    let ok = verify_certificate(spec, &any, VerifyMode::Exact).map(|r| r.ok).unwrap_or(false);
    match (ok, any) {
        (true, AnyCertificate::Exact(c)) => Some(c),
        _ => None,
    }
}

fn attempt(
    spec: &ProblemSpec,
    cert: &Certificate<f64>,
    template: &CertificateTemplate,
    tol: f64,
) -> Result<Certificate<QuadNum>, RationalizeError> {
    let mut cols: Vec<(usize, Col, ExactPoly)> = Vec::new();
    let mut bases: Vec<(Vec<Monomial>, Option<GramFlavor>)> = Vec::new();

    for (si, slot) in template.slots.iter().enumerate() {
        let mut comp = Composer::new(slot);
        let cs = cert.slot(&slot.key);
        match cs.map(|c| &c.witness) {
            None | Some(Witness::Soms(_)) => {
                let squares: Vec<Monomial> = monomials_up_to(slot.arity, slot.max_degree / 2)
                    .iter()
                    .map(|m| m.mul(m))
                    .collect();
                for (k, m) in squares.iter().enumerate() {
                    cols.push((si, Col::Square(k), comp.compose(m).clone()));
                }
                bases.push((squares, None));
            }
            Some(Witness::Gram(g)) => {
                if g.flavor == GramFlavor::Psd {
                    return Err(RationalizeError::Unsupported("psd"));
                }
                let b = &g.basis;
                if b.iter().any(|m| m.nvars() != slot.arity) {
                    return Err(RationalizeError::Shape);
                }
                for k in 0..b.len() {
                    let p = comp.compose(&b[k].mul(&b[k])).clone();
                    cols.push((si, Col::Square(k), p));
                }
                let mut pairs: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
                match g.flavor {
                    GramFlavor::Sdd => {
                        for blk in g.blocks.iter().filter(|blk| blk.i != blk.j) {
                            pairs.push((blk.i, blk.j, blk.di, blk.dj, blk.offdiag));
                        }
                    }
                    _ => {
                        for i in 0..b.len() {
                            for j in i + 1..b.len() {
                                let t = g.q[i][j];
                                pairs.push((i, j, t.abs(), t.abs(), t));
                            }
                        }
                    }
                }
                for (i, j, a, bb, t) in pairs {
                    let tr = approx(t, tol);
                    if tr.is_zero() || a <= 0.0 || bb <= 0.0 {
                        continue;
                    }
                    let a_lo = approx(t.abs() * (a / bb).sqrt(), tol);
                    if a_lo.is_zero() {
                        continue;
                    }
                    let kappa = tr.div(&a_lo);
                    for kap in [kappa.clone(), kappa.neg()] {
                        let cii = comp.compose(&b[i].mul(&b[i])).clone();
                        let cjj = comp.compose(&b[j].mul(&b[j])).clone();
                        let cij = comp.compose(&b[i].mul(&b[j])).clone();
                        let two_k = kap.add(&kap);
                        let p = cii.add(&cij.scale(&two_k)).add(&cjj.scale(&kap.mul(&kap))).scale(&a_lo);
                        cols.push((
                            si,
                            Col::Ray {
                                i,
                                j,
                                a: a_lo.clone(),
                                kappa: kap,
                            },
                            p,
                        ));
                    }
                }
                bases.push((b.clone(), Some(g.flavor)));
            }
            Some(Witness::Circuit(_)) => return Err(RationalizeError::Unsupported("circuit")),
            Some(Witness::Sage) => return Err(RationalizeError::Unsupported("sage")),
        }
    }

    let mut index: HashMap<Monomial, usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, QuadNum)>> = Vec::new();
    for (k, (_, _, p)) in cols.iter().enumerate() {
        for (m, v) in p.terms() {
            let r = *index.entry(m.clone()).or_insert_with(|| {
                rows.push(Vec::new());
                rows.len() - 1
            });
            rows[r].push((k, v.clone()));
        }
    }
    let mut rhs = vec![QuadNum::zero(); rows.len()];
    for (m, c) in spec.p.terms() {
        match index.get(m) {
            Some(&r) => rhs[r] = c.clone(),
            None => return Err(RationalizeError::Infeasible),
        }
    }
    let prob = ConicProblem {
        ncols: cols.len(),
        rows,
        rhs,
        blocks: vec![Block {
            range: 0..cols.len(),
            kind: BlockKind::Nonneg,
        }],
        objective: None,
    };
    let values = match solve_lp(&prob).expect("linear problem").status {
        Status::Feasible(v) => v,
        _ => return Err(RationalizeError::Infeasible),
    };

    let mut slots = Vec::new();
    for (si, slot) in template.slots.iter().enumerate() {
        let (basis, flavor) = &bases[si];
        let mine = cols.iter().zip(&values).filter(|((s, _, _), v)| *s == si && !v.is_zero());
        let witness = match flavor {
            None => Witness::Soms(SomsWitness {
                terms: mine
                    .map(|((_, c, _), v)| match c {
                        Col::Square(k) => (basis[*k].clone(), v.clone()),
                        Col::Ray { .. } => unreachable!("monomial squares only"),
                    })
                    .collect(),
            }),
            Some(flavor) => {
                let nb = basis.len();
                let mut q = vec![vec![QuadNum::zero(); nb]; nb];
                let mut blocks: BTreeMap<(usize, usize), SddBlock<QuadNum>> = BTreeMap::new();
                for ((_, c, _), v) in mine {
                    let (i, j, di, dj, off) = match c {
                        Col::Square(k) => (*k, *k, v.clone(), QuadNum::zero(), QuadNum::zero()),
                        Col::Ray { i, j, a, kappa } => {
                            let w = v.mul(a);
                            (*i, *j, w.clone(), w.mul(kappa).mul(kappa), w.mul(kappa))
                        }
                    };
                    q[i][i] = q[i][i].add(&di);
                    if i != j {
                        q[j][j] = q[j][j].add(&dj);
                        q[i][j] = q[i][j].add(&off);
                        q[j][i] = q[j][i].add(&off);
                    }
                    let e = blocks.entry((i, j)).or_insert(SddBlock {
                        i,
                        j,
                        di: QuadNum::zero(),
                        dj: QuadNum::zero(),
                        offdiag: QuadNum::zero(),
                    });
                    e.di = e.di.add(&di);
                    e.dj = e.dj.add(&dj);
                    e.offdiag = e.offdiag.add(&off);
                }
                Witness::Gram(GramWitness {
                    basis: basis.clone(),
                    q,
                    flavor: *flavor,
                    blocks: if *flavor == GramFlavor::Sdd { blocks.into_values().collect() } else { Vec::new() },
                })
            }
        };
        slots.push(CertSlot {
            key: slot.key,
            poly: witness.polynomial(slot.arity),
            witness,
        });
    }
    Ok(Certificate {
        cone: cert.cone,
        slots,
        degree: cert.degree,
        provenance: cert.provenance,
        approximate: false,
    })
}

#[cfg(test)]
mod tests {
    use num_traits::ToPrimitive;

    use super::super::tests::example3;
    use super::super::{search, BoundChoice, GeometryInput, SearchOptions, SpecInput, TemplateKind};
    use super::*;
    use crate::cones::ConeClass;
    use crate::poly::{default_names, parse};
    use crate::sizes::Shape;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn float_search(spec: &ProblemSpec, cone: ConeClass) -> Certificate<f64> {
        let opts = SearchOptions {
            rationalize: false,
            ..SearchOptions::default()
        };
        match search(spec, cone, 2, &opts).unwrap().certificate {
            Some(AnyCertificate::Float(c)) => c,
            Some(AnyCertificate::Exact(c)) => c.to_float(),
            None => panic!("no certificate"),
        }
    }

    #[test]
    fn convergents() {
        assert_eq!(approx_rational(0.9, 1e-12, MAX_DEN), q(9, 10));
        assert_eq!(approx_rational(-7.0 / 12.0 + 1e-9, 1e-7, MAX_DEN), q(-7, 12));
        assert_eq!(approx_rational(std::f64::consts::PI, 2e-3, MAX_DEN), q(22, 7));
        let r = approx_rational(std::f64::consts::PI, 0.0, 1000);
        assert_eq!(r, q(355, 113));
        assert_eq!(approx_rational(f64::NAN, 1e-9, MAX_DEN), q(0, 1));
    }

    #[test]
    fn rational_certificates_are_kept() {
        let spec = example3();
        let out = search(&spec, ConeClass::Soms, 2, &SearchOptions::default()).unwrap();
        let Some(AnyCertificate::Exact(exact)) = out.certificate else {
            panic!("expected an exact certificate")
        };
        let back = rationalize(&spec, &exact.to_float()).unwrap();
        for (a, b) in exact.slots.iter().zip(&back.slots) {
            assert_eq!(a.poly, b.poly);
        }
    }

    #[test]
    fn sdd_witness_becomes_exact() {
        let vars = default_names(2);
        let spec = ProblemSpec::new(SpecInput {
            p: parse("x1^2 + x2^2 + 1.8*x1*x2", &vars).unwrap(),
            vars,
            constraints: vec![],
            geometry: GeometryInput::Ball(QuadNum::one()),
            cone: ConeClass::Sdsos,
            shape: Shape::Split,
            template: TemplateKind::Simple,
            d_max: 1,
        })
        .unwrap();
        let float = float_search(&spec, ConeClass::Sdsos);
        let exact = rationalize(&spec, &float).unwrap();
        let rep = verify_certificate(&spec, &AnyCertificate::Exact(exact.clone()), VerifyMode::Exact).unwrap();
        assert!(rep.ok, "{}", rep.summary());
        let Witness::Gram(g) = &exact.slots[0].witness else {
            panic!("expected a Gram witness")
        };
        for v in g.q.iter().flatten() {
            let r = v.as_rational().unwrap();
            assert_eq!(10 % r.denom().to_i64().unwrap(), 0, "{r}");
        }
    }

    #[test]
    fn large_residual_is_rejected() {
        let vars = default_names(2);
        let spec = ProblemSpec::new(SpecInput {
            p: parse("(2 - x1 - x2)^2", &vars).unwrap(),
            constraints: vec![(parse("1 - x1^2 - x2^2", &vars).unwrap(), BoundChoice::Auto)],
            vars,
            geometry: GeometryInput::Ball(QuadNum::one()),
            cone: ConeClass::Soms,
            shape: Shape::Split,
            template: TemplateKind::Putinar,
            d_max: 2,
        })
        .unwrap();
        let mut cert = float_search(&spec, ConeClass::Soms);
        let slot = &mut cert.slots[0];
        if let Witness::Soms(w) = &mut slot.witness {
            w.terms[0].1 += 1e-3;
        }
        slot.poly = slot.witness.polynomial(slot.poly.nvars());
        assert!(matches!(rationalize(&spec, &cert), Err(RationalizeError::ResidualTooLarge(_))));
    }
}
