//! Independent certificate checking: the template identity is re-expanded
//! from the problem data by substitution and every cone witness is
//! re-checked.

use thiserror::Error;

use crate::builder::{AnyCertificate, Certificate, ProblemSpec, Role, SlotKey, TemplateKind};
use crate::cones::{verify_witness, ConeClass};
use crate::poly::{f64_to_rational, ExactPoly, Field, FloatPoly, Poly, QuadNum, Scalar};
use crate::sizes::Shape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerifyMode {
    /// The residual must vanish identically.
    Exact,
    /// Every residual coefficient and witness condition within the tolerance.
    Float(f64),
}

impl VerifyMode {
    pub fn name(&self) -> String {
        match self {
            VerifyMode::Exact => "exact".into(),
            VerifyMode::Float(t) => format!("float(tol={t:e})"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Residual {
    Exact(ExactPoly),
    Float(FloatPoly),
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Exact(p) => p.is_zero(),
            Residual::Float(p) => p.is_zero(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        match self {
            Residual::Exact(p) => p.max_abs_coeff(),
            Residual::Float(p) => p.max_abs_coeff(),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        match self {
            Residual::Exact(p) => crate::poly::format_poly(p, names),
            Residual::Float(p) => crate::poly::format_poly(p, names),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SlotCheck {
    pub key: SlotKey,
    pub ok: bool,
    /// False when the cone cannot be checked.
    pub checked: bool,
    pub issues: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub ok: bool,
    pub residual_ok: bool,
    pub witnesses_ok: bool,
    pub residual: Residual,
    pub slots: Vec<SlotCheck>,
    pub mode: VerifyMode,
}

impl VerifyReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "mode {}: residual {} (max |coeff| {:.3e})",
            self.mode.name(),
            if self.residual_ok { "ok" } else { "FAILED" },
            self.residual.max_abs_coeff()
        );
        for c in &self.slots {
            for i in &c.issues {
                s.push_str(&format!("; {}: {}", c.key, i));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("certificate lives in Q(sqrt({cert})) but the problem in Q(sqrt({spec}))")]
    Ring { cert: u64, spec: u64 },
    #[error("slot {0} does not belong to this template")]
    UnknownSlot(String),
    #[error("slot {0} appears twice")]
    DuplicateSlot(String),
    #[error("slot {0} has {1} variables, expected {2}")]
    SlotArity(String, usize, usize),
    #[error("certificate cone {cert} differs from the problem cone {spec}")]
    Cone { cert: ConeClass, spec: ConeClass },
}

/// The slot list of the problem's template, derived from the problem alone.
pub fn expected_slots(spec: &ProblemSpec) -> Vec<SlotKey> {
    let mut keys = Vec::new();
    let key = |role, clique, constraint| SlotKey { role, clique, constraint };
    match spec.template {
        TemplateKind::Putinar => {
            for l in 0..spec.cover.cliques.len() {
                match spec.shape {
                    Shape::Split => {
                        keys.push(key(Role::Alpha0, Some(l), None));
                        keys.push(key(Role::Alpha1, Some(l), None));
                    }
                    Shape::Merged => keys.push(key(Role::Alpha, Some(l), None)),
                }
            }
            keys.extend((0..spec.m()).map(|j| key(Role::Rho, None, Some(j))));
        }
        TemplateKind::Simple => {
            keys.push(key(Role::Sigma0, None, None));
            keys.extend((0..spec.m()).map(|j| key(Role::Sigma, None, Some(j))));
        }
    }
    keys
}

/// Arguments and multiplier of a slot, rebuilt directly from the problem.
fn slot_terms(spec: &ProblemSpec, key: &SlotKey) -> (Vec<ExactPoly>, ExactPoly) {
    let n = spec.nvars();
    let x = |i: usize| Poly::<QuadNum>::var(n, i);
    let c = |v: &QuadNum| Poly::constant(n, v.clone());
    match key.role {
        Role::Alpha0 | Role::Alpha1 | Role::Alpha => {
            let l = key.clique.expect("alpha slots carry a clique");
            let idx = &spec.cover.cliques[l];
            let r = &spec.cover.radii[l];
            let mut slack = c(&r.mul(r));
            for &i in idx {
                slack = slack.sub(&x(i).mul(&x(i)));
            }
            let mut args: Vec<ExactPoly> = idx.iter().map(|&i| x(i).add(&c(r))).collect();
            for &i in idx {
                args.push(c(r).sub(&x(i)));
            }
            args.push(slack.clone());
            let mult = if key.role == Role::Alpha1 { slack } else { Poly::one(n) };
            (args, mult)
        }
        Role::Rho => {
            let j = key.constraint.expect("rho slots carry a constraint");
            let g = &spec.constraints[j];
            (vec![c(&spec.bounds[j]).sub(g)], g.clone())
        }
        Role::Sigma0 => ((0..n).map(x).collect(), Poly::one(n)),
        Role::Sigma => {
            let j = key.constraint.expect("sigma slots carry a constraint");
            ((0..n).map(x).collect(), spec.constraints[j].clone())
        }
    }
}

fn check_shape<C: Scalar>(spec: &ProblemSpec, cert: &Certificate<C>) -> Result<(), VerifyError> {
    let expected = expected_slots(spec);
    let mut seen = std::collections::HashSet::new();
    for s in &cert.slots {
        let name = s.key.to_string();
        if !expected.contains(&s.key) {
            return Err(VerifyError::UnknownSlot(name));
        }
        if !seen.insert(s.key) {
            return Err(VerifyError::DuplicateSlot(name));
        }
        let (args, _) = slot_terms(spec, &s.key);
        if s.poly.nvars() != args.len() {
            return Err(VerifyError::SlotArity(name, s.poly.nvars(), args.len()));
        }
    }
    Ok(())
}

fn cert_radicand(cert: &Certificate<QuadNum>) -> Result<u64, VerifyError> {
    let mut root = 0;
    for s in &cert.slots {
        let r = match s.poly.radicand() {
            Ok(r) => r,
            Err(crate::poly::PolyError::RadicandMismatch(a, b)) => return Err(VerifyError::Ring { cert: a, spec: b }),
            Err(_) => 0,
        };
        if r != 0 {
            if root != 0 && root != r {
                return Err(VerifyError::Ring { cert: r, spec: root });
            }
            root = r;
        }
    }
    Ok(root)
}

/// Checks the identity `p = sum_slots alpha(args) * multiplier` and every
/// slot witness. Slots absent from the certificate count as zero.
pub fn verify_certificate(spec: &ProblemSpec, cert: &AnyCertificate, mode: VerifyMode) -> Result<VerifyReport, VerifyError> {
    let cone = match cert {
        AnyCertificate::Exact(c) => c.cone,
        AnyCertificate::Float(c) => c.cone,
    };
    if cone != spec.cone {
        return Err(VerifyError::Cone { cert: cone, spec: spec.cone });
    }
    match mode {
        VerifyMode::Exact => {
            let exact = match cert {
                AnyCertificate::Exact(c) => c.clone(),
                AnyCertificate::Float(c) => exact_from_float(c),
            };
            check_shape(spec, &exact)?;
            let root = cert_radicand(&exact)?;
            if root != 0 && root != spec.radicand {
                return Err(VerifyError::Ring { cert: root, spec: spec.radicand });
            }
            let (residual, slots) = run(spec, &exact, &spec.p, 0.0, |p| p.clone());
            Ok(report(residual.is_zero(), Residual::Exact(residual), slots, mode))
        }
        VerifyMode::Float(tol) => {
            let float = cert.to_float();
            check_shape(spec, &float)?;
            let (residual, slots) = run(spec, &float, &spec.p.to_float(), tol, |p| p.to_float());
            Ok(report(residual.max_abs_coeff() <= tol, Residual::Float(residual), slots, mode))
        }
    }
}

fn run<C: Field>(
    spec: &ProblemSpec,
    cert: &Certificate<C>,
    p: &Poly<C>,
    tol: f64,
    convert: impl Fn(&ExactPoly) -> Poly<C>,
) -> (Poly<C>, Vec<SlotCheck>) {
    let mut rhs = Poly::zero(spec.nvars());
    let mut slots = Vec::new();
    for s in &cert.slots {
        let (args, mult) = slot_terms(spec, &s.key);
        let args: Vec<Poly<C>> = args.iter().map(&convert).collect();
        let composed = s.poly.substitute(&args).expect("arity checked");
        rhs = rhs.add(&composed.mul(&convert(&mult)));
        let w = verify_witness(&s.poly, &s.witness, tol);
        slots.push(SlotCheck {
            key: s.key,
            ok: w.ok,
            checked: w.checked,
            issues: w.issues,
        });
    }
    (rhs.sub(p), slots)
}

fn report(residual_ok: bool, residual: Residual, slots: Vec<SlotCheck>, mode: VerifyMode) -> VerifyReport {
    let witnesses_ok = slots.iter().all(|s| s.ok);
    VerifyReport {
        ok: residual_ok && witnesses_ok,
        residual_ok,
        witnesses_ok,
        residual,
        slots,
        mode,
    }
}

fn exact_from_float(c: &Certificate<f64>) -> Certificate<QuadNum> {
    let conv = |v: &f64| QuadNum::rational(f64_to_rational(*v).unwrap_or_default());
    Certificate {
        cone: c.cone,
        slots: c
            .slots
            .iter()
            .map(|s| crate::builder::CertSlot {
                key: s.key,
                poly: s.poly.map_coeffs(conv),
                witness: s.witness.map(conv),
            })
            .collect(),
        degree: c.degree,
        provenance: c.provenance,
        approximate: c.approximate,
    }
}

/// Largest `|rhs(x) - p(x)|` over the sample points, evaluated in binary64.
pub fn spot_check(spec: &ProblemSpec, cert: &AnyCertificate, points: &[Vec<f64>]) -> f64 {
    let cert = cert.to_float();
    let terms: Vec<(FloatPoly, Vec<FloatPoly>, FloatPoly)> = cert
        .slots
        .iter()
        .map(|s| {
            let (args, mult) = slot_terms(spec, &s.key);
            (s.poly.clone(), args.iter().map(|a| a.to_float()).collect(), mult.to_float())
        })
        .collect();
    let p = spec.p.to_float();
    let mut worst = 0.0f64;
    for x in points {
        let mut total = 0.0;
        for (poly, args, mult) in &terms {
            let at: Vec<f64> = args.iter().map(|a| a.evaluate_f64(x).expect("arity")).collect();
            total += poly.evaluate_f64(&at).expect("arity") * mult.evaluate_f64(x).expect("arity");
        }
        worst = worst.max((total - p.evaluate_f64(x).expect("arity")).abs());
    }
    worst
}
