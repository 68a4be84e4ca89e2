//! Certificate templates, their reduction to conic feasibility problems and
//! the degree search.

mod assemble;
mod certificate;
mod rationalize;
mod search;

pub use assemble::{assemble, Assembled, SlotColumns};
pub use certificate::{AnyCertificate, CertSlot, Certificate, Provenance};
pub use rationalize::{approx_rational, rationalize, RationalizeError};
pub use search::{search, DegreeReport, DegreeStatus, SearchError, SearchOptions, SearchOutcome};

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::bounds::{ball_bound, ball_bound_rational};
use crate::cones::ConeClass;
use crate::poly::{f64_to_rational, ExactPoly, Field, Poly, QuadNum, Scalar};
use crate::sizes::Shape;
use crate::sparsity::{assign_constraints, build_cover, check_i_sparse, check_rip, find_rip_order, Cover, CoverError};

/// Which identity the unknown slots are fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// Cone members composed with the ball arguments plus univariate
    /// multipliers of `U_j - g_j`.
    Putinar,
    /// `sigma_0(x) + sum_j sigma_j(x) g_j(x)` in the original variables. Kept
    /// for negative experiments.
    Simple,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundChoice {
    Value(QuadNum),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryInput {
    Ball(QuadNum),
    Cover {
        /// 0-based cliques in order; `None` infers a correlative cover.
        cliques: Option<Vec<Vec<usize>>>,
        /// One radius per clique, or a single radius for all of them.
        radii: Vec<QuadNum>,
        assign: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone)]
pub struct SpecInput {
    pub vars: Vec<String>,
    pub p: ExactPoly,
    pub constraints: Vec<(ExactPoly, BoundChoice)>,
    pub geometry: GeometryInput,
    pub cone: ConeClass,
    pub shape: Shape,
    pub template: TemplateKind,
    pub d_max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryKind {
    Ball,
    Sparse,
}

/// A validated problem: `p` to be certified on
/// `{x : g_j(x) >= 0} n (ball or clique balls)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub vars: Vec<String>,
    pub p: ExactPoly,
    pub constraints: Vec<ExactPoly>,
    /// Resolved `U_j`.
    pub bounds: Vec<QuadNum>,
    pub bound_auto: Vec<bool>,
    pub geometry: GeometryKind,
    /// For a ball this is the single clique of all variables.
    pub cover: Cover,
    pub cone: ConeClass,
    pub shape: Shape,
    pub template: TemplateKind,
    pub d_max: u32,
    /// Squarefree radicand of the coefficient field (0 for the rationals).
    pub radicand: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("no variables declared")]
    NoVariables,
    #[error("{0} has {1} variables, expected {2}")]
    Arity(String, usize, usize),
    #[error("coefficients mix sqrt({0}) and sqrt({1})")]
    Ring(u64, u64),
    #[error("radius must be positive")]
    Radius,
    #[error("U{0} must be positive")]
    Bound(usize),
    #[error("cannot compute U{0} automatically for this radius")]
    AutoBound(usize),
    #[error("cover: {0}")]
    Cover(#[from] CoverError),
    #[error("the merged shape needs a cone closed under multiplication by a variable; SOMS is not")]
    MergedSoms,
}

impl ProblemSpec {
    pub fn new(input: SpecInput) -> Result<Self, SpecError> {
        let n = input.vars.len();
        if n == 0 {
            return Err(SpecError::NoVariables);
        }
        if input.p.nvars() != n {
            return Err(SpecError::Arity("p".into(), input.p.nvars(), n));
        }
        for (j, (g, _)) in input.constraints.iter().enumerate() {
            if g.nvars() != n {
                return Err(SpecError::Arity(format!("g{}", j + 1), g.nvars(), n));
            }
        }
        if input.shape == Shape::Merged && input.cone == ConeClass::Soms && input.template == TemplateKind::Putinar {
            return Err(SpecError::MergedSoms);
        }
        let gs: Vec<ExactPoly> = input.constraints.iter().map(|(g, _)| g.clone()).collect();

        let mut ring = RingTracker::default();
        ring.poly(&input.p)?;
        for g in &gs {
            ring.poly(g)?;
        }

        let (geometry, cover) = match &input.geometry {
            GeometryInput::Ball(r) => {
                positive(r).then_some(()).ok_or(SpecError::Radius)?;
                ring.num(r)?;
                let cover = Cover {
                    cliques: vec![(0..n).collect()],
                    radii: vec![r.clone()],
                    assign: vec![0; gs.len()],
                };
                (GeometryKind::Ball, cover)
            }
            GeometryInput::Cover { cliques, radii, assign } => {
                for r in radii {
                    ring.num(r)?;
                }
                let cover = match cliques {
                    None => {
                        let first = radii.first().ok_or(CoverError::RadiiCount(1, 0))?;
                        if radii.len() != 1 {
                            return Err(CoverError::RadiiCount(1, radii.len()).into());
                        }
                        build_cover(&input.p, &gs, first)
                    }
                    Some(cl) => {
                        let radii = if radii.len() == 1 { vec![radii[0].clone(); cl.len()] } else { radii.clone() };
                        let assign = match assign {
                            Some(a) => a.clone(),
                            None => assign_constraints(cl, &gs)?,
                        };
                        Cover {
                            cliques: cl.clone(),
                            radii,
                            assign,
                        }
                    }
                };
                cover.validate(n, &gs)?;
                if !check_rip(&cover.cliques) {
                    return Err(CoverError::NotRip.into());
                }
                if !check_i_sparse(&input.p, &cover.cliques) {
                    return Err(CoverError::NotSparse.into());
                }
                (GeometryKind::Sparse, cover)
            }
        };

        let mut bounds = Vec::with_capacity(gs.len());
        let mut bound_auto = Vec::with_capacity(gs.len());
        for (j, (g, choice)) in input.constraints.iter().enumerate() {
            let u = match choice {
                BoundChoice::Value(u) => u.clone(),
                BoundChoice::Auto => auto_bound(g, &cover.radii[cover.assign[j]]).ok_or(SpecError::AutoBound(j + 1))?,
            };
            if !positive(&u) {
                return Err(SpecError::Bound(j + 1));
            }
            ring.num(&u)?;
            bounds.push(u);
            bound_auto.push(matches!(choice, BoundChoice::Auto));
        }

        Ok(ProblemSpec {
            vars: input.vars,
            p: input.p,
            constraints: gs,
            bounds,
            bound_auto,
            geometry,
            cover,
            cone: input.cone,
            shape: input.shape,
            template: input.template,
            d_max: input.d_max,
            radicand: ring.root,
        })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }
}

/// Ball bound rounded up to a multiple of 1/1000.
fn auto_bound(g: &ExactPoly, r: &QuadNum) -> Option<QuadNum> {
    if let Some(u) = ball_bound_rational(g, r, 1000) {
        return Some(QuadNum::rational(u));
    }
    let u = ball_bound(g, r.to_f64());
    let up = (u * 1000.0 * (1.0 + 1e-12)).ceil() / 1000.0;
    f64_to_rational(up).map(|q: BigRational| QuadNum::rational(q))
}

fn positive(q: &QuadNum) -> bool {
    q.sign(0.0) == std::cmp::Ordering::Greater
}

#[derive(Default)]
struct RingTracker {
    root: u64,
}

impl RingTracker {
    fn add(&mut self, r: u64) -> Result<(), SpecError> {
        if r != 0 {
            if self.root != 0 && self.root != r {
                return Err(SpecError::Ring(self.root, r));
            }
            self.root = r;
        }
        Ok(())
    }

    fn num(&mut self, q: &QuadNum) -> Result<(), SpecError> {
        self.add(q.root())
    }

    fn poly(&mut self, p: &ExactPoly) -> Result<(), SpecError> {
        match p.radicand() {
            Ok(r) => self.add(r),
            Err(crate::poly::PolyError::RadicandMismatch(a, b)) => Err(SpecError::Ring(a, b)),
            Err(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Alpha0,
    Alpha1,
    /// The single alpha slot of a merged template.
    Alpha,
    Rho,
    Sigma0,
    Sigma,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Alpha0 => "alpha0",
            Role::Alpha1 => "alpha1",
            Role::Alpha => "alpha",
            Role::Rho => "rho",
            Role::Sigma0 => "sigma0",
            Role::Sigma => "sigma",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "alpha0" => Role::Alpha0,
            "alpha1" => Role::Alpha1,
            "alpha" => Role::Alpha,
            "rho" => Role::Rho,
            "sigma0" => Role::Sigma0,
            "sigma" => Role::Sigma,
            _ => return None,
        })
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifies a slot inside a template: role, 0-based clique and 0-based
/// constraint where applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotKey {
    pub role: Role,
    pub clique: Option<usize>,
    pub constraint: Option<usize>,
}

impl fmt::Display for SlotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.role)?;
        if let Some(l) = self.clique {
            write!(f, "[clique {}]", l + 1)?;
        }
        if let Some(j) = self.constraint {
            write!(f, "[g{}]", j + 1)?;
        }
        Ok(())
    }
}

/// One unknown cone member `alpha(args) * multiplier`.
#[derive(Debug, Clone)]
pub struct Slot {
    pub key: SlotKey,
    pub arity: usize,
    /// Degree cap `2d` in the slot's own variables.
    pub max_degree: u32,
    /// Arguments substituted for the slot variables, in the problem ring.
    pub args: Vec<ExactPoly>,
    pub multiplier: ExactPoly,
    pub var_names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CertificateTemplate {
    pub d: u32,
    pub slots: Vec<Slot>,
    /// Highest degree the expanded identity can reach.
    pub expansion_degree: u32,
}

/// Local names `y1..yk, z1..zk, u` of a clique slot with `k` variables.
pub fn clique_var_names(k: usize) -> Vec<String> {
    (1..=k)
        .map(|i| format!("y{i}"))
        .chain((1..=k).map(|i| format!("z{i}")))
        .chain(std::iter::once("u".to_string()))
        .collect()
}

/// `x_I + R, R - x_I, R^2 - |x_I|^2` for clique `I`.
fn ball_args(n: usize, clique: &[usize], r: &QuadNum) -> Vec<ExactPoly> {
    let rc = Poly::constant(n, r.clone());
    let mut args: Vec<ExactPoly> = clique.iter().map(|&i| Poly::var(n, i).add(&rc)).collect();
    args.extend(clique.iter().map(|&i| rc.sub(&Poly::var(n, i))));
    args.push(ball_slack(n, clique, r));
    args
}

fn ball_slack(n: usize, clique: &[usize], r: &QuadNum) -> ExactPoly {
    let mut s = Poly::constant(n, r.square());
    for &i in clique {
        s = s.sub(&Poly::var(n, i).pow(2));
    }
    s
}

/// Slots of the template at degree parameter `d`; each slot is capped at
/// degree `2d` in its own variables.
pub fn build_template(spec: &ProblemSpec, d: u32) -> CertificateTemplate {
    let n = spec.nvars();
    let one = Poly::one(n);
    let mut slots = Vec::new();
    let key = |role, clique, constraint| SlotKey { role, clique, constraint };
    match spec.template {
        TemplateKind::Putinar => {
            for (l, clique) in spec.cover.cliques.iter().enumerate() {
                let r = &spec.cover.radii[l];
                let args = ball_args(n, clique, r);
                let names = clique_var_names(clique.len());
                let mk = |role, multiplier: ExactPoly| Slot {
                    key: key(role, Some(l), None),
                    arity: args.len(),
                    max_degree: 2 * d,
                    args: args.clone(),
                    multiplier,
                    var_names: names.clone(),
                };
                match spec.shape {
                    Shape::Split => {
                        slots.push(mk(Role::Alpha0, one.clone()));
                        slots.push(mk(Role::Alpha1, ball_slack(n, clique, r)));
                    }
                    Shape::Merged => slots.push(mk(Role::Alpha, one.clone())),
                }
            }
            for (j, g) in spec.constraints.iter().enumerate() {
                let arg = Poly::constant(n, spec.bounds[j].clone()).sub(g);
                slots.push(Slot {
                    key: key(Role::Rho, None, Some(j)),
                    arity: 1,
                    max_degree: 2 * d,
                    args: vec![arg],
                    multiplier: g.clone(),
                    var_names: vec!["u".into()],
                });
            }
        }
        TemplateKind::Simple => {
            let ident: Vec<ExactPoly> = (0..n).map(|i| Poly::var(n, i)).collect();
            slots.push(Slot {
                key: key(Role::Sigma0, None, None),
                arity: n,
                max_degree: 2 * d,
                args: ident.clone(),
                multiplier: one.clone(),
                var_names: spec.vars.clone(),
            });
            for (j, g) in spec.constraints.iter().enumerate() {
                slots.push(Slot {
                    key: key(Role::Sigma, None, Some(j)),
                    arity: n,
                    max_degree: 2 * d,
                    args: ident.clone(),
                    multiplier: g.clone(),
                    var_names: spec.vars.clone(),
                });
            }
        }
    }
    let expansion_degree = slots
        .iter()
        .map(|s| {
            let arg_deg = s.args.iter().map(|a| a.degree()).max().unwrap_or(0);
            s.max_degree * arg_deg + s.multiplier.degree()
        })
        .chain(std::iter::once(spec.p.degree()))
        .max()
        .unwrap_or(0);
    CertificateTemplate {
        d,
        slots,
        expansion_degree,
    }
}

/// Suggests a running-intersection order for cliques given out of order.
pub fn suggest_order(cliques: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
    find_rip_order(cliques).map(|o| o.into_iter().map(|i| cliques[i].clone()).collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::poly::{default_names, parse};

    pub(crate) fn example3() -> ProblemSpec {
        let vars = default_names(2);
        ProblemSpec::new(SpecInput {
            p: parse("(2 - x1 - x2)^2", &vars).unwrap(),
            vars,
            constraints: vec![],
            geometry: GeometryInput::Ball(QuadNum::one()),
            cone: ConeClass::Soms,
            shape: Shape::Split,
            template: TemplateKind::Putinar,
            d_max: 2,
        })
        .unwrap()
    }

    pub(crate) fn example1(template: TemplateKind, cone: ConeClass) -> ProblemSpec {
        let vars = default_names(2);
        ProblemSpec::new(SpecInput {
            p: parse("(2 - x1 - x2)^2", &vars).unwrap(),
            constraints: vec![(parse("1 - x1^2 - x2^2", &vars).unwrap(), BoundChoice::Auto)],
            vars,
            geometry: GeometryInput::Ball(QuadNum::one()),
            cone,
            shape: Shape::Split,
            template,
            d_max: 2,
        })
        .unwrap()
    }

    pub(crate) fn example4(cone: ConeClass) -> ProblemSpec {
        let vars = default_names(3);
        let mut constraints = Vec::new();
        for s in ["1 - ", "1 + "] {
            for i in 1..=3 {
                constraints.push((parse(&format!("{s}x{i}"), &vars).unwrap(), BoundChoice::Value(QuadNum::integer(3))));
            }
        }
        let r = QuadNum::sqrt_of(&BigRational::from_integer(2.into())).unwrap();
        ProblemSpec::new(SpecInput {
            p: parse("11 + 2*x1^2 + 4*x1*x2 - x2^2 - 2*x2*x3 - 3*x3 - 2*x3^3", &vars).unwrap(),
            vars,
            constraints,
            geometry: GeometryInput::Cover {
                cliques: Some(vec![vec![0, 1], vec![1, 2]]),
                radii: vec![r],
                assign: None,
            },
            cone,
            shape: Shape::Split,
            template: TemplateKind::Putinar,
            d_max: 2,
        })
        .unwrap()
    }

    #[test]
    fn template_structure() {
        let t = build_template(&example3(), 2);
        assert_eq!(t.slots.len(), 2);
        assert!(t.slots.iter().all(|s| s.arity == 5 && s.max_degree == 4));
        assert_eq!(t.expansion_degree, 10);

        let spec = example4(ConeClass::Sdsos);
        assert_eq!(spec.radicand, 2);
        assert_eq!(spec.cover.assign, vec![0, 0, 1, 0, 0, 1]);
        let t = build_template(&spec, 1);
        let alphas = t.slots.iter().filter(|s| s.arity == 5).count();
        let rhos = t.slots.iter().filter(|s| s.key.role == Role::Rho && s.arity == 1).count();
        assert_eq!((alphas, rhos), (4, 6));
    }

    #[test]
    fn spec_validation() {
        let vars = default_names(2);
        let base = SpecInput {
            p: parse("1", &vars).unwrap(),
            vars: vars.clone(),
            constraints: vec![],
            geometry: GeometryInput::Ball(QuadNum::one()),
            cone: ConeClass::Soms,
            shape: Shape::Merged,
            template: TemplateKind::Putinar,
            d_max: 0,
        };
        assert_eq!(ProblemSpec::new(base.clone()).unwrap_err(), SpecError::MergedSoms);
        let mut ok = base.clone();
        ok.cone = ConeClass::Dsos;
        let t = build_template(&ProblemSpec::new(ok).unwrap(), 0);
        assert_eq!(t.slots.len(), 1);
        assert_eq!(t.slots[0].max_degree, 0);

        let mut bad = base.clone();
        bad.cone = ConeClass::Dsos;
        bad.geometry = GeometryInput::Cover {
            cliques: Some(vec![vec![0], vec![1]]),
            radii: vec![QuadNum::one()],
            assign: None,
        };
        bad.p = parse("x1*x2", &vars).unwrap();
        assert_eq!(ProblemSpec::new(bad).unwrap_err(), SpecError::Cover(CoverError::NotSparse));

        let mut auto = base;
        auto.cone = ConeClass::Dsos;
        auto.constraints = vec![(parse("1 - x1^2 - x2^2", &vars).unwrap(), BoundChoice::Auto)];
        let spec = ProblemSpec::new(auto).unwrap();
        assert_eq!(spec.bounds[0], QuadNum::ratio(3465, 1000));
    }
}
