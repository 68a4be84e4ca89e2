use std::time::Instant;

use thiserror::Error;

use super::assemble::{assemble, Assembled};
use super::certificate::{AnyCertificate, CertSlot, Certificate, Provenance};
use super::rationalize::{rationalize, RationalizeError};
use super::{build_template, CertificateTemplate, ProblemSpec};
use crate::cones::{recover_witness, ConeClass, ConeError};
use crate::poly::{default_names, format_poly, Field, Poly, QuadNum, Scalar};
use crate::solver::{solve_lp, solve_socp, BlockKind, SocpSettings, Status};
use crate::verify::{verify_certificate, VerifyMode};

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub socp: SocpSettings,
    /// Try to turn a numeric certificate into an exact one.
    pub rationalize: bool,
    /// Residual tolerance for accepting a numeric certificate.
    pub float_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            socp: SocpSettings {
                feas_tol: 1e-9,
                cone_tol: 1e-9,
                ..SocpSettings::default()
            },
            rationalize: true,
            float_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegreeStatus {
    Feasible,
    /// Exact proof of infeasibility: the positive phase-1 optimum.
    Infeasible { bound: QuadNum },
    /// A monomial of `p` is out of reach of every column.
    Unreachable { monomial: String },
    NotFound,
    NonConverged,
    /// The solver returned a point that failed independent verification.
    Rejected { reason: String },
}

impl DegreeStatus {
    pub fn label(&self) -> String {
        match self {
            DegreeStatus::Feasible => "feasible".into(),
            DegreeStatus::Infeasible { bound } => format!("infeasible (exact, phase-1 bound {bound})"),
            DegreeStatus::Unreachable { monomial } => format!("infeasible (monomial {monomial} unreachable)"),
            DegreeStatus::NotFound => "not found (numeric)".into(),
            DegreeStatus::NonConverged => "not converged".into(),
            DegreeStatus::Rejected { reason } => format!("rejected: {reason}"),
        }
    }

    /// Infeasibility established exactly rather than numerically.
    pub fn is_exact_infeasible(&self) -> bool {
        matches!(self, DegreeStatus::Infeasible { .. } | DegreeStatus::Unreachable { .. })
    }
}

#[derive(Debug, Clone)]
pub struct DegreeReport {
    pub d: u32,
    pub status: DegreeStatus,
    pub nominal_rows: u128,
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub certificate: Option<AnyCertificate>,
    pub reports: Vec<DegreeReport>,
    /// Why a numeric certificate stayed numeric.
    pub rationalize_error: Option<RationalizeError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("cone {0} cannot be searched")]
    Unsupported(ConeClass),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Tries `d = 0, 1, ..., d_max` and returns the first certificate found.
pub fn search(spec: &ProblemSpec, cone: ConeClass, d_max: u32, opts: &SearchOptions) -> Result<SearchOutcome, SearchError> {
    if !cone.searchable() {
        return Err(SearchError::Unsupported(cone));
    }
    let mut reports = Vec::new();
    for d in 0..=d_max {
        let start = Instant::now();
        let template = build_template(spec, d);
        let asm = assemble(&template, spec, cone)?;
        let mut report = DegreeReport {
            d,
            status: DegreeStatus::NotFound,
            nominal_rows: asm.nominal_rows,
            rows: asm.problem.nrows(),
            cols: asm.problem.ncols,
            iterations: 0,
            seconds: 0.0,
        };
        if let Some(m) = &asm.unreachable {
            let names = default_names(spec.nvars());
            let mono = format_poly(&Poly::<QuadNum>::monomial(m.clone(), QuadNum::one()), &names);
            report.status = DegreeStatus::Unreachable { monomial: mono };
            report.seconds = start.elapsed().as_secs_f64();
            reports.push(report);
            continue;
        }
        let found = match cone {
            ConeClass::Soms | ConeClass::Dsos => {
                let out = solve_lp(&asm.problem).expect("assembled problems are linear");
                report.iterations = out.iterations;
                match out.status {
                    Status::Feasible(w) => {
                        let cert = certificate_from(&template, &asm, &w, cone, d);
                        Some(AnyCertificate::Exact(cert))
                    }
                    Status::Infeasible { bound } => {
                        report.status = DegreeStatus::Infeasible { bound };
                        None
                    }
                    s => unreachable!("feasibility LP returned {s:?}"),
                }
            }
            _ => {
                let prob = asm.problem.to_float();
                let out = solve_socp(&prob, &opts.socp).expect("assembled problems are valid");
                report.iterations = out.iterations;
                match out.status {
                    Status::Feasible(mut w) => {
                        snap_to_cone(&asm, &mut w);
                        Some(AnyCertificate::Float(certificate_from(&template, &asm, &w, cone, d)))
                    }
                    Status::NonConverged => {
                        report.status = DegreeStatus::NonConverged;
                        None
                    }
                    _ => None,
                }
            }
        };
        let Some(cert) = found else {
            report.seconds = start.elapsed().as_secs_f64();
            reports.push(report);
            continue;
        };

        let checked = match &cert {
            AnyCertificate::Exact(c) => verify_certificate(spec, &AnyCertificate::Exact(c.clone()), VerifyMode::Exact),
            AnyCertificate::Float(c) => {
                verify_certificate(spec, &AnyCertificate::Float(c.clone()), VerifyMode::Float(opts.float_tol))
            }
        };
        let report_ok = checked.as_ref().map(|r| r.ok).unwrap_or(false);
        if !report_ok {
            let reason = match checked {
                Ok(r) => r.summary(),
                Err(e) => e.to_string(),
            };
            report.status = DegreeStatus::Rejected { reason };
            report.seconds = start.elapsed().as_secs_f64();
            reports.push(report);
            continue;
        }

        let mut rationalize_error = None;
        let cert = match cert {
            AnyCertificate::Float(c) if opts.rationalize => match rationalize(spec, &c) {
                Ok(exact) => AnyCertificate::Exact(exact),
                Err(e) => {
                    rationalize_error = Some(e);
                    let mut c = c;
                    c.approximate = true;
                    AnyCertificate::Float(c)
                }
            },
            AnyCertificate::Float(mut c) => {
                c.approximate = true;
                AnyCertificate::Float(c)
            }
            exact => exact,
        };
        report.status = DegreeStatus::Feasible;
        report.seconds = start.elapsed().as_secs_f64();
        reports.push(report);
        return Ok(SearchOutcome {
            certificate: Some(cert),
            reports,
            rationalize_error,
        });
    }
    Ok(SearchOutcome {
        certificate: None,
        reports,
        rationalize_error: None,
    })
}

fn certificate_from<C: Field>(
    template: &CertificateTemplate,
    asm: &Assembled,
    values: &[C],
    cone: ConeClass,
    d: u32,
) -> Certificate<C> {
    let slots = template
        .slots
        .iter()
        .zip(&asm.slots)
        .map(|(slot, cols)| {
            let vals = &values[cols.offset..cols.offset + cols.param.len()];
            let witness = recover_witness(&cols.param, vals);
            CertSlot {
                key: slot.key,
                poly: witness.polynomial(slot.arity),
                witness,
            }
        })
        .collect();
    Certificate {
        cone,
        slots,
        degree: d,
        provenance: Provenance::Found,
        approximate: false,
    }
}

/// Moves a numeric solution exactly onto the cone: negative weights are
/// clipped and each `(a, b, t)` block is projected onto `ab >= t^2`.
fn snap_to_cone(asm: &Assembled, w: &mut [f64]) {
    use std::f64::consts::SQRT_2;
    for b in &asm.problem.blocks {
        match b.kind {
            BlockKind::Free => {}
            BlockKind::Nonneg => {
                for j in b.range.clone() {
                    w[j] = w[j].max(0.0);
                }
            }
            BlockKind::Rsoc => {
                let s = b.range.start;
                let (a, bb, t) = (w[s], w[s + 1], w[s + 2]);
                // (a, b, t) -> ((a+b)/sqrt2, (a-b)/sqrt2, sqrt2 t) is orthogonal
                // and maps the cone onto the standard second-order cone.
                let p = (a + bb) / SQRT_2;
                let q = (a - bb) / SQRT_2;
                let r = SQRT_2 * t;
                let nrm = q.hypot(r);
                let (p2, q2, r2) = if nrm <= p {
                    (p, q, r)
                } else if nrm <= -p {
                    (0.0, 0.0, 0.0)
                } else {
                    let alpha = 0.5 * (p + nrm);
                    (alpha, alpha * q / nrm, alpha * r / nrm)
                };
                let (mut a2, mut b2, mut t2) = ((p2 + q2) / SQRT_2, (p2 - q2) / SQRT_2, r2 / SQRT_2);
                // Rounding may leave a*b a hair below t^2; shrink t to match.
                a2 = a2.max(0.0);
                b2 = b2.max(0.0);
                let lim = (a2 * b2).sqrt();
                if t2.abs() > lim {
                    t2 = lim.copysign(t2);
                }
                w[s] = a2;
                w[s + 1] = b2;
                w[s + 2] = t2;
            }
        }
    }
}
