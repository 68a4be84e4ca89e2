//! Command-line front end. Data goes to `out`, diagnostics to `err`.
//!
//! Exit codes: 0 success, 1 no certificate found, 2 verification residual
//! failure, 3 witness failure, 64 usage, input or validation errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::One;

use crate::bounds::ball_bound;
use crate::builder::{search, AnyCertificate, GeometryInput, ProblemSpec, SearchOptions};
use crate::io::{certificate_from_json, certificate_to_json, IoError, ProblemFile};
use crate::poly::{format_poly, Field, QuadNum, Scalar};
use crate::sizes::{rosenbrock_cover, table_row, Shape};
use crate::sparsity::{build_cover, check_i_sparse, check_rip, find_rip_order};
use crate::verify::{verify_certificate, VerifyMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_RESIDUAL: i32 = 2;
pub const EXIT_WITNESS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "psatz", version, about = "Putinar-type nonnegativity certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Search for a certificate by degree escalation.
    Certify {
        problem: PathBuf,
        /// Rationalize numeric certificates (default).
        #[arg(long, conflicts_with = "float")]
        exact: bool,
        /// Keep numeric certificates in floating point.
        #[arg(long)]
        float: bool,
        /// Write the certificate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the file's degree cap.
        #[arg(long)]
        d_max: Option<u32>,
        /// Use the plain quadratic-module template in the original variables.
        #[arg(long)]
        simple: bool,
    },
    /// Check a certificate against a problem.
    Verify {
        problem: PathBuf,
        certificate: PathBuf,
        /// Defaults to the certificate's own mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// The certificate uses the plain quadratic-module template.
        #[arg(long)]
        simple: bool,
    },
    /// Template size totals.
    Sizes {
        #[arg(long, value_enum, default_value_t = ShapeArg::Split)]
        shape: ShapeArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        /// Number of constraints; the rosenbrock preset uses 2n.
        #[arg(long)]
        m: Option<usize>,
        /// Clique sizes of the cover, comma separated.
        #[arg(long, value_delimiter = ',')]
        cover: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        json: bool,
    },
    /// Ball bounds U_j for every constraint.
    Bound { problem: PathBuf },
    /// The cover of a problem and its running intersection verdict.
    Cover { problem: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShapeArg {
    Split,
    Merged,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Rosenbrock,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Certify {
            problem,
            exact: _,
            float,
            out: target,
            d_max,
            simple,
        } => certify(&problem, !float, target.as_deref(), d_max, simple, out, err),
        Cmd::Verify {
            problem,
            certificate,
            mode,
            tol,
            simple,
        } => verify(&problem, &certificate, mode, tol, simple, out),
        Cmd::Sizes {
            shape,
            n,
            d,
            m,
            cover,
            preset,
            json,
        } => sizes(shape, n, d, m, cover, preset, json, out),
        Cmd::Bound { problem } => bound(&problem, out),
        Cmd::Cover { problem } => cover(&problem, out),
    };
    match res {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

type CmdResult = Result<i32, String>;

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_problem(path: &Path, simple: bool) -> Result<ProblemSpec, String> {
    let text = read(path)?;
    ProblemFile::read(&text)
        .and_then(|f| f.into_spec(simple))
        .map_err(|e: IoError| format!("{}: {e}", path.display()))
}

fn io_err(e: std::io::Error) -> String {
    e.to_string()
}

fn certify(
    path: &Path,
    exact: bool,
    target: Option<&Path>,
    d_max: Option<u32>,
    simple: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let spec = load_problem(path, simple)?;
    let opts = SearchOptions {
        rationalize: exact,
        ..SearchOptions::default()
    };
    let d_max = d_max.unwrap_or(spec.d_max);
    let outcome = search(&spec, spec.cone, d_max, &opts).map_err(|e| e.to_string())?;
    let mut report = String::new();
    for r in &outcome.reports {
        report.push_str(&format!(
            "d={} {} rows={} (nominal {}) cols={} iterations={} time={:.3}s\n",
            r.d,
            r.status.label(),
            r.rows,
            r.nominal_rows,
            r.cols,
            r.iterations,
            r.seconds
        ));
    }
    let Some(cert) = outcome.certificate else {
        write!(out, "no certificate up to d={d_max}\n{report}").map_err(io_err)?;
        return Ok(EXIT_NOT_FOUND);
    };
    write!(err, "{report}").map_err(io_err)?;
    if let (true, Some(e)) = (exact, &outcome.rationalize_error) {
        writeln!(err, "warning: certificate left in floating point: {e}").map_err(io_err)?;
    }
    let text = serde_json::to_string_pretty(&certificate_to_json(&spec, &cert)).expect("JSON values serialize");
    match target {
        Some(p) => {
            std::fs::write(p, text + "\n").map_err(|e| format!("{}: {e}", p.display()))?;
            writeln!(err, "certificate of degree {} written to {}", cert.degree(), p.display()).map_err(io_err)?;
        }
        None => writeln!(out, "{text}").map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

fn verify(
    problem: &Path,
    cert_path: &Path,
    mode: Option<ModeArg>,
    tol: f64,
    simple: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let spec = load_problem(problem, simple)?;
    let text = read(cert_path)?;
    let cert = certificate_from_json(&spec, &text).map_err(|e| format!("{}: {e}", cert_path.display()))?;
    let mode = match mode {
        Some(ModeArg::Exact) => VerifyMode::Exact,
        Some(ModeArg::Float) => VerifyMode::Float(tol),
        None if cert.is_exact() => VerifyMode::Exact,
        None => VerifyMode::Float(tol),
    };
    let rep = verify_certificate(&spec, &cert, mode).map_err(|e| e.to_string())?;
    writeln!(out, "{}", rep.summary()).map_err(io_err)?;
    if !rep.residual_ok {
        writeln!(out, "residual: {}", rep.residual.render(&spec.vars)).map_err(io_err)?;
        return Ok(EXIT_RESIDUAL);
    }
    if !rep.witnesses_ok {
        return Ok(EXIT_WITNESS);
    }
    if let AnyCertificate::Float(c) = &cert {
        if c.approximate {
            writeln!(out, "note: the certificate is marked approximate").map_err(io_err)?;
        }
    }
    writeln!(out, "ok").map_err(io_err)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn sizes(
    shape: ShapeArg,
    n: usize,
    d: u32,
    m: Option<usize>,
    cover: Option<Vec<usize>>,
    preset: Option<Preset>,
    json: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let shape = match shape {
        ShapeArg::Split => Shape::Split,
        ShapeArg::Merged => Shape::Merged,
    };
    let (m, cover) = match preset {
        Some(Preset::Rosenbrock) => (m.unwrap_or(2 * n), cover.unwrap_or_else(|| rosenbrock_cover(n))),
        None => (
            m.ok_or("--m is required without a preset")?,
            cover.ok_or("--cover is required without a preset")?,
        ),
    };
    let row = table_row(shape, n, d, m, &cover).map_err(|e| e.to_string())?;
    if json {
        let text = serde_json::to_string_pretty(&row).expect("reports serialize");
        writeln!(out, "{text}").map_err(io_err)?;
        return Ok(EXIT_OK);
    }
    let cover_text: Vec<String> = cover.iter().map(usize::to_string).collect();
    writeln!(
        out,
        "shape={} n={n} d={d} m={m} cover={}",
        shape.name(),
        cover_text.join(",")
    )
    .map_err(io_err)?;
    writeln!(out, "{:<13} {:>12} {:>12}", "template", "gram", "monomials").map_err(io_err)?;
    for r in &row {
        writeln!(out, "{:<13} {:>12} {:>12}", r.sparsity.name(), r.gram_total, r.monomial_total).map_err(io_err)?;
    }
    writeln!(
        out,
        "row: {} {} {} / {} {} {}",
        row[0].gram_total,
        row[1].gram_total,
        row[2].gram_total,
        row[0].monomial_total,
        row[1].monomial_total,
        row[2].monomial_total
    )
    .map_err(io_err)?;
    Ok(EXIT_OK)
}

/// `||g|| (1 + r^2)^(d/2)` in closed form when its square is rational.
fn exact_ball_bound(g: &crate::poly::ExactPoly, r: &QuadNum) -> Option<QuadNum> {
    let d = g.degree();
    if d == 0 {
        let c = g.constant_term();
        return Some(Field::abs(&c));
    }
    let n2 = g.weighted_norm_squared(d).ok()?.as_rational()?.clone();
    let r2 = r.square().as_rational()?.clone();
    let t = n2 * num_traits::pow(BigRational::one() + r2, d as usize);
    QuadNum::sqrt_of(&t)
}

fn bound(path: &Path, out: &mut dyn Write) -> CmdResult {
    let spec = load_problem(path, false)?;
    if spec.m() == 0 {
        writeln!(out, "no constraints").map_err(io_err)?;
        return Ok(EXIT_OK);
    }
    for (j, g) in spec.constraints.iter().enumerate() {
        let r = &spec.cover.radii[spec.cover.assign[j]];
        let val = ball_bound(g, r.to_f64());
        let exact = exact_ball_bound(g, r).map(|q| format!("{q} ~ ")).unwrap_or_default();
        let used = if spec.bound_auto[j] { "auto" } else { "given" };
        writeln!(
            out,
            "g{} = {}  r = {}  U{} = {exact}{val:.6}  ({used} U{} = {})",
            j + 1,
            format_poly(g, &spec.vars),
            r,
            j + 1,
            j + 1,
            spec.bounds[j]
        )
        .map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn cover(path: &Path, out: &mut dyn Write) -> CmdResult {
    let text = read(path)?;
    let file = ProblemFile::read(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let (p, gs) = file.polys().map_err(|e| format!("{}: {e}", path.display()))?;
    let geometry = file.geometry_input().map_err(|e| format!("{}: {e}", path.display()))?;
    let (cliques, source) = match geometry {
        GeometryInput::Cover { cliques: Some(c), .. } => (c, "file"),
        GeometryInput::Cover { radii, .. } => {
            let r = radii.first().cloned().unwrap_or_else(QuadNum::one);
            (build_cover(&p, &gs, &r).cliques, "inferred")
        }
        GeometryInput::Ball(r) => (build_cover(&p, &gs, &r).cliques, "inferred"),
    };
    let fmt = |c: &[usize]| {
        let items: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", items.join(","))
    };
    let listed: Vec<String> = cliques.iter().map(|c| fmt(c)).collect();
    writeln!(out, "cliques ({source}): {}", listed.join(" ")).map_err(io_err)?;
    let rip = check_rip(&cliques);
    writeln!(out, "RIP: {rip}").map_err(io_err)?;
    if !rip {
        match find_rip_order(&cliques) {
            Some(o) => {
                let reordered: Vec<String> = o.iter().map(|&i| fmt(&cliques[i])).collect();
                writeln!(out, "RIP order exists: {}", reordered.join(" ")).map_err(io_err)?;
            }
            None => writeln!(out, "no RIP order exists").map_err(io_err)?,
        }
    }
    writeln!(out, "p sparse for the cover: {}", check_i_sparse(&p, &cliques)).map_err(io_err)?;
    Ok(EXIT_OK)
}
