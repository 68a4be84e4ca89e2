use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use psatz::builder::{build_template, search, AnyCertificate, ProblemSpec, SearchOptions};
use psatz::io::{certificate_from_json, certificate_to_json, parse_problem};
use psatz::poly::{format_poly, parse};
use psatz::sizes::{table_row, Shape};
use psatz::verify::{verify_certificate, VerifyMode};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated certification problem.
#[pyclass(frozen)]
struct Problem {
    spec: ProblemSpec,
}

#[pymethods]
impl Problem {
    #[staticmethod]
    #[pyo3(signature = (text, simple = false))]
    fn from_json(text: &str, simple: bool) -> PyResult<Self> {
        Ok(Problem {
            spec: parse_problem(text, simple).map_err(value_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, simple = false))]
    fn from_file(path: &str, simple: bool) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_err)?;
        Self::from_json(&text, simple)
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.spec.nvars()
    }

    #[getter]
    fn m(&self) -> usize {
        self.spec.m()
    }

    #[getter]
    fn cone(&self) -> &'static str {
        self.spec.cone.name()
    }

    /// Cliques with 1-based variable indices.
    #[getter]
    fn cliques(&self) -> Vec<Vec<usize>> {
        self.spec.cover.cliques.iter().map(|c| c.iter().map(|i| i + 1).collect()).collect()
    }

    #[getter]
    fn bounds(&self) -> Vec<String> {
        self.spec.bounds.iter().map(|u| u.to_string()).collect()
    }

    /// Slot names of the template at degree parameter `d`.
    fn slots(&self, d: u32) -> Vec<String> {
        build_template(&self.spec, d).slots.iter().map(|s| s.key.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(nvars={}, m={}, cone={}, p={})",
            self.spec.nvars(),
            self.spec.m(),
            self.spec.cone,
            format_poly(&self.spec.p, &self.spec.vars)
        )
    }
}

#[pyclass(frozen)]
struct Certificate {
    cert: AnyCertificate,
    json: String,
}

#[pymethods]
impl Certificate {
    #[staticmethod]
    fn from_json(problem: &Problem, text: &str) -> PyResult<Self> {
        let cert = certificate_from_json(&problem.spec, text).map_err(value_err)?;
        Ok(Certificate {
            cert,
            json: text.to_string(),
        })
    }

    fn to_json(&self) -> String {
        self.json.clone()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.cert.degree()
    }

    #[getter]
    fn is_exact(&self) -> bool {
        self.cert.is_exact()
    }
}

/// Searches degrees `0..=d_max`; returns the certificate (or None) and one
/// report line per degree.
#[pyfunction]
#[pyo3(signature = (problem, d_max = None, exact = true))]
fn certify(problem: &Problem, d_max: Option<u32>, exact: bool) -> PyResult<(Option<Certificate>, Vec<String>)> {
    let spec = &problem.spec;
    let opts = SearchOptions {
        rationalize: exact,
        ..SearchOptions::default()
    };
    let out = search(spec, spec.cone, d_max.unwrap_or(spec.d_max), &opts).map_err(value_err)?;
    let reports = out
        .reports
        .iter()
        .map(|r| format!("d={} {} rows={} cols={}", r.d, r.status.label(), r.rows, r.cols))
        .collect();
    let cert = out.certificate.map(|c| Certificate {
        json: serde_json::to_string_pretty(&certificate_to_json(spec, &c)).expect("JSON values serialize"),
        cert: c,
    });
    Ok((cert, reports))
}

/// Verifies a certificate; `mode` is "exact", "float" or None for the
/// certificate's own mode.
#[pyfunction]
#[pyo3(signature = (problem, certificate, mode = None, tol = 1e-8))]
fn verify<'py>(
    py: Python<'py>,
    problem: &Problem,
    certificate: &Certificate,
    mode: Option<&str>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match mode {
        Some("exact") => VerifyMode::Exact,
        Some("float") => VerifyMode::Float(tol),
        None if certificate.cert.is_exact() => VerifyMode::Exact,
        None => VerifyMode::Float(tol),
        Some(other) => return Err(value_err(format!("unknown mode '{other}'"))),
    };
    let rep = verify_certificate(&problem.spec, &certificate.cert, mode).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("ok", rep.ok)?;
    d.set_item("residual_ok", rep.residual_ok)?;
    d.set_item("witnesses_ok", rep.witnesses_ok)?;
    d.set_item("residual", rep.residual.render(&problem.spec.vars))?;
    d.set_item("summary", rep.summary())?;
    Ok(d)
}

/// Gram and monomial totals for the non-sparse, semi-sparse and
/// fully-sparse templates.
#[pyfunction]
fn template_sizes(shape: &str, n: usize, d: u32, m: usize, cover: Vec<usize>) -> PyResult<Vec<(String, u128, u128)>> {
    let shape: Shape = shape.parse().map_err(value_err)?;
    let row = table_row(shape, n, d, m, &cover).map_err(value_err)?;
    Ok(row
        .iter()
        .map(|r| (r.sparsity.name().to_string(), r.gram_total, r.monomial_total))
        .collect())
}

/// Canonical text of a polynomial.
#[pyfunction]
fn normalize(text: &str, vars: Vec<String>) -> PyResult<String> {
    let p = parse(text, &vars).map_err(value_err)?;
    Ok(format_poly(&p, &vars))
}

#[pyfunction]
fn ball_bound(text: &str, vars: Vec<String>, r: f64) -> PyResult<f64> {
    let p = parse(text, &vars).map_err(value_err)?;
    Ok(psatz::bounds::ball_bound(&p, r))
}

/// Running intersection property of an ordered list of cliques.
#[pyfunction]
fn check_rip(cliques: Vec<Vec<usize>>) -> bool {
    psatz::sparsity::check_rip(&cliques)
}

#[pyfunction]
fn evaluate(text: &str, vars: Vec<String>, point: Vec<f64>) -> PyResult<f64> {
    let p = parse(text, &vars).map_err(value_err)?;
    p.evaluate_f64(&point).map_err(value_err)
}

#[pymodule]
fn pypsatz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Certificate>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(template_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(ball_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_rip, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
