//! JSON problem files and certificate documents.
//!
//! Variable and clique indices are 1-based in files. Exact coefficients are
//! written as strings in the polynomial grammar, float ones as JSON numbers.

use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::builder::{
    clique_var_names, AnyCertificate, BoundChoice, CertSlot, Certificate, GeometryInput, GeometryKind, ProblemSpec,
    Provenance, Role, SlotKey, SpecError, SpecInput, TemplateKind,
};
use crate::cones::{Circuit, CircuitWitness, ConeClass, GramFlavor, GramWitness, SddBlock, SomsWitness, Witness};
use crate::poly::{format_poly, parse, parse_number, ExactPoly, Monomial, Poly, QuadNum, Scalar};
use crate::sizes::Shape;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {msg}")]
    Field { path: String, msg: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

fn field<T>(path: impl Into<String>, msg: impl ToString) -> Result<T, IoError> {
    Err(IoError::Field {
        path: path.into(),
        msg: msg.to_string(),
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub p: String,
    #[serde(default)]
    pub constraints: Vec<ConstraintFile>,
    pub geometry: Value,
    #[serde(default = "default_cone")]
    pub cone: String,
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default = "default_d_max")]
    pub d_max: u32,
    #[serde(default)]
    pub template: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub g: String,
    #[serde(rename = "U", default)]
    pub u: Option<Value>,
}

fn default_cone() -> String {
    "soms".into()
}

fn default_shape() -> String {
    "split".into()
}

fn default_d_max() -> u32 {
    2
}

/// Exact value of a JSON number (read from its decimal text) or of a string
/// in the number grammar.
fn number(v: &Value, path: &str) -> Result<QuadNum, IoError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return field(path, "expected a number or a number string"),
    };
    parse_number(&text).or_else(|e| field(path, e))
}

fn index_list(v: &Value, n: usize, path: &str) -> Result<Vec<usize>, IoError> {
    let Some(items) = v.as_array() else {
        return field(path, "expected an array of 1-based indices");
    };
    items
        .iter()
        .enumerate()
        .map(|(k, x)| match x.as_u64() {
            Some(i) if i >= 1 && i as usize <= n => Ok(i as usize - 1),
            _ => field(format!("{path}[{k}]"), format!("expected an index in 1..={n}")),
        })
        .collect()
}

fn geometry(v: &Value, n: usize, m: usize) -> Result<GeometryInput, IoError> {
    let Some(obj) = v.as_object().filter(|o| o.len() == 1) else {
        return field("geometry", "expected {\"ball\": r} or {\"cover\": {...}}");
    };
    if let Some(r) = obj.get("ball") {
        return Ok(GeometryInput::Ball(number(r, "geometry.ball")?));
    }
    let Some(cover) = obj.get("cover").and_then(Value::as_object) else {
        return field("geometry", "expected {\"ball\": r} or {\"cover\": {...}}");
    };
    for key in cover.keys() {
        if !["cliques", "radii", "radius", "assign"].contains(&key.as_str()) {
            return field(format!("geometry.cover.{key}"), "unknown field");
        }
    }
    let cliques = match cover.get("cliques") {
        None => None,
        Some(Value::String(s)) if s == "auto" => None,
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .enumerate()
                .map(|(l, c)| index_list(c, n, &format!("geometry.cover.cliques[{l}]")))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Some(_) => return field("geometry.cover.cliques", "expected an array of cliques or \"auto\""),
    };
    let radii = match (cover.get("radii"), cover.get("radius")) {
        (Some(Value::Array(rs)), None) => rs
            .iter()
            .enumerate()
            .map(|(l, r)| number(r, &format!("geometry.cover.radii[{l}]")))
            .collect::<Result<Vec<_>, _>>()?,
        (None, Some(r)) => vec![number(r, "geometry.cover.radius")?],
        (Some(_), None) => return field("geometry.cover.radii", "expected an array"),
        _ => return field("geometry.cover", "give exactly one of radii or radius"),
    };
    let assign = match cover.get("assign") {
        None => None,
        Some(Value::Object(map)) => {
            let k = cliques.as_ref().map_or(usize::MAX, Vec::len);
            let mut out: Vec<Option<usize>> = vec![None; m];
            for (name, v) in map {
                let path = format!("geometry.cover.assign.{name}");
                let j = name
                    .strip_prefix('g')
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&j| j >= 1 && j <= m);
                let Some(j) = j else {
                    return field(path, format!("expected a constraint name g1..g{m}"));
                };
                match v.as_u64() {
                    Some(l) if l >= 1 && (l as usize) <= k => out[j - 1] = Some(l as usize - 1),
                    _ => return field(path, "expected a 1-based clique index"),
                }
            }
            match out.iter().position(Option::is_none) {
                Some(j) => return field("geometry.cover.assign", format!("g{} is not assigned", j + 1)),
                None => Some(out.into_iter().flatten().collect()),
            }
        }
        Some(_) => return field("geometry.cover.assign", "expected an object like {\"g1\": 1}"),
    };
    Ok(GeometryInput::Cover { cliques, radii, assign })
}

impl ProblemFile {
    pub fn read(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    /// `p` and the constraint polynomials.
    pub fn polys(&self) -> Result<(ExactPoly, Vec<ExactPoly>), IoError> {
        if self.vars.is_empty() {
            return field("vars", "at least one variable is required");
        }
        let p = parse(&self.p, &self.vars).or_else(|e| field("p", e))?;
        let gs = self
            .constraints
            .iter()
            .enumerate()
            .map(|(j, c)| parse(&c.g, &self.vars).or_else(|e| field(format!("constraints[{j}].g"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((p, gs))
    }

    pub fn geometry_input(&self) -> Result<GeometryInput, IoError> {
        geometry(&self.geometry, self.vars.len(), self.constraints.len())
    }

    pub fn into_spec(self, force_simple: bool) -> Result<ProblemSpec, IoError> {
        let (p, gs) = self.polys()?;
        let mut constraints = Vec::with_capacity(gs.len());
        for (j, (g, c)) in gs.into_iter().zip(&self.constraints).enumerate() {
            let bound = match &c.u {
                None => BoundChoice::Auto,
                Some(Value::String(s)) if s == "auto" => BoundChoice::Auto,
                Some(v) => BoundChoice::Value(number(v, &format!("constraints[{j}].U"))?),
            };
            constraints.push((g, bound));
        }
        let geometry = self.geometry_input()?;
        let cone: ConeClass = self.cone.parse().or_else(|e| field("cone", e))?;
        let shape: Shape = self.shape.parse().or_else(|e| field("shape", e))?;
        let template = match self.template.as_deref() {
            _ if force_simple => TemplateKind::Simple,
            None | Some("putinar") => TemplateKind::Putinar,
            Some("simple") => TemplateKind::Simple,
            Some(other) => return field("template", format!("unknown template '{other}' (expected putinar or simple)")),
        };
        Ok(ProblemSpec::new(SpecInput {
            vars: self.vars,
            p,
            constraints,
            geometry,
            cone,
            shape,
            template,
            d_max: self.d_max,
        })?)
    }
}

pub fn parse_problem(text: &str, force_simple: bool) -> Result<ProblemSpec, IoError> {
    ProblemFile::read(text)?.into_spec(force_simple)
}

/// Names of the variables of slot `key` in the spec's template.
pub fn slot_var_names(spec: &ProblemSpec, key: &SlotKey) -> Option<Vec<String>> {
    match key.role {
        Role::Alpha0 | Role::Alpha1 | Role::Alpha => {
            let clique = spec.cover.cliques.get(key.clique?)?;
            Some(clique_var_names(clique.len()))
        }
        Role::Rho => Some(vec!["u".into()]),
        Role::Sigma0 | Role::Sigma => Some(spec.vars.clone()),
    }
}

/// Coefficient codec: exact values as grammar strings, floats as numbers.
trait Coeff: Scalar {
    fn from_exact(q: &QuadNum) -> Self;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, path: &str) -> Result<Self, IoError>;
}

impl Coeff for QuadNum {
    fn from_exact(q: &QuadNum) -> Self {
        q.clone()
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn from_json(v: &Value, path: &str) -> Result<Self, IoError> {
        number(v, path)
    }
}

impl Coeff for f64 {
    fn from_exact(q: &QuadNum) -> Self {
        q.to_f64()
    }
    fn to_json(&self) -> Value {
        json!(self)
    }
    fn from_json(v: &Value, path: &str) -> Result<Self, IoError> {
        match v {
            Value::Number(n) => n.as_f64().ok_or(()).or_else(|_| field(path, "number out of range")),
            _ => Ok(number(v, path)?.to_f64()),
        }
    }
}

fn mono_text(m: &Monomial, names: &[String]) -> String {
    format_poly(&Poly::<QuadNum>::monomial(m.clone(), QuadNum::one()), names)
}

fn mono_parse(v: &Value, names: &[String], path: &str) -> Result<Monomial, IoError> {
    let Some(text) = v.as_str() else {
        return field(path, "expected a monomial string");
    };
    let p = parse(text, names).or_else(|e| field(path, e))?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((m, c)), None) if *c == QuadNum::one() => Ok(m.clone()),
        _ => field(path, format!("'{text}' is not a monomial")),
    }
}

fn witness_json<C: Coeff>(w: &Witness<C>, names: &[String]) -> Value {
    match w {
        Witness::Soms(s) => json!({
            "type": "soms",
            "terms": s.terms.iter().map(|(m, c)| json!([mono_text(m, names), c.to_json()])).collect::<Vec<_>>(),
        }),
        Witness::Gram(g) => {
            let mut obj = json!({
                "type": "gram",
                "flavor": g.flavor.name(),
                "basis": g.basis.iter().map(|m| mono_text(m, names)).collect::<Vec<_>>(),
                "q": g.q.iter().map(|r| r.iter().map(Coeff::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            if g.flavor == GramFlavor::Sdd {
                obj["blocks"] = g
                    .blocks
                    .iter()
                    .map(|b| {
                        json!({
                            "i": b.i + 1,
                            "j": b.j + 1,
                            "di": b.di.to_json(),
                            "dj": b.dj.to_json(),
                            "offdiag": b.offdiag.to_json(),
                        })
                    })
                    .collect();
            }
            obj
        }
        Witness::Circuit(c) => json!({
            "type": "circuit",
            "circuits": c.circuits.iter().map(|k| json!({
                "vertices": k.vertices.iter().map(|(m, v)| json!([mono_text(m, names), v.to_json()])).collect::<Vec<_>>(),
                "inner": mono_text(&k.inner, names),
                "inner_coeff": k.inner_coeff.to_json(),
                "lambda": k.lambda.iter().map(Coeff::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
        Witness::Sage => json!({"type": "sage"}),
    }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, IoError> {
    obj.get(key).ok_or(()).or_else(|_| field(format!("{path}.{key}"), "missing"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or(()).or_else(|_| field(path, "expected an array"))
}

fn pair_list<C: Coeff>(v: &Value, names: &[String], path: &str) -> Result<Vec<(Monomial, C)>, IoError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = format!("{path}[{k}]");
            match t.as_array().map(Vec::as_slice) {
                Some([m, c]) => Ok((mono_parse(m, names, &p)?, C::from_json(c, &p)?)),
                _ => field(p, "expected [monomial, coefficient]"),
            }
        })
        .collect()
}

fn coeff_list<C: Coeff>(v: &Value, path: &str) -> Result<Vec<C>, IoError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, c)| C::from_json(c, &format!("{path}[{k}]")))
        .collect()
}

fn witness_from<C: Coeff>(v: &Value, names: &[String], path: &str) -> Result<Witness<C>, IoError> {
    let Some(obj) = v.as_object() else {
        return field(path, "expected an object");
    };
    let kind = get(obj, "type", path)?.as_str().unwrap_or_default();
    match kind {
        "soms" => Ok(Witness::Soms(SomsWitness {
            terms: pair_list(get(obj, "terms", path)?, names, &format!("{path}.terms"))?,
        })),
        "gram" => {
            let flavor = match get(obj, "flavor", path)?.as_str() {
                Some("dd") => GramFlavor::Dd,
                Some("sdd") => GramFlavor::Sdd,
                Some("psd") => GramFlavor::Psd,
                _ => return field(format!("{path}.flavor"), "expected dd, sdd or psd"),
            };
            let bpath = format!("{path}.basis");
            let basis = array(get(obj, "basis", path)?, &bpath)?
                .iter()
                .enumerate()
                .map(|(k, m)| mono_parse(m, names, &format!("{bpath}[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let qpath = format!("{path}.q");
            let q = array(get(obj, "q", path)?, &qpath)?
                .iter()
                .enumerate()
                .map(|(i, r)| coeff_list(r, &format!("{qpath}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let mut blocks = Vec::new();
            if let Some(bs) = obj.get("blocks") {
                for (k, b) in array(bs, &format!("{path}.blocks"))?.iter().enumerate() {
                    let bp = format!("{path}.blocks[{k}]");
                    let Some(bo) = b.as_object() else {
                        return field(bp, "expected an object");
                    };
                    let idx = |key: &str| -> Result<usize, IoError> {
                        match get(bo, key, &bp)?.as_u64() {
                            Some(i) if i >= 1 => Ok(i as usize - 1),
                            _ => field(format!("{bp}.{key}"), "expected a 1-based index"),
                        }
                    };
                    let (i, j) = (idx("i")?, idx("j")?);
                    let c = |key: &str| C::from_json(get(bo, key, &bp)?, &format!("{bp}.{key}"));
                    let di = c("di")?;
                    let (dj, offdiag) = if i == j {
                        (C::zero(), C::zero())
                    } else {
                        (c("dj")?, c("offdiag")?)
                    };
                    blocks.push(SddBlock { i, j, di, dj, offdiag });
                }
            }
            Ok(Witness::Gram(GramWitness { basis, q, flavor, blocks }))
        }
        "circuit" => {
            let cpath = format!("{path}.circuits");
            let circuits = array(get(obj, "circuits", path)?, &cpath)?
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let p = format!("{cpath}[{k}]");
                    let Some(co) = c.as_object() else {
                        return field(p, "expected an object");
                    };
                    Ok(Circuit {
                        vertices: pair_list(get(co, "vertices", &p)?, names, &format!("{p}.vertices"))?,
                        inner: mono_parse(get(co, "inner", &p)?, names, &format!("{p}.inner"))?,
                        inner_coeff: C::from_json(get(co, "inner_coeff", &p)?, &format!("{p}.inner_coeff"))?,
                        lambda: coeff_list(get(co, "lambda", &p)?, &format!("{p}.lambda"))?,
                    })
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            Ok(Witness::Circuit(CircuitWitness { circuits }))
        }
        "sage" => Ok(Witness::Sage),
        other => field(format!("{path}.type"), format!("unknown witness type '{other}'")),
    }
}

fn geometry_echo(spec: &ProblemSpec) -> Value {
    match spec.geometry {
        GeometryKind::Ball => json!({"ball": spec.cover.radii[0].to_string()}),
        GeometryKind::Sparse => json!({"cover": {
            "cliques": spec.cover.cliques.iter().map(|c| c.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "radii": spec.cover.radii.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "assign": spec.cover.assign.iter().enumerate()
                .map(|(j, l)| (format!("g{}", j + 1), json!(l + 1)))
                .collect::<Map<_, _>>(),
        }}),
    }
}

fn cert_json<C: Coeff>(spec: &ProblemSpec, c: &Certificate<C>, mode: &str) -> Value {
    let slots: Vec<Value> = c
        .slots
        .iter()
        .map(|s| {
            let names = slot_var_names(spec, &s.key).unwrap_or_else(|| crate::poly::default_names(s.poly.nvars()));
            let mut obj = Map::new();
            obj.insert("role".into(), json!(s.key.role.name()));
            if let Some(l) = s.key.clique {
                obj.insert("clique".into(), json!(l + 1));
            }
            if let Some(j) = s.key.constraint {
                obj.insert("constraint".into(), json!(j + 1));
            }
            obj.insert("vars".into(), json!(names));
            obj.insert("poly".into(), json!(format_poly(&s.poly, &names)));
            obj.insert("witness".into(), witness_json(&s.witness, &names));
            Value::Object(obj)
        })
        .collect();
    json!({
        "cone": c.cone.name(),
        "mode": mode,
        "degree": c.degree,
        "provenance": c.provenance.name(),
        "approximate": c.approximate,
        "geometry": geometry_echo(spec),
        "slots": slots,
    })
}

pub fn certificate_to_json(spec: &ProblemSpec, cert: &AnyCertificate) -> Value {
    match cert {
        AnyCertificate::Exact(c) => cert_json(spec, c, "exact"),
        AnyCertificate::Float(c) => cert_json(spec, c, "float"),
    }
}

fn cert_from<C: Coeff>(spec: &ProblemSpec, obj: &Map<String, Value>) -> Result<Certificate<C>, IoError> {
    let cone: ConeClass = get(obj, "cone", "certificate")?
        .as_str()
        .unwrap_or_default()
        .parse()
        .or_else(|e| field("certificate.cone", e))?;
    let degree = match obj.get("degree") {
        None => 0,
        Some(v) => v.as_u64().ok_or(()).or_else(|_| field("certificate.degree", "expected an integer"))? as u32,
    };
    let provenance = match obj.get("provenance").and_then(Value::as_str) {
        None | Some("supplied") => Provenance::Supplied,
        Some("found") => Provenance::Found,
        Some(other) => return field("certificate.provenance", format!("unknown provenance '{other}'")),
    };
    let approximate = obj.get("approximate").and_then(Value::as_bool).unwrap_or(false);
    let mut slots = Vec::new();
    for (k, s) in array(get(obj, "slots", "certificate")?, "certificate.slots")?.iter().enumerate() {
        let path = format!("slots[{k}]");
        let Some(so) = s.as_object() else {
            return field(path, "expected an object");
        };
        let role = get(so, "role", &path)?
            .as_str()
            .and_then(Role::parse)
            .ok_or(())
            .or_else(|_| field(format!("{path}.role"), "unknown role"))?;
        let index = |key: &str| -> Result<Option<usize>, IoError> {
            match so.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(v) => match v.as_u64() {
                    Some(i) if i >= 1 => Ok(Some(i as usize - 1)),
                    _ => field(format!("{path}.{key}"), "expected a 1-based index"),
                },
            }
        };
        let key = SlotKey {
            role,
            clique: index("clique")?,
            constraint: index("constraint")?,
        };
        let Some(names) = slot_var_names(spec, &key) else {
            return field(format!("{path}.clique"), "the problem has no such clique");
        };
        let poly_text = get(so, "poly", &path)?.as_str().unwrap_or_default();
        let poly = parse(poly_text, &names)
            .or_else(|e| field(format!("{path}.poly"), e))?
            .map_coeffs(C::from_exact);
        let witness = witness_from(get(so, "witness", &path)?, &names, &format!("{path}.witness"))?;
        slots.push(CertSlot { key, poly, witness });
    }
    Ok(Certificate {
        cone,
        slots,
        degree,
        provenance,
        approximate,
    })
}

/// Reads a certificate document against the problem it certifies; the
/// problem fixes the variables of every slot.
pub fn certificate_from_json(spec: &ProblemSpec, text: &str) -> Result<AnyCertificate, IoError> {
    let v: Value = serde_json::from_str(text)?;
    let Some(obj) = v.as_object() else {
        return field("certificate", "expected an object");
    };
    match obj.get("mode").and_then(Value::as_str) {
        None | Some("exact") => Ok(AnyCertificate::Exact(cert_from(spec, obj)?)),
        Some("float") => Ok(AnyCertificate::Float(cert_from(spec, obj)?)),
        Some(other) => field("certificate.mode", format!("unknown mode '{other}' (expected exact or float)")),
    }
}
