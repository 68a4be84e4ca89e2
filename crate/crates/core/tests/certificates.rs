use std::path::PathBuf;

use psatz::builder::{assemble, build_template, search, AnyCertificate, ProblemSpec, SearchOptions};
use psatz::cones::ConeClass;
use psatz::io::{certificate_from_json, parse_problem};
use psatz::poly::{binomial, parse, Scalar};
use psatz::sizes::{template_sizes, Sparsity};
use psatz::solver::{solve_lp, Status};
use psatz::verify::{spot_check, verify_certificate, Residual, VerifyMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn data(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

fn problem(name: &str) -> ProblemSpec {
    parse_problem(&data(name), false).unwrap()
}

fn golden(spec: &ProblemSpec, name: &str) -> AnyCertificate {
    certificate_from_json(spec, &data(name)).unwrap()
}

/// Uniform points in `[-h, h]^n` that satisfy `keep`.
fn sample(rng: &mut ChaCha8Rng, n: usize, h: f64, count: usize, keep: impl Fn(&[f64]) -> bool) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-h..=h)).collect();
        if keep(&x) {
            out.push(x);
        }
    }
    out
}

#[test]
fn golden_certificates_verify_exactly() {
    for (p, c) in [("example3.json", "example3_certificate.json"), ("example4.json", "example4_certificate.json")] {
        let spec = problem(p);
        let rep = verify_certificate(&spec, &golden(&spec, c), VerifyMode::Exact).unwrap();
        assert!(rep.ok, "{c}: {}", rep.summary());
        assert!(rep.residual.is_zero());
    }
}

#[test]
fn perturbed_multiplier_leaves_its_trace() {
    let spec = problem("example3.json");
    let mut doc: Value = serde_json::from_str(&data("example3_certificate.json")).unwrap();
    let alpha1 = &mut doc["slots"][1];
    alpha1["poly"] = Value::from("1/3 + 2/3*z1^2 + 1/2*z2^2");
    alpha1["witness"]["terms"][0][1] = Value::from("1/3");
    let cert = certificate_from_json(&spec, &doc.to_string()).unwrap();
    let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).unwrap();
    assert!(!rep.ok && !rep.residual_ok && rep.witnesses_ok);
    // Lowering the constant of alpha1 by 1/6 lowers the right-hand side by
    // 1/6 times the ball slack.
    let expected = parse("-1/6*(1 - x1^2 - x2^2)", &spec.vars).unwrap();
    match rep.residual {
        Residual::Exact(r) => assert_eq!(r, expected),
        Residual::Float(_) => panic!("exact mode gives an exact residual"),
    }
}

#[test]
fn spot_checks() {
    let spec = problem("example3.json");
    let cert = golden(&spec, "example3_certificate.json");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts = sample(&mut rng, 2, 1.0, 100, |x| x[0] * x[0] + x[1] * x[1] <= 1.0);
    assert!(spot_check(&spec, &cert, &pts) <= 1e-12);
    assert_eq!(spot_check(&spec, &cert, &[]), 0.0);

    let mut doc: Value = serde_json::from_str(&data("example3_certificate.json")).unwrap();
    doc["slots"][0]["poly"] = Value::from("1 + 1/2*z2^2");
    let bad = certificate_from_json(&spec, &doc.to_string()).unwrap();
    assert!(spot_check(&spec, &bad, &pts) > 1e-3);
}

#[test]
fn verified_certificates_imply_nonnegativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = problem("example4.json");
    let cert = golden(&spec, "example4_certificate.json");
    assert!(verify_certificate(&spec, &cert, VerifyMode::Exact).unwrap().ok);
    let p = spec.p.to_float();
    let inside = |x: &[f64]| {
        spec.constraints.iter().all(|g| g.evaluate_f64(x).unwrap() >= 0.0)
            && spec.cover.cliques.iter().all(|c| c.iter().map(|&i| x[i] * x[i]).sum::<f64>() <= 2.0)
    };
    for x in sample(&mut rng, 3, 1.0, 1000, inside) {
        assert!(p.evaluate_f64(&x).unwrap() >= 0.0, "{x:?}");
    }

    let spec = problem("example3.json");
    let p = spec.p.to_float();
    for x in sample(&mut rng, 2, 1.0, 1000, |x| x[0] * x[0] + x[1] * x[1] <= 1.0) {
        assert!(p.evaluate_f64(&x).unwrap() >= 0.0);
    }
}

#[test]
fn search_results_round_trip() {
    let opts = SearchOptions::default();
    for (name, cone) in [("example3.json", ConeClass::Soms), ("example1_putinar.json", ConeClass::Soms)] {
        let spec = problem(name);
        let cert = search(&spec, cone, 2, &opts).unwrap().certificate.unwrap();
        assert!(cert.is_exact());
        let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).unwrap();
        assert!(rep.ok && rep.residual.is_zero(), "{name}: {}", rep.summary());
    }
}

#[test]
fn feasibility_is_monotone_in_the_degree() {
    let spec = problem("example3.json");
    for d in 2..=3 {
        let asm = assemble(&build_template(&spec, d), &spec, ConeClass::Soms).unwrap();
        assert!(asm.unreachable.is_none());
        let out = solve_lp(&asm.problem).unwrap();
        assert!(matches!(out.status, Status::Feasible(_)), "d={d}");
    }
}

/// Gram entries and monomial coefficients counted slot by slot.
fn enumerate(spec: &ProblemSpec, d: u32) -> (u128, u128) {
    let t = build_template(spec, d);
    let mut gram = 0;
    let mut mono = 0;
    for s in &t.slots {
        let b = binomial(s.arity as u64 + d as u64, s.arity as u64);
        gram += b * b;
        mono += binomial(s.arity as u64 + 2 * d as u64, s.arity as u64);
    }
    (gram, mono)
}

#[test]
fn size_formulas_match_the_builder() {
    let cases = [
        ("example3.json", Sparsity::SemiSparse),
        ("example1_putinar.json", Sparsity::SemiSparse),
        ("example4.json", Sparsity::FullySparse),
        ("example5.json", Sparsity::FullySparse),
    ];
    for (name, sparsity) in cases {
        let spec = problem(name);
        let cover: Vec<usize> = spec.cover.cliques.iter().map(Vec::len).collect();
        for d in 0..=3 {
            let r = template_sizes(sparsity, spec.shape, spec.nvars(), d, spec.m(), Some(&cover)).unwrap();
            assert_eq!((r.gram_total, r.monomial_total), enumerate(&spec, d), "{name} d={d}");
        }
    }
    let spec = problem("example5.json");
    assert_eq!(enumerate(&spec, 2), (2718, 796));
}

#[test]
fn float_certificates_verify_in_both_modes() {
    let spec = problem("example4.json");
    let opts = SearchOptions {
        rationalize: false,
        ..SearchOptions::default()
    };
    let cert = search(&spec, ConeClass::Sdsos, 2, &opts).unwrap().certificate.unwrap();
    let AnyCertificate::Float(c) = &cert else {
        panic!("expected a float certificate")
    };
    assert!(c.approximate);
    let rep = verify_certificate(&spec, &cert, VerifyMode::Float(1e-8)).unwrap();
    assert!(rep.ok, "{}", rep.summary());
    assert!(rep.residual.max_abs_coeff() <= 1e-8);
    // The binary64 values are not an exact identity.
    let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).unwrap();
    assert!(!rep.residual_ok);
    assert!(c.slots.iter().all(|s| s.poly.terms().all(|(_, v)| v.to_f64().is_finite())));
}
