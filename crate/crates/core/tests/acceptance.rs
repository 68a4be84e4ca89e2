use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psatz::bounds::{ball_bound, grid_max_oracle, rho_polynomial, rho_schedule};
use psatz::builder::{search, AnyCertificate, DegreeStatus, ProblemSpec, SearchOptions};
use psatz::cones::{dsos_decide, sdsos_decide, soms_check, verify_witness, ConeClass, DsosOutcome, SdsosOutcome, Witness};
use psatz::io::{certificate_from_json, parse_problem};
use psatz::poly::{rational_to_f64, ExactPoly, FloatPoly, Monomial, Poly, QuadNum};
use psatz::sizes::{rosenbrock_cover, table_row, Shape};
use psatz::solver::SocpSettings;
use psatz::sparsity::{check_rip, find_rip_order};
use psatz::verify::{verify_certificate, VerifyMode};

const EXAMPLE3_BUDGET: Duration = Duration::from_secs(1);
const EXAMPLE4_BUDGET: Duration = Duration::from_secs(5);
const SEARCH_BUDGET: Duration = Duration::from_secs(60);
const FLOAT_TOL: f64 = 1e-8;
/// Relative slack allowed when comparing the closed-form bound to sampled
/// values; both sides are binary64 evaluations.
const BOUND_SLACK: f64 = 1e-12;
/// Log-domain gap above which a binary64 comparison of rho against its
/// targets is trusted; rounding error stays below 1e-12 for degrees < 1000.
const LOG_MARGIN: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn data(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn problem(name: &str, simple: bool) -> ProblemSpec {
    parse_problem(&data(name), simple).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn golden(problem_file: &str, cert_file: &str, budget: Duration) -> Outcome {
    let start = Instant::now();
    let spec = problem(problem_file, false);
    let cert = certificate_from_json(&spec, &data(cert_file)).map_err(|e| e.to_string())?;
    let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(rep.ok, || rep.summary())?;
    ensure(rep.residual.is_zero(), || "residual is not zero".into())?;
    ensure(took < budget, || format!("took {took:?}, budget {budget:?}"))?;
    let field = match spec.radicand {
        0 | 1 => "Q".to_string(),
        r => format!("Q(sqrt({r}))"),
    };
    Ok(format!("residual 0 over {field}, {took:.2?}"))
}

fn crit1() -> Outcome {
    golden("example3.json", "example3_certificate.json", EXAMPLE3_BUDGET)
}

fn crit2() -> Outcome {
    let spec = problem("example4.json", false);
    ensure(spec.radicand == 2, || format!("radii live in Q(sqrt({}))", spec.radicand))?;
    golden("example4.json", "example4_certificate.json", EXAMPLE4_BUDGET)
}

fn sizes(shape: Shape, gram: [u128; 3], mono: [u128; 3]) -> Outcome {
    let row = table_row(shape, 4, 2, 8, &rosenbrock_cover(4)).map_err(|e| e.to_string())?;
    let got_gram = row.each_ref().map(|r| r.gram_total);
    let got_mono = row.each_ref().map(|r| r.monomial_total);
    ensure(got_gram == gram && got_mono == mono, || {
        format!("got {got_gram:?} / {got_mono:?}, expected {gram:?} / {mono:?}")
    })?;
    Ok(format!("{got_gram:?} / {got_mono:?}"))
}

fn crit3() -> Outcome {
    sizes(Shape::Split, [7850, 6122, 2718], [1990, 1470, 796])
}

fn crit4() -> Outcome {
    sizes(Shape::Merged, [4825, 3097, 1395], [1275, 755, 418])
}

fn crit5() -> Outcome {
    let start = Instant::now();
    let spec = problem("example3.json", false);
    let out = search(&spec, ConeClass::Soms, 2, &SearchOptions::default()).map_err(|e| e.to_string())?;
    let cert = out.certificate.ok_or("no SOMS certificate for example3 at d <= 2")?;
    let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).map_err(|e| e.to_string())?;
    ensure(rep.ok && rep.residual.is_zero(), || rep.summary())?;
    let t3 = start.elapsed();
    ensure(t3 < SEARCH_BUDGET, || format!("example3 took {t3:?}"))?;
    let d3 = cert.degree();

    let start = Instant::now();
    let spec = problem("example4.json", false);
    let float_opts = SearchOptions {
        rationalize: false,
        ..SearchOptions::default()
    };
    let out = search(&spec, ConeClass::Sdsos, 2, &float_opts).map_err(|e| e.to_string())?;
    let cert = out.certificate.ok_or("no SDSOS certificate for example4 at d <= 2")?;
    let rep = verify_certificate(&spec, &cert, VerifyMode::Float(FLOAT_TOL)).map_err(|e| e.to_string())?;
    let float_res = rep.residual.max_abs_coeff();
    ensure(rep.ok && float_res <= FLOAT_TOL, || rep.summary())?;
    let t4 = start.elapsed();
    ensure(t4 < SEARCH_BUDGET, || format!("example4 float search took {t4:?}"))?;

    let start = Instant::now();
    let out = search(&spec, ConeClass::Sdsos, 2, &SearchOptions::default()).map_err(|e| e.to_string())?;
    let cert = out.certificate.ok_or("no SDSOS certificate for example4 at d <= 2")?;
    let exact = match &cert {
        AnyCertificate::Exact(_) => {
            let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).map_err(|e| e.to_string())?;
            ensure(rep.ok && rep.residual.is_zero(), || rep.summary())?;
            "exact after rationalization"
        }
        AnyCertificate::Float(_) => "rationalization declined",
    };
    let t4x = start.elapsed();
    ensure(t4x < SEARCH_BUDGET, || format!("example4 exact search took {t4x:?}"))?;
    Ok(format!(
        "SOMS d={d3} residual 0 ({t3:.2?}); SDSOS d={} float residual {float_res:.1e} ({t4:.2?}), {exact} ({t4x:.2?})",
        cert.degree()
    ))
}

fn crit6() -> Outcome {
    let mut detail = Vec::new();
    for cone in [ConeClass::Dsos, ConeClass::Sdsos] {
        let mut spec = problem("example1.json", true);
        spec.cone = cone;
        let out = search(&spec, cone, 2, &SearchOptions::default()).map_err(|e| e.to_string())?;
        ensure(out.certificate.is_none(), || format!("simple template certified with {cone}"))?;
        for d in 1..=2 {
            let status = &out.reports[d].status;
            let ok = match cone {
                ConeClass::Dsos => status.is_exact_infeasible(),
                _ => *status == DegreeStatus::NotFound,
            };
            ensure(ok, || format!("{cone} at d={d}: {}", status.label()))?;
        }
        detail.push(format!("{cone} d=1,2 {}", if cone == ConeClass::Dsos { "infeasible" } else { "not found" }));
    }
    let spec = problem("example1_putinar.json", false);
    let out = search(&spec, ConeClass::Soms, 2, &SearchOptions::default()).map_err(|e| e.to_string())?;
    let cert = out.certificate.ok_or("the sparse template found nothing with SOMS")?;
    let rep = verify_certificate(&spec, &cert, VerifyMode::Exact).map_err(|e| e.to_string())?;
    ensure(rep.ok, || rep.summary())?;
    detail.push(format!("template with rho slots: SOMS d={}", cert.degree()));
    Ok(detail.join("; "))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: u32) -> FloatPoly {
    let mut p = Poly::zero(n);
    let terms = rng.gen_range(1..=8);
    for _ in 0..terms {
        let mut e = vec![0u32; n];
        let target = rng.gen_range(0..=deg);
        for _ in 0..target {
            e[rng.gen_range(0..n)] += 1;
        }
        p.add_term(Monomial::new(e), rng.gen_range(-2.0..=2.0));
    }
    p
}

fn crit7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut worst = f64::INFINITY;
    let mut checks = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let deg = rng.gen_range(1..=4);
        let g = random_poly(&mut rng, n, deg);
        let res = [0, 2001, 121, 41][n];
        for r in [0.5, 1.0, 2.0] {
            let bound = ball_bound(&g, r);
            let grid = grid_max_oracle(&g, r, res).map_err(|e| e.to_string())?;
            ensure(bound >= grid - BOUND_SLACK * (1.0 + grid.abs()), || {
                format!("bound {bound} below grid max {grid} for r={r}, g={g:?}")
            })?;
            if grid > 0.0 {
                worst = worst.min(bound / grid);
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} checks, 0 violations, smallest bound/max ratio {worst:.3}"))
}

fn crit8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut max_d = 0;
    let mut exact_checks = 0;
    for case in 0..50 {
        let eps = rat(rng.gen_range(1..=100), 100);
        let m_val = rat(-rng.gen_range(0..=300), 100);
        let delta = rat(-rng.gen_range(10..=100), 100);
        let u = rat(rng.gen_range(100..=400), 100);
        let m = rng.gen_range(1..=5);
        let entry = rho_schedule(&eps, &m_val, &delta, &u, m).map_err(|e| e.to_string())?;
        let rho = rho_polynomial(&entry);
        ensure(soms_check(&rho).is_some(), || format!("case {case}: rho is not SOMS"))?;
        let four_m1 = BigRational::from_integer(BigInt::from(4 * (m as i64 + 1)));
        let small = &eps / (&four_m1 * &u);
        let large = (&eps - &m_val) / -&delta;
        // rho is the single term c u^(2d); evaluate it by repeated squaring.
        ensure(rho.len() == 1, || format!("case {case}: rho has {} terms", rho.len()))?;
        let (mono, coeff) = rho.terms().next().unwrap();
        let c = coeff.as_rational().ok_or("rho coefficient is irrational")?.clone();
        let e = mono.degree() as usize;
        let eval = |t: &BigRational| -> BigRational { &c * num_traits::pow(&u - t, e) };
        let probe = rat(1, 3);
        ensure(
            rho.evaluate(&[QuadNum::rational(&u - &probe)]).unwrap().as_rational() == Some(&eval(&probe)),
            || format!("case {case}: term evaluation disagrees with the polynomial"),
        )?;
        // Samples are decided in the log domain when the margin dwarfs the
        // rounding error and exactly otherwise.
        let ln = |q: &BigRational| rational_to_f64(q).ln();
        let (ln_c, ln_small, ln_large) = (ln(&c), ln(&small), ln(&large));
        let mut holds = |t: &BigRational, upper: bool| -> bool {
            let lhs = ln_c + e as f64 * ln(&(&u - t));
            let rhs = if upper { ln_small } else { ln_large };
            if (lhs - rhs).abs() > LOG_MARGIN {
                return if upper { lhs < rhs } else { lhs > rhs };
            }
            exact_checks += 1;
            if upper {
                eval(t) <= small
            } else {
                eval(t) >= large
            }
        };
        const SCALE: i64 = 1_000_000;
        // The first sample of each range is its endpoint, where the bounds
        // are tightest.
        for i in 0..1000 {
            let k = if i == 0 { 0 } else { rng.gen_range(0..=SCALE) };
            let t = &u * rat(k, SCALE);
            ensure(holds(&t, true), || format!("case {case}: rho(U - {t}) above eps/(4(m+1)U)"))?;
            let k = if i == 0 { 0 } else { rng.gen_range(0..=SCALE) };
            let t = &delta - &u * rat(k, SCALE);
            ensure(holds(&t, false), || format!("case {case}: rho(U - {t}) below (eps - M)/|delta|"))?;
        }
        max_d = max_d.max(entry.d);
    }
    Ok(format!("50 tuples x 2000 samples ({exact_checks} decided exactly), degrees up to {max_d}"))
}

/// The running intersection quantifiers evaluated literally on bitmasks.
fn rip_brute(cliques: &[u32]) -> bool {
    (1..cliques.len()).all(|l| {
        let union = cliques[..l].iter().fold(0, |a, c| a | c);
        let inter = union & cliques[l];
        (0..l).any(|j| inter & !cliques[j] == 0)
    })
}

fn to_sets(masks: &[u32]) -> Vec<Vec<usize>> {
    masks.iter().map(|m| (0..32).filter(|i| m >> i & 1 == 1).collect()).collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    match k {
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]],
    }
}

fn crit9() -> Outcome {
    let mut covers = 0u64;
    let mut with_rip = 0u64;
    for n in 1..=5u32 {
        let full = (1u32 << n) - 1;
        for k in 1..=3usize {
            let total = (full as u64).pow(k as u32);
            for code in 0..total {
                let mut c = code;
                let masks: Vec<u32> = (0..k)
                    .map(|_| {
                        let m = (c % full as u64) as u32 + 1;
                        c /= full as u64;
                        m
                    })
                    .collect();
                if masks.iter().fold(0, |a, m| a | m) != full {
                    continue;
                }
                covers += 1;
                let sets = to_sets(&masks);
                let expect = rip_brute(&masks);
                ensure(check_rip(&sets) == expect, || format!("check_rip disagrees on {sets:?}"))?;
                with_rip += expect as u64;
                let exists = permutations(k)
                    .iter()
                    .any(|p| rip_brute(&p.iter().map(|&i| masks[i]).collect::<Vec<_>>()));
                match find_rip_order(&sets) {
                    Some(p) => {
                        let reordered: Vec<u32> = p.iter().map(|&i| masks[i]).collect();
                        ensure(rip_brute(&reordered), || format!("bad order {p:?} for {sets:?}"))?;
                    }
                    None => ensure(!exists, || format!("missed an order for {sets:?}"))?,
                }
            }
        }
    }
    Ok(format!("{covers} ordered covers, {with_rip} with the property, 0 disagreements"))
}

fn random_soms(rng: &mut ChaCha8Rng) -> ExactPoly {
    let n = rng.gen_range(1..=3);
    let half = rng.gen_range(1..=2u32);
    let mut p = Poly::zero(n);
    for _ in 0..rng.gen_range(1..=6) {
        let mut e = vec![0u32; n];
        for _ in 0..rng.gen_range(0..=half) {
            e[rng.gen_range(0..n)] += 2;
        }
        p.add_term(Monomial::new(e), QuadNum::ratio(rng.gen_range(1..=20), rng.gen_range(1..=6)));
    }
    p
}

fn crit10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let settings = SocpSettings::default();
    for case in 0..200 {
        let p = random_soms(&mut rng);
        ensure(soms_check(&p).is_some(), || format!("case {case}: generator produced a non-SOMS polynomial"))?;
        match dsos_decide(&p, None).map_err(|e| e.to_string())? {
            DsosOutcome::Feasible(g) => {
                let rep = verify_witness(&p, &Witness::Gram(g), 0.0);
                ensure(rep.ok, || format!("case {case}: DSOS witness fails: {:?}", rep.issues))?;
            }
            DsosOutcome::Infeasible { bound } => return Err(format!("case {case}: DSOS infeasible ({bound}) for {p:?}")),
        }
        match sdsos_decide(&p, None, &settings).map_err(|e| e.to_string())? {
            SdsosOutcome::Found(g) => {
                let rep = verify_witness(&p.to_float(), &Witness::Gram(g), FLOAT_TOL);
                ensure(rep.ok, || format!("case {case}: SDSOS witness fails: {:?}", rep.issues))?;
            }
            other => return Err(format!("case {case}: SDSOS {other:?} for {p:?}")),
        }
    }
    Ok("200 SOMS polynomials accepted by DSOS (exact) and SDSOS".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden verification, example3", crit1),
        ("golden verification, example4", crit2),
        ("split template sizes", crit3),
        ("merged template sizes", crit4),
        ("search success", crit5),
        ("simple template negative control", crit6),
        ("ball bound dominates the grid maximum", crit7),
        ("rho schedule inequalities", crit8),
        ("running intersection oracle", crit9),
        ("cone inclusion", crit10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
