//! Acceptance criteria 1-7, one PASS/FAIL line each. Runs without the test
//! harness so the lines appear in order; exits nonzero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use num::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lexrsm::compositional::{prove_compositional, NcsmConfig};
use lexrsm::frontend::{lines_of_code, parse_program, pretty_print};
use lexrsm::invariants::load_annotations;
use lexrsm::lexrsm::{preexp, program_digest, Certificate, ExtRat};
use lexrsm::linear::{entails, rat, IdGen, LinConstraint, LinExpr, Polyhedron, Rat, Rel, SymExpr};
use lexrsm::lp::{solve, LpOutcome, LpProblem, Sense};
use lexrsm::pcfg::{GenTransition, LocKind, Pcfg};
use lexrsm::sim::{run_trials, sample_configs, summarize, SchedulerPolicy, DEFAULT_CAP};
use lexrsm_cli::commands::{self, ProveOptions, SimulateOptions, VerifyOptions};
use lexrsm_cli::generate::{generate, GeneratorSpec};
use lexrsm_cli::report::{Report, Verdict};

#[path = "../../core/tests/common/vertex.rs"]
mod vertex;
use vertex::{dot, vertices, Row};

type Outcome = Result<String, String>;

/// One-sided 99% normal quantile.
const Z99: f64 = 2.326;

fn corpus(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn graph(src: &str) -> Pcfg {
    Pcfg::from_ast(&parse_program(src).expect("corpus parses"))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("finite")
}

fn ledger_shapes(r: &Report) -> Vec<Vec<String>> {
    r.compositional.as_ref().map_or_else(Vec::new, |c| {
        c["ledger"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["variables"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect())
            .collect()
    })
}

fn criterion_1() -> Outcome {
    let src = corpus("coin_doubling.app");
    let (report, took) = timed(|| commands::prove(&src, None, &ProveOptions::default()));
    check(report.verdict == Verdict::ProvedAsTermination, || format!("verdict {:?}", report.verdict))?;
    check(report.dimension == Some(2), || format!("dimension {:?}", report.dimension))?;
    check(took < Duration::from_secs(1), || format!("prove took {took:?}"))?;

    let cert_text = corpus("coin_doubling.hand.cert.json");
    let v = commands::verify(&src, &cert_text, &VerifyOptions::default());
    check(v.verdict == Verdict::Verified, || format!("hand map rejected: {:?}", v.diagnostics))?;
    let checks = v.checks.as_ref().unwrap();
    let pw = checks.pointwise.as_ref().unwrap();
    check(checks.symbolic && pw.failures == 0, || "hand map fails a check".into())?;

    // The prob bundle: 1/2·(6c+3) + 1/2·3 = 3c+3 ≤ (6c+1) - 1 for c ≥ 1.
    let g = graph(&src);
    let map = Certificate::parse(&cert_text).unwrap().resolve(&g, &program_digest(&parse_program(&src).unwrap())).unwrap();
    let coin = (0..g.locations.len()).find(|&l| g.kind(l) == LocKind::Prob).unwrap();
    for c in 1..=40 {
        let x = [rat(c + 1), rat(c)];
        let pre = preexp(&g, &map.components[0], GenTransition::Bundle(coin), &x);
        let expected = rat(3 * c + 3);
        check(pre == ExtRat::Finite(expected.clone()), || format!("pre-expectation at c={c} is {pre:?}"))?;
        let eta = map.components[0].eval(coin, &x);
        check(expected <= eta - rat(1), || format!("caption inequality fails at c={c}"))?;
    }
    Ok(format!(
        "dimension 2 in {:.0} ms; hand map verified (symbolic + {} sampled configurations); 3c+3 <= 6c at the coin",
        took.as_secs_f64() * 1000.0,
        pw.configurations
    ))
}

fn criterion_2() -> Outcome {
    let src = corpus("biased_walk.app");
    let r = commands::prove(&src, None, &ProveOptions { bound: true, ..ProveOptions::default() });
    check(r.verdict == Verdict::BoundCertified, || format!("verdict {:?}: {:?}", r.verdict, r.diagnostics))?;
    check(r.dimension == Some(1), || format!("dimension {:?}", r.dimension))?;

    let (s, _) = commands::simulate(&src, &SimulateOptions { trials: 100_000, seed: 2024, ..SimulateOptions::default() });
    let sim = s.simulation.as_ref().unwrap();
    let freq = sim["frequency"].as_f64().unwrap();
    let mean_iter = sim["mean_iterations"].as_f64().unwrap();
    let mean_steps = sim["mean_steps"].as_f64().unwrap();
    // Drift oracle: distance 10 covered at net speed 3/4 - 1/4 per iteration.
    let oracle = 10.0 / (0.75 - 0.25);
    check(freq == 1.0, || format!("termination frequency {freq}"))?;
    check((mean_iter - oracle).abs() <= 0.05 * oracle, || format!("mean iterations {mean_iter} vs {oracle}"))?;

    let g = graph(&src);
    let b = r.bound.as_ref().unwrap();
    let expr = lexrsm::frontend::parse_expr(b["expression"].as_str().unwrap(), &g.vars).unwrap();
    let bound = to_f64(&expr.eval(&[rat(10)]).unwrap());
    check(bound >= mean_steps, || format!("bound {bound} below mean steps {mean_steps}"))?;
    Ok(format!(
        "dimension 1; frequency {freq}; mean iterations {mean_iter:.3} (oracle {oracle}); bound {bound} >= mean steps {mean_steps:.3}"
    ))
}

fn criterion_3() -> Outcome {
    const MIN_SAMPLES: usize = 10_000;
    let cases = [
        ("nested_doubling.app", vec![vec!["c"], vec!["x"]]),
        ("nested_scaling.app", vec![vec!["c"], vec!["x"]]),
        ("triple_nested.app", vec![vec!["z"], vec!["y"], vec!["x"]]),
    ];
    let mut total = Duration::ZERO;
    let mut smallest = usize::MAX;
    for (file, want) in cases {
        let src = corpus(file);
        let opts = ProveOptions { compositional: true, ..ProveOptions::default() };
        let (r, took) = timed(|| commands::prove(&src, None, &opts));
        total += took;
        check(r.verdict == Verdict::ProvedAsTermination, || format!("{file}: {:?} {:?}", r.verdict, r.diagnostics))?;
        let got = ledger_shapes(&r);
        check(got == want.iter().map(|v| v.iter().map(|s| s.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(), || {
            format!("{file}: shapes {got:?}")
        })?;

        // Each NCSM on at least ten thousand configurations of its own loop.
        let g = graph(&src);
        let inv = load_annotations(&g);
        let (res, took) = timed(|| {
            let res = prove_compositional(&g, &inv, &NcsmConfig::default());
            let mut counts = Vec::new();
            for c in &res.ledger {
                let per_loc = MIN_SAMPLES.div_ceil(c.decomposition.locations.len());
                let samples = sample_configs(&g, &inv, per_loc, 17);
                let rep = c.pointwise_check(&g, &samples);
                counts.push((rep.configurations, rep.failures.len()));
            }
            counts
        });
        total += took;
        for (n, fails) in res {
            check(fails == 0, || format!("{file}: {fails} pointwise violations"))?;
            check(n >= MIN_SAMPLES, || format!("{file}: only {n} configurations sampled"))?;
            smallest = smallest.min(n);
        }
    }
    check(total < Duration::from_secs(5), || format!("took {total:?}"))?;
    Ok(format!("shapes c/x, c/x, z/y/x; >= {smallest} configurations per NCSM, zero violations; {:.2} s", total.as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let r = commands::prove(&corpus("divergent.app"), None, &ProveOptions::default());
    check(r.verdict == Verdict::NoLinlexrsm, || format!("divergent loop: {:?}", r.verdict))?;

    let src = corpus("coin_doubling.app");
    let hand = corpus("coin_doubling.hand.cert.json");
    let eps2 = hand.replace("\"epsilon\": \"1\"", "\"epsilon\": \"2\"");
    check(eps2 != hand, || "epsilon field not found".into())?;
    let v = commands::verify(&src, &eps2, &VerifyOptions::default());
    check(v.verdict == Verdict::VerifyFailed, || format!("epsilon 2 accepted: {:?}", v.verdict))?;
    let at_coin = v.diagnostics.iter().find(|d| d.starts_with("l3 b3") && d.contains("c=1"));
    check(at_coin.is_some(), || format!("no violation at the coin with c = 1: {:?}", v.diagnostics))?;

    let tampered = hand.replacen("\"6*c + 2\"", "\"6*c + 1\"", 1);
    check(tampered != hand, || "coefficient not found".into())?;
    let t = commands::verify(&src, &tampered, &VerifyOptions::default());
    let located = t.diagnostics.iter().find(|d| d.starts_with('l') && d.contains(" at ("));
    check(t.verdict == Verdict::VerifyFailed && located.is_some(), || format!("tampered map: {:?}", t.diagnostics))?;

    let other = commands::verify(&corpus("biased_walk.app"), &hand, &VerifyOptions::default());
    check(other.diagnostics.iter().any(|d| d.contains("digest mismatch")), || "digest not checked".into())?;
    Ok(format!("no-linlexrsm; epsilon 2 fails: {}; tampered fails: {}", at_coin.unwrap(), located.unwrap()))
}

fn criterion_5() -> Outcome {
    let r = commands::prove(&corpus("coin_doubling.app"), None, &ProveOptions { bound: true, ..ProveOptions::default() });
    check(r.verdict == Verdict::NoEci, || format!("coin doubling: {:?}", r.verdict))?;

    let src = corpus("sequential.app");
    let opts = ProveOptions { bound: true, at: Some("x=5,y=7".into()), ..ProveOptions::default() };
    let r = commands::prove(&src, None, &opts);
    check(r.verdict == Verdict::BoundCertified, || format!("sequential: {:?} {:?}", r.verdict, r.diagnostics))?;
    let value = r.bound.as_ref().unwrap()["at"]["value"].as_str().unwrap().to_string();
    let bound = to_f64(&lexrsm::linear::parse_rat(&value).unwrap());

    let g = graph(&src);
    let runs = run_trials(&g, &[rat(5), rat(7)], &SchedulerPolicy::Uniform, 100_000, DEFAULT_CAP, 99).map_err(|e| e.to_string())?;
    let est = summarize(&runs, 99);
    check(est.terminated == est.trials, || "some runs hit the cap".into())?;
    let upper = est.mean_steps + Z99 * est.steps_std_err;
    check(upper <= bound, || format!("99% upper limit {upper} of the mean exceeds bound {bound}"))?;
    Ok(format!("no-eci for coin doubling; bound at (5,7) = {value} >= {upper:.3} (mean {:.3} + 99% margin)", est.mean_steps))
}

fn criterion_6() -> Outcome {
    let table = [(2, 20), (3, 32), (4, 56), (5, 104), (6, 200), (7, 392), (8, 776)];
    let mut solver_ms = Vec::new();
    let mut summary = Vec::new();
    for (n, paper_loc) in table {
        let src = generate(&GeneratorSpec { n, seed: 0, ndet: true }).map_err(|e| e.to_string())?;
        let loc = lines_of_code(&src);
        let rel = (loc as f64 - paper_loc as f64).abs() / paper_loc as f64;
        check(rel <= 0.2, || format!("n={n}: {loc} lines vs {paper_loc}"))?;
        let (r, took) = timed(|| commands::prove(&src, None, &ProveOptions::default()));
        check(r.verdict == Verdict::ProvedAsTermination, || format!("n={n}: {:?} {:?}", r.verdict, r.diagnostics))?;
        let dim = r.dimension.unwrap();
        check(dim <= 3, || format!("n={n}: dimension {dim}"))?;
        if n == 8 {
            check(took < Duration::from_secs(60), || format!("n=8 took {took:?}"))?;
        }
        let solver = r.timings_ms.constraint_gen + r.timings_ms.lp;
        solver_ms.push(solver);
        summary.push(format!("n={n} loc={loc} dim={dim} solver={:.0}ms total={:.1}s", solver, took.as_secs_f64()));
    }
    check(solver_ms.windows(2).all(|w| w[0] <= w[1]), || format!("solver time not monotone: {solver_ms:?}"))?;
    Ok(summary.join("; "))
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<Row> {
    let bound = rng.gen_range(1..=5);
    let mut rows: Vec<Row> = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut e = vec![rat(0); n];
            e[i] = rat(s);
            rows.push((e, rat(bound)));
        }
    }
    for _ in 0..rng.gen_range(0..=4) {
        rows.push(((0..n).map(|_| rat(rng.gen_range(-4..=4))).collect(), rat(rng.gen_range(-6..=6))));
    }
    rows
}

fn farkas_lp(rows: &[Row], target: &SymExpr, ids: &IdGen) -> LpProblem {
    let premise = Polyhedron::new(
        rows.iter()
            .map(|(a, b)| LinConstraint::le_zero(LinExpr::from_terms(a.iter().cloned().enumerate(), -b.clone())))
            .collect(),
    );
    let block = entails(&premise, target, ids, "acceptance");
    let mut lp = LpProblem::new();
    for &m in &block.multipliers {
        lp.nonneg(m);
    }
    for (e, rel) in block.constraints {
        lp.add(e, rel, rat(0));
    }
    lp
}

/// (a) Farkas soundness and completeness against vertex enumeration.
fn farkas_suite(instances: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < instances {
        let n = rng.gen_range(1..=3);
        let rows = random_rows(&mut rng, n);
        let verts = vertices(n, &rows);
        if verts.is_empty() {
            continue;
        }
        let c: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-4..=4))).collect();
        let max = verts.iter().map(|v| dot(&c, v)).max().unwrap();
        let lin = LinExpr::from_terms(c.iter().cloned().enumerate(), rat(0));
        // Completeness: c·x - max ≤ 0 is entailed.
        let ids = IdGen::new();
        let entailed = SymExpr::concrete(&lin.minus(&LinExpr::constant(max.clone())));
        check(!matches!(solve(&farkas_lp(&rows, &entailed, &ids)), LpOutcome::Infeasible), || {
            format!("entailed target rejected: {rows:?} {c:?}")
        })?;
        // Soundness: a solved unknown constant makes the target hold at sampled points.
        let ids = IdGen::new();
        let d = ids.fresh();
        let mut target = SymExpr::concrete(&lin);
        target.add_unknown_constant(&LinExpr::var(d));
        let mut lp = farkas_lp(&rows, &target, &ids);
        lp.set_objective(Sense::Maximize, LinExpr::var(d));
        let dv = solve(&lp).value(d).ok_or("no solution for the constant")?;
        for v in &verts {
            check(dot(&c, v) + &dv <= Rat::zero(), || format!("target fails at vertex {v:?}"))?;
        }
        let refuted = SymExpr::concrete(&lin.minus(&LinExpr::constant(max - rat(1))));
        check(solve(&farkas_lp(&rows, &refuted, &IdGen::new())) == LpOutcome::Infeasible, || "refuted target accepted".into())?;
        checked += 1;
    }
    Ok(checked)
}

/// (b) The solver's own feasibility assertion never fires, and optima match
/// the vertex oracle.
fn lp_suite(instances: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..instances {
        let n = rng.gen_range(1..=3);
        let rows = random_rows(&mut rng, n);
        let c: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-4..=4))).collect();
        let mut lp = LpProblem::new();
        for (a, b) in &rows {
            lp.add(LinExpr::from_terms(a.iter().cloned().enumerate(), rat(0)), Rel::Le, b.clone());
        }
        lp.set_objective(Sense::Maximize, LinExpr::from_terms(c.iter().cloned().enumerate(), rat(0)));
        let verts = vertices(n, &rows);
        let out = std::panic::catch_unwind(|| solve(&lp)).map_err(|_| "solver assertion fired".to_string())?;
        match out {
            LpOutcome::Optimal { objective, .. } => {
                let best = verts.iter().map(|v| dot(&c, v)).max().ok_or("optimum on an empty polytope")?;
                check(objective == best, || format!("objective {objective} vs vertex {best}"))?;
            }
            LpOutcome::Infeasible => check(verts.is_empty(), || "feasible problem declared infeasible".into())?,
            LpOutcome::Unbounded => return Err("bounded problem declared unbounded".into()),
        }
    }
    Ok(instances)
}

/// (c) Every emitted certificate passes both verifiers when re-checked from
/// its serialized form.
fn certificate_suite() -> Result<usize, String> {
    let mut sources: Vec<(String, String)> = [
        "biased_walk", "coin_doubling", "divergent", "nested_doubling", "nested_scaling", "nested_uniform_walk",
        "nondet_walk", "sequential", "skip", "triple_nested",
    ]
    .iter()
    .map(|f| (f.to_string(), corpus(&format!("{f}.app"))))
    .collect();
    for n in 1..=4 {
        sources.push((format!("generated n={n}"), generate(&GeneratorSpec { n, seed: 3, ndet: true }).unwrap()));
    }
    let mut emitted = 0;
    for (name, src) in &sources {
        let r = commands::prove(src, None, &ProveOptions::default());
        let Some(cert) = &r.certificate else { continue };
        let checks = r.checks.as_ref().ok_or(format!("{name}: certificate without checks"))?;
        check(checks.symbolic && checks.pointwise.as_ref().is_some_and(|p| p.failures == 0), || format!("{name}: unchecked"))?;
        let v = commands::verify(src, &cert.to_string(), &VerifyOptions { seed: 5, ..VerifyOptions::default() });
        check(v.verdict == Verdict::Verified, || format!("{name}: emitted certificate rejected: {:?}", v.diagnostics))?;
        emitted += 1;
    }
    Ok(emitted)
}

/// (d) Printer round trip on the corpus.
fn round_trip_suite() -> Result<usize, String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        if p.extension().is_some_and(|e| e == "app") {
            let ast = parse_program(&std::fs::read_to_string(&p).unwrap()).map_err(|e| format!("{}: {e}", p.display()))?;
            let again = parse_program(&pretty_print(&ast)).map_err(|e| e.to_string())?;
            check(again == ast, || format!("{} does not round-trip", p.display()))?;
            n += 1;
        }
    }
    Ok(n)
}

fn criterion_7() -> Outcome {
    let a = farkas_suite(1000)?;
    let b = lp_suite(1000)?;
    let c = certificate_suite()?;
    let d = round_trip_suite()?;
    Ok(format!(
        "(a) {a} Farkas instances; (b) {b} LPs, assertion silent; (c) {c} certificates re-verified; (d) {d} corpus files round-trip"
    ))
}

fn main() {
    // Only the solver's own assertion may panic inside criterion 7(b); keep
    // the output readable.
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [(u32, &str, fn() -> Outcome); 7] = [
        (1, "two-component regression", criterion_1),
        (2, "random walk regression", criterion_2),
        (3, "compositional suite", criterion_3),
        (4, "negative controls", criterion_4),
        (5, "expected-runtime bounds", criterion_5),
        (6, "scaling", criterion_6),
        (7, "property suites", criterion_7),
    ];
    let mut failed = 0;
    for (n, title, f) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({title}, {secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({title}, {secs:.1} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
