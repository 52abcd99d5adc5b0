use std::path::{Path, PathBuf};
use std::process::Command;

use lexrsm_cli::commands::{self, ProveOptions, SimulateOptions, VerifyOptions};
use lexrsm_cli::report::Report;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(root().join("corpus").join(name)).unwrap()
}

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report-v1.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&schema).unwrap()
}

fn assert_valid(report: &Report) {
    let value: Value = serde_json::from_str(&report.to_json()).unwrap();
    let schema = schema();
    let msgs: Vec<String> = match schema.validate(&value) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("report does not match the schema: {msgs:?}\n{}", report.to_json());
}

/// Small sample counts keep the golden runs quick.
fn quick() -> ProveOptions {
    ProveOptions { samples: Some(50), seed: 7, ..ProveOptions::default() }
}

fn golden_cases() -> Vec<(&'static str, Report)> {
    let prove = |f: &str, opts: ProveOptions| commands::prove(&corpus(f), None, &opts);
    vec![
        ("prove_biased_walk", prove("biased_walk.app", quick())),
        ("prove_coin_doubling", prove("coin_doubling.app", quick())),
        ("prove_divergent", prove("divergent.app", quick())),
        ("prove_nondet_walk", prove("nondet_walk.app", quick())),
        ("prove_skip", prove("skip.app", quick())),
        ("compose_nested_doubling", prove("nested_doubling.app", ProveOptions { compositional: true, ..quick() })),
        ("compose_triple_nested", prove("triple_nested.app", ProveOptions { compositional: true, ..quick() })),
        (
            "bound_sequential",
            prove("sequential.app", ProveOptions { bound: true, at: Some("x=5,y=7".into()), ..quick() }),
        ),
        ("bound_coin_doubling", prove("coin_doubling.app", ProveOptions { bound: true, ..quick() })),
        (
            "verify_coin_doubling_hand",
            commands::verify(
                &corpus("coin_doubling.app"),
                &corpus("coin_doubling.hand.cert.json"),
                &VerifyOptions { samples: Some(50), seed: 7, ..VerifyOptions::default() },
            ),
        ),
        (
            "simulate_biased_walk",
            commands::simulate(&corpus("biased_walk.app"), &SimulateOptions { trials: 200, seed: 3, ..SimulateOptions::default() }).0,
        ),
    ]
}

#[test]
fn goldens_are_byte_stable() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("LEXRSM_UPDATE_GOLDENS").is_some();
    for (name, report) in golden_cases() {
        assert_valid(&report);
        let text = report.without_timings().to_json();
        let path = dir.join(format!("{name}.json"));
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
        assert_eq!(text, expected, "golden {name} changed; rerun with LEXRSM_UPDATE_GOLDENS=1 if intended");
    }
}

#[test]
fn same_inputs_same_report() {
    let a = commands::prove(&corpus("coin_doubling.app"), None, &quick());
    let b = commands::prove(&corpus("coin_doubling.app"), None, &quick());
    assert_eq!(a.without_timings(), b.without_timings());
    let opts = SimulateOptions { trials: 500, seed: 11, ..SimulateOptions::default() };
    let (r1, t1) = commands::simulate(&corpus("biased_walk.app"), &opts);
    let (r2, t2) = commands::simulate(&corpus("biased_walk.app"), &opts);
    assert_eq!(r1.without_timings(), r2.without_timings());
    assert_eq!(t1, t2);
}

#[test]
fn failure_reports_match_the_schema() {
    let reports = [
        commands::prove("while x >= 0 do", None, &quick()),
        commands::prove(&corpus("nested_uniform_walk.app"), None, &ProveOptions { compositional: true, ..quick() }),
        commands::verify(&corpus("biased_walk.app"), &corpus("coin_doubling.hand.cert.json"), &VerifyOptions::default()),
        commands::verify(&corpus("coin_doubling.app"), "{\"format\": 1}", &VerifyOptions::default()),
        commands::simulate(&corpus("biased_walk.app"), &SimulateOptions { at: Some("x=-4".into()), ..SimulateOptions::default() }).0,
    ];
    for r in &reports {
        assert_valid(r);
        assert!(!r.solution);
        assert!(r.timings_ms.parse >= 0.0 && r.timings_ms.lp >= 0.0);
    }
}

#[test]
fn timings_are_nonnegative_and_stripped() {
    let r = commands::prove(&corpus("biased_walk.app"), None, &quick());
    let t = &r.timings_ms;
    for v in [t.parse, t.invariants, t.constraint_gen, t.lp, t.verify] {
        assert!(v >= 0.0);
    }
    assert!(t.lp > 0.0);
    assert_eq!(r.without_timings().timings_ms.lp, 0.0);
}

#[test]
fn user_invariant_violation_blocks_the_certificate() {
    let src = "@vars(x)\n@init(x = 10)\n@invariant(x >= 5)\nwhile x >= 1 do x := x - 1 od";
    let r = commands::prove(src, None, &quick());
    assert_valid(&r);
    assert_eq!(r.verdict.exit_code(), 5);
    assert!(r.certificate.is_none());
}

#[test]
fn sidecar_invariants_are_reported() {
    let src = corpus("biased_walk.app");
    let r = commands::prove(&src, Some("loc 1: x >= 0\n"), &quick());
    assert_valid(&r);
    assert!(r.solution);
    assert!(r.invariants.iter().any(|row| row.provenance == "sidecar"));
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lexrsm"))
        .args(args)
        .current_dir(root())
        .env("LEXRSM_THREADS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn exit_codes() {
    let fast = ["--samples", "20"];
    let prove = |f: &str, extra: &[&str]| {
        let mut a = vec!["prove", f];
        a.extend_from_slice(&fast);
        a.extend_from_slice(extra);
        run(&a).0
    };
    assert_eq!(prove("corpus/biased_walk.app", &[]), 0);
    assert_eq!(prove("corpus/divergent.app", &[]), 1);
    assert_eq!(prove("corpus/nested_uniform_walk.app", &["--compositional"]), 2);
    assert_eq!(prove("corpus/coin_doubling.app", &["--bound"]), 3);
    assert_eq!(prove("corpus/sequential.app", &["--bound", "--at", "x=5,y=7"]), 0);
    assert_eq!(prove("corpus/missing.app", &[]), 64);
    assert_eq!(prove("corpus/biased_walk.app", &["--epsilon", "-1"]), 64);
    assert_eq!(run(&["verify", "corpus/coin_doubling.app", "corpus/coin_doubling.hand.cert.json"]).0, 0);
    assert_eq!(run(&["verify", "corpus/biased_walk.app", "corpus/coin_doubling.hand.cert.json"]).0, 4);
    assert_eq!(run(&["verify", "corpus/coin_doubling.app", "corpus/skip.app"]).0, 64);
    assert_eq!(run(&["generate", "--n", "0"]).0, 64);
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn aliases_and_outputs() {
    let dir = std::env::temp_dir().join(format!("lexrsm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("r.json");
    let cert = dir.join("c.json");
    let (code, stdout, _) = run(&[
        "bound",
        "corpus/sequential.app",
        "--samples",
        "20",
        "--at",
        "x=5,y=7",
        "--json",
        report.to_str().unwrap(),
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("bound-certified"), "{stdout}");
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["bound"]["at"]["value"], "26");
    assert_eq!(run(&["verify", "corpus/sequential.app", cert.to_str().unwrap()]).0, 0);

    let (code, stdout, _) = run(&["compose", "corpus/triple_nested.app", "--samples", "20", "--json", "-"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(r["mode"], "compositional");

    let csv = dir.join("t.csv");
    let (code, _, _) = run(&[
        "simulate",
        "corpus/biased_walk.app",
        "--trials",
        "50",
        "--seed",
        "1",
        "--trials-out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial,terminated,steps,iterations,final_location,x\n"));
    assert_eq!(text.lines().count(), 51);

    let (code, stdout, _) = run(&["generate", "--n", "2", "--seed", "4"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("@vars(x, b1, b2)"));
    let (_, dot, _) = run(&["prove", "corpus/skip.app", "--emit-pcfg", "dot", "--no-sample-check"]);
    assert!(dot.contains("digraph"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn schema_rejects_inconsistent_reports() {
    let schema = schema();
    let good: Value = serde_json::from_str(&commands::prove(&corpus("skip.app"), None, &quick()).to_json()).unwrap();
    assert!(schema.is_valid(&good));
    let mut no_payload = good.clone();
    no_payload["certificate"] = Value::Null;
    assert!(!schema.is_valid(&no_payload));
    let mut negative = good.clone();
    negative["timings_ms"]["lp"] = serde_json::json!(-1.0);
    assert!(!schema.is_valid(&negative));
    let mut unknown = good;
    unknown["verdict"] = serde_json::json!("maybe");
    assert!(!schema.is_valid(&unknown));
}
