use super::*;
use crate::frontend::parse_program;
use crate::invariants::load_annotations;
use crate::linear::rat;
use crate::sim::sample_configs;

fn corpus(name: &str) -> Pcfg {
    let src = std::fs::read_to_string(format!("{}/../../corpus/{name}.app", env!("CARGO_MANIFEST_DIR"))).unwrap();
    Pcfg::from_ast(&parse_program(&src).unwrap())
}

fn graph(src: &str) -> Pcfg {
    Pcfg::from_ast(&parse_program(src).unwrap())
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

fn var(g: &Pcfg, name: &str) -> usize {
    g.vars.iter().position(|v| v == name).unwrap()
}

#[test]
fn decompose_nested() {
    // l0 outer head, l1 y := x, l2 inner head, l3 inner body, l4 x := x - 1, l5 term
    let g = corpus("nested_uniform_walk");
    let d = decompose(&g, 0).unwrap();
    assert_eq!(d.loops, set(&[2, 3]));
    assert_eq!(d.slice, set(&[0, 1, 4, 5]));
    assert_eq!(d.locations, set(&[0, 1, 2, 3, 4, 5]));
    let inner = decompose(&g, 2).unwrap();
    assert!(inner.loops.is_empty());
    assert_eq!(inner.slice, inner.locations);
    assert_eq!(decompose(&g, 1), Err(CompositionalError::NotAHead(1)));
}

#[test]
fn decompose_flat_and_innermost() {
    let g = graph("@vars(x)\nwhile x >= 1 do x := x - 1 od");
    let d = decompose(&g, 0).unwrap();
    assert!(d.loops.is_empty());
    assert_eq!(d.slice, d.locations);

    let g = corpus("triple_nested");
    let z_loop = g.loops.iter().find(|l| l.depth == 2).unwrap();
    assert!(decompose(&g, z_loop.head).unwrap().loops.is_empty());
}

fn shapes(name: &str) -> Vec<BTreeSet<String>> {
    let g = corpus(name);
    let inv = load_annotations(&g);
    let r = prove_compositional(&g, &inv, &NcsmConfig::default());
    assert!(r.proved(), "{name}: {:?}", r.verdict);
    assert!(ledger_is_topological(&g, &r.ledger));
    let samples = sample_configs(&g, &inv, 1000, 7);
    for cert in &r.ledger {
        assert_eq!(cert.verify_symbolically(&g, &inv), Ok(()));
        let rep = cert.pointwise_check(&g, &samples);
        assert!(rep.passed(), "{name}: {:?}", rep.failures.first());
        assert!(rep.transitions_checked > 0);
    }
    r.ledger.iter().map(|c| c.support().into_iter().map(|v| g.var_name(v)).collect()).collect()
}

fn names(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn nested_coin_shapes() {
    for f in ["nested_doubling", "nested_scaling"] {
        assert_eq!(shapes(f), vec![names(&["c"]), names(&["x"])], "{f}");
    }
}

#[test]
fn triple_nested_shapes() {
    assert_eq!(shapes("triple_nested"), vec![names(&["z"]), names(&["y"]), names(&["x"])]);
}

#[test]
fn increment_cannot_be_proved() {
    let g = graph("@vars(x)\nwhile x >= 0 do x := x + 1 od");
    let inv = load_annotations(&g);
    let r = prove_compositional(&g, &inv, &NcsmConfig::default());
    assert!(matches!(r.verdict, CompositionalVerdict::CannotProve { loop_id: 0, .. }));
    assert!(r.ledger.is_empty());
}

#[test]
fn one_dimensional_mode() {
    let g = corpus("nested_doubling");
    let inv = load_annotations(&g);
    let r = prove_compositional(&g, &inv, &NcsmConfig { epsilon: rat(1), max_dimension: Some(1) });
    assert!(r.proved());
    assert!(r.ledger.iter().all(|c| c.dimension() == 1));
}

#[test]
fn tampered_ncsm_is_caught() {
    let g = corpus("nested_doubling");
    let inv = load_annotations(&g);
    let r = prove_compositional(&g, &inv, &NcsmConfig::default());
    let mut cert = r.ledger[1].clone();
    let x = var(&g, "x");
    // Flip the sign of x at the outer head: non-negativity and ranking break.
    let head = cert.decomposition.head;
    let e = cert.components[0].exprs[head].clone();
    cert.components[0].exprs[head] = e.substitute(x, &LinExpr::var(x).negated());
    assert!(cert.verify_symbolically(&g, &inv).is_err());
    let rep = cert.pointwise_check(&g, &sample_configs(&g, &inv, 50, 1));
    assert!(!rep.passed());
}

#[test]
fn unaffected_clause_on_nested_locations() {
    // The outer map of the nested coin program must not increase in expectation inside the inner loop.
    let g = corpus("nested_doubling");
    let inv = load_annotations(&g);
    let r = prove_compositional(&g, &inv, &NcsmConfig::default());
    let outer = &r.ledger[1];
    let reqs = outer.requirements(&g);
    assert!(reqs.iter().any(|&(gt, l)| l == 0 && outer.decomposition.loops.contains(&gt.source(&g))));
    assert!(reqs.iter().filter(|r| r.1 > 0).all(|(gt, _)| outer.decomposition.slice.contains(&gt.source(&g))));
}

#[test]
fn consistent_with_monolithic_synthesis() {
    let dir = format!("{}/../../corpus", env!("CARGO_MANIFEST_DIR"));
    let mut checked = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "app") {
            continue;
        }
        let g = Pcfg::from_ast(&parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap());
        let inv = load_annotations(&g);
        if crate::lexrsm::synthesize(&g, &inv, &Default::default()).is_ok() {
            checked += 1;
            let r = prove_compositional(&g, &inv, &NcsmConfig::default());
            assert!(r.proved(), "{}: {:?}", path.display(), r.verdict);
        }
    }
    assert!(checked >= 5);
}
