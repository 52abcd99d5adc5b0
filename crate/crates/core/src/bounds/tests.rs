use super::*;
use crate::frontend::{parse_expr, parse_program};
use crate::invariants::load_annotations;
use crate::lexrsm::{preexp, synthesize, ExtRat, Lem, SynthesisConfig};
use crate::linear::{rat, ratio};
use crate::pcfg::gen_transitions;
use crate::sim::sample_configs;

fn corpus(name: &str) -> Pcfg {
    let src = std::fs::read_to_string(format!("{}/../../corpus/{name}.app", env!("CARGO_MANIFEST_DIR"))).unwrap();
    graph(&src)
}

fn graph(src: &str) -> Pcfg {
    Pcfg::from_ast(&parse_program(src).unwrap())
}

fn synth(g: &Pcfg) -> LexRsmMap {
    synthesize(g, &load_annotations(g), &SynthesisConfig::default()).unwrap()
}

fn lem(g: &Pcfg, v: &[&str]) -> Lem {
    Lem { exprs: v.iter().map(|s| parse_expr(s, &g.vars).unwrap()).collect() }
}

/// Two components with level 1 on locations below `split` and level 2 from it on.
fn two_level_map(g: &Pcfg, first: &[&str], second: &[&str], split: usize) -> LexRsmMap {
    let levels = gen_transitions(g).into_iter().map(|gt| (gt, if gt.source(g) >= split { 2 } else { 1 })).collect();
    LexRsmMap {
        components: vec![lem(g, first), lem(g, second)],
        levels,
        epsilon: rat(1),
        invariants: load_annotations(g),
    }
}

#[test]
fn one_dimension_needs_no_increase_bound() {
    let g = corpus("biased_walk");
    let map = synth(&g);
    let cert = synthesize_eci(&g, &map).unwrap();
    assert_eq!(cert.eci, vec![rat(0)]);
    assert_eq!(&cert.bound, map.components[0].at(g.init_loc));
    // Three steps per iteration, 10 / (3/4 - 1/4) = 20 expected iterations, one exit step.
    let closed_form = rat(3 * 20 + 1);
    assert!(bound_value(&g, &cert, &[rat(10)]).unwrap() >= closed_form);
}

#[test]
fn doubling_has_no_eci() {
    let g = corpus("coin_doubling");
    assert_eq!(synthesize_eci(&g, &synth(&g)), Err(BoundError::NoEci));
}

#[test]
fn sequential_loops_hand_map() {
    // l0 first head, l1 x := x - 1, l2 second head, l3 y := y - 1, l4 term
    let g = corpus("sequential");
    let map = two_level_map(
        &g,
        &["2*x + 2", "2*x + 1", "0", "0", "0"],
        &["2*y + 2", "2*y + 2", "2*y + 2", "2*y + 1", "0"],
        2,
    );
    let cert = synthesize_eci(&g, &map).unwrap();
    assert_eq!(cert.eci, vec![rat(0), rat(0)]);
    // (2x + 2)·1 + (2y + 2) at (5, 7); the run takes 2·5 + 1 + 2·7 + 1 = 26 steps.
    assert_eq!(bound_value(&g, &cert, &[rat(5), rat(7)]).unwrap(), rat(28));
    assert!(eci_is_minimal(&g, &cert));
}

const GROWING: &str = "@vars(x, y)
@init(x >= 0 and y >= 0)
while x >= 1 do x := x - 1; y := y + 1 od;
while y >= 1 do y := y - 1 od";

fn growing_map(g: &Pcfg) -> LexRsmMap {
    // l0 first head, l1 x := x - 1, l2 y := y + 1, l3 second head, l4 y := y - 1, l5 term
    two_level_map(
        g,
        &["3*x + 3", "3*x + 2", "3*x + 4", "0", "0", "0"],
        &["2*y + 2", "2*y + 2", "2*y + 2", "2*y + 2", "2*y + 1", "0"],
        3,
    )
}

#[test]
fn bounded_increase_is_found_and_minimal() {
    let g = graph(GROWING);
    let map = growing_map(&g);
    let cert = synthesize_eci(&g, &map).unwrap();

    // Oracle: the largest sampled one-step increase of η_2 over level-1 transitions.
    let samples = sample_configs(&g, &map.invariants, 30, 3);
    let mut sup = None::<Rat>;
    for (l, x) in &samples.configs {
        for gt in gen_transitions(&g).into_iter().filter(|gt| gt.source(&g) == *l && map.levels[gt] == 1) {
            if !crate::lexrsm::enabled(&g, gt, x) {
                continue;
            }
            let ExtRat::Finite(v) = preexp(&g, &map.components[1], gt, x) else { panic!("unbounded") };
            let inc = v - map.components[1].eval(*l, x);
            sup = Some(sup.map_or(inc.clone(), |s| s.max(inc)));
        }
    }
    assert_eq!(cert.eci, vec![rat(0), sup.unwrap()]);
    assert_eq!(cert.eci[1], rat(2));
    assert!(eci_is_minimal(&g, &cert));
    // 3·(3x + 3) + 2y + 2 against the exact 3x + 1 + 2(x + y) + 1 steps.
    let at = [rat(5), rat(7)];
    assert_eq!(bound_value(&g, &cert, &at).unwrap(), rat(9 * 5 + 2 * 7 + 11));
    assert!(bound_value(&g, &cert, &at).unwrap() >= rat(5 * 5 + 2 * 7 + 2));
}

#[test]
fn epsilon_is_normalized() {
    let g = graph(GROWING);
    let mut map = growing_map(&g);
    for c in &mut map.components {
        for e in &mut c.exprs {
            *e = e.scaled(&rat(3));
        }
    }
    map.epsilon = rat(3);
    let cert = synthesize_eci(&g, &map).unwrap();
    assert_eq!(cert.map.epsilon, rat(1));
    assert_eq!(cert.eci, vec![rat(0), rat(2)]);
    assert_eq!(cert, synthesize_eci(&g, &growing_map(&g)).unwrap());
}

#[test]
fn unverified_map_and_bad_initial_values() {
    let g = corpus("sequential");
    let mut map = synth(&g);
    map.components[0].exprs[0] = LinExpr::zero();
    assert!(matches!(synthesize_eci(&g, &map), Err(BoundError::MapUnverified(_))));

    let cert = synthesize_eci(&g, &synth(&g)).unwrap();
    assert_eq!(bound_value(&g, &cert, &[rat(-1), rat(0)]), Err(BoundError::OutsideInit));
    assert_eq!(bound_value(&g, &cert, &[rat(1)]), Err(BoundError::OutsideInit));
    assert_eq!(bound_value(&g, &cert, &[ratio(1, 2), rat(0)]).map(|b| b >= rat(0)), Ok(true));
}

#[test]
fn corpus_certificates_are_minimal() {
    for f in ["biased_walk", "sequential", "nondet_walk", "skip"] {
        let g = corpus(f);
        if let Ok(cert) = synthesize_eci(&g, &synth(&g)) {
            assert!(eci_is_minimal(&g, &cert), "{f}");
            assert!(cert.eci.iter().all(|c| !c.is_negative()));
        }
    }
}
