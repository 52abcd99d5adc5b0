use super::*;
use crate::linear::{rat, ratio};

const BIASED_WALK: &str = "@init(x >= 0)
while x >= 1 do
  if prob(3/4) then x := x - 1 else x := x + 1 fi
od";

#[test]
fn biased_walk_shape() {
    let ast = parse_program(BIASED_WALK).unwrap();
    assert_eq!(ast.vars, vec!["x".to_string()]);
    let Stmt::While { guard, body, invariant } = &ast.body else { panic!("expected while") };
    assert!(invariant.is_none());
    assert!(guard.holds(&[rat(1)]) && !guard.holds(&[rat(0)]));
    let Stmt::If { guard: IfGuard::Prob(p), .. } = body.as_ref() else { panic!("expected prob if") };
    assert_eq!(*p, ratio(3, 4));
}

#[test]
fn skip_only() {
    let ast = parse_program("skip").unwrap();
    assert_eq!(ast.body, Stmt::Skip);
    assert!(ast.vars.is_empty());
}

#[test]
fn unterminated_while() {
    let e = parse_program("@vars(x)\nwhile x≥1 do").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    assert_eq!(e.line, 2);
    assert!(e.to_string().contains("end of input"), "{e}");
}

#[test]
fn error_kinds() {
    let kind = |s: &str| parse_program(s).unwrap_err().kind;
    assert_eq!(kind("@vars(x, y)\nx := x * y"), ParseErrorKind::NonAffine);
    assert!(matches!(kind("@vars(x)\nif prob(3/2) then skip else skip fi"), ParseErrorKind::ProbOutOfRange(_)));
    assert_eq!(kind("@vars(x)\nx := sample(poisson(2))"), ParseErrorKind::UnknownDistribution("poisson".into()));
    assert_eq!(kind("x := y"), ParseErrorKind::UndeclaredVariable("y".into()));
    assert_eq!(kind("@vars(x)\nwhile x >= sample(uniform(0, 1)) do skip od"), ParseErrorKind::MisplacedRandom);
    assert_eq!(kind("@vars(x)\nx := ndet([inf, 2])"), ParseErrorKind::BadInterval);
    assert_eq!(kind("@vars(x)\nx := x / 0"), ParseErrorKind::DivisionByZero);
    assert!(matches!(kind("@init(x >= 0 or x <= -1)\nskip"), ParseErrorKind::NotConjunctive(_)));
}

#[test]
fn unicode_operators() {
    let a = parse_program("@vars(x, y)\nwhile x ≥ 1 ∧ ¬(y ≤ 0) do x := 2·x − 1 od").unwrap();
    let b = parse_program("@vars(x, y)\nwhile x >= 1 and not (y <= 0) do x := 2*x - 1 od").unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_terms() {
    let ast = parse_program("@vars(x)\nx := x + 2*sample(uniform(-3, 1)); x := ndet([-inf, 3]) - 1").unwrap();
    let Stmt::Seq(ss) = &ast.body else { panic!() };
    let Stmt::Assign { rhs, .. } = &ss[0] else { panic!() };
    let (k, Random::Sample(d)) = rhs.random.clone().unwrap() else { panic!() };
    assert_eq!(k, rat(2));
    assert_eq!(d.mean(), rat(-1));
    let Stmt::Assign { rhs, .. } = &ss[1] else { panic!() };
    assert_eq!(rhs.random, Some((rat(1), Random::Ndet(Interval::new(None, Some(rat(3)))))));
    assert_eq!(rhs.base, LinExpr::constant(rat(-1)));
}

#[test]
fn round_trip_examples() {
    let sources = [
        BIASED_WALK,
        "skip",
        "@vars(x, c)\n@init(c = 1 and x >= 0)\n@invariant(c >= 0)\nwhile c >= 1 do\n  if * then c := 0 else x := x + sample(custom(1/2, -1, inf)) fi;\n  if x != 3 or c < 1 then skip else x := -ndet([0, 2]) fi\nod",
        "@vars(x)\nwhile (x + 1) * 2 >= 3 do x := x - 1 od; x := 0",
    ];
    for src in sources {
        let ast = parse_program(src).unwrap();
        let printed = pretty_print(&ast);
        let again = parse_program(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(ast, again, "{printed}");
        assert_eq!(printed, pretty_print(&again));
    }
}

#[test]
fn assertion_and_expr_against_vars() {
    let vars = vec!["x".to_string(), "c".to_string()];
    let p = parse_assertion("x >= 1 and c >= 0", &vars).unwrap();
    assert!(p.holds(&[rat(1), rat(0)]));
    assert!(!p.holds(&[rat(0), rat(0)]));
    assert_eq!(parse_expr("6*c + 2 + x", &vars).unwrap(), LinExpr::from_terms([(0, rat(1)), (1, rat(6))], rat(2)));
    assert!(matches!(parse_assertion("z >= 0", &vars).unwrap_err().kind, ParseErrorKind::UndeclaredVariable(_)));
    assert!(parse_expr("x x", &vars).is_err());
}

#[test]
fn dnf_and_negation() {
    let vars = vec!["x".to_string()];
    let p = parse_assertion("x != 0", &vars).unwrap();
    assert_eq!(p.to_plp().disjuncts.len(), 2);
    assert_eq!(p.negate().as_polyhedron().unwrap().len(), 2);
    assert_eq!(Pred::False.to_plp(), Plp::single(Polyhedron::bottom()));
}

#[test]
fn loc_counts_code_lines() {
    assert_eq!(lines_of_code("# header\n\nskip;\n  # note\nskip\n"), 2);
}

#[test]
fn nested_predicate_parentheses() {
    let a = parse_program("@vars(x, y)\nif not ((x <= 1 or y < 2)) then skip else skip fi").unwrap();
    let b = parse_program("@vars(x, y)\nif x > 1 and y >= 2 then skip else skip fi").unwrap();
    assert_eq!(a, b);
    assert!(parse_program("@vars(x)\nif ((x + 1) * 2 <= 3) then skip else skip fi").is_ok());
    assert!(parse_program("@vars(x)\nif ((x <= 1)").is_err());
    assert!(parse_program("@vars(x)\nif ((x + 1").is_err());
}
