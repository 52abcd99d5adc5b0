//! Surface language: AST, parser and pretty-printer.
//!
//! ```text
//! @vars(x, c)
//! @init(x >= 0)
//! @invariant(x >= 0)
//! while x >= 1 do
//!   if prob(3/4) then x := x - 1 else x := x + 1 fi
//! od
//! ```

mod parser;

use std::fmt::Write as _;

use num::{One, Signed, Zero};

use crate::linear::{fmt_rat, LinConstraint, LinExpr, Plp, Polyhedron, Rat};

pub use parser::{parse_assertion, parse_expr, parse_program, ParseError, ParseErrorKind};

/// Closed interval with optional (infinite) ends.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
}

impl Interval {
    pub fn new(lo: Option<Rat>, hi: Option<Rat>) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: Rat) -> Self {
        Interval { lo: Some(v.clone()), hi: Some(v) }
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.lo.as_ref().is_none_or(|l| l <= v) && self.hi.as_ref().is_none_or(|h| v <= h)
    }

    pub fn is_well_formed(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) => l <= h,
            _ => true,
        }
    }

    /// Image under `v ↦ k·v`.
    pub fn scaled(&self, k: &Rat) -> Interval {
        let lo = self.lo.as_ref().map(|l| l * k);
        let hi = self.hi.as_ref().map(|h| h * k);
        if k.is_negative() {
            Interval { lo: hi, hi: lo }
        } else if k.is_zero() {
            Interval::point(Rat::zero())
        } else {
            Interval { lo, hi }
        }
    }

    fn fmt_end(v: &Option<Rat>, neg: bool) -> String {
        match v {
            Some(r) => fmt_rat(r),
            None if neg => "-inf".into(),
            None => "inf".into(),
        }
    }
}

/// A sampling distribution, known to the prover only through its mean and a
/// hull of its support.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DistSpec {
    Uniform { a: Rat, b: Rat },
    Bernoulli { p: Rat },
    Custom { mean: Rat, support: Interval },
}

impl DistSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DistSpec::Uniform { .. } => "uniform",
            DistSpec::Bernoulli { .. } => "bernoulli",
            DistSpec::Custom { .. } => "custom",
        }
    }

    pub fn mean(&self) -> Rat {
        match self {
            DistSpec::Uniform { a, b } => (a + b) / Rat::from_integer(2.into()),
            DistSpec::Bernoulli { p } => p.clone(),
            DistSpec::Custom { mean, .. } => mean.clone(),
        }
    }

    pub fn support(&self) -> Interval {
        match self {
            DistSpec::Uniform { a, b } => Interval::new(Some(a.clone()), Some(b.clone())),
            DistSpec::Bernoulli { .. } => Interval::new(Some(Rat::zero()), Some(Rat::one())),
            DistSpec::Custom { support, .. } => support.clone(),
        }
    }

    fn render(&self) -> String {
        match self {
            DistSpec::Uniform { a, b } => format!("uniform({}, {})", fmt_rat(a), fmt_rat(b)),
            DistSpec::Bernoulli { p } => format!("bernoulli({})", fmt_rat(p)),
            DistSpec::Custom { mean, support } => format!(
                "custom({}, {}, {})",
                fmt_rat(mean),
                Interval::fmt_end(&support.lo, true),
                Interval::fmt_end(&support.hi, false)
            ),
        }
    }
}

/// The random part of an assignment right-hand side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Random {
    Sample(DistSpec),
    Ndet(Interval),
}

/// `base + k·random`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rhs {
    pub base: LinExpr,
    pub random: Option<(Rat, Random)>,
}

impl Rhs {
    pub fn affine(base: LinExpr) -> Self {
        Rhs { base, random: None }
    }
}

/// Predicate in negation normal form: atoms may be strict.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    True,
    False,
    Atom(LinConstraint),
    And(Vec<Pred>),
    Or(Vec<Pred>),
}

impl Pred {
    pub fn and(parts: Vec<Pred>) -> Pred {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Pred::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Pred::And(flat)
        }
    }

    pub fn or(parts: Vec<Pred>) -> Pred {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Pred::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Pred::Or(flat)
        }
    }

    pub fn negate(&self) -> Pred {
        match self {
            Pred::True => Pred::False,
            Pred::False => Pred::True,
            Pred::Atom(c) => Pred::Atom(c.complement()),
            Pred::And(ps) => Pred::or(ps.iter().map(Pred::negate).collect()),
            Pred::Or(ps) => Pred::and(ps.iter().map(Pred::negate).collect()),
        }
    }

    /// Disjunctive normal form. `False` becomes the single unsatisfiable
    /// polyhedron so the result is never empty.
    pub fn to_plp(&self) -> Plp {
        let ds = self.dnf();
        if ds.is_empty() {
            Plp::single(Polyhedron::bottom())
        } else {
            Plp { disjuncts: ds }
        }
    }

    fn dnf(&self) -> Vec<Polyhedron> {
        match self {
            Pred::True => vec![Polyhedron::top()],
            Pred::False => vec![],
            Pred::Atom(c) => vec![Polyhedron::new(vec![c.clone()])],
            Pred::Or(ps) => ps.iter().flat_map(Pred::dnf).collect(),
            Pred::And(ps) => {
                let mut acc = vec![Polyhedron::top()];
                for p in ps {
                    let d = p.dnf();
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &d {
                            next.push(a.and(b));
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }

    /// The predicate as a single conjunction, if it is one.
    pub fn as_polyhedron(&self) -> Option<Polyhedron> {
        match self {
            Pred::True => Some(Polyhedron::top()),
            Pred::False => Some(Polyhedron::bottom()),
            Pred::Atom(c) => Some(Polyhedron::new(vec![c.clone()])),
            Pred::And(ps) => {
                let mut out = Polyhedron::top();
                for p in ps {
                    out = out.and(&p.as_polyhedron()?);
                }
                Some(out)
            }
            Pred::Or(_) => None,
        }
    }

    pub fn from_polyhedron(p: &Polyhedron) -> Pred {
        Pred::and(p.constraints.iter().cloned().map(Pred::Atom).collect()).or_true()
    }

    fn or_true(self) -> Pred {
        match self {
            Pred::And(v) if v.is_empty() => Pred::True,
            p => p,
        }
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Atom(c) => c.holds(x).unwrap_or(false),
            Pred::And(ps) => ps.iter().all(|p| p.holds(x)),
            Pred::Or(ps) => ps.iter().any(|p| p.holds(x)),
        }
    }

    fn vars_into(&self, out: &mut Vec<usize>) {
        match self {
            Pred::Atom(c) => out.extend(c.expr.vars()),
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.vars_into(out)),
            _ => {}
        }
    }

    pub fn render(&self, names: &dyn Fn(usize) -> String) -> String {
        match self {
            Pred::True => "true".into(),
            Pred::False => "false".into(),
            Pred::Atom(c) => c.display_with(names),
            Pred::And(ps) => ps
                .iter()
                .map(|p| match p {
                    Pred::Or(_) => format!("({})", p.render(names)),
                    _ => p.render(names),
                })
                .collect::<Vec<_>>()
                .join(" and "),
            Pred::Or(ps) => ps.iter().map(|p| p.render(names)).collect::<Vec<_>>().join(" or "),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IfGuard {
    Star,
    Prob(Rat),
    Pred(Pred),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign { var: usize, rhs: Rhs },
    Seq(Vec<Stmt>),
    If { guard: IfGuard, then_branch: Box<Stmt>, else_branch: Box<Stmt> },
    While { guard: Pred, body: Box<Stmt>, invariant: Option<Polyhedron> },
}

impl Stmt {
    pub fn seq(parts: Vec<Stmt>) -> Stmt {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Stmt::Seq(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Stmt::Seq(flat)
        }
    }

    /// Number of AST nodes (statements and guards).
    pub fn node_count(&self) -> usize {
        match self {
            Stmt::Skip | Stmt::Assign { .. } => 1,
            Stmt::Seq(ss) => 1 + ss.iter().map(Stmt::node_count).sum::<usize>(),
            Stmt::If { then_branch, else_branch, .. } => 1 + then_branch.node_count() + else_branch.node_count(),
            Stmt::While { body, .. } => 1 + body.node_count(),
        }
    }

    fn vars_into(&self, out: &mut Vec<usize>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign { var, rhs } => {
                out.push(*var);
                out.extend(rhs.base.vars());
            }
            Stmt::Seq(ss) => ss.iter().for_each(|s| s.vars_into(out)),
            Stmt::If { guard, then_branch, else_branch } => {
                if let IfGuard::Pred(p) = guard {
                    p.vars_into(out);
                }
                then_branch.vars_into(out);
                else_branch.vars_into(out);
            }
            Stmt::While { guard, body, invariant } => {
                guard.vars_into(out);
                if let Some(inv) = invariant {
                    out.extend(inv.vars());
                }
                body.vars_into(out);
            }
        }
    }
}

/// A parsed program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ast {
    /// Variable names, indexed by id.
    pub vars: Vec<String>,
    /// Initial valuations; `None` means unconstrained.
    pub init: Option<Polyhedron>,
    pub body: Stmt,
}

impl Ast {
    pub fn var_name(&self, v: usize) -> String {
        self.vars.get(v).cloned().unwrap_or_else(|| format!("v{v}"))
    }

    pub fn var_id(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn used_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(p) = &self.init {
            out.extend(p.vars());
        }
        self.body.vars_into(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Canonical source text for `ast`. Parsing the result yields `ast` again.
pub fn pretty_print(ast: &Ast) -> String {
    let names = |v: usize| ast.var_name(v);
    let mut out = String::new();
    if !ast.vars.is_empty() {
        let _ = writeln!(out, "@vars({})", ast.vars.join(", "));
    }
    if let Some(init) = &ast.init {
        let _ = writeln!(out, "@init({})", Pred::from_polyhedron(init).render(&names));
    }
    print_stmt(&ast.body, 0, &names, &mut out);
    out.push('\n');
    out
}

fn render_rhs(rhs: &Rhs, names: &dyn Fn(usize) -> String) -> String {
    let Some((k, random)) = &rhs.random else {
        return rhs.base.display_with(names).to_string();
    };
    let atom = match random {
        Random::Sample(d) => format!("sample({})", d.render()),
        Random::Ndet(i) => format!("ndet([{}, {}])", Interval::fmt_end(&i.lo, true), Interval::fmt_end(&i.hi, false)),
    };
    let scaled = |mag: &Rat| if mag.is_one() { atom.clone() } else { format!("{}*{atom}", fmt_rat(mag)) };
    if rhs.base.is_zero() {
        if k.is_negative() {
            format!("-{}", scaled(&k.abs()))
        } else {
            scaled(k)
        }
    } else {
        let sign = if k.is_negative() { "-" } else { "+" };
        format!("{} {sign} {}", rhs.base.display_with(names), scaled(&k.abs()))
    }
}

fn print_stmt(s: &Stmt, depth: usize, names: &dyn Fn(usize) -> String, out: &mut String) {
    let pad = "  ".repeat(depth);
    match s {
        Stmt::Skip => {
            let _ = write!(out, "{pad}skip");
        }
        Stmt::Assign { var, rhs } => {
            let _ = write!(out, "{pad}{} := {}", names(*var), render_rhs(rhs, names));
        }
        Stmt::Seq(ss) => {
            for (i, s) in ss.iter().enumerate() {
                if i > 0 {
                    out.push_str(";\n");
                }
                print_stmt(s, depth, names, out);
            }
        }
        Stmt::If { guard, then_branch, else_branch } => {
            let g = match guard {
                IfGuard::Star => "*".to_string(),
                IfGuard::Prob(p) => format!("prob({})", fmt_rat(p)),
                IfGuard::Pred(p) => p.render(names),
            };
            let _ = writeln!(out, "{pad}if {g} then");
            print_stmt(then_branch, depth + 1, names, out);
            let _ = writeln!(out, "\n{pad}else");
            print_stmt(else_branch, depth + 1, names, out);
            let _ = write!(out, "\n{pad}fi");
        }
        Stmt::While { guard, body, invariant } => {
            if let Some(inv) = invariant {
                let _ = writeln!(out, "{pad}@invariant({})", Pred::from_polyhedron(inv).render(names));
            }
            let _ = writeln!(out, "{pad}while {} do", guard.render(names));
            print_stmt(body, depth + 1, names, out);
            let _ = write!(out, "\n{pad}od");
        }
    }
}

/// Counts non-blank, non-comment lines.
pub fn lines_of_code(source: &str) -> usize {
    source
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .count()
}

#[cfg(test)]
mod tests;
