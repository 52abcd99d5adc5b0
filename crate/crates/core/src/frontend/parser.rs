use std::collections::HashMap;

use num::{One, Signed, Zero};
use thiserror::Error;

use super::{Ast, DistSpec, IfGuard, Interval, Pred, Random, Rhs, Stmt};
use crate::linear::{parse_rat, LinConstraint, LinExpr, Polyhedron, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("non-affine expression")]
    NonAffine,
    #[error("division by zero")]
    DivisionByZero,
    #[error("probability {0} outside [0,1]")]
    ProbOutOfRange(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("invalid distribution parameters: {0}")]
    BadDistribution(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("{0} must be a conjunction of linear constraints")]
    NotConjunctive(&'static str),
    #[error("random term not allowed here")]
    MisplacedRandom,
    #[error("malformed interval")]
    BadInterval,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Directive(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, kind: ParseErrorKind::Syntax(msg) };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Num(s), line: l0, col: c0 });
            continue;
        }
        if c == '@' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i + 1 - start;
            if s.is_empty() {
                return Err(err(l0, c0, "expected directive name after `@`".into()));
            }
            out.push(Token { tok: Tok::Directive(s), line: l0, col: c0 });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym2 = match two.as_str() {
            ":=" => Some(":="),
            "<=" => Some("<="),
            ">=" => Some(">="),
            "==" => Some("="),
            "!=" => Some("!="),
            _ => None,
        };
        if let Some(s) = sym2 {
            adv(2, &mut i, &mut col);
            out.push(Token { tok: Tok::Sym(s), line: l0, col: c0 });
            continue;
        }
        let sym1 = match c {
            ';' => ";",
            '(' => "(",
            ')' => ")",
            '[' => "[",
            ']' => "]",
            ',' => ",",
            '+' => "+",
            '-' | '−' => "-",
            '*' | '·' | '⋆' => "*",
            '/' => "/",
            '<' => "<",
            '>' => ">",
            '=' => "=",
            '≤' => "<=",
            '≥' => ">=",
            '≠' => "!=",
            '¬' | '!' => "not",
            '∧' => "and",
            '∨' => "or",
            _ => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        };
        adv(1, &mut i, &mut col);
        let tok = match sym1 {
            "not" | "and" | "or" => Tok::Ident(sym1.to_string()),
            s => Tok::Sym(s),
        };
        out.push(Token { tok, line: l0, col: c0 });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "if", "then", "else", "fi", "while", "do", "od", "skip", "and", "or", "not", "true", "false", "prob", "ndet",
    "sample", "inf",
];

/// Affine value possibly carrying one random term.
#[derive(Clone, Debug)]
struct Val {
    lin: LinExpr,
    random: Option<(Rat, Random)>,
}

impl Val {
    fn constant(&self) -> Option<Rat> {
        (self.lin.is_constant() && self.random.is_none()).then(|| self.lin.const_term().clone())
    }

    fn scale(mut self, k: &Rat) -> Val {
        self.lin = self.lin.scaled(k);
        self.random = self.random.and_then(|(c, r)| {
            let c = c * k;
            (!c.is_zero()).then_some((c, r))
        });
        self
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    index: HashMap<String, usize>,
    declared: Vec<bool>,
    assigned: Vec<bool>,
    first_use: Vec<(usize, usize)>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            pos: 0,
            vars: Vec::new(),
            index: HashMap::new(),
            declared: Vec::new(),
            assigned: Vec::new(),
            first_use: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn fail<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError { line, col, kind })
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let found = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            Tok::Ident(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::Directive(s) => format!("`@{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
        };
        self.fail(ParseErrorKind::Syntax(format!("{}, found {found}", msg.into())))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected `{kw}`"))
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected `{s}`"))
        }
    }

    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.vars.len();
        self.vars.push(name.to_string());
        self.index.insert(name.to_string(), v);
        self.declared.push(false);
        self.assigned.push(false);
        self.first_use.push(self.here());
        v
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.syntax("expected identifier"),
        }
    }

    // ---- programs -------------------------------------------------------

    fn program(&mut self) -> PResult<Ast> {
        let mut init: Option<Polyhedron> = None;
        loop {
            match self.peek().clone() {
                Tok::Directive(d) if d == "vars" => {
                    self.bump();
                    self.expect_sym("(")?;
                    loop {
                        let name = self.ident()?;
                        let v = self.var(&name);
                        self.declared[v] = true;
                        if self.is_sym(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect_sym(")")?;
                }
                Tok::Directive(d) if d == "init" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let start = self.pos;
                    let p = self.pred()?;
                    self.expect_sym(")")?;
                    let poly = match p.as_polyhedron() {
                        Some(poly) => poly,
                        None => {
                            self.pos = start;
                            return self.fail(ParseErrorKind::NotConjunctive("initial condition"));
                        }
                    };
                    for v in poly.vars() {
                        self.declared[v] = true;
                    }
                    init = Some(match init {
                        Some(prev) => prev.and(&poly),
                        None => poly,
                    });
                }
                _ => break,
            }
        }
        let body = self.stmt_seq()?;
        if !matches!(self.peek(), Tok::Eof) {
            return self.syntax("expected end of program");
        }
        for v in 0..self.vars.len() {
            if !self.declared[v] && !self.assigned[v] {
                let (line, col) = self.first_use[v];
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::UndeclaredVariable(self.vars[v].clone()),
                });
            }
        }
        Ok(Ast { vars: self.vars.clone(), init, body })
    }

    fn starts_stmt(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !matches!(
                s.as_str(),
                "then" | "else" | "fi" | "do" | "od" | "and" | "or" | "not" | "true" | "false" | "inf"
            ),
            Tok::Directive(d) => d == "invariant",
            _ => false,
        }
    }

    fn stmt_seq(&mut self) -> PResult<Stmt> {
        let mut parts = vec![self.stmt()?];
        loop {
            if self.is_sym(";") {
                self.bump();
                if !self.starts_stmt() {
                    break;
                }
            } else if !self.starts_stmt() {
                break;
            }
            parts.push(self.stmt()?);
        }
        Ok(Stmt::seq(parts))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        match self.peek().clone() {
            Tok::Directive(d) if d == "invariant" => {
                self.bump();
                self.expect_sym("(")?;
                let start = self.pos;
                let p = self.pred()?;
                self.expect_sym(")")?;
                let Some(poly) = p.as_polyhedron() else {
                    self.pos = start;
                    return self.fail(ParseErrorKind::NotConjunctive("invariant annotation"));
                };
                if !self.is_kw("while") {
                    return self.syntax("`@invariant` must precede a `while`");
                }
                match self.stmt()? {
                    Stmt::While { guard, body, invariant } => {
                        let invariant = Some(match invariant {
                            Some(prev) => poly.and(&prev),
                            None => poly,
                        });
                        Ok(Stmt::While { guard, body, invariant })
                    }
                    _ => unreachable!("checked for while"),
                }
            }
            Tok::Directive(d) => self.syntax(format!("directive `@{d}` not allowed here")),
            Tok::Ident(k) if k == "skip" => {
                self.bump();
                Ok(Stmt::Skip)
            }
            Tok::Ident(k) if k == "if" => {
                self.bump();
                let guard = self.if_guard()?;
                self.expect_kw("then")?;
                let then_branch = self.stmt_seq()?;
                self.expect_kw("else")?;
                let else_branch = self.stmt_seq()?;
                self.expect_kw("fi")?;
                Ok(Stmt::If { guard, then_branch: Box::new(then_branch), else_branch: Box::new(else_branch) })
            }
            Tok::Ident(k) if k == "while" => {
                self.bump();
                let guard = self.pred()?;
                self.expect_kw("do")?;
                let body = self.stmt_seq()?;
                self.expect_kw("od")?;
                Ok(Stmt::While { guard, body: Box::new(body), invariant: None })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                let v = self.var(&name);
                self.expect_sym(":=")?;
                let val = self.expr(true)?;
                self.assigned[v] = true;
                Ok(Stmt::Assign { var: v, rhs: Rhs { base: val.lin, random: val.random } })
            }
            _ => self.syntax("expected statement"),
        }
    }

    fn if_guard(&mut self) -> PResult<IfGuard> {
        if self.is_sym("*") {
            self.bump();
            return Ok(IfGuard::Star);
        }
        if self.is_kw("prob") {
            self.bump();
            self.expect_sym("(")?;
            let p = self.const_expr()?;
            if p.is_negative() || p > Rat::one() {
                return self.fail(ParseErrorKind::ProbOutOfRange(crate::linear::fmt_rat(&p)));
            }
            self.expect_sym(")")?;
            return Ok(IfGuard::Prob(p));
        }
        Ok(IfGuard::Pred(self.pred()?))
    }

    // ---- predicates -----------------------------------------------------

    fn pred(&mut self) -> PResult<Pred> {
        let mut parts = vec![self.conj()?];
        while self.is_kw("or") {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(Pred::or(parts))
    }

    fn conj(&mut self) -> PResult<Pred> {
        let mut parts = vec![self.literal()?];
        while self.is_kw("and") {
            self.bump();
            parts.push(self.literal()?);
        }
        Ok(Pred::and(parts))
    }

    fn literal(&mut self) -> PResult<Pred> {
        if self.is_kw("not") {
            self.bump();
            return Ok(self.literal()?.negate());
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(Pred::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(Pred::False);
        }
        if self.is_sym("(") && self.paren_is_pred() {
            self.bump();
            let p = self.pred()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        let lhs = self.plain_expr()?;
        let op = match self.peek() {
            Tok::Sym(s) if matches!(*s, "<=" | ">=" | "<" | ">" | "=" | "!=") => *s,
            _ => return self.syntax("expected comparison operator"),
        };
        self.bump();
        let rhs = self.plain_expr()?;
        Ok(match op {
            "<=" => Pred::Atom(LinConstraint::le(&lhs, &rhs)),
            ">=" => Pred::Atom(LinConstraint::ge(&lhs, &rhs)),
            "<" => Pred::Atom(LinConstraint::lt(&lhs, &rhs)),
            ">" => Pred::Atom(LinConstraint::gt(&lhs, &rhs)),
            "=" => Pred::and(vec![Pred::Atom(LinConstraint::le(&lhs, &rhs)), Pred::Atom(LinConstraint::ge(&lhs, &rhs))]),
            _ => Pred::or(vec![Pred::Atom(LinConstraint::lt(&lhs, &rhs)), Pred::Atom(LinConstraint::gt(&lhs, &rhs))]),
        })
    }

    /// Decides whether the parenthesis at the cursor opens a predicate (as
    /// opposed to an arithmetic sub-expression) by scanning to its match.
    fn paren_is_pred(&self) -> bool {
        self.group_is_pred(self.pos).0
    }

    /// Whether the group opened at `start` holds a predicate, and the index of
    /// its closing parenthesis. A nested predicate group makes the enclosing
    /// group a predicate too, since arithmetic cannot contain one.
    fn group_is_pred(&self, start: usize) -> (bool, usize) {
        let mut k = start + 1;
        loop {
            match &self.toks[k].tok {
                Tok::Sym("(") => {
                    let (inner, end) = self.group_is_pred(k);
                    if inner || matches!(self.toks[end].tok, Tok::Eof) {
                        return (inner, end);
                    }
                    k = end;
                }
                Tok::Sym(")") => return (false, k),
                Tok::Sym(s) if matches!(*s, "<=" | ">=" | "<" | ">" | "=" | "!=") => return (true, k),
                Tok::Ident(s) if matches!(s.as_str(), "and" | "or" | "not" | "true" | "false") => return (true, k),
                Tok::Eof => return (false, k),
                _ => {}
            }
            k += 1;
        }
    }

    // ---- expressions ----------------------------------------------------

    fn plain_expr(&mut self) -> PResult<LinExpr> {
        let v = self.expr(false)?;
        Ok(v.lin)
    }

    fn const_expr(&mut self) -> PResult<Rat> {
        let start = self.pos;
        let v = self.expr(false)?;
        match v.constant() {
            Some(c) => Ok(c),
            None => {
                self.pos = start;
                self.syntax("expected constant")
            }
        }
    }

    fn expr(&mut self, allow_random: bool) -> PResult<Val> {
        let mut acc = self.term(allow_random)?;
        loop {
            let sign = if self.is_sym("+") {
                Rat::one()
            } else if self.is_sym("-") {
                -Rat::one()
            } else {
                break;
            };
            self.bump();
            let t = self.term(allow_random)?.scale(&sign);
            acc = self.add(acc, t)?;
        }
        Ok(acc)
    }

    fn add(&self, a: Val, b: Val) -> PResult<Val> {
        let random = match (a.random, b.random) {
            (None, r) | (r, None) => r,
            (Some((k1, r1)), Some((k2, r2))) => {
                if r1 != r2 {
                    return self.fail(ParseErrorKind::Syntax("at most one random term per expression".into()));
                }
                let k = k1 + k2;
                (!k.is_zero()).then_some((k, r1))
            }
        };
        Ok(Val { lin: a.lin.plus(&b.lin), random })
    }

    fn term(&mut self, allow_random: bool) -> PResult<Val> {
        let mut acc = self.unary(allow_random)?;
        loop {
            if self.is_sym("*") {
                self.bump();
                let rhs = self.unary(allow_random)?;
                acc = match (acc.constant(), rhs.constant()) {
                    (Some(k), _) => rhs.scale(&k),
                    (_, Some(k)) => acc.scale(&k),
                    _ => return self.fail(ParseErrorKind::NonAffine),
                };
            } else if self.is_sym("/") {
                self.bump();
                let rhs = self.unary(allow_random)?;
                let Some(k) = rhs.constant() else {
                    return self.fail(ParseErrorKind::NonAffine);
                };
                if k.is_zero() {
                    return self.fail(ParseErrorKind::DivisionByZero);
                }
                acc = acc.scale(&(Rat::one() / k));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self, allow_random: bool) -> PResult<Val> {
        if self.is_sym("-") {
            self.bump();
            return Ok(self.unary(allow_random)?.scale(&-Rat::one()));
        }
        if self.is_sym("+") {
            self.bump();
            return self.unary(allow_random);
        }
        self.atom(allow_random)
    }

    fn atom(&mut self, allow_random: bool) -> PResult<Val> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                let r = parse_rat(&s).expect("lexer produces valid numerals");
                Ok(Val { lin: LinExpr::constant(r), random: None })
            }
            Tok::Sym("(") => {
                self.bump();
                let v = self.expr(allow_random)?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Ident(k) if k == "sample" || k == "ndet" => {
                if !allow_random {
                    return self.fail(ParseErrorKind::MisplacedRandom);
                }
                self.bump();
                let r = if k == "sample" { Random::Sample(self.dist()?) } else { Random::Ndet(self.interval()?) };
                Ok(Val { lin: LinExpr::zero(), random: Some((Rat::one(), r)) })
            }
            Tok::Ident(k) if !KEYWORDS.contains(&k.as_str()) => {
                self.bump();
                let v = self.var(&k);
                Ok(Val { lin: LinExpr::var(v), random: None })
            }
            _ => self.syntax("expected expression"),
        }
    }

    /// Interval endpoint: a constant, or `-inf` on the left / `inf` on the right.
    fn bound(&mut self, left: bool) -> PResult<Option<Rat>> {
        let inf_at = |k: usize, p: &Parser| matches!(p.peek_at(k), Tok::Ident(s) if s == "inf");
        let (neg, len) = if inf_at(0, self) {
            (false, 1)
        } else if self.is_sym("-") && inf_at(1, self) {
            (true, 2)
        } else if self.is_sym("+") && inf_at(1, self) {
            (false, 2)
        } else {
            return Ok(Some(self.const_expr()?));
        };
        if neg != left {
            return self.fail(ParseErrorKind::BadInterval);
        }
        for _ in 0..len {
            self.bump();
        }
        Ok(None)
    }

    fn interval(&mut self) -> PResult<Interval> {
        self.expect_sym("(")?;
        self.expect_sym("[")?;
        let lo = self.bound(true)?;
        self.expect_sym(",")?;
        let hi = self.bound(false)?;
        self.expect_sym("]")?;
        self.expect_sym(")")?;
        let i = Interval::new(lo, hi);
        if !i.is_well_formed() {
            return self.fail(ParseErrorKind::BadInterval);
        }
        Ok(i)
    }

    fn dist(&mut self) -> PResult<DistSpec> {
        self.expect_sym("(")?;
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return self.syntax("expected distribution name"),
        };
        self.expect_sym("(")?;
        let d = match name.as_str() {
            "uniform" => {
                let a = self.const_expr()?;
                self.expect_sym(",")?;
                let b = self.const_expr()?;
                if a > b {
                    return self.fail(ParseErrorKind::BadDistribution("uniform needs a <= b".into()));
                }
                DistSpec::Uniform { a, b }
            }
            "bernoulli" => {
                let p = self.const_expr()?;
                if p.is_negative() || p > Rat::one() {
                    return self.fail(ParseErrorKind::ProbOutOfRange(crate::linear::fmt_rat(&p)));
                }
                DistSpec::Bernoulli { p }
            }
            "custom" => {
                let mean = self.const_expr()?;
                self.expect_sym(",")?;
                let lo = self.bound(true)?;
                self.expect_sym(",")?;
                let hi = self.bound(false)?;
                let support = Interval::new(lo, hi);
                if !support.is_well_formed() || !support.contains(&mean) {
                    return self.fail(ParseErrorKind::BadDistribution("mean must lie in the support".into()));
                }
                DistSpec::Custom { mean, support }
            }
            other => return self.fail(ParseErrorKind::UnknownDistribution(other.to_string())),
        };
        self.expect_sym(")")?;
        self.expect_sym(")")?;
        Ok(d)
    }
}

/// Parses a complete program.
pub fn parse_program(source: &str) -> Result<Ast, ParseError> {
    let toks = lex(source)?;
    Parser::new(toks).program()
}

/// Parses a predicate over the given variable names (no new variables).
pub fn parse_assertion(text: &str, vars: &[String]) -> Result<Pred, ParseError> {
    let mut p = with_vars(text, vars)?;
    let pred = p.pred()?;
    finish(&p, vars)?;
    Ok(pred)
}

/// Parses an affine expression over the given variable names.
pub fn parse_expr(text: &str, vars: &[String]) -> Result<LinExpr, ParseError> {
    let mut p = with_vars(text, vars)?;
    let e = p.plain_expr()?;
    finish(&p, vars)?;
    Ok(e)
}

fn with_vars(text: &str, vars: &[String]) -> Result<Parser, ParseError> {
    let mut p = Parser::new(lex(text)?);
    for v in vars {
        p.var(v);
    }
    Ok(p)
}

fn finish(p: &Parser, vars: &[String]) -> Result<(), ParseError> {
    if !matches!(p.peek(), Tok::Eof) {
        return p.syntax("unexpected trailing input");
    }
    if p.vars.len() > vars.len() {
        let (line, col) = p.first_use[vars.len()];
        return Err(ParseError { line, col, kind: ParseErrorKind::UndeclaredVariable(p.vars[vars.len()].clone()) });
    }
    Ok(())
}
