//! Affine expressions, linear constraints, polyhedra and the Farkas entailment
//! encoder.
//!
//! Variables are plain `usize` ids. Whether an id names a program variable or an
//! LP unknown depends on the context the expression is used in.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearError {
    #[error("valuation does not cover variable {0}")]
    MissingVariable(usize),
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `d + Σ a_i x_i` with exact rational coefficients. Zero coefficients are
/// never stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<usize, Rat>,
    constant: Rat,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: usize) -> Self {
        Self::term(v, Rat::one())
    }

    pub fn term(v: usize, c: Rat) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Rat)>, constant: Rat) -> Self {
        let mut e = Self::constant(constant);
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn coeff(&self, v: usize) -> Rat {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn const_term(&self) -> &Rat {
        &self.constant
    }

    pub fn set_constant(&mut self, c: Rat) {
        self.constant = c;
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn add_term(&mut self, v: usize, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(v).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn add_scaled(&mut self, other: &LinExpr, k: &Rat) {
        if k.is_zero() {
            return;
        }
        for (v, c) in &other.coeffs {
            self.add_term(*v, c * k);
        }
        self.constant += &other.constant * k;
    }

    pub fn scaled(&self, k: &Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.add_scaled(other, &Rat::one());
        e
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.add_scaled(other, &-Rat::one());
        e
    }

    pub fn negated(&self) -> LinExpr {
        self.scaled(&-Rat::one())
    }

    /// Replaces variable `v` by `by`.
    pub fn substitute(&self, v: usize, by: &LinExpr) -> LinExpr {
        let c = self.coeff(v);
        if c.is_zero() {
            return self.clone();
        }
        let mut e = self.clone();
        e.coeffs.remove(&v);
        e.add_scaled(by, &c);
        e
    }

    /// Renames variables through `f`.
    pub fn map_vars(&self, mut f: impl FnMut(usize) -> usize) -> LinExpr {
        let mut e = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            e.add_term(f(*v), c.clone());
        }
        e
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat, LinearError> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let xv = x.get(*v).ok_or(LinearError::MissingVariable(*v))?;
            acc += c * xv;
        }
        Ok(acc)
    }

    /// Evaluation with a partial valuation: unknown variables are looked up
    /// through `f`.
    pub fn eval_with(&self, mut f: impl FnMut(usize) -> Option<Rat>) -> Result<Rat, LinearError> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * f(*v).ok_or(LinearError::MissingVariable(*v))?;
        }
        Ok(acc)
    }

    /// Positive rescaling so the first nonzero coefficient has magnitude one.
    /// Used to compare constraints up to positive multiples.
    pub fn normalized(&self) -> LinExpr {
        match self.coeffs.values().next() {
            Some(c) => self.scaled(&(Rat::one() / c.abs())),
            None => self.clone(),
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        DisplayExpr { e: self, names }
    }
}

struct DisplayExpr<'a> {
    e: &'a LinExpr,
    names: &'a dyn Fn(usize) -> String,
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.e.coeffs {
            let name = (self.names)(*v);
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{}*{name}", fmt_rat(&mag))?;
            }
            first = false;
        }
        let k = &self.e.constant;
        if first {
            write!(f, "{}", fmt_rat(k))?;
        } else if k.is_positive() {
            write!(f, " + {}", fmt_rat(k))?;
        } else if k.is_negative() {
            write!(f, " - {}", fmt_rat(&k.abs()))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |v: usize| format!("v{v}");
        let shown = self.display_with(&names).to_string();
        write!(f, "{shown}")
    }
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `n`, `n/d`, or a decimal literal such as `-0.75`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_digits}{frac}");
        let n: BigInt = digits.parse().ok()?;
        let d = num::pow(BigInt::from(10), frac.len());
        let r = Rat::new(n, d);
        return Some(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// `expr ≤ 0` or, when `strict`, `expr < 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinConstraint {
    pub expr: LinExpr,
    pub strict: bool,
}

impl LinConstraint {
    pub fn le_zero(expr: LinExpr) -> Self {
        LinConstraint { expr, strict: false }
    }

    pub fn lt_zero(expr: LinExpr) -> Self {
        LinConstraint { expr, strict: true }
    }

    /// `a ≤ b`
    pub fn le(a: &LinExpr, b: &LinExpr) -> Self {
        Self::le_zero(a.minus(b))
    }

    /// `a ≥ b`
    pub fn ge(a: &LinExpr, b: &LinExpr) -> Self {
        Self::le_zero(b.minus(a))
    }

    pub fn lt(a: &LinExpr, b: &LinExpr) -> Self {
        Self::lt_zero(a.minus(b))
    }

    pub fn gt(a: &LinExpr, b: &LinExpr) -> Self {
        Self::lt_zero(b.minus(a))
    }

    /// The unsatisfiable constraint `1 ≤ 0`.
    pub fn falsum() -> Self {
        Self::le_zero(LinExpr::constant(Rat::one()))
    }

    pub fn holds(&self, x: &[Rat]) -> Result<bool, LinearError> {
        let v = self.expr.eval(x)?;
        Ok(if self.strict { v.is_negative() } else { !v.is_positive() })
    }

    /// Exact complement: `¬(e ≤ 0)` is `-e < 0`, `¬(e < 0)` is `-e ≤ 0`.
    pub fn complement(&self) -> Self {
        LinConstraint { expr: self.expr.negated(), strict: !self.strict }
    }

    pub fn weakened(&self) -> Self {
        LinConstraint { expr: self.expr.clone(), strict: false }
    }

    /// Positive rescaling used for syntactic comparison.
    pub fn canonical(&self) -> Self {
        LinConstraint { expr: self.expr.normalized(), strict: self.strict }
    }

    /// Constant constraints decide themselves.
    pub fn trivial_value(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        let k = self.expr.const_term();
        Some(if self.strict { k.is_negative() } else { !k.is_positive() })
    }

    pub fn substitute(&self, v: usize, by: &LinExpr) -> Self {
        LinConstraint { expr: self.expr.substitute(v, by), strict: self.strict }
    }

    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> String {
        // Print as `lhs <= rhs` with variables left and the constant right.
        let mut lhs = self.expr.clone();
        lhs.set_constant(Rat::zero());
        let rhs = -self.expr.const_term().clone();
        if lhs.is_constant() {
            let op = if self.strict { "<" } else { "<=" };
            return format!("0 {op} {}", fmt_rat(&rhs));
        }
        // Prefer `>=` when every coefficient is negative.
        if lhs.terms().all(|(_, c)| c.is_negative()) {
            let op = if self.strict { ">" } else { ">=" };
            let l = lhs.negated();
            format!("{} {op} {}", l.display_with(names), fmt_rat(&-rhs))
        } else {
            let op = if self.strict { "<" } else { "<=" };
            format!("{} {op} {}", lhs.display_with(names), fmt_rat(&rhs))
        }
    }
}

impl fmt::Debug for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |v: usize| format!("v{v}");
        write!(f, "{}", self.display_with(&names))
    }
}

/// Conjunction of linear constraints. The empty conjunction is the whole space.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Polyhedron {
    pub constraints: Vec<LinConstraint>,
}

impl Polyhedron {
    pub fn top() -> Self {
        Polyhedron { constraints: Vec::new() }
    }

    pub fn bottom() -> Self {
        Polyhedron { constraints: vec![LinConstraint::falsum()] }
    }

    pub fn new(constraints: Vec<LinConstraint>) -> Self {
        Polyhedron { constraints }
    }

    pub fn is_top(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn push(&mut self, c: LinConstraint) {
        self.constraints.push(c);
    }

    pub fn and(&self, other: &Polyhedron) -> Polyhedron {
        let mut out = self.clone();
        for c in &other.constraints {
            if !out.constraints.contains(c) {
                out.constraints.push(c.clone());
            }
        }
        out
    }

    pub fn contains(&self, x: &[Rat]) -> Result<bool, LinearError> {
        for c in &self.constraints {
            if !c.holds(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Strict constraints replaced by their closures.
    pub fn weakened(&self) -> Polyhedron {
        let mut out = Polyhedron::top();
        for c in &self.constraints {
            let w = c.weakened();
            if !out.constraints.contains(&w) {
                out.constraints.push(w);
            }
        }
        out
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.strict)
    }

    /// Drops constant-true constraints; returns `None` when a constant-false
    /// constraint is present.
    pub fn simplified(&self) -> Option<Polyhedron> {
        let mut out = Polyhedron::top();
        for c in &self.constraints {
            match c.trivial_value() {
                Some(true) => {}
                Some(false) => return None,
                None => {
                    let k = c.canonical();
                    if !out.constraints.iter().any(|d| d.canonical() == k) {
                        out.constraints.push(c.clone());
                    }
                }
            }
        }
        Some(out)
    }

    pub fn substitute(&self, v: usize, by: &LinExpr) -> Polyhedron {
        Polyhedron { constraints: self.constraints.iter().map(|c| c.substitute(v, by)).collect() }
    }

    pub fn vars(&self) -> std::collections::BTreeSet<usize> {
        self.constraints.iter().flat_map(|c| c.expr.vars()).collect()
    }

    /// The constraints connected to `vars` through shared variables. For a
    /// satisfiable polyhedron, its projection onto `vars` is unchanged.
    pub fn component_of(&self, vars: &std::collections::BTreeSet<usize>) -> Polyhedron {
        let mut reach = vars.clone();
        let mut keep = vec![false; self.constraints.len()];
        let mut grew = true;
        while grew {
            grew = false;
            for (k, c) in self.constraints.iter().enumerate() {
                if !keep[k] && c.expr.vars().any(|v| reach.contains(&v)) {
                    keep[k] = true;
                    reach.extend(c.expr.vars());
                    grew = true;
                }
            }
        }
        Polyhedron::new(self.constraints.iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c.clone()).collect())
    }

    pub fn display_with(&self, names: &dyn Fn(usize) -> String) -> String {
        if self.constraints.is_empty() {
            return "true".to_string();
        }
        self.constraints
            .iter()
            .map(|c| c.display_with(names))
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

/// Finite disjunction of polyhedra (never empty).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Plp {
    pub disjuncts: Vec<Polyhedron>,
}

impl Plp {
    pub fn single(p: Polyhedron) -> Self {
        Plp { disjuncts: vec![p] }
    }

    pub fn top() -> Self {
        Self::single(Polyhedron::top())
    }

    pub fn contains(&self, x: &[Rat]) -> Result<bool, LinearError> {
        for d in &self.disjuncts {
            if d.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn weakened(&self) -> Plp {
        Plp { disjuncts: self.disjuncts.iter().map(Polyhedron::weakened).collect() }
    }
}

/// One disjunct per input constraint, each the strict-aware complement of that
/// constraint. `¬true` yields the unsatisfiable polyhedron.
pub fn negate_assertion(p: &Polyhedron) -> Plp {
    if p.constraints.is_empty() {
        return Plp::single(Polyhedron::bottom());
    }
    Plp {
        disjuncts: p
            .constraints
            .iter()
            .map(|c| Polyhedron::new(vec![c.complement()]))
            .collect(),
    }
}

/// Affine expression over program variables whose coefficients are themselves
/// affine expressions over LP unknowns.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct SymExpr {
    pub coeffs: BTreeMap<usize, LinExpr>,
    pub constant: LinExpr,
}

impl SymExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Lifts a concrete program expression.
    pub fn concrete(e: &LinExpr) -> Self {
        let mut s = SymExpr::zero();
        for (v, c) in e.terms() {
            s.coeffs.insert(v, LinExpr::constant(c.clone()));
        }
        s.constant = LinExpr::constant(e.const_term().clone());
        s
    }

    pub fn coeff(&self, v: usize) -> LinExpr {
        self.coeffs.get(&v).cloned().unwrap_or_default()
    }

    fn add_coeff(&mut self, v: usize, e: &LinExpr, k: &Rat) {
        let slot = self.coeffs.entry(v).or_default();
        slot.add_scaled(e, k);
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add_scaled(&mut self, other: &SymExpr, k: &Rat) {
        for (v, e) in &other.coeffs {
            self.add_coeff(*v, e, k);
        }
        self.constant.add_scaled(&other.constant, k);
    }

    pub fn scaled(&self, k: &Rat) -> SymExpr {
        let mut s = SymExpr::zero();
        s.add_scaled(self, k);
        s
    }

    pub fn minus(&self, other: &SymExpr) -> SymExpr {
        let mut s = self.clone();
        s.add_scaled(other, &-Rat::one());
        s
    }

    pub fn plus(&self, other: &SymExpr) -> SymExpr {
        let mut s = self.clone();
        s.add_scaled(other, &Rat::one());
        s
    }

    /// Adds an LP-unknown-valued constant.
    pub fn add_unknown_constant(&mut self, e: &LinExpr) {
        self.constant.add_scaled(e, &Rat::one());
    }

    /// Substitutes program variable `v` by the concrete expression `by`.
    pub fn substitute(&self, v: usize, by: &LinExpr) -> SymExpr {
        let Some(cv) = self.coeffs.get(&v).cloned() else {
            return self.clone();
        };
        let mut s = self.clone();
        s.coeffs.remove(&v);
        for (w, c) in by.terms() {
            s.add_coeff(w, &cv, c);
        }
        s.constant.add_scaled(&cv, by.const_term());
        s
    }

    /// Renames program variable `v` to `w` (which must not occur).
    pub fn rename(&self, v: usize, w: usize) -> SymExpr {
        let mut s = self.clone();
        if let Some(c) = s.coeffs.remove(&v) {
            s.coeffs.insert(w, c);
        }
        s
    }

    /// Plugs in values for the LP unknowns.
    pub fn instantiate(&self, values: &dyn Fn(usize) -> Rat) -> LinExpr {
        let ev = |e: &LinExpr| {
            let mut acc = e.const_term().clone();
            for (u, c) in e.terms() {
                acc += c * values(u);
            }
            acc
        };
        let mut out = LinExpr::constant(ev(&self.constant));
        for (v, e) in &self.coeffs {
            out.add_term(*v, ev(e));
        }
        out
    }
}

/// Issues globally unique LP unknown ids.
#[derive(Debug, Default)]
pub struct IdGen {
    next: AtomicUsize,
}

impl IdGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&self) -> usize {
        self.next.fetch_add(1, Ordering::Relaxed)
    }

    pub fn fresh_many(&self, n: usize) -> std::ops::Range<usize> {
        let start = self.next.fetch_add(n, Ordering::Relaxed);
        start..start + n
    }

    pub fn count(&self) -> usize {
        self.next.load(Ordering::Relaxed)
    }
}

/// Relation of an unknown-space constraint against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

/// One entailment block: `premise ⊨ target ≤ 0`, encoded over the unknowns
/// appearing in the target plus this block's own multipliers.
#[derive(Clone, Debug)]
pub struct FarkasBlock {
    pub provenance: String,
    pub multipliers: Vec<usize>,
    /// Each entry is `expr rel 0`.
    pub constraints: Vec<(LinExpr, Rel)>,
}

#[derive(Clone, Debug, Default)]
pub struct FarkasSystem {
    pub blocks: Vec<FarkasBlock>,
}

impl FarkasSystem {
    pub fn multiplier_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flat_map(|b| b.multipliers.iter().copied())
    }

    pub fn num_constraints(&self) -> usize {
        self.blocks.iter().map(|b| b.constraints.len()).sum()
    }
}

/// Encodes `∀x ∈ premise. target(x) ≤ 0` via Farkas multipliers.
///
/// The premise must be satisfiable; the caller checks this (an unsatisfiable
/// premise makes the entailment vacuous and no block may be emitted). Strict
/// premise constraints are used in weakened form.
pub fn entails(premise: &Polyhedron, target: &SymExpr, ids: &IdGen, provenance: impl Into<String>) -> FarkasBlock {
    // Premise row i: a_i·x + k_i ≤ 0, i.e. a_i·x ≤ -k_i.
    let rows: Vec<&LinExpr> = premise.constraints.iter().map(|c| &c.expr).collect();
    let lambdas: Vec<usize> = ids.fresh_many(rows.len()).collect();

    let mut vars: std::collections::BTreeSet<usize> = target.coeffs.keys().copied().collect();
    for r in &rows {
        vars.extend(r.vars());
    }

    let mut constraints = Vec::with_capacity(vars.len() + 1);
    for v in vars {
        // Σ λ_i a_iv - C_v = 0
        let mut e = target.coeff(v).negated();
        for (lam, r) in lambdas.iter().zip(&rows) {
            e.add_term(*lam, r.coeff(v));
        }
        constraints.push((e, Rel::Eq));
    }
    // Σ λ_i (-k_i) + D ≤ 0
    let mut e = target.constant.clone();
    for (lam, r) in lambdas.iter().zip(&rows) {
        e.add_term(*lam, -r.const_term().clone());
    }
    constraints.push((e, Rel::Le));

    FarkasBlock { provenance: provenance.into(), multipliers: lambdas, constraints }
}
