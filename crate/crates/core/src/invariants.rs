//! Invariant maps: default generation by forward propagation, loop
//! annotations, `.inv` sidecar overrides, and empirical/inductive checks.
//!
//! The abstract domain is a box together with a finite set of relational
//! facts (copied guards, initial constraints, annotations, and equalities from
//! assignments). Facts survive an assignment when it can be inverted; otherwise
//! those mentioning the assigned variable are dropped.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::frontend::{parse_assertion, Random};
use crate::linear::{LinConstraint, LinExpr, Polyhedron, Rat};
use crate::lp::{maximize_over, polyhedron_feasible, LpOutcome};
use crate::pcfg::{LocId, Pcfg, Update};
use crate::sim::{run_observed, SchedulerPolicy};

/// Head updates before widening kicks in.
pub const WIDENING_DELAY: usize = 3;

const NARROWING_ROUNDS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Default,
    Annotation,
    Sidecar,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Default => "default",
            Provenance::Annotation => "annotation",
            Provenance::Sidecar => "sidecar",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "default" => Some(Provenance::Default),
            "annotation" => Some(Provenance::Annotation),
            "sidecar" => Some(Provenance::Sidecar),
            _ => None,
        }
    }
}

/// One polyhedron per location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantMap {
    pub map: Vec<Polyhedron>,
    pub provenance: Vec<Provenance>,
}

impl InvariantMap {
    pub fn uniform(n: usize, p: Polyhedron, prov: Provenance) -> Self {
        InvariantMap { map: vec![p; n], provenance: vec![prov; n] }
    }

    pub fn get(&self, loc: LocId) -> &Polyhedron {
        &self.map[loc]
    }

    pub fn set(&mut self, loc: LocId, p: Polyhedron, prov: Provenance) {
        self.map[loc] = p;
        self.provenance[loc] = prov;
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Every provenance that occurs, in a fixed order.
    pub fn provenance_summary(&self) -> Vec<Provenance> {
        [Provenance::Default, Provenance::Annotation, Provenance::Sidecar]
            .into_iter()
            .filter(|p| self.provenance.contains(p))
            .collect()
    }
}

type Bound = Option<Rat>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Abs {
    lo: Vec<Bound>,
    hi: Vec<Bound>,
    /// Canonical, non-strict, at least two variables.
    facts: Vec<LinConstraint>,
}

fn canon(c: &LinConstraint) -> LinConstraint {
    LinConstraint::le_zero(c.expr.normalized())
}

impl Abs {
    fn top(n: usize) -> Abs {
        Abs { lo: vec![None; n], hi: vec![None; n], facts: Vec::new() }
    }

    /// Range of `e` over the box.
    fn range(&self, e: &LinExpr) -> (Bound, Bound) {
        let mut lo = Some(e.const_term().clone());
        let mut hi = lo.clone();
        for (v, c) in e.terms() {
            let (a, b) = if c.is_positive() { (&self.lo[v], &self.hi[v]) } else { (&self.hi[v], &self.lo[v]) };
            lo = lo.and_then(|l| a.as_ref().map(|a| l + c * a));
            hi = hi.and_then(|h| b.as_ref().map(|b| h + c * b));
        }
        (lo, hi)
    }

    fn tighten_lo(&mut self, v: usize, b: Rat) {
        if self.lo[v].as_ref().is_none_or(|l| &b > l) {
            self.lo[v] = Some(b);
        }
    }

    fn tighten_hi(&mut self, v: usize, b: Rat) {
        if self.hi[v].as_ref().is_none_or(|h| &b < h) {
            self.hi[v] = Some(b);
        }
    }

    /// Adds a constraint: single-variable ones go to the box.
    fn add(&mut self, c: &LinConstraint) {
        let c = c.weakened();
        match c.expr.num_terms() {
            0 => {
                if c.expr.const_term().is_positive() {
                    // Contradiction: empty the box.
                    if self.lo.is_empty() {
                        self.facts.push(LinConstraint::falsum());
                    } else {
                        self.lo[0] = Some(Rat::one());
                        self.hi[0] = Some(Rat::zero());
                    }
                }
            }
            1 => {
                let (v, a) = c.expr.terms().next().map(|(v, a)| (v, a.clone())).unwrap();
                let b = -c.expr.const_term() / &a;
                if a.is_positive() {
                    self.tighten_hi(v, b);
                } else {
                    self.tighten_lo(v, b);
                }
            }
            _ => {
                let k = canon(&c);
                if !self.facts.contains(&k) {
                    self.facts.push(k);
                }
            }
        }
    }

    /// Propagates facts into the box (two rounds).
    fn tighten(&mut self) {
        for _ in 0..2 {
            for f in self.facts.clone() {
                for (w, a) in f.expr.terms() {
                    let mut rest = f.expr.clone();
                    rest.add_term(w, -a.clone());
                    // a·x_w + rest ≤ 0, so a·x_w ≤ -min(rest).
                    let (rest_lo, _) = self.range(&rest);
                    if let Some(m) = rest_lo {
                        let b = -m / a;
                        if a.is_positive() {
                            self.tighten_hi(w, b);
                        } else {
                            self.tighten_lo(w, b);
                        }
                    }
                }
            }
        }
    }

    fn is_empty(&self) -> bool {
        for (l, h) in self.lo.iter().zip(&self.hi) {
            if let (Some(l), Some(h)) = (l, h) {
                if l > h {
                    return true;
                }
            }
        }
        for f in &self.facts {
            if let (Some(m), _) = self.range(&f.expr) {
                if m.is_positive() {
                    return true;
                }
            }
        }
        !self.facts.is_empty() && !polyhedron_feasible(&self.to_polyhedron())
    }

    fn holds_on(&self, c: &LinConstraint) -> bool {
        if self.facts.contains(c) {
            return true;
        }
        matches!(self.range(&c.expr).1, Some(m) if !m.is_positive())
    }

    fn join(&self, other: &Abs) -> Abs {
        let n = self.lo.len();
        let pick = |a: &Bound, b: &Bound, lower: bool| match (a, b) {
            (Some(a), Some(b)) => Some(if (a < b) == lower { a.clone() } else { b.clone() }),
            _ => None,
        };
        let lo = (0..n).map(|v| pick(&self.lo[v], &other.lo[v], true)).collect();
        let hi = (0..n).map(|v| pick(&self.hi[v], &other.hi[v], false)).collect();
        let mut facts: Vec<LinConstraint> = self.facts.iter().filter(|f| other.holds_on(f)).cloned().collect();
        for f in &other.facts {
            if !facts.contains(f) && self.holds_on(f) {
                facts.push(f.clone());
            }
        }
        Abs { lo, hi, facts }
    }

    /// Bounds that moved go to infinity; facts shrink to those of `self`
    /// still valid on `next`.
    fn widen(&self, next: &Abs) -> Abs {
        let n = self.lo.len();
        let lo = (0..n)
            .map(|v| match (&self.lo[v], &next.lo[v]) {
                (Some(a), Some(b)) if b >= a => Some(a.clone()),
                _ => None,
            })
            .collect();
        let hi = (0..n)
            .map(|v| match (&self.hi[v], &next.hi[v]) {
                (Some(a), Some(b)) if b <= a => Some(a.clone()),
                _ => None,
            })
            .collect();
        let facts = self.facts.iter().filter(|f| next.holds_on(f)).cloned().collect();
        Abs { lo, hi, facts }
    }

    fn to_polyhedron(&self) -> Polyhedron {
        let mut p = Polyhedron::top();
        for v in 0..self.lo.len() {
            let x = LinExpr::var(v);
            match (&self.lo[v], &self.hi[v]) {
                (Some(l), Some(h)) if l == h => {
                    p.push(LinConstraint::le(&x, &LinExpr::constant(h.clone())));
                    p.push(LinConstraint::ge(&x, &LinExpr::constant(l.clone())));
                }
                (l, h) => {
                    if let Some(l) = l {
                        p.push(LinConstraint::ge(&x, &LinExpr::constant(l.clone())));
                    }
                    if let Some(h) = h {
                        p.push(LinConstraint::le(&x, &LinExpr::constant(h.clone())));
                    }
                }
            }
        }
        for f in &self.facts {
            p.push(f.clone());
        }
        p
    }

    fn meet_all(mut self, p: &Polyhedron) -> Option<Abs> {
        for c in &p.constraints {
            self.add(c);
        }
        self.tighten();
        (!self.is_empty()).then_some(self)
    }

    fn assign(&self, u: &Update) -> Abs {
        let j = u.var;
        let mut out = self.clone();
        let (mut lo, mut hi) = self.range(&u.rhs.base);
        let mut random_range = None;
        if let Some((k, r)) = &u.rhs.random {
            let i = match r {
                Random::Sample(d) => d.support(),
                Random::Ndet(i) => i.clone(),
            };
            let i = i.scaled(k);
            lo = lo.and_then(|l| i.lo.as_ref().map(|a| l + a));
            hi = hi.and_then(|h| i.hi.as_ref().map(|b| h + b));
            random_range = Some(i);
        }
        let a = u.rhs.base.coeff(j);
        if u.rhs.random.is_none() && !a.is_zero() {
            // x_old = (x_new - rest) / a
            let mut rest = u.rhs.base.clone();
            rest.add_term(j, -a.clone());
            let inv = LinExpr::var(j).minus(&rest).scaled(&(Rat::one() / &a));
            out.facts = out.facts.iter().map(|f| canon(&f.substitute(j, &inv))).collect();
        } else {
            out.facts.retain(|f| f.expr.coeff(j).is_zero());
        }
        out.lo[j] = lo;
        out.hi[j] = hi;
        if a.is_zero() && u.rhs.base.num_terms() > 0 {
            // x_j - base lies in the random part's range (or is zero).
            let diff = LinExpr::var(j).minus(&u.rhs.base);
            let (dlo, dhi) = match &random_range {
                None => (Some(Rat::zero()), Some(Rat::zero())),
                Some(i) => (i.lo.clone(), i.hi.clone()),
            };
            if let Some(h) = dhi {
                out.add(&LinConstraint::le(&diff, &LinExpr::constant(h)));
            }
            if let Some(l) = dlo {
                out.add(&LinConstraint::ge(&diff, &LinExpr::constant(l)));
            }
        }
        out.tighten();
        out
    }
}

fn post(g: &Pcfg, s: &Abs, t: usize) -> Option<Abs> {
    let t = &g.transitions[t];
    let guarded = s.clone().meet_all(&t.guard().weakened())?;
    Some(match &t.update {
        Some(u) => guarded.assign(u),
        None => guarded,
    })
}

fn propagate(g: &Pcfg, annotations: &BTreeMap<LocId, Polyhedron>) -> Vec<Option<Abs>> {
    let n = g.num_vars();
    let nloc = g.locations.len();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); nloc];
    for t in &g.transitions {
        incoming[t.target].push(t.id);
    }
    let heads: Vec<bool> = (0..nloc).map(|l| g.loop_at_head(l).is_some()).collect();
    let init = Abs::top(n).meet_all(&g.init);
    let recompute = |state: &[Option<Abs>], l: LocId| -> Option<Abs> {
        let mut acc: Option<Abs> = if l == g.init_loc { init.clone() } else { None };
        for &t in &incoming[l] {
            let src = g.transitions[t].source;
            let Some(s) = &state[src] else { continue };
            if let Some(p) = post(g, s, t) {
                acc = Some(match acc {
                    Some(a) => a.join(&p),
                    None => p,
                });
            }
        }
        match (acc, annotations.get(&l)) {
            (Some(a), Some(ann)) => a.meet_all(ann),
            (acc, _) => acc,
        }
    };
    let mut state: Vec<Option<Abs>> = vec![None; nloc];
    let mut updates = vec![0usize; nloc];
    // Every change at a head after the delay drops a fact or a bound, so the
    // ascending phase terminates; the cap only guards against bugs.
    let mut stable = false;
    for _round in 0..10_000 {
        let mut changed = false;
        for l in 0..nloc {
            let mut acc = recompute(&state, l);
            if heads[l] && updates[l] >= WIDENING_DELAY {
                if let (Some(old), Some(new)) = (&state[l], &acc) {
                    acc = Some(old.widen(new));
                }
            }
            if acc != state[l] {
                state[l] = acc;
                updates[l] += 1;
                changed = true;
            }
        }
        if !changed {
            stable = true;
            break;
        }
    }
    assert!(stable, "invariant propagation did not stabilize");
    // Descending rounds recover bounds lost to widening. Only a state that is
    // itself stable is a fixpoint, hence inductive; otherwise keep the
    // widened one.
    let mut narrowed = state.clone();
    for _round in 0..NARROWING_ROUNDS {
        let mut changed = false;
        for l in 0..nloc {
            let acc = recompute(&narrowed, l);
            if acc != narrowed[l] {
                narrowed[l] = acc;
                changed = true;
            }
        }
        if !changed {
            return narrowed;
        }
    }
    state
}

fn to_map(g: &Pcfg, states: &[Option<Abs>], prov: Provenance) -> InvariantMap {
    let map = states
        .iter()
        .map(|s| match s {
            Some(a) => a.to_polyhedron(),
            None => Polyhedron::bottom(),
        })
        .collect();
    InvariantMap { map, provenance: vec![prov; g.locations.len()] }
}

/// Forward propagation from the initial condition over boxes plus facts.
/// Unreachable locations get the empty polyhedron.
pub fn default_invariants(g: &Pcfg) -> InvariantMap {
    to_map(g, &propagate(g, &BTreeMap::new()), Provenance::Default)
}

/// Default propagation with every loop annotation assumed at its head. Each
/// location's result is intersected with the default invariant, so
/// annotations only ever strengthen the map.
pub fn load_annotations(g: &Pcfg) -> InvariantMap {
    let annotations: BTreeMap<LocId, Polyhedron> =
        g.loops.iter().filter_map(|l| l.annotation.clone().map(|a| (l.head, a))).collect();
    let default = propagate(g, &BTreeMap::new());
    if annotations.is_empty() {
        return to_map(g, &default, Provenance::Default);
    }
    let annotated = propagate(g, &annotations);
    let states: Vec<Option<Abs>> = default
        .iter()
        .zip(&annotated)
        .map(|(d, a)| match (d, a) {
            (Some(d), Some(a)) => d.clone().meet_all(&a.to_polyhedron()),
            _ => None,
        })
        .collect();
    let mut out = to_map(g, &states, Provenance::Default);
    for (l, (d, s)) in default.iter().zip(&states).enumerate() {
        if d != s {
            out.provenance[l] = Provenance::Annotation;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SidecarError {
    pub line: usize,
    pub message: String,
}

/// Parses `loc <id>: <assertion>` lines; `#` starts a comment.
pub fn parse_sidecar(text: &str, g: &Pcfg) -> Result<Vec<(LocId, Polyhedron)>, SidecarError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| SidecarError { line, message };
        let rest = body.strip_prefix("loc").ok_or_else(|| err("expected `loc <id>: <assertion>`".into()))?;
        let (id, assertion) = rest.split_once(':').ok_or_else(|| err("missing `:`".into()))?;
        let id = id.trim();
        let id = id.strip_prefix('l').unwrap_or(id);
        let loc: LocId = id.parse().map_err(|_| err(format!("bad location id `{id}`")))?;
        if loc >= g.locations.len() {
            return Err(err(format!("no location {loc}")));
        }
        let pred = parse_assertion(assertion, &g.vars).map_err(|e| err(e.to_string()))?;
        let poly = pred.as_polyhedron().ok_or_else(|| err("assertion must be a conjunction".into()))?;
        out.push((loc, poly));
    }
    Ok(out)
}

/// Replaces the listed locations' invariants.
pub fn apply_sidecar(inv: &mut InvariantMap, entries: &[(LocId, Polyhedron)]) {
    for (l, p) in entries {
        inv.set(*l, p.clone(), Provenance::Sidecar);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub trial: u64,
    pub step: u64,
    pub loc: LocId,
    pub x: Vec<Rat>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.x.iter().map(crate::linear::fmt_rat).collect();
        write!(f, "trial {} step {}: l{} at ({})", self.trial, self.step, self.loc, xs.join(", "))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmpiricalReport {
    pub trials: u64,
    pub visited: u64,
    /// First violation of each failing trial.
    pub violations: Vec<Violation>,
}

/// Simulates from `x_init` and reports visited configurations outside their
/// location's invariant. Each trial stops at its first violation.
pub fn check_invariants_empirically(
    g: &Pcfg,
    inv: &InvariantMap,
    x_init: &[Rat],
    trials: u64,
    steps: u64,
    seed: u64,
) -> EmpiricalReport {
    let mut report = EmpiricalReport { trials, ..Default::default() };
    for trial in 0..trials {
        let mut found = None;
        let mut visited = 0u64;
        let _ = run_observed(g, x_init, &SchedulerPolicy::Uniform, steps, seed, trial, &mut |step, loc, x| {
            visited += 1;
            if inv.get(loc).contains(x).unwrap_or(false) {
                true
            } else {
                found = Some(Violation { trial, step, loc, x: x.to_vec() });
                false
            }
        });
        report.visited += visited;
        report.violations.extend(found);
    }
    report
}

/// A transition along which the map fails to be inductive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductiveFailure {
    /// `None` for the initial condition.
    pub transition: Option<usize>,
    pub constraint: LinConstraint,
}

/// Checks by LP that the initial set lies in `I(init)` and that every
/// transition maps `I(src) ∧ guard` into `I(tgt)`. Random update parts range
/// over their support or interval.
pub fn check_inductive(g: &Pcfg, inv: &InvariantMap) -> Vec<InductiveFailure> {
    let mut out = Vec::new();
    let entails = |premise: &Polyhedron, e: &LinExpr| match maximize_over(premise, e) {
        LpOutcome::Optimal { objective, .. } => !objective.is_positive(),
        LpOutcome::Infeasible => true,
        LpOutcome::Unbounded => false,
    };
    for c in &inv.get(g.init_loc).constraints {
        if !entails(&g.init.weakened(), &c.expr) {
            out.push(InductiveFailure { transition: None, constraint: c.clone() });
        }
    }
    let fresh = g.num_vars();
    for t in &g.transitions {
        let mut premise = inv.get(t.source).and(&t.guard().weakened());
        let subst = t.update.as_ref().map(|u| {
            let mut e = u.rhs.base.clone();
            if let Some((k, r)) = &u.rhs.random {
                let i = match r {
                    Random::Sample(d) => d.support(),
                    Random::Ndet(i) => i.clone(),
                };
                let a = LinExpr::var(fresh);
                if let Some(l) = &i.lo {
                    premise.push(LinConstraint::ge(&a, &LinExpr::constant(l.clone())));
                }
                if let Some(h) = &i.hi {
                    premise.push(LinConstraint::le(&a, &LinExpr::constant(h.clone())));
                }
                e = e.plus(&a.scaled(k));
            }
            (u.var, e)
        });
        for c in &inv.get(t.target).constraints {
            let e = match &subst {
                Some((v, by)) => c.expr.substitute(*v, by),
                None => c.expr.clone(),
            };
            if !entails(&premise, &e) {
                out.push(InductiveFailure { transition: Some(t.id), constraint: c.clone() });
            }
        }
    }
    out
}

/// `I ⊆ J` at every location, decided by LP.
pub fn included(a: &InvariantMap, b: &InvariantMap) -> bool {
    a.map.iter().zip(&b.map).all(|(p, q)| {
        q.constraints.iter().all(|c| match maximize_over(p, &c.expr) {
            LpOutcome::Optimal { objective, .. } => !objective.is_positive(),
            LpOutcome::Infeasible => true,
            LpOutcome::Unbounded => false,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::linear::rat;

    fn graph(src: &str) -> Pcfg {
        Pcfg::from_ast(&parse_program(src).unwrap())
    }

    const BIASED_WALK: &str = "@init(x = 10)\nwhile x >= 1 do if prob(3/4) then x := x - 1 else x := x + 1 fi od";

    #[test]
    fn biased_walk_body_has_guard() {
        let g = graph(BIASED_WALK);
        let inv = default_invariants(&g);
        assert!(!inv.get(1).contains(&[rat(0)]).unwrap());
        assert!(inv.get(1).contains(&[rat(1)]).unwrap());
        assert!(check_inductive(&g, &inv).is_empty());
    }

    #[test]
    fn initial_copy() {
        let g = graph("@init(x = 10)\nx := x + 1");
        let inv = default_invariants(&g);
        assert!(inv.get(0).contains(&[rat(10)]).unwrap());
        assert!(!inv.get(0).contains(&[rat(9)]).unwrap());
        assert!(inv.get(1).contains(&[rat(11)]).unwrap());
        assert!(!inv.get(1).contains(&[rat(10)]).unwrap());
    }

    #[test]
    fn relational_fact_survives_loop() {
        let g = graph("@vars(x, z)\n@init(x >= 0)\nz := x; while z >= 0 do z := z - 1; x := x - 1 od");
        let inv = default_invariants(&g);
        let head = g.loops[0].head;
        assert!(!inv.get(head).contains(&[rat(3), rat(2)]).unwrap());
        assert!(inv.get(head).contains(&[rat(-1), rat(-1)]).unwrap());
        assert!(check_inductive(&g, &inv).is_empty());
    }

    #[test]
    fn annotations_strengthen() {
        let src = "@vars(x)\n@invariant(x >= -1)\nwhile x >= 0 do x := x + sample(uniform(-3, 1)) od";
        let g = graph(src);
        let d = default_invariants(&g);
        let a = load_annotations(&g);
        assert!(included(&a, &d));
        assert_eq!(a.provenance[g.loops[0].head], Provenance::Annotation);
        assert_eq!(load_annotations(&graph(BIASED_WALK)), default_invariants(&graph(BIASED_WALK)));
    }

    #[test]
    fn sidecar_override() {
        let g = graph(BIASED_WALK);
        let entries = parse_sidecar("# note\nloc 0: x >= 0\n\nloc l2: x >= 0 and x <= 100\n", &g).unwrap();
        let mut inv = default_invariants(&g);
        apply_sidecar(&mut inv, &entries);
        assert_eq!(inv.get(0), &Polyhedron::new(vec![LinConstraint::ge(&LinExpr::var(0), &LinExpr::zero())]));
        assert_eq!(inv.provenance[2], Provenance::Sidecar);
        assert!(parse_sidecar("loc 99: x >= 0", &g).is_err());
        assert!(parse_sidecar("loc 0 x >= 0", &g).is_err());
        assert!(parse_sidecar("loc 0: y >= 0", &g).is_err());
        assert!(parse_sidecar("loc 0: x >= 0 or x <= -1", &g).is_err());
    }

    #[test]
    fn wrong_annotation_caught_at_step_zero() {
        let g = graph("@init(x = 10)\n@invariant(x >= 11)\nwhile x >= 1 do if prob(3/4) then x := x - 1 else x := x + 1 fi od");
        let inv = load_annotations(&g);
        let r = check_invariants_empirically(&g, &inv, &[rat(10)], 5, 100, 1);
        assert_eq!(r.violations.len(), 5);
        assert_eq!(r.violations[0].step, 0);
    }

    #[test]
    fn default_invariants_hold_empirically() {
        let g = graph(BIASED_WALK);
        let inv = default_invariants(&g);
        let r = check_invariants_empirically(&g, &inv, &[rat(10)], 50, 1000, 3);
        assert!(r.violations.is_empty());
    }
}
