use std::collections::BTreeSet;
use std::fmt;

use num::{Signed, Zero};

use super::{conditions, drift, enabled, LexRsmMap, Lem, LpBuilder};
use crate::frontend::Random;
use crate::linear::{entails, fmt_rat, IdGen, LinExpr, Polyhedron, Rat, SymExpr};
use crate::lp::{feasible, maximize_over, polyhedron_feasible, LpOutcome};
use crate::pcfg::{gen_transitions, GenTransition, LocId, Pcfg, Transition};
use crate::sim::SampleSet;

/// A rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRat {
    Finite(Rat),
    PosInf,
}

impl ExtRat {
    pub fn le(&self, r: &Rat) -> bool {
        matches!(self, ExtRat::Finite(v) if v <= r)
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Finite(v) => f.write_str(&fmt_rat(v)),
            ExtRat::PosInf => f.write_str("+inf"),
        }
    }
}

fn member_value(t: &Transition, eta: &Lem, x: &[Rat]) -> ExtRat {
    let e = eta.at(t.target);
    let Some(u) = &t.update else {
        return ExtRat::Finite(eta.eval(t.target, x));
    };
    let mut y = x.to_vec();
    y[u.var] = u.rhs.base.eval(x).expect("valuation covers program variables");
    let Some((k, r)) = &u.rhs.random else {
        return ExtRat::Finite(e.eval(&y).expect("valuation covers program variables"));
    };
    match r {
        Random::Sample(d) => {
            y[u.var] += k * d.mean();
            ExtRat::Finite(e.eval(&y).expect("valuation covers program variables"))
        }
        Random::Ndet(i) => {
            let base = e.eval(&y).expect("valuation covers program variables");
            let c = e.coeff(u.var) * k;
            let end = if c.is_positive() {
                i.hi.as_ref()
            } else if c.is_negative() {
                i.lo.as_ref()
            } else {
                return ExtRat::Finite(base);
            };
            match end {
                Some(a) => ExtRat::Finite(base + c * a),
                None => ExtRat::PosInf,
            }
        }
    }
}

/// One-step pre-expectation of `eta` across `gt` from `x`: the mean over
/// probabilistic branches and distributions, the supremum over nondeterministic
/// choices.
pub fn preexp(g: &Pcfg, eta: &Lem, gt: GenTransition, x: &[Rat]) -> ExtRat {
    match gt {
        GenTransition::Single(t) => member_value(&g.transitions[t], eta, x),
        GenTransition::Bundle(l) => {
            let mut acc = Rat::zero();
            for &t in g.outgoing(l) {
                let t = &g.transitions[t];
                match member_value(t, eta, x) {
                    ExtRat::Finite(v) => acc += v * t.prob.as_ref().expect("probabilistic branch"),
                    ExtRat::PosInf => return ExtRat::PosInf,
                }
            }
            ExtRat::Finite(acc)
        }
    }
}

/// The clause of the ranking definition that fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clause {
    /// The configuration is outside the invariant or the transition is disabled.
    Precondition,
    MissingLevel,
    NonNegative { component: usize },
    Unaffected { component: usize },
    Ranked { component: usize },
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Precondition => f.write_str("precondition violated"),
            Clause::MissingLevel => f.write_str("no level assigned"),
            Clause::NonNegative { component } => write!(f, "non-negativity violated by component {component}"),
            Clause::Unaffected { component } => write!(f, "unaffected clause violated by component {component}"),
            Clause::Ranked { component } => write!(f, "rank clause violated by component {component}"),
        }
    }
}

/// Checks `gt` at `x` against components `comps` (1-based in reports). With a
/// level `j`, components before `j` must be unaffected and component `j` must
/// drop by `eps`; without one, every component must be unaffected.
pub(crate) fn check_at(
    g: &Pcfg,
    comps: &[Lem],
    level: Option<usize>,
    eps: &Rat,
    gt: GenTransition,
    x: &[Rat],
) -> Result<(), Clause> {
    let src = gt.source(g);
    let upto = level.unwrap_or(comps.len());
    for (j, eta) in comps.iter().enumerate().take(upto) {
        let now = eta.eval(src, x);
        let is_rank = level == Some(j + 1);
        let bound = if is_rank { now - eps } else { now };
        if !preexp(g, eta, gt, x).le(&bound) {
            return Err(if is_rank { Clause::Ranked { component: j + 1 } } else { Clause::Unaffected { component: j + 1 } });
        }
    }
    Ok(())
}

pub(crate) fn nonneg_at(comps: &[Lem], loc: LocId, x: &[Rat]) -> Result<(), Clause> {
    for (j, eta) in comps.iter().enumerate() {
        if eta.eval(loc, x).is_negative() {
            return Err(Clause::NonNegative { component: j + 1 });
        }
    }
    Ok(())
}

/// The ranking conditions for `gt` at one configuration, with exact guard and
/// invariant semantics.
pub fn is_ranked_pointwise(g: &Pcfg, map: &LexRsmMap, gt: GenTransition, x: &[Rat]) -> Result<(), Clause> {
    let src = gt.source(g);
    if x.len() != g.num_vars() || !map.invariants.get(src).contains(x).unwrap_or(false) || !enabled(g, gt, x) {
        return Err(Clause::Precondition);
    }
    nonneg_at(&map.components, src, x)?;
    let level = *map.levels.get(&gt).ok_or(Clause::MissingLevel)?;
    check_at(g, &map.components, Some(level), &map.epsilon, gt, x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointwiseFailure {
    pub loc: LocId,
    pub x: Vec<Rat>,
    pub transition: Option<GenTransition>,
    pub clause: Clause,
}

impl fmt::Display for PointwiseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x: Vec<String> = self.x.iter().map(fmt_rat).collect();
        match self.transition {
            Some(gt) => write!(f, "{} at l{} x=({}): {}", gt.key(), self.loc, x.join(", "), self.clause),
            None => write!(f, "l{} x=({}): {}", self.loc, x.join(", "), self.clause),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointwiseReport {
    pub configurations: usize,
    pub transitions_checked: usize,
    pub failures: Vec<PointwiseFailure>,
}

impl PointwiseReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs the pointwise conditions on sampled configurations. Non-negativity is
/// checked at every sample; each generalized transition enabled there is then
/// checked at its level.
pub fn pointwise_check(g: &Pcfg, map: &LexRsmMap, samples: &SampleSet) -> PointwiseReport {
    pointwise_generic(g, &map.components, &map.epsilon, samples, &|_| true, &|gt| {
        Some(map.levels.get(&gt).copied().ok_or(Clause::MissingLevel))
    })
}

/// `nonneg` selects locations whose samples are checked for non-negativity;
/// `level` returns `None` to skip a transition, and level 0 asks for every
/// component to be unaffected.
pub(crate) fn pointwise_generic(
    g: &Pcfg,
    comps: &[Lem],
    eps: &Rat,
    samples: &SampleSet,
    nonneg: &dyn Fn(LocId) -> bool,
    level: &dyn Fn(GenTransition) -> Option<Result<usize, Clause>>,
) -> PointwiseReport {
    let mut by_source: Vec<Vec<GenTransition>> = vec![Vec::new(); g.locations.len()];
    for gt in gen_transitions(g) {
        by_source[gt.source(g)].push(gt);
    }
    let mut report = PointwiseReport::default();
    for (loc, x) in &samples.configs {
        let (loc, x) = (*loc, x);
        report.configurations += 1;
        if nonneg(loc) {
            if let Err(clause) = nonneg_at(comps, loc, x) {
                report.failures.push(PointwiseFailure { loc, x: x.clone(), transition: None, clause });
            }
        }
        for &gt in &by_source[loc] {
            let Some(lv) = level(gt) else { continue };
            if !enabled(g, gt, x) {
                continue;
            }
            report.transitions_checked += 1;
            let r = lv.and_then(|lv| check_at(g, comps, (lv > 0).then_some(lv), eps, gt, x));
            if let Err(clause) = r {
                report.failures.push(PointwiseFailure { loc, x: x.clone(), transition: Some(gt), clause });
            }
        }
    }
    report
}

/// A requirement the symbolic checker could not certify, with a maximizing
/// point of the violated inequality when the violation is bounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicFailure {
    pub loc: LocId,
    pub transition: Option<GenTransition>,
    pub clause: Clause,
    pub witness: Option<Vec<Rat>>,
    /// Largest value of the left-hand side of `… ≤ 0` over the region.
    pub excess: Option<Rat>,
}

impl fmt::Display for SymbolicFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.transition {
            Some(gt) => write!(f, "{} at l{}: {}", gt.key(), self.loc, self.clause)?,
            None => write!(f, "l{}: {}", self.loc, self.clause)?,
        }
        if let Some(w) = &self.witness {
            let w: Vec<String> = w.iter().map(fmt_rat).collect();
            write!(f, " (worst point ({})", w.join(", "))?;
            if let Some(e) = &self.excess {
                write!(f, ", excess {}", fmt_rat(e))?;
            }
            f.write_str(")")?;
        } else {
            f.write_str(" (unbounded)")?;
        }
        Ok(())
    }
}

/// Whether the Farkas multiplier system for `premise ⊨ target ≤ 0` is solvable.
pub(crate) fn farkas_holds(premise: &Polyhedron, target: &LinExpr) -> bool {
    let ids = IdGen::new();
    // Multiplier ids must not clash with anything; the block has no other unknowns.
    let mut lp = LpBuilder::new();
    lp.push(entails(premise, &SymExpr::concrete(target), &ids, ""));
    feasible(&lp.problem)
}

pub(crate) fn locate(
    g: &Pcfg,
    premise: &Polyhedron,
    target: &LinExpr,
    loc: LocId,
    transition: Option<GenTransition>,
    clause: Clause,
) -> SymbolicFailure {
    let (witness, excess) = match maximize_over(premise, target) {
        LpOutcome::Optimal { values, objective } => (
            Some((0..g.num_vars()).map(|v| values.get(&v).cloned().unwrap_or_else(Rat::zero)).collect()),
            Some(objective),
        ),
        _ => (None, None),
    };
    SymbolicFailure { loc, transition, clause, witness, excess }
}

/// Checks a requirement list where each entry is `(transition, level)`, level
/// 0 meaning unaffected by every component. Returns every failure.
pub(crate) fn symbolic_generic(
    g: &Pcfg,
    inv: &crate::invariants::InvariantMap,
    comps: &[Lem],
    eps: &Rat,
    nonneg: &BTreeSet<LocId>,
    reqs: &[(GenTransition, usize)],
) -> Vec<SymbolicFailure> {
    let mut out = Vec::new();
    for &l in nonneg {
        let p = inv.get(l).weakened();
        if !polyhedron_feasible(&p) {
            continue;
        }
        for (j, eta) in comps.iter().enumerate() {
            let target = eta.at(l).negated();
            if !farkas_holds(&p, &target) {
                out.push(locate(g, &p, &target, l, None, Clause::NonNegative { component: j + 1 }));
            }
        }
    }
    let gts: Vec<GenTransition> = reqs.iter().map(|r| r.0).collect();
    for (c, &(gt, level)) in conditions(g, inv, &gts).iter().zip(reqs) {
        let Some(p) = &c.premise else { continue };
        let upto = if level == 0 { comps.len() } else { level };
        for (j, eta) in comps.iter().enumerate().take(upto) {
            let mut target = drift(g, gt, eta);
            let is_rank = level == j + 1;
            if is_rank {
                target.add_constant(eps);
            }
            if !farkas_holds(p, &target) {
                let clause = if is_rank { Clause::Ranked { component: j + 1 } } else { Clause::Unaffected { component: j + 1 } };
                out.push(locate(g, p, &target, c.source, Some(gt), clause));
            }
        }
    }
    out
}

/// Re-checks every condition of a candidate map through Farkas blocks with its
/// concrete coefficients substituted. Non-negativity is required at every
/// location, the terminal one included.
pub fn verify_symbolically(g: &Pcfg, map: &LexRsmMap) -> Result<(), Vec<SymbolicFailure>> {
    let nloc = g.locations.len();
    if map.components.is_empty() || map.components.iter().any(|c| c.exprs.len() != nloc) || map.invariants.len() != nloc {
        return Err(vec![SymbolicFailure {
            loc: 0,
            transition: None,
            clause: Clause::Precondition,
            witness: None,
            excess: None,
        }]);
    }
    let mut failures = Vec::new();
    let mut reqs = Vec::new();
    for gt in gen_transitions(g) {
        match map.levels.get(&gt) {
            Some(&lv) if lv >= 1 && lv <= map.dimension() => reqs.push((gt, lv)),
            _ => failures.push(SymbolicFailure {
                loc: gt.source(g),
                transition: Some(gt),
                clause: Clause::MissingLevel,
                witness: None,
                excess: None,
            }),
        }
    }
    let nonneg: BTreeSet<LocId> = (0..nloc).collect();
    failures.extend(symbolic_generic(g, &map.invariants, &map.components, &map.epsilon, &nonneg, &reqs));
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures)
    }
}
