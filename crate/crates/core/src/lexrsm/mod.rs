//! Linear lexicographic ranking supermartingale maps: synthesis and checking.
//!
//! A generalized transition is encoded once as a premise polyhedron (source
//! invariant, weakened guard, and the range of a nondeterministic choice bound
//! to an auxiliary variable) plus the symbolic one-step pre-expectation of a map.
//! Synthesis and the symbolic checker both go through Farkas blocks; the
//! pointwise checker evaluates the definition directly.

mod cert;
pub(crate) mod check;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::frontend::Random;
use crate::invariants::InvariantMap;
use crate::linear::{entails, FarkasBlock, FarkasSystem, IdGen, LinConstraint, LinExpr, Polyhedron, Rat, SymExpr};
use crate::lp::{polyhedron_feasible, solve, LpOutcome, LpProblem, Sense};
use crate::pcfg::{gen_transitions, GenTransition, LocId, LocKind, Pcfg, Transition};

pub use cert::{program_digest, Certificate, CertificateError, InvariantEntry, CERTIFICATE_FORMAT};
pub use check::{
    is_ranked_pointwise, pointwise_check, preexp, verify_symbolically, Clause, ExtRat, PointwiseFailure,
    PointwiseReport, SymbolicFailure,
};

/// One affine expression per location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lem {
    pub exprs: Vec<LinExpr>,
}

impl Lem {
    pub fn zero(nloc: usize) -> Self {
        Lem { exprs: vec![LinExpr::zero(); nloc] }
    }

    pub fn at(&self, loc: LocId) -> &LinExpr {
        &self.exprs[loc]
    }

    pub fn eval(&self, loc: LocId, x: &[Rat]) -> Rat {
        self.exprs[loc].eval(x).expect("valuation covers program variables")
    }
}

/// A candidate or synthesized LinLexRSM map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexRsmMap {
    pub components: Vec<Lem>,
    /// 1-based level of every generalized transition.
    pub levels: BTreeMap<GenTransition, usize>,
    pub epsilon: Rat,
    pub invariants: InvariantMap,
}

impl LexRsmMap {
    pub fn dimension(&self) -> usize {
        self.components.len()
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    pub epsilon: Rat,
    /// Defaults to the number of generalized transitions.
    pub max_dimension: Option<usize>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig { epsilon: Rat::one(), max_dimension: None }
    }
}

/// Counters and phase timings for one synthesis run.
#[derive(Clone, Debug, Default)]
pub struct SynthesisStats {
    pub iterations: usize,
    pub lp_rows: usize,
    pub lp_cols: usize,
    pub constraint_gen: Duration,
    pub lp: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthesisError {
    /// No linear map ranks any of the remaining transitions.
    #[error("no LinLexRSM: {} generalized transition(s) cannot be ranked after {ranked_components} component(s)", remaining.len())]
    NoLinLexRsm { ranked_components: usize, remaining: Vec<GenTransition> },
    #[error("dimension cap {0} reached")]
    DimensionCap(usize),
    #[error("internal: rescaled component fails its own re-check at {0}")]
    Recheck(String),
}

/// Region and auxiliary variable for one generalized transition.
#[derive(Clone, Debug)]
pub(crate) struct Condition {
    pub gt: GenTransition,
    pub source: LocId,
    /// `None` when the region is empty, making every requirement vacuous.
    pub premise: Option<Polyhedron>,
}

/// Id of the variable standing for a nondeterministic choice.
pub(crate) fn aux_var(g: &Pcfg) -> usize {
    g.num_vars()
}

/// `I(ℓ) ∧ guard`, with guard and invariant in closed form, plus the range of
/// the nondeterministic choice if the source assigns one.
pub(crate) fn region(g: &Pcfg, inv: &InvariantMap, gt: GenTransition) -> Polyhedron {
    let src = gt.source(g);
    let mut p = inv.get(src).weakened();
    for t in gt.members(g) {
        p = p.and(&t.guard().weakened());
        if let Some(Random::Ndet(i)) = t.update.as_ref().and_then(|u| u.rhs.random.as_ref()).map(|r| &r.1) {
            let a = LinExpr::var(aux_var(g));
            if let Some(l) = &i.lo {
                p.push(LinConstraint::ge(&a, &LinExpr::constant(l.clone())));
            }
            if let Some(h) = &i.hi {
                p.push(LinConstraint::le(&a, &LinExpr::constant(h.clone())));
            }
        }
    }
    p
}

pub(crate) fn conditions(g: &Pcfg, inv: &InvariantMap, gts: &[GenTransition]) -> Vec<Condition> {
    gts.iter()
        .map(|&gt| {
            let p = region(g, inv, gt);
            Condition { gt, source: gt.source(g), premise: polyhedron_feasible(&p).then_some(p) }
        })
        .collect()
}

fn apply_update(t: &Transition, e: SymExpr, aux: usize) -> SymExpr {
    let Some(u) = &t.update else { return e };
    let mut by = u.rhs.base.clone();
    match &u.rhs.random {
        None => {}
        Some((k, Random::Sample(d))) => by.add_constant(&(k * d.mean())),
        Some((k, Random::Ndet(_))) => by.add_term(aux, k.clone()),
    }
    e.substitute(u.var, &by)
}

/// Symbolic pre-expectation of `eta` across `gt`. A nondeterministic choice
/// appears as the auxiliary variable, to be universally quantified.
pub(crate) fn preexp_sym(g: &Pcfg, gt: GenTransition, eta: &dyn Fn(LocId) -> SymExpr) -> SymExpr {
    let aux = aux_var(g);
    match gt {
        GenTransition::Single(t) => {
            let t = &g.transitions[t];
            apply_update(t, eta(t.target), aux)
        }
        GenTransition::Bundle(l) => {
            let mut acc = SymExpr::zero();
            for &t in g.outgoing(l) {
                let t = &g.transitions[t];
                let p = t.prob.clone().expect("probabilistic branch carries a probability");
                acc.add_scaled(&apply_update(t, eta(t.target), aux), &p);
            }
            acc
        }
    }
}

/// `preexp(η) − η(source)` for a concrete map.
pub(crate) fn drift(g: &Pcfg, gt: GenTransition, eta: &Lem) -> LinExpr {
    let s = preexp_sym(g, gt, &|l| SymExpr::concrete(eta.at(l)));
    s.instantiate(&|_| Rat::zero()).minus(eta.at(gt.source(g)))
}

/// Per-location affine template with fresh unknown coefficients.
pub(crate) struct Template {
    /// `(coefficient ids per variable, constant id)` per location.
    slots: Vec<(Vec<(usize, usize)>, usize)>,
}

impl Template {
    pub fn new(ids: &IdGen, g: &Pcfg, vars: &[usize]) -> Self {
        let slots = (0..g.locations.len())
            .map(|_| (vars.iter().map(|&v| (v, ids.fresh())).collect(), ids.fresh()))
            .collect();
        Template { slots }
    }

    pub fn at(&self, loc: LocId) -> SymExpr {
        let (coeffs, k) = &self.slots[loc];
        let mut s = SymExpr::zero();
        for &(v, u) in coeffs {
            s.coeffs.insert(v, LinExpr::var(u));
        }
        s.constant = LinExpr::var(*k);
        s
    }

    pub fn instantiate(&self, values: &BTreeMap<usize, Rat>) -> Lem {
        let get = |u: usize| values.get(&u).cloned().unwrap_or_else(Rat::zero);
        Lem { exprs: (0..self.slots.len()).map(|l| self.at(l).instantiate(&get)).collect() }
    }
}

/// Farkas block for `premise ⊨ target ≤ 0`, with premise constraints that
/// share no variable with the target left out.
pub(crate) fn entails_pruned(premise: &Polyhedron, target: &SymExpr, ids: &IdGen, provenance: String) -> FarkasBlock {
    let vars: BTreeSet<usize> = target.coeffs.keys().copied().collect();
    entails(&premise.component_of(&vars), target, ids, provenance)
}

/// Variables occurring in loop guards; the first synthesis pass restricts
/// templates to them.
pub(crate) fn guard_vars(g: &Pcfg) -> Vec<usize> {
    let mut vs = BTreeSet::new();
    for l in &g.loops {
        for p in &l.guard.to_plp().disjuncts {
            vs.extend(p.vars());
        }
    }
    vs.into_iter().collect()
}

/// Collects Farkas blocks into one LP.
pub(crate) struct LpBuilder {
    pub problem: LpProblem,
    pub system: FarkasSystem,
}

impl LpBuilder {
    pub fn new() -> Self {
        LpBuilder { problem: LpProblem::new(), system: FarkasSystem::default() }
    }

    pub fn push(&mut self, block: FarkasBlock) {
        for &m in &block.multipliers {
            self.problem.nonneg(m);
        }
        for (e, rel) in &block.constraints {
            self.problem.add(e.clone(), *rel, Rat::zero());
        }
        self.system.blocks.push(block);
    }
}

/// What one run of the iterative ranking procedure has to achieve.
pub(crate) struct RankingTask<'a> {
    /// Locations on which every component must be non-negative.
    pub nonneg: &'a BTreeSet<LocId>,
    /// Transitions to rank.
    pub to_rank: Vec<GenTransition>,
    /// Transitions every component must leave unaffected.
    pub unaffected: Vec<GenTransition>,
    pub epsilon: Rat,
    pub max_dimension: usize,
    /// Template variables.
    pub vars: Vec<usize>,
}

pub(crate) struct Ranking {
    pub components: Vec<Lem>,
    pub levels: BTreeMap<GenTransition, usize>,
}

/// The iterative LP loop shared by whole-program and per-loop synthesis.
pub(crate) fn rank_iteratively(
    g: &Pcfg,
    inv: &InvariantMap,
    task: &RankingTask<'_>,
    stats: &mut SynthesisStats,
) -> Result<Ranking, SynthesisError> {
    let mut all: Vec<GenTransition> = task.to_rank.clone();
    all.extend(task.unaffected.iter().copied());
    let conds: BTreeMap<GenTransition, Condition> =
        conditions(g, inv, &all).into_iter().map(|c| (c.gt, c)).collect();
    let nonneg_regions: Vec<(LocId, Polyhedron)> = task
        .nonneg
        .iter()
        .filter_map(|&l| {
            let p = inv.get(l).weakened();
            polyhedron_feasible(&p).then_some((l, p))
        })
        .collect();

    let mut remaining: Vec<GenTransition> = task.to_rank.clone();
    let mut components = Vec::new();
    let mut levels = BTreeMap::new();
    while !remaining.is_empty() {
        if components.len() >= task.max_dimension {
            return Err(SynthesisError::DimensionCap(task.max_dimension));
        }
        stats.iterations += 1;
        let t0 = Instant::now();
        let ids = IdGen::new();
        let tpl = Template::new(&ids, g, &task.vars);
        let mut lp = LpBuilder::new();
        for (l, p) in &nonneg_regions {
            // -η(ℓ) ≤ 0
            lp.push(entails_pruned(p, &tpl.at(*l).scaled(&-Rat::one()), &ids, format!("nonneg l{l}")));
        }
        let mut eps_ids = BTreeMap::new();
        for gt in remaining.iter().chain(&task.unaffected) {
            let c = &conds[gt];
            let ranked = eps_ids.len() < remaining.len();
            let mut target = preexp_sym(g, *gt, &|l| tpl.at(l)).minus(&tpl.at(c.source));
            if ranked {
                let e = ids.fresh();
                lp.problem.declare(e, Some(Rat::zero()), Some(Rat::one()));
                lp.problem.set_name(e, format!("eps_{}", gt.key()));
                target.add_unknown_constant(&LinExpr::var(e));
                eps_ids.insert(*gt, e);
            }
            if let Some(p) = &c.premise {
                lp.push(entails_pruned(p, &target, &ids, gt.key()));
            }
        }
        let objective = LinExpr::from_terms(eps_ids.values().map(|&e| (e, Rat::one())), Rat::zero());
        lp.problem.set_objective(Sense::Maximize, objective);
        stats.lp_rows += lp.problem.num_constraints();
        stats.lp_cols += lp.problem.num_vars();
        let t1 = Instant::now();
        stats.constraint_gen += t1 - t0;
        let values = match all_ranked(&lp.problem, &eps_ids) {
            Some(values) => Some(values),
            None => match solve(&lp.problem) {
                LpOutcome::Optimal { values, .. } => Some(values),
                _ => None,
            },
        };
        stats.lp += t1.elapsed();

        let Some(values) = values else {
            return Err(SynthesisError::NoLinLexRsm { ranked_components: components.len(), remaining });
        };
        if !eps_ids.values().any(|e| values[e].is_positive()) {
            return Err(SynthesisError::NoLinLexRsm { ranked_components: components.len(), remaining });
        }
        let eps: BTreeMap<GenTransition, Rat> = eps_ids.iter().map(|(gt, &e)| (*gt, values[&e].clone())).collect();
        let min = eps.values().filter(|e| e.is_positive()).min().cloned().expect("positive objective");
        let mut eta = tpl.instantiate(&values);
        let scale = &task.epsilon / &min;
        for e in &mut eta.exprs {
            *e = e.scaled(&scale);
        }
        let level = components.len() + 1;
        let mut next = Vec::new();
        for gt in remaining {
            if eps[&gt].is_positive() {
                if let Some(p) = &conds[&gt].premise {
                    if !decreases_by(p, &drift(g, gt, &eta), &task.epsilon) {
                        return Err(SynthesisError::Recheck(gt.key()));
                    }
                }
                levels.insert(gt, level);
            } else {
                next.push(gt);
            }
        }
        remaining = next;
        components.push(eta);
    }
    Ok(Ranking { components, levels })
}

/// Every ε at its upper bound attains the maximum outright, so a feasibility
/// check settles the common case without optimizing.
fn all_ranked(p: &LpProblem, eps_ids: &BTreeMap<GenTransition, usize>) -> Option<BTreeMap<usize, Rat>> {
    let mut q = p.clone();
    for &e in eps_ids.values() {
        q.declare(e, Some(Rat::one()), Some(Rat::one()));
    }
    q.set_objective(Sense::Maximize, LinExpr::zero());
    match solve(&q) {
        LpOutcome::Optimal { values, .. } => Some(values),
        _ => None,
    }
}

/// `max over p of drift ≤ -ε`, by direct LP maximization.
pub(crate) fn decreases_by(p: &Polyhedron, drift: &LinExpr, eps: &Rat) -> bool {
    match crate::lp::maximize_over(p, drift) {
        LpOutcome::Optimal { objective, .. } => objective <= -eps.clone(),
        LpOutcome::Infeasible => true,
        LpOutcome::Unbounded => false,
    }
}

/// Iterative LP synthesis of a LinLexRSM map for the whole program.
pub fn synthesize(g: &Pcfg, inv: &InvariantMap, cfg: &SynthesisConfig) -> Result<LexRsmMap, SynthesisError> {
    synthesize_with_stats(g, inv, cfg).0
}

/// Runs the synthesis with templates over the loop-guard variables first and
/// falls back to full templates when that pass fails. The full pass alone
/// decides failure.
pub fn synthesize_with_stats(
    g: &Pcfg,
    inv: &InvariantMap,
    cfg: &SynthesisConfig,
) -> (Result<LexRsmMap, SynthesisError>, SynthesisStats) {
    let mut stats = SynthesisStats::default();
    let gts = gen_transitions(g);
    let nonneg: BTreeSet<LocId> = (0..g.locations.len()).collect();
    let all: Vec<usize> = (0..g.num_vars()).collect();
    let reduced = guard_vars(g);
    let mut passes = vec![all];
    if reduced.len() < g.num_vars() {
        passes.insert(0, reduced);
    }
    let mut result = None;
    for vars in passes {
        let task = RankingTask {
            nonneg: &nonneg,
            max_dimension: cfg.max_dimension.unwrap_or(gts.len().max(1)),
            to_rank: gts.clone(),
            unaffected: Vec::new(),
            epsilon: cfg.epsilon.clone(),
            vars,
        };
        let r = rank_iteratively(g, inv, &task, &mut stats);
        let done = r.is_ok();
        result = Some(r);
        if done {
            break;
        }
    }
    let r = result.expect("at least one pass").map(|r| LexRsmMap {
        components: if r.components.is_empty() { vec![Lem::zero(g.locations.len())] } else { r.components },
        levels: r.levels,
        epsilon: cfg.epsilon.clone(),
        invariants: inv.clone(),
    });
    (r, stats)
}

/// Whether `gt` may fire at `x`: the source's guards are evaluated exactly.
pub fn enabled(g: &Pcfg, gt: GenTransition, x: &[Rat]) -> bool {
    match gt {
        GenTransition::Bundle(_) => true,
        GenTransition::Single(t) => {
            let t = &g.transitions[t];
            g.locations[t.source].kind != LocKind::Det || t.guard().contains(x).unwrap_or(false)
        }
    }
}
