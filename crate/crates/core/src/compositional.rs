//! Loop-by-loop proofs with non-negative compositional supermartingales.
//!
//! A loop is analyzed on its own sub-graph (head, body, exit). Locations of
//! nested loops form `loops`; the rest form the `slice`. Transitions leaving
//! slice locations must be ranked, those leaving nested-loop locations must
//! leave every component unaffected, and every component must be
//! non-negative on the whole sub-graph. Loops are certified innermost first,
//! so each nested loop is known to terminate when its parent is analyzed.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};
use thiserror::Error;

use crate::invariants::InvariantMap;
use crate::lexrsm::check::{pointwise_generic, symbolic_generic};
use crate::lexrsm::{
    rank_iteratively, Clause, Lem, PointwiseReport, RankingTask, SymbolicFailure, SynthesisError, SynthesisStats,
};
use crate::frontend::Random;
use crate::linear::{LinExpr, Rat};
use crate::lp::{maximize_over, LpOutcome};
use crate::pcfg::{gen_transitions, GenTransition, LocId, LoopInfo, Pcfg};
use crate::sim::SampleSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopDecomposition {
    pub loop_id: usize,
    pub head: LocId,
    pub exit: LocId,
    /// Every location of the loop's sub-graph.
    pub locations: BTreeSet<LocId>,
    /// Locations inside nested loops: their heads and bodies.
    pub loops: BTreeSet<LocId>,
    pub slice: BTreeSet<LocId>,
}

impl LoopDecomposition {
    /// Transitions that must be ranked. The exit is a sink of the sub-graph,
    /// so its own outgoing transitions are not part of the loop.
    pub fn ranked_transitions(&self, g: &Pcfg) -> Vec<GenTransition> {
        gen_transitions(g)
            .into_iter()
            .filter(|gt| {
                let s = gt.source(g);
                s != self.exit && self.slice.contains(&s)
            })
            .collect()
    }

    pub fn unaffected_transitions(&self, g: &Pcfg) -> Vec<GenTransition> {
        gen_transitions(g).into_iter().filter(|gt| self.loops.contains(&gt.source(g))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompositionalError {
    #[error("location {0} is not a loop head")]
    NotAHead(LocId),
    #[error("no LinNCSM for loop {loop_id}: {cause}")]
    NoNcsm { loop_id: usize, cause: SynthesisError },
}

pub fn decompose(g: &Pcfg, loop_head: LocId) -> Result<LoopDecomposition, CompositionalError> {
    let info = g.loop_at_head(loop_head).ok_or(CompositionalError::NotAHead(loop_head))?;
    Ok(decompose_loop(g, info))
}

fn decompose_loop(g: &Pcfg, info: &LoopInfo) -> LoopDecomposition {
    let locations = info.locations();
    let mut loops = BTreeSet::new();
    for &c in &info.children {
        let child = &g.loops[c];
        loops.insert(child.head);
        loops.extend(child.body.iter().copied());
    }
    let slice = locations.difference(&loops).copied().collect();
    LoopDecomposition { loop_id: info.id, head: info.head, exit: info.exit, locations, loops, slice }
}

#[derive(Clone, Debug)]
pub struct NcsmConfig {
    pub epsilon: Rat,
    /// Defaults to the number of ranked transitions; `Some(1)` gives the
    /// one-dimensional notion.
    pub max_dimension: Option<usize>,
}

impl Default for NcsmConfig {
    fn default() -> Self {
        NcsmConfig { epsilon: Rat::one(), max_dimension: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NcsmCertificate {
    pub decomposition: LoopDecomposition,
    pub depth: usize,
    pub components: Vec<Lem>,
    /// Levels of the ranked transitions.
    pub levels: BTreeMap<GenTransition, usize>,
    pub epsilon: Rat,
}

impl NcsmCertificate {
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    /// Variables with a non-zero coefficient at some location of the loop.
    pub fn support(&self) -> BTreeSet<usize> {
        let mut vs = BTreeSet::new();
        for c in &self.components {
            for &l in &self.decomposition.locations {
                vs.extend(c.at(l).vars());
            }
        }
        vs
    }

    fn requirements(&self, g: &Pcfg) -> Vec<(GenTransition, usize)> {
        let mut reqs: Vec<(GenTransition, usize)> = self.levels.iter().map(|(gt, l)| (*gt, *l)).collect();
        reqs.extend(self.decomposition.unaffected_transitions(g).into_iter().map(|gt| (gt, 0)));
        reqs
    }

    /// Exact re-check of every clause through Farkas blocks.
    pub fn verify_symbolically(&self, g: &Pcfg, inv: &InvariantMap) -> Result<(), Vec<SymbolicFailure>> {
        let d = &self.decomposition;
        let mut failures = Vec::new();
        for gt in d.ranked_transitions(g) {
            if !self.levels.contains_key(&gt) {
                failures.push(SymbolicFailure {
                    loc: gt.source(g),
                    transition: Some(gt),
                    clause: Clause::MissingLevel,
                    witness: None,
                    excess: None,
                });
            }
        }
        failures.extend(symbolic_generic(g, inv, &self.components, &self.epsilon, &d.locations, &self.requirements(g)));
        if failures.is_empty() {
            Ok(())
        } else {
            Err(failures)
        }
    }

    /// Evaluates the clauses at sampled configurations of the sub-graph.
    pub fn pointwise_check(&self, g: &Pcfg, samples: &SampleSet) -> PointwiseReport {
        let d = &self.decomposition;
        let ranked: BTreeSet<GenTransition> = d.ranked_transitions(g).into_iter().collect();
        pointwise_generic(g, &self.components, &self.epsilon, samples, &|l| d.locations.contains(&l), &|gt| {
            let s = gt.source(g);
            if ranked.contains(&gt) {
                Some(self.levels.get(&gt).copied().ok_or(Clause::MissingLevel))
            } else if d.loops.contains(&s) {
                Some(Ok(0))
            } else {
                None
            }
        })
    }
}

/// Synthesizes a LinNCSM for one loop. Templates range over the loop's guard
/// variables with bounded slice updates first, then all guard variables,
/// then all variables.
pub fn synthesize_ncsm(
    g: &Pcfg,
    inv: &InvariantMap,
    decomp: &LoopDecomposition,
    cfg: &NcsmConfig,
    stats: &mut SynthesisStats,
) -> Result<NcsmCertificate, CompositionalError> {
    let info = &g.loops[decomp.loop_id];
    let to_rank = decomp.ranked_transitions(g);
    let all: Vec<usize> = (0..g.num_vars()).collect();
    let mut guard: BTreeSet<usize> = BTreeSet::new();
    for p in &info.guard.to_plp().disjuncts {
        guard.extend(p.vars());
    }
    let steady: Vec<usize> = guard.iter().copied().filter(|&v| bounded_step(g, inv, decomp, v)).collect();
    let guard: Vec<usize> = guard.into_iter().collect();
    let mut passes: Vec<Vec<usize>> = Vec::new();
    for vars in [steady, guard, all] {
        if !vars.is_empty() && !passes.contains(&vars) {
            passes.push(vars);
        }
    }
    let mut last = None;
    for vars in passes {
        let task = RankingTask {
            nonneg: &decomp.locations,
            to_rank: to_rank.clone(),
            unaffected: decomp.unaffected_transitions(g),
            epsilon: cfg.epsilon.clone(),
            max_dimension: cfg.max_dimension.unwrap_or(to_rank.len().max(1)),
            vars,
        };
        match rank_iteratively(g, inv, &task, stats) {
            Ok(r) => {
                let components =
                    if r.components.is_empty() { vec![Lem::zero(g.locations.len())] } else { r.components };
                return Ok(NcsmCertificate {
                    decomposition: decomp.clone(),
                    depth: info.depth,
                    components,
                    levels: r.levels,
                    epsilon: cfg.epsilon.clone(),
                });
            }
            Err(e) => last = Some(e),
        }
    }
    Err(CompositionalError::NoNcsm { loop_id: decomp.loop_id, cause: last.expect("at least one pass") })
}

/// Whether every slice update of `v` changes it by a bounded amount on the
/// source invariant. Such variables are tried first as template variables.
fn bounded_step(g: &Pcfg, inv: &InvariantMap, decomp: &LoopDecomposition, v: usize) -> bool {
    decomp.ranked_transitions(g).into_iter().flat_map(|gt| gt.members(g)).all(|t| {
        let Some(u) = t.update.as_ref().filter(|u| u.var == v) else { return true };
        if let Some((k, r)) = &u.rhs.random {
            let range = match r {
                Random::Sample(d) => d.support(),
                Random::Ndet(i) => i.clone(),
            };
            if !k.is_zero() && (range.lo.is_none() || range.hi.is_none()) {
                return false;
            }
        }
        let region = inv.get(t.source).weakened().and(&t.guard().weakened());
        let diff = u.rhs.base.minus(&LinExpr::var(v));
        [diff.clone(), diff.negated()]
            .iter()
            .all(|d| !matches!(maximize_over(&region, d), LpOutcome::Unbounded))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompositionalVerdict {
    Terminates,
    /// A loop has no LinNCSM. The supermartingale fallback is not available.
    CannotProve { loop_id: usize, cause: SynthesisError },
}

#[derive(Clone, Debug)]
pub struct CompositionalResult {
    pub verdict: CompositionalVerdict,
    /// Certificates in the order they were established.
    pub ledger: Vec<NcsmCertificate>,
    pub stats: SynthesisStats,
}

impl CompositionalResult {
    pub fn proved(&self) -> bool {
        self.verdict == CompositionalVerdict::Terminates
    }
}

/// Certifies all loops from the deepest nesting level outwards. A program
/// without loops terminates trivially.
pub fn prove_compositional(g: &Pcfg, inv: &InvariantMap, cfg: &NcsmConfig) -> CompositionalResult {
    let mut stats = SynthesisStats::default();
    let mut ledger: Vec<NcsmCertificate> = Vec::new();
    let max_depth = g.loops.iter().map(|l| l.depth).max().unwrap_or(0);
    for depth in (0..=max_depth).rev() {
        for info in g.loops.iter().filter(|l| l.depth == depth) {
            debug_assert!(info.children.iter().all(|c| ledger.iter().any(|cert| cert.decomposition.loop_id == *c)));
            let decomp = decompose_loop(g, info);
            match synthesize_ncsm(g, inv, &decomp, cfg, &mut stats) {
                Ok(cert) => ledger.push(cert),
                Err(CompositionalError::NoNcsm { loop_id, cause }) => {
                    return CompositionalResult { verdict: CompositionalVerdict::CannotProve { loop_id, cause }, ledger, stats };
                }
                Err(e) => unreachable!("decomposition of a known loop: {e}"),
            }
        }
    }
    CompositionalResult { verdict: CompositionalVerdict::Terminates, ledger, stats }
}

/// Whether every loop appears after all of its nested loops.
pub fn ledger_is_topological(g: &Pcfg, ledger: &[NcsmCertificate]) -> bool {
    let pos: BTreeMap<usize, usize> = ledger.iter().enumerate().map(|(i, c)| (c.decomposition.loop_id, i)).collect();
    ledger.iter().enumerate().all(|(i, c)| {
        g.loops[c.decomposition.loop_id].children.iter().all(|ch| pos.get(ch).is_some_and(|&p| p < i))
    })
}

#[cfg(test)]
mod tests;
