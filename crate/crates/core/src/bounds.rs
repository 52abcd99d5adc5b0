//! Expected-runtime bounds from LexRSM maps with bounded expected conditional
//! increase (ECI).
//!
//! For a map with levels, every transition at level `j` may raise each later
//! component `j' > j` by at most a constant `c_j'` in expectation. With
//! `c = max c_j` the expected number of steps from `x` is at most
//! `Σ_j η_j(ℓ_init, x)·(c + 1)^(n−j)`. Components are rescaled by `1/ε` first
//! so that every ranked step drops by one.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::lexrsm::{
    conditions, drift, entails_pruned, verify_symbolically, LexRsmMap, LpBuilder, SymbolicFailure,
};
use crate::linear::{IdGen, LinExpr, Rat, SymExpr};
use crate::lp::{feasible, solve, LpOutcome, Sense};
use crate::pcfg::{GenTransition, Pcfg};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("map does not verify ({} failing condition(s))", .0.len())]
    MapUnverified(Vec<SymbolicFailure>),
    /// Some later component can grow without bound in expectation.
    #[error("no bounded expected conditional increase")]
    NoEci,
    #[error("initial valuation outside the initial set")]
    OutsideInit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCertificate {
    /// The map scaled to ε = 1.
    pub map: LexRsmMap,
    /// Minimal increase bound per component. The first is always zero.
    pub eci: Vec<Rat>,
    /// `Σ_j η_j(ℓ_init, ·)·(c + 1)^(n−j)` over the initial variables.
    pub bound: LinExpr,
}

impl BoundCertificate {
    pub fn c_max(&self) -> Rat {
        self.eci.iter().max().cloned().unwrap_or_else(Rat::zero)
    }
}

fn scaled_to_unit(map: &LexRsmMap) -> LexRsmMap {
    let mut m = map.clone();
    let k = Rat::one() / &map.epsilon;
    for c in &mut m.components {
        for e in &mut c.exprs {
            *e = e.scaled(&k);
        }
    }
    m.epsilon = Rat::one();
    m
}

/// ECI blocks: for each transition at level `j` and each `j' > j`,
/// `preexp(η_j') − η_j'(ℓ) − c_j' ≤ 0` on the transition's region. `cap`
/// optionally pins one `c_j'` to an upper bound.
fn eci_lp(g: &Pcfg, map: &LexRsmMap, cap: Option<(usize, Rat)>) -> (LpBuilder, Vec<usize>) {
    let n = map.dimension();
    let ids = IdGen::new();
    // Unknown ids live in their own space; the blocks only mention `c` and multipliers.
    let cs: Vec<usize> = (0..n).map(|_| ids.fresh()).collect();
    let mut lp = LpBuilder::new();
    for (j, &c) in cs.iter().enumerate() {
        let upper = cap.as_ref().filter(|(k, _)| *k == j).map(|(_, v)| v.clone());
        lp.problem.declare(c, Some(Rat::zero()), upper);
        lp.problem.set_name(c, format!("c_{}", j + 1));
    }
    let gts: Vec<GenTransition> = map.levels.keys().copied().collect();
    for cond in conditions(g, &map.invariants, &gts) {
        let Some(p) = &cond.premise else { continue };
        let level = map.levels[&cond.gt];
        for (j, eta) in map.components.iter().enumerate().skip(level) {
            let mut target = SymExpr::concrete(&drift(g, cond.gt, eta));
            target.add_unknown_constant(&LinExpr::var(cs[j]).negated());
            lp.push(entails_pruned(p, &target, &ids, format!("eci {} c_{}", cond.gt.key(), j + 1)));
        }
    }
    (lp, cs)
}

/// Finds the least constant increase bounds for `map` and the resulting
/// runtime bound. The map's own invariants support every condition.
pub fn synthesize_eci(g: &Pcfg, map: &LexRsmMap) -> Result<BoundCertificate, BoundError> {
    verify_symbolically(g, map).map_err(BoundError::MapUnverified)?;
    let map = scaled_to_unit(map);
    let (mut lp, cs) = eci_lp(g, &map, None);
    let objective = LinExpr::from_terms(cs.iter().map(|&c| (c, Rat::one())), Rat::zero());
    lp.problem.set_objective(Sense::Minimize, objective);
    let LpOutcome::Optimal { values, .. } = solve(&lp.problem) else {
        return Err(BoundError::NoEci);
    };
    let eci: Vec<Rat> = cs.iter().map(|c| values.get(c).cloned().unwrap_or_else(Rat::zero)).collect();
    let bound = bound_expr(g, &map, &eci);
    Ok(BoundCertificate { map, eci, bound })
}

fn bound_expr(g: &Pcfg, map: &LexRsmMap, eci: &[Rat]) -> LinExpr {
    let n = map.dimension();
    let base = eci.iter().max().cloned().unwrap_or_else(Rat::zero) + Rat::one();
    let mut out = LinExpr::zero();
    for (j, eta) in map.components.iter().enumerate() {
        // 0-based j: exponent n - (j + 1)
        let w = num::pow::pow(base.clone(), n - j - 1);
        out.add_scaled(eta.at(g.init_loc), &w);
    }
    out
}

/// The bound at a concrete initial valuation, in pCFG steps.
pub fn bound_value(g: &Pcfg, cert: &BoundCertificate, x_init: &[Rat]) -> Result<Rat, BoundError> {
    if x_init.len() != g.num_vars() || !g.init.contains(x_init).unwrap_or(false) {
        return Err(BoundError::OutsideInit);
    }
    Ok(cert.bound.eval(x_init).expect("valuation covers program variables"))
}

/// Re-solves with each positive `c_j` capped strictly below its value and
/// reports whether every such system is infeasible.
pub fn eci_is_minimal(g: &Pcfg, cert: &BoundCertificate) -> bool {
    cert.eci.iter().enumerate().filter(|(_, c)| c.is_positive()).all(|(j, c)| {
        let below = c / Rat::from_integer(2.into());
        let (lp, _) = eci_lp(g, &cert.map, Some((j, below)));
        !feasible(&lp.problem)
    })
}

/// The `c̄` vector as `c_1 … c_n` names to values, for reports.
pub fn eci_table(cert: &BoundCertificate) -> BTreeMap<String, Rat> {
    cert.eci.iter().enumerate().map(|(j, c)| (format!("c_{}", j + 1), c.clone())).collect()
}

#[cfg(test)]
mod tests;
