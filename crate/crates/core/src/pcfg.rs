//! Probabilistic control-flow graphs.
//!
//! Programs are compiled backwards: every statement is translated given the
//! location that follows it, and returns its entry location. Locations are then
//! renumbered in depth-first order from the initial location, with the terminal
//! location last, so ids follow source order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num::One;
use thiserror::Error;

use crate::frontend::{Ast, IfGuard, Pred, Random, Rhs, Stmt};
use crate::linear::{fmt_rat, Plp, Polyhedron, Rat};
use crate::lp::polyhedron_satisfiable;

pub type LocId = usize;
pub type TransId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocKind {
    Nondet,
    Prob,
    Det,
    Assign,
}

impl LocKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LocKind::Nondet => "nondet",
            LocKind::Prob => "prob",
            LocKind::Det => "det",
            LocKind::Assign => "assign",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub id: LocId,
    pub kind: LocKind,
    pub label: String,
    /// Innermost loop containing this location; a loop head belongs to its own loop.
    pub loop_id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Update {
    pub var: usize,
    pub rhs: Rhs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: TransId,
    pub source: LocId,
    pub target: LocId,
    /// Exact guard (strict atoms allowed). A single disjunct once normalized.
    pub guard: Plp,
    pub update: Option<Update>,
    /// Branch probability, present exactly for prob-location sources.
    pub prob: Option<Rat>,
}

impl Transition {
    /// The guard of a normalized transition.
    pub fn guard(&self) -> &Polyhedron {
        debug_assert_eq!(self.guard.disjuncts.len(), 1, "transition guard not normalized");
        &self.guard.disjuncts[0]
    }
}

/// A `while` loop as it appears in the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopInfo {
    pub id: usize,
    pub head: LocId,
    /// Every location strictly inside the loop, nested loops included.
    pub body: BTreeSet<LocId>,
    /// Target of the head's exit transitions.
    pub exit: LocId,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    pub guard: Pred,
    pub annotation: Option<Polyhedron>,
}

impl LoopInfo {
    /// Head, body and exit: the locations of the loop's own sub-graph.
    pub fn locations(&self) -> BTreeSet<LocId> {
        let mut s = self.body.clone();
        s.insert(self.head);
        s.insert(self.exit);
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pcfg {
    pub vars: Vec<String>,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub init_loc: LocId,
    pub term: LocId,
    pub init: Polyhedron,
    pub loops: Vec<LoopInfo>,
    outgoing: Vec<Vec<TransId>>,
}

/// A generalized transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenTransition {
    Single(TransId),
    Bundle(LocId),
}

impl GenTransition {
    pub fn source(&self, g: &Pcfg) -> LocId {
        match *self {
            GenTransition::Single(t) => g.transitions[t].source,
            GenTransition::Bundle(l) => l,
        }
    }

    /// Member transitions.
    pub fn members<'a>(&self, g: &'a Pcfg) -> Vec<&'a Transition> {
        match *self {
            GenTransition::Single(t) => vec![&g.transitions[t]],
            GenTransition::Bundle(l) => g.outgoing(l).iter().map(|&t| &g.transitions[t]).collect(),
        }
    }

    /// Stable textual key: `t<id>` or `b<loc>`.
    pub fn key(&self) -> String {
        match self {
            GenTransition::Single(t) => format!("t{t}"),
            GenTransition::Bundle(l) => format!("b{l}"),
        }
    }

    pub fn from_key(key: &str) -> Option<GenTransition> {
        let (tag, num) = key.split_at(key.char_indices().nth(1)?.0);
        let n: usize = num.parse().ok()?;
        match tag {
            "t" => Some(GenTransition::Single(n)),
            "b" => Some(GenTransition::Bundle(n)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcfgError {
    #[error("location {0} has no outgoing transition")]
    NoOutgoing(LocId),
    #[error("assignment location {0} must have exactly one outgoing transition")]
    AssignArity(LocId),
    #[error("probabilities at location {0} sum to {1}")]
    ProbSum(LocId, String),
    #[error("transition {0}: probability present iff the source is probabilistic")]
    ProbMismatch(TransId),
    #[error("transition {0}: update only allowed from assignment locations")]
    MisplacedUpdate(TransId),
    #[error("transition {0}: guard only allowed from deterministic locations")]
    MisplacedGuard(TransId),
    #[error("transition {0}: guard is not a single polyhedron")]
    UnnormalizedGuard(TransId),
    #[error("terminal location {0} lacks its self-loop")]
    TerminalLoop(LocId),
    #[error("transition {0} refers to a missing location or variable")]
    Dangling(TransId),
    #[error("transition {0}: malformed update interval")]
    BadInterval(TransId),
}

impl Pcfg {
    pub fn outgoing(&self, loc: LocId) -> &[TransId] {
        &self.outgoing[loc]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_name(&self, v: usize) -> String {
        self.vars.get(v).cloned().unwrap_or_else(|| format!("v{v}"))
    }

    pub fn kind(&self, loc: LocId) -> LocKind {
        self.locations[loc].kind
    }

    /// Builds and normalizes in one go.
    pub fn from_ast(ast: &Ast) -> Pcfg {
        normalize_guards(&build_pcfg(ast))
    }

    /// Loop whose head is `loc`.
    pub fn loop_at_head(&self, loc: LocId) -> Option<&LoopInfo> {
        self.loops.iter().find(|l| l.head == loc)
    }

    /// Structural checks on the graph.
    pub fn validate(&self) -> Result<(), PcfgError> {
        let nloc = self.locations.len();
        for t in &self.transitions {
            if t.source >= nloc || t.target >= nloc || t.update.as_ref().is_some_and(|u| u.var >= self.vars.len()) {
                return Err(PcfgError::Dangling(t.id));
            }
            let kind = self.kind(t.source);
            if t.prob.is_some() != (kind == LocKind::Prob) {
                return Err(PcfgError::ProbMismatch(t.id));
            }
            if t.update.is_some() && kind != LocKind::Assign {
                return Err(PcfgError::MisplacedUpdate(t.id));
            }
            if t.guard.disjuncts.len() != 1 {
                return Err(PcfgError::UnnormalizedGuard(t.id));
            }
            if kind != LocKind::Det && !t.guard().is_top() {
                return Err(PcfgError::MisplacedGuard(t.id));
            }
            if let Some(Update { rhs: Rhs { random: Some((_, r)), .. }, .. }) = &t.update {
                let ok = match r {
                    Random::Ndet(i) => i.is_well_formed(),
                    Random::Sample(d) => d.support().is_well_formed() && d.support().contains(&d.mean()),
                };
                if !ok {
                    return Err(PcfgError::BadInterval(t.id));
                }
            }
        }
        for l in 0..nloc {
            let out = self.outgoing(l);
            if out.is_empty() {
                return Err(PcfgError::NoOutgoing(l));
            }
            match self.kind(l) {
                LocKind::Assign if out.len() != 1 => return Err(PcfgError::AssignArity(l)),
                LocKind::Prob => {
                    let sum: Rat = out.iter().filter_map(|&t| self.transitions[t].prob.clone()).sum();
                    if !sum.is_one() {
                        return Err(PcfgError::ProbSum(l, fmt_rat(&sum)));
                    }
                }
                _ => {}
            }
        }
        let term_loop = self.outgoing(self.term).iter().any(|&t| self.transitions[t].target == self.term);
        if !term_loop {
            return Err(PcfgError::TerminalLoop(self.term));
        }
        Ok(())
    }

    /// One line per location and per transition.
    pub fn to_text(&self) -> String {
        let names = |v: usize| self.var_name(v);
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.vars.join(", "));
        let _ = writeln!(out, "init l{} [{}]", self.init_loc, self.init.display_with(&names));
        let _ = writeln!(out, "term l{}", self.term);
        for l in &self.locations {
            let lp = l.loop_id.map(|i| format!(" loop={i}")).unwrap_or_default();
            let _ = writeln!(out, "loc l{} {}{} \"{}\"", l.id, l.kind.as_str(), lp, l.label);
        }
        for t in &self.transitions {
            let _ = writeln!(out, "trans t{} l{} -> l{}{}", t.id, t.source, t.target, self.edge_label(t, " "));
        }
        out
    }

    fn edge_label(&self, t: &Transition, sep: &str) -> String {
        let names = |v: usize| self.var_name(v);
        let mut parts = Vec::new();
        if self.kind(t.source) == LocKind::Det {
            let g = t.guard.disjuncts.iter().map(|d| d.display_with(&names)).collect::<Vec<_>>().join(" or ");
            parts.push(format!("[{g}]"));
        }
        if let Some(p) = &t.prob {
            parts.push(format!("p={}", fmt_rat(p)));
        }
        if let Some(u) = &t.update {
            parts.push(format!("{} := {}", names(u.var), render_rhs(&u.rhs, &names)));
        }
        if parts.is_empty() {
            String::new()
        } else {
            format!("{sep}{}", parts.join(" "))
        }
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph pcfg {\n");
        for l in &self.locations {
            let shape = match l.kind {
                LocKind::Prob => "circle",
                LocKind::Nondet => "diamond",
                LocKind::Assign => "box",
                LocKind::Det => {
                    if l.id == self.term {
                        "doublecircle"
                    } else {
                        "ellipse"
                    }
                }
            };
            let _ = writeln!(out, "  l{} [shape={shape}, label=\"l{}\\n{}\"];", l.id, l.id, escape(&l.label));
        }
        for t in &self.transitions {
            let _ = writeln!(out, "  l{} -> l{} [label=\"{}\"];", t.source, t.target, escape(&self.edge_label(t, "")));
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn render_rhs(rhs: &Rhs, names: &dyn Fn(usize) -> String) -> String {
    let base = rhs.base.display_with(names).to_string();
    match &rhs.random {
        None => base,
        Some((k, r)) => {
            let atom = match r {
                Random::Sample(d) => format!("sample({})", d.name()),
                Random::Ndet(i) => format!(
                    "ndet([{}, {}])",
                    i.lo.as_ref().map_or("-inf".into(), fmt_rat),
                    i.hi.as_ref().map_or("inf".into(), fmt_rat)
                ),
            };
            let k = if k.is_one() { String::new() } else { format!("{}*", fmt_rat(k)) };
            if rhs.base.is_zero() {
                format!("{k}{atom}")
            } else {
                format!("{base} + {k}{atom}")
            }
        }
    }
}

struct RawTrans {
    source: LocId,
    target: LocId,
    guard: Plp,
    update: Option<Update>,
    prob: Option<Rat>,
}

struct RawLoop {
    head: LocId,
    exit: LocId,
    parent: Option<usize>,
    guard: Pred,
    annotation: Option<Polyhedron>,
}

#[derive(Default)]
struct Builder {
    locs: Vec<(LocKind, String, Option<usize>)>,
    trans: Vec<RawTrans>,
    loops: Vec<RawLoop>,
    stack: Vec<usize>,
    names: Vec<String>,
}

impl Builder {
    fn loc(&mut self, kind: LocKind, label: String) -> LocId {
        self.locs.push((kind, label, self.stack.last().copied()));
        self.locs.len() - 1
    }

    fn edge(&mut self, source: LocId, target: LocId, guard: Plp, update: Option<Update>, prob: Option<Rat>) {
        self.trans.push(RawTrans { source, target, guard, update, prob });
    }

    fn render(&self, p: &Pred) -> String {
        let names = |v: usize| self.names.get(v).cloned().unwrap_or_else(|| format!("v{v}"));
        p.render(&names)
    }

    fn compile(&mut self, s: &Stmt, exit: LocId) -> LocId {
        match s {
            Stmt::Skip => {
                let l = self.loc(LocKind::Assign, "skip".into());
                self.edge(l, exit, Plp::top(), None, None);
                l
            }
            Stmt::Assign { var, rhs } => {
                let names = |v: usize| self.names.get(v).cloned().unwrap_or_else(|| format!("v{v}"));
                let label = format!("{} := {}", names(*var), render_rhs(rhs, &names));
                let l = self.loc(LocKind::Assign, label);
                self.edge(l, exit, Plp::top(), Some(Update { var: *var, rhs: rhs.clone() }), None);
                l
            }
            Stmt::Seq(ss) => {
                let mut next = exit;
                for s in ss.iter().rev() {
                    next = self.compile(s, next);
                }
                next
            }
            Stmt::If { guard, then_branch, else_branch } => {
                let (kind, label) = match guard {
                    IfGuard::Star => (LocKind::Nondet, "if *".to_string()),
                    IfGuard::Prob(p) => (LocKind::Prob, format!("if prob({})", fmt_rat(p))),
                    IfGuard::Pred(p) => (LocKind::Det, format!("if {}", self.render(p))),
                };
                let head = self.loc(kind, label);
                let a = self.compile(then_branch, exit);
                let b = self.compile(else_branch, exit);
                match guard {
                    IfGuard::Star => {
                        self.edge(head, a, Plp::top(), None, None);
                        self.edge(head, b, Plp::top(), None, None);
                    }
                    IfGuard::Prob(p) => {
                        self.edge(head, a, Plp::top(), None, Some(p.clone()));
                        self.edge(head, b, Plp::top(), None, Some(Rat::one() - p));
                    }
                    IfGuard::Pred(p) => {
                        self.edge(head, a, p.to_plp(), None, None);
                        self.edge(head, b, p.negate().to_plp(), None, None);
                    }
                }
                head
            }
            Stmt::While { guard, body, invariant } => {
                let id = self.loops.len();
                self.loops.push(RawLoop {
                    head: usize::MAX,
                    exit,
                    parent: self.stack.last().copied(),
                    guard: guard.clone(),
                    annotation: invariant.clone(),
                });
                self.stack.push(id);
                let head = self.loc(LocKind::Det, format!("while {}", self.render(guard)));
                self.loops[id].head = head;
                let entry = self.compile(body, head);
                self.stack.pop();
                self.edge(head, entry, guard.to_plp(), None, None);
                self.edge(head, exit, guard.negate().to_plp(), None, None);
                head
            }
        }
    }
}

/// Translates a program. Guards are kept as disjunctions; see [`normalize_guards`].
pub fn build_pcfg(ast: &Ast) -> Pcfg {
    let mut b = Builder { names: ast.vars.clone(), ..Default::default() };
    b.locs.push((LocKind::Det, "term".into(), None));
    let term_raw = 0;
    let entry = b.compile(&ast.body, term_raw);
    b.edge(term_raw, term_raw, Plp::top(), None, None);

    // Depth-first renumbering from the entry; the terminal location goes last.
    let n = b.locs.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, t) in b.trans.iter().enumerate() {
        succ[t.source].push(i);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[term_raw] = true;
    let mut stack = vec![entry];
    while let Some(l) = stack.pop() {
        if seen[l] {
            continue;
        }
        seen[l] = true;
        order.push(l);
        for &t in succ[l].iter().rev() {
            let target = b.trans[t].target;
            if !seen[target] {
                stack.push(target);
            }
        }
    }
    order.push(term_raw);
    debug_assert_eq!(order.len(), n, "every location is reachable by construction");
    let mut new_id = vec![usize::MAX; n];
    for (i, &l) in order.iter().enumerate() {
        new_id[l] = i;
    }

    let locations = order
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let (kind, label, loop_id) = b.locs[l].clone();
            Location { id: i, kind, label, loop_id }
        })
        .collect();
    let mut raw: Vec<(usize, usize, RawTrans)> = b
        .trans
        .into_iter()
        .enumerate()
        .map(|(i, t)| (new_id[t.source], i, t))
        .collect();
    raw.sort_by_key(|(s, i, _)| (*s, *i));
    let transitions: Vec<Transition> = raw
        .into_iter()
        .enumerate()
        .map(|(id, (_, _, t))| Transition {
            id,
            source: new_id[t.source],
            target: new_id[t.target],
            guard: t.guard,
            update: t.update,
            prob: t.prob,
        })
        .collect();

    let mut loops: Vec<LoopInfo> = b
        .loops
        .into_iter()
        .enumerate()
        .map(|(id, r)| LoopInfo {
            id,
            head: new_id[r.head],
            body: BTreeSet::new(),
            exit: new_id[r.exit],
            parent: r.parent,
            children: Vec::new(),
            depth: 0,
            guard: r.guard,
            annotation: r.annotation,
        })
        .collect();
    for i in 0..loops.len() {
        if let Some(p) = loops[i].parent {
            loops[p].children.push(i);
            loops[i].depth = loops[p].depth + 1;
        }
    }
    let mut g = Pcfg {
        vars: ast.vars.clone(),
        locations,
        transitions,
        init_loc: 0,
        term: n - 1,
        init: ast.init.clone().unwrap_or_default(),
        loops: Vec::new(),
        outgoing: Vec::new(),
    };
    for l in &g.locations {
        let mut cur = l.loop_id;
        while let Some(i) = cur {
            if loops[i].head != l.id {
                loops[i].body.insert(l.id);
            }
            cur = loops[i].parent;
        }
    }
    g.loops = loops;
    g.reindex();
    g
}

impl Pcfg {
    fn reindex(&mut self) {
        self.outgoing = vec![Vec::new(); self.locations.len()];
        for t in &self.transitions {
            self.outgoing[t.source].push(t.id);
        }
    }
}

/// Splits disjunctive guards into one transition per disjunct and makes the
/// pieces pairwise disjoint by conjoining the complements of earlier disjuncts.
/// Unsatisfiable pieces are dropped; a transition with no satisfiable piece
/// keeps a single unsatisfiable guard.
pub fn normalize_guards(g: &Pcfg) -> Pcfg {
    let mut transitions = Vec::new();
    for t in &g.transitions {
        let pieces = disjoint_pieces(&t.guard);
        for p in pieces {
            transitions.push(Transition {
                id: transitions.len(),
                source: t.source,
                target: t.target,
                guard: Plp::single(p),
                update: t.update.clone(),
                prob: t.prob.clone(),
            });
        }
    }
    let mut out = Pcfg { transitions, ..g.clone() };
    out.reindex();
    out
}

fn disjoint_pieces(guard: &Plp) -> Vec<Polyhedron> {
    let ds: Vec<Polyhedron> = guard.disjuncts.iter().filter_map(Polyhedron::simplified).collect();
    if ds.len() == 1 {
        return ds;
    }
    let mut out = Vec::new();
    for (i, d) in ds.iter().enumerate() {
        let mut pieces = vec![d.clone()];
        for earlier in &ds[..i] {
            let mut next = Vec::new();
            for p in &pieces {
                // p ∧ ¬earlier = ⋃_k p ∧ l_1 ∧ … ∧ l_{k-1} ∧ ¬l_k
                let mut prefix = Polyhedron::top();
                for lit in &earlier.constraints {
                    let piece = prefix.and(&Polyhedron::new(vec![lit.complement()])).and(p);
                    if let Some(s) = piece.simplified() {
                        if polyhedron_satisfiable(&s) {
                            next.push(s);
                        }
                    }
                    prefix = prefix.and(&Polyhedron::new(vec![lit.clone()]));
                }
            }
            pieces = next;
        }
        out.extend(pieces.into_iter().filter(polyhedron_satisfiable));
    }
    if out.is_empty() {
        out.push(Polyhedron::bottom());
    }
    out
}

/// Generalized transitions: one per transition out of a non-probabilistic
/// location and one bundle per probabilistic location, excluding the
/// terminal self-loop.
pub fn gen_transitions(g: &Pcfg) -> Vec<GenTransition> {
    let mut out = Vec::new();
    for l in &g.locations {
        if l.id == g.term {
            continue;
        }
        if l.kind == LocKind::Prob {
            out.push(GenTransition::Bundle(l.id));
        } else {
            out.extend(g.outgoing(l.id).iter().map(|&t| GenTransition::Single(t)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::linear::{rat, LinConstraint, LinExpr};

    fn pcfg(src: &str) -> Pcfg {
        let g = Pcfg::from_ast(&parse_program(src).unwrap());
        g.validate().unwrap();
        g
    }

    const BIASED_WALK: &str = "@init(x >= 0)\nwhile x >= 1 do if prob(3/4) then x := x - 1 else x := x + 1 fi od";
    const NESTED_UNIFORM_WALK: &str = "@vars(x, y)\nwhile x >= 0 do y := x; while y >= 1 do y := y + sample(uniform(-3, 1)) od; x := x - 1 od";

    #[test]
    fn biased_walk_structure() {
        let g = pcfg(BIASED_WALK);
        let kinds: Vec<_> = g.locations.iter().map(|l| l.kind).collect();
        assert_eq!(kinds, vec![LocKind::Det, LocKind::Prob, LocKind::Assign, LocKind::Assign, LocKind::Det]);
        assert_eq!(g.term, 4);
        let out0: Vec<_> = g.outgoing(0).iter().map(|&t| &g.transitions[t]).collect();
        assert_eq!(out0.len(), 2);
        assert_eq!((out0[0].target, out0[1].target), (1, 4));
        assert!(out0[0].guard().contains(&[rat(1)]).unwrap());
        // The exit guard is exact: x < 1.
        assert!(!out0[1].guard().contains(&[rat(1)]).unwrap());
        assert_eq!(out0[1].guard().weakened(), Polyhedron::new(vec![LinConstraint::le(&LinExpr::var(0), &LinExpr::constant(rat(1)))]));
        assert_eq!(g.loops.len(), 1);
        assert_eq!(g.loops[0].body, BTreeSet::from([1, 2, 3]));
        let gts = gen_transitions(&g);
        assert_eq!(gts, vec![
            GenTransition::Single(0),
            GenTransition::Single(1),
            GenTransition::Bundle(1),
            GenTransition::Single(4),
            GenTransition::Single(5),
        ]);
    }

    #[test]
    fn skip_graph() {
        let g = pcfg("skip");
        assert_eq!(g.locations.len(), 2);
        assert_eq!(g.transitions.len(), 2);
        assert_eq!(gen_transitions(&g), vec![GenTransition::Single(0)]);
    }

    #[test]
    fn nested_uniform_walk_numbering() {
        let g = pcfg(NESTED_UNIFORM_WALK);
        assert_eq!(g.locations.len(), 6);
        assert_eq!(g.term, 5);
        let outer = &g.loops[0];
        let inner = &g.loops[1];
        assert_eq!((outer.head, inner.head), (0, 2));
        assert_eq!(inner.body, BTreeSet::from([3]));
        assert_eq!(inner.exit, 4);
        assert_eq!(outer.body, BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(outer.children, vec![1]);
        assert_eq!(inner.depth, 1);
    }

    #[test]
    fn split_guard_is_disjoint() {
        let g = pcfg("@vars(x, c)\nwhile x >= 1 and c >= 1 do c := c - 1 od");
        let exits: Vec<_> = g.outgoing(0).iter().map(|&t| &g.transitions[t]).filter(|t| t.target == g.term).collect();
        assert_eq!(exits.len(), 2);
        let w: Vec<_> = exits.iter().map(|t| t.guard().weakened()).collect();
        let names = |v: usize| ["x", "c"][v].to_string();
        assert_eq!(w[0].display_with(&names), "x <= 1");
        assert_eq!(w[1].display_with(&names), "x >= 1 and c <= 1");
    }

    #[test]
    fn gen_key_round_trip() {
        for gt in [GenTransition::Single(12), GenTransition::Bundle(3)] {
            assert_eq!(GenTransition::from_key(&gt.key()), Some(gt));
        }
        assert_eq!(GenTransition::from_key("x1"), None);
        assert_eq!(GenTransition::from_key(""), None);
    }

    #[test]
    fn text_and_dot() {
        let g = pcfg(BIASED_WALK);
        let text = g.to_text();
        assert!(text.contains("loc l1 prob loop=0 \"if prob(3/4)\""));
        assert!(text.contains("trans t2 l1 -> l2 p=3/4"));
        assert!(g.to_dot().starts_with("digraph"));
    }
}
