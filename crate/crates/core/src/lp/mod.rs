//! Exact rational linear programming.
//!
//! Free variables occurring in equality rows are eliminated first by
//! substitution. The rest is solved by a two-phase primal simplex on a sparse
//! row tableau with Dantzig pricing and a lexicographic ratio test, which rules
//! out cycling on the highly degenerate systems Farkas encodings produce. Every
//! optimal assignment is checked against the original constraints before it is
//! returned.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::{One, Signed, Zero};

use crate::linear::{fmt_rat, LinExpr, Polyhedron, Rat, Rel};

mod q;

use q::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct LpConstraint {
    pub expr: LinExpr,
    pub rel: Rel,
    pub rhs: Rat,
}

#[derive(Clone, Debug, Default)]
struct VarInfo {
    lower: Option<Rat>,
    upper: Option<Rat>,
    name: Option<String>,
}

/// Variables are arbitrary ids; ids that are never declared are free.
#[derive(Clone, Debug)]
pub struct LpProblem {
    vars: BTreeMap<usize, VarInfo>,
    constraints: Vec<LpConstraint>,
    objective: LinExpr,
    sense: Sense,
}

impl Default for LpProblem {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { values: BTreeMap<usize, Rat>, objective: Rat },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn value(&self, id: usize) -> Option<Rat> {
        match self {
            LpOutcome::Optimal { values, .. } => Some(values.get(&id).cloned().unwrap_or_else(Rat::zero)),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn new() -> Self {
        LpProblem { vars: BTreeMap::new(), constraints: Vec::new(), objective: LinExpr::zero(), sense: Sense::Maximize }
    }

    pub fn declare(&mut self, id: usize, lower: Option<Rat>, upper: Option<Rat>) {
        let v = self.vars.entry(id).or_default();
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_name(&mut self, id: usize, name: impl Into<String>) {
        self.vars.entry(id).or_default().name = Some(name.into());
    }

    pub fn nonneg(&mut self, id: usize) {
        self.declare(id, Some(Rat::zero()), None);
    }

    /// `expr rel rhs`; a constant inside `expr` is moved to the right.
    pub fn add(&mut self, expr: LinExpr, rel: Rel, rhs: Rat) {
        let rhs = rhs - expr.const_term();
        let mut expr = expr;
        expr.set_constant(Rat::zero());
        self.constraints.push(LpConstraint { expr, rel, rhs });
    }

    pub fn set_objective(&mut self, sense: Sense, objective: LinExpr) {
        self.sense = sense;
        self.objective = objective;
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[LpConstraint] {
        &self.constraints
    }

    fn all_ids(&self) -> BTreeSet<usize> {
        let mut ids: BTreeSet<usize> = self.vars.keys().copied().collect();
        for c in &self.constraints {
            ids.extend(c.expr.vars());
        }
        ids.extend(self.objective.vars());
        ids
    }

    pub fn num_vars(&self) -> usize {
        self.all_ids().len()
    }

    /// Checks an assignment against every constraint and bound.
    pub fn satisfied_by(&self, values: &BTreeMap<usize, Rat>) -> bool {
        let get = |v: usize| Some(values.get(&v).cloned().unwrap_or_else(Rat::zero));
        for c in &self.constraints {
            let lhs = c.expr.eval_with(get).expect("total lookup");
            let ok = match c.rel {
                Rel::Le => lhs <= c.rhs,
                Rel::Ge => lhs >= c.rhs,
                Rel::Eq => lhs == c.rhs,
            };
            if !ok {
                return false;
            }
        }
        for (id, info) in &self.vars {
            let x = values.get(id).cloned().unwrap_or_else(Rat::zero);
            if info.lower.as_ref().is_some_and(|l| &x < l) || info.upper.as_ref().is_some_and(|u| &x > u) {
                return false;
            }
        }
        true
    }

    /// Plain-text dump with objective, constraint and bound sections.
    pub fn to_lp_text(&self) -> String {
        let name = |id: usize| -> String {
            self.vars.get(&id).and_then(|v| v.name.clone()).unwrap_or_else(|| format!("u{id}"))
        };
        let expr = |e: &LinExpr| -> String {
            let mut s = String::new();
            for (i, (v, c)) in e.terms().enumerate() {
                if i == 0 {
                    if c.is_negative() {
                        s.push('-');
                    }
                } else {
                    s.push_str(if c.is_negative() { " - " } else { " + " });
                }
                let _ = write!(s, "{} {}", fmt_rat(&c.abs()), name(v));
            }
            if s.is_empty() {
                s.push('0');
            }
            s
        };
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        let _ = writeln!(out, " obj: {}", expr(&self.objective));
        out.push_str("Subject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let op = match c.rel {
                Rel::Le => "<=",
                Rel::Ge => ">=",
                Rel::Eq => "=",
            };
            let _ = writeln!(out, " c{i}: {} {op} {}", expr(&c.expr), fmt_rat(&c.rhs));
        }
        out.push_str("Bounds\n");
        for id in self.all_ids() {
            let info = self.vars.get(&id).cloned().unwrap_or_default();
            let lo = info.lower.as_ref().map(fmt_rat).unwrap_or_else(|| "-inf".into());
            let hi = info.upper.as_ref().map(fmt_rat).unwrap_or_else(|| "+inf".into());
            let _ = writeln!(out, " {lo} <= {} <= {hi}", name(id));
        }
        out.push_str("End\n");
        out
    }
}

/// Optimizes `p`.
pub fn solve(p: &LpProblem) -> LpOutcome {
    let (q, elim) = presolve(p);
    match Solver::build(&q).run(&q, false) {
        LpOutcome::Optimal { mut values, .. } => {
            for (v, e) in elim.iter().rev() {
                let x = e.eval_with(|w| Some(values.get(&w).cloned().unwrap_or_else(Rat::zero))).expect("total lookup");
                values.insert(*v, x);
            }
            assert!(p.satisfied_by(&values), "simplex returned an assignment violating the problem");
            let objective = p.objective.eval_with(|v| Some(values.get(&v).cloned().unwrap_or_else(Rat::zero))).expect("total lookup");
            LpOutcome::Optimal { values, objective }
        }
        other => other,
    }
}

/// Phase one only.
pub fn feasible(p: &LpProblem) -> bool {
    let (q, _) = presolve(p);
    !matches!(Solver::build(&q).run(&q, true), LpOutcome::Infeasible)
}

/// Eliminates free variables through equality rows, cheapest occurrence count
/// first. Returns the reduced problem and the eliminations in order; each
/// eliminated variable is an affine function of variables that remain or are
/// eliminated later.
fn presolve(p: &LpProblem) -> (LpProblem, Vec<(usize, LinExpr)>) {
    let is_free = |v: usize| p.vars.get(&v).is_none_or(|i| i.lower.is_none() && i.upper.is_none());
    let mut rows: Vec<Option<LpConstraint>> = p.constraints.iter().cloned().map(Some).collect();
    let mut occ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, c) in p.constraints.iter().enumerate() {
        for v in c.expr.vars() {
            occ.entry(v).or_default().insert(i);
        }
    }
    let mut objective = p.objective.clone();
    let mut elim = Vec::new();
    // Free variables go first. A variable with one bound and few occurrences
    // is eliminated too, leaving its bound behind as an inequality.
    for bounded in [false, true] {
        let mut changed = true;
        while changed {
            changed = false;
            for r in 0..rows.len() {
                let Some(row) = &rows[r] else { continue };
                if row.rel != Rel::Eq {
                    continue;
                }
                let candidate = |v: &usize| {
                    if is_free(*v) {
                        return true;
                    }
                    let info = &p.vars[v];
                    bounded && occ[v].len() <= 2 && (info.lower.is_none() || info.upper.is_none())
                };
                let Some(v) = row.expr.vars().filter(candidate).min_by_key(|v| (!is_free(*v), occ[v].len(), *v))
                else {
                    continue;
                };
                let row = rows[r].take().expect("live row");
                let a = row.expr.coeff(v);
                // v = (rhs - Σ_{w≠v} c_w w) / a
                let mut e = row.expr.clone();
                e.add_term(v, -a.clone());
                let mut e = e.negated().scaled(&(Rat::one() / &a));
                e.add_constant(&(&row.rhs / &a));
                for w in row.expr.vars() {
                    if let Some(o) = occ.get_mut(&w) {
                        o.remove(&r);
                    }
                }
                let targets: Vec<usize> = occ.get(&v).map(|o| o.iter().copied().collect()).unwrap_or_default();
                for t in targets {
                    let c = rows[t].as_mut().expect("indexed row");
                    let mut ne = c.expr.substitute(v, &e);
                    c.rhs -= ne.const_term();
                    ne.set_constant(Rat::zero());
                    for w in c.expr.vars().collect::<Vec<_>>() {
                        if ne.coeff(w).is_zero() {
                            occ.get_mut(&w).expect("indexed var").remove(&t);
                        }
                    }
                    for w in ne.vars() {
                        occ.entry(w).or_default().insert(t);
                    }
                    c.expr = ne;
                }
                occ.remove(&v);
                if let Some(info) = p.vars.get(&v) {
                    let mut lhs = e.clone();
                    let k = lhs.const_term().clone();
                    lhs.set_constant(Rat::zero());
                    let bound = match (&info.lower, &info.upper) {
                        (Some(l), _) => Some((Rel::Ge, l - &k)),
                        (None, Some(u)) => Some((Rel::Le, u - &k)),
                        (None, None) => None,
                    };
                    if let Some((rel, rhs)) = bound {
                        let t = rows.len();
                        for w in lhs.vars() {
                            occ.entry(w).or_default().insert(t);
                        }
                        rows.push(Some(LpConstraint { expr: lhs, rel, rhs }));
                    }
                }
                objective = objective.substitute(v, &e);
                elim.push((v, e));
                changed = true;
            }
        }
    }
    let eliminated: BTreeSet<usize> = elim.iter().map(|(v, _)| *v).collect();
    let mut q = LpProblem::new();
    for (id, info) in &p.vars {
        if !eliminated.contains(id) {
            q.vars.insert(*id, info.clone());
        }
    }
    q.constraints = rows.into_iter().flatten().collect();
    q.objective = objective;
    q.sense = p.sense;
    (q, elim)
}

/// Satisfiability of the closure of a polyhedron.
pub fn polyhedron_feasible(poly: &Polyhedron) -> bool {
    let mut p = LpProblem::new();
    for c in &poly.constraints {
        p.add(c.expr.clone(), Rel::Le, Rat::zero());
    }
    feasible(&p)
}

/// Satisfiability with strict constraints honoured: maximizes a slack `t`
/// subtracted from every strict row and asks for `t > 0`.
pub fn polyhedron_satisfiable(poly: &Polyhedron) -> bool {
    if !poly.has_strict() {
        return polyhedron_feasible(poly);
    }
    let t = poly.vars().last().map_or(0, |v| v + 1);
    let mut p = LpProblem::new();
    p.declare(t, Some(Rat::zero()), Some(Rat::one()));
    for c in &poly.constraints {
        let mut e = c.expr.clone();
        if c.strict {
            e.add_term(t, Rat::one());
        }
        p.add(e, Rel::Le, Rat::zero());
    }
    p.set_objective(Sense::Maximize, LinExpr::var(t));
    match solve(&p) {
        LpOutcome::Optimal { objective, .. } => objective.is_positive(),
        _ => false,
    }
}

/// Maximizes `obj` over the closure of a polyhedron.
pub fn maximize_over(poly: &Polyhedron, obj: &LinExpr) -> LpOutcome {
    let mut p = LpProblem::new();
    for c in &poly.constraints {
        p.add(c.expr.clone(), Rel::Le, Rat::zero());
    }
    let mut o = obj.clone();
    let k = o.const_term().clone();
    o.set_constant(Rat::zero());
    p.set_objective(Sense::Maximize, o);
    match solve(&p) {
        LpOutcome::Optimal { values, objective } => LpOutcome::Optimal { values, objective: objective + k },
        other => other,
    }
}

type Row = Vec<(u32, Rat)>;
type QRow = Vec<(u32, Q)>;

/// Original variable expressed through tableau columns:
/// `x = offset + Σ sign·col`.
struct VarMap {
    offset: Rat,
    cols: Vec<(u32, Rat)>,
}

struct Solver {
    ids: Vec<usize>,
    maps: Vec<VarMap>,
    rows: Vec<QRow>,
    rhs: Vec<Q>,
    basis: Vec<u32>,
    col_rows: Vec<BTreeSet<u32>>,
    artificial: Vec<bool>,
    /// Columns of the starting basis, which is an identity.
    initial: Vec<bool>,
    ncols: usize,
    trivially_infeasible: bool,
    /// Phase two costs per column and the objective offset.
    cost: Vec<Q>,
    cost_offset: Q,
}

impl Solver {
    fn build(p: &LpProblem) -> Solver {
        let ids: Vec<usize> = p.all_ids().into_iter().collect();
        let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

        let mut ncols = 0u32;
        let mut maps = Vec::with_capacity(ids.len());
        // Extra rows from finite upper bounds of lower-bounded variables.
        let mut bound_rows: Vec<(Row, Rel, Rat)> = Vec::new();
        for id in &ids {
            let info = p.vars.get(id).cloned().unwrap_or_default();
            let m = match (info.lower, info.upper) {
                (Some(l), u) => {
                    let c = ncols;
                    ncols += 1;
                    if let Some(u) = u {
                        bound_rows.push((vec![(c, Rat::one())], Rel::Le, u - &l));
                    }
                    VarMap { offset: l, cols: vec![(c, Rat::one())] }
                }
                (None, Some(u)) => {
                    let c = ncols;
                    ncols += 1;
                    VarMap { offset: u, cols: vec![(c, -Rat::one())] }
                }
                (None, None) => {
                    let c = ncols;
                    ncols += 2;
                    VarMap { offset: Rat::zero(), cols: vec![(c, Rat::one()), (c + 1, -Rat::one())] }
                }
            };
            maps.push(m);
        }

        let mut trivially_infeasible = false;
        let mut raw: Vec<(Row, Rel, Rat)> = Vec::new();
        let mut seen: BTreeSet<(Vec<(u32, Rat)>, u8, Rat)> = BTreeSet::new();
        for c in &p.constraints {
            let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
            let mut rhs = c.rhs.clone();
            for (v, a) in c.expr.terms() {
                let m = &maps[index[&v]];
                rhs -= a * &m.offset;
                for (col, s) in &m.cols {
                    let e = acc.entry(*col).or_insert_with(Rat::zero);
                    *e += a * s;
                }
            }
            let row: Row = acc.into_iter().filter(|(_, a)| !a.is_zero()).collect();
            if row.is_empty() {
                let ok = match c.rel {
                    Rel::Le => !rhs.is_negative(),
                    Rel::Ge => !rhs.is_positive(),
                    Rel::Eq => rhs.is_zero(),
                };
                if !ok {
                    trivially_infeasible = true;
                }
                continue;
            }
            let key = (row.clone(), c.rel as u8, rhs.clone());
            if seen.insert(key) {
                raw.push((row, c.rel, rhs));
            }
        }
        raw.extend(bound_rows);

        // Phase-two costs on structural columns.
        let (sign, obj) = match p.sense {
            Sense::Maximize => (Rat::one(), p.objective.clone()),
            Sense::Minimize => (-Rat::one(), p.objective.clone()),
        };
        let mut cost = vec![Rat::zero(); ncols as usize];
        let mut cost_offset = &sign * obj.const_term();
        for (v, a) in obj.terms() {
            let m = &maps[index[&v]];
            let a = a * &sign;
            cost_offset += &a * &m.offset;
            for (col, s) in &m.cols {
                cost[*col as usize] += &a * s;
            }
        }

        // Slack/surplus and artificial columns.
        let mut rows = Vec::with_capacity(raw.len());
        let mut rhs_v = Vec::with_capacity(raw.len());
        let mut basis = Vec::with_capacity(raw.len());
        let mut artificial = vec![false; ncols as usize];
        for (mut row, mut rel, mut rhs) in raw {
            if rhs.is_negative() {
                for (_, a) in row.iter_mut() {
                    *a = -a.clone();
                }
                rhs = -rhs;
                rel = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
            }
            match rel {
                Rel::Le => {
                    let s = ncols;
                    ncols += 1;
                    artificial.push(false);
                    row.push((s, Rat::one()));
                    basis.push(s);
                }
                Rel::Ge => {
                    let s = ncols;
                    let a = ncols + 1;
                    ncols += 2;
                    artificial.push(false);
                    artificial.push(true);
                    row.push((s, -Rat::one()));
                    row.push((a, Rat::one()));
                    basis.push(a);
                }
                Rel::Eq => {
                    let a = ncols;
                    ncols += 1;
                    artificial.push(true);
                    row.push((a, Rat::one()));
                    basis.push(a);
                }
            }
            rows.push(row);
            rhs_v.push(rhs);
        }
        cost.resize(ncols as usize, Rat::zero());
        let mut initial = vec![false; ncols as usize];
        for &b in &basis {
            initial[b as usize] = true;
        }

        let mut col_rows = vec![BTreeSet::new(); ncols as usize];
        for (i, row) in rows.iter().enumerate() {
            for (c, _) in row {
                col_rows[*c as usize].insert(i as u32);
            }
        }

        Solver {
            ids,
            maps,
            rows: rows.into_iter().map(|r: Row| r.into_iter().map(|(c, a)| (c, Q::from_rat(&a))).collect()).collect(),
            rhs: rhs_v.iter().map(Q::from_rat).collect(),
            basis,
            col_rows,
            artificial,
            initial,
            ncols: ncols as usize,
            trivially_infeasible,
            cost: cost.iter().map(Q::from_rat).collect(),
            cost_offset: Q::from_rat(&cost_offset),
        }
    }

    fn entry(&self, row: usize, col: u32) -> Option<&Q> {
        let r = &self.rows[row];
        r.binary_search_by_key(&col, |(c, _)| *c).ok().map(|k| &r[k].1)
    }

    fn pivot(&mut self, r: usize, c: u32, rc: &mut [Q], pos: &mut BTreeSet<u32>, z: &mut Q, eligible: &[bool]) {
        let piv = self.entry(r, c).expect("pivot entry").clone();
        if !piv.is_one() {
            let inv = Q::one() / &piv;
            for (_, a) in self.rows[r].iter_mut() {
                *a *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        let targets: Vec<u32> = self.col_rows[c as usize].iter().copied().filter(|&i| i as usize != r).collect();
        for i in targets {
            let i = i as usize;
            let f = self.entry(i, c).expect("column index out of sync").clone();
            let old = std::mem::take(&mut self.rows[i]);
            let mut merged = Vec::with_capacity(old.len() + prow.len());
            let (mut a, mut b) = (0, 0);
            while a < old.len() || b < prow.len() {
                let ca = old.get(a).map(|e| e.0).unwrap_or(u32::MAX);
                let cb = prow.get(b).map(|e| e.0).unwrap_or(u32::MAX);
                if ca < cb {
                    merged.push(old[a].clone());
                    a += 1;
                } else if cb < ca {
                    let v = -(&f * &prow[b].1);
                    self.col_rows[cb as usize].insert(i as u32);
                    merged.push((cb, v));
                    b += 1;
                } else {
                    let v = &old[a].1 - &f * &prow[b].1;
                    if v.is_zero() {
                        self.col_rows[ca as usize].remove(&(i as u32));
                    } else {
                        merged.push((ca, v));
                    }
                    a += 1;
                    b += 1;
                }
            }
            self.rows[i] = merged;
            let delta = &f * &prhs;
            self.rhs[i] -= delta;
        }
        let f = rc[c as usize].clone();
        if !f.is_zero() {
            for (j, a) in &prow {
                let j = *j as usize;
                rc[j] -= &f * a;
                if eligible[j] && rc[j].is_positive() {
                    pos.insert(j as u32);
                } else {
                    pos.remove(&(j as u32));
                }
            }
            *z += &f * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Lexicographic comparison of rows `i` and `j` scaled by their entries
    /// in column `c`, restricted to the initial basis columns. Those columns
    /// ascend with the row index, so column order is the lexicographic order.
    fn lex_cmp(&self, i: usize, j: usize, c: u32) -> std::cmp::Ordering {
        let ai = self.entry(i, c).expect("pivot column entry");
        let aj = self.entry(j, c).expect("pivot column entry");
        let ri = self.rows[i].iter().filter(|e| self.initial[e.0 as usize]);
        let rj = self.rows[j].iter().filter(|e| self.initial[e.0 as usize]);
        let mut ri = ri.peekable();
        let mut rj = rj.peekable();
        loop {
            let ci = ri.peek().map(|e| e.0).unwrap_or(u32::MAX);
            let cj = rj.peek().map(|e| e.0).unwrap_or(u32::MAX);
            if ci == u32::MAX && cj == u32::MAX {
                return i.cmp(&j);
            }
            let (vi, vj) = if ci < cj {
                (ri.next().expect("peeked").1.clone() / ai, Q::zero())
            } else if cj < ci {
                (Q::zero(), rj.next().expect("peeked").1.clone() / aj)
            } else {
                (ri.next().expect("peeked").1.clone() / ai, rj.next().expect("peeked").1.clone() / aj)
            };
            match vi.cmp(&vj) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
    }

    /// Runs simplex iterations for the current costs. Returns false when the
    /// objective is unbounded.
    fn iterate(&mut self, rc: &mut [Q], z: &mut Q, eligible: &[bool]) -> bool {
        let mut pos: BTreeSet<u32> =
            (0..self.ncols).filter(|&j| eligible[j] && rc[j].is_positive()).map(|j| j as u32).collect();
        loop {
            let mut entering: Option<u32> = None;
            for &j in &pos {
                if entering.is_none_or(|b| rc[j as usize] > rc[b as usize]) {
                    entering = Some(j);
                }
            }
            let Some(c) = entering else { return true };

            let mut best: Option<Q> = None;
            let mut ties: Vec<usize> = Vec::new();
            for &i in &self.col_rows[c as usize] {
                let i = i as usize;
                let a = self.entry(i, c).expect("indexed entry");
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                match &best {
                    Some(b) if ratio > *b => {}
                    Some(b) if ratio == *b => ties.push(i),
                    _ => {
                        best = Some(ratio);
                        ties.clear();
                        ties.push(i);
                    }
                }
            }
            if ties.is_empty() {
                return false;
            }
            let mut r = ties[0];
            for &i in &ties[1..] {
                if self.lex_cmp(i, r, c).is_lt() {
                    r = i;
                }
            }
            self.pivot(r, c, rc, &mut pos, z, eligible);
        }
    }

    fn run(mut self, p: &LpProblem, phase_one_only: bool) -> LpOutcome {
        if self.trivially_infeasible {
            return LpOutcome::Infeasible;
        }
        let ncols = self.ncols;

        // Phase one: maximize -Σ artificials.
        let mut rc = vec![Q::zero(); ncols];
        let mut z = Q::zero();
        for (i, row) in self.rows.iter().enumerate() {
            if self.artificial[self.basis[i] as usize] {
                for (c, a) in row {
                    rc[*c as usize] += a;
                }
                z -= &self.rhs[i];
            }
        }
        for i in 0..self.rows.len() {
            let b = self.basis[i] as usize;
            rc[b] = Q::zero();
        }
        let eligible: Vec<bool> = self.artificial.iter().map(|a| !a).collect();
        if self.rows.iter().enumerate().any(|(i, _)| self.artificial[self.basis[i] as usize]) {
            let bounded = self.iterate(&mut rc, &mut z, &eligible);
            debug_assert!(bounded);
            if z.is_negative() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining artificials out of the basis.
            for i in 0..self.rows.len() {
                if !self.artificial[self.basis[i] as usize] {
                    continue;
                }
                let col = self.rows[i].iter().find(|(c, a)| !self.artificial[*c as usize] && !a.is_zero()).map(|e| e.0);
                if let Some(c) = col {
                    let mut dummy_pos = BTreeSet::new();
                    let mut dummy_rc = vec![Q::zero(); ncols];
                    let mut dz = Q::zero();
                    self.pivot(i, c, &mut dummy_rc, &mut dummy_pos, &mut dz, &eligible);
                }
            }
        }
        if phase_one_only {
            return LpOutcome::Optimal { values: BTreeMap::new(), objective: Rat::zero() };
        }

        // Phase two.
        let mut rc = self.cost.clone();
        let mut z = self.cost_offset.clone();
        for i in 0..self.rows.len() {
            let cb = self.cost[self.basis[i] as usize].clone();
            if cb.is_zero() {
                continue;
            }
            for (c, a) in &self.rows[i] {
                rc[*c as usize] -= &cb * a;
            }
            z += &cb * &self.rhs[i];
        }
        if !self.iterate(&mut rc, &mut z, &eligible) {
            return LpOutcome::Unbounded;
        }

        let mut colval = vec![Rat::zero(); ncols];
        for (i, b) in self.basis.iter().enumerate() {
            colval[*b as usize] = self.rhs[i].to_rat();
        }
        let mut values = BTreeMap::new();
        for (k, id) in self.ids.iter().enumerate() {
            let m = &self.maps[k];
            let mut x = m.offset.clone();
            for (c, s) in &m.cols {
                x += s * &colval[*c as usize];
            }
            values.insert(*id, x);
        }
        assert!(p.satisfied_by(&values), "simplex returned an assignment violating the problem");
        let objective = p.objective.eval_with(|v| values.get(&v).cloned()).expect("objective vars assigned");
        let signed = match p.sense {
            Sense::Maximize => z.to_rat(),
            Sense::Minimize => -z.to_rat(),
        };
        assert_eq!(objective, signed, "objective bookkeeping diverged");
        LpOutcome::Optimal { values, objective }
    }
}
