//! Concrete execution of pCFGs: single runs, Monte Carlo estimates, and
//! configuration sampling for the pointwise checks.

use num::bigint::{BigInt, BigUint};
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::frontend::{DistSpec, Interval, Random};
use crate::invariants::InvariantMap;
use crate::linear::{rat, LinConstraint, LinExpr, Polyhedron, Rat, Rel};
use crate::lp::{solve, LpOutcome, LpProblem, Sense};
use crate::pcfg::{LocId, LocKind, Pcfg, Transition};

/// Unbounded interval ends are clipped here when a concrete value is needed.
pub const CLIP: i64 = 1_000_000;

/// Default step cap.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Branch(usize),
    Value(Rat),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchedulerPolicy {
    /// Uniform over successors and over clipped intervals.
    Uniform,
    /// Choices from a seeded hash of the path so far; interval choices are endpoints.
    Adversarial,
    /// Explicit choices consumed in order.
    Scripted(Vec<Choice>),
}

impl SchedulerPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SchedulerPolicy::Uniform => "uniform",
            SchedulerPolicy::Adversarial => "adversarial",
            SchedulerPolicy::Scripted(_) => "scripted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no enabled transition at location {loc} (step {step})")]
    NoEnabled { loc: LocId, step: u64 },
    #[error("{count} enabled transitions at deterministic location {loc} (step {step})")]
    Overlap { loc: LocId, step: u64, count: usize },
    #[error("scripted scheduler exhausted at step {0}")]
    ScriptExhausted(u64),
    #[error("scripted choice does not fit at step {0}")]
    ScriptMismatch(u64),
    #[error("initial valuation has {got} values, program has {want} variables")]
    Arity { got: usize, want: usize },
    #[error("initial valuation violates the initial condition")]
    OutsideInit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub terminated: bool,
    pub steps: u64,
    /// Transitions taken from a loop head into its body.
    pub iterations: u64,
    pub final_loc: LocId,
    pub final_x: Vec<Rat>,
    pub seed: u64,
}

struct Scheduler<'a> {
    policy: &'a SchedulerPolicy,
    script_pos: usize,
    path_hash: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform dyadic rational in `[a, b]` with 64 random bits.
fn uniform_between(rng: &mut ChaCha8Rng, a: &Rat, b: &Rat) -> Rat {
    let u = Rat::new(BigInt::from(rng.gen::<u64>()), BigInt::one() << 64);
    a + (b - a) * u
}

/// Uniform integer in `[0, d)` by rejection.
fn big_below(rng: &mut ChaCha8Rng, d: &BigInt) -> BigInt {
    let bits = d.bits();
    let words = bits.div_ceil(32) as usize;
    loop {
        let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
        let mut v = BigUint::new(digits);
        let excess = words as u64 * 32 - bits;
        v >>= excess;
        let v = BigInt::from(v);
        if &v < d {
            return v;
        }
    }
}

/// Exact Bernoulli trial with rational success probability.
fn bernoulli(rng: &mut ChaCha8Rng, p: &Rat) -> bool {
    if !p.is_positive() {
        return false;
    }
    if p >= &Rat::one() {
        return true;
    }
    let d = p.denom();
    let draw = match d.to_u64() {
        Some(d64) => BigInt::from(rng.gen_range(0..d64)),
        None => big_below(rng, d),
    };
    &draw < p.numer()
}

fn clipped(i: &Interval) -> (Rat, Rat) {
    let lo = i.lo.clone().unwrap_or_else(|| rat(-CLIP));
    let hi = i.hi.clone().unwrap_or_else(|| rat(CLIP));
    if lo <= hi {
        (lo, hi)
    } else {
        (lo.clone(), lo)
    }
}

fn sample_dist(rng: &mut ChaCha8Rng, d: &DistSpec) -> Rat {
    match d {
        DistSpec::Uniform { a, b } => uniform_between(rng, a, b),
        DistSpec::Bernoulli { p } => {
            if bernoulli(rng, p) {
                Rat::one()
            } else {
                Rat::zero()
            }
        }
        DistSpec::Custom { support, .. } => {
            let (lo, hi) = clipped(support);
            uniform_between(rng, &lo, &hi)
        }
    }
}

impl Scheduler<'_> {
    fn mix(&mut self, loc: LocId, step: u64) -> u64 {
        self.path_hash = splitmix(self.path_hash ^ (loc as u64).rotate_left(32) ^ step);
        self.path_hash
    }

    fn branch(&mut self, rng: &mut ChaCha8Rng, loc: LocId, step: u64, n: usize) -> Result<usize, SimError> {
        match self.policy {
            SchedulerPolicy::Uniform => Ok(rng.gen_range(0..n)),
            SchedulerPolicy::Adversarial => Ok((self.mix(loc, step) % n as u64) as usize),
            SchedulerPolicy::Scripted(cs) => match cs.get(self.script_pos) {
                None => Err(SimError::ScriptExhausted(step)),
                Some(Choice::Branch(i)) if *i < n => {
                    self.script_pos += 1;
                    Ok(*i)
                }
                Some(_) => Err(SimError::ScriptMismatch(step)),
            },
        }
    }

    fn value(&mut self, rng: &mut ChaCha8Rng, loc: LocId, step: u64, i: &Interval) -> Result<Rat, SimError> {
        match self.policy {
            SchedulerPolicy::Uniform => {
                let (lo, hi) = clipped(i);
                Ok(uniform_between(rng, &lo, &hi))
            }
            SchedulerPolicy::Adversarial => {
                let (lo, hi) = clipped(i);
                Ok(if self.mix(loc, step) & 1 == 0 { lo } else { hi })
            }
            SchedulerPolicy::Scripted(cs) => match cs.get(self.script_pos) {
                None => Err(SimError::ScriptExhausted(step)),
                Some(Choice::Value(v)) if i.contains(v) => {
                    self.script_pos += 1;
                    Ok(v.clone())
                }
                Some(_) => Err(SimError::ScriptMismatch(step)),
            },
        }
    }
}

fn guard_holds(t: &Transition, x: &[Rat]) -> bool {
    t.guard.disjuncts.iter().any(|p| p.contains(x).unwrap_or(false))
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Executes one run. `observe` sees every visited configuration, including
/// the initial one at step 0, and may stop the run by returning `false`.
pub fn run_observed(
    g: &Pcfg,
    x_init: &[Rat],
    policy: &SchedulerPolicy,
    cap: u64,
    seed: u64,
    stream: u64,
    observe: &mut dyn FnMut(u64, LocId, &[Rat]) -> bool,
) -> Result<RunResult, SimError> {
    if x_init.len() != g.num_vars() {
        return Err(SimError::Arity { got: x_init.len(), want: g.num_vars() });
    }
    let mut rng = rng_for(seed, stream);
    let mut sched = Scheduler { policy, script_pos: 0, path_hash: splitmix(seed ^ stream.rotate_left(17)) };
    let mut x = x_init.to_vec();
    let mut loc = g.init_loc;
    let mut steps = 0u64;
    let mut iterations = 0u64;
    let heads: Vec<bool> = (0..g.locations.len()).map(|l| g.loop_at_head(l).is_some()).collect();
    loop {
        if loc == g.term || steps >= cap || !observe(steps, loc, &x) {
            break;
        }
        let out = g.outgoing(loc);
        let t = match g.kind(loc) {
            LocKind::Det => {
                let mut enabled = out.iter().filter(|&&t| guard_holds(&g.transitions[t], &x));
                let first = enabled.next().ok_or(SimError::NoEnabled { loc, step: steps })?;
                let extra = enabled.count();
                if extra > 0 {
                    return Err(SimError::Overlap { loc, step: steps, count: extra + 1 });
                }
                &g.transitions[*first]
            }
            LocKind::Prob => {
                let mut chosen = out[out.len() - 1];
                let mut rest = Rat::one();
                for &t in &out[..out.len() - 1] {
                    let p = g.transitions[t].prob.clone().unwrap_or_default();
                    // Conditional probability of this branch given the earlier ones failed.
                    let cond = if rest.is_zero() { Rat::zero() } else { &p / &rest };
                    if bernoulli(&mut rng, &cond) {
                        chosen = t;
                        break;
                    }
                    rest -= p;
                }
                &g.transitions[chosen]
            }
            LocKind::Nondet => {
                let i = sched.branch(&mut rng, loc, steps, out.len())?;
                &g.transitions[out[i]]
            }
            LocKind::Assign => &g.transitions[out[0]],
        };
        if let Some(u) = &t.update {
            let mut v = u.rhs.base.eval(&x).expect("update refers to declared variables");
            if let Some((k, r)) = &u.rhs.random {
                let sample = match r {
                    Random::Sample(d) => sample_dist(&mut rng, d),
                    Random::Ndet(i) => sched.value(&mut rng, loc, steps, i)?,
                };
                v += k * sample;
            }
            x[u.var] = v;
        }
        if heads[loc] && t.target != g.loop_at_head(loc).map_or(usize::MAX, |l| l.exit) {
            iterations += 1;
        }
        loc = t.target;
        steps += 1;
    }
    Ok(RunResult { terminated: loc == g.term, steps, iterations, final_loc: loc, final_x: x, seed })
}

/// Executes one run from `x_init` until termination or `cap` steps.
pub fn run(g: &Pcfg, x_init: &[Rat], policy: &SchedulerPolicy, cap: u64, seed: u64) -> Result<RunResult, SimError> {
    run_observed(g, x_init, policy, cap, seed, 0, &mut |_, _, _| true)
}

/// Checks `x` against the initial condition.
pub fn check_initial(g: &Pcfg, x: &[Rat]) -> Result<(), SimError> {
    if x.len() != g.num_vars() {
        return Err(SimError::Arity { got: x.len(), want: g.num_vars() });
    }
    if g.init.contains(x).unwrap_or(false) {
        Ok(())
    } else {
        Err(SimError::OutsideInit)
    }
}

/// Some point of the initial set: the origin if allowed, otherwise an LP
/// solution. `None` when the initial set is empty.
pub fn default_initial(g: &Pcfg) -> Option<Vec<Rat>> {
    let zero = vec![Rat::zero(); g.num_vars()];
    if g.init.contains(&zero).unwrap_or(false) {
        return Some(zero);
    }
    let mut p = LpProblem::new();
    for c in &g.init.weakened().constraints {
        p.add(c.expr.clone(), Rel::Le, Rat::zero());
    }
    match solve(&p) {
        LpOutcome::Optimal { values, .. } => {
            let x: Vec<Rat> = (0..g.num_vars()).map(|v| values.get(&v).cloned().unwrap_or_default()).collect();
            g.init.contains(&x).unwrap_or(false).then_some(x)
        }
        _ => None,
    }
}

/// Monte Carlo summary over independent runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub trials: u64,
    pub terminated: u64,
    pub frequency: f64,
    /// Means are over terminated runs.
    pub mean_steps: f64,
    pub steps_std_err: f64,
    pub mean_iterations: f64,
    pub iterations_std_err: f64,
    pub max_steps: u64,
    /// Batch means disagree or a single run dominates the total: the sample
    /// mean is not trustworthy.
    pub heavy_tail: bool,
    pub seed: u64,
}

impl Estimate {
    /// 95% normal-approximation half-width of the mean step count.
    pub fn steps_half_width(&self) -> f64 {
        1.96 * self.steps_std_err
    }

    pub fn iterations_half_width(&self) -> f64 {
        1.96 * self.iterations_std_err
    }
}

const BATCHES: usize = 10;

/// Runs `trials` independent runs; trial `i` uses RNG stream `i` of `seed`.
pub fn run_trials(
    g: &Pcfg,
    x_init: &[Rat],
    policy: &SchedulerPolicy,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<Vec<RunResult>, SimError> {
    (0..trials).into_par_iter().map(|i| run_observed(g, x_init, policy, cap, seed, i, &mut |_, _, _| true)).collect()
}

pub fn estimate(
    g: &Pcfg,
    x_init: &[Rat],
    policy: &SchedulerPolicy,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<Estimate, SimError> {
    Ok(summarize(&run_trials(g, x_init, policy, trials, cap, seed)?, seed))
}

fn mean_and_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(results: &[RunResult], seed: u64) -> Estimate {
    let done: Vec<&RunResult> = results.iter().filter(|r| r.terminated).collect();
    let steps: Vec<f64> = done.iter().map(|r| r.steps as f64).collect();
    let iters: Vec<f64> = done.iter().map(|r| r.iterations as f64).collect();
    let (mean_steps, steps_std_err) = mean_and_err(&steps);
    let (mean_iterations, iterations_std_err) = mean_and_err(&iters);
    let max_steps = results.iter().map(|r| r.steps).max().unwrap_or(0);
    let total: f64 = steps.iter().sum();
    let mut heavy_tail = false;
    if steps.len() >= BATCHES * 10 && total > 0.0 {
        let size = steps.len() / BATCHES;
        let means: Vec<f64> = steps.chunks(size).take(BATCHES).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = means.iter().cloned().fold(0.0, f64::max);
        let share = steps.iter().cloned().fold(0.0, f64::max) / total;
        heavy_tail = (hi - lo) / mean_steps > 0.5 || share > 0.05;
    }
    Estimate {
        trials: results.len() as u64,
        terminated: done.len() as u64,
        frequency: if results.is_empty() { 0.0 } else { done.len() as f64 / results.len() as f64 },
        mean_steps,
        steps_std_err,
        mean_iterations,
        iterations_std_err,
        max_steps,
        heavy_tail,
        seed,
    }
}

/// Configurations sampled inside an invariant map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSet {
    pub configs: Vec<(LocId, Vec<Rat>)>,
    /// Locations whose invariant is empty.
    pub empty_locations: Vec<LocId>,
}

/// Offsets from a finite bound probed on unbounded sides.
const LADDER: [i64; 4] = [0, 1, 9, 999];

/// Samples up to `per_location` configurations per location, each satisfying
/// the location's invariant exactly. Candidates are extreme points of the
/// invariant intersected with each outgoing guard (clipped to a box reaching
/// the ladder offsets), ladder points on each coordinate, and random convex
/// combinations of those.
pub fn sample_configs(g: &Pcfg, inv: &InvariantMap, per_location: usize, seed: u64) -> SampleSet {
    let mut out = SampleSet::default();
    let per_loc: Vec<(LocId, Option<Vec<Vec<Rat>>>)> = (0..g.locations.len())
        .into_par_iter()
        .map(|l| {
            let mut rng = rng_for(seed, l as u64);
            (l, sample_location(g, inv.get(l), l, per_location, &mut rng))
        })
        .collect();
    for (l, pts) in per_loc {
        match pts {
            None => out.empty_locations.push(l),
            Some(pts) => out.configs.extend(pts.into_iter().map(|p| (l, p))),
        }
    }
    out
}

fn sample_location(g: &Pcfg, inv: &Polyhedron, l: LocId, count: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<Rat>>> {
    let n = g.num_vars();
    let mut regions = vec![inv.clone()];
    if g.kind(l) == LocKind::Det {
        for &t in g.outgoing(l) {
            let guarded = inv.and(&g.transitions[t].guard().weakened());
            if !regions.contains(&guarded) {
                regions.push(guarded);
            }
        }
    }
    let mut seeds: Vec<Vec<Rat>> = Vec::new();
    for region in &regions {
        let region = clip_box(region, n);
        let mut dirs: Vec<LinExpr> = Vec::new();
        for v in 0..n {
            dirs.push(LinExpr::var(v));
            dirs.push(LinExpr::term(v, rat(-1)));
        }
        dirs.push(LinExpr::zero());
        for _ in 0..n.min(4) {
            dirs.push(LinExpr::from_terms((0..n).map(|v| (v, rat(rng.gen_range(-3..=3)))), Rat::zero()));
        }
        for d in &dirs {
            if let Some(p) = lp_point(&region, d, n) {
                seeds.push(p);
            }
        }
        // Ladder points along each coordinate.
        for v in 0..n {
            let (lo, hi) = bounds_of(&region, v, n);
            for off in LADDER {
                let target = match (&lo, &hi) {
                    (Some(lo), _) => lo + rat(off),
                    (None, Some(hi)) => hi - rat(off),
                    (None, None) => rat(off),
                };
                let fixed = region.and(&Polyhedron::new(vec![
                    LinConstraint::le(&LinExpr::var(v), &LinExpr::constant(target.clone())),
                    LinConstraint::ge(&LinExpr::var(v), &LinExpr::constant(target)),
                ]));
                let d = LinExpr::from_terms((0..n).filter(|&w| w != v).map(|w| (w, rat(-1))), Rat::zero());
                if let Some(p) = lp_point(&fixed, &d, n) {
                    seeds.push(p);
                }
            }
        }
    }
    seeds.retain(|p| inv.contains(p).unwrap_or(false));
    seeds.sort();
    seeds.dedup();
    if seeds.is_empty() {
        return None;
    }
    let mut pts = seeds.clone();
    let mut attempts = 0;
    while pts.len() < count && attempts < count * 4 {
        attempts += 1;
        let k = rng.gen_range(2..=3.min(seeds.len()).max(2));
        let mut weights: Vec<Rat> = (0..k).map(|_| rat(rng.gen_range(1..=16))).collect();
        let total: Rat = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= &total);
        let mut p = vec![Rat::zero(); n];
        for w in &weights {
            let s = &seeds[rng.gen_range(0..seeds.len())];
            for (pi, si) in p.iter_mut().zip(s) {
                *pi += w * si;
            }
        }
        if inv.contains(&p).unwrap_or(false) {
            pts.push(p);
        }
    }
    pts.truncate(count.max(1));
    Some(pts)
}

fn lp_point(region: &Polyhedron, dir: &LinExpr, n: usize) -> Option<Vec<Rat>> {
    let mut p = LpProblem::new();
    for c in &region.constraints {
        p.add(c.expr.clone(), Rel::Le, Rat::zero());
    }
    p.set_objective(Sense::Maximize, dir.clone());
    match solve(&p) {
        LpOutcome::Optimal { values, .. } => Some((0..n).map(|v| values.get(&v).cloned().unwrap_or_default()).collect()),
        _ => None,
    }
}

fn bounds_of(region: &Polyhedron, v: usize, n: usize) -> (Option<Rat>, Option<Rat>) {
    let lo = lp_point(region, &LinExpr::term(v, rat(-1)), n).map(|p| p[v].clone());
    let hi = lp_point(region, &LinExpr::var(v), n).map(|p| p[v].clone());
    (lo, hi)
}

/// The region intersected with a box reaching the ladder from every finite
/// bound, so every LP over it is bounded.
fn clip_box(region: &Polyhedron, n: usize) -> Polyhedron {
    let weak = region.weakened();
    let mut out = weak.clone();
    let reach = rat(LADDER[LADDER.len() - 1]);
    for v in 0..n {
        let up = crate::lp::maximize_over(&weak, &LinExpr::var(v));
        let down = crate::lp::maximize_over(&weak, &LinExpr::term(v, rat(-1)));
        let lo = match &down {
            LpOutcome::Optimal { objective, .. } => Some(-objective.clone()),
            _ => None,
        };
        let hi = match &up {
            LpOutcome::Optimal { objective, .. } => Some(objective.clone()),
            _ => None,
        };
        let (box_lo, box_hi) = match (lo, hi) {
            (Some(_), Some(_)) => continue,
            (Some(l), None) => (l.clone(), l + &reach),
            (None, Some(h)) => (h.clone() - &reach, h),
            (None, None) => (-reach.clone(), reach.clone()),
        };
        out.push(LinConstraint::ge(&LinExpr::var(v), &LinExpr::constant(box_lo)));
        out.push(LinConstraint::le(&LinExpr::var(v), &LinExpr::constant(box_hi)));
    }
    out
}
