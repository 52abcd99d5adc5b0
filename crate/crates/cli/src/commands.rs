//! Command pipelines. Each takes program text (and other inputs) and returns
//! a report; file handling lives in `main`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Value};

use lexrsm::bounds::{bound_value, eci_table, synthesize_eci, BoundError};
use lexrsm::compositional::{prove_compositional, CompositionalVerdict, NcsmCertificate, NcsmConfig};
use lexrsm::frontend::{parse_program, Ast};
use lexrsm::invariants::{
    apply_sidecar, check_inductive, check_invariants_empirically, load_annotations, parse_sidecar, InvariantMap,
};
use lexrsm::lexrsm::{
    pointwise_check, program_digest, synthesize_with_stats, verify_symbolically, Certificate, CertificateError,
    LexRsmMap, Lem, PointwiseReport, SymbolicFailure, SynthesisConfig, SynthesisError,
};
use lexrsm::linear::{fmt_rat, parse_rat, Rat};
use lexrsm::pcfg::{LocId, Pcfg};
use lexrsm::sim::{self, default_initial, sample_configs, RunResult, SchedulerPolicy};

use crate::report::{Checks, InvariantRow, PointwiseSummary, Report, Verdict};

/// Total sampled configurations the pointwise oracle aims for.
const SAMPLE_TARGET: usize = 10_000;
const MAX_PER_LOCATION: usize = 1_000;
const MIN_PER_LOCATION: usize = 20;
/// Failures listed in diagnostics before truncation.
const SHOWN_FAILURES: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PcfgFormat {
    Text,
    Dot,
}

#[derive(Clone, Debug)]
pub struct ProveOptions {
    pub compositional: bool,
    pub bound: bool,
    pub epsilon: Rat,
    pub sample_check: bool,
    /// Samples per location; by default chosen to reach about ten thousand
    /// configurations overall.
    pub samples: Option<usize>,
    pub seed: u64,
    pub emit_pcfg: Option<PcfgFormat>,
    /// Initial valuation for the numeric bound, as `x=5,y=7`.
    pub at: Option<String>,
    /// One-dimensional NCSMs only.
    pub one_dimensional: bool,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions {
            compositional: false,
            bound: false,
            epsilon: Rat::from_integer(1.into()),
            sample_check: true,
            samples: None,
            seed: 0,
            emit_pcfg: None,
            at: None,
            one_dimensional: false,
        }
    }
}

/// Early exit carrying the verdict and a message.
struct Stop(Verdict, String);

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

fn finish(mut report: Report, r: Result<(), Stop>) -> Report {
    if let Err(Stop(verdict, msg)) = r {
        report.verdict = verdict;
        report.solution = false;
        report.diagnostics.push(msg);
    }
    report
}

fn load(source: &str, report: &mut Report) -> Result<(Ast, Pcfg), Stop> {
    let t = Instant::now();
    let ast = parse_program(source).map_err(|e| Stop(Verdict::UsageError, format!("parse error: {e}")))?;
    let g = Pcfg::from_ast(&ast);
    g.validate().map_err(|e| Stop(Verdict::InternalError, format!("malformed graph: {e}")))?;
    report.timings_ms.parse = ms(t);
    report.program_digest = Some(program_digest(&ast));
    Ok((ast, g))
}

fn names(g: &Pcfg) -> impl Fn(usize) -> String + '_ {
    |v| g.var_name(v)
}

fn invariant_rows(g: &Pcfg, inv: &InvariantMap) -> Vec<InvariantRow> {
    (0..inv.len())
        .map(|l| InvariantRow {
            location: format!("l{l}"),
            assertion: inv.get(l).display_with(&names(g)),
            provenance: inv.provenance[l].as_str().to_string(),
        })
        .collect()
}

/// Default invariants plus annotations and sidecar entries. User-supplied
/// facts that are not inductive are simulated; an observed violation stops
/// the pipeline.
fn invariants(g: &Pcfg, sidecar: Option<&str>, seed: u64, report: &mut Report) -> Result<InvariantMap, Stop> {
    let t = Instant::now();
    let mut inv = load_annotations(g);
    let user = sidecar.is_some() || g.loops.iter().any(|l| l.annotation.is_some());
    if let Some(text) = sidecar {
        let entries = parse_sidecar(text, g).map_err(|e| Stop(Verdict::UsageError, format!("invariant file: {e}")))?;
        apply_sidecar(&mut inv, &entries);
    }
    if user {
        let failures = check_inductive(g, &inv);
        if !failures.is_empty() {
            if let Some(x0) = default_initial(g) {
                let rep = check_invariants_empirically(g, &inv, &x0, 200, 10_000, seed);
                if let Some(v) = rep.violations.first() {
                    report.invariants = invariant_rows(g, &inv);
                    return Err(Stop(Verdict::InvariantViolation, format!("invariant violated: {v}")));
                }
            }
            for f in failures {
                let along = f.transition.map_or("the initial condition".to_string(), |t| format!("t{t}"));
                report.diagnostics.push(format!(
                    "warning: invariant not inductive along {along}: {}",
                    f.constraint.display_with(&names(g))
                ));
            }
        }
    }
    report.invariants = invariant_rows(g, &inv);
    report.timings_ms.invariants = ms(t);
    Ok(inv)
}

fn per_location(g: &Pcfg, requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        SAMPLE_TARGET.div_ceil(g.locations.len().max(1)).clamp(MIN_PER_LOCATION, MAX_PER_LOCATION)
    })
}

fn summary(rep: &PointwiseReport) -> PointwiseSummary {
    PointwiseSummary {
        configurations: rep.configurations,
        transitions_checked: rep.transitions_checked,
        failures: rep.failures.len(),
    }
}

fn fmt_point(g: &Pcfg, x: &[Rat]) -> String {
    let parts: Vec<String> = x
        .iter()
        .enumerate()
        .map(|(v, r)| {
            let name = if v < g.num_vars() { g.var_name(v) } else { "choice".to_string() };
            format!("{name}={}", fmt_rat(r))
        })
        .collect();
    format!("({})", parts.join(", "))
}

pub fn fmt_symbolic_failure(g: &Pcfg, f: &SymbolicFailure) -> String {
    let mut s = format!("l{}", f.loc);
    if let Some(t) = f.transition {
        s.push_str(&format!(" {}", t.key()));
    }
    s.push_str(&format!(": {}", f.clause));
    if let Some(w) = &f.witness {
        s.push_str(&format!(" at {}", fmt_point(g, w)));
    }
    if let Some(e) = &f.excess {
        s.push_str(&format!(", excess {}", fmt_rat(e)));
    }
    s
}

fn fmt_pointwise_failures(g: &Pcfg, rep: &PointwiseReport) -> Vec<String> {
    rep.failures
        .iter()
        .take(SHOWN_FAILURES)
        .map(|f| {
            let t = f.transition.map(|t| format!(" {}", t.key())).unwrap_or_default();
            format!("sampled l{}{t}: {} at {}", f.loc, f.clause, fmt_point(g, &f.x))
        })
        .collect()
}

fn lem_json(g: &Pcfg, lem: &Lem, locs: impl Iterator<Item = LocId>) -> Value {
    let m: BTreeMap<String, String> =
        locs.map(|l| (format!("l{l}"), lem.at(l).display_with(&names(g)).to_string())).collect();
    json!(m)
}

/// Parses `x=5,y=7`; every program variable must be given.
pub fn parse_valuation(g: &Pcfg, text: &str) -> Result<Vec<Rat>, String> {
    let mut x: Vec<Option<Rat>> = vec![None; g.num_vars()];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(|| format!("expected name=value, got `{part}`"))?;
        let v = g.vars.iter().position(|n| n == name.trim()).ok_or_else(|| format!("unknown variable `{name}`"))?;
        x[v] = Some(parse_rat(value.trim()).ok_or_else(|| format!("bad number `{value}`"))?);
    }
    x.into_iter()
        .enumerate()
        .map(|(v, r)| r.ok_or_else(|| format!("no value for `{}`", g.var_name(v))))
        .collect()
}

pub fn prove(source: &str, sidecar: Option<&str>, opts: &ProveOptions) -> Report {
    let mode = if opts.compositional {
        "compositional"
    } else if opts.bound {
        "bound"
    } else {
        "monolithic"
    };
    let mut report = Report::new("prove", mode);
    report.seeds.push(opts.seed);
    let r = prove_into(source, sidecar, opts, &mut report);
    finish(report, r)
}

fn prove_into(source: &str, sidecar: Option<&str>, opts: &ProveOptions, report: &mut Report) -> Result<(), Stop> {
    if opts.epsilon <= Rat::from_integer(0.into()) {
        return Err(Stop(Verdict::UsageError, "epsilon must be positive".into()));
    }
    let (_, g) = load(source, report)?;
    match opts.emit_pcfg {
        Some(PcfgFormat::Text) => {
            report.extra.insert("pcfg".into(), json!(g.to_text()));
        }
        Some(PcfgFormat::Dot) => {
            report.extra.insert("pcfg".into(), json!(g.to_dot()));
        }
        None => {}
    }
    let inv = invariants(&g, sidecar, opts.seed, report)?;
    if opts.compositional {
        compositional(&g, &inv, opts, report)
    } else {
        monolithic(&g, &inv, opts, report)
    }
}

fn monolithic(g: &Pcfg, inv: &InvariantMap, opts: &ProveOptions, report: &mut Report) -> Result<(), Stop> {
    let cfg = SynthesisConfig { epsilon: opts.epsilon.clone(), max_dimension: None };
    let (result, stats) = synthesize_with_stats(g, inv, &cfg);
    report.timings_ms.constraint_gen = stats.constraint_gen.as_secs_f64() * 1000.0;
    report.timings_ms.lp = stats.lp.as_secs_f64() * 1000.0;
    report.extra.insert("lp_iterations".into(), json!(stats.iterations));
    let map = match result {
        Ok(map) => map,
        Err(SynthesisError::Recheck(k)) => {
            return Err(Stop(Verdict::InternalError, format!("synthesized component fails its re-check at {k}")));
        }
        Err(e) => {
            if let SynthesisError::NoLinLexRsm { remaining, .. } = &e {
                let keys: Vec<String> = remaining.iter().map(|gt| gt.key()).collect();
                report.extra.insert("unranked".into(), json!(keys));
            }
            return Err(Stop(Verdict::NoLinlexrsm, e.to_string()));
        }
    };
    let t = Instant::now();
    check_map(g, &map, opts, report)?;
    report.timings_ms.verify = ms(t);
    let digest = report.program_digest.clone().expect("digest set on load");
    let cert = Certificate::from_map(g, &digest, &map);
    report.certificate = Some(serde_json::to_value(&cert).expect("certificate serializes"));
    report.dimension = Some(map.dimension());
    report.verdict = Verdict::ProvedAsTermination;
    report.solution = true;
    if opts.bound {
        bound(g, &map, opts, report)?;
    }
    Ok(())
}

/// Both verifiers on our own output; failure is an internal error since an
/// unverified certificate is never emitted.
fn check_map(g: &Pcfg, map: &LexRsmMap, opts: &ProveOptions, report: &mut Report) -> Result<(), Stop> {
    if let Err(fs) = verify_symbolically(g, map) {
        let first = fmt_symbolic_failure(g, &fs[0]);
        return Err(Stop(Verdict::InternalError, format!("synthesized map fails the symbolic check: {first}")));
    }
    let mut checks = Checks { symbolic: true, pointwise: None };
    if opts.sample_check {
        let samples = sample_configs(g, &map.invariants, per_location(g, opts.samples), opts.seed);
        let rep = pointwise_check(g, map, &samples);
        checks.pointwise = Some(summary(&rep));
        if !rep.passed() {
            report.diagnostics.extend(fmt_pointwise_failures(g, &rep));
            report.checks = Some(checks);
            return Err(Stop(Verdict::InternalError, "synthesized map fails the pointwise check".into()));
        }
    }
    report.checks = Some(checks);
    Ok(())
}

fn bound(g: &Pcfg, map: &LexRsmMap, opts: &ProveOptions, report: &mut Report) -> Result<(), Stop> {
    let cert = match synthesize_eci(g, map) {
        Ok(c) => c,
        Err(BoundError::NoEci) => {
            return Err(Stop(Verdict::NoEci, "no bounded expected conditional increase; no runtime bound".into()));
        }
        Err(e) => return Err(Stop(Verdict::InternalError, e.to_string())),
    };
    let eci: BTreeMap<String, String> = eci_table(&cert).into_iter().map(|(k, v)| (k, fmt_rat(&v))).collect();
    let mut payload = json!({
        "eci": eci,
        "c_max": fmt_rat(&cert.c_max()),
        "expression": cert.bound.display_with(&names(g)).to_string(),
        "unit": "pcfg-steps",
        "at": Value::Null,
    });
    if let Some(text) = &opts.at {
        let x = parse_valuation(g, text).map_err(|e| Stop(Verdict::UsageError, format!("--at: {e}")))?;
        let v = bound_value(g, &cert, &x).map_err(|e| Stop(Verdict::UsageError, format!("--at: {e}")))?;
        payload["at"] = json!({ "valuation": text, "value": fmt_rat(&v) });
    }
    report.bound = Some(payload);
    report.verdict = Verdict::BoundCertified;
    Ok(())
}

fn ncsm_json(g: &Pcfg, c: &NcsmCertificate) -> Value {
    let d = &c.decomposition;
    let loc_keys = |s: &std::collections::BTreeSet<LocId>| s.iter().map(|l| format!("l{l}")).collect::<Vec<_>>();
    let levels: BTreeMap<String, usize> = c.levels.iter().map(|(gt, l)| (gt.key(), *l)).collect();
    json!({
        "loop": d.loop_id,
        "head": format!("l{}", d.head),
        "depth": c.depth,
        "dimension": c.dimension(),
        "variables": c.support().into_iter().map(|v| g.var_name(v)).collect::<Vec<_>>(),
        "slice": loc_keys(&d.slice),
        "loops": loc_keys(&d.loops),
        "components": c.components.iter().map(|lem| lem_json(g, lem, d.locations.iter().copied())).collect::<Vec<_>>(),
        "levels": levels,
    })
}

fn compositional(g: &Pcfg, inv: &InvariantMap, opts: &ProveOptions, report: &mut Report) -> Result<(), Stop> {
    let cfg = NcsmConfig { epsilon: opts.epsilon.clone(), max_dimension: opts.one_dimensional.then_some(1) };
    let result = prove_compositional(g, inv, &cfg);
    report.timings_ms.constraint_gen = result.stats.constraint_gen.as_secs_f64() * 1000.0;
    report.timings_ms.lp = result.stats.lp.as_secs_f64() * 1000.0;
    let t = Instant::now();
    let samples = opts.sample_check.then(|| sample_configs(g, inv, per_location(g, opts.samples), opts.seed));
    let mut pointwise = PointwiseSummary { configurations: 0, transitions_checked: 0, failures: 0 };
    for c in &result.ledger {
        if let Err(fs) = c.verify_symbolically(g, inv) {
            let first = fmt_symbolic_failure(g, &fs[0]);
            return Err(Stop(Verdict::InternalError, format!("NCSM for loop {} fails the symbolic check: {first}", c.decomposition.loop_id)));
        }
        if let Some(s) = &samples {
            let rep = c.pointwise_check(g, s);
            pointwise.configurations += rep.configurations;
            pointwise.transitions_checked += rep.transitions_checked;
            pointwise.failures += rep.failures.len();
            if !rep.passed() {
                report.diagnostics.extend(fmt_pointwise_failures(g, &rep));
                return Err(Stop(Verdict::InternalError, format!("NCSM for loop {} fails the pointwise check", c.decomposition.loop_id)));
            }
        }
    }
    report.timings_ms.verify = ms(t);
    report.checks = Some(Checks { symbolic: true, pointwise: samples.map(|_| pointwise) });
    let ledger: Vec<Value> = result.ledger.iter().map(|c| ncsm_json(g, c)).collect();
    report.compositional = Some(json!({
        "ledger": ledger,
        "chaining": "each loop is certified after its nested loops, whose certificates discharge their termination under the same invariant map",
        "nonnegativity_scope": "each loop's own sub-graph (head, body, exit)",
    }));
    report.dimension = result.ledger.iter().map(|c| c.dimension()).max();
    match result.verdict {
        CompositionalVerdict::Terminates => {
            report.verdict = Verdict::ProvedAsTermination;
            report.solution = true;
            Ok(())
        }
        CompositionalVerdict::CannotProve { loop_id, cause } => Err(Stop(
            Verdict::CannotProveCompositional,
            format!("loop {loop_id}: {cause}; supermartingale fallback unavailable"),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub sample_check: bool,
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { sample_check: true, samples: None, seed: 0 }
    }
}

pub fn verify(source: &str, certificate: &str, opts: &VerifyOptions) -> Report {
    let mut report = Report::new("verify", "certificate");
    report.seeds.push(opts.seed);
    let r = verify_into(source, certificate, opts, &mut report);
    finish(report, r)
}

fn verify_into(source: &str, certificate: &str, opts: &VerifyOptions, report: &mut Report) -> Result<(), Stop> {
    let (_, g) = load(source, report)?;
    let cert = Certificate::parse(certificate).map_err(|e| Stop(Verdict::UsageError, e.to_string()))?;
    let digest = report.program_digest.clone().expect("digest set on load");
    let map = cert.resolve(&g, &digest).map_err(|e| {
        let v = match e {
            CertificateError::Json(_) | CertificateError::Format(_) => Verdict::UsageError,
            _ => Verdict::VerifyFailed,
        };
        Stop(v, e.to_string())
    })?;
    report.invariants = invariant_rows(&g, &map.invariants);
    report.dimension = Some(map.dimension());
    let t = Instant::now();
    let inductive = check_inductive(&g, &map.invariants);
    if !inductive.is_empty() {
        for f in &inductive {
            let along = f.transition.map_or("the initial condition".to_string(), |t| format!("t{t}"));
            report.diagnostics.push(format!("not inductive along {along}: {}", f.constraint.display_with(&names(&g))));
        }
        return Err(Stop(Verdict::VerifyFailed, "certificate invariants are not inductive".into()));
    }
    let mut checks = Checks { symbolic: true, pointwise: None };
    let symbolic = verify_symbolically(&g, &map);
    if let Err(fs) = &symbolic {
        checks.symbolic = false;
        report.diagnostics.extend(fs.iter().take(SHOWN_FAILURES).map(|f| fmt_symbolic_failure(&g, f)));
        if fs.len() > SHOWN_FAILURES {
            report.diagnostics.push(format!("… {} more", fs.len() - SHOWN_FAILURES));
        }
    }
    // Both routes run even when the first fails; each reports its own findings.
    if opts.sample_check {
        let samples = sample_configs(&g, &map.invariants, per_location(&g, opts.samples), opts.seed);
        let rep = pointwise_check(&g, &map, &samples);
        checks.pointwise = Some(summary(&rep));
        report.diagnostics.extend(fmt_pointwise_failures(&g, &rep));
    }
    report.timings_ms.verify = ms(t);
    let ok = checks.symbolic && checks.pointwise.as_ref().is_none_or(|p| p.failures == 0);
    report.checks = Some(checks);
    if !ok {
        return Err(Stop(Verdict::VerifyFailed, "certificate rejected".into()));
    }
    report.verdict = Verdict::Verified;
    report.solution = true;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub trials: u64,
    pub cap: u64,
    pub seed: u64,
    pub policy: SchedulerPolicy,
    pub at: Option<String>,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions { trials: 10_000, cap: sim::DEFAULT_CAP, seed: 0, policy: SchedulerPolicy::Uniform, at: None }
    }
}

/// Parses `uniform`, `adversarial` or `scripted:b0,b1,v3/2` (branch indices
/// and interval values).
pub fn parse_policy(text: &str) -> Result<SchedulerPolicy, String> {
    match text {
        "uniform" => Ok(SchedulerPolicy::Uniform),
        "adversarial" => Ok(SchedulerPolicy::Adversarial),
        _ => {
            let list = text.strip_prefix("scripted:").ok_or_else(|| format!("unknown policy `{text}`"))?;
            list.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|c| {
                    if let Some(b) = c.strip_prefix('b') {
                        b.parse().map(sim::Choice::Branch).map_err(|_| format!("bad branch `{c}`"))
                    } else if let Some(v) = c.strip_prefix('v') {
                        parse_rat(v).map(sim::Choice::Value).ok_or_else(|| format!("bad value `{c}`"))
                    } else {
                        Err(format!("scripted choices are b<index> or v<number>, got `{c}`"))
                    }
                })
                .collect::<Result<_, _>>()
                .map(SchedulerPolicy::Scripted)
        }
    }
}

pub fn simulate(source: &str, opts: &SimulateOptions) -> (Report, Vec<RunResult>) {
    let mut report = Report::new("simulate", opts.policy.name());
    report.seeds.push(opts.seed);
    let mut runs = Vec::new();
    let r = simulate_into(source, opts, &mut report, &mut runs);
    (finish(report, r), runs)
}

fn simulate_into(source: &str, opts: &SimulateOptions, report: &mut Report, runs: &mut Vec<RunResult>) -> Result<(), Stop> {
    let (_, g) = load(source, report)?;
    let x0 = match &opts.at {
        Some(text) => parse_valuation(&g, text).map_err(|e| Stop(Verdict::UsageError, format!("--at: {e}")))?,
        None => default_initial(&g).ok_or_else(|| Stop(Verdict::UsageError, "initial set is empty".into()))?,
    };
    sim::check_initial(&g, &x0).map_err(|e| Stop(Verdict::UsageError, e.to_string()))?;
    *runs = sim::run_trials(&g, &x0, &opts.policy, opts.trials, opts.cap, opts.seed)
        .map_err(|e| Stop(Verdict::InternalError, format!("simulation: {e}")))?;
    let est = sim::summarize(runs, opts.seed);
    report.simulation = Some(json!({
        "initial": fmt_point(&g, &x0),
        "trials": est.trials,
        "cap": opts.cap,
        "terminated": est.terminated,
        "frequency": est.frequency,
        "mean_steps": est.mean_steps,
        "steps_std_err": est.steps_std_err,
        "mean_iterations": est.mean_iterations,
        "iterations_std_err": est.iterations_std_err,
        "max_steps": est.max_steps,
        "heavy_tail": est.heavy_tail,
        "note": "means are over terminated runs; runs hitting the cap count as non-terminated",
    }));
    if est.heavy_tail {
        report.diagnostics.push("warning: heavy-tailed step counts; the sample mean is unreliable".into());
    }
    report.verdict = Verdict::Simulated;
    report.solution = true;
    Ok(())
}

/// Per-trial results as CSV.
pub fn runs_csv(g_vars: &[String], runs: &[RunResult]) -> String {
    let mut out = format!("trial,terminated,steps,iterations,final_location,{}\n", g_vars.join(","));
    for (i, r) in runs.iter().enumerate() {
        let xs: Vec<String> = r.final_x.iter().map(fmt_rat).collect();
        out.push_str(&format!("{i},{},{},{},l{},{}\n", r.terminated, r.steps, r.iterations, r.final_loc, xs.join(",")));
    }
    out
}

/// Per-trial results as a JSON array.
pub fn runs_json(g_vars: &[String], runs: &[RunResult]) -> String {
    let rows: Vec<Value> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let x: BTreeMap<&str, String> = g_vars.iter().map(String::as_str).zip(r.final_x.iter().map(fmt_rat)).collect();
            json!({
                "trial": i,
                "terminated": r.terminated,
                "steps": r.steps,
                "iterations": r.iterations,
                "final_location": format!("l{}", r.final_loc),
                "final": x,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
    s.push('\n');
    s
}

/// One-line human summary.
pub fn headline(report: &Report) -> String {
    let v = serde_json::to_value(report.verdict).expect("verdict serializes");
    let mut s = format!("{}: {}", report.command, v.as_str().unwrap_or("?"));
    if let Some(d) = report.dimension {
        s.push_str(&format!(" (dimension {d})"));
    }
    if let Some(b) = &report.bound {
        s.push_str(&format!("; bound {}", b["expression"].as_str().unwrap_or("?")));
        if let Some(v) = b["at"]["value"].as_str() {
            s.push_str(&format!(" = {v}"));
        }
    }
    if let Some(sim) = &report.simulation {
        s.push_str(&format!(
            "; frequency {} mean steps {:.3} mean iterations {:.3}",
            sim["frequency"], sim["mean_steps"].as_f64().unwrap_or(0.0), sim["mean_iterations"].as_f64().unwrap_or(0.0)
        ));
    }
    s
}
