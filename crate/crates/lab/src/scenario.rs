//! `scenario`: scripted runs on the hand-built fixtures, each reduced to a
//! list of named checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use ccn_dart::fixtures::{fig1_rankloop, fig1_stale, fig2_sharing, Fixture};
use ccn_dart::sim::{
    run, ConsumerSpec, OutcomeKind, Request, Scheme, SimConfig, SimError, SimInput, SimOutcome,
    Workload,
};
use ccn_dart::{CachingMode, ConsumerId, Dart, Hop, NackCode, Name, RouterId, SimDuration, SimTime};

use crate::error::LabError;
use crate::run::write_atomic;

pub const SCENARIOS: [&str; 3] = ["fig1-rankloop", "fig1-stale", "fig2-sharing"];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub scenario: String,
    pub checks: Vec<Check>,
    /// Packet trace of every run, each introduced by a `# <scheme>` line.
    pub trace: Vec<String>,
}

impl ScenarioReport {
    fn new(scenario: &str) -> Self {
        ScenarioReport { scenario: scenario.to_string(), checks: Vec::new(), trace: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    fn expect_eq<T: PartialEq + std::fmt::Debug>(&mut self, name: &str, got: T, want: T) {
        let detail = format!("got {got:?}, want {want:?}");
        self.check(name, got == want, detail);
    }

    fn add_trace(&mut self, scheme: Scheme, out: &SimOutcome) {
        self.trace.push(format!("# {scheme}"));
        self.trace.extend(out.trace.iter().cloned());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let verdict = if self.passed() { "passed" } else { "FAILED" };
        let _ = writeln!(s, "scenario {} {verdict}", self.scenario);
        s
    }
}

#[derive(Clone, Debug, Default)]
pub struct ScenarioOptions {
    pub audit: Option<bool>,
    pub trace: Option<PathBuf>,
}

fn config(scheme: Scheme, caching: CachingMode, audit: bool) -> SimConfig {
    SimConfig {
        scheme,
        caching,
        audit,
        warmup_fraction: 0.0,
        record_trace: true,
        record_outcomes: true,
        ..SimConfig::default()
    }
}

fn scripted(consumers: Vec<ConsumerSpec>, requests: Vec<Request>, publish: Vec<Name>) -> SimInput {
    SimInput {
        consumers,
        workload: Workload::Scripted { requests, duration: SimDuration::from_secs(1) },
        publish,
        script: Vec::new(),
    }
}

fn consumer(f: &Fixture, id: u32, at: &str) -> ConsumerSpec {
    ConsumerSpec { id: ConsumerId(id), router: f.router(at) }
}

fn request(ms: u64, consumer: u32, name: &Name) -> Request {
    Request { time: SimTime::from_millis(ms), consumer: ConsumerId(consumer), name: name.clone() }
}

fn simulate(
    scenario: &str,
    f: &Fixture,
    input: &SimInput,
    cfg: &SimConfig,
) -> Result<SimOutcome, LabError> {
    run(&f.topology, &f.fibs, input, cfg).map_err(|e| match e {
        SimError::Audit { violation, trace } => {
            LabError::Audit { cell: format!("{scenario}/{}", cfg.scheme), violation, trace }
        }
        other => LabError::Assertion(format!("{scenario}: {other}")),
    })
}

/// Routers a trace line was logged at, for lines carrying `tag`.
fn routers_logging<'a>(trace: &'a [String], tag: &'a str) -> impl Iterator<Item = (RouterId, &'a str)> + 'a {
    trace.iter().filter(move |l| l.contains(tag)).filter_map(|l| {
        let id = l.split(' ').nth(1)?.parse().ok()?;
        Some((RouterId(id), l.as_str()))
    })
}

fn interest_path(f: &Fixture, trace: &[String]) -> Vec<&'static str> {
    routers_logging(trace, " RX INT ").map(|(r, _)| f.label(r)).collect()
}

fn fig1_rankloop_checks(audit: bool) -> Result<ScenarioReport, LabError> {
    let name = "fig1-rankloop";
    let f = fig1_rankloop();
    let mut rep = ScenarioReport::new(name);
    let input = scripted(vec![consumer(&f, 0, "y")], vec![request(0, 0, &f.object)], vec![f.object.clone()]);
    let out = simulate(name, &f, &input, &config(Scheme::Dart, CachingMode::OnPath, audit))?;
    rep.add_trace(Scheme::Dart, &out);

    rep.expect_eq("dart interest path", interest_path(&f, &out.trace), vec!["y", "a", "b", "q", "h", "z"]);
    rep.expect_eq("loop nacks", out.report.totals.loop_nacks_sent, 0);
    rep.expect_eq("request satisfied", out.report.requests.satisfied, 1);
    if let Some(a) = &out.report.audit {
        rep.expect_eq("symmetric response", (a.symmetric_responses, a.loops_detected), (1, 0));
    }
    Ok(rep)
}

fn fig1_stale_checks(audit: bool) -> Result<ScenarioReport, LabError> {
    let name = "fig1-stale";
    let f = fig1_stale();
    let mut rep = ScenarioReport::new(name);
    let input = scripted(
        vec![consumer(&f, 0, "y"), consumer(&f, 1, "x")],
        vec![request(0, 0, &f.object), request(20, 1, &f.object)],
        vec![f.object.clone()],
    );

    let out = simulate(name, &f, &input, &config(Scheme::Dart, CachingMode::OnPath, audit))?;
    rep.add_trace(Scheme::Dart, &out);
    let at = |out: &SimOutcome, l: &str| out.routers[f.router(l).index()].forwarder().counters().clone();
    rep.expect_eq("dart: loop nacks sent by b", at(&out, "b").loop_nacks_sent, 2);
    let nacked: Vec<ConsumerId> = out
        .outcomes
        .iter()
        .filter(|o| o.kind == OutcomeKind::Nack(NackCode::Loop))
        .map(|o| o.consumer)
        .collect();
    rep.expect_eq("dart: consumers at y and x get a loop nack", nacked, vec![ConsumerId(0), ConsumerId(1)]);
    rep.expect_eq("dart: nothing left unanswered", out.report.requests.timed_out, 0);

    let out = simulate(name, &f, &input, &config(Scheme::Ndn, CachingMode::OnPath, audit))?;
    rep.add_trace(Scheme::Ndn, &out);
    let aggregated: Vec<u64> = ["a", "x"].iter().map(|l| at(&out, l).aggregated).collect();
    rep.check(
        "ndn: interests aggregated at a and x",
        aggregated.iter().all(|&n| n >= 1),
        format!("aggregated a={} x={}", aggregated[0], aggregated[1]),
    );
    let expired: Vec<u64> = ["y", "a", "b", "x"].iter().map(|l| at(&out, l).pit_expired).collect();
    rep.expect_eq("ndn: pit entries expire at y, a, b, x", expired, vec![1, 1, 1, 1]);
    rep.expect_eq(
        "ndn: no data and no nack",
        (out.report.requests.satisfied, out.report.requests.nacked),
        (0, 0),
    );
    let gave_up = out.outcomes.iter().all(|o| o.kind == OutcomeKind::GaveUp);
    rep.check("ndn: every consumer gives up", gave_up && !out.outcomes.is_empty(), format!("{} outcomes", out.outcomes.len()));
    Ok(rep)
}

/// One expected DART entry in terms of dart variables such as `a(k)`: the
/// letter before the parenthesis is the router that assigned the value.
#[derive(Clone, Copy, Debug)]
struct Mapping {
    at: &'static str,
    /// `None` for a locally originated (SELF) route.
    pred: Option<&'static str>,
    pred_var: &'static str,
    succ: &'static str,
    succ_var: &'static str,
}

const fn map(
    at: &'static str,
    pred: Option<&'static str>,
    pred_var: &'static str,
    succ: &'static str,
    succ_var: &'static str,
) -> Mapping {
    Mapping { at, pred, pred_var, succ, succ_var }
}

/// Routes (a, r, s, d), (x, b, c, d) and (b, c, d).
const FIG2_MAPPINGS: [Mapping; 8] = [
    map("a", None, "a(k)", "r", "a(k)"),
    map("r", Some("a"), "a(k)", "s", "r(m)"),
    map("s", Some("r"), "r(m)", "d", "s(j)"),
    map("x", None, "x(i)", "b", "x(i)"),
    map("b", Some("x"), "x(i)", "c", "b(p)"),
    map("b", None, "b(q)", "c", "b(q)"),
    map("c", Some("b"), "b(p)", "d", "c(u)"),
    map("c", Some("b"), "b(q)", "d", "c(v)"),
];

/// A dart value together with the router that assigned it.
type DartValue = (RouterId, Dart);

#[derive(Clone, Copy, Debug)]
struct Observed {
    at: RouterId,
    pred: Option<RouterId>,
    pred_dart: DartValue,
    succ: RouterId,
    succ_dart: DartValue,
}

fn owner(f: &Fixture, var: &str) -> RouterId {
    f.router(&var[..var.find('(').unwrap_or(var.len())])
}

struct Matcher<'a> {
    f: &'a Fixture,
    expected: &'a [Mapping],
    observed: &'a [Observed],
    used: Vec<bool>,
    binding: BTreeMap<&'static str, DartValue>,
}

impl Matcher<'_> {
    fn bind(&mut self, var: &'static str, value: DartValue, added: &mut Vec<&'static str>) -> bool {
        if owner(self.f, var) != value.0 {
            return false;
        }
        match self.binding.get(var) {
            Some(v) => *v == value,
            None => {
                // Distinct variables stand for distinct values.
                if self.binding.values().any(|v| *v == value) {
                    return false;
                }
                self.binding.insert(var, value);
                added.push(var);
                true
            }
        }
    }

    fn solve(&mut self, i: usize) -> bool {
        let Some(m) = self.expected.get(i).copied() else { return true };
        for j in 0..self.observed.len() {
            let o = self.observed[j];
            if self.used[j]
                || o.at != self.f.router(m.at)
                || o.pred != m.pred.map(|p| self.f.router(p))
                || o.succ != self.f.router(m.succ)
            {
                continue;
            }
            let mut added = Vec::new();
            if self.bind(m.pred_var, o.pred_dart, &mut added) && self.bind(m.succ_var, o.succ_dart, &mut added) {
                self.used[j] = true;
                if self.solve(i + 1) {
                    return true;
                }
                self.used[j] = false;
            }
            for v in added {
                self.binding.remove(v);
            }
        }
        false
    }
}

/// Finds a renaming of dart variables under which `observed` is exactly
/// `expected`.
fn match_mappings(
    f: &Fixture,
    expected: &[Mapping],
    observed: &[Observed],
) -> Option<BTreeMap<&'static str, DartValue>> {
    if expected.len() != observed.len() {
        return None;
    }
    let mut m = Matcher { f, expected, observed, used: vec![false; observed.len()], binding: BTreeMap::new() };
    m.solve(0).then_some(m.binding)
}

fn observed_darts(f: &Fixture, out: &SimOutcome, routers: &[&str]) -> Vec<Observed> {
    let mut seen = Vec::new();
    for l in routers {
        let at = f.router(l);
        let node = out.routers[at.index()].as_dart().expect("dart run");
        for e in node.darts().entries_sorted() {
            let (pred, pred_owner) = match e.predecessor {
                Hop::Local => (None, at),
                Hop::Router(p) => (Some(p), p),
            };
            seen.push(Observed {
                at,
                pred,
                pred_dart: (pred_owner, e.predecessor_dart),
                succ: e.successor,
                succ_dart: (at, e.successor_dart),
            });
        }
    }
    seen
}

fn fig2_sharing_checks(audit: bool) -> Result<ScenarioReport, LabError> {
    let name = "fig2-sharing";
    let f = fig2_sharing();
    let mut rep = ScenarioReport::new(name);
    let j = f.object.clone();
    let i: Name = "/anchored/i".parse().expect("valid name");
    let k: Name = "/anchored/k".parse().expect("valid name");
    let l: Name = "/anchored/l".parse().expect("valid name");

    // Four consumers at a share j, three of them also ask for i; x and b
    // each ask for their own object.
    let consumers = vec![
        consumer(&f, 0, "a"),
        consumer(&f, 1, "a"),
        consumer(&f, 2, "a"),
        consumer(&f, 3, "a"),
        consumer(&f, 4, "x"),
        consumer(&f, 5, "b"),
    ];
    let requests = vec![
        request(0, 0, &j),
        request(1, 1, &j),
        request(2, 2, &j),
        request(3, 3, &j),
        request(4, 0, &i),
        request(5, 1, &i),
        request(6, 2, &i),
        request(0, 4, &k),
        request(0, 5, &l),
    ];
    let issued = requests.len();
    let input = scripted(consumers, requests, vec![j.clone(), i.clone(), k, l]);
    let out = simulate(name, &f, &input, &config(Scheme::Dart, CachingMode::None, audit))?;
    rep.add_trace(Scheme::Dart, &out);

    let a = f.router("a");
    for n in [&j, &i] {
        let sent = routers_logging(&out.trace, " TX INT ")
            .filter(|(r, line)| *r == a && line.contains(&format!(" name={n} ")))
            .count();
        rep.expect_eq(&format!("one interest for {n} leaves a"), sent, 1);
    }
    let delivered = out.outcomes.iter().filter(|o| matches!(o.kind, OutcomeKind::Data { .. })).count();
    rep.expect_eq("every consumer receives data", (delivered, out.outcomes.len()), (issued, issued));

    let observed = observed_darts(&f, &out, &["a", "r", "s", "x", "b", "c"]);
    match match_mappings(&f, &FIG2_MAPPINGS, &observed) {
        Some(binding) => {
            let shown: Vec<String> =
                binding.iter().map(|(v, (r, d))| format!("{v}={}:{d}", f.label(*r))).collect();
            rep.check("dart mappings match the route-sharing table", true, shown.join(" "));
        }
        None => {
            let shown: Vec<String> = observed
                .iter()
                .map(|o| {
                    let pred = o.pred.map_or("self", |p| f.label(p));
                    format!(
                        "{}:({pred},{})->({},{})",
                        f.label(o.at),
                        o.pred_dart.1,
                        f.label(o.succ),
                        o.succ_dart.1
                    )
                })
                .collect();
            rep.check("dart mappings match the route-sharing table", false, format!("observed {}", shown.join(" ")));
        }
    }
    Ok(rep)
}

/// Runs a named scenario. Failed checks are reported, not raised; callers
/// turn them into an assertion failure with [`ScenarioReport::passed`].
pub fn run_scenario(name: &str, audit: bool) -> Result<ScenarioReport, LabError> {
    match name {
        "fig1-rankloop" => fig1_rankloop_checks(audit),
        "fig1-stale" => fig1_stale_checks(audit),
        "fig2-sharing" => fig2_sharing_checks(audit),
        other => Err(LabError::Input {
            path: PathBuf::from(other),
            msg: format!("unknown scenario; expected one of {}", SCENARIOS.join(", ")),
        }),
    }
}

/// Runs a scenario, writes its trace if asked, and fails with an assertion
/// error when any check fails.
pub fn cmd_scenario(name: &str, opts: &ScenarioOptions) -> Result<ScenarioReport, LabError> {
    let rep = run_scenario(name, opts.audit.unwrap_or(true))?;
    if let Some(path) = &opts.trace {
        let mut text = rep.trace.join("\n");
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    Ok(rep)
}
