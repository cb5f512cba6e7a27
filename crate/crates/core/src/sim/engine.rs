use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::content::CachingMode;
use crate::dart::{DartConfig, DartNode};
use crate::fib::{inject_stale_distances, override_rankings, DistanceEdit, FibError, Fibs};
use crate::forwarder::{Emission, Forwarder, NodeCounters, TableSizes};
use crate::ids::{ConsumerId, Face, RouterId};
use crate::message::{Bytes, NackCode, Packet};
use crate::name::{Name, Prefix};
use crate::ndn::{NdnConfig, NdnNode};
use crate::scalar::Scalar;
use crate::sim::audit::{AuditViolation, Auditor, ChainId};
use crate::sim::metrics::{MetricsReport, RequestTally, RouterMetrics};
use crate::sim::workload::{
    generate_workload, Catalog, ConsumerSpec, NonceSource, Request, WorkloadError, WorkloadSpec,
    WorkloadStream,
};
use crate::stats::Summary;
use crate::time::{SimDuration, SimTime};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Dart,
    Ndn,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Dart => "dart",
            Scheme::Ndn => "ndn",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dart" | "ccn-dart" => Ok(Scheme::Dart),
            "ndn" => Ok(Scheme::Ndn),
            other => Err(format!("unknown scheme {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub caching: CachingMode,
    pub dart_ttl: SimDuration,
    pub pit_lifetime: SimDuration,
    /// Period of DART eviction / PIT expiry sweeps.
    pub sweep_interval: SimDuration,
    pub sample_interval: SimDuration,
    /// Leading share of the run excluded from measurements.
    pub warmup_fraction: f64,
    pub consumer_timeout: SimDuration,
    /// Total sends per request, the first included.
    pub max_tries: u32,
    pub cs_capacity: Option<usize>,
    /// Extra time after the last request for responses to drain.
    pub drain: SimDuration,
    pub audit: bool,
    pub record_trace: bool,
    pub record_outcomes: bool,
    pub nonce_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scheme: Scheme::Dart,
            caching: CachingMode::OnPath,
            dart_ttl: SimDuration::from_secs(10),
            pit_lifetime: SimDuration::from_secs(4),
            sweep_interval: SimDuration::from_secs(1),
            sample_interval: SimDuration::from_millis(100),
            warmup_fraction: 0.1,
            consumer_timeout: SimDuration::from_secs(1),
            max_tries: 3,
            cs_capacity: None,
            drain: SimDuration::from_secs(5),
            audit: true,
            record_trace: false,
            record_outcomes: false,
            nonce_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Workload {
    Generated(WorkloadSpec),
    /// Explicit requests; the run lasts `duration` plus the drain period.
    Scripted { requests: Vec<Request>, duration: SimDuration },
}

impl Workload {
    pub fn duration(&self) -> SimDuration {
        match self {
            Workload::Generated(s) => s.duration,
            Workload::Scripted { duration, .. } => *duration,
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            Workload::Generated(s) => s.per_router_rate,
            Workload::Scripted { .. } => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScriptAction {
    EditDistances(Vec<DistanceEdit>),
    Rerank { router: RouterId, prefix: Prefix, order: Vec<RouterId> },
    /// The link stops carrying packets; both ends drop routes and state over it.
    LinkDown(RouterId, RouterId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScriptedEvent {
    pub time: SimTime,
    pub action: ScriptAction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimInput {
    pub consumers: Vec<ConsumerSpec>,
    pub workload: Workload,
    /// Objects stored at every anchor of their prefix, on top of the
    /// catalog of a generated workload.
    pub publish: Vec<Name>,
    pub script: Vec<ScriptedEvent>,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation input: {0}")]
    Input(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("scripted FIB edit failed: {0}")]
    Fib(#[from] FibError),
    #[error("audit violation: {violation}")]
    Audit { violation: Box<AuditViolation>, trace: Vec<String> },
}

/// A router of either scheme.
#[derive(Clone, Debug)]
pub enum Router {
    Dart(DartNode),
    Ndn(NdnNode),
}

impl Router {
    pub fn forwarder(&self) -> &dyn Forwarder {
        match self {
            Router::Dart(n) => n,
            Router::Ndn(n) => n,
        }
    }

    pub fn forwarder_mut(&mut self) -> &mut dyn Forwarder {
        match self {
            Router::Dart(n) => n,
            Router::Ndn(n) => n,
        }
    }

    pub fn as_dart(&self) -> Option<&DartNode> {
        match self {
            Router::Dart(n) => Some(n),
            Router::Ndn(_) => None,
        }
    }

    pub fn as_ndn(&self) -> Option<&NdnNode> {
        match self {
            Router::Ndn(n) => Some(n),
            Router::Dart(_) => None,
        }
    }
}

/// Current table sizes of every router, in router order.
pub fn sample_table_sizes(routers: &[Router]) -> Vec<TableSizes> {
    routers.iter().map(|r| r.forwarder().table_sizes()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    Data { delay: SimDuration },
    Nack(NackCode),
    GaveUp,
}

/// What happened to one consumer request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsumerOutcome {
    pub time: SimTime,
    pub consumer: ConsumerId,
    pub name: Name,
    pub kind: OutcomeKind,
}

#[derive(Debug)]
pub struct SimOutcome {
    pub report: MetricsReport,
    pub routers: Vec<Router>,
    pub trace: Vec<String>,
    pub outcomes: Vec<ConsumerOutcome>,
}

enum EventKind {
    Deliver { from: RouterId, to: RouterId, packet: Packet, chain: Option<ChainId> },
    Request(Request),
    /// `request` identifies the outstanding request the timer was armed for,
    /// so a timer left over from an earlier request for the same name is ignored.
    Retry { consumer: usize, name: Name, request: u64, attempt: u32 },
    Sweep,
    Sample,
    Script(usize),
}

struct Event {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

struct Outstanding {
    serial: u64,
    issued: Vec<SimTime>,
    tries: u32,
}

struct ConsumerState {
    id: ConsumerId,
    router: RouterId,
    outstanding: HashMap<Name, Outstanding>,
}

struct RouterTally {
    table_sum: u64,
    table_max: u64,
    rct_sum: u64,
    interests: u64,
}

struct Sim<'a> {
    config: &'a SimConfig,
    rate: f64,
    routers: Vec<Router>,
    links: HashMap<(RouterId, RouterId), SimDuration>,
    consumers: Vec<ConsumerState>,
    consumer_index: HashMap<ConsumerId, usize>,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    next_request: u64,
    stream: Option<WorkloadStream>,
    nonces: NonceSource,
    auditor: Option<Auditor>,
    script: Vec<ScriptedEvent>,
    window_start: SimTime,
    window_end: SimTime,
    tallies: Vec<RouterTally>,
    samples: u64,
    delays_ms: Vec<f64>,
    requests: RequestTally,
    link_drops: u64,
    trace: Vec<String>,
    outcomes: Vec<ConsumerOutcome>,
}

fn trace_fields(packet: &Packet) -> String {
    let h = packet.hop_count().map_or("-".to_string(), |h| h.to_string());
    let d = packet.dart().map_or("-".to_string(), |d| d.to_string());
    format!("{} name={} h={} dart={}", packet.kind().tag(), packet.name(), h, d)
}

/// Runs one simulation to completion.
///
/// `fibs` must hold an entry for every router of `topology`; anchors come
/// from the topology.
pub fn run<S: Scalar>(
    topology: &Topology<S>,
    fibs: &Fibs,
    input: &SimInput,
    config: &SimConfig,
) -> Result<SimOutcome, SimError> {
    let mut sim = Sim::new(topology, fibs, input, config)?;
    sim.run_loop()?;
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new<S: Scalar>(
        topology: &Topology<S>,
        fibs: &Fibs,
        input: &SimInput,
        config: &'a SimConfig,
    ) -> Result<Self, SimError> {
        if config.max_tries == 0 {
            return Err(SimError::Input("max_tries must be at least 1".into()));
        }
        if config.sample_interval == SimDuration::ZERO || config.sweep_interval == SimDuration::ZERO
        {
            return Err(SimError::Input("timer intervals must be positive".into()));
        }
        if !(0.0..1.0).contains(&config.warmup_fraction) {
            return Err(SimError::Input("warmup_fraction must be in [0, 1)".into()));
        }

        let mut routers = Vec::with_capacity(topology.router_count());
        for r in topology.routers() {
            let fib = fibs
                .get(&r)
                .cloned()
                .ok_or_else(|| SimError::Input(format!("no FIB for router {r}")))?;
            let anchored: Vec<Prefix> = topology.anchored_at(r).cloned().collect();
            routers.push(match config.scheme {
                Scheme::Dart => Router::Dart(DartNode::new(
                    r,
                    fib,
                    anchored,
                    DartConfig {
                        caching: config.caching,
                        dart_ttl: config.dart_ttl,
                        cs_capacity: config.cs_capacity,
                    },
                )),
                Scheme::Ndn => Router::Ndn(NdnNode::new(
                    r,
                    fib,
                    anchored,
                    NdnConfig {
                        caching: config.caching,
                        pit_lifetime: config.pit_lifetime,
                        cs_capacity: config.cs_capacity,
                    },
                )),
            });
        }

        let mut links = HashMap::new();
        for l in topology.links() {
            links.insert((l.a, l.b), l.delay);
            links.insert((l.b, l.a), l.delay);
        }

        let mut consumers = Vec::new();
        let mut consumer_index = HashMap::new();
        for c in &input.consumers {
            if c.router.index() >= routers.len() {
                return Err(SimError::Input(format!("consumer {} on unknown router", c.id)));
            }
            if consumer_index.insert(c.id, consumers.len()).is_some() {
                return Err(SimError::Input(format!("consumer {} declared twice", c.id)));
            }
            consumers.push(ConsumerState {
                id: c.id,
                router: c.router,
                outstanding: HashMap::new(),
            });
        }

        let duration = input.workload.duration();
        let window_start = SimTime::ZERO + duration.mul_f64(config.warmup_fraction);
        let window_end = SimTime::ZERO + duration;

        let mut sim = Sim {
            config,
            rate: input.workload.rate(),
            routers,
            links,
            consumers,
            consumer_index,
            queue: BinaryHeap::new(),
            seq: 0,
            next_request: 0,
            stream: None,
            nonces: NonceSource::new(config.nonce_seed),
            auditor: (config.audit && config.scheme == Scheme::Dart).then(Auditor::default),
            script: input.script.clone(),
            window_start,
            window_end,
            tallies: (0..topology.router_count())
                .map(|_| RouterTally { table_sum: 0, table_max: 0, rct_sum: 0, interests: 0 })
                .collect(),
            samples: 0,
            delays_ms: Vec::new(),
            requests: RequestTally::default(),
            link_drops: 0,
            trace: Vec::new(),
            outcomes: Vec::new(),
        };

        let mut to_publish: Vec<Name> = input.publish.clone();
        match &input.workload {
            Workload::Generated(spec) => {
                let prefixes: Vec<Prefix> = topology.anchors().keys().cloned().collect();
                let catalog = Catalog::new(&prefixes, spec.catalog_size)?;
                to_publish.extend(catalog.names().iter().cloned());
                let mut stream = generate_workload(spec, &input.consumers, catalog)?;
                if let Some(first) = stream.next() {
                    sim.push(first.time, EventKind::Request(first));
                }
                sim.stream = Some(stream);
            }
            Workload::Scripted { requests, .. } => {
                for req in requests {
                    if !sim.consumer_index.contains_key(&req.consumer) {
                        return Err(SimError::Input(format!(
                            "request from undeclared consumer {}",
                            req.consumer
                        )));
                    }
                    sim.push(req.time, EventKind::Request(req.clone()));
                }
            }
        }
        for name in to_publish {
            for (prefix, anchors) in topology.anchors() {
                if prefix.matches(&name) {
                    for a in anchors {
                        let payload: Bytes = Bytes::from(name.to_string().into_bytes());
                        sim.routers[a.index()].forwarder_mut().publish(
                            name.clone(),
                            Bytes::from(Vec::new()),
                            payload,
                        );
                    }
                }
            }
        }

        for i in 0..sim.script.len() {
            let t = sim.script[i].time;
            sim.push(t, EventKind::Script(i));
        }
        sim.push(SimTime::ZERO + config.sweep_interval, EventKind::Sweep);
        sim.push(window_start, EventKind::Sample);
        Ok(sim)
    }

    fn push(&mut self, time: SimTime, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Reverse(Event { time, seq: self.seq, kind }));
    }

    fn stop_time(&self) -> SimTime {
        self.window_end + self.config.drain
    }

    fn in_window(&self, t: SimTime) -> bool {
        t >= self.window_start && t <= self.window_end
    }

    fn log(&mut self, now: SimTime, router: RouterId, dir: &str, packet: &Packet, peer: Face) {
        if self.config.record_trace {
            self.trace.push(format!(
                "t={} {} {} {} peer={}",
                now,
                router,
                dir,
                trace_fields(packet),
                peer
            ));
        }
    }

    fn run_loop(&mut self) -> Result<(), SimError> {
        let stop = self.stop_time();
        while let Some(Reverse(ev)) = self.queue.pop() {
            if ev.time > stop {
                break;
            }
            let now = ev.time;
            match ev.kind {
                EventKind::Deliver { from, to, packet, chain } => {
                    self.deliver(now, from, to, packet, chain)?
                }
                EventKind::Request(req) => {
                    if let Some(stream) = self.stream.as_mut() {
                        if let Some(next) = stream.next() {
                            self.push(next.time, EventKind::Request(next));
                        }
                    }
                    self.consumer_request(now, req)?;
                }
                EventKind::Retry { consumer, name, request, attempt } => {
                    self.retry(now, consumer, name, request, attempt)?
                }
                EventKind::Sweep => {
                    for r in &mut self.routers {
                        r.forwarder_mut().on_sweep(now);
                    }
                    let next = now + self.config.sweep_interval;
                    if next <= stop {
                        self.push(next, EventKind::Sweep);
                    }
                }
                EventKind::Sample => {
                    for (i, s) in sample_table_sizes(&self.routers).into_iter().enumerate() {
                        let t = &mut self.tallies[i];
                        t.table_sum += s.forwarding as u64;
                        t.table_max = t.table_max.max(s.forwarding as u64);
                        t.rct_sum += s.rct_pending as u64;
                    }
                    self.samples += 1;
                    let next = now + self.config.sample_interval;
                    if next <= self.window_end {
                        self.push(next, EventKind::Sample);
                    }
                }
                EventKind::Script(i) => self.apply_script(i)?,
            }
        }
        Ok(())
    }

    fn apply_script(&mut self, i: usize) -> Result<(), SimError> {
        match self.script[i].action.clone() {
            ScriptAction::EditDistances(edits) => {
                for e in &edits {
                    self.edit_fib(e.router, |fibs| inject_stale_distances(fibs, std::slice::from_ref(e)))?;
                }
            }
            ScriptAction::Rerank { router, prefix, order } => {
                self.edit_fib(router, |fibs| override_rankings(fibs, router, &prefix, &order))?;
            }
            ScriptAction::LinkDown(a, b) => {
                self.links.remove(&(a, b));
                self.links.remove(&(b, a));
                for (here, there) in [(a, b), (b, a)] {
                    let Some(node) = self.routers.get_mut(here.index()) else {
                        return Err(SimError::Input(format!("link-down on unknown router {here}")));
                    };
                    let fwd = node.forwarder_mut();
                    fwd.fib_mut().withdraw_neighbor(there);
                    fwd.on_link_down(there);
                }
            }
        }
        Ok(())
    }

    fn edit_fib(
        &mut self,
        router: RouterId,
        f: impl FnOnce(&mut Fibs) -> Result<(), FibError>,
    ) -> Result<(), SimError> {
        let node = self
            .routers
            .get_mut(router.index())
            .ok_or(SimError::Fib(FibError::UnknownRouter(router)))?;
        let fwd = node.forwarder_mut();
        let mut one = BTreeMap::from([(router, fwd.fib().clone())]);
        f(&mut one)?;
        *fwd.fib_mut() = one.remove(&router).expect("inserted above");
        Ok(())
    }

    fn count_interest(&mut self, now: SimTime, at: RouterId) {
        if self.in_window(now) {
            self.tallies[at.index()].interests += 1;
        }
    }

    fn send_to_router(&mut self, consumer: usize, name: &Name, now: SimTime) -> Result<(), SimError> {
        let (id, router) = (self.consumers[consumer].id, self.consumers[consumer].router);
        let nonce = self.nonces.draw();
        self.count_interest(now, router);
        if self.config.record_trace {
            let p = match self.config.scheme {
                Scheme::Dart => Packet::Interest(crate::message::Interest::local(name.clone())),
                Scheme::Ndn => {
                    Packet::NdnInterest(crate::message::NdnInterest { name: name.clone(), nonce })
                }
            };
            self.log(now, router, "RX", &p, Face::Consumer(id));
        }
        let out = self.routers[router.index()]
            .forwarder_mut()
            .on_consumer_interest(id, name, nonce, now);
        // A local request that leaves the router starts a new audited chain.
        let chain = match (&mut self.auditor, out.iter().find_map(|e| e.packet.hop_count())) {
            (Some(a), Some(h)) => Some(a.open(router, name, h)),
            _ => None,
        };
        self.dispatch(now, router, out, chain)
    }

    fn consumer_request(&mut self, now: SimTime, req: Request) -> Result<(), SimError> {
        let idx = self.consumer_index[&req.consumer];
        self.requests.issued += 1;
        if let Some(o) = self.consumers[idx].outstanding.get_mut(&req.name) {
            o.issued.push(now);
            return Ok(());
        }
        let serial = self.next_request;
        self.next_request += 1;
        self.consumers[idx]
            .outstanding
            .insert(req.name.clone(), Outstanding { serial, issued: vec![now], tries: 1 });
        self.push(
            now + self.config.consumer_timeout,
            EventKind::Retry { consumer: idx, name: req.name.clone(), request: serial, attempt: 1 },
        );
        self.send_to_router(idx, &req.name, now)
    }

    fn retry(
        &mut self,
        now: SimTime,
        idx: usize,
        name: Name,
        request: u64,
        attempt: u32,
    ) -> Result<(), SimError> {
        let max = self.config.max_tries;
        let Some(o) = self.consumers[idx].outstanding.get_mut(&name) else { return Ok(()) };
        if o.serial != request || o.tries != attempt {
            return Ok(());
        }
        if o.tries >= max {
            let o = self.consumers[idx].outstanding.remove(&name).expect("present");
            self.requests.timed_out += o.issued.len() as u64;
            if self.config.record_outcomes {
                let consumer = self.consumers[idx].id;
                self.outcomes.push(ConsumerOutcome {
                    time: now,
                    consumer,
                    name,
                    kind: OutcomeKind::GaveUp,
                });
            }
            return Ok(());
        }
        o.tries += 1;
        let attempt = o.tries;
        self.requests.retransmissions += 1;
        self.push(
            now + self.config.consumer_timeout,
            EventKind::Retry { consumer: idx, name: name.clone(), request, attempt },
        );
        self.send_to_router(idx, &name, now)
    }

    fn deliver_to_consumer(&mut self, now: SimTime, consumer: ConsumerId, packet: Packet) {
        let Some(&idx) = self.consumer_index.get(&consumer) else { return };
        let c = &mut self.consumers[idx];
        let Some(o) = c.outstanding.remove(packet.name()) else {
            self.requests.late_responses += 1;
            return;
        };
        let n = o.issued.len() as u64;
        let kind = match &packet {
            Packet::Data(_) => {
                self.requests.satisfied += n;
                for t in &o.issued {
                    if *t >= self.window_start && *t <= self.window_end {
                        self.delays_ms.push(now.since(*t).as_millis_f64());
                    }
                }
                OutcomeKind::Data { delay: now.since(o.issued[0]) }
            }
            Packet::Nack(k) => {
                self.requests.nacked += n;
                OutcomeKind::Nack(k.code)
            }
            _ => return,
        };
        if self.config.record_outcomes {
            self.outcomes.push(ConsumerOutcome {
                time: now,
                consumer,
                name: packet.name().clone(),
                kind,
            });
        }
    }

    fn deliver(
        &mut self,
        now: SimTime,
        from: RouterId,
        to: RouterId,
        packet: Packet,
        chain: Option<ChainId>,
    ) -> Result<(), SimError> {
        if !self.links.contains_key(&(from, to)) {
            // The link went down while the packet was in flight.
            self.link_drops += 1;
            self.log(now, to, "DROP", &packet, Face::Router(from));
            if let (Some(a), Some(c)) = (&mut self.auditor, chain) {
                a.end(c);
            }
            return Ok(());
        }
        self.log(now, to, "RX", &packet, Face::Router(from));
        let received_h = match &packet {
            Packet::Interest(i) => {
                self.count_interest(now, to);
                i.hop_count()
            }
            Packet::NdnInterest(_) => {
                self.count_interest(now, to);
                None
            }
            _ => None,
        };
        let is_interest = matches!(packet, Packet::Interest(_) | Packet::NdnInterest(_));
        if let (Some(a), Some(c)) = (&mut self.auditor, chain) {
            if is_interest {
                if let Err(v) = a.interest_arrived(c, to) {
                    return Err(self.audit_failure(v));
                }
            } else {
                a.response_arrived(c, to);
            }
        }

        let out = self.routers[to.index()].forwarder_mut().on_packet(from, packet, now);

        if let (Some(a), Some(c)) = (&mut self.auditor, chain) {
            for e in out.iter().filter(|e| matches!(e.to, Face::Router(_))) {
                match (&e.packet, received_h) {
                    (Packet::Interest(i), Some(rh)) => {
                        let eh = i.hop_count().unwrap_or(u32::MAX);
                        if let Err(v) = a.interest_relayed(c, to, rh, eh) {
                            return Err(self.audit_failure(v));
                        }
                    }
                    _ if is_interest => a.response_started(c, to),
                    _ => {}
                }
            }
        }
        self.dispatch(now, to, out, chain)
    }

    fn audit_failure(&mut self, v: AuditViolation) -> SimError {
        SimError::Audit { violation: Box::new(v), trace: std::mem::take(&mut self.trace) }
    }

    fn dispatch(
        &mut self,
        now: SimTime,
        at: RouterId,
        out: Vec<Emission>,
        chain: Option<ChainId>,
    ) -> Result<(), SimError> {
        let mut continued = false;
        for e in out {
            self.log(now, at, "TX", &e.packet, e.to);
            match e.to {
                Face::Consumer(c) => self.deliver_to_consumer(now, c, e.packet),
                Face::Router(next) => match self.links.get(&(at, next)) {
                    Some(&delay) => {
                        continued = true;
                        self.push(
                            now + delay,
                            EventKind::Deliver { from: at, to: next, packet: e.packet, chain },
                        );
                    }
                    None => {
                        self.link_drops += 1;
                        self.log(now, at, "DROP", &e.packet, Face::Router(next));
                    }
                },
            }
        }
        if !continued {
            if let (Some(a), Some(c)) = (&mut self.auditor, chain) {
                a.end(c);
            }
        }
        Ok(())
    }

    fn finish(self) -> SimOutcome {
        let samples = self.samples.max(1) as f64;
        let routers: Vec<RouterMetrics> = self
            .routers
            .iter()
            .zip(&self.tallies)
            .map(|(r, t)| {
                let f = r.forwarder();
                RouterMetrics {
                    router: f.id(),
                    table_mean: t.table_sum as f64 / samples,
                    table_max: t.table_max,
                    rct_pending_mean: t.rct_sum as f64 / samples,
                    interests_received: t.interests,
                    counters: f.counters().clone(),
                }
            })
            .collect();
        let table: Vec<f64> = routers.iter().map(|r| r.table_mean).collect();
        let rct: Vec<f64> = routers.iter().map(|r| r.rct_pending_mean).collect();
        let interests: Vec<f64> = routers.iter().map(|r| r.interests_received as f64).collect();
        let mut totals = NodeCounters::default();
        for r in &routers {
            totals.add(&r.counters);
        }
        let report = MetricsReport {
            scheme: self.config.scheme,
            caching: self.config.caching,
            rate: self.rate,
            table: Summary::of_or_zero(&table),
            rct_pending: Summary::of_or_zero(&rct),
            interests_received: Summary::of_or_zero(&interests),
            delay: Summary::of_or_zero(&self.delays_ms),
            delays_ms: self.delays_ms,
            routers,
            requests: self.requests,
            samples: self.samples,
            link_drops: self.link_drops,
            audit: self.auditor.map(|a| a.stats()),
            totals,
        };
        SimOutcome { report, routers: self.routers, trace: self.trace, outcomes: self.outcomes }
    }
}
