use ccn_dart::fixtures::{fig1_rankloop, fig1_stale, Fixture};
use ccn_dart::sim::{
    run, ConsumerSpec, OutcomeKind, Request, Scheme, SimConfig, SimInput, Workload,
};
use ccn_dart::topology::{Link, Point};
use ccn_dart::{
    compute_fibs, CachingMode, ConsumerId, NackCode, Prefix, RouterId, SimDuration, SimTime,
    Topology,
};

fn scripted(consumers: Vec<ConsumerSpec>, requests: Vec<Request>, publish: Vec<&str>) -> SimInput {
    SimInput {
        consumers,
        workload: Workload::Scripted { requests, duration: SimDuration::from_secs(1) },
        publish: publish.into_iter().map(|n| n.parse().unwrap()).collect(),
        script: Vec::new(),
    }
}

fn scenario_config(scheme: Scheme) -> SimConfig {
    SimConfig {
        scheme,
        warmup_fraction: 0.0,
        record_trace: true,
        record_outcomes: true,
        ..SimConfig::default()
    }
}

fn line(n: usize, delay_ms: u64) -> Topology {
    let pos = (0..n).map(|i| Point { x: i as f64, y: 0.0 }).collect();
    let links = (0..n - 1)
        .map(|i| Link {
            a: RouterId(i as u32),
            b: RouterId(i as u32 + 1),
            delay: SimDuration::from_millis(delay_ms),
        })
        .collect();
    Topology::new(pos, links).unwrap()
}

fn req(ms: u64, consumer: u32, name: &str) -> Request {
    Request { time: SimTime::from_millis(ms), consumer: ConsumerId(consumer), name: name.parse().unwrap() }
}

#[test]
fn two_routers_delay_is_round_trip() {
    let mut topo = line(2, 15);
    topo.add_anchor("/p1".parse().unwrap(), RouterId(1)).unwrap();
    let fibs = compute_fibs(&topo);
    for scheme in [Scheme::Dart, Scheme::Ndn] {
        let input = scripted(
            vec![ConsumerSpec { id: ConsumerId(0), router: RouterId(0) }],
            vec![req(0, 0, "/p1/o")],
            vec!["/p1/o"],
        );
        let out = run(&topo, &fibs, &input, &scenario_config(scheme)).unwrap();
        assert_eq!(out.report.delays_ms, vec![30.0], "{scheme}");
    }
}

fn consumer_at(f: &Fixture, id: u32, label: &str) -> ConsumerSpec {
    ConsumerSpec { id: ConsumerId(id), router: f.router(label) }
}

fn interest_path(f: &Fixture, trace: &[String]) -> Vec<&'static str> {
    // RX INT lines from routers, in order.
    trace
        .iter()
        .filter(|l| l.contains(" RX INT "))
        .map(|l| {
            let r: u32 = l.split(' ').nth(1).unwrap().parse().unwrap();
            f.label(RouterId(r))
        })
        .collect()
}

#[test]
fn rankloop_dart_takes_a_simple_path() {
    let f = fig1_rankloop();
    let obj = f.object.to_string();
    let input = scripted(vec![consumer_at(&f, 0, "y")], vec![req(0, 0, &obj)], vec![&obj]);
    let out = run(&f.topology, &f.fibs, &input, &scenario_config(Scheme::Dart)).unwrap();
    assert_eq!(interest_path(&f, &out.trace), vec!["y", "a", "b", "q", "h", "z"]);
    assert_eq!(out.report.totals.loop_nacks_sent, 0);
    assert_eq!(out.report.requests.satisfied, 1);
    let audit = out.report.audit.unwrap();
    assert_eq!(audit.symmetric_responses, 1);
}

#[test]
fn stale_dart_sends_loop_nacks_back_to_origins() {
    let f = fig1_stale();
    let obj = f.object.to_string();
    let input = scripted(
        vec![consumer_at(&f, 0, "y"), consumer_at(&f, 1, "x")],
        vec![req(0, 0, &obj), req(20, 1, &obj)],
        vec![&obj],
    );
    let out = run(&f.topology, &f.fibs, &input, &scenario_config(Scheme::Dart)).unwrap();
    let b = out.routers[f.router("b").index()].forwarder().counters().clone();
    assert_eq!(b.loop_nacks_sent, 2);
    let nacked: Vec<_> = out
        .outcomes
        .iter()
        .filter(|o| o.kind == OutcomeKind::Nack(NackCode::Loop))
        .map(|o| o.consumer)
        .collect();
    assert_eq!(nacked, vec![ConsumerId(0), ConsumerId(1)]);
}

#[test]
fn stale_ndn_aggregates_then_expires() {
    let f = fig1_stale();
    let obj = f.object.to_string();
    let input = scripted(
        vec![consumer_at(&f, 0, "y"), consumer_at(&f, 1, "x")],
        vec![req(0, 0, &obj), req(20, 1, &obj)],
        vec![&obj],
    );
    let out = run(&f.topology, &f.fibs, &input, &scenario_config(Scheme::Ndn)).unwrap();
    let counters = |l: &str| out.routers[f.router(l).index()].forwarder().counters().clone();
    assert!(counters("a").aggregated >= 1);
    assert!(counters("x").aggregated >= 1);
    for l in ["y", "a", "b", "x"] {
        assert_eq!(counters(l).pit_expired, 1, "router {l}");
    }
    assert_eq!(out.report.requests.satisfied, 0);
    assert_eq!(out.report.requests.nacked, 0);
    assert!(out.outcomes.iter().all(|o| o.kind == OutcomeKind::GaveUp));
}

#[test]
fn idle_network_samples_zero() {
    let mut topo = line(3, 10);
    topo.add_anchor("/p2".parse().unwrap(), RouterId(2)).unwrap();
    let fibs = compute_fibs(&topo);
    let input = scripted(vec![ConsumerSpec { id: ConsumerId(0), router: RouterId(0) }], vec![], vec![]);
    let out = run(&topo, &fibs, &input, &scenario_config(Scheme::Ndn)).unwrap();
    assert!(out.report.samples > 0);
    assert!(out.report.routers.iter().all(|r| r.table_max == 0));
}

#[test]
fn in_flight_ndn_request_holds_one_pit_entry_per_hop() {
    let mut topo = line(4, 100);
    topo.add_anchor("/p3".parse().unwrap(), RouterId(3)).unwrap();
    let fibs = compute_fibs(&topo);
    let input = scripted(
        vec![ConsumerSpec { id: ConsumerId(0), router: RouterId(0) }],
        vec![req(0, 0, "/p3/o")],
        vec!["/p3/o"],
    );
    let mut cfg = scenario_config(Scheme::Ndn);
    cfg.sample_interval = SimDuration::from_millis(250);
    let out = run(&topo, &fibs, &input, &cfg).unwrap();
    // Sample at 250 ms: the Interest has crossed 2 links, PITs at 0, 1, 2.
    let maxes: Vec<u64> = out.report.routers.iter().map(|r| r.table_max).collect();
    assert_eq!(maxes, vec![1, 1, 1, 0]);
}

#[test]
fn missing_fib_is_an_input_error() {
    let mut topo = line(2, 10);
    topo.add_anchor("/p1".parse::<Prefix>().unwrap(), RouterId(1)).unwrap();
    let mut fibs = compute_fibs(&topo);
    fibs.remove(&RouterId(1));
    let input = scripted(vec![], vec![], vec![]);
    assert!(run(&topo, &fibs, &input, &SimConfig::default()).is_err());
}

#[test]
fn edge_caching_keeps_transit_routers_clean() {
    let mut topo = line(3, 10);
    topo.add_anchor("/p2".parse().unwrap(), RouterId(2)).unwrap();
    let fibs = compute_fibs(&topo);
    for (caching, cached_at_middle) in [(CachingMode::OnPath, true), (CachingMode::Edge, false)] {
        let input = scripted(
            vec![ConsumerSpec { id: ConsumerId(0), router: RouterId(0) }],
            vec![req(0, 0, "/p2/o")],
            vec!["/p2/o"],
        );
        let cfg = SimConfig { caching, ..scenario_config(Scheme::Dart) };
        let out = run(&topo, &fibs, &input, &cfg).unwrap();
        let mid = out.routers[1].as_dart().unwrap();
        assert_eq!(mid.rct_entry(&"/p2/o".parse().unwrap()).is_some(), cached_at_middle);
        let edge = out.routers[0].as_dart().unwrap();
        assert!(edge.rct_entry(&"/p2/o".parse().unwrap()).is_some());
    }
}

#[test]
fn earlier_timer_does_not_retry_a_later_request_for_the_same_name() {
    let mut topo = line(2, 15);
    topo.add_anchor("/p1".parse().unwrap(), RouterId(1)).unwrap();
    let fibs = compute_fibs(&topo);
    for scheme in [Scheme::Dart, Scheme::Ndn] {
        // The first request is answered at 30 ms; its timer still fires at
        // 1000 ms while the second request (990 ms) is in flight.
        let input = scripted(
            vec![ConsumerSpec { id: ConsumerId(0), router: RouterId(0) }],
            vec![req(0, 0, "/p1/o"), req(990, 0, "/p1/o")],
            vec!["/p1/o"],
        );
        let cfg = SimConfig { caching: CachingMode::None, ..scenario_config(scheme) };
        let out = run(&topo, &fibs, &input, &cfg).unwrap();
        assert_eq!(out.report.requests.retransmissions, 0, "{scheme}");
        assert_eq!(out.report.requests.satisfied, 2, "{scheme}");
    }
}
