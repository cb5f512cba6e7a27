//! Randomized but internally consistent stale routing state, for stress
//! testing loop freedom.
//!
//! A stale router keeps its real neighbors but reads every tuple distance
//! from a *snapshot*: the same network with a few links added, or with a
//! few links removed (never its own, never disconnecting the graph). Each
//! stale router may see a different snapshot, and its rankings are
//! shuffled independently of distance.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::fib::{compute_fibs, inject_stale_distances, override_rankings, DistanceEdit, Fibs};
use crate::ids::RouterId;
use crate::scalar::Scalar;
use crate::time::SimDuration;
use crate::topology::{Link, Point, Topology};

/// Random connected graph: a random spanning tree plus each remaining pair
/// independently with probability `extra_edge_prob`.
pub fn random_connected_topology<R: Rng>(
    n: usize,
    extra_edge_prob: f64,
    delay: SimDuration,
    rng: &mut R,
) -> Topology<f64> {
    assert!(n >= 1, "a topology needs at least one router");
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        let child = order[i];
        edges.insert((parent.min(child), parent.max(child)));
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.random_bool(extra_edge_prob) {
                edges.insert((a, b));
            }
        }
    }
    let positions = (0..n).map(|i| Point { x: i as f64, y: 0.0 }).collect();
    let links =
        edges.into_iter().map(|(a, b)| Link { a: RouterId(a), b: RouterId(b), delay }).collect();
    Topology::new(positions, links).expect("spanning tree keeps the graph connected")
}

fn rebuild<S: Scalar>(base: &Topology<S>, links: Vec<Link>) -> Option<Topology<S>> {
    let positions = base.routers().map(|r| base.position(r)).collect();
    let mut t = Topology::new(positions, links).ok()?;
    for (prefix, anchors) in base.anchors() {
        for &a in anchors {
            t.add_anchor(prefix.clone(), a).expect("same router set");
        }
    }
    Some(t)
}

/// A perturbed copy of `topology` as `keep` might remember it: up to
/// `max_changes` links added, or up to `max_changes` links removed that are
/// not incident to `keep` and leave the graph connected. Anchors carry over.
pub fn snapshot_topology<S: Scalar, R: Rng>(
    topology: &Topology<S>,
    keep: RouterId,
    max_changes: usize,
    rng: &mut R,
) -> Topology<S> {
    let n = topology.router_count() as u32;
    let mut links = topology.links().to_vec();
    let delay = links.first().map_or(SimDuration::from_millis(1), |l| l.delay);
    let changes = rng.random_range(1..=max_changes.max(1));
    if rng.random_bool(0.5) {
        for _ in 0..changes {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            let (a, b) = (RouterId(a.min(b)), RouterId(a.max(b)));
            if a != b && !links.iter().any(|l| l.a == a && l.b == b) {
                links.push(Link { a, b, delay });
            }
        }
        return rebuild(topology, links).expect("adding links keeps the graph connected");
    }
    let mut current = topology.clone();
    for _ in 0..changes {
        let candidates: Vec<usize> = (0..links.len())
            .filter(|&i| links[i].a != keep && links[i].b != keep)
            .collect();
        let Some(&i) = candidates.choose(rng) else { break };
        let mut trial = links.clone();
        trial.remove(i);
        if let Some(t) = rebuild(topology, trial.clone()) {
            links = trial;
            current = t;
        }
    }
    current
}

/// Distance edits that make `router`'s tuples report what they would in
/// `snapshot`. The router's links must all exist in the snapshot.
pub fn snapshot_edits(fibs: &Fibs, snapshot: &Fibs, router: RouterId) -> Vec<DistanceEdit> {
    let (Some(now), Some(then)) = (fibs.get(&router), snapshot.get(&router)) else {
        return Vec::new();
    };
    let mut edits = Vec::new();
    for prefix in now.prefixes_sorted() {
        let Some(old) = then.get(prefix) else { continue };
        for t in now.get(prefix).unwrap_or_default() {
            if let Some(o) = old.iter().find(|o| o.next_hop == t.next_hop) {
                edits.push(DistanceEdit {
                    router,
                    prefix: prefix.clone(),
                    next_hop: t.next_hop,
                    distance: o.distance,
                });
            }
        }
    }
    edits
}

/// Shuffles the ranking of every prefix at `router`.
pub fn shuffle_rankings<R: Rng>(fibs: &mut Fibs, router: RouterId, rng: &mut R) {
    let Some(fib) = fibs.get(&router) else { return };
    let plans: Vec<_> = fib
        .prefixes_sorted()
        .into_iter()
        .map(|p| {
            let mut hops: Vec<RouterId> =
                fib.get(p).unwrap_or_default().iter().map(|t| t.next_hop).collect();
            hops.shuffle(rng);
            (p.clone(), hops)
        })
        .collect();
    for (prefix, hops) in plans {
        override_rankings(fibs, router, &prefix, &hops).expect("permutation of current hops");
    }
}

/// What [`apply_random_staleness`] changed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StalenessReport {
    pub stale_routers: Vec<RouterId>,
    pub reranked_routers: Vec<RouterId>,
    pub edits: usize,
}

/// Makes each router stale with probability `stale_prob` (own snapshot of
/// up to `max_changes` link changes) and shuffles its rankings with
/// probability `rerank_prob`.
pub fn apply_random_staleness<S: Scalar, R: Rng>(
    topology: &Topology<S>,
    fibs: &mut Fibs,
    stale_prob: f64,
    rerank_prob: f64,
    max_changes: usize,
    rng: &mut R,
) -> StalenessReport {
    let mut report = StalenessReport::default();
    for r in topology.routers() {
        if rng.random_bool(stale_prob) {
            let snapshot = compute_fibs(&snapshot_topology(topology, r, max_changes, rng));
            let edits = snapshot_edits(fibs, &snapshot, r);
            report.edits += edits.len();
            inject_stale_distances(fibs, &edits).expect("edits name existing tuples");
            report.stale_routers.push(r);
        }
        if rng.random_bool(rerank_prob) {
            shuffle_rankings(fibs, r, rng);
            report.reranked_routers.push(r);
        }
    }
    report
}
