//! Hand-built networks reproducing the ranking-loop, stale-FIB and
//! route-sharing walkthroughs. Each fixture names its routers so scenario
//! checks can be written in terms of letters rather than ids.

use std::collections::BTreeMap;

use crate::fib::{compute_fibs, inject_stale_distances, override_rankings, DistanceEdit, Fibs};
use crate::ids::RouterId;
use crate::name::{Name, Prefix};
use crate::time::SimDuration;
use crate::topology::{Link, Point, Topology};

#[derive(Clone, Debug)]
pub struct Fixture {
    pub topology: Topology<f64>,
    pub fibs: Fibs,
    pub prefix: Prefix,
    /// The object every consumer asks for.
    pub object: Name,
    labels: BTreeMap<&'static str, RouterId>,
}

impl Fixture {
    /// Router id for a letter.
    ///
    /// # Panics
    /// On a label the fixture does not define.
    pub fn router(&self, label: &str) -> RouterId {
        *self.labels.get(label).unwrap_or_else(|| panic!("fixture has no router {label:?}"))
    }

    pub fn label(&self, id: RouterId) -> &'static str {
        self.labels.iter().find(|(_, r)| **r == id).map(|(l, _)| *l).unwrap_or("?")
    }

    pub fn labels(&self) -> impl Iterator<Item = (&'static str, RouterId)> + '_ {
        self.labels.iter().map(|(l, r)| (*l, *r))
    }
}

pub const FIXTURE_LINK_DELAY_MS: u64 = 15;

fn build(
    labels: &[&'static str],
    edges: &[(&str, &str)],
    anchor: &str,
    prefix: &str,
    object: &str,
) -> (Topology<f64>, BTreeMap<&'static str, RouterId>, Prefix, Name) {
    let ids: BTreeMap<&'static str, RouterId> =
        labels.iter().enumerate().map(|(i, l)| (*l, RouterId(i as u32))).collect();
    let positions = (0..labels.len()).map(|i| Point { x: i as f64, y: 0.0 }).collect();
    let delay = SimDuration::from_millis(FIXTURE_LINK_DELAY_MS);
    let links = edges.iter().map(|(a, b)| Link { a: ids[a], b: ids[b], delay }).collect();
    let mut topology = Topology::new(positions, links).expect("fixture topology is valid");
    let prefix: Prefix = prefix.parse().expect("fixture prefix");
    topology.add_anchor(prefix.clone(), ids[anchor]).expect("fixture anchor");
    (topology, ids, prefix, object.parse().expect("fixture object"))
}

fn edit(ids: &BTreeMap<&'static str, RouterId>, p: &Prefix, at: &str, via: &str, d: u32) -> DistanceEdit {
    DistanceEdit { router: ids[at], prefix: p.clone(), next_hop: ids[via], distance: d }
}

fn order(ids: &BTreeMap<&'static str, RouterId>, hops: &[&str]) -> Vec<RouterId> {
    hops.iter().map(|h| ids[h]).collect()
}

/// Ranking loop with consistent-enough distances: a ranks b first, b ranks
/// x first, x ranks b first, yet DEAR forces y's Interest down the simple
/// path y, a, b, q, h, z.
///
/// FIB values after construction:
/// `a: (b,4)(p,4)(x,6)(y,6)`, `b: (x,6)(a,5)(q,3)`, `x: (b,5)(a,5)`, `y: (a,5)`.
pub fn fig1_rankloop() -> Fixture {
    let (topology, ids, prefix, object) = build(
        &["a", "b", "p", "q", "x", "y", "z", "h"],
        &[
            ("q", "h"),
            ("h", "z"),
            ("b", "q"),
            ("p", "q"),
            ("a", "b"),
            ("a", "p"),
            ("x", "a"),
            ("x", "b"),
            ("y", "a"),
        ],
        "z",
        "/anchored",
        "/anchored/j",
    );
    let mut fibs = compute_fibs(&topology);
    // The walkthrough's multipath figures are larger than min-hop for the
    // routes that go through x.
    inject_stale_distances(
        &mut fibs,
        &[
            edit(&ids, &prefix, "a", "x", 6),
            edit(&ids, &prefix, "b", "x", 6),
            edit(&ids, &prefix, "x", "b", 5),
        ],
    )
    .expect("fixture edits name existing tuples");
    override_rankings(&mut fibs, ids["b"], &prefix, &order(&ids, &["x", "a", "q"]))
        .expect("fixture ranking is a permutation");
    Fixture { topology, fibs, prefix, object, labels: ids }
}

/// Router b has lost its route through q and learned inflated distances
/// from a and x; a, x and y still hold their pre-change FIBs. The b–q link
/// stays in the topology (it keeps the graph connected) but is gone from
/// b's FIB.
///
/// FIB values: `a: (b,4)(x,5)(y,6)`, `b: (x,6)(a,5)`, `x: (a,5)(b,4)`, `y: (a,5)`.
pub fn fig1_stale() -> Fixture {
    let (topology, ids, prefix, object) = build(
        &["a", "b", "q", "x", "y", "z", "h"],
        &[("y", "a"), ("a", "b"), ("a", "x"), ("b", "x"), ("b", "q"), ("q", "h"), ("h", "z")],
        "z",
        "/anchored",
        "/anchored/j",
    );
    let mut fibs = compute_fibs(&topology);
    fibs.get_mut(&ids["b"]).expect("b has a FIB").withdraw(&prefix, ids["q"]);
    inject_stale_distances(&mut fibs, &[edit(&ids, &prefix, "b", "x", 6)])
        .expect("fixture edits name existing tuples");
    override_rankings(&mut fibs, ids["b"], &prefix, &order(&ids, &["x", "a"]))
        .expect("fixture ranking is a permutation");
    override_rankings(&mut fibs, ids["x"], &prefix, &order(&ids, &["a", "b"]))
        .expect("fixture ranking is a permutation");
    Fixture { topology, fibs, prefix, object, labels: ids }
}

/// Two branches toward anchor d: a, r, s, d and x, b, c, d, with local
/// consumers at a, b and x.
pub fn fig2_sharing() -> Fixture {
    let (topology, ids, prefix, object) = build(
        &["a", "r", "s", "d", "b", "c", "x"],
        &[("a", "r"), ("r", "s"), ("s", "d"), ("x", "b"), ("b", "c"), ("c", "d")],
        "d",
        "/anchored",
        "/anchored/j",
    );
    let fibs = compute_fibs(&topology);
    Fixture { topology, fibs, prefix, object, labels: ids }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuples(f: &Fixture, at: &str) -> Vec<(&'static str, u32, u32)> {
        f.fibs[&f.router(at)]
            .get(&f.prefix)
            .unwrap()
            .iter()
            .map(|t| (f.label(t.next_hop), t.distance, t.rank))
            .collect()
    }

    #[test]
    fn rankloop_fibs_match_walkthrough() {
        let f = fig1_rankloop();
        assert_eq!(tuples(&f, "a"), vec![("b", 4, 1), ("p", 4, 2), ("x", 6, 3), ("y", 6, 4)]);
        assert_eq!(tuples(&f, "b"), vec![("x", 6, 1), ("a", 5, 2), ("q", 3, 3)]);
        assert_eq!(tuples(&f, "x"), vec![("b", 5, 1), ("a", 5, 2)]);
        assert_eq!(tuples(&f, "y"), vec![("a", 5, 1)]);
    }

    #[test]
    fn stale_fibs_match_walkthrough() {
        let f = fig1_stale();
        assert_eq!(tuples(&f, "a"), vec![("b", 4, 1), ("x", 5, 2), ("y", 6, 3)]);
        assert_eq!(tuples(&f, "b"), vec![("x", 6, 1), ("a", 5, 2)]);
        assert_eq!(tuples(&f, "x"), vec![("a", 5, 1), ("b", 4, 2)]);
        assert_eq!(tuples(&f, "y"), vec![("a", 5, 1)]);
    }

    #[test]
    fn sharing_routes_point_at_anchor() {
        let f = fig2_sharing();
        assert_eq!(tuples(&f, "a")[0].0, "r");
        assert_eq!(tuples(&f, "x")[0].0, "b");
        assert_eq!(tuples(&f, "b")[0].0, "c");
        assert_eq!(tuples(&f, "s")[0].0, "d");
    }
}
