//! Forwarding information bases with per-next-hop distances and nearest
//! anchors, computed by an omniscient control plane.
//!
//! Also hosts the two fixture hooks used to provoke inconsistent routing
//! state: rank overrides and stale-distance injection.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::ids::RouterId;
use crate::name::{Name, Prefix};
use crate::scalar::Scalar;
use crate::topology::Topology;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FibError {
    #[error("router {0} has no FIB")]
    UnknownRouter(RouterId),
    #[error("router {0} has no FIB entry for {1}")]
    UnknownPrefix(RouterId, Prefix),
    #[error("router {router} has no tuple via {next_hop} for {prefix}")]
    UnknownNextHop { router: RouterId, prefix: Prefix, next_hop: RouterId },
    #[error("rank order for {1} at router {0} is not a permutation of its next hops")]
    NotAPermutation(RouterId, Prefix),
    #[error("distance must be at least 1")]
    ZeroDistance,
    #[error("tuple list for {0} is empty")]
    EmptyEntry(Prefix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FibTuple {
    pub next_hop: RouterId,
    /// Hop count to the prefix through `next_hop`.
    pub distance: u32,
    /// Nearest anchor of the prefix through `next_hop`.
    pub anchor: RouterId,
    /// 1 is best.
    pub rank: u32,
}

/// Per-prefix tuple lists, each kept sorted by rank.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Fib {
    entries: HashMap<Prefix, Vec<FibTuple>>,
    longest: usize,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the entry for `prefix`. Tuples are re-ranked in the given order.
    pub fn set(&mut self, prefix: Prefix, mut tuples: Vec<FibTuple>) -> Result<(), FibError> {
        if tuples.is_empty() {
            return Err(FibError::EmptyEntry(prefix));
        }
        if tuples.iter().any(|t| t.distance == 0) {
            return Err(FibError::ZeroDistance);
        }
        for (i, t) in tuples.iter_mut().enumerate() {
            t.rank = i as u32 + 1;
        }
        self.longest = self.longest.max(prefix.len());
        self.entries.insert(prefix, tuples);
        Ok(())
    }

    pub fn get(&self, prefix: &Prefix) -> Option<&[FibTuple]> {
        self.entries.get(prefix).map(Vec::as_slice)
    }

    /// Longest-prefix match of `name` against the FIB's prefixes.
    pub fn lookup(&self, name: &Name) -> Option<(&Prefix, &[FibTuple])> {
        let comps = name.components();
        (0..=comps.len().min(self.longest))
            .rev()
            .find_map(|k| self.entries.get_key_value(&comps[..k]))
            .map(|(p, t)| (p, t.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prefixes_sorted(&self) -> Vec<&Prefix> {
        let mut v: Vec<_> = self.entries.keys().collect();
        v.sort();
        v
    }

    /// Drops the tuple through `next_hop`, and the whole entry if it empties.
    pub fn withdraw(&mut self, prefix: &Prefix, next_hop: RouterId) -> bool {
        let Some(tuples) = self.entries.get_mut(prefix) else {
            return false;
        };
        let before = tuples.len();
        tuples.retain(|t| t.next_hop != next_hop);
        let removed = tuples.len() != before;
        for (i, t) in tuples.iter_mut().enumerate() {
            t.rank = i as u32 + 1;
        }
        if tuples.is_empty() {
            self.entries.remove(prefix);
        }
        removed
    }

    /// Withdraws every tuple through `next_hop`.
    pub fn withdraw_neighbor(&mut self, next_hop: RouterId) {
        let prefixes: Vec<Prefix> = self.entries.keys().cloned().collect();
        for p in prefixes {
            self.withdraw(&p, next_hop);
        }
    }

    fn tuples_mut(&mut self, router: RouterId, prefix: &Prefix) -> Result<&mut Vec<FibTuple>, FibError> {
        self.entries
            .get_mut(prefix)
            .ok_or_else(|| FibError::UnknownPrefix(router, prefix.clone()))
    }

    /// `fib <router> <prefix> <rank> <next_hop> <distance> <anchor>` lines.
    pub fn dump(&self, router: RouterId) -> String {
        let mut out = String::new();
        for p in self.prefixes_sorted() {
            for t in &self.entries[p] {
                let _ = writeln!(
                    out,
                    "fib {router} {p} {} {} {} {}",
                    t.rank, t.next_hop, t.distance, t.anchor
                );
            }
        }
        out
    }
}

pub type Fibs = BTreeMap<RouterId, Fib>;

fn bfs_hops<S: Scalar>(topology: &Topology<S>, source: RouterId) -> Vec<Option<u32>> {
    let mut dist = vec![None; topology.router_count()];
    dist[source.index()] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.index()].unwrap_or(0);
        for (v, _) in topology.neighbors(u) {
            if dist[v.index()].is_none() {
                dist[v.index()] = Some(du + 1);
                queue.push_back(*v);
            }
        }
    }
    dist
}

/// Minimum-hop FIBs for every router and anchored prefix.
///
/// The tuple through neighbor `q` carries `1 + hops(q, nearest anchor)`;
/// nearest-anchor ties go to the lowest anchor id and ranking orders tuples
/// by `(distance, neighbor id)`. Unreachable neighbors are omitted.
pub fn compute_fibs<S: Scalar>(topology: &Topology<S>) -> Fibs {
    let mut fibs: Fibs = topology.routers().map(|r| (r, Fib::new())).collect();
    let mut hops_from: HashMap<RouterId, Vec<Option<u32>>> = HashMap::new();
    for (prefix, anchors) in topology.anchors() {
        // nearest[x] = (hops, anchor) minimized lexicographically
        let mut nearest: Vec<Option<(u32, RouterId)>> = vec![None; topology.router_count()];
        for &a in anchors {
            let hops = hops_from.entry(a).or_insert_with(|| bfs_hops(topology, a));
            for (x, h) in hops.iter().enumerate() {
                if let Some(h) = h {
                    let cand = (*h, a);
                    if nearest[x].is_none_or(|cur| cand < cur) {
                        nearest[x] = Some(cand);
                    }
                }
            }
        }
        for r in topology.routers() {
            let mut tuples: Vec<FibTuple> = topology
                .neighbors(r)
                .iter()
                .filter_map(|(q, _)| {
                    nearest[q.index()].map(|(h, anchor)| FibTuple {
                        next_hop: *q,
                        distance: h + 1,
                        anchor,
                        rank: 0,
                    })
                })
                .collect();
            if tuples.is_empty() {
                continue;
            }
            tuples.sort_by_key(|t| (t.distance, t.next_hop));
            fibs.get_mut(&r)
                .expect("every router has a FIB")
                .set(prefix.clone(), tuples)
                .expect("computed tuples are valid");
        }
    }
    fibs
}

/// Re-ranks the tuples of `prefix` at `router` so `order[0]` gets rank 1.
/// Distances are untouched. `order` must list exactly the current next hops.
pub fn override_rankings(
    fibs: &mut Fibs,
    router: RouterId,
    prefix: &Prefix,
    order: &[RouterId],
) -> Result<(), FibError> {
    let fib = fibs.get_mut(&router).ok_or(FibError::UnknownRouter(router))?;
    let tuples = fib.tuples_mut(router, prefix)?;
    for hop in order {
        if !tuples.iter().any(|t| t.next_hop == *hop) {
            return Err(FibError::UnknownNextHop {
                router,
                prefix: prefix.clone(),
                next_hop: *hop,
            });
        }
    }
    let mut sorted_order = order.to_vec();
    sorted_order.sort();
    sorted_order.dedup();
    if sorted_order.len() != order.len() || order.len() != tuples.len() {
        return Err(FibError::NotAPermutation(router, prefix.clone()));
    }
    let mut reordered: Vec<FibTuple> = order
        .iter()
        .map(|hop| *tuples.iter().find(|t| t.next_hop == *hop).expect("checked above"))
        .collect();
    for (i, t) in reordered.iter_mut().enumerate() {
        t.rank = i as u32 + 1;
    }
    *tuples = reordered;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceEdit {
    pub router: RouterId,
    pub prefix: Prefix,
    pub next_hop: RouterId,
    pub distance: u32,
}

/// Overwrites tuple distances in place, leaving ranks alone. All edits are
/// validated before any is applied.
pub fn inject_stale_distances(fibs: &mut Fibs, edits: &[DistanceEdit]) -> Result<(), FibError> {
    for e in edits {
        if e.distance == 0 {
            return Err(FibError::ZeroDistance);
        }
        let fib = fibs.get(&e.router).ok_or(FibError::UnknownRouter(e.router))?;
        let tuples = fib
            .get(&e.prefix)
            .ok_or_else(|| FibError::UnknownPrefix(e.router, e.prefix.clone()))?;
        if !tuples.iter().any(|t| t.next_hop == e.next_hop) {
            return Err(FibError::UnknownNextHop {
                router: e.router,
                prefix: e.prefix.clone(),
                next_hop: e.next_hop,
            });
        }
    }
    for e in edits {
        let fib = fibs.get_mut(&e.router).expect("validated");
        let tuples = fib.tuples_mut(e.router, &e.prefix).expect("validated");
        for t in tuples.iter_mut().filter(|t| t.next_hop == e.next_hop) {
            t.distance = e.distance;
        }
    }
    Ok(())
}

pub fn dump_fibs(fibs: &Fibs) -> String {
    fibs.iter().map(|(r, f)| f.dump(*r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::SimDuration;
    use crate::topology::{Link, Point};

    fn line3() -> Topology<f64> {
        let pos = vec![Point { x: 0.0, y: 0.0 }; 3];
        let d = SimDuration::from_millis(15);
        let mut t = Topology::new(
            pos,
            vec![
                Link { a: RouterId(0), b: RouterId(1), delay: d },
                Link { a: RouterId(1), b: RouterId(2), delay: d },
            ],
        )
        .unwrap();
        t.add_anchor("/p".parse().unwrap(), RouterId(2)).unwrap();
        t
    }

    fn p(s: &str) -> Prefix {
        s.parse().unwrap()
    }

    #[test]
    fn line_unique_path() {
        let fibs = compute_fibs(&line3());
        let a = fibs[&RouterId(0)].get(&p("/p")).unwrap();
        assert_eq!(
            a,
            &[FibTuple { next_hop: RouterId(1), distance: 2, anchor: RouterId(2), rank: 1 }]
        );
        // the anchor itself learns the way back through its neighbor
        let c = fibs[&RouterId(2)].get(&p("/p")).unwrap();
        assert_eq!(c[0].distance, 2);
    }

    #[test]
    fn lookup_is_longest_prefix() {
        let mut fib = Fib::new();
        let t = FibTuple { next_hop: RouterId(1), distance: 1, anchor: RouterId(1), rank: 1 };
        fib.set(p("/a"), vec![t]).unwrap();
        fib.set(p("/a/b"), vec![FibTuple { next_hop: RouterId(2), ..t }]).unwrap();
        let name: Name = "/a/b/c".parse().unwrap();
        assert_eq!(fib.lookup(&name).unwrap().0, &p("/a/b"));
        let name: Name = "/a/x".parse().unwrap();
        assert_eq!(fib.lookup(&name).unwrap().0, &p("/a"));
        let name: Name = "/z".parse().unwrap();
        assert!(fib.lookup(&name).is_none());
    }

    #[test]
    fn override_identity_and_reverse() {
        let mut fib = Fib::new();
        let tuples: Vec<FibTuple> = (1..=4)
            .map(|i| FibTuple { next_hop: RouterId(i), distance: i + 1, anchor: RouterId(9), rank: 0 })
            .collect();
        fib.set(p("/p"), tuples).unwrap();
        let mut fibs: Fibs = [(RouterId(0), fib)].into_iter().collect();
        let before = fibs.clone();
        let ident: Vec<RouterId> = (1..=4).map(RouterId).collect();
        override_rankings(&mut fibs, RouterId(0), &p("/p"), &ident).unwrap();
        assert_eq!(fibs, before);

        let rev: Vec<RouterId> = (1..=4).rev().map(RouterId).collect();
        override_rankings(&mut fibs, RouterId(0), &p("/p"), &rev).unwrap();
        let got = fibs[&RouterId(0)].get(&p("/p")).unwrap();
        let pairs: Vec<(u32, u32, u32)> = got.iter().map(|t| (t.next_hop.0, t.rank, t.distance)).collect();
        assert_eq!(pairs, vec![(4, 1, 5), (3, 2, 4), (2, 3, 3), (1, 4, 2)]);
    }

    #[test]
    fn override_rejects_unknown_or_partial() {
        let mut fibs = compute_fibs(&line3());
        let e = override_rankings(&mut fibs, RouterId(0), &p("/p"), &[RouterId(2)]);
        assert!(matches!(e, Err(FibError::UnknownNextHop { .. })));
        let e = override_rankings(&mut fibs, RouterId(1), &p("/p"), &[RouterId(0)]);
        assert!(matches!(e, Err(FibError::NotAPermutation(..))));
        let e = override_rankings(&mut fibs, RouterId(1), &p("/q"), &[RouterId(0)]);
        assert!(matches!(e, Err(FibError::UnknownPrefix(..))));
    }

    #[test]
    fn stale_edits_apply_and_recompute_erases() {
        let topo = line3();
        let mut fibs = compute_fibs(&topo);
        let fresh = fibs.clone();
        inject_stale_distances(&mut fibs, &[]).unwrap();
        assert_eq!(fibs, fresh);
        let edit = DistanceEdit { router: RouterId(0), prefix: p("/p"), next_hop: RouterId(1), distance: 7 };
        inject_stale_distances(&mut fibs, &[edit]).unwrap();
        assert_eq!(fibs[&RouterId(0)].get(&p("/p")).unwrap()[0].distance, 7);
        assert_eq!(compute_fibs(&topo), fresh);
    }

    #[test]
    fn stale_edit_validation_is_atomic() {
        let mut fibs = compute_fibs(&line3());
        let fresh = fibs.clone();
        let good = DistanceEdit { router: RouterId(0), prefix: p("/p"), next_hop: RouterId(1), distance: 7 };
        let bad = DistanceEdit { next_hop: RouterId(2), ..good.clone() };
        assert!(inject_stale_distances(&mut fibs, &[good, bad]).is_err());
        assert_eq!(fibs, fresh);
    }

    #[test]
    fn dump_format() {
        let fibs = compute_fibs(&line3());
        assert_eq!(fibs[&RouterId(0)].dump(RouterId(0)), "fib 0 /p 1 1 2 2\n");
    }
}
