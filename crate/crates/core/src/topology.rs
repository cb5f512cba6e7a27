//! Router graphs: random geometric generation, validation and the
//! line-oriented topology file format.
//!
//! ```text
//! node <id> <x> <y>
//! link <id1> <id2> <delay_ms>
//! anchor <prefix> <router id>
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ids::RouterId;
use crate::name::Prefix;
use crate::scalar::Scalar;
use crate::time::SimDuration;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology needs at least {0} routers")]
    TooFewRouters(usize),
    #[error("router ids must be 0..{0} without gaps")]
    NonContiguousIds(usize),
    #[error("self-link at router {0}")]
    SelfLink(RouterId),
    #[error("duplicate link {0}-{1}")]
    DuplicateLink(RouterId, RouterId),
    #[error("link references unknown router {0}")]
    UnknownRouter(RouterId),
    #[error("link {0}-{1} has non-positive delay")]
    NonPositiveDelay(RouterId, RouterId),
    #[error("topology is not connected")]
    Disconnected,
    #[error("no connected placement after {0} attempts")]
    RetriesExhausted(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn distance_sq(&self, other: &Point<S>) -> S {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Link {
    pub a: RouterId,
    pub b: RouterId,
    pub delay: SimDuration,
}

/// Connected router graph with per-link delays and prefix anchors.
#[derive(Clone, Debug)]
pub struct Topology<S> {
    positions: Vec<Point<S>>,
    links: Vec<Link>,
    adjacency: Vec<Vec<(RouterId, SimDuration)>>,
    anchors: BTreeMap<Prefix, BTreeSet<RouterId>>,
}

impl<S: Scalar> Topology<S> {
    /// Router `i` sits at `positions[i]`. Links are undirected.
    pub fn new(positions: Vec<Point<S>>, links: Vec<Link>) -> Result<Self, TopologyError> {
        let n = positions.len();
        if n == 0 {
            return Err(TopologyError::TooFewRouters(1));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(links.len());
        for link in links {
            let (a, b) = if link.a <= link.b { (link.a, link.b) } else { (link.b, link.a) };
            if a == b {
                return Err(TopologyError::SelfLink(a));
            }
            if b.index() >= n {
                return Err(TopologyError::UnknownRouter(b));
            }
            if link.delay == SimDuration::ZERO {
                return Err(TopologyError::NonPositiveDelay(a, b));
            }
            if !seen.insert((a, b)) {
                return Err(TopologyError::DuplicateLink(a, b));
            }
            adjacency[a.index()].push((b, link.delay));
            adjacency[b.index()].push((a, link.delay));
            normalized.push(Link { a, b, delay: link.delay });
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        normalized.sort();
        let topo = Topology { positions, links: normalized, adjacency, anchors: BTreeMap::new() };
        if !topo.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(topo)
    }

    pub fn router_count(&self) -> usize {
        self.positions.len()
    }

    pub fn routers(&self) -> impl Iterator<Item = RouterId> + '_ {
        (0..self.positions.len() as u32).map(RouterId)
    }

    pub fn position(&self, r: RouterId) -> Point<S> {
        self.positions[r.index()]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn neighbors(&self, r: RouterId) -> &[(RouterId, SimDuration)] {
        &self.adjacency[r.index()]
    }

    pub fn link_delay(&self, a: RouterId, b: RouterId) -> Option<SimDuration> {
        let adj = self.adjacency.get(a.index())?;
        adj.binary_search_by_key(&b, |(n, _)| *n).ok().map(|i| adj[i].1)
    }

    pub fn anchors(&self) -> &BTreeMap<Prefix, BTreeSet<RouterId>> {
        &self.anchors
    }

    pub fn add_anchor(&mut self, prefix: Prefix, router: RouterId) -> Result<(), TopologyError> {
        if router.index() >= self.router_count() {
            return Err(TopologyError::UnknownRouter(router));
        }
        self.anchors.entry(prefix).or_default().insert(router);
        Ok(())
    }

    /// Prefixes anchored at `router`.
    pub fn anchored_at(&self, router: RouterId) -> impl Iterator<Item = &Prefix> + '_ {
        self.anchors
            .iter()
            .filter(move |(_, set)| set.contains(&router))
            .map(|(p, _)| p)
    }

    /// Every router anchors its own prefix `/p<id>`.
    pub fn with_prefix_per_router(mut self) -> Self {
        for r in self.routers().collect::<Vec<_>>() {
            let prefix = Prefix::from_components([format!("p{}", r.0)]).expect("valid component");
            self.anchors.entry(prefix).or_default().insert(r);
        }
        self
    }

    pub fn is_connected(&self) -> bool {
        let n = self.router_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for (v, _) in &self.adjacency[u] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    count += 1;
                    queue.push_back(v.index());
                }
            }
        }
        count == n
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.positions.iter().enumerate() {
            let _ = writeln!(out, "node {i} {} {}", p.x, p.y);
        }
        for l in &self.links {
            let _ = writeln!(out, "link {} {} {}", l.a, l.b, l.delay.as_millis_f64());
        }
        for (prefix, routers) in &self.anchors {
            for r in routers {
                let _ = writeln!(out, "anchor {prefix} {r}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut nodes: BTreeMap<u32, Point<S>> = BTreeMap::new();
        let mut links = Vec::new();
        let mut anchors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| TopologyError::Parse { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields.as_slice() {
                ["node", id, x, y] => {
                    let id: u32 = id.parse().map_err(|_| err(format!("bad router id {id:?}")))?;
                    let x: S = x.parse().map_err(|_| err(format!("bad coordinate {x:?}")))?;
                    let y: S = y.parse().map_err(|_| err(format!("bad coordinate {y:?}")))?;
                    if nodes.insert(id, Point { x, y }).is_some() {
                        return Err(err(format!("router {id} declared twice")));
                    }
                }
                ["link", a, b, delay] => {
                    let a: u32 = a.parse().map_err(|_| err(format!("bad router id {a:?}")))?;
                    let b: u32 = b.parse().map_err(|_| err(format!("bad router id {b:?}")))?;
                    let d: f64 = delay.parse().map_err(|_| err(format!("bad delay {delay:?}")))?;
                    if d.is_nan() || d <= 0.0 {
                        return Err(err(format!("delay must be positive, got {delay}")));
                    }
                    links.push((line, Link {
                        a: RouterId(a),
                        b: RouterId(b),
                        delay: SimDuration::from_millis_f64(d),
                    }));
                }
                ["anchor", prefix, r] => {
                    let prefix: Prefix =
                        prefix.parse().map_err(|e| err(format!("bad prefix: {e}")))?;
                    let r: u32 = r.parse().map_err(|_| err(format!("bad router id {r:?}")))?;
                    anchors.push((line, prefix, RouterId(r)));
                }
                _ => return Err(err(format!("unrecognized record {content:?}"))),
            }
        }
        let n = nodes.len();
        if nodes.keys().copied().ne(0..n as u32) {
            return Err(TopologyError::NonContiguousIds(n));
        }
        for (line, l) in &links {
            for r in [l.a, l.b] {
                if r.index() >= n {
                    return Err(TopologyError::Parse {
                        line: *line,
                        msg: format!("link references unknown router {r}"),
                    });
                }
            }
        }
        let mut topo = Topology::new(nodes.into_values().collect(), links.into_iter().map(|(_, l)| l).collect())?;
        for (line, prefix, r) in anchors {
            topo.add_anchor(prefix, r).map_err(|e| TopologyError::Parse { line, msg: e.to_string() })?;
        }
        Ok(topo)
    }
}

/// Parameters of a random geometric graph.
#[derive(Clone, Debug)]
pub struct GeometricParams<S> {
    pub node_count: usize,
    pub area_side: S,
    pub link_radius: S,
    pub link_delay: SimDuration,
    pub max_attempts: u32,
}

impl<S: Scalar> GeometricParams<S> {
    pub fn new(node_count: usize, area_side: S, link_radius: S, link_delay: SimDuration) -> Self {
        GeometricParams { node_count, area_side, link_radius, link_delay, max_attempts: 1_000 }
    }
}

/// Places routers uniformly in a square and links every pair within the
/// radius, resampling the placement until the graph is connected.
pub fn generate_topology<S: Scalar>(
    params: &GeometricParams<S>,
    seed: u64,
) -> Result<Topology<S>, TopologyError> {
    if params.node_count < 2 {
        return Err(TopologyError::TooFewRouters(2));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius_sq = params.link_radius * params.link_radius;
    for _ in 0..params.max_attempts {
        let positions: Vec<Point<S>> = (0..params.node_count)
            .map(|_| Point {
                x: S::from_f64_lossy(rng.random::<f64>()) * params.area_side,
                y: S::from_f64_lossy(rng.random::<f64>()) * params.area_side,
            })
            .collect();
        let mut links = Vec::new();
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                if positions[i].distance_sq(&positions[j]) <= radius_sq {
                    links.push(Link {
                        a: RouterId(i as u32),
                        b: RouterId(j as u32),
                        delay: params.link_delay,
                    });
                }
            }
        }
        match Topology::new(positions, links) {
            Ok(t) => return Ok(t),
            Err(TopologyError::Disconnected) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(TopologyError::RetriesExhausted(params.max_attempts))
}
