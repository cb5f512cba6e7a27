use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::content::{CachingMode, ContentHandle, ContentStore};
use crate::dart::table::{DartEntry, DartTable};
use crate::fib::{Fib, FibTuple};
use crate::forwarder::{Emission, Forwarder, NodeCounters, TableSizes};
use crate::ids::{ConsumerId, Dart, Hop, RouterId};
use crate::message::{
    verify_security_payload, Bytes, DataPacket, Interest, Nack, NackCode, Packet,
};
use crate::name::{Name, Prefix};
use crate::time::{SimDuration, SimTime};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DartConfig {
    pub caching: CachingMode,
    /// Entries idle for longer than this are evicted on the next sweep.
    pub dart_ttl: SimDuration,
    /// Bound on cached (not produced) objects; `None` is unbounded.
    pub cs_capacity: Option<usize>,
}

impl Default for DartConfig {
    fn default() -> Self {
        DartConfig {
            caching: CachingMode::OnPath,
            dart_ttl: SimDuration::from_secs(10),
            cs_capacity: None,
        }
    }
}

/// Read-only view of one requested-content-table row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RctEntry {
    pub name: Name,
    pub content_location: Option<ContentHandle>,
    pub local_consumers: BTreeSet<ConsumerId>,
}

/// Returns the best-ranked tuple whose distance is strictly below
/// `received_hop_count`, never routing back to `predecessor`.
///
/// `tuples` must be in rank order.
pub fn dear_select(
    tuples: &[FibTuple],
    received_hop_count: u32,
    predecessor: Option<RouterId>,
) -> Option<FibTuple> {
    tuples
        .iter()
        .find(|t| t.distance < received_hop_count && Some(t.next_hop) != predecessor)
        .copied()
}

/// A CCN-DART router: per-route state only, no per-Interest state in transit.
#[derive(Clone, Debug)]
pub struct DartNode {
    id: RouterId,
    fib: Fib,
    darts: DartTable,
    /// Pending local requests; the cached half of the RCT lives in `store`.
    pending: HashMap<Name, BTreeSet<ConsumerId>>,
    store: ContentStore,
    anchored: Vec<Prefix>,
    config: DartConfig,
    next_dart: u32,
    counters: NodeCounters,
}

impl DartNode {
    pub fn new(id: RouterId, fib: Fib, anchored: Vec<Prefix>, config: DartConfig) -> Self {
        let mut anchored = anchored;
        anchored.sort();
        anchored.dedup();
        DartNode {
            id,
            fib,
            darts: DartTable::default(),
            pending: HashMap::new(),
            store: ContentStore::new(config.cs_capacity),
            anchored,
            config,
            next_dart: 1,
            counters: NodeCounters::default(),
        }
    }

    pub fn darts(&self) -> &DartTable {
        &self.darts
    }

    pub fn anchored_prefixes(&self) -> &[Prefix] {
        &self.anchored
    }

    pub fn is_anchor_for(&self, name: &Name) -> bool {
        self.anchored.iter().any(|p| p.matches(name))
    }

    pub fn rct_entry(&self, name: &Name) -> Option<RctEntry> {
        let location = self.store.handle(name);
        let consumers = self.pending.get(name).cloned().unwrap_or_default();
        if location.is_none() && consumers.is_empty() {
            return None;
        }
        Some(RctEntry { name: name.clone(), content_location: location, local_consumers: consumers })
    }

    /// DEAR against this router's FIB. `None` if the name has no FIB match
    /// or no tuple is strictly closer than `received_hop_count`.
    pub fn dear_check(
        &self,
        received_hop_count: u32,
        name: &Name,
        predecessor: Option<RouterId>,
    ) -> Option<FibTuple> {
        let (_, tuples) = self.fib.lookup(name)?;
        dear_select(tuples, received_hop_count, predecessor)
    }

    /// Next dart not used as a successor dart by any live entry.
    ///
    /// # Panics
    /// If every 32-bit value is live; unreachable at simulated scales.
    pub fn fresh_dart(&mut self) -> Dart {
        assert!(
            (self.darts.len() as u64) < (1u64 << 32),
            "router {}: dart space exhausted",
            self.id
        );
        loop {
            let candidate = Dart(self.next_dart);
            self.next_dart = self.next_dart.wrapping_add(1);
            if !self.darts.contains_successor_dart(candidate) {
                return candidate;
            }
        }
    }

    fn nack_consumer(&mut self, consumer: ConsumerId, name: &Name, code: NackCode) -> Emission {
        self.count_nack(code);
        Emission::to_consumer(consumer, Packet::Nack(Nack { name: name.clone(), code, dart: None }))
    }

    fn count_nack(&mut self, code: NackCode) {
        match code {
            NackCode::NoContent => self.counters.no_content_nacks_sent += 1,
            NackCode::NoRoute => self.counters.no_route_nacks_sent += 1,
            NackCode::Loop => self.counters.loop_nacks_sent += 1,
        }
    }

    /// Interest from a locally attached consumer.
    pub fn on_local_interest(
        &mut self,
        consumer: ConsumerId,
        name: &Name,
        now: SimTime,
    ) -> Vec<Emission> {
        if let Some(data) = self.store.fetch(name) {
            self.counters.cache_hits += 1;
            return vec![Emission::to_consumer(consumer, Packet::Data(data))];
        }
        if let Some(waiting) = self.pending.get_mut(name) {
            // A consumer repeating its own request is a retransmission and
            // goes back out; anyone else joins the pending request.
            if waiting.insert(consumer) {
                self.counters.aggregated += 1;
                return Vec::new();
            }
        }
        if self.is_anchor_for(name) {
            return vec![self.nack_consumer(consumer, name, NackCode::NoContent)];
        }
        let Some(best) = self.fib.lookup(name).map(|(_, t)| t[0]) else {
            return vec![self.nack_consumer(consumer, name, NackCode::NoRoute)];
        };
        self.pending.entry(name.clone()).or_default().insert(consumer);

        let (hop_count, dart) = match self.darts.local_route(best.anchor, best.next_hop) {
            Some(e) => (e.hop_count, e.successor_dart),
            None => {
                let sd = self.fresh_dart();
                self.darts.insert(DartEntry {
                    anchor: best.anchor,
                    predecessor: Hop::Local,
                    predecessor_dart: sd,
                    successor: best.next_hop,
                    successor_dart: sd,
                    hop_count: best.distance,
                    last_used: now,
                });
                self.counters.darts_created += 1;
                (best.distance, sd)
            }
        };
        self.darts.touch(dart, now);
        vec![Emission::to_router(
            best.next_hop,
            Packet::Interest(Interest::labeled(name.clone(), hop_count, dart)),
        )]
    }

    /// Interest relayed by neighbor `from`.
    pub fn on_neighbor_interest(
        &mut self,
        from: RouterId,
        interest: Interest,
        now: SimTime,
    ) -> Vec<Emission> {
        let Some(label) = interest.label else {
            // Routers always label what they send; an unlabeled Interest
            // from a router cannot be answered along a route.
            return Vec::new();
        };
        let name = interest.name;
        let reply_nack = |node: &mut Self, code| {
            node.count_nack(code);
            vec![Emission::to_router(
                from,
                Packet::Nack(Nack { name: name.clone(), code, dart: Some(label.dart) }),
            )]
        };

        if let Some(data) = self.store.fetch(&name) {
            self.counters.cache_hits += 1;
            return vec![Emission::to_router(from, Packet::Data(data.with_dart(Some(label.dart))))];
        }
        if self.is_anchor_for(&name) {
            return reply_nack(self, NackCode::NoContent);
        }
        let Some((_, tuples)) = self.fib.lookup(&name) else {
            return reply_nack(self, NackCode::NoRoute);
        };

        if let Some(entry) = self.darts.by_predecessor(Hop::Router(from), label.dart).copied() {
            // The predecessor always labels a route with the same hop count;
            // a label that no longer clears the entry's own count would break
            // descent, so it is refused like any other DEAR failure.
            if entry.hop_count >= label.hop_count {
                return reply_nack(self, NackCode::Loop);
            }
            self.darts.touch(entry.successor_dart, now);
            return vec![Emission::to_router(
                entry.successor,
                Packet::Interest(Interest::labeled(name, entry.hop_count, entry.successor_dart)),
            )];
        }

        let Some(chosen) = dear_select(tuples, label.hop_count, Some(from)) else {
            return reply_nack(self, NackCode::Loop);
        };
        let sd = self.fresh_dart();
        self.darts.insert(DartEntry {
            anchor: chosen.anchor,
            predecessor: Hop::Router(from),
            predecessor_dart: label.dart,
            successor: chosen.next_hop,
            successor_dart: sd,
            hop_count: chosen.distance,
            last_used: now,
        });
        self.counters.darts_created += 1;
        vec![Emission::to_router(
            chosen.next_hop,
            Packet::Interest(Interest::labeled(name, chosen.distance, sd)),
        )]
    }

    fn deliver_pending(&mut self, data: &DataPacket) -> Vec<Emission> {
        let Some(consumers) = self.pending.remove(&data.name) else {
            return Vec::new();
        };
        consumers
            .into_iter()
            .map(|c| Emission::to_consumer(c, Packet::Data(data.with_dart(None))))
            .collect()
    }

    pub fn on_data(&mut self, _from: RouterId, data: DataPacket, now: SimTime) -> Vec<Emission> {
        if !verify_security_payload(&data) {
            self.counters.rejected_payloads += 1;
            return Vec::new();
        }
        let Some(dart) = data.dart else {
            self.counters.unsolicited_data += 1;
            return Vec::new();
        };
        let Some(entry) = self.darts.by_successor_dart(dart).copied() else {
            self.counters.orphan_data += 1;
            return Vec::new();
        };
        self.darts.touch(dart, now);

        let mut out = match entry.predecessor {
            Hop::Local => self.deliver_pending(&data),
            Hop::Router(k) => vec![Emission::to_router(
                k,
                Packet::Data(data.with_dart(Some(entry.predecessor_dart))),
            )],
        };

        let cache = match self.config.caching {
            CachingMode::OnPath => true,
            CachingMode::Edge => entry.predecessor == Hop::Local,
            CachingMode::None => false,
        };
        if cache {
            self.store.cache(&data);
            // Local requests still waiting on another route are answered from
            // the copy now held here.
            out.extend(self.deliver_pending(&data));
        }
        out
    }

    pub fn on_nack(&mut self, _from: RouterId, nack: Nack, now: SimTime) -> Vec<Emission> {
        let Some(dart) = nack.dart else {
            self.counters.unsolicited_nack += 1;
            return Vec::new();
        };
        let Some(entry) = self.darts.by_successor_dart(dart).copied() else {
            self.counters.orphan_nack += 1;
            return Vec::new();
        };
        self.darts.touch(dart, now);
        match entry.predecessor {
            Hop::Local => {
                let consumers = self.pending.remove(&nack.name).unwrap_or_default();
                consumers
                    .into_iter()
                    .map(|c| {
                        Emission::to_consumer(c, Packet::Nack(Nack { dart: None, ..nack.clone() }))
                    })
                    .collect()
            }
            Hop::Router(k) => vec![Emission::to_router(
                k,
                Packet::Nack(Nack { dart: Some(entry.predecessor_dart), ..nack }),
            )],
        }
    }

    /// Drops idle entries; returns how many.
    pub fn evict_darts(&mut self, now: SimTime) -> usize {
        let n = self.darts.evict_idle(now, self.config.dart_ttl);
        self.counters.darts_evicted += n as u64;
        n
    }

    /// `dart` lines followed by `rct` lines, each sorted.
    pub fn dump_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for e in self.darts.entries_sorted() {
            lines.push(format!(
                "dart {} {} {} {} {} {} {}",
                self.id,
                e.anchor,
                e.predecessor,
                e.predecessor_dart,
                e.successor,
                e.successor_dart,
                e.hop_count
            ));
        }
        let mut rct: Vec<(String, String)> = Vec::new();
        for (name, _) in self.store.names_sorted() {
            rct.push((name.to_string(), format!("rct {} {} cached", self.id, name)));
        }
        for (name, consumers) in &self.pending {
            let mut line = format!("rct {} {} pending", self.id, name);
            for c in consumers {
                let _ = write!(line, " {c}");
            }
            rct.push((name.to_string(), line));
        }
        rct.sort();
        lines.extend(rct.into_iter().map(|(_, l)| l));
        lines
    }
}

impl Forwarder for DartNode {
    fn id(&self) -> RouterId {
        self.id
    }

    fn on_consumer_interest(
        &mut self,
        consumer: ConsumerId,
        name: &Name,
        _nonce: u64,
        now: SimTime,
    ) -> Vec<Emission> {
        self.on_local_interest(consumer, name, now)
    }

    fn on_packet(&mut self, from: RouterId, packet: Packet, now: SimTime) -> Vec<Emission> {
        match packet {
            Packet::Interest(i) => self.on_neighbor_interest(from, i, now),
            Packet::Data(d) => self.on_data(from, d, now),
            Packet::Nack(n) => self.on_nack(from, n, now),
            // Foreign packet family; a DART router has nowhere to put it.
            Packet::NdnInterest(_) => Vec::new(),
        }
    }

    fn on_sweep(&mut self, now: SimTime) -> usize {
        self.evict_darts(now)
    }

    fn on_link_down(&mut self, neighbor: RouterId) -> usize {
        self.darts.remove_neighbor(neighbor)
    }

    fn publish(&mut self, name: Name, security_payload: Bytes, payload: Bytes) {
        self.store.publish(name, security_payload, payload);
    }

    fn table_sizes(&self) -> TableSizes {
        TableSizes { forwarding: self.darts.len(), rct_pending: self.pending.len() }
    }

    fn counters(&self) -> &NodeCounters {
        &self.counters
    }

    fn fib(&self) -> &Fib {
        &self.fib
    }

    fn fib_mut(&mut self) -> &mut Fib {
        &mut self.fib
    }

    fn dump_state(&self) -> String {
        let mut s = String::new();
        for l in self.dump_lines() {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn r(i: u32) -> RouterId {
        RouterId(i)
    }

    fn n(s: &str) -> Name {
        s.parse().unwrap()
    }

    fn tuple(next: u32, distance: u32, anchor: u32) -> FibTuple {
        FibTuple { next_hop: r(next), distance, anchor: r(anchor), rank: 0 }
    }

    fn node_with(id: u32, tuples: Vec<FibTuple>) -> DartNode {
        let mut fib = Fib::new();
        fib.set("/p".parse().unwrap(), tuples).unwrap();
        DartNode::new(r(id), fib, Vec::new(), DartConfig::default())
    }

    fn t(ms: u64) -> SimTime {
        SimTime::from_millis(ms)
    }

    fn sent_interest(e: &Emission) -> (RouterId, u32, Dart) {
        match (&e.to, &e.packet) {
            (crate::ids::Face::Router(to), Packet::Interest(i)) => {
                (*to, i.hop_count().unwrap(), i.dart().unwrap())
            }
            other => panic!("expected interest to router, got {other:?}"),
        }
    }

    fn data(name: &str, dart: Option<Dart>) -> DataPacket {
        DataPacket {
            name: n(name),
            security_payload: Bytes::from(vec![0xaa]),
            dart,
            payload: Bytes::from(vec![1, 2, 3]),
        }
    }

    // Router ids for the ranking-loop example: a=0 b=1 p=2 x=4 y=5.
    fn router_a() -> DartNode {
        node_with(0, vec![tuple(1, 4, 10), tuple(2, 4, 11), tuple(4, 6, 12), tuple(5, 6, 13)])
    }

    #[test]
    fn dear_picks_best_ranked_strictly_closer_tuple() {
        let a = router_a();
        let got = a.dear_check(5, &n("/p/j"), Some(r(5))).unwrap();
        assert_eq!((got.next_hop, got.distance), (r(1), 4));
    }

    #[test]
    fn dear_fails_without_closer_tuple() {
        // b's tuples: x at 6, a at 5, with h = 4 received from a.
        let b = node_with(1, vec![tuple(4, 6, 9), tuple(0, 5, 9)]);
        assert!(b.dear_check(4, &n("/p/j"), Some(r(0))).is_none());
        assert!(router_a().dear_check(0, &n("/p/j"), None).is_none());
    }

    #[test]
    fn dear_never_returns_the_predecessor() {
        let tuples = [tuple(3, 2, 9), tuple(4, 3, 9)];
        assert_eq!(dear_select(&tuples, 5, Some(r(3))).unwrap().next_hop, r(4));
    }

    #[test]
    fn neighbor_interest_creates_entry_and_descends() {
        // b: x at 6 (rank 1), a at 5, q at 3.
        let mut b = node_with(1, vec![tuple(4, 6, 9), tuple(0, 5, 9), tuple(3, 3, 9)]);
        let out = b.on_neighbor_interest(r(0), Interest::labeled(n("/p/j"), 4, Dart(77)), t(0));
        assert_eq!(out.len(), 1);
        let (to, h, sd) = sent_interest(&out[0]);
        assert_eq!((to, h), (r(3), 3));
        let e = b.darts().by_successor_dart(sd).unwrap();
        assert_eq!(e.predecessor, Hop::Router(r(0)));
        assert_eq!(e.predecessor_dart, Dart(77));
        assert_eq!(e.hop_count, 3);
    }

    #[test]
    fn neighbor_interest_without_closer_tuple_is_loop_nacked() {
        let mut b = node_with(1, vec![tuple(4, 6, 9), tuple(0, 5, 9)]);
        let out = b.on_neighbor_interest(r(0), Interest::labeled(n("/p/j"), 4, Dart(5)), t(0));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to, crate::ids::Face::Router(r(0)));
        assert_eq!(
            out[0].packet,
            Packet::Nack(Nack { name: n("/p/j"), code: NackCode::Loop, dart: Some(Dart(5)) })
        );
        assert!(b.darts().is_empty());
        assert_eq!(b.counters().loop_nacks_sent, 1);
    }

    #[test]
    fn same_predecessor_dart_reuses_entry_across_names() {
        let mut b = node_with(1, vec![tuple(3, 3, 9)]);
        let first = b.on_neighbor_interest(r(0), Interest::labeled(n("/p/1"), 4, Dart(8)), t(0));
        let second = b.on_neighbor_interest(r(0), Interest::labeled(n("/p/2"), 4, Dart(8)), t(5));
        assert_eq!(sent_interest(&first[0]), sent_interest(&second[0]));
        assert_eq!(b.darts().len(), 1);
        assert_eq!(b.darts().entries_sorted()[0].last_used, t(5));
    }

    #[test]
    fn reused_entry_refuses_a_label_it_would_not_descend_from() {
        let mut b = node_with(1, vec![tuple(3, 3, 9)]);
        b.on_neighbor_interest(r(0), Interest::labeled(n("/p/1"), 4, Dart(8)), t(0));
        let out = b.on_neighbor_interest(r(0), Interest::labeled(n("/p/2"), 3, Dart(8)), t(1));
        assert!(matches!(&out[0].packet, Packet::Nack(k) if k.code == NackCode::Loop));
        assert_eq!(b.darts().len(), 1);
    }

    #[test]
    fn neighbor_interest_store_and_anchor_and_route_outcomes() {
        let mut fib = Fib::new();
        fib.set("/p".parse().unwrap(), vec![tuple(3, 3, 9)]).unwrap();
        let mut node =
            DartNode::new(r(1), fib, vec!["/own".parse().unwrap()], DartConfig::default());
        node.publish(n("/own/x"), Bytes::from(vec![]), Bytes::from(vec![9]));

        let hit = node.on_neighbor_interest(r(0), Interest::labeled(n("/own/x"), 2, Dart(4)), t(0));
        assert!(matches!(&hit[0].packet, Packet::Data(d) if d.dart == Some(Dart(4))));

        let missing =
            node.on_neighbor_interest(r(0), Interest::labeled(n("/own/y"), 2, Dart(4)), t(0));
        assert!(matches!(&missing[0].packet, Packet::Nack(k) if k.code == NackCode::NoContent));

        let unrouted =
            node.on_neighbor_interest(r(0), Interest::labeled(n("/q/z"), 2, Dart(4)), t(0));
        assert!(matches!(&unrouted[0].packet, Packet::Nack(k) if k.code == NackCode::NoRoute && k.dart == Some(Dart(4))));
    }

    #[test]
    fn local_requests_aggregate_at_origin() {
        let mut a = node_with(0, vec![tuple(1, 3, 9)]);
        let first = a.on_local_interest(ConsumerId(1), &n("/p/1"), t(0));
        assert_eq!(first.len(), 1);
        for c in 2..=4 {
            assert!(a.on_local_interest(ConsumerId(c), &n("/p/1"), t(1)).is_empty());
        }
        let rct = a.rct_entry(&n("/p/1")).unwrap();
        assert_eq!(rct.local_consumers.len(), 4);
        assert!(rct.content_location.is_none());
        assert_eq!(a.counters().aggregated, 3);
    }

    #[test]
    fn local_route_is_reused_with_pd_equal_sd() {
        let mut a = node_with(0, vec![tuple(1, 3, 9)]);
        let one = a.on_local_interest(ConsumerId(1), &n("/p/1"), t(0));
        let two = a.on_local_interest(ConsumerId(1), &n("/p/2"), t(1));
        assert_eq!(sent_interest(&one[0]), sent_interest(&two[0]));
        let (_, h, sd) = sent_interest(&one[0]);
        assert_eq!(h, 3);
        let e = a.darts().by_successor_dart(sd).unwrap();
        assert_eq!((e.predecessor, e.predecessor_dart), (Hop::Local, sd));
        assert_eq!(a.darts().len(), 1);
    }

    #[test]
    fn consumer_retransmission_is_forwarded_again() {
        let mut a = node_with(0, vec![tuple(1, 3, 9)]);
        a.on_local_interest(ConsumerId(1), &n("/p/1"), t(0));
        let again = a.on_local_interest(ConsumerId(1), &n("/p/1"), t(1000));
        assert_eq!(again.len(), 1);
        assert_eq!(a.counters().aggregated, 0);
    }

    #[test]
    fn local_outcomes_store_hit_no_content_no_route() {
        let mut fib = Fib::new();
        fib.set("/p".parse().unwrap(), vec![tuple(1, 3, 9)]).unwrap();
        let mut a = DartNode::new(r(0), fib, vec!["/own".parse().unwrap()], DartConfig::default());
        a.publish(n("/own/1"), Bytes::from(vec![]), Bytes::from(vec![]));

        let hit = a.on_local_interest(ConsumerId(1), &n("/own/1"), t(0));
        assert!(matches!(&hit[0].packet, Packet::Data(d) if d.dart.is_none()));
        let nc = a.on_local_interest(ConsumerId(1), &n("/own/2"), t(0));
        assert!(matches!(&nc[0].packet, Packet::Nack(k) if k.code == NackCode::NoContent));
        let nr = a.on_local_interest(ConsumerId(1), &n("/zzz/2"), t(0));
        assert!(matches!(&nr[0].packet, Packet::Nack(k) if k.code == NackCode::NoRoute));
        assert!(a.darts().is_empty());
    }

    #[test]
    fn data_swaps_dart_toward_predecessor() {
        let mut s = node_with(7, vec![tuple(8, 1, 8)]);
        let fwd = s.on_neighbor_interest(r(6), Interest::labeled(n("/p/j"), 2, Dart(41)), t(0));
        let (_, _, sd) = sent_interest(&fwd[0]);
        let back = s.on_data(r(8), data("/p/j", Some(sd)), t(30));
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].to, crate::ids::Face::Router(r(6)));
        assert!(matches!(&back[0].packet, Packet::Data(d) if d.dart == Some(Dart(41))));
    }

    #[test]
    fn data_at_origin_reaches_every_waiting_consumer() {
        let mut a = node_with(0, vec![tuple(1, 3, 9)]);
        let out = a.on_local_interest(ConsumerId(1), &n("/p/1"), t(0));
        a.on_local_interest(ConsumerId(3), &n("/p/1"), t(0));
        let (_, _, sd) = sent_interest(&out[0]);
        let got = a.on_data(r(1), data("/p/1", Some(sd)), t(10));
        let mut to: Vec<_> = got.iter().map(|e| e.to).collect();
        to.sort();
        assert_eq!(
            to,
            vec![crate::ids::Face::Consumer(ConsumerId(1)), crate::ids::Face::Consumer(ConsumerId(3))]
        );
        assert!(got.iter().all(|e| e.packet.dart().is_none()));
        let rct = a.rct_entry(&n("/p/1")).unwrap();
        assert!(rct.local_consumers.is_empty());
        assert!(rct.content_location.is_some());
    }

    #[test]
    fn unknown_dart_is_counted_and_dropped() {
        let mut a = node_with(0, vec![tuple(1, 3, 9)]);
        assert!(a.on_data(r(1), data("/p/1", Some(Dart(999))), t(0)).is_empty());
        assert_eq!(a.counters().orphan_data, 1);
        let nack = Nack { name: n("/p/1"), code: NackCode::Loop, dart: Some(Dart(999)) };
        assert!(a.on_nack(r(1), nack, t(0)).is_empty());
        assert_eq!(a.counters().orphan_nack, 1);
    }

    #[test]
    fn caching_modes() {
        for (mode, transit_caches, origin_caches) in [
            (CachingMode::OnPath, true, true),
            (CachingMode::Edge, false, true),
            (CachingMode::None, false, false),
        ] {
            let cfg = DartConfig { caching: mode, ..DartConfig::default() };
            let mut fib = Fib::new();
            fib.set("/p".parse().unwrap(), vec![tuple(1, 3, 9)]).unwrap();
            let mut node = DartNode::new(r(0), fib, Vec::new(), cfg);

            let fwd = node.on_neighbor_interest(r(2), Interest::labeled(n("/p/t"), 4, Dart(3)), t(0));
            let (_, _, sd) = sent_interest(&fwd[0]);
            node.on_data(r(1), data("/p/t", Some(sd)), t(1));
            assert_eq!(node.rct_entry(&n("/p/t")).is_some(), transit_caches, "{mode:?}");

            let out = node.on_local_interest(ConsumerId(1), &n("/p/o"), t(2));
            let (_, _, sd) = sent_interest(&out[0]);
            node.on_data(r(1), data("/p/o", Some(sd)), t(3));
            assert_eq!(node.rct_entry(&n("/p/o")).is_some(), origin_caches, "{mode:?}");
        }
    }

    #[test]
    fn nack_relayed_with_predecessor_dart() {
        let mut a = node_with(0, vec![tuple(1, 4, 9)]);
        let fwd = a.on_neighbor_interest(r(5), Interest::labeled(n("/p/j"), 5, Dart(12)), t(0));
        let (_, _, sd) = sent_interest(&fwd[0]);
        let nack = Nack { name: n("/p/j"), code: NackCode::Loop, dart: Some(sd) };
        let out = a.on_nack(r(1), nack, t(1));
        assert_eq!(out[0].to, crate::ids::Face::Router(r(5)));
        assert_eq!(out[0].packet.dart(), Some(Dart(12)));
    }

    #[test]
    fn nack_at_origin_clears_request_and_tolerates_duplicates() {
        let mut a = node_with(0, vec![tuple(1, 4, 9)]);
        let out = a.on_local_interest(ConsumerId(1), &n("/p/j"), t(0));
        let (_, _, sd) = sent_interest(&out[0]);
        let nack = Nack { name: n("/p/j"), code: NackCode::NoContent, dart: Some(sd) };
        let first = a.on_nack(r(1), nack.clone(), t(1));
        assert_eq!(first.len(), 1);
        assert!(a.rct_entry(&n("/p/j")).is_none());
        assert!(a.on_nack(r(1), nack, t(2)).is_empty());
    }

    #[test]
    fn fresh_darts_are_distinct_and_skip_live_values() {
        let mut a = node_with(0, vec![tuple(1, 4, 9)]);
        assert_eq!(a.fresh_dart(), Dart(1));
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            assert!(seen.insert(a.fresh_dart()));
        }

        let mut b = node_with(0, vec![tuple(1, 4, 9)]);
        for d in 1..=3 {
            b.darts.insert(DartEntry {
                anchor: r(9),
                predecessor: Hop::Router(r(d + 10)),
                predecessor_dart: Dart(d),
                successor: r(1),
                successor_dart: Dart(d),
                hop_count: 3,
                last_used: t(0),
            });
        }
        b.next_dart = 1;
        assert!(!(1..=3).contains(&b.fresh_dart().0));

        let mut c = node_with(0, vec![tuple(1, 4, 9)]);
        c.next_dart = u32::MAX;
        c.darts.insert(DartEntry {
            anchor: r(9),
            predecessor: Hop::Router(r(3)),
            predecessor_dart: Dart(0),
            successor: r(1),
            successor_dart: Dart(0),
            hop_count: 3,
            last_used: t(0),
        });
        assert_eq!(c.fresh_dart(), Dart(u32::MAX));
        assert_eq!(c.fresh_dart(), Dart(1));
    }

    #[test]
    fn eviction_respects_ttl_and_orphans_late_data() {
        let mut s = node_with(7, vec![tuple(8, 1, 8)]);
        let fwd = s.on_neighbor_interest(r(6), Interest::labeled(n("/p/j"), 2, Dart(41)), t(0));
        let (_, _, sd) = sent_interest(&fwd[0]);
        assert_eq!(s.evict_darts(t(10_000)), 0);
        assert_eq!(s.evict_darts(t(10_001)), 1);
        assert!(s.darts().is_consistent());
        assert!(s.darts().is_empty());
        assert!(s.on_data(r(8), data("/p/j", Some(sd)), t(10_002)).is_empty());
        assert_eq!(s.counters().orphan_data, 1);
    }

    #[test]
    fn link_down_removes_entries_at_either_end() {
        let mut b = node_with(1, vec![tuple(3, 3, 9), tuple(4, 3, 9)]);
        b.on_neighbor_interest(r(0), Interest::labeled(n("/p/1"), 4, Dart(1)), t(0));
        b.on_neighbor_interest(r(4), Interest::labeled(n("/p/1"), 4, Dart(1)), t(0));
        b.on_neighbor_interest(r(5), Interest::labeled(n("/p/1"), 4, Dart(1)), t(0));
        assert_eq!(b.darts().len(), 3);
        assert_eq!(b.on_link_down(r(9)), 0);
        // Entry from 4 goes to 3; entries from 0 and 5 go to 3 as well.
        assert_eq!(b.on_link_down(r(4)), 1);
        assert_eq!(b.on_link_down(r(3)), 2);
        assert!(b.darts().is_consistent());
    }

    #[test]
    fn dump_lines_have_expected_shape() {
        let mut a = node_with(0, vec![tuple(1, 3, 9)]);
        a.on_local_interest(ConsumerId(2), &n("/p/1"), t(0));
        let lines = a.dump_lines();
        assert_eq!(lines, vec!["dart 0 9 self 1 1 1 3".to_string(), "rct 0 /p/1 pending c2".to_string()]);
    }
}
