//! Baseline NDN router: content store, nonce-tracking PIT, ranked FIB.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::content::{CachingMode, ContentStore};
use crate::fib::Fib;
use crate::forwarder::{Emission, Forwarder, NodeCounters, TableSizes};
use crate::ids::{ConsumerId, Face, RouterId};
use crate::message::{Bytes, DataPacket, Nack, NackCode, NdnInterest, Packet};
use crate::name::{Name, Prefix};
use crate::time::{SimDuration, SimTime};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NdnConfig {
    pub caching: CachingMode,
    pub pit_lifetime: SimDuration,
    pub cs_capacity: Option<usize>,
}

impl Default for NdnConfig {
    fn default() -> Self {
        NdnConfig {
            caching: CachingMode::OnPath,
            pit_lifetime: SimDuration::from_secs(4),
            cs_capacity: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    /// `(nonce, incoming face)` in arrival order.
    pub in_records: Vec<(u64, Face)>,
    pub out_interfaces: BTreeSet<RouterId>,
    pub created: SimTime,
    pub expiry: SimTime,
}

impl PitEntry {
    pub fn has_nonce(&self, nonce: u64) -> bool {
        self.in_records.iter().any(|(n, _)| *n == nonce)
    }

    /// Distinct incoming faces, in first-arrival order.
    pub fn in_faces(&self) -> Vec<Face> {
        let mut seen = BTreeSet::new();
        self.in_records.iter().filter(|(_, f)| seen.insert(*f)).map(|(_, f)| *f).collect()
    }
}

#[derive(Clone, Debug)]
pub struct NdnNode {
    id: RouterId,
    fib: Fib,
    pit: HashMap<Name, PitEntry>,
    store: ContentStore,
    anchored: Vec<Prefix>,
    config: NdnConfig,
    counters: NodeCounters,
}

fn emit(to: Face, packet: Packet) -> Emission {
    Emission { to, packet }
}

impl NdnNode {
    pub fn new(id: RouterId, fib: Fib, anchored: Vec<Prefix>, config: NdnConfig) -> Self {
        NdnNode {
            id,
            fib,
            pit: HashMap::new(),
            store: ContentStore::new(config.cs_capacity),
            anchored,
            config,
            counters: NodeCounters::default(),
        }
    }

    pub fn pit_entry(&self, name: &Name) -> Option<&PitEntry> {
        self.pit.get(name)
    }

    pub fn pit_len(&self) -> usize {
        self.pit.len()
    }

    pub fn has_content(&self, name: &Name) -> bool {
        self.store.contains(name)
    }

    fn nack(&mut self, to: Face, name: Name, code: NackCode) -> Vec<Emission> {
        match code {
            NackCode::NoContent => self.counters.no_content_nacks_sent += 1,
            NackCode::NoRoute => self.counters.no_route_nacks_sent += 1,
            NackCode::Loop => self.counters.loop_nacks_sent += 1,
        }
        vec![emit(to, Packet::Nack(Nack { name, code, dart: None }))]
    }

    pub fn ndn_on_interest(
        &mut self,
        from: Face,
        interest: NdnInterest,
        now: SimTime,
    ) -> Vec<Emission> {
        let NdnInterest { name, nonce } = interest;
        if let Some(data) = self.store.fetch(&name) {
            self.counters.cache_hits += 1;
            return vec![emit(from, Packet::Data(data))];
        }
        if self.anchored.iter().any(|p| p.matches(&name)) {
            return self.nack(from, name, NackCode::NoContent);
        }
        if let Some(entry) = self.pit.get_mut(&name) {
            if entry.has_nonce(nonce) {
                return self.nack(from, name, NackCode::Loop);
            }
            entry.in_records.push((nonce, from));
            self.counters.aggregated += 1;
            return Vec::new();
        }
        let came_from = match from {
            Face::Router(r) => Some(r),
            Face::Consumer(_) => None,
        };
        let next = self
            .fib
            .lookup(&name)
            .and_then(|(_, tuples)| tuples.iter().find(|t| Some(t.next_hop) != came_from))
            .map(|t| t.next_hop);
        let Some(next) = next else {
            return self.nack(from, name, NackCode::NoRoute);
        };
        self.pit.insert(
            name.clone(),
            PitEntry {
                name: name.clone(),
                in_records: vec![(nonce, from)],
                out_interfaces: BTreeSet::from([next]),
                created: now,
                expiry: now + self.config.pit_lifetime,
            },
        );
        vec![emit(Face::Router(next), Packet::NdnInterest(NdnInterest { name, nonce }))]
    }

    pub fn ndn_on_data(&mut self, _from: RouterId, data: DataPacket, _now: SimTime) -> Vec<Emission> {
        let Some(entry) = self.pit.remove(&data.name) else {
            self.counters.unsolicited_data += 1;
            return Vec::new();
        };
        let faces = entry.in_faces();
        let cache = match self.config.caching {
            CachingMode::OnPath => true,
            CachingMode::Edge => faces.iter().any(|f| matches!(f, Face::Consumer(_))),
            CachingMode::None => false,
        };
        if cache {
            self.store.cache(&data);
        }
        let data = data.with_dart(None);
        faces.into_iter().map(|f| emit(f, Packet::Data(data.clone()))).collect()
    }

    /// A NACK closes the upstream it came from; once no upstream is left the
    /// NACK goes to every downstream face and the entry is dropped.
    pub fn ndn_on_nack(&mut self, from: RouterId, nack: Nack, _now: SimTime) -> Vec<Emission> {
        let Some(entry) = self.pit.get_mut(&nack.name) else {
            self.counters.unsolicited_nack += 1;
            return Vec::new();
        };
        if !entry.out_interfaces.remove(&from) {
            self.counters.unsolicited_nack += 1;
            return Vec::new();
        }
        if !entry.out_interfaces.is_empty() {
            return Vec::new();
        }
        let entry = self.pit.remove(&nack.name).expect("entry checked above");
        let nack = Nack { dart: None, ..nack };
        entry.in_faces().into_iter().map(|f| emit(f, Packet::Nack(nack.clone()))).collect()
    }

    /// Removes entries whose expiry has passed; their requesters get nothing.
    pub fn ndn_expire_pit(&mut self, now: SimTime) -> usize {
        let before = self.pit.len();
        self.pit.retain(|_, e| e.expiry > now);
        let n = before - self.pit.len();
        self.counters.pit_expired += n as u64;
        n
    }

    pub fn dump_lines(&self) -> Vec<String> {
        let mut names: Vec<&Name> = self.pit.keys().collect();
        names.sort();
        names
            .into_iter()
            .map(|name| {
                let e = &self.pit[name];
                let mut line = format!("pit {} {}", self.id, name);
                for (nonce, face) in &e.in_records {
                    let _ = write!(line, " {nonce},{face}");
                }
                for out in &e.out_interfaces {
                    let _ = write!(line, " {out}");
                }
                line
            })
            .collect()
    }
}

impl Forwarder for NdnNode {
    fn id(&self) -> RouterId {
        self.id
    }

    fn on_consumer_interest(
        &mut self,
        consumer: ConsumerId,
        name: &Name,
        nonce: u64,
        now: SimTime,
    ) -> Vec<Emission> {
        self.ndn_on_interest(
            Face::Consumer(consumer),
            NdnInterest { name: name.clone(), nonce },
            now,
        )
    }

    fn on_packet(&mut self, from: RouterId, packet: Packet, now: SimTime) -> Vec<Emission> {
        match packet {
            Packet::NdnInterest(i) => self.ndn_on_interest(Face::Router(from), i, now),
            Packet::Data(d) => self.ndn_on_data(from, d, now),
            Packet::Nack(n) => self.ndn_on_nack(from, n, now),
            Packet::Interest(_) => Vec::new(),
        }
    }

    fn on_sweep(&mut self, now: SimTime) -> usize {
        self.ndn_expire_pit(now)
    }

    fn on_link_down(&mut self, neighbor: RouterId) -> usize {
        let before = self.pit.len();
        let gone = Face::Router(neighbor);
        self.pit.retain(|_, e| {
            e.in_records.retain(|(_, f)| *f != gone);
            e.out_interfaces.remove(&neighbor);
            !e.in_records.is_empty() && !e.out_interfaces.is_empty()
        });
        before - self.pit.len()
    }

    fn publish(&mut self, name: Name, security_payload: Bytes, payload: Bytes) {
        self.store.publish(name, security_payload, payload);
    }

    fn table_sizes(&self) -> TableSizes {
        TableSizes { forwarding: self.pit.len(), rct_pending: 0 }
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
        self.dump_lines().into_iter().map(|l| l + "\n").collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fib::FibTuple;

    fn n(s: &str) -> Name {
        s.parse().unwrap()
    }

    fn t(ms: u64) -> SimTime {
        SimTime::from_millis(ms)
    }

    fn node() -> NdnNode {
        let mut fib = Fib::new();
        let tuples = [2, 3]
            .iter()
            .map(|&h| FibTuple { next_hop: RouterId(h), distance: h, anchor: RouterId(9), rank: 0 })
            .collect();
        fib.set("/p".parse().unwrap(), tuples).unwrap();
        NdnNode::new(RouterId(1), fib, Vec::new(), NdnConfig::default())
    }

    fn interest(name: &str, nonce: u64) -> NdnInterest {
        NdnInterest { name: n(name), nonce }
    }

    fn data(name: &str) -> DataPacket {
        DataPacket {
            name: n(name),
            security_payload: Bytes::from(vec![]),
            dart: None,
            payload: Bytes::from(vec![5]),
        }
    }

    #[test]
    fn store_hit_answers_without_pit() {
        let mut r = node();
        r.publish(n("/p/1"), Bytes::from(vec![]), Bytes::from(vec![]));
        let out = r.ndn_on_interest(Face::Router(RouterId(0)), interest("/p/1", 1), t(0));
        assert!(matches!(out[0].packet, Packet::Data(_)));
        assert_eq!(r.pit_len(), 0);
    }

    #[test]
    fn duplicate_nonce_is_nacked_new_nonce_aggregated() {
        let mut r = node();
        let first = r.ndn_on_interest(Face::Router(RouterId(0)), interest("/p/1", 7), t(0));
        assert_eq!(first.len(), 1);
        let dup = r.ndn_on_interest(Face::Router(RouterId(4)), interest("/p/1", 7), t(1));
        assert_eq!(dup.len(), 1);
        assert_eq!(dup[0].to, Face::Router(RouterId(4)));
        assert!(matches!(&dup[0].packet, Packet::Nack(k) if k.code == NackCode::Loop));
        let agg = r.ndn_on_interest(Face::Router(RouterId(4)), interest("/p/1", 9), t(2));
        assert!(agg.is_empty());
        assert_eq!(r.pit_entry(&n("/p/1")).unwrap().in_records.len(), 2);
    }

    #[test]
    fn forwards_to_best_interface_other_than_sender() {
        let mut r = node();
        let out = r.ndn_on_interest(Face::Router(RouterId(2)), interest("/p/1", 1), t(0));
        assert_eq!(out[0].to, Face::Router(RouterId(3)));
        let nr = r.ndn_on_interest(Face::Router(RouterId(2)), interest("/q/1", 1), t(0));
        assert!(matches!(&nr[0].packet, Packet::Nack(k) if k.code == NackCode::NoRoute));
    }

    #[test]
    fn data_fans_out_to_all_in_faces_and_clears_entry() {
        let mut r = node();
        r.ndn_on_interest(Face::Router(RouterId(0)), interest("/p/1", 7), t(0));
        r.ndn_on_interest(Face::Consumer(ConsumerId(4)), interest("/p/1", 9), t(0));
        let out = r.ndn_on_data(RouterId(2), data("/p/1"), t(5));
        let to: Vec<Face> = out.iter().map(|e| e.to).collect();
        assert_eq!(to, vec![Face::Router(RouterId(0)), Face::Consumer(ConsumerId(4))]);
        assert_eq!(r.pit_len(), 0);
        assert!(r.has_content(&n("/p/1")));
        assert!(r.ndn_on_data(RouterId(2), data("/p/1"), t(6)).is_empty());
        assert_eq!(r.counters().unsolicited_data, 1);
    }

    #[test]
    fn expiry_removes_only_stale_entries() {
        let mut r = node();
        r.ndn_on_interest(Face::Router(RouterId(0)), interest("/p/1", 7), t(0));
        r.ndn_on_interest(Face::Router(RouterId(0)), interest("/p/2", 7), t(2000));
        assert_eq!(r.ndn_expire_pit(t(1000)), 0);
        assert_eq!(r.ndn_expire_pit(t(4001)), 1);
        assert_eq!(r.pit_len(), 1);
    }

    #[test]
    fn nack_from_last_upstream_propagates() {
        let mut r = node();
        r.ndn_on_interest(Face::Consumer(ConsumerId(1)), interest("/p/1", 7), t(0));
        let nack = Nack { name: n("/p/1"), code: NackCode::NoContent, dart: None };
        let out = r.ndn_on_nack(RouterId(2), nack, t(3));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to, Face::Consumer(ConsumerId(1)));
        assert_eq!(r.pit_len(), 0);
    }

    #[test]
    fn dump_line_format() {
        let mut r = node();
        r.ndn_on_interest(Face::Router(RouterId(0)), interest("/p/1", 7), t(0));
        r.ndn_on_interest(Face::Consumer(ConsumerId(4)), interest("/p/1", 9), t(0));
        assert_eq!(r.dump_lines(), vec!["pit 1 /p/1 7,0 9,c4 2".to_string()]);
    }
}
