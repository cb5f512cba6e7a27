use crate::fib::Fib;
use crate::ids::{ConsumerId, Face, RouterId};
use crate::message::{Bytes, Packet};
use crate::name::Name;
use crate::time::SimTime;

/// A packet a router wants sent: to a neighbor over a link, or to a local
/// consumer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Emission {
    pub to: Face,
    pub packet: Packet,
}

impl Emission {
    pub fn to_router(r: RouterId, packet: Packet) -> Self {
        Emission { to: Face::Router(r), packet }
    }

    pub fn to_consumer(c: ConsumerId, packet: Packet) -> Self {
        Emission { to: Face::Consumer(c), packet }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TableSizes {
    /// DART entries (including locally originated routes) or PIT entries.
    pub forwarding: usize,
    /// Pending local requests in the RCT; always zero for NDN.
    pub rct_pending: usize,
}

/// Per-router event counters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeCounters {
    pub orphan_data: u64,
    pub orphan_nack: u64,
    pub unsolicited_data: u64,
    pub unsolicited_nack: u64,
    pub loop_nacks_sent: u64,
    pub no_route_nacks_sent: u64,
    pub no_content_nacks_sent: u64,
    pub aggregated: u64,
    pub darts_created: u64,
    pub darts_evicted: u64,
    pub pit_expired: u64,
    pub cache_hits: u64,
    pub rejected_payloads: u64,
}

impl NodeCounters {
    pub fn add(&mut self, other: &NodeCounters) {
        self.orphan_data += other.orphan_data;
        self.orphan_nack += other.orphan_nack;
        self.unsolicited_data += other.unsolicited_data;
        self.unsolicited_nack += other.unsolicited_nack;
        self.loop_nacks_sent += other.loop_nacks_sent;
        self.no_route_nacks_sent += other.no_route_nacks_sent;
        self.no_content_nacks_sent += other.no_content_nacks_sent;
        self.aggregated += other.aggregated;
        self.darts_created += other.darts_created;
        self.darts_evicted += other.darts_evicted;
        self.pit_expired += other.pit_expired;
        self.cache_hits += other.cache_hits;
        self.rejected_payloads += other.rejected_payloads;
    }

    /// Name/value pairs in a fixed order, for reports.
    pub fn entries(&self) -> [(&'static str, u64); 13] {
        [
            ("orphan_data", self.orphan_data),
            ("orphan_nack", self.orphan_nack),
            ("unsolicited_data", self.unsolicited_data),
            ("unsolicited_nack", self.unsolicited_nack),
            ("loop_nacks", self.loop_nacks_sent),
            ("no_route_nacks", self.no_route_nacks_sent),
            ("no_content_nacks", self.no_content_nacks_sent),
            ("aggregated", self.aggregated),
            ("darts_created", self.darts_created),
            ("darts_evicted", self.darts_evicted),
            ("pit_expired", self.pit_expired),
            ("cache_hits", self.cache_hits),
            ("rejected_payloads", self.rejected_payloads),
        ]
    }
}

/// Router state machine driven by the simulator. Calls are strictly
/// sequential per router.
pub trait Forwarder {
    fn id(&self) -> RouterId;

    /// Request from a locally attached consumer. `nonce` is only used by
    /// schemes that carry one.
    fn on_consumer_interest(
        &mut self,
        consumer: ConsumerId,
        name: &Name,
        nonce: u64,
        now: SimTime,
    ) -> Vec<Emission>;

    fn on_packet(&mut self, from: RouterId, packet: Packet, now: SimTime) -> Vec<Emission>;

    /// Periodic housekeeping (DART eviction or PIT expiry). Returns entries removed.
    fn on_sweep(&mut self, now: SimTime) -> usize;

    fn on_link_down(&mut self, neighbor: RouterId) -> usize;

    fn publish(&mut self, name: Name, security_payload: Bytes, payload: Bytes);

    fn table_sizes(&self) -> TableSizes;

    fn counters(&self) -> &NodeCounters;

    fn fib(&self) -> &Fib;

    fn fib_mut(&mut self) -> &mut Fib;

    /// State dump lines in the scheme's debug format.
    fn dump_state(&self) -> String;
}
