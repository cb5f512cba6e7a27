//! Live checks on DART Interest chains: every relay must lower the hop
//! count, no router may forward the same chain twice, and responses should
//! retrace the chain back to its origin.
//!
//! An Interest that comes back to a router it already left, and is rejected
//! there, is a loop that forwarding *detected*; it is counted, not flagged.
//! The chain only traverses a loop if that router forwards it again.

use std::collections::HashMap;
use std::fmt;

use crate::ids::RouterId;
use crate::name::Name;

/// One origin Interest and everything relayed on its behalf.
pub type ChainId = u64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    HopCountNotDescending { router: RouterId, received: u32, emitted: u32 },
    RouterRevisited { router: RouterId },
}

/// Counterexample produced when an audit check fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub kind: ViolationKind,
    pub chain: ChainId,
    pub name: Name,
    /// Routers visited so far, origin first, including the offending hop.
    pub path: Vec<RouterId>,
    /// Hop count carried out of each router in `path` (origin first).
    pub hop_counts: Vec<u32>,
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::HopCountNotDescending { router, received, emitted } => write!(
                f,
                "hop count did not descend at router {router}: received {received}, emitted {emitted}"
            )?,
            ViolationKind::RouterRevisited { router } => {
                write!(f, "interest forwarded twice by router {router}")?
            }
        }
        writeln!(f, " (chain {}, name {})", self.chain, self.name)?;
        for (i, r) in self.path.iter().enumerate() {
            match self.hop_counts.get(i) {
                Some(h) => writeln!(f, "  hop {i}: router {r} sent h={h}")?,
                None => writeln!(f, "  hop {i}: router {r}")?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for AuditViolation {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AuditStats {
    pub chains: u64,
    pub relays_checked: u64,
    /// Responses that walked the exact reverse path back to the origin.
    pub symmetric_responses: u64,
    /// Responses that left the reverse path or stopped short of the origin.
    pub asymmetric_responses: u64,
    /// Chains that ended without any response reaching the origin.
    pub unanswered: u64,
    /// Chains that came back to a router already on them and were rejected.
    pub loops_detected: u64,
    pub longest_path: u64,
}

#[derive(Debug)]
struct Chain {
    name: Name,
    path: Vec<RouterId>,
    hop_counts: Vec<u32>,
    /// Index into `path` of the router currently holding the response.
    response_at: Option<usize>,
    off_path: bool,
    returned: bool,
}

#[derive(Debug, Default)]
pub struct Auditor {
    chains: HashMap<ChainId, Chain>,
    next: ChainId,
    stats: AuditStats,
}

impl Auditor {
    pub fn stats(&self) -> AuditStats {
        let mut s = self.stats;
        s.unanswered += self.chains.len() as u64;
        s
    }

    /// An origin router sent an Interest carrying `hop_count`.
    pub fn open(&mut self, origin: RouterId, name: &Name, hop_count: u32) -> ChainId {
        let id = self.next;
        self.next += 1;
        self.stats.chains += 1;
        self.chains.insert(
            id,
            Chain {
                name: name.clone(),
                path: vec![origin],
                hop_counts: vec![hop_count],
                response_at: None,
                off_path: false,
                returned: false,
            },
        );
        id
    }

    fn violation(&self, id: ChainId, kind: ViolationKind, extra: Option<RouterId>) -> AuditViolation {
        let c = &self.chains[&id];
        let mut path = c.path.clone();
        path.extend(extra);
        AuditViolation {
            kind,
            chain: id,
            name: c.name.clone(),
            path,
            hop_counts: c.hop_counts.clone(),
        }
    }

    pub fn interest_arrived(&mut self, id: ChainId, at: RouterId) -> Result<(), AuditViolation> {
        let Some(c) = self.chains.get_mut(&id) else { return Ok(()) };
        if c.path.contains(&at) {
            c.returned = true;
        }
        c.path.push(at);
        self.stats.longest_path = self.stats.longest_path.max(c.path.len() as u64);
        Ok(())
    }

    pub fn interest_relayed(
        &mut self,
        id: ChainId,
        at: RouterId,
        received: u32,
        emitted: u32,
    ) -> Result<(), AuditViolation> {
        let Some(c) = self.chains.get_mut(&id) else { return Ok(()) };
        c.hop_counts.push(emitted);
        self.stats.relays_checked += 1;
        if c.path[..c.path.len() - 1].contains(&at) {
            return Err(self.violation(id, ViolationKind::RouterRevisited { router: at }, None));
        }
        if emitted >= received {
            return Err(self.violation(
                id,
                ViolationKind::HopCountNotDescending { router: at, received, emitted },
                None,
            ));
        }
        Ok(())
    }

    /// The router at the head of the chain answered (Data or NACK).
    pub fn response_started(&mut self, id: ChainId, at: RouterId) {
        if let Some(c) = self.chains.get_mut(&id) {
            match c.path.iter().rposition(|r| *r == at) {
                Some(i) if i + 1 == c.path.len() => c.response_at = Some(i),
                _ => c.off_path = true,
            }
        }
    }

    pub fn response_arrived(&mut self, id: ChainId, at: RouterId) {
        if let Some(c) = self.chains.get_mut(&id) {
            match c.response_at {
                Some(i) if i > 0 && c.path[i - 1] == at => c.response_at = Some(i - 1),
                _ => c.off_path = true,
            }
        }
    }

    /// Nothing further will be sent on behalf of the chain.
    pub fn end(&mut self, id: ChainId) {
        let Some(c) = self.chains.remove(&id) else { return };
        if c.returned {
            self.stats.loops_detected += 1;
        }
        match c.response_at {
            None => self.stats.unanswered += 1,
            Some(0) if !c.off_path => self.stats.symmetric_responses += 1,
            Some(_) => self.stats.asymmetric_responses += 1,
        }
    }
}
