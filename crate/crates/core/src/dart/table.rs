use std::collections::HashMap;

use crate::ids::{Dart, Hop, RouterId};
use crate::time::{SimDuration, SimTime};

/// One route segment through this router toward an anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DartEntry {
    pub anchor: RouterId,
    pub predecessor: Hop,
    pub predecessor_dart: Dart,
    pub successor: RouterId,
    pub successor_dart: Dart,
    /// Distance through the successor when the entry was created.
    pub hop_count: u32,
    pub last_used: SimTime,
}

/// DART with two indexes over one entry set: by `(predecessor,
/// predecessor dart)` for Interests and by successor dart for responses.
/// Locally originated routes are additionally indexed by `(anchor,
/// successor)` so origin Interests reuse them.
#[derive(Clone, Debug, Default)]
pub struct DartTable {
    by_succ: HashMap<Dart, DartEntry>,
    by_pred: HashMap<(Hop, Dart), Dart>,
    local: HashMap<(RouterId, RouterId), Dart>,
}

impl DartTable {
    pub fn len(&self) -> usize {
        self.by_succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_succ.is_empty()
    }

    pub fn contains_successor_dart(&self, dart: Dart) -> bool {
        self.by_succ.contains_key(&dart)
    }

    /// Panics if the successor dart or predecessor key is already live.
    pub fn insert(&mut self, entry: DartEntry) {
        let sd = entry.successor_dart;
        let key = (entry.predecessor, entry.predecessor_dart);
        assert!(!self.by_succ.contains_key(&sd), "successor dart {sd} reused");
        assert!(!self.by_pred.contains_key(&key), "predecessor key {key:?} already mapped");
        if entry.predecessor == Hop::Local {
            self.local.insert((entry.anchor, entry.successor), sd);
        }
        self.by_pred.insert(key, sd);
        self.by_succ.insert(sd, entry);
    }

    pub fn by_successor_dart(&self, dart: Dart) -> Option<&DartEntry> {
        self.by_succ.get(&dart)
    }

    pub fn by_predecessor(&self, pred: Hop, dart: Dart) -> Option<&DartEntry> {
        self.by_pred.get(&(pred, dart)).and_then(|sd| self.by_succ.get(sd))
    }

    pub fn local_route(&self, anchor: RouterId, successor: RouterId) -> Option<&DartEntry> {
        self.local.get(&(anchor, successor)).and_then(|sd| self.by_succ.get(sd))
    }

    pub fn touch(&mut self, successor_dart: Dart, now: SimTime) {
        if let Some(e) = self.by_succ.get_mut(&successor_dart) {
            e.last_used = now;
        }
    }

    pub fn remove(&mut self, successor_dart: Dart) -> Option<DartEntry> {
        let e = self.by_succ.remove(&successor_dart)?;
        self.by_pred.remove(&(e.predecessor, e.predecessor_dart));
        if e.predecessor == Hop::Local
            && self.local.get(&(e.anchor, e.successor)) == Some(&successor_dart)
        {
            self.local.remove(&(e.anchor, e.successor));
        }
        Some(e)
    }

    fn remove_where(&mut self, pred: impl Fn(&DartEntry) -> bool) -> usize {
        let doomed: Vec<Dart> =
            self.by_succ.values().filter(|e| pred(e)).map(|e| e.successor_dart).collect();
        for sd in &doomed {
            self.remove(*sd);
        }
        doomed.len()
    }

    /// Drops entries idle for strictly longer than `ttl`.
    pub fn evict_idle(&mut self, now: SimTime, ttl: SimDuration) -> usize {
        self.remove_where(|e| now.since(e.last_used) > ttl)
    }

    /// Drops entries whose predecessor or successor is `neighbor`.
    pub fn remove_neighbor(&mut self, neighbor: RouterId) -> usize {
        self.remove_where(|e| e.successor == neighbor || e.predecessor == Hop::Router(neighbor))
    }

    /// Entries ordered by successor dart.
    pub fn entries_sorted(&self) -> Vec<&DartEntry> {
        let mut v: Vec<_> = self.by_succ.values().collect();
        v.sort_by_key(|e| e.successor_dart);
        v
    }

    /// Both indexes describe the same entry set.
    pub fn is_consistent(&self) -> bool {
        self.by_pred.len() == self.by_succ.len()
            && self.by_pred.iter().all(|(key, sd)| {
                self.by_succ
                    .get(sd)
                    .is_some_and(|e| (e.predecessor, e.predecessor_dart) == *key)
            })
            && self.local.iter().all(|(key, sd)| {
                self.by_succ.get(sd).is_some_and(|e| {
                    e.predecessor == Hop::Local && (e.anchor, e.successor) == *key
                })
            })
    }
}
