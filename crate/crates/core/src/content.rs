//! Content storage shared by both router kinds: objects a router produces
//! (pinned) and objects it caches (optionally LRU-bounded).

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use crate::message::{Bytes, DataPacket};
use crate::name::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CachingMode {
    /// Every router on the response path caches.
    OnPath,
    /// Only the router that hands the object to a local consumer caches.
    Edge,
    None,
}

impl CachingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CachingMode::OnPath => "onpath",
            CachingMode::Edge => "edge",
            CachingMode::None => "none",
        }
    }
}

impl std::fmt::Display for CachingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CachingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "onpath" | "on-path" => Ok(CachingMode::OnPath),
            "edge" => Ok(CachingMode::Edge),
            "none" => Ok(CachingMode::None),
            other => Err(format!("unknown caching mode {other:?}")),
        }
    }
}

/// Storage handle for a locally held object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ContentHandle(u64);

#[derive(Clone, Debug)]
struct Slot {
    handle: ContentHandle,
    security_payload: Bytes,
    payload: Bytes,
    pinned: bool,
    touched: u64,
}

#[derive(Clone, Debug, Default)]
pub struct ContentStore {
    slots: HashMap<Name, Slot>,
    lru: BTreeMap<u64, Name>,
    capacity: Option<usize>,
    cached: usize,
    clock: u64,
}

impl ContentStore {
    /// `capacity` bounds cached (not pinned) objects; `None` is unbounded.
    pub fn new(capacity: Option<usize>) -> Self {
        ContentStore { capacity, ..Default::default() }
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Stores an object this router produces. Never evicted.
    pub fn publish(&mut self, name: Name, security_payload: Bytes, payload: Bytes) -> ContentHandle {
        let t = self.tick();
        if let Some(old) = self.slots.remove(&name) {
            if !old.pinned {
                self.lru.remove(&old.touched);
                self.cached -= 1;
            }
        }
        let handle = ContentHandle(t);
        self.slots.insert(name, Slot { handle, security_payload, payload, pinned: true, touched: t });
        handle
    }

    /// Caches a copy of `data`. Returns its handle and any names evicted to make room.
    pub fn cache(&mut self, data: &DataPacket) -> (ContentHandle, Vec<Name>) {
        if let Some(h) = self.touch(&data.name) {
            return (h, Vec::new());
        }
        let mut evicted = Vec::new();
        if let Some(cap) = self.capacity {
            if cap == 0 {
                return (ContentHandle(0), evicted);
            }
            while self.cached >= cap {
                let (_, victim) = self.lru.pop_first().expect("lru tracks every cached slot");
                self.slots.remove(&victim);
                self.cached -= 1;
                evicted.push(victim);
            }
        }
        let t = self.tick();
        let handle = ContentHandle(t);
        self.slots.insert(
            data.name.clone(),
            Slot {
                handle,
                security_payload: data.security_payload.clone(),
                payload: data.payload.clone(),
                pinned: false,
                touched: t,
            },
        );
        self.lru.insert(t, data.name.clone());
        self.cached += 1;
        (handle, evicted)
    }

    fn touch(&mut self, name: &Name) -> Option<ContentHandle> {
        let t = self.clock + 1;
        let slot = self.slots.get_mut(name)?;
        if !slot.pinned {
            self.lru.remove(&slot.touched);
            self.lru.insert(t, name.clone());
            slot.touched = t;
        }
        self.clock = t;
        Some(slot.handle)
    }

    /// Looks up `name`, refreshing its recency. The returned packet has no dart.
    pub fn fetch(&mut self, name: &Name) -> Option<DataPacket> {
        self.touch(name)?;
        let slot = &self.slots[name];
        Some(DataPacket {
            name: name.clone(),
            security_payload: slot.security_payload.clone(),
            dart: None,
            payload: slot.payload.clone(),
        })
    }

    pub fn handle(&self, name: &Name) -> Option<ContentHandle> {
        self.slots.get(name).map(|s| s.handle)
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.slots.contains_key(name)
    }

    /// Every stored name in sorted order, with whether it is pinned.
    pub fn names_sorted(&self) -> Vec<(&Name, bool)> {
        let mut v: Vec<_> = self.slots.iter().map(|(n, s)| (n, s.pinned)).collect();
        v.sort();
        v
    }

    pub fn cached_len(&self) -> usize {
        self.cached
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}
