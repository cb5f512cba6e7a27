//! Experiment configuration: a flat `key = value` text file.
//!
//! Lists are written `[a, b, c]` (a bare value is a one-element list), `#`
//! starts a comment, and relative paths resolve against the directory of
//! the config file. Every diagnostic carries the offending line number.
//!
//! ```text
//! # two-node smoke test
//! topology = file
//! topology_file = line2.topo
//! schemes = [dart, ndn]
//! rates = [10, 50]
//! seeds = [1, 2]
//! duration_s = 5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ccn_dart::sim::{Scheme, SimConfig};
use ccn_dart::{CachingMode, SimDuration};
use sha2::{Digest, Sha256};

use crate::error::LabError;

/// Where the router graph comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum TopologySource {
    /// Random geometric graph; `seed: None` draws one topology per run seed.
    Geometric {
        routers: usize,
        area_side: f64,
        link_radius: f64,
        link_delay: SimDuration,
        seed: Option<u64>,
    },
    /// Topology file, read at parse time. A file without `anchor` records
    /// gets one prefix per router.
    File { path: PathBuf, text: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologySource,
    pub schemes: Vec<Scheme>,
    pub cachings: Vec<CachingMode>,
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub zipf_alpha: f64,
    pub catalog_size: usize,
    pub duration: SimDuration,
    pub consumers_per_router: u32,
    pub dart_ttl: SimDuration,
    pub pit_lifetime: SimDuration,
    pub consumer_timeout: SimDuration,
    pub max_tries: u32,
    pub warmup_fraction: f64,
    pub sample_interval: SimDuration,
    pub cs_capacity: Option<usize>,
    pub audit: bool,
    pub output: PathBuf,
    /// DART size counts as rate-invariant when max/min across rates is at
    /// most this.
    pub rate_invariance_threshold: f64,
}

/// Name of the topology copy written beside a run's manifest.
pub const TOPOLOGY_COPY: &str = "topology.txt";

const KEYS: &[&str] = &[
    "topology",
    "topology_file",
    "routers",
    "area_side",
    "link_radius",
    "link_delay_ms",
    "topology_seed",
    "schemes",
    "cachings",
    "rates",
    "seeds",
    "zipf_alpha",
    "catalog_size",
    "duration_s",
    "consumers_per_router",
    "dart_ttl_s",
    "pit_lifetime_s",
    "consumer_timeout_s",
    "max_tries",
    "warmup_fraction",
    "sample_interval_ms",
    "cs_capacity",
    "audit",
    "output",
    "rate_invariance_threshold",
];

struct Entries<'a> {
    path: &'a Path,
    values: BTreeMap<String, (usize, String)>,
}

impl Entries<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> LabError {
        LabError::Config { path: self.path.to_path_buf(), line, msg: msg.into() }
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(l, _)| *l)
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn scalar<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, LabError> {
        match self.raw(key) {
            None => Ok(default),
            Some((line, v)) => {
                v.parse().map_err(|_| self.err(line, format!("{key}: cannot parse {v:?}")))
            }
        }
    }

    fn list<T>(
        &self,
        key: &str,
        default: Vec<T>,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Vec<T>, LabError> {
        let Some((line, v)) = self.raw(key) else { return Ok(default) };
        let items = split_list(v).map_err(|m| self.err(line, format!("{key}: {m}")))?;
        let parsed = items
            .iter()
            .map(|s| parse(s).map_err(|m| self.err(line, format!("{key}: {m}"))))
            .collect::<Result<Vec<T>, _>>()?;
        if parsed.is_empty() {
            return Err(self.err(line, format!("{key}: list must not be empty")));
        }
        Ok(parsed)
    }

    fn seconds(&self, key: &str, default: f64, scale: f64) -> Result<SimDuration, LabError> {
        let v: f64 = self.scalar(key, default)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(self.err(self.line(key), format!("{key}: must be positive, got {v}")));
        }
        Ok(SimDuration::from_secs_f64(v * scale))
    }
}

fn split_list(v: &str) -> Result<Vec<String>, String> {
    let inner = match (v.starts_with('['), v.ends_with(']')) {
        (true, true) => &v[1..v.len() - 1],
        (false, false) => return Ok(vec![v.to_string()]),
        _ => return Err(format!("unbalanced brackets in {v:?}")),
    };
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| {
            let s = s.trim();
            if s.is_empty() { Err(format!("empty list item in {v:?}")) } else { Ok(s.to_string()) }
        })
        .collect()
}

fn parse_on_off(v: &str) -> Option<bool> {
    match v {
        "on" | "true" | "yes" => Some(true),
        "off" | "false" | "no" => Some(false),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Input { path: path.to_path_buf(), msg: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, path, base)
    }

    /// Parses config text. `path` is only used in diagnostics; relative
    /// paths inside the file resolve against `base`.
    pub fn parse(text: &str, path: &Path, base: &Path) -> Result<Self, LabError> {
        let mut e = Entries { path, values: BTreeMap::new() };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(e.err(line, format!("expected `key = value`, found {content:?}")));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(e.err(line, format!("unknown key {k:?}")));
            }
            if v.is_empty() {
                return Err(e.err(line, format!("{k}: missing value")));
            }
            if let Some((first, _)) = e.values.insert(k.to_string(), (line, v.to_string())) {
                return Err(e.err(line, format!("{k}: already set on line {first}")));
            }
        }

        let topology = match e.raw("topology").map(|(l, v)| (l, v.to_string())) {
            None => geometric(&e)?,
            Some((_, v)) if v == "geometric" => geometric(&e)?,
            Some((_, v)) if v == "file" => {
                let Some((line, f)) = e.raw("topology_file") else {
                    return Err(e.err(e.line("topology"), "topology = file needs topology_file"));
                };
                let full = base.join(f);
                let text = std::fs::read_to_string(&full)
                    .map_err(|err| e.err(line, format!("topology_file {}: {err}", full.display())))?;
                ccn_dart::Topology::parse(&text)
                    .map_err(|err| e.err(line, format!("topology_file {}: {err}", full.display())))?;
                TopologySource::File { path: full, text }
            }
            Some((line, v)) => {
                return Err(e.err(line, format!("topology: expected geometric or file, got {v:?}")))
            }
        };

        let schemes = e.list("schemes", vec![Scheme::Dart, Scheme::Ndn], |s| s.parse())?;
        let cachings = e.list("cachings", vec![CachingMode::OnPath, CachingMode::Edge], |s| s.parse())?;
        let rates = e.list("rates", vec![10.0, 50.0, 100.0, 200.0], |s| match s.parse::<f64>() {
            Ok(r) if r.is_finite() && r > 0.0 => Ok(r),
            _ => Err(format!("rate must be a positive number, got {s:?}")),
        })?;
        let seeds = e.list("seeds", vec![1], |s| s.parse::<u64>().map_err(|_| format!("bad seed {s:?}")))?;
        for (list, key) in [(has_duplicates(&schemes), "schemes"), (has_duplicates(&cachings), "cachings"),
            (has_duplicates(&seeds), "seeds"), (has_duplicates(&rates), "rates")]
        {
            if list {
                return Err(e.err(e.line(key), format!("{key}: entries must be distinct")));
            }
        }

        let zipf_alpha: f64 = e.scalar("zipf_alpha", 0.7)?;
        if !(zipf_alpha.is_finite() && zipf_alpha >= 0.0) {
            return Err(e.err(e.line("zipf_alpha"), "zipf_alpha: must be >= 0"));
        }
        let catalog_size: usize = e.scalar("catalog_size", 10_000)?;
        if catalog_size == 0 {
            return Err(e.err(e.line("catalog_size"), "catalog_size: must be positive"));
        }
        let consumers_per_router: u32 = e.scalar("consumers_per_router", 1)?;
        if consumers_per_router == 0 {
            return Err(e.err(e.line("consumers_per_router"), "consumers_per_router: must be positive"));
        }
        let max_tries: u32 = e.scalar("max_tries", 3)?;
        if max_tries == 0 {
            return Err(e.err(e.line("max_tries"), "max_tries: must be positive"));
        }
        let warmup_fraction: f64 = e.scalar("warmup_fraction", 0.1)?;
        if !(0.0..1.0).contains(&warmup_fraction) {
            return Err(e.err(e.line("warmup_fraction"), "warmup_fraction: must be in [0, 1)"));
        }
        let cs_capacity = match e.raw("cs_capacity") {
            None | Some((_, "unbounded")) => None,
            Some((line, v)) => match v.parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => return Err(e.err(line, format!("cs_capacity: expected unbounded or a positive count, got {v:?}"))),
            },
        };
        let audit = match e.raw("audit") {
            None => true,
            Some((line, v)) => parse_on_off(v)
                .ok_or_else(|| e.err(line, format!("audit: expected on or off, got {v:?}")))?,
        };
        let threshold: f64 = e.scalar("rate_invariance_threshold", 2.0)?;
        if !(threshold.is_finite() && threshold >= 1.0) {
            return Err(e.err(e.line("rate_invariance_threshold"), "rate_invariance_threshold: must be >= 1"));
        }

        Ok(ExperimentConfig {
            topology,
            schemes,
            cachings,
            rates,
            seeds,
            zipf_alpha,
            catalog_size,
            duration: e.seconds("duration_s", 60.0, 1.0)?,
            consumers_per_router,
            dart_ttl: e.seconds("dart_ttl_s", 10.0, 1.0)?,
            pit_lifetime: e.seconds("pit_lifetime_s", 4.0, 1.0)?,
            consumer_timeout: e.seconds("consumer_timeout_s", 1.0, 1.0)?,
            max_tries,
            warmup_fraction,
            sample_interval: e.seconds("sample_interval_ms", 100.0, 1e-3)?,
            cs_capacity,
            audit,
            output: base.join(e.raw("output").map_or("out", |(_, v)| v)),
            rate_invariance_threshold: threshold,
        })
    }

    /// Simulator settings shared by every cell of the sweep.
    pub fn sim_config(&self, scheme: Scheme, caching: CachingMode, seed: u64) -> SimConfig {
        SimConfig {
            scheme,
            caching,
            dart_ttl: self.dart_ttl,
            pit_lifetime: self.pit_lifetime,
            consumer_timeout: self.consumer_timeout,
            max_tries: self.max_tries,
            warmup_fraction: self.warmup_fraction,
            sample_interval: self.sample_interval,
            cs_capacity: self.cs_capacity,
            audit: self.audit,
            nonce_seed: seed,
            ..SimConfig::default()
        }
    }

    /// Every setting that influences results, one `key = value` per line in
    /// a fixed order; itself a valid config. The output directory is
    /// deliberately left out.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let list = |v: Vec<String>| format!("[{}]", v.join(", "));
        match &self.topology {
            TopologySource::Geometric { routers, area_side, link_radius, link_delay, seed } => {
                let _ = writeln!(out, "topology = geometric");
                let _ = writeln!(out, "routers = {routers}");
                let _ = writeln!(out, "area_side = {area_side}");
                let _ = writeln!(out, "link_radius = {link_radius}");
                let _ = writeln!(out, "link_delay_ms = {}", link_delay.as_millis_f64());
                if let Some(s) = seed {
                    let _ = writeln!(out, "topology_seed = {s}");
                }
            }
            TopologySource::File { text, .. } => {
                // Runs copy the file next to their manifest under this name.
                let _ = writeln!(out, "topology = file");
                let _ = writeln!(out, "topology_file = {TOPOLOGY_COPY}");
                let _ = writeln!(out, "# topology_sha256 {}", hex::encode(Sha256::digest(text.as_bytes())));
            }
        }
        let _ = writeln!(out, "schemes = {}", list(self.schemes.iter().map(|s| s.to_string()).collect()));
        let _ = writeln!(out, "cachings = {}", list(self.cachings.iter().map(|c| c.to_string()).collect()));
        let _ = writeln!(out, "rates = {}", list(self.rates.iter().map(|r| r.to_string()).collect()));
        let _ = writeln!(out, "seeds = {}", list(self.seeds.iter().map(|s| s.to_string()).collect()));
        let _ = writeln!(out, "zipf_alpha = {}", self.zipf_alpha);
        let _ = writeln!(out, "catalog_size = {}", self.catalog_size);
        let _ = writeln!(out, "duration_s = {}", self.duration.as_secs_f64());
        let _ = writeln!(out, "consumers_per_router = {}", self.consumers_per_router);
        let _ = writeln!(out, "dart_ttl_s = {}", self.dart_ttl.as_secs_f64());
        let _ = writeln!(out, "pit_lifetime_s = {}", self.pit_lifetime.as_secs_f64());
        let _ = writeln!(out, "consumer_timeout_s = {}", self.consumer_timeout.as_secs_f64());
        let _ = writeln!(out, "max_tries = {}", self.max_tries);
        let _ = writeln!(out, "warmup_fraction = {}", self.warmup_fraction);
        let _ = writeln!(out, "sample_interval_ms = {}", self.sample_interval.as_millis_f64());
        let _ = writeln!(
            out,
            "cs_capacity = {}",
            self.cs_capacity.map_or("unbounded".to_string(), |n| n.to_string())
        );
        let _ = writeln!(out, "audit = {}", if self.audit { "on" } else { "off" });
        let _ = writeln!(out, "rate_invariance_threshold = {}", self.rate_invariance_threshold);
        out
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

fn geometric(e: &Entries<'_>) -> Result<TopologySource, LabError> {
    let routers: usize = e.scalar("routers", 50)?;
    if routers < 2 {
        return Err(e.err(e.line("routers"), "routers: need at least 2"));
    }
    let area_side: f64 = e.scalar("area_side", 50.0)?;
    let link_radius: f64 = e.scalar("link_radius", 12.0)?;
    for (key, v) in [("area_side", area_side), ("link_radius", link_radius)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(e.err(e.line(key), format!("{key}: must be positive")));
        }
    }
    let seed = match e.raw("topology_seed") {
        None => None,
        Some((line, v)) => Some(v.parse().map_err(|_| e.err(line, format!("topology_seed: bad seed {v:?}")))?),
    };
    Ok(TopologySource::Geometric {
        routers,
        area_side,
        link_radius,
        link_delay: e.seconds("link_delay_ms", 15.0, 1e-3)?,
        seed,
    })
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[..i].contains(a))
}
