//! `run`: the parameter sweep. Every (scheme, caching, rate, seed) cell is
//! an independent simulation; cells run in parallel and each CSV is written
//! atomically, so a crashed sweep never leaves a half-written file behind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ccn_dart::sim::{
    consumers_per_router, run, Scheme, SimError, SimInput, Workload, WorkloadSpec,
};
use ccn_dart::topology::generate_topology;
use ccn_dart::{compute_fibs, CachingMode, Fibs, GeometricParams, Topology};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, TopologySource, TOPOLOGY_COPY};
use crate::error::LabError;

pub const MANIFEST: &str = "manifest.txt";

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces the config's seed list with this single seed.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub audit: Option<bool>,
    /// Trace destination. With several cells, each gets `<path>.<cell>`.
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub scheme: Scheme,
    pub caching: CachingMode,
    pub rate: f64,
    pub seed: u64,
}

impl Cell {
    /// `<scheme>_<caching>_<rate>_s<seed>`; also the CSV file stem.
    pub fn name(&self) -> String {
        format!("{}_{}_{}_s{}", self.scheme, self.caching, self.rate, self.seed)
    }

    /// Inverse of [`Cell::name`] for a CSV file stem.
    pub fn parse_name(stem: &str) -> Option<Cell> {
        let mut parts = stem.split('_');
        let scheme = parts.next()?.parse().ok()?;
        let caching = parts.next()?.parse().ok()?;
        let rate = parts.next()?.parse().ok()?;
        let seed = parts.next()?.strip_prefix('s')?.parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        Some(Cell { scheme, caching, rate, seed })
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub cells: Vec<(Cell, PathBuf)>,
    pub manifest: PathBuf,
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &scheme in &cfg.schemes {
        for &caching in &cfg.cachings {
            for &rate in &cfg.rates {
                for &seed in &cfg.seeds {
                    out.push(Cell { scheme, caching, rate, seed });
                }
            }
        }
    }
    out
}

/// Loads `config`, applies `opts` and runs the sweep.
pub fn cmd_run(config: &Path, opts: &RunOptions) -> Result<RunSummary, LabError> {
    let cfg = ExperimentConfig::load(config)?;
    run_config(&cfg, opts)
}

/// Topology for one run seed: geometric graphs with no fixed seed are drawn
/// per run seed, everything else is shared.
fn topology_for(cfg: &ExperimentConfig, seed: u64) -> Result<Topology, LabError> {
    match &cfg.topology {
        TopologySource::Geometric { routers, area_side, link_radius, link_delay, seed: fixed } => {
            let params = GeometricParams::new(*routers, *area_side, *link_radius, *link_delay);
            let t = generate_topology(&params, fixed.unwrap_or(seed)).map_err(|e| LabError::Input {
                path: cfg.output.clone(),
                msg: format!("cannot build topology: {e}"),
            })?;
            Ok(t.with_prefix_per_router())
        }
        TopologySource::File { path, text } => {
            let t = Topology::parse(text)
                .map_err(|e| LabError::Input { path: path.clone(), msg: e.to_string() })?;
            Ok(if t.anchors().is_empty() { t.with_prefix_per_router() } else { t })
        }
    }
}

pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, LabError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(audit) = opts.audit {
        cfg.audit = audit;
    }
    if let Some(out) = &opts.out {
        cfg.output = out.clone();
    }
    let out_dir = cfg.output.clone();
    std::fs::create_dir_all(&out_dir)
        .map_err(LabError::io(format!("creating {}", out_dir.display())))?;

    let mut networks: BTreeMap<u64, (Topology, Fibs)> = BTreeMap::new();
    for &seed in &cfg.seeds {
        let t = topology_for(&cfg, seed)?;
        let fibs = compute_fibs(&t);
        networks.insert(seed, (t, fibs));
    }

    let grid = cells(&cfg);
    let single = grid.len() == 1;
    let written: Vec<(Cell, PathBuf)> = grid
        .into_par_iter()
        .map(|cell| {
            let (topology, fibs) = &networks[&cell.seed];
            let path = run_cell(&cfg, &cell, topology, fibs, &out_dir, opts.trace.as_deref(), single)?;
            Ok((cell, path))
        })
        .collect::<Result<_, LabError>>()?;

    let manifest = write_manifest(&cfg, &out_dir, &written)?;
    Ok(RunSummary { out_dir, cells: written, manifest })
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    topology: &Topology,
    fibs: &Fibs,
    out_dir: &Path,
    trace: Option<&Path>,
    single: bool,
) -> Result<PathBuf, LabError> {
    let input = SimInput {
        consumers: consumers_per_router(topology.router_count(), cfg.consumers_per_router),
        workload: Workload::Generated(WorkloadSpec {
            zipf_alpha: cfg.zipf_alpha,
            catalog_size: cfg.catalog_size,
            per_router_rate: cell.rate,
            duration: cfg.duration,
            seed: cell.seed,
        }),
        publish: Vec::new(),
        script: Vec::new(),
    };
    let mut sim_cfg = cfg.sim_config(cell.scheme, cell.caching, cell.seed);
    sim_cfg.record_trace = trace.is_some();
    let outcome = run(topology, fibs, &input, &sim_cfg).map_err(|e| match e {
        SimError::Audit { violation, trace } => {
            LabError::Audit { cell: cell.name(), violation, trace }
        }
        other => LabError::Input { path: cfg.output.clone(), msg: format!("cell {}: {other}", cell.name()) },
    })?;

    if let Some(t) = trace {
        let dest = if single {
            t.to_path_buf()
        } else {
            let mut name = t.as_os_str().to_owned();
            name.push(format!(".{}", cell.name()));
            PathBuf::from(name)
        };
        let mut text = outcome.trace.join("\n");
        text.push('\n');
        write_atomic(&dest, text.as_bytes())?;
    }

    let path = out_dir.join(format!("{}.csv", cell.name()));
    write_atomic(&path, outcome.report.to_csv().as_bytes())?;
    Ok(path)
}

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !dir.exists() {
        std::fs::create_dir_all(dir).map_err(LabError::io(format!("creating {}", dir.display())))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(LabError::io(format!("writing {}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(LabError::io(format!("renaming into {}", path.display())))
}

/// The manifest is itself a runnable config: provenance lives in comments,
/// so `run <out>/manifest.txt` regenerates every CSV listed in it.
fn write_manifest(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    written: &[(Cell, PathBuf)],
) -> Result<PathBuf, LabError> {
    if let TopologySource::File { text, .. } = &cfg.topology {
        write_atomic(&out_dir.join(TOPOLOGY_COPY), text.as_bytes())?;
    }
    let mut m = String::new();
    let _ = writeln!(m, "# dartlab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "# config_sha256 {}", cfg.hash());
    for (cell, path) in written {
        let bytes = std::fs::read(path).map_err(LabError::io(format!("reading {}", path.display())))?;
        let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(m, "# cell {} {file} sha256={}", cell.name(), hex::encode(Sha256::digest(&bytes)));
    }
    m.push_str(&cfg.canonical());
    let path = out_dir.join(MANIFEST);
    write_atomic(&path, m.as_bytes())?;
    Ok(path)
}

/// CSV files a manifest lists, in manifest order.
pub fn manifest_cells(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# cell "))
        .filter_map(|rest| rest.split_whitespace().nth(1).map(str::to_string))
        .collect()
}
