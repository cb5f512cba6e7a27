//! `compare`: folds a directory of per-cell CSVs into per-rate summaries of
//! both schemes and writes gnuplot data for the three figures.
//!
//! Means are taken over seeds with every seed weighted equally; delays are
//! pooled over all measured requests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ccn_dart::sim::{parse_csv, Scheme};
use ccn_dart::CachingMode;

use crate::error::LabError;
use crate::run::{manifest_cells, write_atomic, Cell, MANIFEST};

pub const DEFAULT_THRESHOLD: f64 = 2.0;

/// Network-wide numbers of one CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMetrics {
    pub cell: Cell,
    pub table_mean: f64,
    pub table_std: f64,
    pub rct_pending_mean: f64,
    pub interests_mean: f64,
    pub delay_mean_ms: f64,
    pub delay_count: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeStats {
    pub seeds: usize,
    /// Mean PIT (NDN) or DART (CCN-DART) entries per router.
    pub table: f64,
    /// Spread of the per-router means, averaged over seeds.
    pub table_std: f64,
    pub rct_pending: f64,
    pub interests: f64,
    /// `NaN` when no request was measured.
    pub delay_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub rate: f64,
    pub ndn: SchemeStats,
    pub dart: SchemeStats,
}

impl RateRow {
    /// Mean PIT size over mean DART size.
    pub fn ratio(&self) -> f64 {
        self.ndn.table / self.dart.table
    }

    /// (DART − NDN) / NDN for Interests received per router.
    pub fn interest_excess(&self) -> f64 {
        (self.dart.interests - self.ndn.interests) / self.ndn.interests
    }

    /// |DART − NDN| / NDN for mean end-to-end delay.
    pub fn delay_gap(&self) -> f64 {
        (self.dart.delay_ms - self.ndn.delay_ms).abs() / self.ndn.delay_ms
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateInvariance {
    /// max/min of mean DART size across rates.
    Invariant(f64),
    Varies(f64),
    InsufficientData,
}

impl std::fmt::Display for RateInvariance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateInvariance::Invariant(s) => write!(f, "yes (max/min {s:.2})"),
            RateInvariance::Varies(s) => write!(f, "no (max/min {s:.2})"),
            RateInvariance::InsufficientData => f.write_str("insufficient data"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CachingComparison {
    pub caching: CachingMode,
    /// Sorted by rate.
    pub rows: Vec<RateRow>,
    pub dart_invariance: RateInvariance,
}

impl CachingComparison {
    /// Mean PIT size at the top rate over that at the lowest rate.
    pub fn pit_growth(&self) -> Option<f64> {
        match (self.rows.first(), self.rows.last()) {
            (Some(lo), Some(hi)) if self.rows.len() > 1 => Some(hi.ndn.table / lo.ndn.table),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub threshold: f64,
    pub cachings: Vec<CachingComparison>,
}

fn metric(rows: &BTreeMap<&str, f64>, name: &str, file: &Path) -> Result<f64, LabError> {
    rows.get(name).copied().ok_or_else(|| LabError::Input {
        path: file.to_path_buf(),
        msg: format!("missing network-wide metric {name}"),
    })
}

/// Reads one cell CSV, checking that its rows agree with its file name.
pub fn load_cell(path: &Path) -> Result<CellMetrics, LabError> {
    let bad = |msg: String| LabError::Input { path: path.to_path_buf(), msg };
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let cell = Cell::parse_name(&stem)
        .ok_or_else(|| bad("file name is not <scheme>_<caching>_<rate>_s<seed>.csv".into()))?;
    let text = std::fs::read_to_string(path).map_err(LabError::io(format!("reading {}", path.display())))?;
    let rows = parse_csv(&text).map_err(|(line, msg)| bad(format!("line {line}: {msg}")))?;
    let mut all = BTreeMap::new();
    for r in &rows {
        if r.scheme.parse::<Scheme>() != Ok(cell.scheme)
            || r.caching.parse::<CachingMode>() != Ok(cell.caching)
            || r.rate != cell.rate
        {
            return Err(bad(format!("row for {}/{}/{} does not match the file name", r.scheme, r.caching, r.rate)));
        }
        if r.router == "all" {
            all.insert(r.metric.as_str(), r.value);
        }
    }
    Ok(CellMetrics {
        table_mean: metric(&all, "table_mean", path)?,
        table_std: metric(&all, "table_std", path)?,
        rct_pending_mean: metric(&all, "rct_pending_mean", path)?,
        interests_mean: metric(&all, "interests_received_mean", path)?,
        delay_mean_ms: metric(&all, "delay_ms_mean", path)?,
        delay_count: metric(&all, "delay_count", path)?,
        cell,
    })
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let manifest = dir.join(MANIFEST);
    if manifest.exists() {
        let text = std::fs::read_to_string(&manifest)
            .map_err(LabError::io(format!("reading {}", manifest.display())))?;
        return Ok(manifest_cells(&text).into_iter().map(|f| dir.join(f)).collect());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(LabError::io(format!("listing {}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads the threshold a run recorded in its manifest, if any.
fn manifest_threshold(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join(MANIFEST)).ok()?;
    text.lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == "rate_invariance_threshold")
        .and_then(|(_, v)| v.trim().parse().ok())
}

pub fn load_dir(dir: &Path) -> Result<Vec<CellMetrics>, LabError> {
    let files = csv_files(dir)?;
    if files.is_empty() {
        return Err(LabError::Input { path: dir.to_path_buf(), msg: "no cell CSVs found".into() });
    }
    files.iter().map(|f| load_cell(f)).collect()
}

fn stats(cells: &[&CellMetrics]) -> SchemeStats {
    let n = cells.len() as f64;
    let mean = |f: fn(&CellMetrics) -> f64| cells.iter().map(|c| f(c)).sum::<f64>() / n;
    let measured: f64 = cells.iter().map(|c| c.delay_count).sum();
    let delay = if measured > 0.0 {
        cells.iter().map(|c| c.delay_mean_ms * c.delay_count).sum::<f64>() / measured
    } else {
        f64::NAN
    };
    SchemeStats {
        seeds: cells.len(),
        table: mean(|c| c.table_mean),
        table_std: mean(|c| c.table_std),
        rct_pending: mean(|c| c.rct_pending_mean),
        interests: mean(|c| c.interests_mean),
        delay_ms: delay,
    }
}

/// Requires both schemes at every (caching, rate, seed) present in the
/// input; anything missing is listed in the error.
pub fn compare(cells: &[CellMetrics], threshold: f64, source: &Path) -> Result<Comparison, LabError> {
    let grid: BTreeSet<(CachingMode, u64, u64)> =
        cells.iter().map(|c| (c.cell.caching, c.cell.rate.to_bits(), c.cell.seed)).collect();
    let mut missing: BTreeMap<Scheme, Vec<String>> = BTreeMap::new();
    for &(caching, rate, seed) in &grid {
        for scheme in [Scheme::Dart, Scheme::Ndn] {
            let present = cells.iter().any(|c| {
                c.cell.scheme == scheme
                    && c.cell.caching == caching
                    && c.cell.rate.to_bits() == rate
                    && c.cell.seed == seed
            });
            if !present {
                missing
                    .entry(scheme)
                    .or_default()
                    .push(format!("{caching} rate={} seed={seed}", f64::from_bits(rate)));
            }
        }
    }
    if !missing.is_empty() {
        let msg = missing
            .iter()
            .map(|(s, list)| format!("missing {s} cells: {}", list.join(", ")))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(LabError::Input { path: source.to_path_buf(), msg });
    }

    let cachings: BTreeSet<CachingMode> = grid.iter().map(|g| g.0).collect();
    let mut out = Vec::new();
    for caching in cachings {
        let mut rates: Vec<f64> = grid
            .iter()
            .filter(|g| g.0 == caching)
            .map(|g| f64::from_bits(g.1))
            .collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        let rows: Vec<RateRow> = rates
            .iter()
            .map(|&rate| {
                let pick = |scheme| -> Vec<&CellMetrics> {
                    cells
                        .iter()
                        .filter(|c| c.cell.scheme == scheme && c.cell.caching == caching && c.cell.rate == rate)
                        .collect()
                };
                RateRow { rate, ndn: stats(&pick(Scheme::Ndn)), dart: stats(&pick(Scheme::Dart)) }
            })
            .collect();
        let dart_invariance = if rows.len() < 2 {
            RateInvariance::InsufficientData
        } else {
            let sizes = rows.iter().map(|r| r.dart.table);
            let max = sizes.clone().fold(f64::MIN, f64::max);
            let min = sizes.fold(f64::MAX, f64::min);
            let spread = max / min;
            if spread <= threshold {
                RateInvariance::Invariant(spread)
            } else {
                RateInvariance::Varies(spread)
            }
        };
        out.push(CachingComparison { caching, rows, dart_invariance });
    }
    Ok(Comparison { threshold, cachings: out })
}

fn num(v: f64, prec: usize) -> String {
    if v.is_finite() { format!("{v:.prec$}") } else { "-".into() }
}

impl Comparison {
    /// Human-readable summary table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.cachings {
            let _ = writeln!(s, "caching {}", c.caching);
            let _ = writeln!(
                s,
                "{:>8} {:>10} {:>10} {:>9} {:>9} {:>12} {:>12} {:>10} {:>10}",
                "rate", "pit", "dart", "pit/dart", "rct", "int_ndn", "int_dart", "delay_ndn", "delay_dart"
            );
            for r in &c.rows {
                let _ = writeln!(
                    s,
                    "{:>8} {:>10} {:>10} {:>9} {:>9} {:>12} {:>12} {:>10} {:>10}",
                    r.rate,
                    num(r.ndn.table, 3),
                    num(r.dart.table, 3),
                    num(r.ratio(), 3),
                    num(r.dart.rct_pending, 3),
                    num(r.ndn.interests, 1),
                    num(r.dart.interests, 1),
                    num(r.ndn.delay_ms, 3),
                    num(r.dart.delay_ms, 3),
                );
            }
            let _ = writeln!(
                s,
                "dart size rate-invariant (threshold {}): {}",
                self.threshold, c.dart_invariance
            );
            match c.pit_growth() {
                Some(g) => {
                    let _ = writeln!(s, "pit growth, top over lowest rate: {}", num(g, 2));
                }
                None => {
                    let _ = writeln!(s, "pit growth, top over lowest rate: insufficient data");
                }
            }
            s.push('\n');
        }
        s
    }

    fn dat(&self, title: &str, columns: &str, row: impl Fn(&RateRow) -> Vec<f64>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {title}");
        let blocks: Vec<&str> = self.cachings.iter().map(|c| c.caching.as_str()).collect();
        let _ = writeln!(s, "# one block per caching mode (gnuplot index): {}", blocks.join(", "));
        let _ = writeln!(s, "# {columns}");
        for (i, c) in self.cachings.iter().enumerate() {
            if i > 0 {
                s.push_str("\n\n");
            }
            let _ = writeln!(s, "# caching {}", c.caching);
            for r in &c.rows {
                let vals: Vec<String> = row(r).into_iter().map(|v| num(v, 6)).collect();
                let _ = writeln!(s, "{} {}", r.rate, vals.join(" "));
            }
        }
        s
    }

    /// Table sizes against rate.
    pub fn fig3(&self) -> String {
        self.dat(
            "mean forwarding-state entries per router",
            "rate pit pit_std dart dart_std rct_pending",
            |r| vec![r.ndn.table, r.ndn.table_std, r.dart.table, r.dart.table_std, r.dart.rct_pending],
        )
    }

    /// Interests received per router against rate.
    pub fn fig4(&self) -> String {
        self.dat("mean Interests received per router", "rate ndn dart", |r| {
            vec![r.ndn.interests, r.dart.interests]
        })
    }

    /// End-to-end delay against rate.
    pub fn fig5(&self) -> String {
        self.dat("mean end-to-end delay (ms)", "rate ndn dart", |r| vec![r.ndn.delay_ms, r.dart.delay_ms])
    }
}

/// Compares the CSVs in `dir` and writes `fig3.dat`, `fig4.dat` and
/// `fig5.dat` into `out` (default: `dir`).
pub fn cmd_compare(dir: &Path, out: Option<&Path>) -> Result<Comparison, LabError> {
    let cells = load_dir(dir)?;
    let threshold = manifest_threshold(dir).unwrap_or(DEFAULT_THRESHOLD);
    let cmp = compare(&cells, threshold, dir)?;
    let out = out.unwrap_or(dir);
    for (name, body) in [("fig3.dat", cmp.fig3()), ("fig4.dat", cmp.fig4()), ("fig5.dat", cmp.fig5())] {
        write_atomic(&out.join(name), body.as_bytes())?;
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(scheme: Scheme, caching: CachingMode, rate: f64, seed: u64, table: f64) -> CellMetrics {
        CellMetrics {
            cell: Cell { scheme, caching, rate, seed },
            table_mean: table,
            table_std: 1.0,
            rct_pending_mean: 0.5,
            interests_mean: 100.0 * rate,
            delay_mean_ms: 50.0,
            delay_count: 10.0,
        }
    }

    fn both(rate: f64, seed: u64, pit: f64, dart: f64) -> Vec<CellMetrics> {
        vec![
            cell(Scheme::Ndn, CachingMode::OnPath, rate, seed, pit),
            cell(Scheme::Dart, CachingMode::OnPath, rate, seed, dart),
        ]
    }

    #[test]
    fn high_rate_row_has_ratio() {
        let mut cells = both(10.0, 1, 2.0, 20.0);
        cells.extend(both(200.0, 1, 200.0, 25.0));
        let cmp = compare(&cells, 2.0, Path::new("d")).unwrap();
        let c = &cmp.cachings[0];
        assert_eq!(c.rows.len(), 2);
        assert!((c.rows[1].ratio() - 8.0).abs() < 1e-12);
        assert_eq!(c.dart_invariance, RateInvariance::Invariant(1.25));
        assert_eq!(c.pit_growth(), Some(100.0));
        assert!(cmp.render().contains("8.000"));
    }

    #[test]
    fn single_rate_is_insufficient_data() {
        let cmp = compare(&both(10.0, 1, 2.0, 20.0), 2.0, Path::new("d")).unwrap();
        assert_eq!(cmp.cachings[0].dart_invariance, RateInvariance::InsufficientData);
        assert!(cmp.render().contains("insufficient data"));
    }

    #[test]
    fn ndn_only_input_lists_missing_dart_cells() {
        let cells = vec![cell(Scheme::Ndn, CachingMode::Edge, 10.0, 3, 1.0)];
        let err = compare(&cells, 2.0, Path::new("d")).unwrap_err().to_string();
        assert!(err.contains("missing dart cells: edge rate=10 seed=3"), "{err}");
        assert!(!err.contains("missing ndn"));
    }

    #[test]
    fn seeds_average_and_delays_pool() {
        let mut cells = both(10.0, 1, 2.0, 20.0);
        cells.extend(both(10.0, 2, 4.0, 30.0));
        cells[3].delay_mean_ms = 80.0;
        cells[3].delay_count = 30.0;
        let cmp = compare(&cells, 2.0, Path::new("d")).unwrap();
        let r = &cmp.cachings[0].rows[0];
        assert_eq!((r.ndn.table, r.dart.table, r.dart.seeds), (3.0, 25.0, 2));
        assert!((r.dart.delay_ms - (50.0 * 10.0 + 80.0 * 30.0) / 40.0).abs() < 1e-9);
    }

    #[test]
    fn dat_files_have_one_block_per_caching() {
        let mut cells = both(10.0, 1, 2.0, 20.0);
        cells.push(cell(Scheme::Ndn, CachingMode::Edge, 10.0, 1, 3.0));
        cells.push(cell(Scheme::Dart, CachingMode::Edge, 10.0, 1, 21.0));
        let cmp = compare(&cells, 2.0, Path::new("d")).unwrap();
        let f3 = cmp.fig3();
        assert_eq!(f3.matches("\n\n\n").count(), 1, "{f3}");
        assert!(f3.contains("10 2.000000 1.000000 20.000000 1.000000 0.500000"));
        assert!(cmp.fig5().contains("10 50.000000 50.000000"));
    }
}
