//! Per-run measurements and their CSV form
//! (`scheme,caching,rate,router,metric,value`).

use std::fmt::Write as _;

use crate::content::CachingMode;
use crate::forwarder::NodeCounters;
use crate::ids::RouterId;
use crate::sim::audit::AuditStats;
use crate::sim::engine::Scheme;
use crate::stats::Summary;

pub const CSV_HEADER: &str = "scheme,caching,rate,router,metric,value";

#[derive(Clone, Debug, PartialEq)]
pub struct RouterMetrics {
    pub router: RouterId,
    /// Time-averaged PIT or DART entry count.
    pub table_mean: f64,
    pub table_max: u64,
    /// Time-averaged count of pending local requests (DART only).
    pub rct_pending_mean: f64,
    pub interests_received: u64,
    pub counters: NodeCounters,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RequestTally {
    pub issued: u64,
    pub satisfied: u64,
    pub nacked: u64,
    pub timed_out: u64,
    /// Interests a consumer sent again after a timeout.
    pub retransmissions: u64,
    /// Data or NACK reaching a consumer with nothing outstanding.
    pub late_responses: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub caching: CachingMode,
    pub rate: f64,
    pub routers: Vec<RouterMetrics>,
    /// Across routers, of each router's time-averaged table size.
    pub table: Summary<f64>,
    pub rct_pending: Summary<f64>,
    pub interests_received: Summary<f64>,
    /// End-to-end delays of satisfied requests issued in the measurement window.
    pub delays_ms: Vec<f64>,
    pub delay: Summary<f64>,
    pub requests: RequestTally,
    pub samples: u64,
    pub link_drops: u64,
    pub audit: Option<AuditStats>,
    pub totals: NodeCounters,
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

impl MetricsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        let prefix = format!("{},{},{}", self.scheme.as_str(), self.caching.as_str(), self.rate);
        let mut row = |router: &str, metric: &str, value: String| {
            let _ = writeln!(out, "{prefix},{router},{metric},{value}");
        };

        for r in &self.routers {
            let id = r.router.to_string();
            row(&id, "table_mean", num(r.table_mean));
            row(&id, "table_max", r.table_max.to_string());
            row(&id, "rct_pending_mean", num(r.rct_pending_mean));
            row(&id, "interests_received", r.interests_received.to_string());
            for (name, v) in r.counters.entries() {
                row(&id, name, v.to_string());
            }
        }

        let summaries = [
            ("table", &self.table),
            ("rct_pending", &self.rct_pending),
            ("interests_received", &self.interests_received),
            ("delay_ms", &self.delay),
        ];
        for (base, s) in summaries {
            row("all", &format!("{base}_mean"), num(s.mean));
            row("all", &format!("{base}_std"), num(s.std_dev));
            row("all", &format!("{base}_min"), num(s.min));
            row("all", &format!("{base}_max"), num(s.max));
        }
        row("all", "delay_count", self.delays_ms.len().to_string());
        let q = &self.requests;
        for (name, v) in [
            ("requests_issued", q.issued),
            ("requests_satisfied", q.satisfied),
            ("requests_nacked", q.nacked),
            ("requests_timed_out", q.timed_out),
            ("retransmissions", q.retransmissions),
            ("late_responses", q.late_responses),
            ("samples", self.samples),
            ("link_drops", self.link_drops),
        ] {
            row("all", name, v.to_string());
        }
        for (name, v) in self.totals.entries() {
            row("all", name, v.to_string());
        }
        if let Some(a) = &self.audit {
            for (name, v) in [
                ("audit_chains", a.chains),
                ("audit_relays_checked", a.relays_checked),
                ("audit_symmetric", a.symmetric_responses),
                ("audit_asymmetric", a.asymmetric_responses),
                ("audit_unanswered", a.unanswered),
                ("audit_loops_detected", a.loops_detected),
                ("audit_longest_path", a.longest_path),
                ("audit_violations", 0),
            ] {
                row("all", name, v.to_string());
            }
        }
        out
    }
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub scheme: String,
    pub caching: String,
    pub rate: f64,
    pub router: String,
    pub metric: String,
    pub value: f64,
}

/// Parses a metrics CSV, checking the header and every row against the
/// column contract. Errors carry the 1-based line number.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, (usize, String)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        Some((_, h)) => return Err((1, format!("unexpected header {h:?}"))),
        None => return Err((1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err((i + 1, format!("expected 6 fields, found {}", f.len())));
        }
        let rate = f[2].parse().map_err(|_| (i + 1, format!("bad rate {:?}", f[2])))?;
        let value = f[5].parse().map_err(|_| (i + 1, format!("bad value {:?}", f[5])))?;
        rows.push(CsvRow {
            scheme: f[0].to_string(),
            caching: f[1].to_string(),
            rate,
            router: f[3].to_string(),
            metric: f[4].to_string(),
            value,
        });
    }
    Ok(rows)
}
