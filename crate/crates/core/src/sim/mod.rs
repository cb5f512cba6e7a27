//! Deterministic discrete-event simulation of a network of DART or NDN
//! routers over pure-delay links.

pub mod audit;
pub mod engine;
pub mod metrics;
pub mod workload;

pub use audit::{AuditStats, AuditViolation, ViolationKind};
pub use engine::{
    run, sample_table_sizes, ConsumerOutcome, OutcomeKind, Router, Scheme, ScriptAction,
    ScriptedEvent, SimConfig, SimError, SimInput, SimOutcome, Workload,
};
pub use metrics::{parse_csv, CsvRow, MetricsReport, RouterMetrics, CSV_HEADER};
pub use workload::{
    consumers_per_router, generate_workload, Catalog, ConsumerSpec, Request, WorkloadError,
    WorkloadSpec, WorkloadStream,
};
