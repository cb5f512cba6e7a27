//! Forwarding plane for content-centric networks with per-route state
//! (DART/RCT, DEAR admission) next to a PIT-based NDN baseline, plus a
//! deterministic discrete-event simulator to compare the two.
//!
//! Geometry and statistics are generic over [`scalar::Scalar`] (`f32` or
//! `f64`); the aliases below fix the common choice.

pub mod content;
pub mod dart;
pub mod fib;
pub mod fixtures;
pub mod forwarder;
pub mod ids;
pub mod message;
pub mod name;
pub mod ndn;
pub mod scalar;
pub mod sim;
pub mod staleness;
pub mod stats;
pub mod time;
pub mod topology;

pub use content::CachingMode;
pub use fib::{compute_fibs, Fib, FibTuple, Fibs};
pub use ids::{ConsumerId, Dart, Face, Hop, RouterId};
pub use message::{DataPacket, Interest, Nack, NackCode, NdnInterest, Packet};
pub use name::{Name, Prefix};
pub use scalar::Scalar;
pub use time::{SimDuration, SimTime};

pub type Topology = topology::Topology<f64>;
pub type TopologyF32 = topology::Topology<f32>;
pub type GeometricParams = topology::GeometricParams<f64>;
pub type Point = topology::Point<f64>;
pub type Summary = stats::Summary<f64>;
pub type SummaryF32 = stats::Summary<f32>;
