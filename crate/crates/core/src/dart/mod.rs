//! The CCN-DART router: route-segment state (DART), the requested-content
//! table, and the DEAR admission rule.

mod node;
mod table;

pub use node::{dear_select, DartConfig, DartNode, RctEntry};
pub use table::{DartEntry, DartTable};
