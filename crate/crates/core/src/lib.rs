pub mod channel;
pub mod cli;
pub mod error;
pub mod metric;
pub mod montecarlo;
pub mod mrc;
pub mod singlelink;
pub mod special;
pub mod units;

pub use error::{Error, Result};
pub use metric::MetricResult;
