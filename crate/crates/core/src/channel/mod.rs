//! Path gain, pointing-error and FTR fading statistics.

mod ftr;
mod link;
mod pointing;

pub use ftr::{ftr_coefficient, ftr_power_pdf, weight_from_coefficient, FtrCoefficient, FtrParams, SeriesControl};
pub use link::{path_gain, Environment, LinkBudget, ABSORPTION_275GHZ_PER_M};
pub use pointing::{derive_pointing, jitter_for_phi, pointing_pdf, BeamGeometry, PointingParams};
