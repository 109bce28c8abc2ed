//! Special functions: gamma family, incomplete gamma, Meijer G and the
//! multivariate Fox H engine.

pub mod foxh;
pub mod gamma;
pub mod incgamma;
pub mod mellin;
pub mod quad;

pub use foxh::{fox_h_multivariate, FoxHSpec, OuterFactor};
pub use gamma::{digamma, gamma, ln_gamma, ln_gamma_complex, EULER_GAMMA};
pub use incgamma::{gamma_p, gamma_q, upper_incomplete_gamma};
pub use mellin::{meijer_g, GammaFactorGroup, MellinKernel, QuadratureControl};
