//! Monte Carlo simulation of the FTR / pointing-error channel and empirical
//! metrics with confidence intervals.
//!
//! Samples come from the physical construction, not from the mixture
//! representation used by the analytic paths: two specular waves with
//! random phases and a Gamma-distributed power fluctuation, a complex
//! Gaussian diffuse part, and a pointing gain from a Rayleigh radial
//! displacement seen through a Gaussian beam. Samples are produced in
//! fixed-size chunks, each drawn from its own ChaCha8 stream, so results do
//! not depend on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::channel::{FtrParams, PointingParams};
use crate::error::{Error, Result};
use crate::mrc::{MrcChannel, MAX_BRANCHES};
use crate::singlelink::ModulationSpec;
use crate::units::db_to_linear;

/// Fewer events than this marks an outage estimate as undersampled.
pub const MIN_EVENTS: u64 = 100;
/// Smallest sample count accepted for a confidence-interval estimate.
pub const MIN_SAMPLES: usize = 10_000;
/// Half-width of a two-sided 95 % normal interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub samples: usize,
    pub seed: u64,
    /// Samples per independent RNG stream.
    pub chunk: usize,
    /// Confidence half-width in standard deviations.
    pub z: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            samples: 1_000_000,
            seed: 1,
            chunk: 1 << 15,
            z: Z_95,
        }
    }
}

impl SimConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        SimConfig {
            samples,
            seed,
            ..Default::default()
        }
    }

    /// Interval half-width in standard deviations (default 95 %).
    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "at least {MIN_SAMPLES} samples are needed, got {}",
                self.samples
            )));
        }
        if self.chunk == 0 {
            return Err(Error::InvalidParameter("chunk size must be positive".into()));
        }
        if !(self.z > 0.0) {
            return Err(Error::InvalidParameter(format!("confidence width must be positive, got {}", self.z)));
        }
        Ok(())
    }
}

/// Empirical estimate with a `z`-sigma confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMetric {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Event count for probability estimates.
    pub events: Option<u64>,
    pub undersampled: bool,
}

impl EmpiricalMetric {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    /// Wilson score interval for `events` successes in `n` trials.
    pub fn proportion(events: u64, n: usize, z: f64) -> Self {
        let nf = n as f64;
        let p = events as f64 / nf;
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        EmpiricalMetric {
            value: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
            std_error: (p * (1.0 - p) / nf).sqrt(),
            samples: n,
            events: Some(events),
            undersampled: events < MIN_EVENTS,
        }
    }

    /// Sample mean with a central-limit interval.
    pub fn mean(values: impl Iterator<Item = f64>, z: f64) -> Self {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for x in values {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        let se = (var / n.max(1) as f64).sqrt();
        EmpiricalMetric {
            value: mean,
            ci_low: mean - z * se,
            ci_high: mean + z * se,
            std_error: se,
            samples: n,
            events: None,
            undersampled: n < 2 || se > 0.1 * mean.abs(),
        }
    }
}

/// Normalized FTR power `|h_f|²` with `E[|h_f|²] = 2σ²(1+K)`.
pub fn sample_ftr_power<R: Rng + ?Sized>(params: &FtrParams, rng: &mut R) -> f64 {
    let sigma2 = params.sigma2();
    let omega = 2.0 * sigma2 * params.k();
    let root = (1.0 - params.delta() * params.delta()).max(0.0).sqrt();
    let v1 = (0.5 * omega * (1.0 + root)).sqrt();
    let v2 = (0.5 * omega * (1.0 - root)).sqrt();
    let m = params.m();
    let zeta = Gamma::new(m, 1.0 / m).expect("m > 0").sample(rng);
    let p1 = rng.random::<f64>() * std::f64::consts::TAU;
    let p2 = rng.random::<f64>() * std::f64::consts::TAU;
    let s = sigma2.sqrt();
    let dx: f64 = rng.sample::<f64, _>(StandardNormal) * s;
    let dy: f64 = rng.sample::<f64, _>(StandardNormal) * s;
    let amp = zeta.sqrt();
    let re = amp * (v1 * p1.cos() + v2 * p2.cos()) + dx;
    let im = amp * (v1 * p1.sin() + v2 * p2.sin()) + dy;
    re * re + im * im
}

/// Pointing gain `h_p = S₀ exp(−2r²/ω_eq²)` for a radial displacement `r`
/// with Rayleigh(σ_s) law. Only `σ_s/ω_eq = 1/(2φ)` matters, so parameters
/// without beam geometry sample the same law.
pub fn sample_pointing<R: Rng + ?Sized>(params: &PointingParams, rng: &mut R) -> f64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    params.s0() * (-(x * x + y * y) / (2.0 * params.phi2())).exp()
}

/// Run `draw` over `cfg.samples` slots, one ChaCha8 stream per
/// `(chunk, lane)`; lanes let independent quantities share a chunk layout.
fn chunked<F>(cfg: &SimConfig, lanes: usize, draw: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &mut ChaCha8Rng, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(cfg.chunk);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = cfg.chunk.min(cfg.samples - c * cfg.chunk);
            let mut out = vec![0.0; n];
            for lane in 0..lanes {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream((c * MAX_BRANCHES + lane) as u64);
                draw(lane, &mut rng, &mut out);
            }
            out
        })
        .collect();
    Ok(parts.concat())
}

/// `cfg.samples` i.i.d. FTR power samples.
pub fn ftr_power_samples(params: &FtrParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    chunked(cfg, 1, |_, rng, out| {
        for o in out.iter_mut() {
            *o = sample_ftr_power(params, rng);
        }
    })
}

/// `cfg.samples` i.i.d. pointing-gain samples.
pub fn pointing_samples(params: &PointingParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    chunked(cfg, 1, |_, rng, out| {
        for o in out.iter_mut() {
            *o = sample_pointing(params, rng);
        }
    })
}

/// Combined SNR samples at `γ₀ = 1`; multiply by `γ₀` for any other value.
pub fn sample_unit_snr(ch: &MrcChannel, cfg: &SimConfig) -> Result<Vec<f64>> {
    let branches = ch.branches();
    chunked(cfg, branches.len(), |l, rng, out| {
        let b = &branches[l];
        for o in out.iter_mut() {
            let g = sample_ftr_power(b.ftr(), rng);
            let hp = sample_pointing(b.pointing(), rng);
            *o += g * hp * hp;
        }
    })
}

/// Combined SNR samples at the channel's `γ₀`.
pub fn sample_snr(ch: &MrcChannel, cfg: &SimConfig) -> Result<Vec<f64>> {
    let g0 = ch.gamma0();
    Ok(sample_unit_snr(ch, cfg)?.into_iter().map(|x| x * g0).collect())
}

/// Outage probability at threshold `γ_th` (dB).
pub fn estimate_outage(ch: &MrcChannel, gamma_th_db: f64, cfg: &SimConfig) -> Result<EmpiricalMetric> {
    let th = db_to_linear(gamma_th_db);
    let s = sample_snr(ch, cfg)?;
    let events = s.iter().filter(|&&x| x < th).count() as u64;
    Ok(EmpiricalMetric::proportion(events, s.len(), cfg.z))
}

/// Outage over a `γ₀` grid (dB) from a single set of unit-`γ₀` samples.
pub fn estimate_outage_curve(
    ch: &MrcChannel,
    gamma_th_db: f64,
    gamma0_db: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<EmpiricalMetric>> {
    let th = db_to_linear(gamma_th_db);
    let unit = sample_unit_snr(ch, cfg)?;
    Ok(gamma0_db
        .iter()
        .map(|&g| {
            let limit = th / db_to_linear(g);
            let events = unit.iter().filter(|&&x| x < limit).count() as u64;
            EmpiricalMetric::proportion(events, unit.len(), cfg.z)
        })
        .collect())
}

/// Average BER: sample mean of the conditional error probability.
pub fn estimate_ber(ch: &MrcChannel, modulation: ModulationSpec, cfg: &SimConfig) -> Result<EmpiricalMetric> {
    let s = sample_snr(ch, cfg)?;
    Ok(EmpiricalMetric::mean(s.iter().map(|&x| modulation.conditional_ber(x)), cfg.z))
}

/// Ergodic capacity `E[log₂(1+γ)]`.
pub fn estimate_capacity(ch: &MrcChannel, cfg: &SimConfig) -> Result<EmpiricalMetric> {
    let s = sample_snr(ch, cfg)?;
    Ok(EmpiricalMetric::mean(s.iter().map(|&x| x.ln_1p() / std::f64::consts::LN_2), cfg.z))
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`. Sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], mut cdf: impl FnMut(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
