//! Fluctuating two-ray power statistics.
//!
//! Conditioned on the Gamma fluctuation `ζ` and the phase difference `θ` of
//! the two specular rays, the power is noncentral chi-square with two degrees
//! of freedom: a Poisson(ζ K c(θ)) mixture of `Gamma(j+1, 2σ²)` laws with
//! `c(θ) = 1 + Δ cos θ`. Averaging over `ζ ~ Gamma(m, 1/m)` turns the Poisson
//! index into a negative binomial with success probability
//! `p(θ) = K c / (m + K c)`, so the mixing weight of term `j` is
//!
//! ```text
//! P(j) = (1/π) ∫_0^π NB(j; m, p(θ)) dθ = m^m K^j d_j / (Γ(m) j!)
//! d_j  = Γ(m + j) (1/π) ∫_0^π c^j / (m + K c)^{m+j} dθ
//! ```
//!
//! The integrand is smooth and periodic in `θ`, so the trapezoid rule on
//! `[0, π]` converges geometrically.

use crate::error::{Error, Result};
use crate::metric::MetricResult;
use crate::special::ln_gamma;

const THETA_NODES: usize = 512;

/// Truncation of the FTR mixture series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Hard cap on the number of retained terms.
    pub max_terms: usize,
    /// Stop once the neglected mixture mass `1 − Σ P(j)` falls below this.
    pub tail_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_terms: 4000,
            tail_tol: 1e-12,
        }
    }
}

/// FTR fading parameters and their precomputed mixture weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FtrParams {
    k: f64,
    m: f64,
    delta: f64,
    sigma2: f64,
    control: SeriesControl,
    weights: Vec<f64>,
    tail_mass: f64,
    converged: bool,
}

impl FtrParams {
    /// Normalized parameters: `σ² = 1/(2(1+K))`, unit mean power.
    pub fn new(k: f64, m: f64, delta: f64) -> Result<Self> {
        Self::with_control(k, m, delta, None, SeriesControl::default())
    }

    /// Explicit diffuse variance (`None` selects the normalized value).
    pub fn with_control(k: f64, m: f64, delta: f64, sigma2: Option<f64>, control: SeriesControl) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("K must be >= 0, got {k}")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("m must be positive, got {m}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("Delta must lie in [0, 1], got {delta}")));
        }
        let sigma2 = sigma2.unwrap_or(0.5 / (1.0 + k));
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma^2 must be positive, got {sigma2}")));
        }
        if control.max_terms == 0 || !(control.tail_tol > 0.0 && control.tail_tol < 1.0) {
            return Err(Error::InvalidParameter("series control needs max_terms >= 1 and tail_tol in (0, 1)".into()));
        }
        let (weights, tail_mass, converged) = mixture_weights(k, m, delta, &control);
        Ok(FtrParams {
            k,
            m,
            delta,
            sigma2,
            control,
            weights,
            tail_mass,
            converged,
        })
    }

    /// Same `m`, `Δ` and series control with a new `K`; a normalized
    /// `σ²` is recomputed.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        let normalized = (self.sigma2 - 0.5 / (1.0 + self.k)).abs() < 1e-15;
        let sigma2 = if normalized { None } else { Some(self.sigma2) };
        Self::with_control(k, self.m, self.delta, sigma2, self.control)
    }

    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn control(&self) -> SeriesControl {
        self.control
    }

    /// Mixture weights `P(j)`, summing to `1 − tail_mass()`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Whether the tail tolerance was met before the term cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Mean power `2σ²(1+K)`.
    pub fn mean_power(&self) -> f64 {
        2.0 * self.sigma2 * (1.0 + self.k)
    }
}

fn mixture_weights(k: f64, m: f64, delta: f64, ctl: &SeriesControl) -> (Vec<f64>, f64, bool) {
    if k == 0.0 {
        return (vec![1.0], 0.0, true);
    }
    let n = THETA_NODES;
    let h = std::f64::consts::PI / n as f64;
    let mut p = Vec::with_capacity(n + 1);
    let mut pmf = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let c = 1.0 + delta * (i as f64 * h).cos();
        let kc = k * c;
        p.push(kc / (m + kc));
        pmf.push((m * (m / (m + kc)).ln()).exp());
        w.push(if i == 0 || i == n { 0.5 / n as f64 } else { 1.0 / n as f64 });
    }
    let mut weights = Vec::new();
    let mut total = 0.0;
    for j in 0..ctl.max_terms {
        let pj: f64 = pmf.iter().zip(&w).map(|(a, b)| a * b).sum();
        weights.push(pj);
        total += pj;
        if 1.0 - total <= ctl.tail_tol {
            return (weights, (1.0 - total).max(0.0), true);
        }
        let step = (m + j as f64) / (j + 1) as f64;
        for (v, q) in pmf.iter_mut().zip(&p) {
            *v *= step * q;
        }
    }
    (weights, (1.0 - total).max(0.0), false)
}

/// Series coefficient `d_j` of the FTR density, with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtrCoefficient {
    pub value: f64,
    pub ln_value: f64,
    /// `value` left the floating-point range; use `ln_value`.
    pub overflow: bool,
}

/// `d_j` evaluated independently of the precomputed weights, by log-domain
/// trapezoid quadrature of its angular integral.
pub fn ftr_coefficient(params: &FtrParams, j: usize) -> FtrCoefficient {
    let (k, m, delta) = (params.k, params.m, params.delta);
    let jf = j as f64;
    let n = THETA_NODES;
    let h = std::f64::consts::PI / n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let c = 1.0 + delta * (i as f64 * h).cos();
            let num = if j == 0 { 0.0 } else { jf * c.ln() };
            let ends = if i == 0 || i == n { 0.5f64.ln() } else { 0.0 };
            num - (m + jf) * (m + k * c).ln() + ends
        })
        .collect();
    let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
    let ln_value = ln_gamma(m + jf) + peak + (sum / n as f64).ln();
    let value = ln_value.exp();
    FtrCoefficient {
        value,
        ln_value,
        overflow: !value.is_finite() || (value == 0.0 && ln_value.is_finite()),
    }
}

/// Mixture weight `m^m K^j d_j / (Γ(m) j!)` rebuilt from [`ftr_coefficient`].
pub fn weight_from_coefficient(params: &FtrParams, j: usize) -> f64 {
    if params.k == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let d = ftr_coefficient(params, j);
    let m = params.m;
    (m * m.ln() + j as f64 * params.k.ln() + d.ln_value - ln_gamma(m) - ln_gamma(j as f64 + 1.0)).exp()
}

/// Density of the FTR power `|h_f|²` at `x ≥ 0`.
///
/// `abs_error` bounds the truncated tail: every mixture component has
/// density at most `1/(2σ²)`.
pub fn ftr_power_pdf(params: &FtrParams, x: f64) -> Result<MetricResult> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("FTR power density needs x >= 0, got {x}")));
    }
    let s2 = 2.0 * params.sigma2;
    let lx = x.ln();
    let mut value = 0.0;
    for (j, &pj) in params.weights.iter().enumerate() {
        if pj == 0.0 {
            continue;
        }
        let term = if j == 0 {
            (-x / s2).exp() / s2
        } else if x == 0.0 {
            0.0
        } else {
            let jf = j as f64;
            (jf * lx - x / s2 - ln_gamma(jf + 1.0) - (jf + 1.0) * s2.ln()).exp()
        };
        value += pj * term;
    }
    Ok(MetricResult {
        value,
        abs_error: params.tail_mass / s2,
        series_terms: params.weights.len(),
        evaluations: params.weights.len(),
        refinements: 0,
        clamped: false,
        converged: params.converged,
        notes: if params.converged {
            Vec::new()
        } else {
            vec!["FTR series hit the term cap".into()]
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::quad::integrate;

    #[test]
    fn rayleigh_reduction() {
        let p = FtrParams::new(0.0, 2.0, 0.5).unwrap();
        assert_eq!(p.weights(), &[1.0]);
        // m^m d_0 / Γ(m) = 1
        let d0 = ftr_coefficient(&p, 0);
        assert!((2f64.powi(2) * d0.value / 1.0 - 1.0).abs() < 1e-13);
        for x in [0.0, 0.3, 2.0] {
            let f = ftr_power_pdf(&p, x).unwrap().value;
            assert!((f - (-x).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn delta_zero_closed_form() {
        // Δ = 0: d_j = Γ(m+j) / (m+K)^{m+j}
        let p = FtrParams::new(3.0, 1.5, 0.0).unwrap();
        for j in [0usize, 1, 5, 30] {
            let d = ftr_coefficient(&p, j);
            let expect = ln_gamma(1.5 + j as f64) - (1.5 + j as f64) * 4.5f64.ln();
            assert!((d.ln_value - expect).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn weights_match_coefficients() {
        let p = FtrParams::new(10.0, 2.0, 0.5).unwrap();
        assert!(p.converged());
        for j in [0usize, 1, 7, 40, 150] {
            let a = p.weights()[j];
            let b = weight_from_coefficient(&p, j);
            assert!((a - b).abs() <= 1e-10 * b, "j={j}: {a} vs {b}");
        }
    }

    #[test]
    fn heavy_tail_needs_more_than_sixty_terms() {
        let p = FtrParams::new(10.0, 2.0, 0.5).unwrap();
        assert!(p.weights().len() > 60);
        let head: f64 = p.weights()[..60].iter().sum();
        assert!(1.0 - head > 1e-4);
        assert!(p.tail_mass() <= 1e-12);
    }

    #[test]
    fn unit_mean_and_normalization() {
        for &(k, m, d) in &[(10.0, 2.0, 0.5), (2.0, 2.0, 0.9), (15.0, 10.0, 1.0), (0.5, 0.7, 0.1)] {
            let p = FtrParams::new(k, m, d).unwrap();
            let s2 = 2.0 * p.sigma2();
            let mean: f64 = p.weights().iter().enumerate().map(|(j, w)| w * (j as f64 + 1.0) * s2).sum();
            assert!((mean - 1.0).abs() < 1e-9, "K={k}: mean {mean}");
            let r = integrate(|x| ftr_power_pdf(&p, x).unwrap().value, 0.0, 60.0, 1e-12, 1e-10, 500).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "K={k}: {}", r.value);
        }
    }

    #[test]
    fn pdf_at_origin() {
        let p = FtrParams::new(10.0, 2.0, 0.5).unwrap();
        let f0 = ftr_power_pdf(&p, 0.0).unwrap().value;
        assert!(f0 > 0.0 && f0.is_finite());
        assert!((f0 - p.weights()[0] / (2.0 * p.sigma2())).abs() < 1e-15);
    }

    #[test]
    fn with_k_renormalizes() {
        let p = FtrParams::new(10.0, 2.0, 0.5).unwrap().with_k(2.0).unwrap();
        assert!((p.sigma2() - 0.5 / 3.0).abs() < 1e-15);
        assert!((p.mean_power() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extreme_index_flags_overflow() {
        let p = FtrParams::new(15.0, 0.5, 1.0).unwrap();
        let d = ftr_coefficient(&p, 400);
        assert!(d.ln_value.is_finite());
        let huge = FtrParams::new(1e-3, 200.0, 0.5).unwrap();
        let d = ftr_coefficient(&huge, 2000);
        assert!(d.overflow);
    }

    #[test]
    fn rejects_invalid() {
        assert!(FtrParams::new(-1.0, 2.0, 0.5).is_err());
        assert!(FtrParams::new(1.0, 0.0, 0.5).is_err());
        assert!(FtrParams::new(1.0, 2.0, 1.5).is_err());
    }
}
