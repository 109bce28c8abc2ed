//! Single-link SNR statistics and metrics.
//!
//! With `a = φ²/2` and `ξ = 2γ₀σ²S₀²` the SNR factors as `γ = ξ·G·V`, where
//! `G | j ~ Gamma(j+1, 1)` carries the FTR mixture index `j` and
//! `V = (h_p/S₀)² ~ Beta(a, 1)`. Conditioned on `j`, with `t = x/ξ`:
//!
//! ```text
//! f_j(t) = a t^{a−1} Γ(j+1−a, t) / j!
//! F_j(t) = P(j+1, t) + t^a Γ(j+1−a, t) / j!
//! ```
//!
//! Every statistic below is the `P(j)`-weighted mixture of these terms.

use crate::channel::{FtrParams, LinkBudget, PointingParams};
use crate::error::{Error, Result};
use crate::metric::MetricResult;
use crate::special::mellin::contour_integral;
use crate::special::quad::{integrate, integrate_log};
use crate::special::{digamma, gamma_p, ln_gamma, upper_incomplete_gamma, GammaFactorGroup, QuadratureControl};
use crate::units::db_to_linear;

/// Relative disagreement above which the capacity cross-check fails.
pub const CAPACITY_CROSS_CHECK_TOL: f64 = 1e-3;
/// Relative disagreement above which the BER closed form is reported.
pub const BER_DIAGNOSTIC_TOL: f64 = 1e-3;

/// One THz link: FTR fading, pointing errors and the average SNR scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleLinkChannel {
    ftr: FtrParams,
    pointing: PointingParams,
    gamma0: f64,
    budget: Option<LinkBudget>,
}

impl SingleLinkChannel {
    /// `gamma0_db` is the average SNR scale `γ₀` in dB.
    pub fn new(ftr: FtrParams, pointing: PointingParams, gamma0_db: f64) -> Result<Self> {
        Self::with_linear_gamma0(ftr, pointing, db_to_linear(gamma0_db))
    }

    pub fn with_linear_gamma0(ftr: FtrParams, pointing: PointingParams, gamma0: f64) -> Result<Self> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma0 must be positive, got {gamma0}")));
        }
        Ok(SingleLinkChannel {
            ftr,
            pointing,
            gamma0,
            budget: None,
        })
    }

    /// `γ₀` taken from a link budget.
    pub fn from_budget(ftr: FtrParams, pointing: PointingParams, budget: LinkBudget) -> Result<Self> {
        let mut ch = Self::with_linear_gamma0(ftr, pointing, budget.gamma0())?;
        ch.budget = Some(budget);
        Ok(ch)
    }

    /// Same fading and pointing at a new `γ₀` (dB).
    pub fn at_gamma0_db(&self, gamma0_db: f64) -> Result<Self> {
        Self::new(self.ftr.clone(), self.pointing, gamma0_db)
    }

    pub fn ftr(&self) -> &FtrParams {
        &self.ftr
    }
    pub fn pointing(&self) -> &PointingParams {
        &self.pointing
    }
    pub fn budget(&self) -> Option<&LinkBudget> {
        self.budget.as_ref()
    }
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// SNR scale `ξ = 2γ₀σ²S₀²`.
    pub fn xi(&self) -> f64 {
        2.0 * self.gamma0 * self.ftr.sigma2() * self.pointing.s0().powi(2)
    }

    /// `a = φ²/2`.
    pub fn a(&self) -> f64 {
        self.pointing.half_phi2()
    }

    /// Mean SNR `ξ·E[G]·a/(a+1)`.
    pub fn mean_snr(&self) -> f64 {
        let eg: f64 = self.ftr.weights().iter().enumerate().map(|(j, w)| w * (j as f64 + 1.0)).sum();
        let a = self.a();
        self.xi() * eg * a / (a + 1.0)
    }
}

/// BER constants: `P_e(γ) = Γ(p, qγ) / (2Γ(p))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    pub p: f64,
    pub q: f64,
}

impl ModulationSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0) || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("modulation needs p, q > 0, got ({p}, {q})")));
        }
        Ok(ModulationSpec { p, q })
    }

    /// Coherent BPSK.
    pub fn bpsk() -> Self {
        ModulationSpec { p: 0.5, q: 1.0 }
    }

    /// Coherent binary FSK.
    pub fn bfsk() -> Self {
        ModulationSpec { p: 0.5, q: 0.5 }
    }

    /// Differential BPSK.
    pub fn dbpsk() -> Self {
        ModulationSpec { p: 1.0, q: 1.0 }
    }

    /// Non-coherent binary FSK.
    pub fn ncfsk() -> Self {
        ModulationSpec { p: 1.0, q: 0.5 }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Some(Self::bpsk()),
            "bfsk" => Some(Self::bfsk()),
            "dbpsk" => Some(Self::dbpsk()),
            "ncfsk" => Some(Self::ncfsk()),
            _ => None,
        }
    }

    /// Conditional error probability at linear SNR `gamma`.
    pub fn conditional_ber(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.5;
        }
        crate::special::gamma_q(self.p, self.q * gamma).unwrap_or(0.0) * 0.5
    }
}

/// Conditional terms at `t = x/ξ` for `j = 0..n`: `W_j = t^a Γ(j+1−a, t)/j!`
/// and `P(j+1, t)`.
pub(crate) fn conditional_terms(a: f64, t: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if t == 0.0 {
        return Ok((vec![0.0; n], vec![0.0; n]));
    }
    let lt = t.ln();
    let mut ln_fact = Vec::with_capacity(n + 1);
    ln_fact.push(0.0);
    for k in 1..=n {
        ln_fact.push(ln_fact[k - 1] + (k as f64).ln());
    }
    let ln_pois = |k: usize| k as f64 * lt - t - ln_fact[k];

    let mut lower = vec![0.0; n];
    if n > 0 {
        lower[n - 1] = gamma_p(n as f64, t)?;
        for j in (0..n - 1).rev() {
            lower[j] = lower[j + 1] + ln_pois(j + 1).exp();
        }
    }

    // direct evaluation up to the first order above 1/2, upward recurrence after
    let j_direct = ((a - 0.5).ceil().max(0.0) as usize).min(n.saturating_sub(1));
    let mut w = vec![0.0; n];
    for (j, wj) in w.iter_mut().enumerate().take(j_direct + 1) {
        *wj = direct_w(a, t, j, ln_fact[j])?;
    }
    for j in j_direct..n.saturating_sub(1) {
        let s = j as f64 + 1.0 - a;
        w[j + 1] = w[j] * s / (j + 1) as f64 + ln_pois(j + 1).exp();
    }
    Ok((w, lower))
}

fn direct_w(a: f64, t: f64, j: usize, ln_fact_j: f64) -> Result<f64> {
    let s = j as f64 + 1.0 - a;
    let lt = t.ln();
    if s > 0.0 {
        let g = upper_incomplete_gamma(s, t)?;
        if g == 0.0 {
            return Ok(0.0);
        }
        return Ok((a * lt + g.ln() - ln_fact_j).exp());
    }
    // t^a Γ(s,t) = t^{j+1} E_s(t) with the bounded E_s(t) = t^{-s} Γ(s,t);
    // orders within rounding of an integer are snapped to it so the
    // downward recurrence never divides by a near-zero order
    let s = if (s - s.round()).abs() < 1e-10 { s.round() } else { s };
    let e = if t >= 1.0 {
        (-s * lt).exp() * upper_incomplete_gamma(s, t)?
    } else {
        let steps = (-s).ceil();
        let mut order = s + steps;
        let mut e = if order == 0.0 {
            upper_incomplete_gamma(0.0, t)?
        } else {
            (-order * lt).exp() * upper_incomplete_gamma(order, t)?
        };
        let et = (-t).exp();
        for _ in 0..steps as usize {
            order -= 1.0;
            e = (t * e - et) / order;
        }
        e
    };
    Ok(((j as f64 + 1.0) * lt - ln_fact_j).exp() * e)
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::Domain(format!("SNR must be finite and >= 0, got {x}")));
    }
    Ok(())
}

fn series_result(ch: &SingleLinkChannel, value: f64, abs_error: f64) -> MetricResult {
    let ftr = ch.ftr();
    let mut r = MetricResult {
        value,
        abs_error,
        series_terms: ftr.weights().len(),
        evaluations: ftr.weights().len(),
        refinements: 0,
        clamped: false,
        converged: ftr.converged(),
        notes: Vec::new(),
    };
    if !ftr.converged() {
        r.notes.push("FTR series hit the term cap".into());
    }
    r
}

/// Density of the single-link SNR at linear `x`.
pub fn snr_pdf(ch: &SingleLinkChannel, x: f64) -> Result<MetricResult> {
    check_x(x)?;
    let (a, xi) = (ch.a(), ch.xi());
    let weights = ch.ftr().weights();
    if x == 0.0 {
        let v = if a > 1.0 {
            weights[0] * a / (xi * (a - 1.0))
        } else {
            f64::INFINITY
        };
        return Ok(series_result(ch, v, 0.0));
    }
    let t = x / xi;
    let (w, _) = conditional_terms(a, t, weights.len())?;
    let scale = a / (xi * t);
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    for (p, wj) in weights.iter().zip(&w) {
        sum += p * wj;
        peak = peak.max(*wj);
    }
    let value = scale * sum;
    let err = scale * peak * ch.ftr().tail_mass() + 4.0 * f64::EPSILON * value;
    Ok(series_result(ch, value, err))
}

/// Distribution function of the single-link SNR at linear `x`, clamped to `[0, 1]`.
pub fn snr_cdf(ch: &SingleLinkChannel, x: f64) -> Result<MetricResult> {
    check_x(x)?;
    let weights = ch.ftr().weights();
    if x == 0.0 {
        return Ok(series_result(ch, 0.0, 0.0));
    }
    let (w, lower) = conditional_terms(ch.a(), x / ch.xi(), weights.len())?;
    let value: f64 = weights.iter().zip(w.iter().zip(&lower)).map(|(p, (wj, lj))| p * (wj + lj)).sum();
    let err = ch.ftr().tail_mass() + 8.0 * f64::EPSILON * value;
    Ok(series_result(ch, value, err).clamp_to(0.0, 1.0))
}

/// `P(γ < γ_th)` with the threshold in dB.
pub fn outage_single(ch: &SingleLinkChannel, gamma_th_db: f64) -> Result<MetricResult> {
    snr_cdf(ch, db_to_linear(gamma_th_db))
}

/// Lower integration limit for SNR integrals: far below any mass of interest.
fn snr_floor(ch: &SingleLinkChannel) -> f64 {
    ch.xi() * 1e-30
}

/// Upper integration limit beyond which `1 − F` is negligible.
fn snr_ceiling(ch: &SingleLinkChannel) -> f64 {
    let n = ch.ftr().weights().len() as f64;
    ch.xi() * (n + 60.0 + 12.0 * n.sqrt())
}

/// Average BER by quadrature of `q^p/(2Γ(p)) ∫ e^{−qx} x^{p−1} F(x) dx`.
///
/// The term-wise closed form (with its stray exponential factor set to one)
/// is evaluated alongside and reported in `notes` when it disagrees.
pub fn ber_single(ch: &SingleLinkChannel, modulation: ModulationSpec) -> Result<MetricResult> {
    let (p, q) = (modulation.p, modulation.q);
    let norm = (p * q.ln() - ln_gamma(p)).exp() * 0.5;
    let lo = snr_floor(ch).min(1e-30 / q);
    let hi = (90.0 + 4.0 * p) / q;
    let mut failure = None;
    let r = integrate_log(
        |x| match snr_cdf(ch, x) {
            Ok(f) => norm * (-q * x).exp() * x.powf(p - 1.0) * f.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        1e-300,
        1e-9,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let head = snr_cdf(ch, lo)?.value * (q * lo).powf(p) / (2.0 * crate::special::gamma(p + 1.0));
    let value = r.value + head;
    let mut out = MetricResult {
        value,
        abs_error: r.abs_error + head + ch.ftr().tail_mass() * 0.5,
        series_terms: ch.ftr().weights().len(),
        evaluations: r.evaluations,
        refinements: r.intervals,
        clamped: false,
        converged: ch.ftr().converged(),
        notes: Vec::new(),
    }
    .clamp_to(0.0, 0.5);
    let closed = ber_single_closed_form(ch, modulation);
    if !closed.is_finite() {
        out.notes.push("term-wise closed form diverges".into());
    } else if (closed - value).abs() > BER_DIAGNOSTIC_TOL * value.abs() {
        out.notes.push(format!("term-wise closed form {closed:e} disagrees with quadrature {value:e}"));
    }
    Ok(out)
}

/// Literal term-wise BER closed form with the unbound `e^{−qγ}` set to one.
/// Kept as a diagnostic only; it does not agree with the quadrature.
pub fn ber_single_closed_form(ch: &SingleLinkChannel, modulation: ModulationSpec) -> f64 {
    let (p, q) = (modulation.p, modulation.q);
    let ftr = ch.ftr();
    let (m, k, s2) = (ftr.m(), ftr.k(), 2.0 * ftr.sigma2());
    let phi2 = ch.pointing().phi2();
    let a = 0.5 * phi2;
    let xi = ch.xi();
    let ln_pre = m * m.ln() + q * p.ln()
        - 4f64.ln()
        - phi2 * ch.pointing().s0().ln()
        - 0.5 * (phi2 + 1.0) * ch.gamma0().ln()
        - a * s2.ln()
        - ln_gamma(m)
        - ln_gamma(p);
    let mut sum = 0.0;
    for j in 0..ftr.weights().len() {
        let jf = j as f64;
        let d = crate::channel::ftr_coefficient(ftr, j);
        let ln_kd = if k == 0.0 {
            if j > 0 {
                continue;
            }
            d.ln_value
        } else {
            jf * k.ln() + d.ln_value
        };
        let ln_base = ln_pre + ln_kd - 2.0 * ln_gamma(jf + 1.0) + 2f64.ln() - (a + p) * xi.ln() - (p * (a + p)).ln();
        let t1 = -(2f64.powf(a)) * (a + p) * (ln_base + ln_gamma(jf + 1.0 + p)).exp();
        let t2 = p * (ln_base + ln_gamma(2.0 * jf + 2.0 + p)).exp();
        sum += t1 + t2;
    }
    sum
}

/// Ergodic capacity (bits/s/Hz) as a series of Meijer G functions,
/// cross-checked against quadrature of `∫ (1 − F(x))/(1 + x) dx / ln 2`.
///
/// Per mixture term,
/// `E_j[ln(1 + ξT)] = (a/j!) G^{1,4}_{4,3}(ξ | 1, 1, −j, 1−a ; 1, 0, −a)`.
pub fn capacity_single_exact(ch: &SingleLinkChannel) -> Result<MetricResult> {
    let ctl = QuadratureControl {
        rel_tol: 1e-9,
        ..Default::default()
    };
    capacity_single_exact_with(ch, &ctl)
}

pub fn capacity_single_exact_with(ch: &SingleLinkChannel, ctl: &QuadratureControl) -> Result<MetricResult> {
    let (a, xi) = (ch.a(), ch.xi());
    let weights = ch.ftr().weights();
    let mut value: f64 = 0.0;
    let mut abs_error = 0.0;
    let mut evaluations = 0;
    let mut terms = 0;
    let mut dropped = ch.ftr().tail_mass();
    for (j, &pj) in weights.iter().enumerate() {
        let jf = j as f64;
        // Jensen: E_j[ln(1 + ξT)] ≤ ln(1 + ξ(j+1))
        let cap = (1.0 + xi * (jf + 1.0)).ln();
        if pj * cap < 1e-16 * value.max(1e-300) {
            dropped += pj;
            continue;
        }
        let spec = GammaFactorGroup::meijer(&[1.0, 1.0, -jf, 1.0 - a], 4, &[1.0, 0.0, -a], 1)?;
        let ln_scale = a.ln() - ln_gamma(jf + 1.0) + pj.ln();
        let g = contour_integral(&spec, xi, ln_scale, None, ctl)?;
        value += g.value;
        abs_error += g.abs_error;
        evaluations += g.evaluations;
        terms += 1;
    }
    let ln2 = std::f64::consts::LN_2;
    value /= ln2;
    abs_error = abs_error / ln2 + dropped * (1.0 + xi * (weights.len() as f64 + 1.0)).log2();

    let check = capacity_single_quadrature(ch)?;
    let rel = (check.value - value).abs() / value.abs().max(1e-300);
    if rel > CAPACITY_CROSS_CHECK_TOL {
        return Err(Error::CrossCheck {
            metric: "single-link capacity".into(),
            primary: value,
            secondary: check.value,
        });
    }
    Ok(MetricResult {
        value,
        abs_error,
        series_terms: terms,
        evaluations,
        refinements: 0,
        clamped: false,
        converged: ch.ftr().converged(),
        notes: vec![format!("quadrature cross-check {:.12e} (rel diff {rel:.2e})", check.value)],
    }
    .clamp_to(0.0, f64::INFINITY))
}

/// Capacity by direct quadrature of the complementary distribution.
pub fn capacity_single_quadrature(ch: &SingleLinkChannel) -> Result<MetricResult> {
    let lo = snr_floor(ch);
    let hi = snr_ceiling(ch);
    let mut failure = None;
    let mut ccdf = |x: f64| match snr_cdf(ch, x) {
        Ok(f) => (1.0 - f.value) / (1.0 + x),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let r = integrate_log(&mut ccdf, lo, hi, 1e-300, 1e-10)?;
    let head = integrate(&mut ccdf, 0.0, lo, 1e-300, 1e-6, 10)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let ln2 = std::f64::consts::LN_2;
    Ok(MetricResult {
        value: (r.value + head.value) / ln2,
        abs_error: (r.abs_error + head.abs_error) / ln2,
        series_terms: ch.ftr().weights().len(),
        evaluations: r.evaluations + head.evaluations,
        refinements: r.intervals,
        clamped: false,
        converged: true,
        notes: Vec::new(),
    })
}

/// Lower bound from `ln(1 + γ) > ln γ`:
/// `(ln ξ + Σ P(j) ψ(j+1) − 1/a) / ln 2`, i.e. `E[log₂ γ]`.
pub fn capacity_single_bound(ch: &SingleLinkChannel) -> Result<MetricResult> {
    let weights = ch.ftr().weights();
    let mut mean_psi = 0.0;
    for (j, p) in weights.iter().enumerate() {
        mean_psi += p * digamma(j as f64 + 1.0)?;
    }
    let value = (ch.xi().ln() + mean_psi - 1.0 / ch.a()) / std::f64::consts::LN_2;
    let mut r = series_result(ch, value, ch.ftr().tail_mass() * weights.len() as f64);
    r.abs_error += 8.0 * f64::EPSILON * value.abs();
    Ok(r)
}
