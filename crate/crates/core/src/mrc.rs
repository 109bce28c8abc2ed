//! L-branch maximal ratio combining over independent, non-identical
//! FTR/pointing-error branches.
//!
//! Branch `l` contributes `γ_l = ξ_l T_l` with `E[T_l^{−w}] = Σ_j P_l(j)
//! Γ(j+1−w)/j! · a/(a−w)`. Inverting the product of branch transforms gives
//!
//! ```text
//! F(γ) = (2πi)^{−L} ∫ Π_l Θ_l(w_l) (γ/ξ_l)^{w_l} / Γ(1 + Σw) dw
//! f(γ) = (1/γ) (2πi)^{−L} ∫ Π_l Θ_l(w_l) (γ/ξ_l)^{w_l} / Γ(Σw) dw
//! Θ_l(w) = Γ(w) · a/(a−w) · Σ_j P_l(j) Γ(j+1−w)/j!,   0 < Re w < min(a, 1)
//! ```
//!
//! Each `Θ_l` is the FTR mixture summed inside the integrand. That is the
//! same as summing one Fox H function per multi-index `(j_1, …, j_L)`,
//! because the coupling factor does not depend on the indices. The
//! per-multi-index form is still available for checks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metric::MetricResult;
use crate::singlelink::{ModulationSpec, SingleLinkChannel};
use crate::special::foxh::NestedContour;
use crate::special::gamma::ln_gamma_c;
use crate::special::quad::{integrate, integrate_log};
use crate::special::{fox_h_multivariate, gamma_p, ln_gamma, FoxHSpec, GammaFactorGroup, MellinKernel, OuterFactor, QuadratureControl};
use crate::units::db_to_linear;

pub const MAX_BRANCHES: usize = 4;
/// Default regularization of the capacity representation.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Relative change between `ε` and `ε/10` above which capacity is flagged.
pub const EPSILON_SENSITIVITY_TOL: f64 = 1e-2;
/// Relative disagreement tolerated between the contour and quadrature paths.
pub const DUAL_PATH_TOL: f64 = 1e-2;

/// Contour settings used by the convenience wrappers.
pub fn default_control() -> QuadratureControl {
    QuadratureControl {
        rel_tol: 1e-8,
        max_dim: MAX_BRANCHES + 1,
        ..Default::default()
    }
}

/// MRC receiver: `L` branches sharing the pointing parameters and `γ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrcChannel {
    branches: Vec<SingleLinkChannel>,
}

impl MrcChannel {
    pub fn new(branches: Vec<SingleLinkChannel>) -> Result<Self> {
        let l = branches.len();
        if l == 0 || l > MAX_BRANCHES {
            return Err(Error::InvalidParameter(format!("MRC needs 1..={MAX_BRANCHES} branches, got {l}")));
        }
        let first = &branches[0];
        for b in &branches[1..] {
            if b.pointing().phi() != first.pointing().phi() || b.pointing().s0() != first.pointing().s0() {
                return Err(Error::InvalidParameter("MRC branches must share phi and S0".into()));
            }
            if (b.gamma0() - first.gamma0()).abs() > 1e-12 * first.gamma0() {
                return Err(Error::InvalidParameter("MRC branches must share gamma0".into()));
            }
        }
        Ok(MrcChannel { branches })
    }

    /// `l` identical copies of one branch.
    pub fn iid(branch: SingleLinkChannel, l: usize) -> Result<Self> {
        Self::new(vec![branch; l])
    }

    pub fn branches(&self) -> &[SingleLinkChannel] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// `a = φ²/2`, shared by all branches.
    pub fn a(&self) -> f64 {
        self.branches[0].a()
    }

    pub fn gamma0(&self) -> f64 {
        self.branches[0].gamma0()
    }

    pub fn xis(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.xi()).collect()
    }

    /// All branches moved to a new `γ₀` (dB).
    pub fn at_gamma0_db(&self, gamma0_db: f64) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| b.at_gamma0_db(gamma0_db))
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }
}

impl From<SingleLinkChannel> for MrcChannel {
    fn from(branch: SingleLinkChannel) -> Self {
        MrcChannel { branches: vec![branch] }
    }
}

/// Per-branch Mellin kernel with the FTR mixture summed inside.
#[derive(Debug, Clone)]
pub struct MixtureKernel {
    a: f64,
    weights: Arc<Vec<f64>>,
}

impl MixtureKernel {
    pub fn new(branch: &SingleLinkChannel) -> Self {
        MixtureKernel {
            a: branch.a(),
            weights: Arc::new(branch.ftr().weights().to_vec()),
        }
    }
}

impl MellinKernel for MixtureKernel {
    fn ln_eval(&self, w: Complex64) -> Complex64 {
        let mut r = ln_gamma_c(1.0 - w).exp();
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, p) in self.weights.iter().enumerate() {
            sum += p * r;
            let jf = j as f64;
            r *= (jf + 1.0 - w) / (jf + 1.0);
        }
        ln_gamma_c(w) + self.a.ln() - (self.a - w).ln() + sum.ln()
    }

    fn strip(&self) -> (f64, f64) {
        (0.0, self.a.min(1.0))
    }
}

/// Kernels appearing in MRC integrals.
#[derive(Debug, Clone)]
pub enum MrcKernel {
    Mixture(MixtureKernel),
    /// `Γ(1−v)Γ(v)²/Γ(1+v)`, the Mellin–Barnes kernel of `ln(1+z)`.
    Log(GammaFactorGroup),
}

impl MellinKernel for MrcKernel {
    fn ln_eval(&self, s: Complex64) -> Complex64 {
        match self {
            MrcKernel::Mixture(k) => k.ln_eval(s),
            MrcKernel::Log(k) => k.ln_eval(s),
        }
    }

    fn strip(&self) -> (f64, f64) {
        match self {
            MrcKernel::Mixture(k) => k.strip(),
            MrcKernel::Log(k) => k.strip(),
        }
    }
}

fn log_kernel() -> GammaFactorGroup {
    GammaFactorGroup::meijer(&[1.0, 1.0], 2, &[1.0, 0.0], 1).expect("static kernel")
}

const FRACTION_STEPS: f64 = 20.0;

/// Contour position inside each strip as a function of `ln z`: small
/// arguments push the contour right so the integrand stays comparable to
/// the (small) result, large ones push it left.
fn fraction_bucket(ln_z: f64) -> u8 {
    let f = (0.5 - 0.06 * ln_z).clamp(0.15, 0.85);
    (f * FRACTION_STEPS).round() as u8
}

/// An MRC contour integral with fixed kernels and coupling; contour
/// integrators are cached per abscissa bucket so sweeps reuse kernel samples.
pub struct MrcIntegral {
    kernels: Vec<MrcKernel>,
    top: Vec<OuterFactor>,
    bottom: Vec<OuterFactor>,
    cache: Mutex<HashMap<Vec<u8>, Arc<NestedContour<MrcKernel>>>>,
}

impl MrcIntegral {
    pub fn new(kernels: Vec<MrcKernel>, top: Vec<OuterFactor>, bottom: Vec<OuterFactor>) -> Self {
        MrcIntegral {
            kernels,
            top,
            bottom,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn integrator(&self, args: &[f64]) -> Result<Arc<NestedContour<MrcKernel>>> {
        let key: Vec<u8> = args.iter().map(|z| fraction_bucket(z.ln())).collect();
        if let Some(i) = self.cache.lock().unwrap().get(&key) {
            return Ok(i.clone());
        }
        let hints: Vec<Option<f64>> = self
            .kernels
            .iter()
            .zip(&key)
            .map(|(k, &b)| {
                let (lo, hi) = k.strip();
                Some(lo + (hi - lo) * b as f64 / FRACTION_STEPS)
            })
            .collect();
        let i = Arc::new(NestedContour::new(
            self.kernels.clone(),
            self.top.clone(),
            self.bottom.clone(),
            &hints,
        )?);
        self.cache.lock().unwrap().insert(key, i.clone());
        Ok(i)
    }

    pub fn evaluate(&self, args: &[f64], ln_scale: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
        self.integrator(args)?.evaluate(args, ln_scale, ctl)
    }
}

fn mixture_kernels(ch: &MrcChannel) -> Vec<MrcKernel> {
    ch.branches.iter().map(|b| MrcKernel::Mixture(MixtureKernel::new(b))).collect()
}

fn series_terms(ch: &MrcChannel) -> usize {
    ch.branches.iter().map(|b| b.ftr().weights().len()).product()
}

fn tail_mass(ch: &MrcChannel) -> f64 {
    ch.branches.iter().map(|b| b.ftr().tail_mass()).sum()
}

/// Mixture terms beyond the truncation point `n` are stochastically larger
/// than term `n`, whose distribution function is at most
/// `P(n+1, t) + t^a Γ(n+1−a)/n!`.
fn cdf_tail_bound(ch: &MrcChannel, gamma: f64) -> f64 {
    let a = ch.a();
    ch.branches
        .iter()
        .map(|b| {
            let n = b.ftr().weights().len() as f64;
            let t = gamma / b.xi();
            let bound = if n + 1.0 > a {
                gamma_p(n + 1.0, t).unwrap_or(1.0)
                    + (a * t.ln() + ln_gamma(n + 1.0 - a) - ln_gamma(n + 1.0)).exp()
            } else {
                1.0
            };
            b.ftr().tail_mass() * bound.min(1.0)
        })
        .sum()
}

/// BER counterpart of [`cdf_tail_bound`], using `P(n+1, t) ≤ t^{n+1}/(n+1)!`.
fn ber_tail_bound(ch: &MrcChannel, modulation: ModulationSpec) -> f64 {
    let a = ch.a();
    let (p, q) = (modulation.p, modulation.q);
    ch.branches
        .iter()
        .map(|b| {
            let n = b.ftr().weights().len() as f64;
            let lx = (q * b.xi()).ln();
            let bound = if n + 1.0 > a {
                let t1 = ln_gamma(p + a) + ln_gamma(n + 1.0 - a) - ln_gamma(n + 1.0) - a * lx;
                let t2 = ln_gamma(p + n + 1.0) - ln_gamma(n + 2.0) - (n + 1.0) * lx;
                (t1.exp() + t2.exp()) / (2.0 * crate::special::gamma(p))
            } else {
                0.5
            };
            b.ftr().tail_mass() * bound.min(0.5)
        })
        .sum()
}

/// Reusable evaluator of the combined-SNR distribution for one channel.
pub struct MrcDistribution {
    channel: MrcChannel,
    xis: Vec<f64>,
    cdf: MrcIntegral,
    pdf: MrcIntegral,
    terms: usize,
    tail: f64,
}

impl MrcDistribution {
    pub fn new(ch: &MrcChannel) -> Self {
        let l = ch.len();
        MrcDistribution {
            channel: ch.clone(),
            xis: ch.xis(),
            cdf: MrcIntegral::new(mixture_kernels(ch), vec![], vec![OuterFactor::uniform(1.0, l, 1.0)]),
            pdf: MrcIntegral::new(mixture_kernels(ch), vec![], vec![OuterFactor::uniform(0.0, l, 1.0)]),
            terms: series_terms(ch),
            tail: tail_mass(ch),
        }
    }

    fn args(&self, gamma: f64) -> Vec<f64> {
        self.xis.iter().map(|xi| gamma / xi).collect()
    }

    fn finish(&self, mut r: MetricResult, tail: f64) -> MetricResult {
        r.series_terms = self.terms;
        r.abs_error += tail;
        r
    }

    pub fn cdf(&self, gamma: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
        check_gamma(gamma)?;
        if gamma == 0.0 {
            return Ok(MetricResult::exact(0.0));
        }
        let r = self.cdf.evaluate(&self.args(gamma), 0.0, ctl)?;
        let tail = cdf_tail_bound(&self.channel, gamma);
        Ok(self.finish(r, tail).clamp_to(0.0, 1.0))
    }

    pub fn pdf(&self, gamma: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
        check_gamma(gamma)?;
        if gamma == 0.0 {
            return Err(Error::Domain("MRC density is evaluated for gamma > 0".into()));
        }
        let r = self.pdf.evaluate(&self.args(gamma), -gamma.ln(), ctl)?;
        Ok(self.finish(r, self.tail / gamma).clamp_to(0.0, f64::INFINITY))
    }

    pub fn xis(&self) -> &[f64] {
        &self.xis
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("SNR must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

/// Density of the combined SNR at linear `γ > 0`.
pub fn mrc_snr_pdf(ch: &MrcChannel, gamma: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
    MrcDistribution::new(ch).pdf(gamma, ctl)
}

/// Distribution function of the combined SNR at linear `γ`, clamped to `[0, 1]`.
pub fn mrc_snr_cdf(ch: &MrcChannel, gamma: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
    MrcDistribution::new(ch).cdf(gamma, ctl)
}

/// `P(γ < γ_th)` with the threshold in dB.
pub fn outage_mrc(ch: &MrcChannel, gamma_th_db: f64) -> Result<MetricResult> {
    mrc_snr_cdf(ch, db_to_linear(gamma_th_db), &default_control())
}

/// Average BER as an L-variate contour integral:
/// `(1/2Γ(p)) ∫ Π Θ_l (1/(qξ_l))^{w_l} Γ(p+Σw)/Γ(1+Σw) dw`.
pub fn ber_mrc(ch: &MrcChannel, modulation: ModulationSpec, ctl: &QuadratureControl) -> Result<MetricResult> {
    let l = ch.len();
    let integral = MrcIntegral::new(
        mixture_kernels(ch),
        vec![OuterFactor::uniform(modulation.p, l, 1.0)],
        vec![OuterFactor::uniform(1.0, l, 1.0)],
    );
    let args: Vec<f64> = ch.xis().iter().map(|xi| 1.0 / (modulation.q * xi)).collect();
    let mut r = integral.evaluate(&args, -(2f64.ln()) - ln_gamma(modulation.p), ctl)?;
    r.series_terms = series_terms(ch);
    r.abs_error += ber_tail_bound(ch, modulation);
    Ok(r.clamp_to(0.0, 0.5))
}

/// Average BER by quadrature of `q^p/(2Γ(p)) ∫ e^{−qx} x^{p−1} F(x) dx`
/// with the contour-integral distribution function.
pub fn ber_mrc_quadrature(ch: &MrcChannel, modulation: ModulationSpec, ctl: &QuadratureControl) -> Result<MetricResult> {
    let dist = MrcDistribution::new(ch);
    let (p, q) = (modulation.p, modulation.q);
    let norm = 0.5 * (p * q.ln() - ln_gamma(p)).exp();
    let xi_min = ch.xis().iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = (xi_min * 1e-12).min(1e-12 / q);
    let hi = (90.0 + 4.0 * p) / q;
    let mut failure = None;
    let r = integrate_log(
        |x| match dist.cdf(x, ctl) {
            Ok(f) => norm * (-q * x).exp() * x.powf(p - 1.0) * f.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        1e-300,
        1e-7,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let head = dist.cdf(lo, ctl)?.value * (q * lo).powf(p) / (2.0 * crate::special::gamma(p + 1.0));
    Ok(MetricResult {
        value: r.value + head,
        abs_error: r.abs_error + head,
        series_terms: series_terms(ch),
        evaluations: r.evaluations,
        refinements: r.intervals,
        clamped: false,
        converged: true,
        notes: Vec::new(),
    })
}

/// Contour-integral BER cross-checked against [`ber_mrc_quadrature`];
/// fails when the two disagree by more than [`DUAL_PATH_TOL`].
pub fn ber_mrc_checked(ch: &MrcChannel, modulation: ModulationSpec, ctl: &QuadratureControl) -> Result<MetricResult> {
    let primary = ber_mrc(ch, modulation, ctl)?;
    let check = ber_mrc_quadrature(ch, modulation, ctl)?;
    let rel = (primary.value - check.value).abs() / primary.value.abs().max(1e-300);
    if rel > DUAL_PATH_TOL {
        return Err(Error::CrossCheck {
            metric: "MRC BER".into(),
            primary: primary.value,
            secondary: check.value,
        });
    }
    Ok(primary.note(format!("quadrature cross-check {:.12e} (rel diff {rel:.2e})", check.value)))
}

/// `E[ln(1+S) e^{−εS/E[S]}] / ln 2` as an (L+1)-variate contour integral.
fn capacity_regularized(ch: &MrcChannel, ctl: &QuadratureControl, eps_rel: f64) -> Result<MetricResult> {
    let eps = eps_rel / ch.branches.iter().map(|b| b.mean_snr()).sum::<f64>();
    let l = ch.len();
    let mut kernels = mixture_kernels(ch);
    kernels.push(MrcKernel::Log(log_kernel()));
    let top_w = vec![1.0; l + 1];
    let mut bottom_w = vec![1.0; l + 1];
    bottom_w[l] = 0.0;
    let integral = MrcIntegral::new(
        kernels,
        vec![OuterFactor::new(0.0, top_w)],
        vec![OuterFactor::new(0.0, bottom_w)],
    );
    let mut args: Vec<f64> = ch.xis().iter().map(|xi| 1.0 / (xi * eps)).collect();
    args.push(1.0 / eps);
    integral.evaluate(&args, -(std::f64::consts::LN_2.ln()), ctl)
}

/// Ergodic capacity (bits/s/Hz) from the ε-regularized contour integral,
/// evaluated at `ε` and `ε/10`. `ε` is relative to the mean combined SNR,
/// so the damping `e^{−εS/E[S]}` biases the result by about `ε ln E[S]`
/// at any `γ₀`. The bias is linear in `ε`, so the two values are
/// extrapolated to `ε = 0`; their difference enters the error estimate and
/// the result is marked unconverged when it exceeds
/// [`EPSILON_SENSITIVITY_TOL`] relative.
pub fn capacity_mrc(ch: &MrcChannel, ctl: &QuadratureControl, eps: f64) -> Result<MetricResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let coarse = capacity_regularized(ch, ctl, eps)?;
    let fine = capacity_regularized(ch, ctl, eps / 10.0)?;
    let delta = (fine.value - coarse.value).abs();
    let mut r = fine;
    let fine_value = r.value;
    r.value = fine_value + (fine_value - coarse.value) / 9.0;
    r.abs_error += coarse.abs_error + delta / 9.0 + tail_mass(ch);
    r.evaluations += coarse.evaluations;
    r.series_terms = series_terms(ch);
    r.notes.push(format!(
        "epsilon sensitivity: {:.9e} at eps={eps:e}, {fine_value:.9e} at eps={:e}",
        coarse.value,
        eps / 10.0
    ));
    if delta > EPSILON_SENSITIVITY_TOL * r.value.abs() {
        r.converged = false;
        r.notes.push("epsilon-unstable".into());
    }
    Ok(r.clamp_to(0.0, f64::INFINITY))
}

/// Capacity by quadrature of `∫ (1 − F(x))/(1 + x) dx / ln 2` with the
/// contour-integral distribution function.
pub fn capacity_mrc_quadrature(ch: &MrcChannel, ctl: &QuadratureControl) -> Result<MetricResult> {
    let dist = MrcDistribution::new(ch);
    let xis = ch.xis();
    let xi_min = xis.iter().cloned().fold(f64::INFINITY, f64::min);
    let xi_sum: f64 = xis.iter().sum();
    let n = ch.branches.iter().map(|b| b.ftr().weights().len()).max().unwrap_or(1) as f64;
    let lo = xi_min * 1e-12;
    let hi = xi_sum * (n + 60.0 + 12.0 * n.sqrt());
    let mut failure = None;
    let mut ccdf = |x: f64| match dist.cdf(x, ctl) {
        Ok(f) => (1.0 - f.value) / (1.0 + x),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let r = integrate_log(&mut ccdf, lo, hi, 1e-300, 1e-7)?;
    let head = integrate(&mut ccdf, 0.0, lo, 1e-300, 1e-4, 4)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let ln2 = std::f64::consts::LN_2;
    Ok(MetricResult {
        value: (r.value + head.value) / ln2,
        abs_error: (r.abs_error + head.abs_error) / ln2,
        series_terms: series_terms(ch),
        evaluations: r.evaluations,
        refinements: r.intervals,
        clamped: false,
        converged: true,
        notes: Vec::new(),
    })
}

/// `L · min(1, φ²/2)`: the high-SNR slope of outage and BER.
pub fn diversity_order(ch: &MrcChannel) -> f64 {
    ch.len() as f64 * ch.a().min(1.0)
}

/// One dominant residue of a branch kernel: `coefficient · z^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residue {
    pub exponent: f64,
    pub coefficient: f64,
}

/// Dominant-residue data of every branch.
///
/// For mixture index `j` the first right pole of `Γ(j+1−w)·a/(a−w)` sits at
/// `min(a, j+1)`; residues sharing an exponent are merged. Every gamma
/// scale is one, so `β = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticTerms {
    pub branches: Vec<Vec<Residue>>,
    pub beta: f64,
    /// Per branch, the smallest exponent (`min(a, 1)`).
    pub leading_exponents: Vec<f64>,
    pub diversity_order: f64,
    pub notes: Vec<String>,
}

impl AsymptoticTerms {
    pub fn new(ch: &MrcChannel) -> Self {
        let mut notes = Vec::new();
        let mut a = ch.a();
        // a = j+1 turns the two residues into a double pole; a relative nudge
        // keeps them separate and their sum finite
        if (a - a.round()).abs() < 1e-9 && a.round() >= 1.0 {
            a += 1e-7 * a;
            notes.push(format!("a = {} is an integer; residues split with a relative shift 1e-7", ch.a()));
        }
        let branches: Vec<Vec<Residue>> = ch
            .branches
            .iter()
            .map(|b| {
                let mut at_a = 0.0;
                let mut out = Vec::new();
                for (j, &p) in b.ftr().weights().iter().enumerate() {
                    let jf = j as f64;
                    if jf + 1.0 > a {
                        at_a += p * (ln_gamma(a + 1.0) + ln_gamma(jf + 1.0 - a) - ln_gamma(jf + 1.0)).exp();
                    } else {
                        out.push(Residue {
                            exponent: jf + 1.0,
                            coefficient: p * a / (a - jf - 1.0),
                        });
                    }
                }
                if at_a != 0.0 {
                    out.push(Residue {
                        exponent: a,
                        coefficient: at_a,
                    });
                }
                out
            })
            .collect();
        let leading_exponents = vec![a.min(1.0); ch.len()];
        AsymptoticTerms {
            branches,
            beta: 1.0,
            leading_exponents,
            diversity_order: diversity_order(ch),
            notes,
        }
    }

    /// `Σ Π_l c_l z_l^{e_l} · coupling(Σ e_l)` over all residue combinations.
    fn combine(&self, args: &[f64], ln_coupling: impl Fn(f64) -> f64) -> f64 {
        let l = self.branches.len();
        let mut idx = vec![0usize; l];
        let mut total = 0.0;
        loop {
            let mut ln_term = 0.0;
            let mut sign = 1.0;
            let mut sum_e = 0.0;
            for (b, &i) in idx.iter().enumerate() {
                let r = self.branches[b][i];
                ln_term += r.coefficient.abs().ln() + r.exponent * args[b].ln();
                sign *= r.coefficient.signum();
                sum_e += r.exponent;
            }
            total += sign * (ln_term + ln_coupling(sum_e)).exp() / self.beta;
            let mut b = 0;
            loop {
                if b == l {
                    return total;
                }
                idx[b] += 1;
                if idx[b] < self.branches[b].len() {
                    break;
                }
                idx[b] = 0;
                b += 1;
            }
        }
    }
}

fn asymptotic_result(terms: &AsymptoticTerms, value: f64) -> MetricResult {
    let mut r = MetricResult::exact(value);
    r.series_terms = terms.branches.iter().map(|b| b.len()).product();
    r.notes = terms.notes.clone();
    r
}

/// High-SNR outage from the dominant residue of every mixture term.
pub fn outage_mrc_asymptotic(ch: &MrcChannel, gamma_th_db: f64) -> Result<MetricResult> {
    let g = db_to_linear(gamma_th_db);
    let terms = AsymptoticTerms::new(ch);
    let args: Vec<f64> = ch.xis().iter().map(|xi| g / xi).collect();
    let v = terms.combine(&args, |e| -ln_gamma(1.0 + e));
    Ok(asymptotic_result(&terms, v))
}

/// High-SNR average BER from the same residues with the BER coupling.
pub fn ber_mrc_asymptotic(ch: &MrcChannel, modulation: ModulationSpec) -> Result<MetricResult> {
    let terms = AsymptoticTerms::new(ch);
    let (p, q) = (modulation.p, modulation.q);
    let args: Vec<f64> = ch.xis().iter().map(|xi| 1.0 / (q * xi)).collect();
    let v = terms.combine(&args, |e| ln_gamma(p + e) - ln_gamma(1.0 + e)) * 0.5 / crate::special::gamma(p);
    Ok(asymptotic_result(&terms, v))
}

/// Fox H parameterization of one multi-index term of the distribution function:
/// per branch `G^{2,1}_{2,2}(γ/ξ_l | 1, a+1 ; j_l+1, a)` weighted by
/// `P_l(j_l)·a/j_l!`, coupled through `1/Γ(1 + Σw)`.
pub fn termwise_cdf_spec(ch: &MrcChannel, indices: &[usize], gamma: f64) -> Result<FoxHSpec> {
    if indices.len() != ch.len() {
        return Err(Error::InvalidParameter(format!(
            "{} indices for {} branches",
            indices.len(),
            ch.len()
        )));
    }
    let a = ch.a();
    let mut inner = Vec::with_capacity(ch.len());
    let mut ln_scale = 0.0;
    for (b, &j) in ch.branches.iter().zip(indices) {
        let p = b.ftr().weights().get(j).copied().unwrap_or(0.0);
        if p == 0.0 {
            return Err(Error::InvalidParameter(format!("mixture index {j} carries no weight")));
        }
        inner.push(GammaFactorGroup::meijer(&[1.0, a + 1.0], 1, &[j as f64 + 1.0, a], 2)?);
        ln_scale += p.ln() + a.ln() - ln_gamma(j as f64 + 1.0);
    }
    let args = ch.xis().iter().map(|xi| gamma / xi).collect();
    let l = ch.len();
    Ok(FoxHSpec::new(args, inner, vec![], vec![OuterFactor::uniform(1.0, l, 1.0)], vec![None; l])?.with_ln_scale(ln_scale))
}

/// Distribution function summed term by term over multi-indices in order of
/// increasing `Σ j_l`, stopping once a whole diagonal adds less than `tol`
/// relative. Much slower than [`mrc_snr_cdf`]; used to validate it.
pub fn mrc_snr_cdf_termwise(ch: &MrcChannel, gamma: f64, tol: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
    let l = ch.len();
    let max_j: Vec<usize> = ch.branches.iter().map(|b| b.ftr().weights().len() - 1).collect();
    let top: usize = max_j.iter().sum();
    let mut total = 0.0;
    let mut abs_error = 0.0;
    let mut evaluations = 0;
    let mut terms = 0;
    for diag in 0..=top {
        let mut diag_sum = 0.0;
        let mut idx = vec![0usize; l];
        loop {
            if idx.iter().sum::<usize>() == diag && idx.iter().zip(&max_j).all(|(i, m)| i <= m) {
                let spec = termwise_cdf_spec(ch, &idx, gamma)?;
                let r = fox_h_multivariate(&spec, ctl)?;
                diag_sum += r.value;
                abs_error += r.abs_error;
                evaluations += r.evaluations;
                terms += 1;
            }
            let mut b = 0;
            loop {
                if b == l {
                    break;
                }
                idx[b] += 1;
                if idx[b] <= diag.min(max_j[b]) {
                    break;
                }
                idx[b] = 0;
                b += 1;
            }
            if b == l {
                break;
            }
        }
        total += diag_sum;
        if diag > 0 && diag_sum.abs() < tol * total.abs() {
            return Ok(MetricResult {
                value: total,
                abs_error: abs_error + diag_sum.abs(),
                series_terms: terms,
                evaluations,
                refinements: diag,
                clamped: false,
                converged: true,
                notes: Vec::new(),
            }
            .clamp_to(0.0, 1.0));
        }
    }
    Ok(MetricResult {
        value: total,
        abs_error: abs_error + tail_mass(ch),
        series_terms: terms,
        evaluations,
        refinements: top,
        clamped: false,
        converged: true,
        notes: Vec::new(),
    }
    .clamp_to(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{FtrParams, PointingParams};
    use crate::singlelink::{snr_cdf, snr_pdf};

    fn branch(phi: f64, k: f64, gamma0_db: f64) -> SingleLinkChannel {
        SingleLinkChannel::new(
            FtrParams::new(k, 2.0, 0.5).unwrap(),
            PointingParams::from_phi_s0(phi, 0.054).unwrap(),
            gamma0_db,
        )
        .unwrap()
    }

    #[test]
    fn single_branch_reduces() {
        let ctl = default_control();
        for phi in [1.0, 2.5] {
            let b = branch(phi, 10.0, 40.0);
            let ch = MrcChannel::iid(b.clone(), 1).unwrap();
            for &g in &[0.05, 0.5, 2.5, 10.0] {
                let c = mrc_snr_cdf(&ch, g, &ctl).unwrap().value;
                let e = snr_cdf(&b, g).unwrap().value;
                assert!((c - e).abs() < 1e-7 * e.max(1e-3), "phi={phi} g={g}: {c} vs {e}");
                let f = mrc_snr_pdf(&ch, g, &ctl).unwrap().value;
                let e = snr_pdf(&b, g).unwrap().value;
                assert!((f - e).abs() < 1e-6 * e, "phi={phi} g={g}: {f} vs {e}");
            }
        }
    }

    #[test]
    fn termwise_matches_aggregated() {
        let ctl = default_control();
        let b = branch(1.0, 0.5, 40.0);
        let ch = MrcChannel::iid(b, 2).unwrap();
        for &g in &[0.5, 3.0] {
            let agg = mrc_snr_cdf(&ch, g, &ctl).unwrap().value;
            let tw = mrc_snr_cdf_termwise(&ch, g, 1e-10, &ctl).unwrap().value;
            assert!((agg - tw).abs() < 1e-6 * agg, "g={g}: {agg} vs {tw}");
        }
    }

    #[test]
    fn diversity_orders() {
        assert_eq!(diversity_order(&MrcChannel::iid(branch(6.0, 10.0, 30.0), 4).unwrap()), 4.0);
        assert_eq!(diversity_order(&MrcChannel::iid(branch(1.0, 10.0, 30.0), 2).unwrap()), 1.0);
        let d = diversity_order(&MrcChannel::iid(branch(2f64.sqrt(), 10.0, 30.0), 3).unwrap());
        assert!((d - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_branches() {
        assert!(MrcChannel::new(vec![branch(1.0, 10.0, 30.0), branch(2.0, 10.0, 30.0)]).is_err());
        assert!(MrcChannel::new(vec![branch(1.0, 10.0, 30.0), branch(1.0, 10.0, 31.0)]).is_err());
        assert!(MrcChannel::iid(branch(1.0, 10.0, 30.0), 5).is_err());
        assert!(MrcChannel::new(vec![]).is_err());
    }
}
