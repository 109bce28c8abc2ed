//! Single-contour Mellin–Barnes integrals: gamma-factor kernels and the
//! Meijer G / univariate Fox H evaluator.
//!
//! Convention: with `s` on a vertical line `Re s = c`,
//!
//! ```text
//! Θ(s) = Π_{j≤m} Γ(b_j − B_j s) Π_{j≤n} Γ(1 − a_j + A_j s)
//!        ───────────────────────────────────────────────────
//!        Π_{j>m} Γ(1 − b_j + B_j s) Π_{j>n} Γ(a_j − A_j s)
//!
//! H(z) = (1/2πi) ∫ Θ(s) z^s ds
//! ```
//!
//! and the Meijer G function is the case with every scale equal to one.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::ln_gamma_c;
use super::quad::gauss_legendre;
use crate::error::{Error, Result};
use crate::metric::MetricResult;

/// A function of one contour variable, given through its logarithm, that is
/// analytic on the open vertical strip returned by [`MellinKernel::strip`].
pub trait MellinKernel: Send + Sync {
    fn ln_eval(&self, s: Complex64) -> Complex64;

    /// `(lo, hi)`: the rightmost left-pole and leftmost right-pole abscissas.
    fn strip(&self) -> (f64, f64);
}

/// Gamma-factor parameters of a Mellin–Barnes kernel in `(m, n, p, q)` form.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaFactorGroup {
    /// `(a_j, A_j)` for `j ≤ n`: numerator `Γ(1 − a_j + A_j s)`.
    pub a_top: Vec<(f64, f64)>,
    /// `(a_j, A_j)` for `j > n`: denominator `Γ(a_j − A_j s)`.
    pub a_bottom: Vec<(f64, f64)>,
    /// `(b_j, B_j)` for `j ≤ m`: numerator `Γ(b_j − B_j s)`.
    pub b_top: Vec<(f64, f64)>,
    /// `(b_j, B_j)` for `j > m`: denominator `Γ(1 − b_j + B_j s)`.
    pub b_bottom: Vec<(f64, f64)>,
}

impl GammaFactorGroup {
    /// Fox-H style constructor: `a` has `p` pairs of which the first `n`
    /// sit in the numerator, `b` has `q` pairs of which the first `m` do.
    pub fn new(a: &[(f64, f64)], n: usize, b: &[(f64, f64)], m: usize) -> Result<Self> {
        if n > a.len() || m > b.len() {
            return Err(Error::InvalidParameter(format!(
                "index counts inconsistent: n={n} p={} m={m} q={}",
                a.len(),
                b.len()
            )));
        }
        for &(v, scale) in a.iter().chain(b) {
            if !(scale > 0.0) || !v.is_finite() || !scale.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "gamma factor ({v}, {scale}) needs a finite parameter and a positive scale"
                )));
            }
        }
        Ok(GammaFactorGroup {
            a_top: a[..n].to_vec(),
            a_bottom: a[n..].to_vec(),
            b_top: b[..m].to_vec(),
            b_bottom: b[m..].to_vec(),
        })
    }

    /// Meijer G parameters (all scales one).
    pub fn meijer(a: &[f64], n: usize, b: &[f64], m: usize) -> Result<Self> {
        let a: Vec<_> = a.iter().map(|&v| (v, 1.0)).collect();
        let b: Vec<_> = b.iter().map(|&v| (v, 1.0)).collect();
        Self::new(&a, n, &b, m)
    }

    pub fn orders(&self) -> (usize, usize, usize, usize) {
        (
            self.b_top.len(),
            self.a_top.len(),
            self.a_top.len() + self.a_bottom.len(),
            self.b_top.len() + self.b_bottom.len(),
        )
    }

    /// `|Θ(c + it)|` decays like `exp(−π·δ·|t|/2)` with this `δ`.
    pub fn decay_delta(&self) -> f64 {
        let sum = |v: &[(f64, f64)]| v.iter().map(|p| p.1).sum::<f64>();
        sum(&self.b_top) + sum(&self.a_top) - sum(&self.b_bottom) - sum(&self.a_bottom)
    }
}

impl MellinKernel for GammaFactorGroup {
    fn ln_eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(b, bs) in &self.b_top {
            acc += ln_gamma_c(b - bs * s);
        }
        for &(a, as_) in &self.a_top {
            acc += ln_gamma_c(1.0 - a + as_ * s);
        }
        for &(b, bs) in &self.b_bottom {
            acc -= ln_gamma_c(1.0 - b + bs * s);
        }
        for &(a, as_) in &self.a_bottom {
            acc -= ln_gamma_c(a - as_ * s);
        }
        acc
    }

    fn strip(&self) -> (f64, f64) {
        let lo = self
            .a_top
            .iter()
            .map(|&(a, sc)| (a - 1.0) / sc)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self
            .b_top
            .iter()
            .map(|&(b, sc)| b / sc)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }
}

/// Truncation and refinement settings for contour quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureControl {
    /// Half-length of the truncated imaginary-axis range.
    pub t_max: f64,
    /// Initial nodes per unit of contour length.
    pub nodes: usize,
    /// Relative change between refinements that counts as converged.
    pub rel_tol: f64,
    pub max_refinements: usize,
    /// Maximum number of tensor-product nodes per level (multivariate only).
    pub budget: usize,
    /// Maximum number of contour variables.
    pub max_dim: usize,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        QuadratureControl {
            t_max: 40.0,
            nodes: 16,
            rel_tol: 1e-10,
            max_refinements: 7,
            budget: 60_000_000,
            max_dim: 4,
        }
    }
}

impl QuadratureControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidParameter("t_max must be positive".into()));
        }
        if self.nodes < 15 {
            return Err(Error::InvalidParameter("node count must be at least 15".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter("tolerance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Pick the contour abscissa inside `(lo, hi)`: the hint when it is valid,
/// otherwise the midpoint (or half a unit inside a half-infinite strip).
pub fn choose_abscissa(lo: f64, hi: f64, hint: Option<f64>, variable: usize) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::NoValidContour { variable, lo, hi });
    }
    if let Some(c) = hint {
        if c > lo && c < hi {
            return Ok(c);
        }
        return Err(Error::NoValidContour { variable, lo, hi });
    }
    Ok(match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 0.5,
        (false, true) => hi - 0.5,
        (false, false) => 0.0,
    })
}

/// `G^{m,n}_{p,q}` (or univariate Fox H) at real `z > 0`.
pub fn meijer_g(spec: &GammaFactorGroup, z: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
    contour_integral(spec, z, 0.0, None, ctl)
}

/// `exp(ln_scale) · H(z)` on the contour `Re s = hint` (or the default abscissa).
///
/// The log-scale lets callers multiply by factorially large or small
/// prefactors without leaving floating-point range.
pub fn contour_integral<K: MellinKernel + ?Sized>(
    kernel: &K,
    z: f64,
    ln_scale: f64,
    hint: Option<f64>,
    ctl: &QuadratureControl,
) -> Result<MetricResult> {
    ctl.validate()?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("contour integral needs z > 0, got {z}")));
    }
    let (lo, hi) = kernel.strip();
    let c = choose_abscissa(lo, hi, hint, 0)?;
    let lz = z.ln();
    let f = |t: f64| -> f64 {
        let s = Complex64::new(c, t);
        (kernel.ln_eval(s) + s * lz + ln_scale).exp().re
    };
    let (gx, gw) = gauss_legendre(ctl.nodes);

    let mut t_max = ctl.t_max;
    let mut panels = t_max.ceil().max(1.0) as usize;
    let mut prev: Option<f64> = None;
    let mut evaluations = 0;
    for level in 0..=ctl.max_refinements {
        let width = t_max / panels as f64;
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(&gw) {
                let v = f(mid + 0.5 * width * x) * w * 0.5 * width;
                sum += v;
                abs_sum += v.abs();
            }
        }
        evaluations += panels * ctl.nodes;
        let value = sum / PI;
        let roundoff = 64.0 * f64::EPSILON * abs_sum / PI;

        let f_end = f(t_max).abs();
        let f_before = f(t_max - 1.0).abs().max(f_end);
        let rate = (f_before / f_end.max(1e-300)).ln();
        let tail = if rate > 0.05 { f_end / rate / PI } else { f_end * t_max / PI };

        if let Some(old) = prev {
            let delta = (value - old).abs();
            if delta <= ctl.rel_tol * value.abs() + roundoff {
                if tail > ctl.rel_tol * value.abs() + roundoff && t_max < 8.0 * ctl.t_max {
                    t_max *= 1.5;
                    panels = (panels as f64 * 1.5).ceil() as usize;
                    prev = None;
                    continue;
                }
                return Ok(MetricResult {
                    value,
                    abs_error: delta + tail + roundoff,
                    series_terms: 1,
                    evaluations,
                    refinements: level,
                    clamped: false,
                    converged: true,
                    notes: vec![format!("contour Re s = {c}, T = {t_max}")],
                });
            }
            if level == ctl.max_refinements {
                return Err(Error::NotConverged {
                    refinements: level,
                    delta,
                });
            }
        }
        prev = Some(value);
        panels *= 2;
    }
    Err(Error::NotConverged {
        refinements: ctl.max_refinements,
        delta: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_as_meijer() {
        let spec = GammaFactorGroup::meijer(&[], 0, &[0.0], 1).unwrap();
        let ctl = QuadratureControl::default();
        for z in [0.01, 0.5, 3.0, 20.0] {
            let r = meijer_g(&spec, z, &ctl).unwrap();
            assert!((r.value - (-z).exp()).abs() < 1e-8 * (-z).exp(), "z={z}: {}", r.value);
        }
    }

    #[test]
    fn empty_strip_is_rejected() {
        // left pole at 0.5 (a = 1.5), right pole at 0.2
        let spec = GammaFactorGroup::meijer(&[1.5], 1, &[0.2], 1).unwrap();
        let err = meijer_g(&spec, 1.0, &QuadratureControl::default()).unwrap_err();
        assert!(matches!(err, Error::NoValidContour { .. }));
    }

    #[test]
    fn bad_scales_rejected() {
        assert!(GammaFactorGroup::new(&[(1.0, 0.0)], 1, &[], 0).is_err());
        assert!(GammaFactorGroup::new(&[(1.0, 1.0)], 2, &[], 0).is_err());
    }

    #[test]
    fn control_validation() {
        let mut c = QuadratureControl::default();
        c.nodes = 10;
        assert!(c.validate().is_err());
        c.nodes = 15;
        c.rel_tol = 1.5;
        assert!(c.validate().is_err());
    }
}
