//! N-variate Fox H functions by nested vertical-contour quadrature.
//!
//! ```text
//! H = (2πi)^{-N} ∫…∫ Π_l Θ_l(s_l) z_l^{s_l}
//!       · Π_top Γ(a + Σ_l w_l s_l) / Π_bottom Γ(a + Σ_l w_l s_l)  ds_1…ds_N
//! ```
//!
//! Every axis is sampled with the same trapezoid step `h` on
//! `s_l = c_l + i k h`, `|k h| ≤ T`. Axes whose weight columns over the outer
//! factors coincide only enter the outer factors through their sum, so
//! their samples are merged by discrete convolution before the (much
//! smaller) tensor product over the remaining groups is taken. The
//! trapezoid rule converges geometrically for integrands analytic in a
//! strip, and the step is halved until successive levels agree.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::gamma::ln_gamma_c;
use super::mellin::{choose_abscissa, GammaFactorGroup, MellinKernel, QuadratureControl};
use crate::error::{Error, Result};
use crate::metric::MetricResult;

/// Outer gamma factor `Γ(a + Σ_l weights[l]·s_l)` coupling the contour variables.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFactor {
    pub a: f64,
    pub weights: Vec<f64>,
}

impl OuterFactor {
    pub fn new(a: f64, weights: Vec<f64>) -> Self {
        OuterFactor { a, weights }
    }

    /// Same coefficient on every variable.
    pub fn uniform(a: f64, dim: usize, w: f64) -> Self {
        OuterFactor {
            a,
            weights: vec![w; dim],
        }
    }
}

type NodeCache = HashMap<(u64, usize), Arc<Vec<Vec<Complex64>>>>;

/// Reusable nested-contour integrator: kernels, outer coupling and contour
/// abscissas are fixed; arguments vary per call. Kernel samples are cached
/// per refinement level so repeated evaluations only pay for `z^s`.
pub struct NestedContour<K> {
    inner: Vec<K>,
    outer_top: Vec<OuterFactor>,
    outer_bottom: Vec<OuterFactor>,
    abscissas: Vec<f64>,
    groups: Vec<Vec<usize>>,
    // per group, the weight on that group for each outer factor (top then bottom)
    group_cols: Vec<Vec<f64>>,
    cache: Mutex<NodeCache>,
}

impl<K: MellinKernel> NestedContour<K> {
    pub fn new(
        inner: Vec<K>,
        outer_top: Vec<OuterFactor>,
        outer_bottom: Vec<OuterFactor>,
        hints: &[Option<f64>],
    ) -> Result<Self> {
        let dim = inner.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("Fox H needs at least one variable".into()));
        }
        for f in outer_top.iter().chain(&outer_bottom) {
            if f.weights.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "outer factor has {} weights, expected {dim}",
                    f.weights.len()
                )));
            }
        }
        let mut abscissas = Vec::with_capacity(dim);
        for (l, k) in inner.iter().enumerate() {
            let (lo, hi) = k.strip();
            abscissas.push(choose_abscissa(lo, hi, hints.get(l).copied().flatten(), l)?);
        }
        for f in &outer_top {
            let re = f.a + f.weights.iter().zip(&abscissas).map(|(w, c)| w * c).sum::<f64>();
            if !(re > 0.0) {
                return Err(Error::NoValidContour {
                    variable: dim,
                    lo: re,
                    hi: 0.0,
                });
            }
        }

        let column = |l: usize| -> Vec<f64> {
            outer_top
                .iter()
                .chain(&outer_bottom)
                .map(|f| f.weights[l])
                .collect()
        };
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_cols: Vec<Vec<f64>> = Vec::new();
        for l in 0..dim {
            let col = column(l);
            match group_cols.iter().position(|c| *c == col) {
                Some(g) => groups[g].push(l),
                None => {
                    groups.push(vec![l]);
                    group_cols.push(col);
                }
            }
        }
        Ok(NestedContour {
            inner,
            outer_top,
            outer_bottom,
            abscissas,
            groups,
            group_cols,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.len()
    }

    pub fn abscissas(&self) -> &[f64] {
        &self.abscissas
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn kernel_nodes(&self, h: f64, half: usize) -> Arc<Vec<Vec<Complex64>>> {
        let key = (h.to_bits(), half);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return v.clone();
        }
        let nodes: Vec<Vec<Complex64>> = self
            .inner
            .iter()
            .zip(&self.abscissas)
            .map(|(k, &c)| {
                (0..=2 * half)
                    .map(|i| {
                        let t = (i as f64 - half as f64) * h;
                        k.ln_eval(Complex64::new(c, t))
                    })
                    .collect()
            })
            .collect();
        let nodes = Arc::new(nodes);
        self.cache.lock().unwrap().insert(key, nodes.clone());
        nodes
    }

    /// One trapezoid level. Returns (value, absolute mass, tail estimate, nodes).
    fn level(
        &self,
        ln_args: &[f64],
        ln_scale: f64,
        h: f64,
        half: usize,
        budget: usize,
    ) -> Result<(f64, f64, f64, usize)> {
        let nodes = self.kernel_nodes(h, half);
        let mut shift = ln_scale;
        let mut boundary = 0.0;
        let mut axes: Vec<Vec<Complex64>> = Vec::with_capacity(self.dim());
        for (l, ln_k) in nodes.iter().enumerate() {
            let c = self.abscissas[l];
            let v: Vec<Complex64> = ln_k
                .iter()
                .enumerate()
                .map(|(i, lk)| {
                    let s = Complex64::new(c, (i as f64 - half as f64) * h);
                    lk + s * ln_args[l]
                })
                .collect();
            let top = v
                .iter()
                .map(|x| x.re)
                .filter(|x| x.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return Err(Error::Domain(format!("kernel {l} is not finite on its contour")));
            }
            shift += top;
            let g: Vec<Complex64> = v.iter().map(|x| (x - top).exp()).collect();
            let mass: f64 = g.iter().map(|x| x.norm()).sum();
            boundary += (g[0].norm() + g[2 * half].norm()) / mass;
            axes.push(g);
        }

        // merge each group by convolution; offsets are in units of h
        let mut merged: Vec<(Vec<Complex64>, i64, f64)> = Vec::with_capacity(self.groups.len());
        for grp in &self.groups {
            let mut acc = trim(&axes[grp[0]], -(half as i64));
            let mut csum = self.abscissas[grp[0]];
            for &l in &grp[1..] {
                let next = trim(&axes[l], -(half as i64));
                acc = (convolve(&acc.0, &next.0), acc.1 + next.1);
                acc = trim(&acc.0, acc.1);
                csum += self.abscissas[l];
            }
            merged.push((acc.0, acc.1, csum));
        }

        let total_nodes: usize = merged
            .iter()
            .try_fold(1usize, |p, m| p.checked_mul(m.0.len()))
            .unwrap_or(usize::MAX);
        if total_nodes > budget {
            return Err(Error::BudgetExceeded {
                needed: total_nodes,
                budget,
            });
        }

        let n_top = self.outer_top.len();
        let outer: Vec<&OuterFactor> = self.outer_top.iter().chain(&self.outer_bottom).collect();
        let integer = self
            .group_cols
            .iter()
            .all(|c| c.iter().all(|w| w.fract() == 0.0 && w.abs() <= 64.0));
        let (total, abs_total) = if integer {
            let (t, a, m) = self.tabulated_sum(&merged, &outer, n_top, h);
            shift += m;
            (t, a)
        } else {
            self.direct_sum(&merged, &outer, n_top, h)
        };
        let norm = (h / (2.0 * PI)).powi(self.dim() as i32) * shift.exp();
        let value = total.re * norm;
        let mass = abs_total * norm;
        Ok((value, mass, mass * boundary, total_nodes))
    }

    /// Tensor sum when every outer weight is an integer: each outer argument
    /// then depends on one integer index sum, so its gamma values are
    /// tabulated once per level. Returns (sum, absolute sum, log scale).
    fn tabulated_sum(
        &self,
        merged: &[(Vec<Complex64>, i64, f64)],
        outer: &[&OuterFactor],
        n_top: usize,
        h: f64,
    ) -> (Complex64, f64, f64) {
        let n_groups = merged.len();
        let weights: Vec<Vec<i64>> = (0..outer.len())
            .map(|f| (0..n_groups).map(|g| self.group_cols[g][f] as i64).collect())
            .collect();
        let mut tables: Vec<(Vec<Complex64>, i64)> = Vec::with_capacity(outer.len());
        let mut ln_shift = 0.0;
        for (f, fac) in outer.iter().enumerate() {
            let (mut k_lo, mut k_hi) = (0i64, 0i64);
            let mut re = fac.a;
            for (g, m) in merged.iter().enumerate() {
                let w = weights[f][g];
                let ends = [w * m.1, w * (m.1 + m.0.len() as i64 - 1)];
                k_lo += ends[0].min(ends[1]);
                k_hi += ends[0].max(ends[1]);
                re += w as f64 * m.2;
            }
            let sign = if f < n_top { 1.0 } else { -1.0 };
            let lg: Vec<Complex64> = (k_lo..=k_hi)
                .map(|k| sign * ln_gamma_c(Complex64::new(re, k as f64 * h)))
                .collect();
            let top = lg
                .iter()
                .map(|x| x.re)
                .filter(|x| x.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            let top = if top.is_finite() { top } else { 0.0 };
            ln_shift += top;
            let table = lg
                .iter()
                .map(|x| {
                    let v = (x - top).exp();
                    if v.re.is_finite() && v.im.is_finite() {
                        v
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            tables.push((table, k_lo));
        }

        let first = &merged[0];
        let partial: Vec<(Complex64, f64)> = (0..first.0.len())
            .into_par_iter()
            .map(|i0| {
                let mut total = Complex64::new(0.0, 0.0);
                let mut abs_total = 0.0;
                let mut idx = vec![0usize; n_groups];
                idx[0] = i0;
                loop {
                    let mut term = Complex64::new(1.0, 0.0);
                    for (g, &i) in idx.iter().enumerate() {
                        term *= merged[g].0[i];
                    }
                    for (f, (table, k_lo)) in tables.iter().enumerate() {
                        let mut k = 0i64;
                        for (g, &i) in idx.iter().enumerate() {
                            k += weights[f][g] * (i as i64 + merged[g].1);
                        }
                        term *= table[(k - k_lo) as usize];
                    }
                    total += term;
                    abs_total += term.norm();
                    let mut g = 1;
                    loop {
                        if g == n_groups {
                            return (total, abs_total);
                        }
                        idx[g] += 1;
                        if idx[g] < merged[g].0.len() {
                            break;
                        }
                        idx[g] = 0;
                        g += 1;
                    }
                }
            })
            .collect();
        let (mut total, mut abs_total) = (Complex64::new(0.0, 0.0), 0.0);
        for (t, a) in partial {
            total += t;
            abs_total += a;
        }
        (total, abs_total, ln_shift)
    }

    /// Tensor sum evaluating every outer gamma factor at every node.
    fn direct_sum(
        &self,
        merged: &[(Vec<Complex64>, i64, f64)],
        outer: &[&OuterFactor],
        n_top: usize,
        h: f64,
    ) -> (Complex64, f64) {
        let mut idx = vec![0usize; merged.len()];
        let mut total = Complex64::new(0.0, 0.0);
        let mut abs_total = 0.0;
        loop {
            let mut prod = Complex64::new(1.0, 0.0);
            for (g, &i) in idx.iter().enumerate() {
                prod *= merged[g].0[i];
            }
            if prod.norm() > 0.0 {
                let mut ln_outer = Complex64::new(0.0, 0.0);
                for (f, fac) in outer.iter().enumerate() {
                    let mut arg = Complex64::new(fac.a, 0.0);
                    for (g, &i) in idx.iter().enumerate() {
                        let w = self.group_cols[g][f];
                        if w != 0.0 {
                            let k = i as i64 + merged[g].1;
                            arg += w * Complex64::new(merged[g].2, k as f64 * h);
                        }
                    }
                    let lg = ln_gamma_c(arg);
                    if f < n_top {
                        ln_outer += lg;
                    } else {
                        ln_outer -= lg;
                    }
                }
                let term = prod * ln_outer.exp();
                if term.re.is_finite() && term.im.is_finite() {
                    total += term;
                    abs_total += term.norm();
                }
            }
            let mut g = 0;
            loop {
                if g == idx.len() {
                    return (total, abs_total);
                }
                idx[g] += 1;
                if idx[g] < merged[g].0.len() {
                    break;
                }
                idx[g] = 0;
                g += 1;
            }
        }
    }

    /// Evaluate at arguments `z_l > 0`, scaled by `exp(ln_scale)`.
    pub fn evaluate(&self, args: &[f64], ln_scale: f64, ctl: &QuadratureControl) -> Result<MetricResult> {
        ctl.validate()?;
        if args.len() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} arguments, got {}",
                self.dim(),
                args.len()
            )));
        }
        if self.dim() > ctl.max_dim {
            return Err(Error::BudgetExceeded {
                needed: self.dim(),
                budget: ctl.max_dim,
            });
        }
        let mut ln_args = Vec::with_capacity(args.len());
        for &z in args {
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::Domain(format!("Fox H arguments must be positive, got {z}")));
            }
            ln_args.push(z.ln());
        }

        let mut t_max = ctl.t_max;
        let mut h = 1.0 / ctl.nodes as f64;
        let mut prev: Option<f64> = None;
        let mut evaluations = 0;
        let mut level = 0;
        while level <= ctl.max_refinements {
            let half = (t_max / h).ceil() as usize;
            let (value, mass, tail, n) = self.level(&ln_args, ln_scale, h, half, ctl.budget)?;
            evaluations += n;
            let roundoff = 256.0 * f64::EPSILON * mass;
            if let Some(old) = prev {
                let delta = (value - old).abs();
                if delta <= ctl.rel_tol * value.abs() + roundoff {
                    if tail > ctl.rel_tol * value.abs() + roundoff && t_max < 4.0 * ctl.t_max {
                        t_max *= 1.5;
                        prev = Some(value);
                        level += 1;
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
                        notes: Vec::new(),
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
            h *= 0.5;
            level += 1;
        }
        Err(Error::NotConverged {
            refinements: ctl.max_refinements,
            delta: f64::NAN,
        })
    }
}

/// Drop negligible leading/trailing samples; `offset` is the index of
/// element 0 in units of `h`.
fn trim(v: &[Complex64], offset: i64) -> (Vec<Complex64>, i64) {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let floor = peak * 1e-30;
    let first = v.iter().position(|x| x.norm() > floor).unwrap_or(0);
    let last = v.iter().rposition(|x| x.norm() > floor).unwrap_or(v.len() - 1);
    (v[first..=last].to_vec(), offset + first as i64)
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (o, y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

/// Full parameterization of an N-variate Fox H function.
pub struct FoxHSpec<K = GammaFactorGroup> {
    args: Vec<f64>,
    integrator: NestedContour<K>,
    ln_scale: f64,
}

impl<K: MellinKernel> FoxHSpec<K> {
    /// `inner[l]` is the single-variable kernel of `s_l`; `outer_top` and
    /// `outer_bottom` couple the variables. Fails when no valid contour exists.
    pub fn new(
        args: Vec<f64>,
        inner: Vec<K>,
        outer_top: Vec<OuterFactor>,
        outer_bottom: Vec<OuterFactor>,
        hints: Vec<Option<f64>>,
    ) -> Result<Self> {
        if args.len() != inner.len() {
            return Err(Error::InvalidParameter(format!(
                "{} arguments for {} variables",
                args.len(),
                inner.len()
            )));
        }
        if let Some(z) = args.iter().find(|z| !(**z > 0.0)) {
            return Err(Error::Domain(format!("Fox H arguments must be positive, got {z}")));
        }
        Ok(FoxHSpec {
            args,
            integrator: NestedContour::new(inner, outer_top, outer_bottom, &hints)?,
            ln_scale: 0.0,
        })
    }

    /// Multiply the result by `exp(ln_scale)`.
    pub fn with_ln_scale(mut self, ln_scale: f64) -> Self {
        self.ln_scale = ln_scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.args.len()
    }

    pub fn args(&self) -> &[f64] {
        &self.args
    }

    pub fn abscissas(&self) -> &[f64] {
        self.integrator.abscissas()
    }
}

pub fn fox_h_multivariate<K: MellinKernel>(spec: &FoxHSpec<K>, ctl: &QuadratureControl) -> Result<MetricResult> {
    spec.integrator.evaluate(&spec.args, spec.ln_scale, ctl)
}
