//! Sweep, Monte Carlo, validation and Fox H commands. Each returns the
//! complete CSV document so output is byte-identical for identical inputs.
//!
//! Sweep and `mc` schema:
//! `metric,mode,branches,phi,gamma0_db,value,abs_error,ci_low,ci_high,samples,status,notes`.
//! Exact and asymptotic rows leave the interval columns empty; Monte Carlo
//! rows put the standard error in `abs_error`.
//!
//! Validation schema:
//! `check,branches,phi,gamma0_db,value,reference,ci_low,ci_high,rel_diff,status`.

use rayon::prelude::*;

use super::config::{Config, Metric, Mode};
use crate::error::{Error, Result};
use crate::metric::MetricResult;
use crate::montecarlo::{
    estimate_outage, sample_unit_snr, EmpiricalMetric, SimConfig,
};
use crate::mrc::{
    ber_mrc, ber_mrc_asymptotic, capacity_mrc, default_control, mrc_snr_cdf, outage_mrc, outage_mrc_asymptotic,
    MrcChannel,
};
use crate::singlelink::{
    ber_single, capacity_single_bound, capacity_single_exact, outage_single, ModulationSpec,
};
use crate::special::fox_h_multivariate;
use crate::units::db_to_linear;

/// Width, in standard deviations, of the intervals used by `validate`.
pub const VALIDATION_Z: f64 = 3.0;
/// Outage below this is not checked against Monte Carlo (too few events at 10⁶ samples).
pub const MC_OUTAGE_FLOOR: f64 = 1e-4;

pub const SWEEP_HEADER: [&str; 12] = [
    "metric", "mode", "branches", "phi", "gamma0_db", "value", "abs_error", "ci_low", "ci_high", "samples", "status",
    "notes",
];

pub const VALIDATE_HEADER: [&str; 10] = [
    "check", "branches", "phi", "gamma0_db", "value", "reference", "ci_low", "ci_high", "rel_diff", "status",
];

/// Fixed float formatting used in every CSV cell.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.10e}")
    }
}

fn fmt_plain(x: f64) -> String {
    format!("{x:.4}")
}

fn document(comments: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let mut out = comments.to_string();
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?);
    Ok(out)
}

fn channel(cfg: &Config, l: usize, phi: f64, gamma0_db: f64) -> Result<MrcChannel> {
    MrcChannel::iid(cfg.branch(phi, gamma0_db)?, l)
}

fn analytic(cfg: &Config, metric: Metric, mode: Mode, l: usize, phi: f64, g0: f64) -> Result<MetricResult> {
    let ch = channel(cfg, l, phi, g0)?;
    let single = &ch.branches()[0];
    let th = cfg.sweep.threshold_db;
    let modulation = cfg.modulation();
    let ctl = default_control();
    match (metric, mode) {
        (Metric::Outage, Mode::Exact) if l == 1 => outage_single(single, th),
        (Metric::Outage, Mode::Exact) => outage_mrc(&ch, th),
        (Metric::Outage, _) => outage_mrc_asymptotic(&ch, th),
        (Metric::Ber, Mode::Exact) if l == 1 => ber_single(single, modulation),
        (Metric::Ber, Mode::Exact) => ber_mrc(&ch, modulation, &ctl),
        (Metric::Ber, _) => ber_mrc_asymptotic(&ch, modulation),
        (Metric::Capacity, Mode::Exact) if l == 1 => capacity_single_exact(single),
        (Metric::Capacity, Mode::Exact) => capacity_mrc(&ch, &ctl, cfg.sweep.epsilon),
        (Metric::Capacity, _) if l == 1 => capacity_single_bound(single),
        (Metric::Capacity, _) => Err(Error::InvalidParameter(
            "no high-SNR capacity expression for more than one branch".into(),
        )),
    }
}

fn status_of(r: &MetricResult) -> &'static str {
    if !r.converged {
        "unconverged"
    } else if r.clamped {
        "clamped"
    } else {
        "ok"
    }
}

fn analytic_row(cfg: &Config, mode: Mode, l: usize, phi: f64, g0: f64) -> Vec<String> {
    let metric = cfg.sweep.metric;
    let head = vec![
        metric.name().to_string(),
        mode.name().to_string(),
        l.to_string(),
        fmt_plain(phi),
        fmt_plain(g0),
    ];
    let tail = match analytic(cfg, metric, mode, l, phi, g0) {
        Ok(r) => vec![
            fmt(r.value),
            fmt(r.abs_error),
            String::new(),
            String::new(),
            String::new(),
            status_of(&r).to_string(),
            r.notes.join("; "),
        ],
        Err(e) => vec![
            fmt(f64::NAN),
            fmt(f64::NAN),
            String::new(),
            String::new(),
            String::new(),
            "error".to_string(),
            e.to_string(),
        ],
    };
    head.into_iter().chain(tail).collect()
}

fn empirical(metric: Metric, unit: &[f64], g0: f64, th_db: f64, modulation: ModulationSpec, z: f64) -> EmpiricalMetric {
    let g = db_to_linear(g0);
    match metric {
        Metric::Outage => {
            let limit = db_to_linear(th_db) / g;
            let events = unit.iter().filter(|&&x| x < limit).count() as u64;
            EmpiricalMetric::proportion(events, unit.len(), z)
        }
        Metric::Ber => EmpiricalMetric::mean(unit.iter().map(|&x| modulation.conditional_ber(g * x)), z),
        Metric::Capacity => EmpiricalMetric::mean(
            unit.iter().map(|&x| (g * x).ln_1p() / std::f64::consts::LN_2),
            z,
        ),
    }
}

fn sim_config(cfg: &Config, z: f64) -> SimConfig {
    SimConfig::new(cfg.sweep.samples, cfg.sweep.seed).with_z(z)
}

/// Monte Carlo rows for every grid point. Samples are drawn once per
/// `(L, φ)` at unit γ₀ and rescaled, so all γ₀ points share one sample set.
fn mc_rows(cfg: &Config) -> Vec<Vec<String>> {
    let s = &cfg.sweep;
    let sim = sim_config(cfg, crate::montecarlo::Z_95);
    let mut rows = Vec::new();
    for &l in &s.branches {
        for &phi in &s.phi {
            let unit = channel(cfg, l, phi, 0.0).and_then(|ch| sample_unit_snr(&ch, &sim));
            for &g0 in &s.gamma0_db {
                let mut row = vec![
                    s.metric.name().to_string(),
                    Mode::Mc.name().to_string(),
                    l.to_string(),
                    fmt_plain(phi),
                    fmt_plain(g0),
                ];
                match &unit {
                    Ok(unit) => {
                        let e = empirical(s.metric, unit, g0, s.threshold_db, cfg.modulation(), sim.z);
                        let notes = e.events.map(|n| format!("events {n}")).unwrap_or_default();
                        row.extend([
                            fmt(e.value),
                            fmt(e.std_error),
                            fmt(e.ci_low),
                            fmt(e.ci_high),
                            e.samples.to_string(),
                            if e.undersampled { "undersampled" } else { "ok" }.to_string(),
                            notes,
                        ]);
                    }
                    Err(err) => row.extend([
                        fmt(f64::NAN),
                        fmt(f64::NAN),
                        String::new(),
                        String::new(),
                        String::new(),
                        "error".to_string(),
                        err.to_string(),
                    ]),
                }
                rows.push(row);
            }
        }
    }
    rows
}

/// One row per grid point per mode, in `(mode, L, φ, γ₀)` order.
pub fn run_sweep(cfg: &Config, command: &str) -> Result<String> {
    let s = &cfg.sweep;
    let mut points = Vec::new();
    for &l in &s.branches {
        for &phi in &s.phi {
            for &g0 in &s.gamma0_db {
                points.push((l, phi, g0));
            }
        }
    }
    let mut rows = Vec::new();
    for &mode in &s.modes {
        match mode {
            Mode::Mc => rows.extend(mc_rows(cfg)),
            _ => {
                let r: Vec<Vec<String>> = points
                    .par_iter()
                    .map(|&(l, phi, g0)| analytic_row(cfg, mode, l, phi, g0))
                    .collect();
                rows.extend(r);
            }
        }
    }
    let comments = format!("# command = {command}\n{}", cfg.comment_lines());
    document(&comments, &SWEEP_HEADER, &rows)
}

/// Monte Carlo only, in the sweep schema.
pub fn run_mc(cfg: &Config) -> Result<String> {
    let mut c = cfg.clone();
    c.sweep.modes = vec![Mode::Mc];
    run_sweep(&c, "mc")
}

struct Check {
    name: String,
    l: usize,
    phi: f64,
    g0: f64,
    value: f64,
    reference: f64,
    ci: Option<(f64, f64)>,
    status: &'static str,
}

impl Check {
    fn row(&self) -> Vec<String> {
        let rel = if self.reference != 0.0 {
            (self.value - self.reference).abs() / self.reference.abs()
        } else {
            f64::NAN
        };
        let (lo, hi) = self.ci.map_or((String::new(), String::new()), |(a, b)| (fmt(a), fmt(b)));
        vec![
            self.name.clone(),
            self.l.to_string(),
            fmt_plain(self.phi),
            fmt_plain(self.g0),
            fmt(self.value),
            fmt(self.reference),
            lo,
            hi,
            fmt(rel),
            self.status.to_string(),
        ]
    }
}

fn error_check(name: &str, l: usize, phi: f64, g0: f64) -> Check {
    Check {
        name: name.to_string(),
        l,
        phi,
        g0,
        value: f64::NAN,
        reference: f64::NAN,
        ci: None,
        status: "FAIL",
    }
}

fn ci_check(name: &str, l: usize, phi: f64, g0: f64, analytic: Result<MetricResult>, mc: &EmpiricalMetric, floor: f64) -> Check {
    let Ok(a) = analytic else {
        return error_check(name, l, phi, g0);
    };
    let status = if mc.undersampled || a.value < floor {
        "skipped"
    } else if mc.contains(a.value) {
        "PASS"
    } else {
        "FAIL"
    };
    Check {
        name: name.to_string(),
        l,
        phi,
        g0,
        value: a.value,
        reference: mc.value,
        ci: Some((mc.ci_low, mc.ci_high)),
        status,
    }
}

fn rel_check(name: &str, l: usize, phi: f64, g0: f64, value: Result<f64>, reference: Result<f64>, tol: f64) -> Check {
    let (Ok(v), Ok(r)) = (value, reference) else {
        return error_check(name, l, phi, g0);
    };
    let ok = (v - r).abs() <= tol * r.abs();
    Check {
        name: name.to_string(),
        l,
        phi,
        g0,
        value: v,
        reference: r,
        ci: None,
        status: if ok { "PASS" } else { "FAIL" },
    }
}

fn point_checks(cfg: &Config, l: usize, phi: f64, g0: f64, unit: &[f64]) -> Vec<Check> {
    let s = &cfg.sweep;
    let modulation = cfg.modulation();
    let mut out = Vec::new();
    for metric in [Metric::Outage, Metric::Ber, Metric::Capacity] {
        let mc = empirical(metric, unit, g0, s.threshold_db, modulation, VALIDATION_Z);
        let floor = if metric == Metric::Outage { MC_OUTAGE_FLOOR } else { 0.0 };
        let a = analytic(cfg, metric, Mode::Exact, l, phi, g0);
        out.push(ci_check(&format!("{}_vs_mc", metric.name()), l, phi, g0, a, &mc, floor));
    }
    if l == 1 {
        let ctl = default_control();
        let mrc = channel(cfg, 1, phi, g0);
        let single = cfg.branch(phi, g0);
        let pair = |a: Result<MetricResult>, b: Result<MetricResult>| (a.map(|r| r.value), b.map(|r| r.value));
        let (v, r) = match (&mrc, &single) {
            (Ok(m), Ok(b)) => pair(mrc_snr_cdf(m, db_to_linear(s.threshold_db), &ctl), outage_single(b, s.threshold_db)),
            _ => (Err(Error::Config("channel".into())), Err(Error::Config("channel".into()))),
        };
        out.push(rel_check("outage_l1_reduction", l, phi, g0, v, r, s.tolerance));
        let (v, r) = match (&mrc, &single) {
            (Ok(m), Ok(b)) => pair(ber_mrc(m, modulation, &ctl), ber_single(b, modulation)),
            _ => (Err(Error::Config("channel".into())), Err(Error::Config("channel".into()))),
        };
        out.push(rel_check("ber_l1_reduction", l, phi, g0, v, r, s.tolerance));
        let (v, r) = match (&mrc, &single) {
            (Ok(m), Ok(b)) => pair(capacity_mrc(m, &ctl, s.epsilon), capacity_single_exact(b)),
            _ => (Err(Error::Config("channel".into())), Err(Error::Config("channel".into()))),
        };
        out.push(rel_check("capacity_l1_reduction", l, phi, g0, v, r, s.tolerance));
    }
    out
}

/// Analytic-vs-Monte-Carlo checks at every grid point, L = 1 reduction
/// checks, and a seed-reproducibility check. Returns the report and
/// whether every check passed or was skipped.
pub fn validate(cfg: &Config) -> Result<(String, bool)> {
    let s = &cfg.sweep;
    let sim = sim_config(cfg, VALIDATION_Z);
    let mut checks = Vec::new();
    for &l in &s.branches {
        for &phi in &s.phi {
            let unit = match channel(cfg, l, phi, 0.0).and_then(|ch| sample_unit_snr(&ch, &sim)) {
                Ok(u) => u,
                Err(_) => {
                    checks.push(error_check("sampling", l, phi, f64::NAN));
                    continue;
                }
            };
            let per_point: Vec<Vec<Check>> = s
                .gamma0_db
                .par_iter()
                .map(|&g0| point_checks(cfg, l, phi, g0, &unit))
                .collect();
            checks.extend(per_point.into_iter().flatten());
        }
    }

    let (l, phi, g0) = (s.branches[0], s.phi[0], s.gamma0_db[0]);
    let repeat = channel(cfg, l, phi, g0).and_then(|ch| {
        let a = estimate_outage(&ch, s.threshold_db, &sim)?;
        let b = estimate_outage(&ch, s.threshold_db, &sim)?;
        Ok((a, b))
    });
    checks.push(match repeat {
        Ok((a, b)) => Check {
            name: "seed_reproducibility".into(),
            l,
            phi,
            g0,
            value: a.value,
            reference: b.value,
            ci: None,
            status: if a == b { "PASS" } else { "FAIL" },
        },
        Err(_) => error_check("seed_reproducibility", l, phi, g0),
    });

    let passed = checks.iter().all(|c| c.status != "FAIL");
    let rows: Vec<Vec<String>> = checks.iter().map(Check::row).collect();
    let summary = format!(
        "# checks = {}, failed = {}\n",
        checks.len(),
        checks.iter().filter(|c| c.status == "FAIL").count()
    );
    let comments = format!("# command = validate\n{}{summary}", cfg.comment_lines());
    Ok((document(&comments, &VALIDATE_HEADER, &rows)?, passed))
}

/// Direct evaluation of the `foxh` section.
pub fn foxh(cfg: &Config) -> Result<String> {
    let spec = cfg.foxh_spec()?;
    let ctl = crate::special::QuadratureControl {
        rel_tol: cfg.sweep.tolerance,
        ..Default::default()
    };
    let r = fox_h_multivariate(&spec, &ctl)?;
    let mut header: Vec<String> = (1..=spec.dim()).map(|i| format!("z{i}")).collect();
    header.extend(["value", "abs_error", "evaluations", "refinements", "converged"].map(String::from));
    let mut row: Vec<String> = spec.args().iter().map(|&z| fmt(z)).collect();
    row.extend([
        fmt(r.value),
        fmt(r.abs_error),
        r.evaluations.to_string(),
        r.refinements.to_string(),
        r.converged.to_string(),
    ]);
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    document(&format!("# command = foxh\n{}", cfg.comment_lines()), &h, &[row])
}
