//! Flat dotted-key configuration.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `link.frequency_ghz` | 275 | carrier frequency |
//! | `link.distance_m` | 50 | link distance |
//! | `link.gain_tx_dbi`, `link.gain_rx_dbi` | 50 | antenna gains |
//! | `link.absorption_per_m` | 1.6e-3 | molecular absorption coefficient |
//! | `link.tx_power_dbm` | 0 | transmit power |
//! | `link.noise_dbm` | -94.2 | noise power |
//! | `link.temperature_k`, `link.humidity`, `link.pressure_pa` | 296, 0.5, 101325 | recorded only |
//! | `link.gamma0_db` | from the budget | average SNR scale, overrides the budget |
//! | `ftr.k`, `ftr.m`, `ftr.delta` | 10, 2, 0.5 | fading parameters |
//! | `pointing.phi`, `pointing.s0` | 2.5, 0.054 | pointing parameters |
//! | `pointing.beam_width_m`, `pointing.jitter_m` | unset | when both are set, `phi` and `s0` are derived |
//! | `pointing.aperture_m` | 0.1 | aperture radius used for the derivation |
//! | `sweep.metric` | outage | `outage`, `ber` or `capacity` |
//! | `sweep.mode` | exact | `exact`, `asymptotic`, `mc` or `all` |
//! | `sweep.gamma0_db` | `[link γ₀]` | γ₀ grid (dB), increasing |
//! | `sweep.branches` | `[1]` | MRC branch counts, increasing |
//! | `sweep.phi` | `[pointing.phi]` | φ grid, increasing |
//! | `sweep.threshold_db` | 4 | outage threshold |
//! | `sweep.modulation` | bpsk | `bpsk`, `bfsk`, `dbpsk` or `ncfsk` |
//! | `sweep.epsilon` | 1e-6 | capacity regularization, relative to the mean SNR |
//! | `sweep.samples`, `sweep.seed` | 1000000, 1 | Monte Carlo size and seed |
//! | `sweep.tolerance` | 1e-3 | relative tolerance of deterministic checks |
//! | `foxh.z` | unset | arguments of the `foxh` command, one per variable |
//! | `foxh.var<N>.top`, `foxh.var<N>.bottom` | unset | `[[a, A], …]` and `[[b, B], …]` of variable N (1-based) |
//! | `foxh.var<N>.n`, `foxh.var<N>.m` | unset | numbers of `Γ(1−a+As)` and `Γ(b−Bs)` factors |
//! | `foxh.coupling_top`, `foxh.coupling_bottom` | `[]` | `[[c, w₁, …, w_N], …]` for `Γ(c + Σw s)` |
//!
//! Unknown keys are rejected so typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use toml::Value;

use crate::channel::{derive_pointing, FtrParams, LinkBudget, PointingParams};
use crate::error::{Error, Result};
use crate::singlelink::{ModulationSpec, SingleLinkChannel};
use crate::special::{FoxHSpec, GammaFactorGroup, OuterFactor};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db};

/// Reference setup shipped with the crate.
pub const REFERENCE_CONFIG: &str = include_str!("../../config/reference.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Outage,
    Ber,
    Capacity,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Ber => "ber",
            Metric::Capacity => "capacity",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "outage" => Ok(Metric::Outage),
            "ber" => Ok(Metric::Ber),
            "capacity" => Ok(Metric::Capacity),
            _ => Err(Error::Config(format!("unknown metric '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Asymptotic,
    Mc,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Asymptotic => "asymptotic",
            Mode::Mc => "mc",
        }
    }

    /// `exact`, `asymptotic`, `mc`, `all`, or a comma-separated list.
    pub fn parse_set(s: &str) -> Result<Vec<Mode>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim) {
            let add: &[Mode] = match part {
                "exact" => &[Mode::Exact],
                "asymptotic" => &[Mode::Asymptotic],
                "mc" => &[Mode::Mc],
                "all" => &[Mode::Exact, Mode::Asymptotic, Mode::Mc],
                _ => return Err(Error::Config(format!("unknown mode '{part}'"))),
            };
            for m in add {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub frequency_ghz: f64,
    pub distance_m: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
    pub absorption_per_m: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub temperature_k: f64,
    pub humidity: f64,
    pub pressure_pa: f64,
    pub gamma0_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointingConfig {
    pub phi: f64,
    pub s0: f64,
    pub beam_width_m: Option<f64>,
    pub jitter_m: Option<f64>,
    pub aperture_m: f64,
}

/// Grid and run settings shared by `sweep`, `mc` and `validate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub metric: Metric,
    pub modes: Vec<Mode>,
    pub gamma0_db: Vec<f64>,
    pub branches: Vec<usize>,
    pub phi: Vec<f64>,
    pub threshold_db: f64,
    pub modulation: String,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoxhVariable {
    pub top: Vec<(f64, f64)>,
    pub n: usize,
    pub bottom: Vec<(f64, f64)>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoxhConfig {
    pub z: Vec<f64>,
    pub vars: Vec<FoxhVariable>,
    pub coupling_top: Vec<Vec<f64>>,
    pub coupling_bottom: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub link: LinkConfig,
    pub ftr: (f64, f64, f64),
    pub pointing: PointingConfig,
    pub sweep: SweepSpec,
    pub foxh: Option<FoxhConfig>,
}

type Flat = BTreeMap<String, Value>;

fn flatten(prefix: &str, table: &toml::Table, out: &mut Flat) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("{key}: expected a number, got {v}"))),
    }
}

fn as_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Array(a) => a.iter().map(|x| as_f64(key, x)).collect(),
        other => Ok(vec![as_f64(key, other)?]),
    }
}

fn as_rows(key: &str, v: &Value) -> Result<Vec<Vec<f64>>> {
    match v {
        Value::Array(a) => a.iter().map(|row| as_list(key, row)).collect(),
        _ => Err(Error::Config(format!("{key}: expected an array of arrays"))),
    }
}

fn as_pairs(key: &str, v: &Value) -> Result<Vec<(f64, f64)>> {
    as_rows(key, v)?
        .into_iter()
        .map(|r| match r.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::Config(format!("{key}: expected [value, scale] pairs"))),
        })
        .collect()
}

fn as_count(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Float(x) if *x >= 0.0 && x.fract() == 0.0 && *x < 9.0e15 => Ok(*x as u64),
        _ => Err(Error::Config(format!("{key}: expected a non-negative integer, got {v}"))),
    }
}

fn as_str(key: &str, v: &Value) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Config(format!("{key}: expected a string, got {v}")))
}

struct Reader {
    flat: Flat,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.flat.remove(key)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        self.take(key).map_or(Ok(default), |v| as_f64(key, &v))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| as_f64(key, &v)).transpose()
    }
}

fn increasing(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{key}: grid is empty")));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("{key}: grid must be finite and strictly increasing")));
    }
    Ok(())
}

impl Config {
    pub fn reference() -> Self {
        Config::from_toml_str(REFERENCE_CONFIG).expect("shipped reference config parses")
    }

    /// Parse a config document; absent keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        let mut flat = Flat::new();
        flatten("", &table, &mut flat);
        let mut r = Reader { flat };

        let link = LinkConfig {
            frequency_ghz: r.f64_or("link.frequency_ghz", 275.0)?,
            distance_m: r.f64_or("link.distance_m", 50.0)?,
            gain_tx_dbi: r.f64_or("link.gain_tx_dbi", 50.0)?,
            gain_rx_dbi: r.f64_or("link.gain_rx_dbi", 50.0)?,
            absorption_per_m: r.f64_or("link.absorption_per_m", crate::channel::ABSORPTION_275GHZ_PER_M)?,
            tx_power_dbm: r.f64_or("link.tx_power_dbm", 0.0)?,
            noise_dbm: r.f64_or("link.noise_dbm", -94.2)?,
            temperature_k: r.f64_or("link.temperature_k", 296.0)?,
            humidity: r.f64_or("link.humidity", 0.5)?,
            pressure_pa: r.f64_or("link.pressure_pa", 101_325.0)?,
            gamma0_db: r.opt_f64("link.gamma0_db")?,
        };
        let ftr = (r.f64_or("ftr.k", 10.0)?, r.f64_or("ftr.m", 2.0)?, r.f64_or("ftr.delta", 0.5)?);
        let pointing = PointingConfig {
            phi: r.f64_or("pointing.phi", 2.5)?,
            s0: r.f64_or("pointing.s0", 0.054)?,
            beam_width_m: r.opt_f64("pointing.beam_width_m")?,
            jitter_m: r.opt_f64("pointing.jitter_m")?,
            aperture_m: r.f64_or("pointing.aperture_m", 0.1)?,
        };

        let metric = match r.take("sweep.metric") {
            Some(v) => Metric::parse(&as_str("sweep.metric", &v)?)?,
            None => Metric::Outage,
        };
        let modes = match r.take("sweep.mode") {
            Some(v) => Mode::parse_set(&as_str("sweep.mode", &v)?)?,
            None => vec![Mode::Exact],
        };
        let gamma0_db = r.take("sweep.gamma0_db").map(|v| as_list("sweep.gamma0_db", &v)).transpose()?;
        let branches = match r.take("sweep.branches") {
            Some(Value::Array(a)) => a.iter().map(|v| as_count("sweep.branches", v).map(|x| x as usize)).collect::<Result<Vec<_>>>()?,
            Some(v) => vec![as_count("sweep.branches", &v)? as usize],
            None => vec![1],
        };
        let phi = r.take("sweep.phi").map(|v| as_list("sweep.phi", &v)).transpose()?;
        let threshold_db = r.f64_or("sweep.threshold_db", 4.0)?;
        let modulation = match r.take("sweep.modulation") {
            Some(v) => as_str("sweep.modulation", &v)?,
            None => "bpsk".into(),
        };
        let epsilon = r.f64_or("sweep.epsilon", crate::mrc::DEFAULT_EPSILON)?;
        let samples = r.take("sweep.samples").map(|v| as_count("sweep.samples", &v)).transpose()?.unwrap_or(1_000_000) as usize;
        let seed = r.take("sweep.seed").map(|v| as_count("sweep.seed", &v)).transpose()?.unwrap_or(1);
        let tolerance = r.f64_or("sweep.tolerance", 1e-3)?;

        let foxh = Self::read_foxh(&mut r)?;

        if let Some(k) = r.flat.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }

        let mut cfg = Config {
            link,
            ftr,
            pointing,
            sweep: SweepSpec {
                metric,
                modes,
                gamma0_db: Vec::new(),
                branches,
                phi: Vec::new(),
                threshold_db,
                modulation,
                epsilon,
                samples,
                seed,
                tolerance,
            },
            foxh,
        };
        let base = cfg.pointing_params()?;
        cfg.pointing.phi = base.phi();
        cfg.pointing.s0 = base.s0();
        cfg.sweep.gamma0_db = match gamma0_db {
            Some(g) => g,
            None => vec![cfg.base_gamma0_db()?],
        };
        cfg.sweep.phi = phi.unwrap_or_else(|| vec![cfg.pointing.phi]);
        cfg.validate()?;
        Ok(cfg)
    }

    fn read_foxh(r: &mut Reader) -> Result<Option<FoxhConfig>> {
        let Some(z) = r.take("foxh.z") else {
            if let Some(k) = r.flat.keys().find(|k| k.starts_with("foxh.")) {
                return Err(Error::Config(format!("'{k}' needs foxh.z")));
            }
            return Ok(None);
        };
        let z = as_list("foxh.z", &z)?;
        let mut vars = Vec::with_capacity(z.len());
        for i in 1..=z.len() {
            let key = |s: &str| format!("foxh.var{i}.{s}");
            let top = r.take(&key("top")).map(|v| as_pairs(&key("top"), &v)).transpose()?.unwrap_or_default();
            let bottom = r.take(&key("bottom")).map(|v| as_pairs(&key("bottom"), &v)).transpose()?.unwrap_or_default();
            let n = r.take(&key("n")).map(|v| as_count(&key("n"), &v)).transpose()?.unwrap_or(0) as usize;
            let m = r.take(&key("m")).map(|v| as_count(&key("m"), &v)).transpose()?.unwrap_or(0) as usize;
            vars.push(FoxhVariable { top, n, bottom, m });
        }
        let coupling_top = r.take("foxh.coupling_top").map(|v| as_rows("foxh.coupling_top", &v)).transpose()?.unwrap_or_default();
        let coupling_bottom = r
            .take("foxh.coupling_bottom")
            .map(|v| as_rows("foxh.coupling_bottom", &v))
            .transpose()?
            .unwrap_or_default();
        Ok(Some(FoxhConfig {
            z,
            vars,
            coupling_top,
            coupling_bottom,
        }))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        increasing("sweep.gamma0_db", &s.gamma0_db)?;
        increasing("sweep.phi", &s.phi)?;
        let b: Vec<f64> = s.branches.iter().map(|&x| x as f64).collect();
        increasing("sweep.branches", &b)?;
        if s.branches[0] == 0 || *s.branches.last().unwrap() > crate::mrc::MAX_BRANCHES {
            return Err(Error::Config(format!(
                "sweep.branches must lie in 1..={}",
                crate::mrc::MAX_BRANCHES
            )));
        }
        if s.modes.is_empty() {
            return Err(Error::Config("sweep.mode selects no mode".into()));
        }
        if ModulationSpec::by_name(&s.modulation).is_none() {
            return Err(Error::Config(format!("unknown modulation '{}'", s.modulation)));
        }
        if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
            return Err(Error::Config("sweep.epsilon must lie in (0, 1)".into()));
        }
        if !(s.tolerance > 0.0 && s.tolerance < 1.0) {
            return Err(Error::Config("sweep.tolerance must lie in (0, 1)".into()));
        }
        if s.samples < crate::montecarlo::MIN_SAMPLES {
            return Err(Error::Config(format!(
                "sweep.samples must be at least {}",
                crate::montecarlo::MIN_SAMPLES
            )));
        }
        self.ftr_params()?;
        self.link_budget()?;
        for &phi in &s.phi {
            PointingParams::from_phi_s0(phi, self.pointing.s0)?;
        }
        Ok(())
    }

    pub fn ftr_params(&self) -> Result<FtrParams> {
        FtrParams::new(self.ftr.0, self.ftr.1, self.ftr.2)
    }

    pub fn pointing_params(&self) -> Result<PointingParams> {
        let p = &self.pointing;
        match (p.beam_width_m, p.jitter_m) {
            (Some(w), Some(j)) => derive_pointing(w, j, p.aperture_m),
            (None, None) => PointingParams::from_phi_s0(p.phi, p.s0),
            _ => Err(Error::Config(
                "pointing.beam_width_m and pointing.jitter_m must be given together".into(),
            )),
        }
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        let l = &self.link;
        let mut b = LinkBudget::new(
            l.frequency_ghz * 1e9,
            l.distance_m,
            db_to_linear(l.gain_tx_dbi),
            db_to_linear(l.gain_rx_dbi),
            l.absorption_per_m,
            dbm_to_watts(l.tx_power_dbm),
            dbm_to_watts(l.noise_dbm),
        )?;
        b.environment.temperature_k = l.temperature_k;
        b.environment.relative_humidity = l.humidity;
        b.environment.pressure_pa = l.pressure_pa;
        Ok(b)
    }

    /// `link.gamma0_db` when set, otherwise the link budget's value.
    pub fn base_gamma0_db(&self) -> Result<f64> {
        match self.link.gamma0_db {
            Some(g) => Ok(g),
            None => Ok(linear_to_db(self.link_budget()?.gamma0())),
        }
    }

    pub fn modulation(&self) -> ModulationSpec {
        ModulationSpec::by_name(&self.sweep.modulation).expect("validated")
    }

    /// Single branch at the given φ and γ₀ (dB).
    pub fn branch(&self, phi: f64, gamma0_db: f64) -> Result<SingleLinkChannel> {
        SingleLinkChannel::new(
            self.ftr_params()?,
            PointingParams::from_phi_s0(phi, self.pointing.s0)?,
            gamma0_db,
        )
    }

    /// Fox H parameterization from the `foxh` section.
    pub fn foxh_spec(&self) -> Result<FoxHSpec> {
        let f = self
            .foxh
            .as_ref()
            .ok_or_else(|| Error::Config("the foxh command needs foxh.z and foxh.var<N>.* keys".into()))?;
        let dim = f.z.len();
        let inner = f
            .vars
            .iter()
            .map(|v| GammaFactorGroup::new(&v.top, v.n, &v.bottom, v.m))
            .collect::<Result<Vec<_>>>()?;
        let outer = |rows: &[Vec<f64>], key: &str| -> Result<Vec<OuterFactor>> {
            rows.iter()
                .map(|r| {
                    if r.len() != dim + 1 {
                        return Err(Error::Config(format!("{key}: rows need {} entries", dim + 1)));
                    }
                    Ok(OuterFactor::new(r[0], r[1..].to_vec()))
                })
                .collect()
        };
        FoxHSpec::new(
            f.z.clone(),
            inner,
            outer(&f.coupling_top, "foxh.coupling_top")?,
            outer(&f.coupling_bottom, "foxh.coupling_bottom")?,
            vec![None; dim],
        )
    }

    /// `# key = value` lines describing the resolved configuration.
    pub fn comment_lines(&self) -> String {
        let l = &self.link;
        let p = &self.pointing;
        let s = &self.sweep;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let opt = |v: Option<f64>| v.map_or("unset".to_string(), |x| format!("{x}"));
        let mut rows: Vec<(&str, String)> = vec![
            ("link.frequency_ghz", format!("{}", l.frequency_ghz)),
            ("link.distance_m", format!("{}", l.distance_m)),
            ("link.gain_tx_dbi", format!("{}", l.gain_tx_dbi)),
            ("link.gain_rx_dbi", format!("{}", l.gain_rx_dbi)),
            ("link.absorption_per_m", format!("{}", l.absorption_per_m)),
            ("link.tx_power_dbm", format!("{}", l.tx_power_dbm)),
            ("link.noise_dbm", format!("{}", l.noise_dbm)),
            ("link.temperature_k", format!("{}", l.temperature_k)),
            ("link.humidity", format!("{}", l.humidity)),
            ("link.pressure_pa", format!("{}", l.pressure_pa)),
            ("link.gamma0_db", opt(l.gamma0_db)),
            ("ftr.k", format!("{}", self.ftr.0)),
            ("ftr.m", format!("{}", self.ftr.1)),
            ("ftr.delta", format!("{}", self.ftr.2)),
            ("pointing.phi", format!("{}", p.phi)),
            ("pointing.s0", format!("{}", p.s0)),
            ("pointing.beam_width_m", opt(p.beam_width_m)),
            ("pointing.jitter_m", opt(p.jitter_m)),
            ("pointing.aperture_m", format!("{}", p.aperture_m)),
            ("sweep.metric", s.metric.name().to_string()),
            (
                "sweep.mode",
                s.modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
            ),
            ("sweep.gamma0_db", format!("[{}]", list(&s.gamma0_db))),
            (
                "sweep.branches",
                format!("[{}]", s.branches.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")),
            ),
            ("sweep.phi", format!("[{}]", list(&s.phi))),
            ("sweep.threshold_db", format!("{}", s.threshold_db)),
            ("sweep.modulation", s.modulation.clone()),
            ("sweep.epsilon", format!("{:e}", s.epsilon)),
            ("sweep.samples", s.samples.to_string()),
            ("sweep.seed", s.seed.to_string()),
            ("sweep.tolerance", format!("{:e}", s.tolerance)),
        ];
        if let Some(f) = &self.foxh {
            rows.push(("foxh.z", format!("[{}]", list(&f.z))));
        }
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }
}
