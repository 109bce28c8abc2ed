use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts, SPEED_OF_LIGHT};

/// Approximate molecular absorption coefficient (1/m) for the 275 GHz window
/// at 296 K, 101325 Pa and 50 % relative humidity. A fixed configuration
/// value, not the output of an absorption model.
pub const ABSORPTION_275GHZ_PER_M: f64 = 1.6e-3;

/// Environmental conditions recorded alongside a link budget. They are not
/// used in any computation; the absorption coefficient is the operative input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub temperature_k: f64,
    pub relative_humidity: f64,
    pub pressure_pa: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            temperature_k: 296.0,
            relative_humidity: 0.5,
            pressure_pa: 101_325.0,
        }
    }
}

/// Deterministic inputs of the path gain and the average SNR scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    frequency_hz: f64,
    distance_m: f64,
    gain_tx: f64,
    gain_rx: f64,
    absorption_per_m: f64,
    tx_power_w: f64,
    noise_power_w: f64,
    pub environment: Environment,
}

impl LinkBudget {
    pub fn new(
        frequency_hz: f64,
        distance_m: f64,
        gain_tx: f64,
        gain_rx: f64,
        absorption_per_m: f64,
        tx_power_w: f64,
        noise_power_w: f64,
    ) -> Result<Self> {
        let positive = [
            ("frequency", frequency_hz),
            ("distance", distance_m),
            ("transmit power", tx_power_w),
            ("noise power", noise_power_w),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(gain_tx >= 1.0) || !(gain_rx >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "antenna gains must be >= 1 (linear), got {gain_tx}, {gain_rx}"
            )));
        }
        if !(absorption_per_m >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "absorption coefficient must be >= 0, got {absorption_per_m}"
            )));
        }
        Ok(LinkBudget {
            frequency_hz,
            distance_m,
            gain_tx,
            gain_rx,
            absorption_per_m,
            tx_power_w,
            noise_power_w,
            environment: Environment::default(),
        })
    }

    /// 50 m at 275 GHz with 50 dBi antennas, −94.2 dBm noise and the fixed
    /// 275 GHz absorption value. Transmit power defaults to 0 dBm.
    pub fn thz_275ghz() -> Self {
        LinkBudget::new(
            275e9,
            50.0,
            db_to_linear(50.0),
            db_to_linear(50.0),
            ABSORPTION_275GHZ_PER_M,
            dbm_to_watts(0.0),
            dbm_to_watts(-94.2),
        )
        .expect("default link budget is valid")
    }

    pub fn with_distance(mut self, d: f64) -> Result<Self> {
        self.distance_m = d;
        self.revalidate()
    }

    pub fn with_absorption(mut self, k: f64) -> Result<Self> {
        self.absorption_per_m = k;
        self.revalidate()
    }

    pub fn with_tx_power(mut self, p: f64) -> Result<Self> {
        self.tx_power_w = p;
        self.revalidate()
    }

    fn revalidate(self) -> Result<Self> {
        let env = self.environment;
        let mut b = LinkBudget::new(
            self.frequency_hz,
            self.distance_m,
            self.gain_tx,
            self.gain_rx,
            self.absorption_per_m,
            self.tx_power_w,
            self.noise_power_w,
        )?;
        b.environment = env;
        Ok(b)
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }
    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }
    pub fn gains(&self) -> (f64, f64) {
        (self.gain_tx, self.gain_rx)
    }
    pub fn absorption_per_m(&self) -> f64 {
        self.absorption_per_m
    }
    pub fn tx_power_w(&self) -> f64 {
        self.tx_power_w
    }
    pub fn noise_power_w(&self) -> f64 {
        self.noise_power_w
    }

    /// Average SNR scale `P·h_l²/σ_w²` (linear).
    pub fn gamma0(&self) -> f64 {
        let h = path_gain(self);
        self.tx_power_w * h * h / self.noise_power_w
    }
}

/// Deterministic path gain: free-space spreading with antenna gains times
/// the molecular absorption loss `exp(−k d / 2)`.
pub fn path_gain(budget: &LinkBudget) -> f64 {
    let spreading = SPEED_OF_LIGHT * (budget.gain_tx * budget.gain_rx).sqrt()
        / (4.0 * PI * budget.frequency_hz * budget.distance_m);
    spreading * (-0.5 * budget.absorption_per_m * budget.distance_m).exp()
}
