//! Deterministic synthetic tapes built from two independent log-level AR(1)
//! processes.
//!
//! With lag-1 coefficient `phi = exp(-1 / persistence)` and innovation scale
//! `sigma * sqrt(1 - phi^2)`, each log series is stationary with standard
//! deviation `sigma` and autocovariance `sigma^2 exp(-lag / persistence)`.
//! Levels are `exp` of the log series, so prices and volumes stay positive.
//!
//! * `pv` mode: price and volume are the two processes, `value = price * volume`.
//!   Price and volume are independent by construction.
//! * `vv` mode: value and volume are the two processes. Value and volume
//!   scales are decoupled, at the cost of price and volume being correlated.
//!
//! # Random numbers
//!
//! The generator is xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). A uniform draw is
//! `(next_u64() >> 11) * 2^-53`. Normals come from Box-Muller on consecutive
//! uniform pairs `(u1, u2)`: `r = sqrt(-2 ln(1 - u1))`, giving `r cos(2 pi u2)`
//! then `r sin(2 pi u2)`. At each tick the first process consumes one normal,
//! then the second. Seed 1 yields the raw words `0xcfc5d07f6f03c29b`,
//! `0xbf424132963fe08d`, `0x19a37d5757aaf520` (see the tests).

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tape::{TradeRecord, TradeTape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SynthMode {
    /// Price and volume are the generated processes.
    #[default]
    #[serde(rename = "pv")]
    PriceVolume,
    /// Value and volume are the generated processes.
    #[serde(rename = "vv")]
    ValueVolume,
}

impl std::str::FromStr for SynthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pv" => Ok(SynthMode::PriceVolume),
            "vv" => Ok(SynthMode::ValueVolume),
            other => Err(Error::param(format!("unknown synth mode {other:?}, expected pv or vv"))),
        }
    }
}

/// Process `a` is price (pv) or value (vv); process `b` is volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub mode: SynthMode,
    pub length_ticks: usize,
    pub persistence_a_ticks: f64,
    pub persistence_b_ticks: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            mode: SynthMode::PriceVolume,
            length_ticks: 10_000,
            persistence_a_ticks: 10.0,
            persistence_b_ticks: 40.0,
            sigma_a: 0.1,
            sigma_b: 0.1,
            mean_a: 100f64.ln(),
            mean_b: 0.0,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.length_ticks < 2 {
            return Err(Error::param(format!("length must be >= 2, got {}", self.length_ticks)));
        }
        for (name, v) in [("tau-a", self.persistence_a_ticks), ("tau-b", self.persistence_b_ticks)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("sigma-a", self.sigma_a), ("sigma-b", self.sigma_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("mean-a", self.mean_a), ("mean-b", self.mean_b)] {
            if !v.is_finite() {
                return Err(Error::param(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Uniform and standard-normal draws over xoshiro256++.
pub(crate) struct NormalSource {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl NormalSource {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub(crate) fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub(crate) fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

struct LogAr1 {
    mean: f64,
    phi: f64,
    sigma: f64,
    innovation: f64,
    state: Option<f64>,
}

impl LogAr1 {
    fn new(mean: f64, persistence: f64, sigma: f64) -> Self {
        let phi = (-1.0 / persistence).exp();
        Self {
            mean,
            phi,
            sigma,
            innovation: sigma * (1.0 - phi * phi).sqrt(),
            state: None,
        }
    }

    fn step(&mut self, z: f64) -> f64 {
        let x = match self.state {
            // stationary start
            None => self.mean + self.sigma * z,
            Some(prev) => self.mean + self.phi * (prev - self.mean) + self.innovation * z,
        };
        self.state = Some(x);
        x
    }
}

/// Generates a dense tape on ticks `0..length_ticks` with `epsilon = 1`.
pub fn gen_tape(params: &SynthParams) -> Result<TradeTape> {
    params.validate()?;
    let mut src = NormalSource::new(params.seed);
    let mut a = LogAr1::new(params.mean_a, params.persistence_a_ticks, params.sigma_a);
    let mut b = LogAr1::new(params.mean_b, params.persistence_b_ticks, params.sigma_b);
    let mut records = Vec::with_capacity(params.length_ticks);
    for tick in 0..params.length_ticks as i64 {
        let level_a = a.step(src.normal()).exp();
        let level_b = b.step(src.normal()).exp();
        let record = match params.mode {
            SynthMode::PriceVolume => TradeRecord::from_price(tick, level_a, level_b),
            SynthMode::ValueVolume => TradeRecord::new(tick, level_a, level_b),
        }?;
        records.push(record);
    }
    TradeTape::new(1.0, records)
}

/// Autocovariance of a stationary log-level AR(1): `sigma^2 exp(-|lag| / persistence)`.
pub fn theoretical_log_acf(persistence_ticks: f64, sigma: f64, lag_ticks: i64) -> f64 {
    sigma * sigma * (-(lag_ticks.abs() as f64) / persistence_ticks).exp()
}

/// Autocorrelation of the level `exp(x)` when `x` is the AR(1) above:
/// `(exp(sigma^2 rho) - 1) / (exp(sigma^2) - 1)` with `rho = exp(-|lag| / persistence)`.
pub fn theoretical_level_autocorrelation(persistence_ticks: f64, sigma: f64, lag_ticks: i64) -> f64 {
    let s2 = sigma * sigma;
    if s2 == 0.0 {
        return 0.0;
    }
    let rho = (-(lag_ticks.abs() as f64) / persistence_ticks).exp();
    (s2 * rho).exp_m1() / s2.exp_m1()
}
