//! Per-window moments: frequency-based moments of value, volume and price,
//! and the market-based price moments built from them.
//!
//! The market-based `n`-th price moment is the ratio of the `n`-th value moment
//! to the `n`-th volume moment, `p(t;n) = C(t;n) / U(t;n)`. It coincides with
//! the plain mean of `p^n` only when every volume in the window is equal. For
//! `n = 1` it is the VWAP.
//!
//! All sums run in tick order with compensated accumulation. Inputs that are
//! not in tick order are sorted first, so any permutation of the same members
//! gives the same bits.

use std::borrow::Cow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::{ipow, pair_moments, MeanAcc};
use crate::error::{Error, Result};
use crate::tape::{TradeRecord, TradeTape};
use crate::windows::{members, Window};

/// Highest moment order accepted by the free functions.
pub const DEFAULT_ORDER_CAP: u32 = 8;

/// Default number of orders in a [`MomentReport`].
pub const DEFAULT_MAX_ORDER: u32 = 4;

/// Per-trade series a moment is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Series {
    Value,
    Volume,
    Price,
}

impl Series {
    #[inline]
    pub fn of(self, r: &TradeRecord) -> f64 {
        match self {
            Series::Value => r.value(),
            Series::Volume => r.volume(),
            Series::Price => r.price(),
        }
    }
}

fn order_key(r: &TradeRecord) -> (i64, u64, u64) {
    (r.tick(), r.value().to_bits(), r.volume().to_bits())
}

/// Members in canonical order; borrows when already sorted.
pub(crate) fn canonical(members: &[TradeRecord]) -> Cow<'_, [TradeRecord]> {
    if members.windows(2).all(|w| order_key(&w[0]) <= order_key(&w[1])) {
        Cow::Borrowed(members)
    } else {
        let mut v = members.to_vec();
        v.sort_by_key(order_key);
        Cow::Owned(v)
    }
}

fn check_order(n: u32, cap: u32) -> Result<()> {
    if n == 0 || n > cap {
        Err(Error::param(format!("moment order must be in 1..={cap}, got {n}")))
    } else {
        Ok(())
    }
}

fn nonempty(members: &[TradeRecord]) -> Result<()> {
    if members.is_empty() {
        Err(Error::no_data("window has no trades"))
    } else {
        Ok(())
    }
}

fn mean_pow(members: &[TradeRecord], series: Series, n: u32) -> f64 {
    let mut acc = MeanAcc::new();
    for r in members {
        acc.push(ipow(series.of(r), n));
    }
    acc.mean().expect("caller checked nonempty")
}

/// Mean of the `n`-th powers of `series` over the members, each trade weighted equally.
pub fn freq_moment(members: &[TradeRecord], series: Series, n: u32) -> Result<f64> {
    check_order(n, DEFAULT_ORDER_CAP)?;
    nonempty(members)?;
    Ok(mean_pow(&canonical(members), series, n))
}

fn market_moment_unchecked(members: &[TradeRecord], n: u32) -> f64 {
    mean_pow(members, Series::Value, n) / mean_pow(members, Series::Volume, n)
}

/// `C(t;n) / U(t;n)`.
pub fn market_price_moment(members: &[TradeRecord], n: u32) -> Result<f64> {
    check_order(n, DEFAULT_ORDER_CAP)?;
    nonempty(members)?;
    Ok(market_moment_unchecked(&canonical(members), n))
}

/// Total value over total volume. Computed as the first market-based moment.
pub fn vwap(members: &[TradeRecord]) -> Result<f64> {
    market_price_moment(members, 1)
}

/// Same arithmetic as the lag-0 pair statistics, so the two agree bit for bit.
fn volatility_of(members: &[TradeRecord]) -> f64 {
    pair_moments(|| members.iter().map(|r| [r.value(), r.volume(), r.value(), r.volume()]))
        .expect("caller checked nonempty")
        .cov_p
}

/// `C(t;2)/U(t;2) - C(t;1)^2 / U(t;1)^2`. Not guaranteed to be nonnegative.
///
/// Evaluated from per-trade deviations rather than as a difference of the
/// two moments, so it agrees with `p(t;2) - p(t;1)^2` from the reported
/// moments to rounding, not bitwise.
pub fn market_volatility(members: &[TradeRecord]) -> Result<f64> {
    nonempty(members)?;
    Ok(volatility_of(&canonical(members)))
}

/// Characteristic function truncated after order `k`:
/// `1 + sum_{n=1..k} (i^n / n!) p(t;n) x^n`.
pub fn char_fn_taylor(members: &[TradeRecord], x: f64, k: u32) -> Result<Complex64> {
    check_order(k, DEFAULT_ORDER_CAP)?;
    nonempty(members)?;
    let m = canonical(members);
    let moments: Vec<f64> = (1..=k).map(|n| market_moment_unchecked(&m, n)).collect();
    Ok(taylor_sum(&moments, x))
}

/// `moments[n-1]` holds `p(t;n)`.
fn taylor_sum(moments: &[f64], x: f64) -> Complex64 {
    let mut re = 1.0;
    let mut im = 0.0;
    let mut coef = 1.0;
    for (i, p) in moments.iter().enumerate() {
        let n = i + 1;
        coef *= x / n as f64;
        let term = coef * p;
        match n % 4 {
            1 => im += term,
            2 => re -= term,
            3 => im -= term,
            _ => re += term,
        }
    }
    Complex64::new(re, im)
}

/// How many orders a report carries, and the ceiling on that number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub max_order: u32,
    pub order_cap: u32,
}

impl Default for MomentConfig {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_MAX_ORDER,
            order_cap: DEFAULT_ORDER_CAP,
        }
    }
}

impl MomentConfig {
    pub fn new(max_order: u32) -> Result<Self> {
        let cfg = Self {
            max_order,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order < 2 {
            // volatility needs the second moments
            return Err(Error::param(format!("max order must be >= 2, got {}", self.max_order)));
        }
        check_order(self.max_order, self.order_cap)
    }
}

/// Moments of one window. Arrays are indexed from `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub center_tick: i64,
    pub effective_count: usize,
    pub vwap: f64,
    pub market_volatility: f64,
    pub volatility_negative: bool,
    #[serde(rename = "freq_price")]
    pub freq_price_moments: Vec<f64>,
    #[serde(rename = "value")]
    pub value_moments: Vec<f64>,
    #[serde(rename = "volume")]
    pub volume_moments: Vec<f64>,
    #[serde(rename = "market_price")]
    pub market_price_moments: Vec<f64>,
}

impl MomentReport {
    /// Single pass over the members for all orders `1..=cfg.max_order`.
    pub fn compute(center_tick: i64, members: &[TradeRecord], cfg: &MomentConfig) -> Result<Self> {
        cfg.validate()?;
        nonempty(members)?;
        let m = canonical(members);
        let k = cfg.max_order as usize;
        let mut acc = vec![[MeanAcc::new(); 3]; k];
        for r in m.iter() {
            let (c, u, p) = (r.value(), r.volume(), r.price());
            for (i, a) in acc.iter_mut().enumerate() {
                let n = i as u32 + 1;
                a[0].push(ipow(p, n));
                a[1].push(ipow(c, n));
                a[2].push(ipow(u, n));
            }
        }
        let mean = |a: &MeanAcc| a.mean().expect("nonempty");
        let freq_price_moments: Vec<f64> = acc.iter().map(|a| mean(&a[0])).collect();
        let value_moments: Vec<f64> = acc.iter().map(|a| mean(&a[1])).collect();
        let volume_moments: Vec<f64> = acc.iter().map(|a| mean(&a[2])).collect();
        let market_price_moments: Vec<f64> =
            value_moments.iter().zip(&volume_moments).map(|(c, u)| c / u).collect();
        let market_volatility = volatility_of(&m);
        Ok(Self {
            center_tick,
            effective_count: m.len(),
            vwap: market_price_moments[0],
            market_volatility,
            volatility_negative: market_volatility < 0.0,
            freq_price_moments,
            value_moments,
            volume_moments,
            market_price_moments,
        })
    }

    pub fn for_window(window: &Window, tape: &TradeTape, cfg: &MomentConfig) -> Result<Self> {
        Self::compute(window.center_tick(), members(window, tape), cfg)
    }

    /// Truncated characteristic function from the stored market-based moments.
    pub fn char_fn(&self, x: f64, k: u32) -> Result<Complex64> {
        if k == 0 || k as usize > self.market_price_moments.len() {
            return Err(Error::param(format!(
                "truncation order must be in 1..={}, got {k}",
                self.market_price_moments.len()
            )));
        }
        Ok(taylor_sum(&self.market_price_moments[..k as usize], x))
    }

    /// `freq_price[n] - market_price[n]` for each order.
    pub fn divergence(&self) -> Vec<f64> {
        self.freq_price_moments
            .iter()
            .zip(&self.market_price_moments)
            .map(|(f, m)| f - m)
            .collect()
    }
}
