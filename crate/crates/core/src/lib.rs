//! Market-based price statistics from trade value and volume tapes.
//!
//! A trade tape records, at each tick of a uniform time grid, the total value
//! `C` and total volume `U` traded. Price is derived, `p = C / U`. This crate
//! averages value and volume with ordinary equal-weight means over moving
//! windows and builds every price statistic from those averages:
//!
//! * the `n`-th price moment `p(t;n) = C(t;n) / U(t;n)`, whose first order is
//!   the VWAP ([`moments`]),
//! * the volatility `p(t;2) - p(t;1)^2`, which can come out negative,
//! * the price autocorrelation assembled from lagged value and volume moments,
//!   with correlation-scale detection and n-point moments ([`lagstats`]).
//!
//! The conventional frequency-based price moments are computed alongside for
//! comparison.
//!
//! Modules:
//!
//! * [`tape`]: records, CSV ingestion, bucketing onto the grid
//! * [`windows`]: window planning and membership
//! * [`moments`]: per-window moments, VWAP, volatility, characteristic function
//! * [`lagstats`]: lagged moments, autocorrelations, scales, n-point moments
//! * [`synth`]: seeded synthetic tapes with known correlation scales
//! * [`cli`]: the batch runs behind the `mbstat` binary
//!
//! See `examples/` for one runnable program per capability.

mod accum;
pub mod cli;
pub mod error;
pub mod lagstats;
pub mod moments;
pub mod synth;
pub mod tape;
pub mod windows;

pub use error::{Error, Result};
pub use lagstats::{
    acf, acf_curve, correlation_scale, lag_moment2, lag_pairs, market_price_lag_moment,
    market_price_npoint, npoint_moment, regime_acf, AcfCurve, AcfOptions, AcfPoint, Aggregate,
    LagPairSet, LagStats, Regime, Scales,
};
pub use moments::{
    char_fn_taylor, freq_moment, market_price_moment, market_volatility, vwap, MomentConfig,
    MomentReport, Series,
};
pub use synth::{gen_tape, theoretical_log_acf, SynthMode, SynthParams};
pub use tape::{bucket, parse_csv, price_of, CsvFormat, TradeRecord, TradeTape};
pub use windows::{members, plan_windows, Window, WindowSpec};
