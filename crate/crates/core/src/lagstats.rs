//! Lagged second moments, autocorrelations of value, volume and price, the
//! closed-form regime evaluators, correlation-scale detection and n-point
//! moments.
//!
//! For a window centered at `t` and a lag `tau`, each member at tick `t_i` is
//! paired with the record at `t_i + tau`, which may lie outside the window but
//! must exist on the tape. Members without a partner are dropped. Every
//! statistic of the pair set, including the first moments at `t` and at
//! `t + tau`, is averaged over the surviving pairs only, so the products and
//! the means they are compared against always come from the same sample.
//!
//! The price autocorrelation is assembled from value and volume statistics:
//!
//! ```text
//! B_p = C(t,t+tau) / U(t,t+tau) - C(t;1) C(t+tau;1) / (U(t;1) U(t+tau;1))
//! ```
//!
//! At zero lag it reduces, bit for bit, to the market-based volatility of the
//! window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accum::{pair_moments, KahanSum, MeanAcc};
use crate::error::{Error, Result};
use crate::moments::Series;
use crate::tape::{TradeRecord, TradeTape};
use crate::windows::{plan_windows, Window, WindowSpec};

/// Largest number of lags accepted by the n-point moments.
pub const NPOINT_MAX_LAGS: usize = 4;

/// Default relative threshold for [`correlation_scale`].
pub const DEFAULT_SCALE_THRESHOLD: f64 = 0.05;

/// Index pairs `(member, partner)` into the tape's records, in member order.
fn pair_indices<'a>(
    records: &'a [TradeRecord],
    range: std::ops::Range<usize>,
    lag: i64,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    let mut j = match records.get(range.start) {
        Some(first) => {
            let target = first.tick() + lag;
            range.start + records[range.start..].partition_point(|r| r.tick() < target)
        }
        None => records.len(),
    };
    range.filter_map(move |i| {
        let target = records[i].tick() + lag;
        while j < records.len() && records[j].tick() < target {
            j += 1;
        }
        (j < records.len() && records[j].tick() == target).then_some((i, j))
    })
}

/// Members of a window paired with their partners `lag_ticks` later.
#[derive(Debug, Clone, PartialEq)]
pub struct LagPairSet {
    center_tick: i64,
    lag_ticks: i64,
    pairs: Vec<(TradeRecord, TradeRecord)>,
}

impl LagPairSet {
    /// Builds a pair set directly, e.g. from records that are not on a tape.
    pub fn from_pairs(center_tick: i64, lag_ticks: i64, pairs: Vec<(TradeRecord, TradeRecord)>) -> Self {
        Self {
            center_tick,
            lag_ticks,
            pairs,
        }
    }

    pub fn center_tick(&self) -> i64 {
        self.center_tick
    }

    pub fn lag_ticks(&self) -> i64 {
        self.lag_ticks
    }

    pub fn pairs(&self) -> &[(TradeRecord, TradeRecord)] {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }
}

fn check_lag(lag_ticks: i64) -> Result<()> {
    if lag_ticks < 0 {
        Err(Error::param(format!("lag must be >= 0, got {lag_ticks}")))
    } else {
        Ok(())
    }
}

pub fn lag_pairs(window: &Window, tape: &TradeTape, lag_ticks: i64) -> Result<LagPairSet> {
    check_lag(lag_ticks)?;
    let recs = tape.records();
    let pairs = pair_indices(recs, window.index_range(), lag_ticks)
        .map(|(i, j)| (recs[i], recs[j]))
        .collect();
    Ok(LagPairSet {
        center_tick: window.center_tick(),
        lag_ticks,
        pairs,
    })
}

/// Plug-in statistics of one pair set: lagged second moments of value and
/// volume, the first moments at both ends of the pairs, and the three
/// autocovariances.
///
/// From pairs, the autocovariances come from a second pass over per-trade
/// deviations (see [`LagStats::b_price`]). Built with
/// [`LagStats::from_moments`], they are evaluated from the plug-ins alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagStats {
    /// `C(t, t+tau)`
    pub lag2_value: f64,
    /// `U(t, t+tau)`
    pub lag2_volume: f64,
    /// `C(t;1)`
    pub c1_now: f64,
    /// `C(t+tau;1)`
    pub c1_lagged: f64,
    /// `U(t;1)`
    pub u1_now: f64,
    /// `U(t+tau;1)`
    pub u1_lagged: f64,
    /// `B_C`
    pub cov_value: f64,
    /// `B_U`
    pub cov_volume: f64,
    /// `B_p`
    pub cov_price: f64,
}

fn stats_of<I>(pairs: impl Fn() -> I) -> Option<(LagStats, usize)>
where
    I: Iterator<Item = [f64; 4]>,
{
    let m = pair_moments(pairs)?;
    let stats = LagStats {
        lag2_value: m.cc,
        lag2_volume: m.uu,
        c1_now: m.c,
        c1_lagged: m.c_lag,
        u1_now: m.u,
        u1_lagged: m.u_lag,
        cov_value: m.cov_c,
        cov_volume: m.cov_u,
        cov_price: m.cov_p,
    };
    Some((stats, m.n))
}

#[inline]
fn quad(a: &TradeRecord, b: &TradeRecord) -> [f64; 4] {
    [a.value(), a.volume(), b.value(), b.volume()]
}

impl LagStats {
    /// Plug-in statistics given directly. `B_C` and `B_U` are the differences
    /// `lag2 - mean * mean`; `B_p` is `C2/U2 - c c'/(u u')` written over them,
    /// `(B_C u u' - c c' B_U) / (U2 u u')`.
    pub fn from_moments(
        lag2_value: f64,
        lag2_volume: f64,
        c1_now: f64,
        c1_lagged: f64,
        u1_now: f64,
        u1_lagged: f64,
    ) -> Self {
        let cov_value = lag2_value - c1_now * c1_lagged;
        let cov_volume = lag2_volume - u1_now * u1_lagged;
        let uu = u1_now * u1_lagged;
        Self {
            lag2_value,
            lag2_volume,
            c1_now,
            c1_lagged,
            u1_now,
            u1_lagged,
            cov_value,
            cov_volume,
            cov_price: (cov_value * uu - (c1_now * c1_lagged) * cov_volume) / (lag2_volume * uu),
        }
    }

    pub fn from_pairs(pairs: &LagPairSet) -> Result<Self> {
        stats_of(|| pairs.pairs.iter().map(|(a, b)| quad(a, b)))
            .map(|(s, _)| s)
            .ok_or_else(|| no_pairs(pairs))
    }

    /// Same statistics computed straight from tape indices, without materializing the pairs.
    fn from_tape(records: &[TradeRecord], range: std::ops::Range<usize>, lag: i64) -> Option<(Self, usize)> {
        stats_of(|| pair_indices(records, range.clone(), lag).map(|(i, j)| quad(&records[i], &records[j])))
    }

    /// `p(t, t+tau) = C(t,t+tau) / U(t,t+tau)`.
    pub fn lag2_price(&self) -> f64 {
        self.lag2_value / self.lag2_volume
    }

    /// `B_C = C(t,t+tau) - C(t;1) C(t+tau;1)`.
    pub fn b_value(&self) -> f64 {
        self.cov_value
    }

    /// `B_U = U(t,t+tau) - U(t;1) U(t+tau;1)`.
    pub fn b_volume(&self) -> f64 {
        self.cov_volume
    }

    /// `B_p = C(t,t+tau)/U(t,t+tau) - C(t;1) C(t+tau;1) / (U(t;1) U(t+tau;1))`.
    ///
    /// From pairs this is evaluated as a mean over per-trade residuals
    /// `C - P U` around the window VWAPs `P`, not as the difference of the two
    /// ratios, which would lose most of its digits when `B_p` is small next to
    /// the squared price.
    pub fn b_price(&self) -> f64 {
        self.cov_price
    }

    pub fn b(&self, series: Series) -> f64 {
        match series {
            Series::Value => self.b_value(),
            Series::Volume => self.b_volume(),
            Series::Price => self.b_price(),
        }
    }
}

fn no_pairs(pairs: &LagPairSet) -> Error {
    Error::no_data(format!(
        "no surviving pairs for center {} at lag {}",
        pairs.center_tick, pairs.lag_ticks
    ))
}

/// Mean over pairs of the product of `series` at both ends. Value or volume only.
pub fn lag_moment2(pairs: &LagPairSet, series: Series) -> Result<f64> {
    let stats = LagStats::from_pairs(pairs)?;
    match series {
        Series::Value => Ok(stats.lag2_value),
        Series::Volume => Ok(stats.lag2_volume),
        Series::Price => Err(Error::param(
            "lagged price moment is market-based; use market_price_lag_moment",
        )),
    }
}

/// `C(t,t+tau) / U(t,t+tau)`.
pub fn market_price_lag_moment(pairs: &LagPairSet) -> Result<f64> {
    Ok(LagStats::from_pairs(pairs)?.lag2_price())
}

/// Autocorrelation `B_C`, `B_U` or `B_p` of a pair set.
pub fn acf(pairs: &LagPairSet, series: Series) -> Result<f64> {
    Ok(LagStats::from_pairs(pairs)?.b(series))
}

/// Which autocorrelation has already decayed, leaving the other to drive `B_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `B_C = 0`: `B_p = -(B_U / U(t,t+tau)) C(t;1) C(t+tau;1) / (U(t;1) U(t+tau;1))`.
    VolumeDominated,
    /// `B_U = 0`: `B_p = B_C / (U(t;1) U(t+tau;1))`.
    ValueDominated,
}

/// Closed-form `B_p` when one of `B_C`, `B_U` vanishes. `b_other` is `B_U` for
/// the volume-dominated regime and `B_C` for the value-dominated one.
/// `stats.lag2_value` is not read.
pub fn regime_acf(kind: Regime, b_other: f64, stats: &LagStats) -> Result<f64> {
    let uu = stats.u1_now * stats.u1_lagged;
    if uu == 0.0 {
        return Err(Error::Domain("U(t;1) U(t+tau;1) is zero".into()));
    }
    match kind {
        Regime::VolumeDominated => {
            if stats.lag2_volume == 0.0 {
                return Err(Error::Domain("U(t,t+tau) is zero".into()));
            }
            Ok(-(b_other / stats.lag2_volume) * (stats.c1_now * stats.c1_lagged) / uu)
        }
        Regime::ValueDominated => Ok(b_other / uu),
    }
}

/// How per-center results are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    /// One point per valid center and lag.
    #[default]
    PerCenter,
    /// Pair-count weighted mean over centers, one point per lag. Assumes stationarity.
    Mean,
}

impl std::str::FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-center" => Ok(Aggregate::PerCenter),
            "mean" => Ok(Aggregate::Mean),
            other => Err(Error::param(format!(
                "unknown aggregation {other:?}, expected per-center or mean"
            ))),
        }
    }
}

/// Autocorrelations and lagged moments at one lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfPoint {
    /// Absent for points aggregated over centers.
    pub center_tick: Option<i64>,
    pub lag_ticks: i64,
    pub b_value: f64,
    pub b_volume: f64,
    pub b_price: f64,
    pub lag2_value: f64,
    pub lag2_volume: f64,
    pub lag2_price: f64,
    pub pair_count: usize,
    /// Centers contributing to this point (1 in per-center mode).
    pub centers: usize,
}

impl AcfPoint {
    fn single(center_tick: i64, lag_ticks: i64, s: &LagStats, pair_count: usize) -> Self {
        Self {
            center_tick: Some(center_tick),
            lag_ticks,
            b_value: s.b_value(),
            b_volume: s.b_volume(),
            b_price: s.b_price(),
            lag2_value: s.lag2_value,
            lag2_volume: s.lag2_volume,
            lag2_price: s.lag2_price(),
            pair_count,
            centers: 1,
        }
    }

    pub fn b(&self, series: Series) -> f64 {
        match series {
            Series::Value => self.b_value,
            Series::Volume => self.b_volume,
            Series::Price => self.b_price,
        }
    }
}

/// Sweep settings for [`acf_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfOptions {
    /// Largest lag, a multiple of the lag step.
    pub max_lag_ticks: i64,
    pub aggregate: Aggregate,
    /// Relative threshold for scale detection, in `(0, 1)`.
    pub threshold: f64,
}

impl AcfOptions {
    pub fn new(max_lag_ticks: i64, aggregate: Aggregate) -> Self {
        Self {
            max_lag_ticks,
            aggregate,
            threshold: DEFAULT_SCALE_THRESHOLD,
        }
    }
}

/// Detected correlation scales, in ticks. `None` when the curve never falls
/// below the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scales {
    pub center_tick: Option<i64>,
    pub tau_value: Option<i64>,
    pub tau_volume: Option<i64>,
    pub tau_price: Option<i64>,
}

/// A (center, lag) with no surviving pairs. `center_tick` is absent in mean mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyPoint {
    pub center_tick: Option<i64>,
    pub lag_ticks: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfCurve {
    pub spec: WindowSpec,
    pub options: AcfOptions,
    pub windows_planned: usize,
    pub windows_valid: usize,
    /// Ordered by center then lag (per-center) or by lag (mean).
    pub points: Vec<AcfPoint>,
    pub scales: Vec<Scales>,
    /// Lags that produced no point for lack of pairs.
    pub empty: Vec<EmptyPoint>,
}

impl AcfCurve {
    /// Points of one center (per-center mode) or all points (mean mode).
    pub fn points_for(&self, center_tick: Option<i64>) -> impl Iterator<Item = &AcfPoint> {
        self.points.iter().filter(move |p| p.center_tick == center_tick)
    }

    /// Writes `lag,b_value,b_volume,b_price,pair_count` (with a leading
    /// `center_tick` column in per-center mode).
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let per_center = self.options.aggregate == Aggregate::PerCenter;
        if per_center {
            write!(out, "center_tick,")?;
        }
        writeln!(out, "lag,b_value,b_volume,b_price,pair_count")?;
        for p in &self.points {
            if let (true, Some(c)) = (per_center, p.center_tick) {
                write!(out, "{c},")?;
            }
            writeln!(
                out,
                "{},{},{},{},{}",
                p.lag_ticks, p.b_value, p.b_volume, p.b_price, p.pair_count
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

fn scales_of<'a>(
    center_tick: Option<i64>,
    points: impl Iterator<Item = &'a AcfPoint> + Clone,
    threshold: f64,
) -> Result<Scales> {
    let detect = |series: Series| {
        let curve: Vec<(i64, f64)> = points.clone().map(|p| (p.lag_ticks, p.b(series))).collect();
        correlation_scale(&curve, threshold)
    };
    Ok(Scales {
        center_tick,
        tau_value: detect(Series::Value)?,
        tau_volume: detect(Series::Volume)?,
        tau_price: detect(Series::Price)?,
    })
}

/// Number of windows evaluated per parallel batch in mean mode.
const MEAN_BATCH: usize = 2048;

#[derive(Default, Clone)]
struct WeightedAcc {
    sums: [KahanSum; 6],
    weight: usize,
    centers: usize,
}

impl WeightedAcc {
    fn push(&mut self, s: &LagStats, pairs: usize) {
        let w = pairs as f64;
        let vals = [
            s.b_value(),
            s.b_volume(),
            s.b_price(),
            s.lag2_value,
            s.lag2_volume,
            s.lag2_price(),
        ];
        for (acc, v) in self.sums.iter_mut().zip(vals) {
            acc.push(w * v);
        }
        self.weight += pairs;
        self.centers += 1;
    }

    fn finish(&self, lag_ticks: i64) -> Option<AcfPoint> {
        if self.weight == 0 {
            return None;
        }
        let w = self.weight as f64;
        let m = |i: usize| self.sums[i].total() / w;
        Some(AcfPoint {
            center_tick: None,
            lag_ticks,
            b_value: m(0),
            b_volume: m(1),
            b_price: m(2),
            lag2_value: m(3),
            lag2_volume: m(4),
            lag2_price: m(5),
            pair_count: self.weight,
            centers: self.centers,
        })
    }
}

/// Sweeps lags `0, l, 2l, ..., max_lag` over every valid window of the tape.
///
/// Windows are evaluated in parallel on the current rayon pool; results are
/// merged in center order, so the output does not depend on the thread count.
pub fn acf_curve(tape: &TradeTape, spec: &WindowSpec, options: &AcfOptions) -> Result<AcfCurve> {
    let step = spec.lag_step_ticks();
    if options.max_lag_ticks < 0 || options.max_lag_ticks % step != 0 {
        return Err(Error::param(format!(
            "max lag {} must be a nonnegative multiple of the lag step {step}",
            options.max_lag_ticks
        )));
    }
    if !(options.threshold > 0.0 && options.threshold < 1.0) {
        return Err(Error::param(format!("threshold must be in (0, 1), got {}", options.threshold)));
    }
    let planned = plan_windows(tape, spec);
    let valid: Vec<Window> = planned.iter().copied().filter(Window::is_valid).collect();
    if valid.is_empty() {
        return Err(Error::no_data(format!(
            "no valid windows ({} planned) for N = {} on a tape spanning {} ticks",
            planned.len(),
            spec.width(),
            tape.span_ticks()
        )));
    }
    let lags: Vec<i64> = (0..=options.max_lag_ticks / step).map(|m| m * step).collect();
    let recs = tape.records();
    let eval = |w: &Window| -> Vec<Option<(LagStats, usize)>> {
        lags.iter().map(|&lag| LagStats::from_tape(recs, w.index_range(), lag)).collect()
    };

    let mut points = Vec::new();
    let mut scales = Vec::new();
    let mut empty = Vec::new();

    match options.aggregate {
        Aggregate::PerCenter => {
            let rows: Vec<Vec<Option<(LagStats, usize)>>> = valid.par_iter().map(eval).collect();
            for (w, row) in valid.iter().zip(rows) {
                let c = w.center_tick();
                let start = points.len();
                for (&lag, cell) in lags.iter().zip(row) {
                    match cell {
                        Some((s, n)) => points.push(AcfPoint::single(c, lag, &s, n)),
                        None => empty.push(EmptyPoint {
                            center_tick: Some(c),
                            lag_ticks: lag,
                        }),
                    }
                }
                if points.len() > start {
                    scales.push(scales_of(Some(c), points[start..].iter(), options.threshold)?);
                }
            }
        }
        Aggregate::Mean => {
            let mut accs = vec![WeightedAcc::default(); lags.len()];
            for batch in valid.chunks(MEAN_BATCH) {
                let rows: Vec<Vec<Option<(LagStats, usize)>>> = batch.par_iter().map(eval).collect();
                for row in rows {
                    for (acc, cell) in accs.iter_mut().zip(row) {
                        if let Some((s, n)) = cell {
                            acc.push(&s, n);
                        }
                    }
                }
            }
            for (&lag, acc) in lags.iter().zip(&accs) {
                match acc.finish(lag) {
                    Some(p) => points.push(p),
                    None => empty.push(EmptyPoint {
                        center_tick: None,
                        lag_ticks: lag,
                    }),
                }
            }
            if !points.is_empty() {
                scales.push(scales_of(None, points.iter(), options.threshold)?);
            }
        }
    }

    Ok(AcfCurve {
        spec: *spec,
        options: *options,
        windows_planned: planned.len(),
        windows_valid: valid.len(),
        points,
        scales,
        empty,
    })
}

/// Smallest lag at which `|B(lag)| <= threshold * |B(first lag)|`.
///
/// The first entry is the reference, normally lag 0. A curve whose reference
/// value is exactly zero is already decorrelated and yields its first lag.
/// `None` when the curve never falls below the threshold.
pub fn correlation_scale(curve: &[(i64, f64)], threshold: f64) -> Result<Option<i64>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param(format!("threshold must be in (0, 1), got {threshold}")));
    }
    let Some(&(lag0, b0)) = curve.first() else {
        return Err(Error::param("correlation curve is empty"));
    };
    if b0 == 0.0 {
        return Ok(Some(lag0));
    }
    let cut = threshold * b0.abs();
    Ok(curve.iter().find(|(_, b)| b.abs() <= cut).map(|&(lag, _)| lag))
}

fn check_npoint_lags(lags: &[i64]) -> Result<()> {
    if lags.len() > NPOINT_MAX_LAGS {
        return Err(Error::param(format!(
            "at most {NPOINT_MAX_LAGS} lags supported, got {}",
            lags.len()
        )));
    }
    if lags.first().is_some_and(|&l| l <= 0) || lags.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(format!("lags must be positive and strictly ascending, got {lags:?}")));
    }
    Ok(())
}

/// Mean over window members of `series(t_i) * series(t_i + tau_1) * ... * series(t_i + tau_n)`.
/// Members missing any partner on the tape are dropped. Value or volume only.
pub fn npoint_moment(window: &Window, tape: &TradeTape, series: Series, lags: &[i64]) -> Result<f64> {
    if series == Series::Price {
        return Err(Error::param("n-point price moment is market-based; use market_price_npoint"));
    }
    check_npoint_lags(lags)?;
    let recs = tape.records();
    let mut acc = MeanAcc::new();
    'members: for r in &recs[window.index_range()] {
        let mut prod = series.of(r);
        for &lag in lags {
            match tape.get(r.tick() + lag) {
                Some(p) => prod *= series.of(p),
                None => continue 'members,
            }
        }
        acc.push(prod);
    }
    acc.mean().ok_or_else(|| {
        Error::no_data(format!(
            "no member of window {} has partners at all lags {lags:?}",
            window.center_tick()
        ))
    })
}

/// `C(t, t+tau_1, ...) / U(t, t+tau_1, ...)`.
pub fn market_price_npoint(window: &Window, tape: &TradeTape, lags: &[i64]) -> Result<f64> {
    Ok(npoint_moment(window, tape, Series::Value, lags)? / npoint_moment(window, tape, Series::Volume, lags)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{freq_moment, market_price_moment, market_volatility};
    use crate::windows::members;

    fn rec(tick: i64, c: f64, u: f64) -> TradeRecord {
        TradeRecord::new(tick, c, u).unwrap()
    }

    fn tape_from(recs: Vec<TradeRecord>) -> TradeTape {
        TradeTape::new(1.0, recs).unwrap()
    }

    fn dense(n: i64) -> TradeTape {
        tape_from((0..n).map(|t| rec(t, 1.0 + (t * 7 % 5) as f64, 1.0 + (t * 3 % 4) as f64)).collect())
    }

    fn spec5() -> WindowSpec {
        WindowSpec::new(5, 1).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn pairs_dense() {
        let tape = dense(10);
        let w = Window::at(&tape, 2, &spec5());
        let p = lag_pairs(&w, &tape, 2).unwrap();
        let ticks: Vec<(i64, i64)> = p.pairs().iter().map(|(a, b)| (a.tick(), b.tick())).collect();
        assert_eq!(ticks, vec![(0, 2), (1, 3), (2, 4), (3, 5), (4, 6)]);
    }

    #[test]
    fn pairs_zero_lag() {
        let tape = dense(10);
        let w = Window::at(&tape, 2, &spec5());
        let p = lag_pairs(&w, &tape, 0).unwrap();
        assert_eq!(p.pair_count(), w.count());
        assert!(p.pairs().iter().all(|(a, b)| a == b));
    }

    #[test]
    fn pairs_drop_missing_partner() {
        let tape = tape_from((0..10).filter(|&t| t != 6).map(|t| rec(t, 1.0, 1.0)).collect());
        let w = Window::at(&tape, 2, &spec5());
        let p = lag_pairs(&w, &tape, 2).unwrap();
        assert_eq!(p.pair_count(), 4);
        assert!(p.pairs().iter().all(|(a, _)| a.tick() != 4));
        assert!(lag_pairs(&w, &tape, -1).is_err());
    }

    #[test]
    fn lag_moment_examples() {
        let constant = tape_from((0..12).map(|t| rec(t, 2.0, 1.0)).collect());
        let w = Window::at(&constant, 4, &spec5());
        for lag in [0, 1, 3, 7] {
            let p = lag_pairs(&w, &constant, lag).unwrap();
            assert_eq!(lag_moment2(&p, Series::Value).unwrap(), 4.0);
        }

        // values 1..5 on ticks 0..4; window of the first four members at lag 1
        let tape = tape_from((0..5).map(|t| rec(t, (t + 1) as f64, 1.0)).collect());
        let w = Window::at(&tape, 1, &WindowSpec::new(5, 1).unwrap());
        assert_eq!(w.count(), 4);
        let p = lag_pairs(&w, &tape, 1).unwrap();
        assert_eq!(lag_moment2(&p, Series::Value).unwrap(), 10.0);

        let tape = dense(20);
        let w = Window::at(&tape, 8, &spec5());
        let p = lag_pairs(&w, &tape, 0).unwrap();
        for s in [Series::Value, Series::Volume] {
            assert_eq!(lag_moment2(&p, s).unwrap(), freq_moment(members(&w, &tape), s, 2).unwrap());
        }
        assert!(lag_moment2(&p, Series::Price).is_err());
    }

    fn swapped_pairs() -> LagPairSet {
        LagPairSet::from_pairs(
            0,
            1,
            vec![(rec(0, 10.0, 2.0), rec(1, 6.0, 2.0)), (rec(1, 6.0, 2.0), rec(0, 10.0, 2.0))],
        )
    }

    #[test]
    fn market_lag_moment_examples() {
        let tape = tape_from((0..12).map(|t| rec(t, 3.0 * (1.0 + t as f64), 1.0 + t as f64)).collect());
        let w = Window::at(&tape, 4, &spec5());
        for lag in [1, 2, 5] {
            let p = lag_pairs(&w, &tape, lag).unwrap();
            assert!(close(market_price_lag_moment(&p).unwrap(), 9.0, 1e-15));
        }

        let tape = dense(20);
        let w = Window::at(&tape, 8, &spec5());
        let p0 = lag_pairs(&w, &tape, 0).unwrap();
        assert_eq!(
            market_price_lag_moment(&p0).unwrap(),
            market_price_moment(members(&w, &tape), 2).unwrap()
        );

        assert_eq!(market_price_lag_moment(&swapped_pairs()).unwrap(), 15.0);
    }

    #[test]
    fn acf_examples() {
        let constant = tape_from((0..12).map(|t| rec(t, 2.5, 0.3)).collect());
        let w = Window::at(&constant, 4, &spec5());
        let p = lag_pairs(&w, &constant, 3).unwrap();
        assert_eq!(acf(&p, Series::Value).unwrap(), 0.0);
        assert_eq!(acf(&p, Series::Volume).unwrap(), 0.0);
        assert_eq!(acf(&p, Series::Price).unwrap(), 0.0);

        let tape = dense(20);
        let w = Window::at(&tape, 8, &spec5());
        let p0 = lag_pairs(&w, &tape, 0).unwrap();
        assert_eq!(acf(&p0, Series::Price).unwrap(), market_volatility(members(&w, &tape)).unwrap());

        assert_eq!(acf(&swapped_pairs(), Series::Price).unwrap(), -1.0);

        let empty = LagPairSet::from_pairs(0, 1, vec![]);
        assert!(matches!(acf(&empty, Series::Value), Err(Error::NoData(_))));
        assert!(matches!(lag_moment2(&empty, Series::Value), Err(Error::NoData(_))));
        assert!(matches!(market_price_lag_moment(&empty), Err(Error::NoData(_))));
    }

    fn plug(lag2_volume: f64, c1: f64, c1l: f64, u1: f64, u1l: f64) -> LagStats {
        LagStats::from_moments(0.0, lag2_volume, c1, c1l, u1, u1l)
    }

    #[test]
    fn regime_examples() {
        let s = plug(4.0, 3.0, 3.0, 1.0, 1.0);
        assert_eq!(regime_acf(Regime::VolumeDominated, 2.0, &s).unwrap(), -4.5);
        assert_eq!(regime_acf(Regime::VolumeDominated, 0.0, &s).unwrap(), 0.0);
        let s = plug(4.0, 3.0, 3.0, 2.0, 3.0);
        assert_eq!(regime_acf(Regime::ValueDominated, 6.0, &s).unwrap(), 1.0);

        assert!(matches!(
            regime_acf(Regime::VolumeDominated, 1.0, &plug(0.0, 1.0, 1.0, 1.0, 1.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            regime_acf(Regime::ValueDominated, 1.0, &plug(1.0, 1.0, 1.0, 0.0, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn curve_on_constant_tape_is_zero() {
        let tape = tape_from((0..60).map(|t| rec(t, 17.3, 2.9)).collect());
        let spec = WindowSpec::new(11, 2).unwrap();
        for agg in [Aggregate::PerCenter, Aggregate::Mean] {
            let curve = acf_curve(&tape, &spec, &AcfOptions::new(10, agg)).unwrap();
            assert!(!curve.points.is_empty());
            for p in &curve.points {
                assert_eq!((p.b_value, p.b_volume, p.b_price), (0.0, 0.0, 0.0));
            }
            for s in &curve.scales {
                assert_eq!((s.tau_value, s.tau_volume, s.tau_price), (Some(0), Some(0), Some(0)));
            }
        }
    }

    #[test]
    fn curve_lag_zero_is_volatility() {
        let tape = dense(80);
        let spec = WindowSpec::new(9, 3).unwrap();
        let curve = acf_curve(&tape, &spec, &AcfOptions::new(9, Aggregate::PerCenter)).unwrap();
        let windows = plan_windows(&tape, &spec);
        assert_eq!(curve.windows_valid, windows.len());
        for w in &windows {
            let p0 = curve.points_for(Some(w.center_tick())).find(|p| p.lag_ticks == 0).unwrap();
            assert_eq!(p0.b_price, market_volatility(members(w, &tape)).unwrap());
            assert_eq!(p0.pair_count, w.count());
        }
    }

    #[test]
    fn curve_matches_materialized_pairs() {
        let tape = tape_from(
            (0..70)
                .filter(|t| t % 7 != 3)
                .map(|t| rec(t, 1.0 + ((t * 13) % 11) as f64, 0.5 + ((t * 5) % 3) as f64))
                .collect(),
        );
        let spec = WindowSpec::new(7, 2).unwrap();
        let curve = acf_curve(&tape, &spec, &AcfOptions::new(8, Aggregate::PerCenter)).unwrap();
        for p in &curve.points {
            let w = Window::at(&tape, p.center_tick.unwrap(), &spec);
            let pairs = lag_pairs(&w, &tape, p.lag_ticks).unwrap();
            assert_eq!(pairs.pair_count(), p.pair_count);
            assert_eq!(acf(&pairs, Series::Value).unwrap(), p.b_value);
            assert_eq!(acf(&pairs, Series::Volume).unwrap(), p.b_volume);
            assert_eq!(acf(&pairs, Series::Price).unwrap(), p.b_price);
            assert_eq!(market_price_lag_moment(&pairs).unwrap(), p.lag2_price);
        }
    }

    #[test]
    fn curve_mean_is_pair_weighted() {
        let tape = dense(50);
        let spec = WindowSpec::new(5, 5).unwrap();
        let per = acf_curve(&tape, &spec, &AcfOptions::new(10, Aggregate::PerCenter)).unwrap();
        let mean = acf_curve(&tape, &spec, &AcfOptions::new(10, Aggregate::Mean)).unwrap();
        assert_eq!(mean.points.len(), 3);
        for m in &mean.points {
            let rows: Vec<&AcfPoint> = per.points.iter().filter(|p| p.lag_ticks == m.lag_ticks).collect();
            let w: usize = rows.iter().map(|p| p.pair_count).sum();
            let b: f64 = rows.iter().map(|p| p.pair_count as f64 * p.b_price).sum::<f64>() / w as f64;
            assert_eq!(m.pair_count, w);
            assert_eq!(m.centers, rows.len());
            assert!(close(m.b_price, b, 1e-12));
        }
    }

    #[test]
    fn curve_errors_and_empty_points() {
        let tape = dense(20);
        let spec = WindowSpec::new(5, 2).unwrap();
        assert!(acf_curve(&tape, &spec, &AcfOptions::new(3, Aggregate::Mean)).is_err());
        let mut bad = AcfOptions::new(4, Aggregate::Mean);
        bad.threshold = 1.0;
        assert!(acf_curve(&tape, &spec, &bad).is_err());
        assert!(matches!(
            acf_curve(&dense(3), &spec, &AcfOptions::new(2, Aggregate::Mean)),
            Err(Error::NoData(_))
        ));

        // partners beyond the tape end leave the largest lags empty at late centers
        let curve = acf_curve(&tape, &spec, &AcfOptions::new(30, Aggregate::PerCenter)).unwrap();
        assert!(curve.empty.iter().any(|e| e.lag_ticks == 30));
        assert!(curve.points.iter().all(|p| p.pair_count > 0));
    }

    #[test]
    fn csv_layout() {
        let tape = tape_from((0..12).map(|t| rec(t, 2.0, 1.0)).collect());
        // tick 12 is absent, so only 4 of the lag-5 partners exist
        let spec = WindowSpec::new(5, 5).unwrap();
        let mean = acf_curve(&tape, &spec, &AcfOptions::new(5, Aggregate::Mean)).unwrap();
        assert_eq!(mean.to_csv_string(), "lag,b_value,b_volume,b_price,pair_count\n0,0,0,0,5\n5,0,0,0,4\n");
        let per = acf_curve(&tape, &spec, &AcfOptions::new(0, Aggregate::PerCenter)).unwrap();
        assert_eq!(per.to_csv_string(), "center_tick,lag,b_value,b_volume,b_price,pair_count\n5,0,0,0,0,5\n");
    }

    #[test]
    fn scale_examples() {
        let c = [(0, 1.0), (2, 0.5), (4, 0.1), (6, 0.02)];
        assert_eq!(correlation_scale(&c, 0.05).unwrap(), Some(6));
        assert_eq!(correlation_scale(&[(0, 0.0), (1, 0.0)], 0.05).unwrap(), Some(0));
        assert_eq!(correlation_scale(&[(0, 1.0), (1, 0.9), (2, 0.8)], 0.05).unwrap(), None);
        assert_eq!(correlation_scale(&[(0, -2.0), (1, 0.5), (2, -0.05)], 0.05).unwrap(), Some(2));
        assert!(correlation_scale(&[], 0.05).is_err());
        assert!(correlation_scale(&c, 0.0).is_err());
    }

    #[test]
    fn npoint_examples() {
        let tape = dense(30);
        let w = Window::at(&tape, 10, &spec5());
        for s in [Series::Value, Series::Volume] {
            assert_eq!(npoint_moment(&w, &tape, s, &[]).unwrap(), freq_moment(members(&w, &tape), s, 1).unwrap());
            let p = lag_pairs(&w, &tape, 3).unwrap();
            assert_eq!(npoint_moment(&w, &tape, s, &[3]).unwrap(), lag_moment2(&p, s).unwrap());
        }
        let p = lag_pairs(&w, &tape, 4).unwrap();
        assert_eq!(market_price_npoint(&w, &tape, &[4]).unwrap(), market_price_lag_moment(&p).unwrap());

        let constant = tape_from((0..30).map(|t| rec(t, 1.5, 0.5)).collect());
        let w = Window::at(&constant, 10, &spec5());
        assert_eq!(npoint_moment(&w, &constant, Series::Value, &[1, 4]).unwrap(), 1.5 * 1.5 * 1.5);
        let p3 = market_price_npoint(&w, &constant, &[1, 2, 6]).unwrap();
        assert!(close(p3, 81.0, 1e-14), "{p3}");

        // prices (5,3,5), volumes (2,2,1)
        let tape = tape_from(vec![rec(0, 10.0, 2.0), rec(1, 6.0, 2.0), rec(2, 5.0, 1.0)]);
        let w = Window::at(&tape, 1, &WindowSpec::new(3, 1).unwrap());
        assert_eq!(npoint_moment(&w, &tape, Series::Value, &[1, 2]).unwrap(), 300.0);
        assert_eq!(npoint_moment(&w, &tape, Series::Volume, &[1, 2]).unwrap(), 4.0);
        assert_eq!(market_price_npoint(&w, &tape, &[1, 2]).unwrap(), 75.0);
    }

    #[test]
    fn npoint_errors() {
        let tape = dense(10);
        let w = Window::at(&tape, 2, &spec5());
        assert!(matches!(npoint_moment(&w, &tape, Series::Value, &[20]), Err(Error::NoData(_))));
        assert!(npoint_moment(&w, &tape, Series::Value, &[2, 1]).is_err());
        assert!(npoint_moment(&w, &tape, Series::Value, &[0]).is_err());
        assert!(npoint_moment(&w, &tape, Series::Value, &[1, 2, 3, 4, 5]).is_err());
        assert!(npoint_moment(&w, &tape, Series::Price, &[1]).is_err());
    }
}
