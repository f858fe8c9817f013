//! Trade records, the uniformly gridded tape, CSV ingestion and bucketing.
//!
//! A tape holds at most one record per grid tick. Raw trades that share a tick
//! are merged by [`bucket`], which sums values and volumes: both are additive,
//! price is not, so the merged price is the ratio of the sums.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::accum::KahanSum;
use crate::error::{Error, Result};

/// One aggregated trade at grid tick `tick` (time `epsilon * tick`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    tick: i64,
    value: f64,
    volume: f64,
}

impl TradeRecord {
    /// Validates `value >= 0`, `volume > 0` and a finite price.
    pub fn new(tick: i64, value: f64, volume: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidRecord(format!(
                "tick {tick}: value must be finite and >= 0, got {value}"
            )));
        }
        if !volume.is_finite() || volume <= 0.0 {
            return Err(Error::InvalidRecord(format!(
                "tick {tick}: volume must be finite and > 0, got {volume}"
            )));
        }
        if !(value / volume).is_finite() {
            return Err(Error::InvalidRecord(format!(
                "tick {tick}: price {value}/{volume} is not finite"
            )));
        }
        Ok(Self {
            tick,
            value,
            volume,
        })
    }

    /// Builds a record from a price, with `value = price * volume`.
    pub fn from_price(tick: i64, price: f64, volume: f64) -> Result<Self> {
        if !price.is_finite() || price < 0.0 {
            return Err(Error::InvalidRecord(format!(
                "tick {tick}: price must be finite and >= 0, got {price}"
            )));
        }
        Self::new(tick, price * volume, volume)
    }

    #[inline]
    pub fn tick(&self) -> i64 {
        self.tick
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.volume
    }

    #[inline]
    pub fn price(&self) -> f64 {
        self.value / self.volume
    }

    /// Same trade, moved to another tick.
    pub fn at_tick(self, tick: i64) -> Self {
        Self { tick, ..self }
    }
}

/// Price of a single trade, `value / volume`.
#[inline]
pub fn price_of(record: &TradeRecord) -> f64 {
    record.price()
}

/// Time-ordered records on a uniform grid of `epsilon` seconds per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeTape {
    epsilon: f64,
    records: Vec<TradeRecord>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("epsilon must be > 0, got {epsilon}")))
    }
}

impl TradeTape {
    /// Wraps records that are already strictly increasing in tick.
    pub fn new(epsilon: f64, records: Vec<TradeRecord>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if let Some(w) = records.windows(2).find(|w| w[1].tick <= w[0].tick) {
            return Err(Error::InvalidRecord(format!(
                "ticks must be strictly increasing: {} follows {}",
                w[1].tick, w[0].tick
            )));
        }
        Ok(Self { epsilon, records })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn records(&self) -> &[TradeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_tick(&self) -> Option<i64> {
        self.records.first().map(|r| r.tick)
    }

    pub fn last_tick(&self) -> Option<i64> {
        self.records.last().map(|r| r.tick)
    }

    /// Last tick minus first tick; zero for empty or single-record tapes.
    pub fn span_ticks(&self) -> i64 {
        match (self.first_tick(), self.last_tick()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    /// Horizon `T` in seconds.
    pub fn horizon(&self) -> f64 {
        self.span_ticks() as f64 * self.epsilon
    }

    /// Index of the record at `tick`, if present.
    pub fn index_of(&self, tick: i64) -> Option<usize> {
        self.records.binary_search_by_key(&tick, |r| r.tick).ok()
    }

    pub fn get(&self, tick: i64) -> Option<&TradeRecord> {
        self.index_of(tick).map(|i| &self.records[i])
    }

    /// Index of the first record with tick `>= tick`.
    pub fn lower_bound(&self, tick: i64) -> usize {
        self.records.partition_point(|r| r.tick < tick)
    }

    pub fn total_value(&self) -> f64 {
        total(self.records.iter().map(|r| r.value))
    }

    pub fn total_volume(&self) -> f64 {
        total(self.records.iter().map(|r| r.volume))
    }

    /// Writes the tape as `tick,value,volume` CSV with shortest round-trip decimals.
    pub fn emit_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tick,value,volume")?;
        for r in &self.records {
            writeln!(out, "{},{},{}", r.tick, r.value, r.volume)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.emit_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

fn total(xs: impl Iterator<Item = f64>) -> f64 {
    let mut k = KahanSum::default();
    xs.for_each(|x| k.push(x));
    k.total()
}

/// Merges records sharing a tick by summing values and volumes, then sorts by tick.
///
/// Merging within a tick happens in input order.
pub fn bucket(raw: &[TradeRecord], epsilon: f64) -> Result<TradeTape> {
    check_epsilon(epsilon)?;
    let mut sorted = raw.to_vec();
    // stable: trades at one tick keep their input order
    sorted.sort_by_key(|r| r.tick);

    let mut out: Vec<TradeRecord> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let tick = sorted[i].tick;
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].tick == tick {
            j += 1;
        }
        if j - i == 1 {
            out.push(sorted[i]);
        } else {
            let value = total(sorted[i..j].iter().map(|r| r.value));
            let volume = total(sorted[i..j].iter().map(|r| r.volume));
            out.push(TradeRecord::new(tick, value, volume)?);
        }
        i = j;
    }
    Ok(TradeTape {
        epsilon,
        records: out,
    })
}

/// Maps a timestamp in seconds onto the nearest grid tick, ties to even.
pub fn quantize(time_seconds: f64, epsilon: f64) -> Result<i64> {
    check_epsilon(epsilon)?;
    let t = (time_seconds / epsilon).round_ties_even();
    if !t.is_finite() || t.abs() > i64::MAX as f64 / 2.0 {
        return Err(Error::param(format!(
            "timestamp {time_seconds} does not map onto the grid"
        )));
    }
    Ok(t as i64)
}

/// Quantizes `(time_seconds, value, volume)` trades onto the grid and buckets them.
pub fn bucket_timed(trades: &[(f64, f64, f64)], epsilon: f64) -> Result<TradeTape> {
    let raw = trades
        .iter()
        .map(|&(t, c, u)| TradeRecord::new(quantize(t, epsilon)?, c, u))
        .collect::<Result<Vec<_>>>()?;
    bucket(&raw, epsilon)
}

/// Column layout of a tape CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsvFormat {
    #[default]
    TickValueVolume,
    TickPriceVolume,
}

impl CsvFormat {
    pub fn header(self) -> [&'static str; 3] {
        match self {
            CsvFormat::TickValueVolume => ["tick", "value", "volume"],
            CsvFormat::TickPriceVolume => ["tick", "price", "volume"],
        }
    }
}

impl FromStr for CsvFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tick-value-volume" => Ok(CsvFormat::TickValueVolume),
            "tick-price-volume" => Ok(CsvFormat::TickPriceVolume),
            other => Err(Error::param(format!(
                "unknown format {other:?}, expected tick-value-volume or tick-price-volume"
            ))),
        }
    }
}

impl fmt::Display for CsvFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsvFormat::TickValueVolume => "tick-value-volume",
            CsvFormat::TickPriceVolume => "tick-price-volume",
        })
    }
}

/// Reads raw records without merging duplicate ticks.
pub fn parse_records<R: Read>(input: R, format: CsvFormat) -> Result<Vec<TradeRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let expected = format.header();
    if header.len() != 3 || header.iter().zip(expected).any(|(got, want)| got != want) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must be {:?}, got {:?}",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };

        let tick: i64 = row[0]
            .parse()
            .map_err(|_| bad(format!("tick {:?} is not an integer", &row[0])))?;
        let a: f64 = row[1]
            .parse()
            .map_err(|_| bad(format!("{} {:?} is not a number", expected[1], &row[1])))?;
        let volume: f64 = row[2]
            .parse()
            .map_err(|_| bad(format!("volume {:?} is not a number", &row[2])))?;

        if !(volume > 0.0) {
            return Err(bad(format!("volume must be > 0, got {volume}")));
        }
        if !(a >= 0.0) {
            return Err(bad(format!("{} must be >= 0, got {a}", expected[1])));
        }
        let record = match format {
            CsvFormat::TickValueVolume => TradeRecord::new(tick, a, volume),
            CsvFormat::TickPriceVolume => TradeRecord::from_price(tick, a, volume),
        }
        .map_err(|e| bad(e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

/// Reads a tape CSV and buckets it onto the grid.
pub fn parse_csv<R: Read>(input: R, format: CsvFormat, epsilon: f64) -> Result<TradeTape> {
    check_epsilon(epsilon)?;
    let raw = parse_records(input, format)?;
    bucket(&raw, epsilon)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
