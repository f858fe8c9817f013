//! Averaging windows of `N` ticks whose centers step by the moving-average lag.
//!
//! Centers sit at integer multiples of the lag step, anchored at tick 0. A
//! window is planned only if its whole span `[center - h, center + h]` lies
//! inside the tape, so every window has the same nominal width. Gaps inside a
//! window are tolerated: means use the number of records actually present.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tape::{TradeRecord, TradeTape};

/// Window width `N` (odd), lag step in ticks, and the per-window record floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    width: usize,
    lag_step_ticks: i64,
    min_trades: usize,
}

impl WindowSpec {
    /// `width` must be odd and `1 <= lag_step_ticks <= width`. `min_trades` defaults to 1.
    pub fn new(width: usize, lag_step_ticks: i64) -> Result<Self> {
        if width == 0 || width.is_multiple_of(2) {
            return Err(Error::param(format!("window width N must be odd and >= 1, got {width}")));
        }
        if lag_step_ticks < 1 || lag_step_ticks as u64 > width as u64 {
            return Err(Error::param(format!(
                "lag step must satisfy 1 <= l <= N = {width}, got {lag_step_ticks}"
            )));
        }
        Ok(Self {
            width,
            lag_step_ticks,
            min_trades: 1,
        })
    }

    pub fn with_min_trades(mut self, min_trades: usize) -> Result<Self> {
        if min_trades == 0 {
            return Err(Error::param("min_trades must be >= 1"));
        }
        self.min_trades = min_trades;
        Ok(self)
    }

    /// `N`.
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(N - 1) / 2`.
    pub fn half_width(&self) -> i64 {
        ((self.width - 1) / 2) as i64
    }

    pub fn lag_step_ticks(&self) -> i64 {
        self.lag_step_ticks
    }

    pub fn min_trades(&self) -> usize {
        self.min_trades
    }

    /// Averaging interval in seconds for a tape with grid quantum `epsilon`.
    pub fn delta(&self, epsilon: f64) -> f64 {
        self.width as f64 * epsilon
    }
}

/// One averaging interval resolved against a tape.
///
/// Members are a contiguous index range of the tape's records, since the tape
/// is sorted by tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    center_tick: i64,
    half_width: i64,
    start: usize,
    end: usize,
    valid: bool,
}

impl Window {
    /// Resolves the window centered at `center_tick` without the containment
    /// check that [`plan_windows`] applies.
    pub fn at(tape: &TradeTape, center_tick: i64, spec: &WindowSpec) -> Self {
        let h = spec.half_width();
        let start = tape.lower_bound(center_tick - h);
        let end = tape.lower_bound(center_tick + h + 1);
        Self {
            center_tick,
            half_width: h,
            start,
            end,
            valid: end - start >= spec.min_trades(),
        }
    }

    pub fn center_tick(&self) -> i64 {
        self.center_tick
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn first_tick(&self) -> i64 {
        self.center_tick - self.half_width
    }

    pub fn last_tick(&self) -> i64 {
        self.center_tick + self.half_width
    }

    /// Number of records present in the span (effective `N`).
    pub fn count(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// `count >= min_trades`.
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// Index range of the members within the tape's records.
    pub fn index_range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }

    pub fn member_ticks<'a>(&self, tape: &'a TradeTape) -> impl Iterator<Item = i64> + 'a {
        members(self, tape).iter().map(|r| r.tick())
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -(-a).div_euclid(b)
}

/// Plans every fully contained window, ordered by center.
///
/// Windows below `min_trades` are kept and marked invalid. A tape shorter than
/// the window yields no windows.
pub fn plan_windows(tape: &TradeTape, spec: &WindowSpec) -> Vec<Window> {
    let (Some(first), Some(last)) = (tape.first_tick(), tape.last_tick()) else {
        return Vec::new();
    };
    let h = spec.half_width();
    let l = spec.lag_step_ticks();
    let k_lo = ceil_div(first + h, l);
    let k_hi = floor_div(last - h, l);
    if k_hi < k_lo {
        return Vec::new();
    }
    (k_lo..=k_hi).map(|k| Window::at(tape, k * l, spec)).collect()
}

/// Records of the window, in tick order.
pub fn members<'a>(window: &Window, tape: &'a TradeTape) -> &'a [TradeRecord] {
    &tape.records()[window.index_range()]
}
