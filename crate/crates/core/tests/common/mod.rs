// Shared helpers for the integration tests: seeded random tapes and a
// brute-force evaluator that works straight from tick -> (value, volume)
// lookups, without the crate's window or pair machinery.

#![allow(dead_code)]

use std::collections::HashMap;

use mbstat::{TradeRecord, TradeTape};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct Draw(Xoshiro256PlusPlus);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform on `[lo, hi)`.
    pub fn unif(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    /// Uniform on `(0, hi]`.
    pub fn unif_open_low(&mut self, hi: f64) -> f64 {
        hi - self.unif(0.0, hi)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.unif(0.0, 1.0) < p
    }
}

/// Dense tape on ticks `0..len` with prices in `[1, 100)` and volumes in `[0.5, 20)`.
pub fn random_tape(draw: &mut Draw, len: i64) -> TradeTape {
    let recs = (0..len)
        .map(|t| TradeRecord::from_price(t, draw.unif(1.0, 100.0), draw.unif(0.5, 20.0)).unwrap())
        .collect();
    TradeTape::new(1.0, recs).unwrap()
}

/// Like [`random_tape`] but each tick is dropped with probability `gap`,
/// and the tape is shifted to start at `offset`.
pub fn random_gappy_tape(draw: &mut Draw, len: i64, gap: f64, offset: i64) -> TradeTape {
    let mut recs = Vec::new();
    for t in 0..len {
        let keep = t == 0 || t == len - 1 || !draw.coin(gap);
        let (p, u) = (draw.unif(1.0, 100.0), draw.unif(0.5, 20.0));
        if keep {
            recs.push(TradeRecord::from_price(t + offset, p, u).unwrap());
        }
    }
    TradeTape::new(1.0, recs).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= tol * scale || a == b
}

/// Relative error of a difference `x - y` measured against `|x| + |y|`,
/// the magnitude of the terms it is built from.
pub fn diff_close(got: f64, want: f64, terms: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * terms.abs().max(want.abs()) || got == want
}

#[derive(Debug, Clone, Copy)]
pub struct OraclePoint {
    pub center: i64,
    pub lag: i64,
    pub pairs: usize,
    pub lag2_value: f64,
    pub lag2_volume: f64,
    pub c_now: f64,
    pub c_lag: f64,
    pub u_now: f64,
    pub u_lag: f64,
}

impl OraclePoint {
    pub fn b_value(&self) -> f64 {
        self.lag2_value - self.c_now * self.c_lag
    }
    pub fn b_volume(&self) -> f64 {
        self.lag2_volume - self.u_now * self.u_lag
    }
    pub fn b_price(&self) -> f64 {
        self.lag2_value / self.lag2_volume - self.c_now * self.c_lag / (self.u_now * self.u_lag)
    }
    /// Term magnitudes for judging the three differences.
    pub fn terms(&self) -> [f64; 3] {
        [
            self.lag2_value.abs() + (self.c_now * self.c_lag).abs(),
            self.lag2_volume.abs() + (self.u_now * self.u_lag).abs(),
            (self.lag2_value / self.lag2_volume).abs()
                + (self.c_now * self.c_lag / (self.u_now * self.u_lag)).abs(),
        ]
    }
}

/// Direct evaluation of every (center, lag) cell.
///
/// Centers are every multiple of `step` whose full span `[c - h, c + h]`
/// lies within the first and last tick. Members are the ticks of that span
/// present on the tape; a pair survives when its partner `t + lag` is present.
/// Cells with no surviving pair are omitted.
pub fn brute_force(tape: &TradeTape, width: i64, step: i64, max_lag: i64) -> Vec<OraclePoint> {
    let map: HashMap<i64, (f64, f64)> =
        tape.records().iter().map(|r| (r.tick(), (r.value(), r.volume()))).collect();
    let first = *map.keys().min().unwrap();
    let last = *map.keys().max().unwrap();
    let h = (width - 1) / 2;
    let mut out = Vec::new();
    for center in first..=last {
        if center % step != 0 || center - h < first || center + h > last {
            continue;
        }
        let mut lag = 0;
        while lag <= max_lag {
            let (mut n, mut cc, mut uu, mut c0, mut c1, mut u0, mut u1) =
                (0usize, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for t in center - h..=center + h {
                if let (Some(&(ca, ua)), Some(&(cb, ub))) = (map.get(&t), map.get(&(t + lag))) {
                    n += 1;
                    cc += ca * cb;
                    uu += ua * ub;
                    c0 += ca;
                    c1 += cb;
                    u0 += ua;
                    u1 += ub;
                }
            }
            if n > 0 {
                let k = n as f64;
                out.push(OraclePoint {
                    center,
                    lag,
                    pairs: n,
                    lag2_value: cc / k,
                    lag2_volume: uu / k,
                    c_now: c0 / k,
                    c_lag: c1 / k,
                    u_now: u0 / k,
                    u_lag: u1 / k,
                });
            }
            lag += step;
        }
    }
    out
}

/// Pair-weighted mean over centers of the oracle cells, per lag:
/// `(lag, b_value, b_volume, b_price, total_pairs)`.
pub fn brute_force_mean(points: &[OraclePoint]) -> Vec<(i64, f64, f64, f64, usize)> {
    let mut lags: Vec<i64> = points.iter().map(|p| p.lag).collect();
    lags.sort_unstable();
    lags.dedup();
    lags.into_iter()
        .map(|lag| {
            let (mut bc, mut bu, mut bp, mut w) = (0.0, 0.0, 0.0, 0usize);
            for p in points.iter().filter(|p| p.lag == lag) {
                let k = p.pairs as f64;
                bc += k * p.b_value();
                bu += k * p.b_volume();
                bp += k * p.b_price();
                w += p.pairs;
            }
            let k = w as f64;
            (lag, bc / k, bu / k, bp / k, w)
        })
        .collect()
}

/// Per-window direct moments: `(center, sum C^n / sum U^n)` style quantities
/// are left to the callers; this just lists member records by center.
pub fn windows_of(tape: &TradeTape, width: i64, step: i64) -> Vec<(i64, Vec<(f64, f64)>)> {
    let map: HashMap<i64, (f64, f64)> =
        tape.records().iter().map(|r| (r.tick(), (r.value(), r.volume()))).collect();
    let first = tape.first_tick().unwrap();
    let last = tape.last_tick().unwrap();
    let h = (width - 1) / 2;
    (first..=last)
        .filter(|c| c % step == 0 && c - h >= first && c + h <= last)
        .map(|c| (c, (c - h..=c + h).filter_map(|t| map.get(&t).copied()).collect()))
        .collect()
}
