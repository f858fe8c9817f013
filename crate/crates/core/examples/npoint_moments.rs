//! Three- and four-point moments of value and volume, and the market-based
//! price n-point moment built from them.
//!
//!     cargo run --example npoint_moments

use mbstat::{market_price_npoint, npoint_moment, plan_windows, Series, TradeRecord, TradeTape, WindowSpec};

fn main() -> mbstat::Result<()> {
    let recs = (0..200)
        .filter(|t| t % 17 != 5) // a few missing ticks
        .map(|t| {
            let x = t as f64;
            TradeRecord::new(t, 20.0 + 3.0 * (x / 9.0).sin(), 2.0 + (x / 13.0).cos())
        })
        .collect::<mbstat::Result<Vec<_>>>()?;
    let tape = TradeTape::new(1.0, recs)?;
    let spec = WindowSpec::new(51, 50)?;

    for lags in [&[3i64][..], &[3, 7], &[2, 5, 11]] {
        println!("lags {lags:?}");
        for w in plan_windows(&tape, &spec) {
            println!(
                "  center {:>3}: C {:>12.3}  U {:>9.4}  p {:>10.4}",
                w.center_tick(),
                npoint_moment(&w, &tape, Series::Value, lags)?,
                npoint_moment(&w, &tape, Series::Volume, lags)?,
                market_price_npoint(&w, &tape, lags)?
            );
        }
    }
    Ok(())
}
