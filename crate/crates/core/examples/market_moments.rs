//! Frequency-based vs market-based price moments, VWAP and volatility on the
//! two small reference windows, then on a random one.
//!
//!     cargo run --example market_moments

use mbstat::{
    freq_moment, market_price_moment, market_volatility, vwap, MomentConfig, MomentReport, Series,
    TradeRecord,
};

fn show(name: &str, w: &[TradeRecord]) -> mbstat::Result<()> {
    println!("{name}: prices {:?}", w.iter().map(|r| r.price()).collect::<Vec<_>>());
    for n in 1..=3 {
        println!(
            "  n={n}  freq {:<8} market {:<20} C(n) {:<6} U(n) {}",
            freq_moment(w, Series::Price, n)?,
            market_price_moment(w, n)?,
            freq_moment(w, Series::Value, n)?,
            freq_moment(w, Series::Volume, n)?,
        );
    }
    let vol = market_volatility(w)?;
    println!("  vwap {}  market volatility {vol}{}", vwap(w)?, if vol < 0.0 { "  (negative)" } else { "" });
    Ok(())
}

fn main() -> mbstat::Result<()> {
    // equal volumes: market moments coincide with frequency moments
    let w1 = [TradeRecord::new(0, 10.0, 2.0)?, TradeRecord::new(1, 6.0, 2.0)?];
    // unequal volumes: volatility comes out negative
    let w2 = [TradeRecord::new(0, 10.0, 1.0)?, TradeRecord::new(1, 6.0, 3.0)?];
    show("W1", &w1)?;
    show("W2", &w2)?;

    // everything at once, as the stats subcommand reports it
    let w: Vec<TradeRecord> = (0..9)
        .map(|t| TradeRecord::from_price(t, 100.0 + (t as f64 * 1.7).sin(), 1.0 + (t % 4) as f64))
        .collect::<mbstat::Result<_>>()?;
    let report = MomentReport::compute(4, &w, &MomentConfig::new(4)?)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    println!("freq - market: {:?}", report.divergence());
    Ok(())
}
