//! Plan moving windows over a tape with gaps and inspect their members.
//!
//!     cargo run --example windowing

use mbstat::{members, plan_windows, TradeRecord, TradeTape, WindowSpec};

fn main() -> mbstat::Result<()> {
    let ticks = [0, 1, 2, 3, 4, 5, 9, 10, 11, 12, 13, 14, 15, 16];
    let recs = ticks
        .iter()
        .map(|&t| TradeRecord::new(t, 10.0 + t as f64, 1.0))
        .collect::<mbstat::Result<Vec<_>>>()?;
    let tape = TradeTape::new(1.0, recs)?;

    // N = 5 ticks, centers every 2 ticks, at least 3 trades per window
    let spec = WindowSpec::new(5, 2)?.with_min_trades(3)?;
    println!("N = {}, h = {}, step = {}", spec.width(), spec.half_width(), spec.lag_step_ticks());
    for w in plan_windows(&tape, &spec) {
        let ticks: Vec<i64> = members(&w, &tape).iter().map(|r| r.tick()).collect();
        println!(
            "center {:>2}  span [{:>2}, {:>2}]  count {}  {}  {:?}",
            w.center_tick(),
            w.first_tick(),
            w.last_tick(),
            w.count(),
            if w.is_valid() { "valid  " } else { "flagged" },
            ticks
        );
    }
    Ok(())
}
