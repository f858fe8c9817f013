//! When one of B_C, B_U has decayed, B_p follows from the other in closed
//! form. Compare the closed forms with the full expression on one window.
//!
//!     cargo run --example regime_formulas

use mbstat::{lag_pairs, plan_windows, regime_acf, LagStats, Regime, TradeRecord, TradeTape, WindowSpec};

fn main() -> mbstat::Result<()> {
    let recs = (0..60)
        .map(|t| {
            let x = t as f64;
            TradeRecord::new(t, 50.0 + 10.0 * (x / 7.0).sin(), 5.0 + 2.0 * (x / 3.0).cos())
        })
        .collect::<mbstat::Result<Vec<_>>>()?;
    let tape = TradeTape::new(1.0, recs)?;
    let spec = WindowSpec::new(21, 21)?;
    let window = plan_windows(&tape, &spec)[0];

    for lag in [1, 5, 10] {
        let s = LagStats::from_pairs(&lag_pairs(&window, &tape, lag)?)?;
        println!("lag {lag:>2}: B_C {:>10.4}  B_U {:>8.4}  B_p {:>9.5}", s.b_value(), s.b_volume(), s.b_price());

        // volume-dominated: pretend B_C = 0 by moving C(t,t+tau) onto C1 C1'
        let v = LagStats::from_moments(
            s.c1_now * s.c1_lagged,
            s.lag2_volume,
            s.c1_now,
            s.c1_lagged,
            s.u1_now,
            s.u1_lagged,
        );
        println!(
            "   B_C = 0: full {:>10.6}  closed form {:>10.6}",
            v.b_price(),
            regime_acf(Regime::VolumeDominated, v.b_volume(), &v)?
        );

        let c = LagStats::from_moments(
            s.lag2_value,
            s.u1_now * s.u1_lagged,
            s.c1_now,
            s.c1_lagged,
            s.u1_now,
            s.u1_lagged,
        );
        println!(
            "   B_U = 0: full {:>10.6}  closed form {:>10.6}",
            c.b_price(),
            regime_acf(Regime::ValueDominated, c.b_value(), &c)?
        );
    }
    Ok(())
}
