//! Truncated characteristic function from market-based moments, against the
//! empirical one on a unit-volume window.
//!
//!     cargo run --example characteristic_function

use mbstat::{char_fn_taylor, TradeRecord};
use num_complex::Complex64;

fn main() -> mbstat::Result<()> {
    let prices = [0.3, 1.1, 0.8, 1.9, 0.5, 1.4, 0.95];
    let w: Vec<TradeRecord> = prices
        .iter()
        .enumerate()
        .map(|(t, &p)| TradeRecord::from_price(t as i64, p, 1.0))
        .collect::<mbstat::Result<_>>()?;
    let pmax = prices.iter().cloned().fold(0.0, f64::max);

    println!("{:>6} {:>3} {:>24} {:>10} {:>10}", "x", "K", "taylor", "|err|", "bound");
    for &x in &[0.1, 0.25, 0.5] {
        let exact: Complex64 =
            prices.iter().map(|&p| Complex64::new(0.0, p * x).exp()).sum::<Complex64>() / prices.len() as f64;
        for k in [2u32, 4, 8] {
            let approx = char_fn_taylor(&w, x, k)?;
            let bound = (pmax * x).powi(k as i32 + 1) / (1..=k + 1).map(f64::from).product::<f64>();
            println!(
                "{x:>6} {k:>3} {:>11.8}{:+.8}i {:>10.2e} {:>10.2e}",
                approx.re,
                approx.im,
                (approx - exact).norm(),
                bound
            );
        }
    }
    Ok(())
}
