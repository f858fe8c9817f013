//! Autocorrelations of value, volume and price over lags, with detected
//! correlation scales, on a synthetic tape with known persistence.
//!
//!     cargo run --release --example price_autocorrelation

use mbstat::{acf_curve, gen_tape, AcfOptions, Aggregate, SynthMode, SynthParams, WindowSpec};

fn main() -> mbstat::Result<()> {
    let params = SynthParams {
        mode: SynthMode::PriceVolume,
        length_ticks: 20_000,
        persistence_a_ticks: 10.0,
        persistence_b_ticks: 40.0,
        seed: 3,
        ..SynthParams::default()
    };
    let tape = gen_tape(&params)?;

    // N = 1001, centers every 5 ticks, lags 0..200, pooled over centers
    let spec = WindowSpec::new(1001, 5)?;
    let curve = acf_curve(&tape, &spec, &AcfOptions::new(200, Aggregate::Mean))?;
    println!("{} windows", curve.windows_valid);
    println!("{:>4} {:>12} {:>12} {:>12}", "lag", "B_C", "B_U", "B_p");
    for p in curve.points.iter().step_by(4) {
        println!("{:>4} {:>12.5e} {:>12.5e} {:>12.5e}", p.lag_ticks, p.b_value, p.b_volume, p.b_price);
    }
    for s in &curve.scales {
        println!(
            "scales at {:.0}% of lag 0: tau_C {:?}  tau_U {:?}  tau_p {:?}",
            curve.options.threshold * 100.0,
            s.tau_value,
            s.tau_volume,
            s.tau_price
        );
    }
    Ok(())
}
