//! Generate a seeded synthetic tape and check its log-level autocorrelation
//! against the AR(1) curve it was built from.
//!
//!     cargo run --release --example synth_tape

use mbstat::{gen_tape, theoretical_log_acf, SynthMode, SynthParams};

fn log_acf(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len() - lag;
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (0..n).map(|i| (xs[i] - mean) * (xs[i + lag] - mean)).sum::<f64>() / n as f64
}

fn main() -> mbstat::Result<()> {
    let params = SynthParams {
        mode: SynthMode::ValueVolume,
        length_ticks: 100_000,
        persistence_a_ticks: 5.0,
        persistence_b_ticks: 50.0,
        seed: 1,
        ..SynthParams::default()
    };
    let tape = gen_tape(&params)?;
    println!("{}", tape.to_csv_string().lines().take(4).collect::<Vec<_>>().join("\n"));

    let log_c: Vec<f64> = tape.records().iter().map(|r| r.value().ln()).collect();
    let log_u: Vec<f64> = tape.records().iter().map(|r| r.volume().ln()).collect();
    println!("{:>4} {:>10} {:>10} {:>10} {:>10}", "lag", "lnC", "model", "lnU", "model");
    for lag in [0usize, 2, 5, 10, 25, 50, 100] {
        println!(
            "{lag:>4} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            log_acf(&log_c, lag),
            theoretical_log_acf(params.persistence_a_ticks, params.sigma_a, lag as i64),
            log_acf(&log_u, lag),
            theoretical_log_acf(params.persistence_b_ticks, params.sigma_b, lag as i64),
        );
    }
    Ok(())
}
