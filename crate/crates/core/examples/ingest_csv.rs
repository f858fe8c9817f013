//! Parse a tape from CSV, merge same-tick trades, and map raw timestamps onto
//! the tick grid.
//!
//!     cargo run --example ingest_csv

use mbstat::tape::bucket_timed;
use mbstat::{parse_csv, CsvFormat};

fn main() -> mbstat::Result<()> {
    // two trades share tick 2; they are summed
    let text = "tick,value,volume\n0,100,10\n2,51,5\n2,49.5,5\n3,80,8\n";
    let tape = parse_csv(text.as_bytes(), CsvFormat::TickValueVolume, 1.0)?;
    for r in tape.records() {
        println!("tick {:>2}  C {:>6}  U {:>4}  p {}", r.tick(), r.value(), r.volume(), r.price());
    }

    // price,volume columns; value is derived
    let pv = parse_csv("tick,price,volume\n0,10,3\n1,11,2\n".as_bytes(), CsvFormat::TickPriceVolume, 1.0)?;
    println!("from prices: {:?}", pv.records().iter().map(|r| r.value()).collect::<Vec<_>>());

    // timestamps in seconds on a 0.5 s grid
    let trades = [(0.1, 20.0, 2.0), (0.4, 30.0, 3.0), (1.26, 12.0, 1.0)];
    let timed = bucket_timed(&trades, 0.5)?;
    for r in timed.records() {
        println!("t = {:.1}s  C {}  U {}", r.tick() as f64 * timed.epsilon(), r.value(), r.volume());
    }

    // bad rows name their line
    match parse_csv("tick,value,volume\n0,1,1\n1,-3,1\n".as_bytes(), CsvFormat::TickValueVolume, 1.0) {
        Ok(_) => println!("unexpectedly parsed"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
