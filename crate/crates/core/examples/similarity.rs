//! MPCS_max of two spec files: `cargo run --example similarity -- a.gen b.gen`

use profgen_core::reducer::{mpcs_max_conditional, ConditionalOptions};
use profgen_core::spec_io::parse_dsl;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    let [a, b] = paths.as_slice() else {
        return Err("usage: similarity A.gen B.gen".into());
    };
    let (a, _) = parse_dsl(&std::fs::read_to_string(a)?)?;
    let (b, _) = parse_dsl(&std::fs::read_to_string(b)?)?;
    let report = mpcs_max_conditional(&a, &b, &ConditionalOptions::default())?;
    println!("{:.3}", report.result.value);
    Ok(())
}
