//! Mean relative deviation of the proportional-rate allocation from the
//! optimum as every demand is scaled up.
//!
//! `cargo run --release --example bit_sweep -- [runs] [seed]`

use ehbcast::bench::{sweep_bits, sweep_to_csv};
use ehbcast::generator::GenParams;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(Ok(100), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    let multiples: Vec<u32> = (1..=10).collect();
    print!("{}", sweep_to_csv(&sweep_bits(&GenParams::baseline(), &multiples, runs, seed)?));
    Ok(())
}
