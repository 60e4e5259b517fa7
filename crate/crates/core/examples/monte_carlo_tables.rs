//! Average completion times per allocation policy and average switch counts
//! per switching policy over random harvests.
//!
//! `cargo run --release --example monte_carlo_tables -- [runs] [seed]`

use ehbcast::bench::{reports_to_csv, run_table1, run_table2};
use ehbcast::generator::GenParams;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(Ok(200), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    let params = GenParams::baseline();

    println!("completion time (s)");
    print!("{}", reports_to_csv(&run_table1(&params, runs, seed)?));
    println!("\nswitches");
    print!("{}", reports_to_csv(&run_table2(&params, runs, seed)?));
    Ok(())
}
