//! Cross-checks the fast solver against the grid oracles on a small
//! single-receiver instance and a two-receiver cut-off.
//!
//! `cargo run --release --example oracle_check`

use ehbcast::model::Timeline;
use ehbcast::rate::NoiseLadder;
use ehbcast::schedule::{min_completion_time_on, solve_cutoffs, PowerProfile};
use ehbcast::testkit::{oracle_cutoff_two_rx, oracle_min_time_refined};

fn main() -> anyhow::Result<()> {
    let timeline = Timeline::from_pairs([(0.0, 0.5), (0.6, 1.5), (1.4, 0.8)]);
    let ladder = NoiseLadder::from_sorted(&[1.0]);
    let demand = 2.5e6;
    let plan = min_completion_time_on(&timeline, &[demand], &ladder, 1e6)?;
    let oracle = oracle_min_time_refined(&timeline, demand, 1.0, 1e6, 6.0, 200)?;
    println!("single receiver: solver {:.6} s, oracle {oracle:.6} s", plan.completion_time_s);

    let profile = PowerProfile::from_breakpoints(&[0.0, 1.0], &[3.0]);
    let ladder = NoiseLadder::from_sorted(&[1.0, 1.0]);
    let cutoffs = solve_cutoffs(&profile, &[1e6, 1e6], &ladder, 1e6)?;
    let pc = oracle_cutoff_two_rx(&profile, 1e6, 1.0, 1e6, 100);
    println!("cut-off: solver {:.6} mW, oracle {pc:.6} mW", cutoffs.0[0]);
    Ok(())
}
