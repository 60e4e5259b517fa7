//! Proportional-rate allocation against the cut-off optimum on one random
//! scenario.
//!
//! `cargo run --example proposed_vs_optimal -- [seed]`

use ehbcast::allocation::{optimal_allocation, relative_deviation, AllocationPolicyId};
use ehbcast::bench::PreparedRun;
use ehbcast::generator::{GenParams, GeneratedScenario};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let generated = GeneratedScenario::new(GenParams::baseline().with_seed(seed), 0, 32.0)?;
    let run = PreparedRun::new(generated)?;

    let optimal = optimal_allocation(&run.plan)?;
    let proposed = run.allocate(AllocationPolicyId::Proposed)?;
    println!("optimal  {:.9} s  finish {:?}", optimal.completion_time_s, optimal.finish_times_s);
    println!("proposed {:.9} s  finish {:?}", proposed.completion_time_s, proposed.finish_times_s);
    println!("relative deviation {:.3e}", relative_deviation(proposed.completion_time_s, optimal.completion_time_s));
    Ok(())
}
