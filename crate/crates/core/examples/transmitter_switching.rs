//! Which transmitter carries the broadcast, and how often it changes, under
//! each switching rule.
//!
//! `cargo run --example transmitter_switching -- [seed]`

use ehbcast::allocation::AllocationPolicyId;
use ehbcast::bench::{table2_policies, PreparedRun};
use ehbcast::generator::{GenParams, GeneratedScenario};
use ehbcast::switching::simulate_switching;

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let params = GenParams::baseline().with_seed(seed);
    let run = PreparedRun::new(GeneratedScenario::new(params.clone(), 0, 32.0)?)?;
    let deadline = run.allocate(AllocationPolicyId::Proposed)?.completion_time_s;
    println!("deadline {deadline:.6} s");

    for policy in table2_policies(&params, seed, 0) {
        let log = simulate_switching(run.scenario(), &run.profile, deadline, &policy)?;
        println!("{:<9} {:>3} switches, {:.6} s working", policy.label(), log.switch_count, log.working_time());
    }

    let log = simulate_switching(run.scenario(), &run.profile, deadline, &table2_policies(&params, seed, 0)[0])?;
    println!("\nfirst segments of the proposed rule:");
    for line in log.to_csv().lines().take(8) {
        println!("  {line}");
    }
    Ok(())
}
