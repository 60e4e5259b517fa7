use ehbcast::allocation::AllocationPolicyId;
use ehbcast::bench::{table2_policies, PreparedRun};
use ehbcast::generator::{GenParams, GeneratedScenario};
use ehbcast::model::{merge_arrivals, ChannelSpec, EnergyArrival, ReceiverDemand, Scenario, TransmitterProfile};
use ehbcast::rate::order_receivers;
use ehbcast::schedule::{causality_violation, departure_bits, min_completion_time, min_completion_time_on};
use ehbcast::switching::simulate_switching;
use proptest::prelude::*;

fn prepared(seed: u64, run: u64) -> PreparedRun {
    PreparedRun::new(GeneratedScenario::new(GenParams::baseline().with_seed(seed), run, 32.0).unwrap()).unwrap()
}

fn arrivals_strategy() -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
    (0.0..2.0f64, prop::collection::vec((0.01..5.0f64, 0.01..2.0f64), 0..6)).prop_map(|(e0, mut raw)| {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        raw.dedup_by(|a, b| a.0 == b.0);
        (e0, raw)
    })
}

fn scenario_from(txs: &[(f64, Vec<(f64, f64)>)], demands: &[f64]) -> Scenario {
    Scenario {
        transmitters: txs
            .iter()
            .enumerate()
            .map(|(i, (e0, arr))| {
                TransmitterProfile::new(i as u32 + 1, *e0, arr.iter().map(|&(t, e)| EnergyArrival::new(t, e)).collect())
            })
            .collect(),
        receivers: demands.iter().enumerate().map(|(i, &bits)| ReceiverDemand { id: i as u32 + 1, bits }).collect(),
        channel: ChannelSpec::uniform(
            1e6,
            txs.len(),
            &(0..demands.len()).map(|n| n as f64).collect::<Vec<_>>(),
            &vec![1e-9; demands.len()],
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merged_timeline_ignores_transmitter_order(
        txs in prop::collection::vec(arrivals_strategy(), 1..4),
        rotate in 0usize..4,
    ) {
        let a = scenario_from(&txs, &[1e6]);
        let mut shuffled = txs.clone();
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        let b = scenario_from(&shuffled, &[1e6]);
        prop_assert_eq!(merge_arrivals(&a), merge_arrivals(&b));
        let total: f64 = txs.iter().map(|(e0, arr)| e0 + arr.iter().map(|p| p.1).sum::<f64>()).sum();
        prop_assert!((merge_arrivals(&a).total_energy() - total).abs() <= 1e-12 * total.max(1.0));
    }

    #[test]
    fn optimal_plan_meets_demands_causally(
        txs in prop::collection::vec(arrivals_strategy(), 1..3),
        demands in prop::collection::vec(1e4..3e6f64, 1..4),
    ) {
        let scenario = scenario_from(&txs, &demands);
        prop_assume!(scenario.validate().is_ok());
        let timeline = merge_arrivals(&scenario);
        prop_assume!(timeline.total_energy() > 0.01);
        let plan = match min_completion_time(&scenario) {
            Ok(plan) => plan,
            Err(_) => return Ok(()),
        };
        prop_assert!(causality_violation(plan.staircase.profile(), &timeline) <= 1e-9);
        let levels = plan.staircase.levels();
        prop_assert!(levels.windows(2).all(|w| w[1] > w[0]));
        let bits = departure_bits(plan.staircase.profile(), &plan.cutoffs, &plan.ladder, 1e6);
        for (got, want) in bits.iter().zip(&plan.demands) {
            prop_assert!(*got >= want * (1.0 - 1e-6), "{} < {}", got, want);
        }
    }

    #[test]
    fn more_bits_never_finish_sooner(seed in any::<u64>(), scale in 1.01..3.0f64) {
        let prep = prepared(seed, 0);
        let ladder = order_receivers(prep.scenario());
        let bigger: Vec<f64> = prep.plan.demands.iter().map(|d| d * scale).collect();
        let later = min_completion_time_on(&prep.timeline, &bigger, &ladder, 1e6).unwrap();
        prop_assert!(later.completion_time_s >= prep.plan.completion_time_s);
    }

    #[test]
    fn no_allocation_beats_the_optimum(seed in any::<u64>(), run in 0u64..1000) {
        let prep = prepared(seed, run);
        for policy in AllocationPolicyId::ALL {
            let alloc = prep.allocate(policy).unwrap();
            prop_assert!(alloc.completion_time_s >= prep.plan.completion_time_s * (1.0 - 1e-8));
            for (got, want) in alloc.delivered_bits().iter().zip(&prep.plan.demands) {
                prop_assert!((got - want).abs() <= 1e-6 * want);
            }
        }
    }

    #[test]
    fn switching_conserves_energy_and_coverage(seed in any::<u64>(), run in 0u64..1000) {
        let prep = prepared(seed, run);
        let params = GenParams::baseline();
        let deadline = prep.allocate(AllocationPolicyId::Proposed).unwrap().completion_time_s;
        let harvested: f64 = prep
            .scenario()
            .transmitters
            .iter()
            .map(|t| t.initial_energy_mj + t.arrivals.iter().filter(|a| a.time_s <= deadline).map(|a| a.amount_mj).sum::<f64>())
            .sum();
        let mut coverage = None;
        for policy in table2_policies(&params, seed, run) {
            let log = simulate_switching(prep.scenario(), &prep.profile, deadline, &policy).unwrap();
            let spent: f64 = log
                .segments
                .iter()
                .filter(|s| s.worker.is_some())
                .map(|s| prep.profile.energy_until(s.end_s) - prep.profile.energy_until(s.start_s))
                .sum();
            let left: f64 = log.batteries_mj.iter().sum();
            prop_assert!(log.batteries_mj.iter().all(|&b| b >= -1e-9));
            prop_assert!((harvested - left - spent).abs() <= 1e-9, "{} vs {}", harvested - left, spent);
            let covered = log.working_time();
            match coverage {
                None => coverage = Some(covered),
                Some(c) => prop_assert!((covered - c).abs() <= 1e-9),
            }
            let ordered = log.segments.windows(2).all(|w| w[0].end_s <= w[1].start_s + 1e-15);
            prop_assert!(ordered);
        }
    }

    #[test]
    fn generation_is_prefix_stable(seed in any::<u64>(), run in 0u64..100, short in 0.5..5.0f64) {
        let params = GenParams::baseline().with_seed(seed);
        let a = GeneratedScenario::new(params.clone(), run, short).unwrap();
        let b = GeneratedScenario::new(params, run, short * 3.0).unwrap();
        prop_assert_eq!(a.scenario, b.truncated(short));
    }
}
