//! Degraded AWGN broadcast channel rates under superposition coding.
//!
//! Receivers are ranked by equivalent noise, strongest first. The receiver at
//! ladder position `n` decodes and cancels every weaker receiver's signal, so
//! only the power of stronger receivers acts as interference:
//!
//! ```text
//! r_n = B * log2(1 + P_n / (P_1 + ... + P_{n-1} + nu_n))
//! ```

use std::f64::consts::LN_2;

use crate::model::Scenario;

/// Receivers ordered by ascending equivalent noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLadder {
    noises_mw: Vec<f64>,
    /// `order[k]` is the scenario index of the receiver at ladder position `k`.
    order: Vec<usize>,
    ids: Vec<u32>,
}

impl NoiseLadder {
    /// Ranks receivers given in scenario order. Ties go to the lower id.
    pub fn new(noises_mw: &[f64], ids: &[u32]) -> Self {
        assert_eq!(noises_mw.len(), ids.len());
        let mut order: Vec<usize> = (0..noises_mw.len()).collect();
        order.sort_by(|&a, &b| noises_mw[a].total_cmp(&noises_mw[b]).then(ids[a].cmp(&ids[b])));
        Self {
            noises_mw: order.iter().map(|&i| noises_mw[i]).collect(),
            ids: order.iter().map(|&i| ids[i]).collect(),
            order,
        }
    }

    /// Ladder with receivers already in order, ids `1..=N`.
    pub fn from_sorted(noises_mw: &[f64]) -> Self {
        let ids: Vec<u32> = (1..=noises_mw.len() as u32).collect();
        Self::new(noises_mw, &ids)
    }

    pub fn len(&self) -> usize {
        self.noises_mw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noises_mw.is_empty()
    }

    pub fn noises_mw(&self) -> &[f64] {
        &self.noises_mw
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// Reorders per-receiver values from scenario order into ladder order.
    pub fn to_ladder<T: Copy>(&self, by_receiver: &[T]) -> Vec<T> {
        self.order.iter().map(|&i| by_receiver[i]).collect()
    }

    /// Reorders ladder-ordered values back into scenario order.
    pub fn to_scenario<T: Copy + Default>(&self, by_position: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); by_position.len()];
        for (pos, &i) in self.order.iter().enumerate() {
            out[i] = by_position[pos];
        }
        out
    }
}

/// Ranks the receivers of a validated scenario by equivalent noise.
pub fn order_receivers(scenario: &Scenario) -> NoiseLadder {
    let ids: Vec<u32> = scenario.receivers.iter().map(|r| r.id).collect();
    NoiseLadder::new(&scenario.equivalent_noises_mw(), &ids)
}

/// Per-receiver powers in ladder order (mW).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSplit(pub Vec<f64>);

impl PowerSplit {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }
}

/// `log2(1 + x)`, accurate for small `x`.
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// `2^x - 1`, accurate for small `x`.
pub(crate) fn exp2_m1(x: f64) -> f64 {
    (x * LN_2).exp_m1()
}

/// Boundary rates (bits/s) for each ladder position.
pub fn rates_of_split(split: &PowerSplit, ladder: &NoiseLadder, bandwidth_hz: f64) -> Vec<f64> {
    let mut interference = 0.0;
    split
        .0
        .iter()
        .zip(ladder.noises_mw())
        .map(|(&p, &nu)| {
            let r = bandwidth_hz * log2_1p(p / (interference + nu));
            interference += p;
            r
        })
        .collect()
}

/// Powers that achieve the given ladder-ordered rates exactly.
pub fn split_for_rates(rates: &[f64], ladder: &NoiseLadder, bandwidth_hz: f64) -> PowerSplit {
    let mut cumulative = 0.0;
    PowerSplit(
        rates
            .iter()
            .zip(ladder.noises_mw())
            .map(|(&r, &nu)| {
                let p = exp2_m1(r / bandwidth_hz) * (cumulative + nu);
                cumulative += p;
                p
            })
            .collect(),
    )
}

/// Powers achieving `r_n = ratio_n * leading_rate` at every ladder position.
/// No constraint on the total is imposed.
pub fn split_from_leading_rate(
    leading_rate: f64,
    rate_ratios: &[f64],
    ladder: &NoiseLadder,
    bandwidth_hz: f64,
) -> PowerSplit {
    let rates: Vec<f64> = rate_ratios.iter().map(|&k| k * leading_rate).collect();
    split_for_rates(&rates, ladder, bandwidth_hz)
}

/// Fills receivers strongest-first, each capped by its cut-off power; the
/// weakest receiver takes whatever is left.
pub fn cutoff_split(total_mw: f64, cutoffs_mw: &[f64]) -> PowerSplit {
    let mut remaining = total_mw.max(0.0);
    let mut powers = Vec::with_capacity(cutoffs_mw.len() + 1);
    for &cap in cutoffs_mw {
        let p = remaining.min(cap);
        powers.push(p);
        remaining = (remaining - p).max(0.0);
    }
    powers.push(remaining);
    PowerSplit(powers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rtol: f64) -> bool {
        (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn order_uses_ascending_noise() {
        let nu = [1e-3, 10f64.powf(-2.9), 10f64.powf(-2.8)];
        let ladder = NoiseLadder::new(&nu, &[1, 2, 3]);
        assert_eq!(ladder.ids(), &[1, 2, 3]);
        assert!((ladder.noises_mw()[1] - 1.2589254117941673e-3).abs() < 1e-15);
    }

    #[test]
    fn ties_broken_by_id() {
        let ladder = NoiseLadder::new(&[2.0, 2.0, 2.0], &[3, 1, 2]);
        assert_eq!(ladder.ids(), &[1, 2, 3]);
        assert_eq!(ladder.order(), &[1, 2, 0]);
    }

    #[test]
    fn swapped_noises_permute() {
        let ladder = NoiseLadder::new(&[2.0, 1.0], &[1, 2]);
        assert_eq!(ladder.ids(), &[2, 1]);
        assert_eq!(ladder.to_scenario(&[10.0, 20.0]), vec![20.0, 10.0]);
    }

    #[test]
    fn single_receiver_rate_is_log2_two() {
        let ladder = NoiseLadder::from_sorted(&[1.0, 1.0, 1.0]);
        let r = rates_of_split(&PowerSplit(vec![1.0, 0.0, 0.0]), &ladder, 1e6);
        assert_eq!(r, vec![1e6, 0.0, 0.0]);
    }

    #[test]
    fn two_receiver_closed_form() {
        let ladder = NoiseLadder::from_sorted(&[1.0, 1.0]);
        let r = rates_of_split(&PowerSplit(vec![1.0, 2.0]), &ladder, 1e6);
        assert!(close(r[0], 1e6, 1e-15) && close(r[1], 1e6, 1e-15), "{r:?}");
    }

    #[test]
    fn three_receiver_cutoff_split_rates() {
        // Frozen by direct evaluation of the rate formula.
        let nu = [1e-3, 10f64.powf(-2.9), 10f64.powf(-2.8)];
        let ladder = NoiseLadder::from_sorted(&nu);
        let r = rates_of_split(&PowerSplit(vec![0.0888, 0.2354, 0.1470]), &ladder, 1e6);
        let expected = [6488643.539854, 1853534.310778, 537264.231158];
        for (a, b) in r.iter().zip(expected) {
            assert!(close(*a, b, 1e-10), "{a} vs {b}");
        }
    }

    #[test]
    fn inverse_examples() {
        let ladder = NoiseLadder::from_sorted(&[1.0, 1.0]);
        assert_eq!(split_from_leading_rate(0.0, &[1.0, 1.0], &ladder, 1e6).0, vec![0.0, 0.0]);
        let p = split_from_leading_rate(1e6, &[1.0, 1.0], &ladder, 1e6);
        assert!(close(p.0[0], 1.0, 1e-14) && close(p.0[1], 2.0, 1e-14), "{p:?}");
        let single = NoiseLadder::from_sorted(&[1.0]);
        assert!(close(split_from_leading_rate(1e6, &[1.0], &single, 1e6).0[0], 1.0, 1e-14));
    }

    #[test]
    fn cutoff_fill_examples() {
        let pc = [0.0888, 0.2354];
        assert_eq!(cutoff_split(0.05, &pc).0, vec![0.05, 0.0, 0.0]);
        let s = cutoff_split(0.4712, &pc).0;
        assert_eq!(&s[..2], &pc);
        assert!((s[2] - 0.1470).abs() < 1e-12);
        let s = cutoff_split(0.2, &pc).0;
        assert_eq!(s[0], 0.0888);
        assert!((s[1] - 0.1112).abs() < 1e-12 && s[2] == 0.0, "{s:?}");
    }

    fn ladder_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-3f64..10.0, 1..5).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v
        })
    }

    proptest! {
        #[test]
        fn sum_rate_telescopes_under_equal_noise(
            nu in 1e-3f64..10.0,
            powers in prop::collection::vec(0.0f64..5.0, 1..6),
        ) {
            let ladder = NoiseLadder::from_sorted(&vec![nu; powers.len()]);
            let split = PowerSplit(powers);
            let sum: f64 = rates_of_split(&split, &ladder, 1e6).iter().sum();
            let expected = 1e6 * (1.0 + split.total() / nu).log2();
            prop_assert!(close(sum, expected, 1e-9), "{} vs {}", sum, expected);
        }

        #[test]
        fn rate_inversion_round_trips(nu in ladder_strategy(), seed in prop::collection::vec(0.0f64..3.0, 5)) {
            let ladder = NoiseLadder::from_sorted(&nu);
            let split = PowerSplit(seed[..nu.len()].to_vec());
            let rates = rates_of_split(&split, &ladder, 2e6);
            let back = split_for_rates(&rates, &ladder, 2e6);
            for (a, b) in back.0.iter().zip(&split.0) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-12), "{} vs {}", a, b);
            }
        }

        #[test]
        fn own_rate_monotone_in_own_power(
            nu in ladder_strategy(),
            seed in prop::collection::vec(0.0f64..3.0, 5),
            k in 0usize..5,
            bump in 0.0f64..1.0,
        ) {
            let ladder = NoiseLadder::from_sorted(&nu);
            let k = k % nu.len();
            let mut split = PowerSplit(seed[..nu.len()].to_vec());
            let before = rates_of_split(&split, &ladder, 1e6)[k];
            split.0[k] += bump;
            prop_assert!(rates_of_split(&split, &ladder, 1e6)[k] >= before);
        }

        #[test]
        fn cutoff_split_respects_caps(total in 0.0f64..10.0, caps in prop::collection::vec(1e-3f64..3.0, 0..4)) {
            let s = cutoff_split(total, &caps);
            prop_assert_eq!(s.0.len(), caps.len() + 1);
            prop_assert!((s.total() - total).abs() <= 1e-12 * total.max(1.0));
            for (p, c) in s.0.iter().zip(&caps) {
                prop_assert!(*p <= *c && *p >= 0.0);
            }
        }
    }
}
