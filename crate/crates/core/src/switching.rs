//! Which transmitter carries the broadcast at each instant.
//!
//! The total power schedule fixes how fast energy is drawn; only one
//! transmitter works at a time and drains its own battery at the current
//! level. Harvests reach their owner's battery as they arrive, so a worker
//! that harvests before it runs dry simply keeps working. When the worker's
//! battery empties another transmitter takes over, chosen by a
//! [`SwitchPolicyId`].

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Scenario, TransmitterProfile};
use crate::schedule::PowerProfile;

/// Batteries at or below this level (mJ) are treated as empty.
pub const EMPTY_BATTERY_MJ: f64 = 1e-12;
/// Overdraw tolerated before an empty battery is clamped back to zero.
pub const BATTERY_SLACK_MJ: f64 = 1e-9;
/// Depletions this close to another event are treated as simultaneous.
pub const SIMULTANEITY_S: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SwitchPolicyId {
    /// Full transmitters first, otherwise the fullest battery.
    Proposed,
    /// The transmitter with the least energy.
    EnergyMinimum,
    /// Cyclic order over transmitter ids.
    FixedOrder(Vec<u32>),
    /// Uniformly random among the other transmitters with energy.
    Stochastic { seed: u64 },
}

impl SwitchPolicyId {
    pub fn label(&self) -> String {
        match self {
            SwitchPolicyId::Proposed => "Proposed".into(),
            SwitchPolicyId::EnergyMinimum => "EM".into(),
            SwitchPolicyId::FixedOrder(order) => {
                let mut s = String::from("FO");
                for id in order {
                    write!(s, "{id}").unwrap();
                }
                s
            }
            SwitchPolicyId::Stochastic { .. } => "SS".into(),
        }
    }
}

impl fmt::Display for SwitchPolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fullness {
    Full,
    Partial,
}

/// A transmitter is full once it has no harvest left in `(now, deadline)`.
pub fn classify_full(transmitter: &TransmitterProfile, now: f64, deadline: f64) -> Fullness {
    let pending = transmitter.arrivals.iter().any(|a| a.time_s > now && a.time_s < deadline);
    if pending {
        Fullness::Partial
    } else {
        Fullness::Full
    }
}

/// Mutable simulation state. Indices refer to positions in the scenario's
/// transmitter list.
#[derive(Debug, Clone)]
pub struct EngineState<'a> {
    pub transmitters: &'a [TransmitterProfile],
    pub clock: f64,
    pub batteries: Vec<f64>,
    /// Next unharvested arrival per transmitter.
    pub cursors: Vec<usize>,
    pub worker: Option<usize>,
    /// Most recent worker, kept across idle gaps.
    pub previous: Option<usize>,
    pub level_mw: f64,
    pub deadline: f64,
}

impl<'a> EngineState<'a> {
    pub fn new(transmitters: &'a [TransmitterProfile], deadline: f64) -> Self {
        Self {
            transmitters,
            clock: 0.0,
            batteries: transmitters.iter().map(|t| t.initial_energy_mj).collect(),
            cursors: vec![0; transmitters.len()],
            worker: None,
            previous: None,
            level_mw: 0.0,
            deadline,
        }
    }

    pub fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.batteries.len()).filter(|&i| self.batteries[i] > EMPTY_BATTERY_MJ)
    }

    fn id(&self, idx: usize) -> u32 {
        self.transmitters[idx].id
    }

    fn next_arrival(&self) -> f64 {
        self.transmitters
            .iter()
            .zip(&self.cursors)
            .filter_map(|(t, &c)| t.arrivals.get(c).map(|a| a.time_s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Credits every arrival at or before `t`.
    fn harvest_until(&mut self, t: f64) {
        for (i, tx) in self.transmitters.iter().enumerate() {
            while let Some(a) = tx.arrivals.get(self.cursors[i]) {
                if a.time_s > t {
                    break;
                }
                self.batteries[i] += a.amount_mj;
                self.cursors[i] += 1;
            }
        }
    }
}

/// Picks the next worker among transmitters holding energy, or `None` when
/// every battery is empty. Ties always go to the lowest id.
pub fn choose_next<R: Rng>(policy: &SwitchPolicyId, state: &EngineState<'_>, rng: &mut R) -> Option<usize> {
    let candidates: Vec<usize> = state.candidates().collect();
    if candidates.is_empty() {
        return None;
    }
    let by_id = |a: &usize, b: &usize| state.id(*a).cmp(&state.id(*b));
    match policy {
        SwitchPolicyId::Proposed => {
            let full = candidates
                .iter()
                .copied()
                .filter(|&i| classify_full(&state.transmitters[i], state.clock, state.deadline) == Fullness::Full)
                .min_by(by_id);
            full.or_else(|| {
                candidates
                    .iter()
                    .copied()
                    .min_by(|a, b| state.batteries[*b].total_cmp(&state.batteries[*a]).then(by_id(a, b)))
            })
        }
        SwitchPolicyId::EnergyMinimum => candidates
            .iter()
            .copied()
            .min_by(|a, b| state.batteries[*a].total_cmp(&state.batteries[*b]).then(by_id(a, b))),
        SwitchPolicyId::FixedOrder(order) => {
            let positions: Vec<usize> =
                order.iter().filter_map(|id| state.transmitters.iter().position(|t| t.id == *id)).collect();
            let start = state
                .worker
                .or(state.previous)
                .and_then(|w| positions.iter().position(|&p| p == w))
                .map_or(0, |k| k + 1);
            (0..positions.len()).map(|k| positions[(start + k) % positions.len()]).find(|i| candidates.contains(i))
        }
        SwitchPolicyId::Stochastic { .. } => {
            let current = state.worker.or(state.previous);
            let others: Vec<usize> = candidates.iter().copied().filter(|&i| Some(i) != current).collect();
            let pool = if others.is_empty() { &candidates } else { &others };
            Some(pool[rng.random_range(0..pool.len())])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Working transmitter id, `None` while idle.
    pub worker: Option<u32>,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SwitchLog {
    pub segments: Vec<Segment>,
    pub switch_count: usize,
    /// Battery contents at the deadline, in scenario transmitter order, with
    /// every harvest at or before the deadline credited.
    pub batteries_mj: Vec<f64>,
}

impl SwitchLog {
    pub fn from_segments(segments: Vec<Segment>) -> Self {
        let switch_count = count_switches(&segments);
        Self { segments, switch_count, batteries_mj: Vec::new() }
    }

    /// Time during which some transmitter was working.
    pub fn working_time(&self) -> f64 {
        self.segments.iter().filter(|s| s.worker.is_some()).map(|s| s.end_s - s.start_s).sum()
    }

    /// CSV `worker_id,start_s,end_s`; idle gaps use `idle` as the worker.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("worker_id,start_s,end_s\n");
        for s in &self.segments {
            match s.worker {
                Some(id) => writeln!(out, "{id},{},{}", s.start_s, s.end_s).unwrap(),
                None => writeln!(out, "idle,{},{}", s.start_s, s.end_s).unwrap(),
            }
        }
        out
    }
}

/// Changes of working transmitter; idle gaps are skipped and the first
/// selection is free.
pub fn count_switches(segments: &[Segment]) -> usize {
    let workers: Vec<u32> = segments.iter().filter_map(|s| s.worker).collect();
    workers.windows(2).filter(|w| w[0] != w[1]).count()
}

struct SegmentRecorder {
    segments: Vec<Segment>,
    current: Option<u32>,
    since: f64,
}

impl SegmentRecorder {
    fn set(&mut self, worker: Option<u32>, at: f64) {
        if worker != self.current {
            self.close(at);
            self.current = worker;
            self.since = at;
        }
    }

    fn close(&mut self, at: f64) {
        if at > self.since {
            self.segments.push(Segment { worker: self.current, start_s: self.since, end_s: at });
        }
        self.since = at;
    }
}

/// Runs the switching simulation over `(0, deadline]`.
pub fn simulate_switching(
    scenario: &Scenario,
    profile: &PowerProfile,
    deadline: f64,
    policy: &SwitchPolicyId,
) -> Result<SwitchLog> {
    let seed = match policy {
        SwitchPolicyId::Stochastic { seed } => *seed,
        _ => 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = EngineState::new(&scenario.transmitters, deadline);
    let epochs = profile.epochs();
    let mut epoch = 0;
    state.level_mw = profile.level_at(0.0);
    state.worker = choose_next(policy, &state, &mut rng);
    let mut rec = SegmentRecorder { segments: Vec::new(), current: state.worker.map(|w| state.id(w)), since: 0.0 };

    while state.clock < deadline {
        while epoch < epochs.len() && epochs[epoch].end_s <= state.clock {
            epoch += 1;
        }
        let level_change = epochs.get(epoch).map_or(f64::INFINITY, |e| e.end_s);
        let scheduled = state.next_arrival().min(level_change).min(deadline);
        let level = state.level_mw;

        let mut next = scheduled;
        if let Some(w) = state.worker {
            if level > 0.0 {
                let depletion = state.clock + state.batteries[w] / level;
                if depletion < scheduled - SIMULTANEITY_S {
                    next = depletion;
                }
            }
        } else if level > 0.0 && next - state.clock > SIMULTANEITY_S {
            return Err(Error::ScheduleGap { time_s: state.clock, level_mw: level });
        }

        if let Some(w) = state.worker {
            state.batteries[w] -= level * (next - state.clock);
            if state.batteries[w] < -BATTERY_SLACK_MJ {
                return Err(Error::ScheduleGap { time_s: next, level_mw: level });
            }
        }
        state.clock = next;
        state.harvest_until(next);
        state.level_mw = profile.level_at(next);

        if let Some(w) = state.worker {
            if state.batteries[w] <= EMPTY_BATTERY_MJ {
                state.batteries[w] = 0.0;
                state.previous = Some(w);
                state.worker = None;
            }
        }
        if state.worker.is_none() && state.clock < deadline {
            state.worker = choose_next(policy, &state, &mut rng);
            if state.worker.is_some() {
                state.previous = state.worker;
            }
        }
        rec.set(state.worker.map(|w| state.id(w)), state.clock);
    }
    rec.close(deadline);
    state.harvest_until(deadline);
    Ok(SwitchLog { batteries_mj: state.batteries.clone(), ..SwitchLog::from_segments(rec.segments) })
}
