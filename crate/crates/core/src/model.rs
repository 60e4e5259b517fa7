//! Domain types for the multi-transmitter, multi-receiver broadcast system.
//!
//! Units are fixed across the crate: seconds, mJ, mW (= mJ/s), bits and Hz.
//! Rates are in bits/s. Noise power spectral densities in scenario files are
//! in W/Hz and path losses in dB; both are folded into a per-receiver
//! *equivalent noise* `nu = N * B / h` expressed in mW.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ValidationErrors, Violation};

/// Relative tolerance used when checking that every transmitter sees the same
/// equivalent noise at a given receiver.
pub const UNIFORM_CHANNEL_RTOL: f64 = 1e-9;

/// Converts a path loss in dB to a linear power gain.
pub fn db_to_gain(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Converts a linear power gain back to a path loss in dB.
pub fn gain_to_db(gain: f64) -> f64 {
    -10.0 * gain.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyArrival {
    pub time_s: f64,
    pub amount_mj: f64,
}

impl EnergyArrival {
    pub fn new(time_s: f64, amount_mj: f64) -> Self {
        Self { time_s, amount_mj }
    }
}

/// One energy-harvesting transmitter: its starting battery and the harvests
/// it will receive, known in advance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterProfile {
    pub id: u32,
    pub initial_energy_mj: f64,
    pub arrivals: Vec<EnergyArrival>,
}

impl TransmitterProfile {
    pub fn new(id: u32, initial_energy_mj: f64, arrivals: Vec<EnergyArrival>) -> Self {
        Self { id, initial_energy_mj, arrivals }
    }

    /// Total energy harvested strictly before `t`, initial battery included.
    pub fn energy_before(&self, t: f64) -> f64 {
        self.initial_energy_mj + self.arrivals.iter().take_while(|a| a.time_s < t).map(|a| a.amount_mj).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverDemand {
    pub id: u32,
    pub bits: f64,
}

/// Channel parameters, indexed `[transmitter][receiver]` in scenario order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub bandwidth_hz: f64,
    /// Linear power gains `h_mn`.
    pub path_gain: Vec<Vec<f64>>,
    /// Noise power spectral densities `N_mn` in W/Hz.
    pub noise_psd: Vec<Vec<f64>>,
}

impl ChannelSpec {
    /// Builds a channel where every transmitter has the same losses and
    /// noise towards each receiver.
    pub fn uniform(bandwidth_hz: f64, transmitters: usize, path_loss_db: &[f64], noise_psd: &[f64]) -> Self {
        let gains: Vec<f64> = path_loss_db.iter().copied().map(db_to_gain).collect();
        Self { bandwidth_hz, path_gain: vec![gains; transmitters], noise_psd: vec![noise_psd.to_vec(); transmitters] }
    }

    /// Equivalent noise `N * B / h` in mW for transmitter index `m` and receiver index `n`.
    pub fn equivalent_noise_mw(&self, m: usize, n: usize) -> f64 {
        self.noise_psd[m][n] * self.bandwidth_hz * 1e3 / self.path_gain[m][n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub transmitters: Vec<TransmitterProfile>,
    pub receivers: Vec<ReceiverDemand>,
    pub channel: ChannelSpec,
}

impl Scenario {
    pub fn bandwidth_hz(&self) -> f64 {
        self.channel.bandwidth_hz
    }

    /// Equivalent noise per receiver (scenario order), taken from the first
    /// transmitter. Only meaningful for a validated scenario.
    pub fn equivalent_noises_mw(&self) -> Vec<f64> {
        (0..self.receivers.len()).map(|n| self.channel.equivalent_noise_mw(0, n)).collect()
    }

    pub fn demands(&self) -> Vec<f64> {
        self.receivers.iter().map(|r| r.bits).collect()
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), ValidationErrors> {
        let mut errs = Vec::new();
        let (m_count, n_count) = (self.transmitters.len(), self.receivers.len());
        if m_count == 0 {
            errs.push(Violation::NoTransmitters);
        }
        if n_count == 0 {
            errs.push(Violation::NoReceivers);
        }

        let mut seen = HashSet::new();
        for tx in &self.transmitters {
            if !seen.insert(tx.id) {
                errs.push(Violation::DuplicateTransmitterId(tx.id));
            }
            if !tx.initial_energy_mj.is_finite() {
                errs.push(Violation::NonFinite { what: "initial_energy_mj" });
            } else if tx.initial_energy_mj < 0.0 {
                errs.push(Violation::NegativeInitialEnergy { transmitter: tx.id, energy_mj: tx.initial_energy_mj });
            }
            for (i, a) in tx.arrivals.iter().enumerate() {
                if !a.time_s.is_finite() || !a.amount_mj.is_finite() {
                    errs.push(Violation::NonFinite { what: "arrivals" });
                    continue;
                }
                if a.time_s <= 0.0 {
                    errs.push(Violation::NonPositiveArrivalTime { transmitter: tx.id, index: i, time_s: a.time_s });
                }
                if a.amount_mj <= 0.0 {
                    errs.push(Violation::NonPositiveArrivalAmount {
                        transmitter: tx.id,
                        index: i,
                        amount_mj: a.amount_mj,
                    });
                }
                if i > 0 && a.time_s <= tx.arrivals[i - 1].time_s {
                    errs.push(Violation::UnsortedArrivals { transmitter: tx.id, index: i });
                }
            }
        }

        let mut seen = HashSet::new();
        for rx in &self.receivers {
            if !seen.insert(rx.id) {
                errs.push(Violation::DuplicateReceiverId(rx.id));
            }
            if !rx.bits.is_finite() {
                errs.push(Violation::NonFinite { what: "receiver bits" });
            } else if rx.bits <= 0.0 {
                errs.push(Violation::NonPositiveDemand { receiver: rx.id, bits: rx.bits });
            }
        }

        let ch = &self.channel;
        if !(ch.bandwidth_hz > 0.0 && ch.bandwidth_hz.is_finite()) {
            errs.push(Violation::NonPositiveBandwidth(ch.bandwidth_hz));
        }
        let shape_ok = |mat: &Vec<Vec<f64>>| mat.len() == m_count && mat.iter().all(|row| row.len() == n_count);
        for mat in [&ch.path_gain, &ch.noise_psd] {
            if !shape_ok(mat) {
                errs.push(Violation::ChannelShape {
                    expected: (m_count, n_count),
                    found: (mat.len(), mat.first().map_or(0, Vec::len)),
                });
            }
        }
        if shape_ok(&ch.path_gain) && shape_ok(&ch.noise_psd) {
            let mut entries_ok = true;
            for m in 0..m_count {
                for n in 0..n_count {
                    if !(ch.path_gain[m][n] > 0.0 && ch.path_gain[m][n].is_finite()) {
                        errs.push(Violation::NonPositiveGain { transmitter: m, receiver: n });
                        entries_ok = false;
                    }
                    if !(ch.noise_psd[m][n] > 0.0 && ch.noise_psd[m][n].is_finite()) {
                        errs.push(Violation::NonPositiveNoise { transmitter: m, receiver: n });
                        entries_ok = false;
                    }
                }
            }
            if entries_ok && ch.bandwidth_hz > 0.0 {
                for (n, rx) in self.receivers.iter().enumerate() {
                    let (lo, hi) = (0..m_count)
                        .map(|m| ch.equivalent_noise_mw(m, n))
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                    if hi - lo > UNIFORM_CHANNEL_RTOL * hi {
                        errs.push(Violation::NonUniformChannel { receiver: rx.id, min_mw: lo, max_mw: hi });
                    }
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(errs))
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Ok(file.into())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScenarioFile::from(self))?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }
}

/// Validates a scenario, returning it unchanged when every invariant holds.
pub fn validate(scenario: Scenario) -> Result<Scenario, ValidationErrors> {
    scenario.validate().map(|()| scenario)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineEntry {
    pub time_s: f64,
    pub amount_mj: f64,
}

/// Chronological energy stream of all transmitters taken together. Entry 0
/// sits at t = 0 and holds the summed initial energies.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    entries: Vec<TimelineEntry>,
}

impl Timeline {
    /// Builds a timeline from raw `(time, amount)` pairs, merging ties and
    /// adding an empty entry at t = 0 if needed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = pairs.into_iter().collect();
        // (time, amount) order makes tie sums independent of input order.
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut entries = vec![TimelineEntry { time_s: 0.0, amount_mj: 0.0 }];
        for (t, e) in raw {
            let t = t.max(0.0);
            let last = entries.last_mut().expect("non-empty");
            if t == last.time_s {
                last.amount_mj += e;
            } else {
                entries.push(TimelineEntry { time_s: t, amount_mj: e });
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[TimelineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_energy(&self) -> f64 {
        self.entries.iter().map(|e| e.amount_mj).sum()
    }

    /// Energy harvested strictly before `t`.
    pub fn energy_before(&self, t: f64) -> f64 {
        self.entries.iter().take_while(|e| e.time_s < t).map(|e| e.amount_mj).sum()
    }

    /// Time of the first entry carrying positive energy.
    pub fn first_positive_time(&self) -> Option<f64> {
        self.entries.iter().find(|e| e.amount_mj > 0.0).map(|e| e.time_s)
    }
}

/// Merges every transmitter's harvests into one chronological stream.
pub fn merge_arrivals(scenario: &Scenario) -> Timeline {
    Timeline::from_pairs(scenario.transmitters.iter().flat_map(|tx| {
        std::iter::once((0.0, tx.initial_energy_mj)).chain(tx.arrivals.iter().map(|a| (a.time_s, a.amount_mj)))
    }))
}

// ---------------------------------------------------------------------------
// Scenario file format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub bandwidth_hz: f64,
    pub transmitters: Vec<TransmitterFile>,
    pub receivers: Vec<ReceiverDemand>,
    pub channel: ChannelFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterFile {
    pub id: u32,
    pub initial_energy_mj: f64,
    /// `[time_s, amount_mj]` pairs.
    #[serde(default)]
    pub arrivals: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    /// Path loss in dB, `[transmitter][receiver]`.
    pub path_loss_db: Vec<Vec<f64>>,
    /// Noise power spectral density in W/Hz, `[transmitter][receiver]`.
    pub noise_psd: Vec<Vec<f64>>,
}

impl From<ScenarioFile> for Scenario {
    fn from(f: ScenarioFile) -> Self {
        Scenario {
            transmitters: f
                .transmitters
                .into_iter()
                .map(|t| TransmitterProfile {
                    id: t.id,
                    initial_energy_mj: t.initial_energy_mj,
                    arrivals: t.arrivals.iter().map(|&[ts, e]| EnergyArrival::new(ts, e)).collect(),
                })
                .collect(),
            receivers: f.receivers,
            channel: ChannelSpec {
                bandwidth_hz: f.bandwidth_hz,
                path_gain: f
                    .channel
                    .path_loss_db
                    .iter()
                    .map(|row| row.iter().copied().map(db_to_gain).collect())
                    .collect(),
                noise_psd: f.channel.noise_psd,
            },
        }
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            bandwidth_hz: s.channel.bandwidth_hz,
            transmitters: s
                .transmitters
                .iter()
                .map(|t| TransmitterFile {
                    id: t.id,
                    initial_energy_mj: t.initial_energy_mj,
                    arrivals: t.arrivals.iter().map(|a| [a.time_s, a.amount_mj]).collect(),
                })
                .collect(),
            receivers: s.receivers.clone(),
            channel: ChannelFile {
                path_loss_db: s
                    .channel
                    .path_gain
                    .iter()
                    .map(|row| row.iter().copied().map(gain_to_db).collect())
                    .collect(),
                noise_psd: s.channel.noise_psd.clone(),
            },
        }
    }
}
