//! Broadcasting from a group of energy harvesting transmitters that take
//! turns on a shared channel.
//!
//! The crate computes the minimum-completion-time power schedule for a
//! degraded broadcast channel fed by causal harvests, splits power between
//! receivers with several allocation rules, picks which transmitter serves
//! each interval, and runs Monte Carlo comparisons over random harvests.
//!
//! * [`model`] scenario types, validation and the merged harvest timeline
//! * [`rate`] achievable rates and power splits for superposition coding
//! * [`schedule`] the optimal staircase and cut-off powers
//! * [`allocation`] time-sharing-free power splits over a profile
//! * [`switching`] transmitter selection and switch counting
//! * [`generator`] seeded random scenarios
//! * [`testkit`] brute-force reference solvers
//! * [`bench`] Monte Carlo tables and sweeps

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod bench;
pub mod error;
pub mod generator;
pub mod model;
pub mod rate;
pub mod roots;
pub mod schedule;
pub mod switching;
pub mod testkit;

pub use error::{Error, Result};
