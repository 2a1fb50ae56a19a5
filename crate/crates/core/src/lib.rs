//! Simulation core for LTE hard handover of a train-borne UE passing a line
//! of directional trackside radio heads.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the `hsr-handover-sim` companion
//! crate.
//!
//! Pipeline per run: [`geometry`] places the train, [`channel`] produces the
//! mean received power per cell, [`doppler`] degrades it with Doppler-induced
//! intercarrier interference, [`measurement`] applies L1/L3 filtering and
//! [`handover`] drives the A3-triggered procedure. [`harness`] ties them
//! together and aggregates Monte Carlo statistics.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod doppler;
mod error;
pub mod geometry;
pub mod handover;
pub mod harness;
mod math;
pub mod measurement;
pub mod rng;

pub use error::{Error, Result};
