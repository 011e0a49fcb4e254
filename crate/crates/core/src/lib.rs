//! Simulation of round-based message adversaries, full-information views and
//! stabilizing consensus decision maps.

pub mod adversary;
pub mod conflict;
pub mod error;
pub mod graphs;
pub mod protocols;
pub mod sweep;
pub mod tasks;
pub mod views;

pub use error::{Error, Result};
