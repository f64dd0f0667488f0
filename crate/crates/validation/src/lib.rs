//! Support code for the acceptance suite: independent reference
//! implementations of the DSP kernels and streaming Monte Carlo tallies
//! over channel realizations.

pub mod ensemble;
pub mod oracles;

pub use ensemble::{power_survey, Design, PowerTally, Tally};
