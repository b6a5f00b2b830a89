//! Simulation driver for the subgroup OFDM estimators: parallel Monte Carlo
//! sweeps, CSV persistence, SVG charts and the `subgroup-sim` command line.

pub mod cli;
pub mod harness;
pub mod io;
pub mod plot;
