//! Command-line front end for the `ffmimo` library.
//!
//! The binary exposes five subcommands — `rate`, `simulate`, `mindist`,
//! `transform`, and `figure` — that all emit one flat table schema
//! ([`csvout::COLUMNS`]) as CSV or TSV. This crate keeps the subcommand
//! logic in library form so the experiment sweeps and scheme dispatch can
//! be driven (and tested) without spawning the binary.

pub mod config;
pub mod csvout;
pub mod figures;
