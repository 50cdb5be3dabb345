//! Topological distances between return series, exemplar clustering and
//! sparse portfolio construction with a rolling-window backtester.
//!
//! The pipeline runs bottom-up:
//!
//! * [`market_data`] loads price panels and turns them into returns and
//!   window plans.
//! * [`tda`] embeds series as point clouds, computes Vietoris–Rips
//!   persistence, landscapes and diagram distances.
//! * [`distances`] builds the time-aware series distances on top of those
//!   summaries, alongside correlation distances.
//! * [`similarity`] turns distances into kernel matrices.
//! * [`clustering`] partitions assets (affinity propagation, k-medoids,
//!   average-linkage hierarchical) and scores partitions.
//! * [`portfolio`] solves the simplex-constrained quadratic programs.
//! * [`backtest`] runs the rolling strategies and computes metrics and tests.
//! * [`cli`] wires everything to configuration files and output artifacts.

pub mod assignment;
pub mod backtest;
pub mod casestudy;
pub mod cli;
pub mod clustering;
pub mod config;
pub mod distances;
pub mod error;
pub mod io;
pub mod market_data;
pub mod matrix;
pub mod portfolio;
pub mod similarity;
pub mod synth;
pub mod tda;

pub use error::{Error, Result};
