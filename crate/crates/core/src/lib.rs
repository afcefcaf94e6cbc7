//! Rényi quantum discord of two-qubit states, and the exact reduced dynamics
//! of two dimers dephasing in a pair of Ising-correlated spin baths.
//!
//! * [`matfun`]: Hermitian matrix functions, partial traces, tensor products.
//! * [`entropy`]: Rényi/von Neumann entropies and conditional mutual information.
//! * [`discord`]: measurement optimization for von Neumann and Rényi discord.
//! * [`states`]: density-matrix validation, X and CI/SCI state families.
//! * [`dynamics`]: sector-sum evolution and a full-space reference propagator.
//! * [`experiment`]: configs, time series, sweeps, CSV output and plateau detection.

// `!(x > 0.0)` is used deliberately so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discord;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod matfun;
pub mod optimize;
pub mod states;

pub use discord::{
    renyi_discord, vn_discord, DiscordResult, ProjectiveMeasurement, RenyiObjective,
};
pub use dynamics::{BathParams, DimerParams, SectorPropagator};
pub use entropy::RenyiOrder;
pub use error::{Error, Result};
pub use experiment::{detect_plateau, run_sweep, run_timeseries, ExperimentConfig, PlateauReport};
pub use matfun::{HermitianOperator, C64};
pub use optimize::OptimizerSettings;
pub use states::DensityMatrix;
