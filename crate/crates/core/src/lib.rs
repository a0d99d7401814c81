//! Coupled phase-oscillator model of MPI-parallel program dynamics.
//!
//! Each MPI process is a phase oscillator advancing at the rate of its
//! compute-communicate cycle. Oscillators interact through a topology
//! matrix, a configurable interaction potential, optional communication
//! delays and multiplicative local noise. The crate integrates the delayed
//! system with an adaptive Dormand–Prince solver, evaluates the
//! synchronization metrics (order parameter, entropy, phase gradient,
//! pairwise differences, heatmaps, potential energy) and ingests
//! iteration timelines extracted from MPI traces for comparison.
//!
//! Data-parallel work (parameter sweeps, per-sample metric evaluation) runs
//! on rayon when the `parallel` feature is enabled and falls back to plain
//! iteration otherwise; see [`exec::Execution`].

pub mod config;
pub mod dynamics;
pub mod exec;
pub mod integrator;
pub mod metrics;
pub mod model;
pub mod potentials;
pub mod rng;
pub mod run;
pub mod scenario;
pub mod sweep;
pub mod topology;
pub mod trace;

pub use exec::Execution;
pub use integrator::{integrate, IntegratorOptions, Trajectory};
pub use model::{
    validate, DelaySpec, InitialCondition, NoiseBase, NoiseSpec, PhaseState, PotentialSpec,
    SimulationConfig, TopologyMatrix, ValidatedConfig,
};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
