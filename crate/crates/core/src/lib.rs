//! Axisymmetric, swirl-free viscous flow with concentrated vortex rings.
//!
//! The meridian half-plane `{(z, r) : r > 0}` is written `x = (x1, x2)`.
//! Each ring carries its own vorticity field, stored as `η = ω / x2` on a
//! uniform cell-centred window grid; all rings are advected by the velocity
//! of their sum.

pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod grid;
pub mod kernels;
pub mod params;
pub mod poisson;
pub mod quadrature;
pub mod rings;
pub mod theory;
pub mod transport;
pub mod velocity;

pub use diagnostics::{CutoffG, DiagnosticsRecord, MollifierW, RingDiagnostics};
pub use dynamics::{PrescribedField, RunOutput, SimState, Simulation, StepReport};
pub use grid::Grid;
pub use params::SimParams;
pub use rings::{Profile, RingField, RingSpec};
pub use velocity::{StreamFunction, VelocityField};

/// A point or vector in the meridian half-plane, `[x1, x2] = [z, r]`.
pub type Point = [f64; 2];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("kernel singular: evaluation point coincides with source point")]
    Singular,
    #[error("non-positive radius {0}")]
    NonPositiveRadius(f64),
    #[error("invalid ring data: {0}")]
    InvalidRing(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("fields do not share a common grid")]
    GridMismatch,
    #[error("index {index} out of range for {len} rings")]
    RingIndex { index: usize, len: usize },
    #[error("stability bound violated: {0}")]
    Stability(String),
    #[error("non-finite value detected in {0}")]
    NonFinite(&'static str),
    #[error("vorticity reached the window boundary band ({fraction:.3e} of total mass)")]
    BoundaryBand { fraction: f64 },
    #[error("elliptic solver: {0}")]
    Solver(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("tail-mass sandwich violated: {0}")]
    Sandwich(String),
}

pub type Result<T> = std::result::Result<T, Error>;
