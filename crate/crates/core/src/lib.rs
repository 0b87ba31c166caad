//! Finite-element simulation of cerebral microcirculation at desk scale.
//!
//! The crate models the coupled evolution of the excess total blood
//! volume fraction and the deoxygenated blood volume fraction in a
//! tissue domain fed through an arterial interface:
//!
//! * [`mesh`] - labeled tetrahedral meshes, structured box generation,
//!   predicate labeling, ASCII file format
//! * [`vasculature`] - microvascular transport parameters derived from
//!   vessel geometry and per-compartment length densities
//! * [`hrf`] - damped-oscillator hemodynamic response with a
//!   compact-support mollifier
//! * [`sparse`] / [`assembly`] - compressed-row operators, P1
//!   tetrahedral assembly, preconditioned conjugate gradients
//! * [`ppe`] - arterial influx, prescribed or shaped by a static
//!   pressure solve with a Robin boundary condition
//! * [`solver`] - implicit-Euler stepping of the coupled system
//! * [`analysis`] - region means, radial profiles, perturbation
//!   diameters, decibel fields
//! * [`config`] / [`output`] / [`pipeline`] - run configuration,
//!   writers, and orchestration

// negated comparisons like `!(v > 0.0)` deliberately reject NaN;
// index loops follow the element/node-numbering style of the kernels
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod error;
pub mod hrf;
pub mod mesh;
pub mod output;
pub mod pipeline;
pub mod ppe;
pub mod solver;
pub mod sparse;
pub mod vasculature;

pub use analysis::{RoiSpec, RoiTimeSeries};
pub use config::{CompartmentTable, RunConfig};
pub use error::{Error, Result};
pub use hrf::HrfSeries;
pub use mesh::{BoundaryTri, CompartmentId, Submesh, TetMesh};
pub use ppe::{BoundaryFlux, PressureField};
pub use solver::{CoupledSystem, SimState, SourceSpec};
pub use sparse::SparseMatrix;
pub use vasculature::{DerivedVesselFields, VesselParams};
