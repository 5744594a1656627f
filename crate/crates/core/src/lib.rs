//! Numerical laboratory for zero-range ("contact") interactions.
//!
//! The crate is split by physical subsystem:
//!
//! * [`numerics`] holds the shared machinery: radial and periodic grids, spectral
//!   transforms, integer and fractional kinetic operators, quadrature and the
//!   symmetric eigensolvers every other module leans on.
//! * [`twobody`] realizes scaled short-range potentials, solves the s-wave radial
//!   problem, extracts scattering lengths and tunes couplings onto a zero-energy
//!   resonance.
//! * [`contact`] discretizes the order-one model operators `sqrt(H0) - C/r + B` and
//!   `sqrt(H0) - C log r`, locates their critical couplings and fits the asymptotics
//!   of the resulting eigenvalue towers.
//! * [`meanfield`] implements the focusing Gross-Pitaevskii functional and its
//!   shell-averaged variant: energies, gradients, ground states and split-step
//!   dynamics.
//! * [`convergence`] builds Birman-Schwinger kernels, the Konno-Kuroda resolvent
//!   correction and epsilon-sweep diagnostics for shrinking potentials.

pub mod contact;
pub mod convergence;
pub mod meanfield;
pub mod numerics;
pub mod twobody;

pub use numerics::{
    BoxGrid3D, EigenRequest, RadialField, RadialGrid, SpacingLaw, Spectrum, SymmetricOperator,
    WaveField,
};
