//! Scaled two-body potentials and the s-wave radial problem.

mod potential;
mod radial;
mod scattering;

use thiserror::Error;

use crate::numerics::{EigenError, FieldError, GridError};

pub use potential::{
    extension_norms, realize_potential, ExtensionNorms, PotentialSpec, ScalingClass, Shape,
    GAUSSIAN_CUT, MIN_SUPPORT_NODES,
};
pub use radial::{
    bound_states_radial, bound_states_radial_with, GridMeta, OuterBoundary, RadialHamiltonian,
    SpectrumResult,
};
pub use scattering::{
    scattering_length, tune_to_resonance, zero_energy_solution, ResonanceResult, FIT_WINDOW,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwobodyError {
    #[error("invalid potential: {0}")]
    InvalidSpec(String),
    #[error("potential shape is not integrable")]
    NonIntegrable,
    #[error("support r <= {range} holds {nodes_inside} grid nodes, need at least {needed}")]
    UnderResolved {
        range: f64,
        nodes_inside: usize,
        needed: usize,
    },
    #[error("potential reaches the scattering-length fit window (r >= {window_start}, |V| up to {leak})")]
    SupportInFitWindow { window_start: f64, leak: f64 },
    #[error("1/a has no resonance on [{g_lo}, {g_hi}] (1/a = {inv_a_lo} .. {inv_a_hi})")]
    NoSignChange {
        g_lo: f64,
        g_hi: f64,
        inv_a_lo: f64,
        inv_a_hi: f64,
    },
    #[error("bracket contains {count} resonances")]
    MultipleResonances { count: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}
