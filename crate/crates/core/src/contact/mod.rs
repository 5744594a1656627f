//! Order-one model operators `sqrt(H0) - C/r + B` and `sqrt(H0) - C log r` on the
//! half-line, their critical couplings and eigenvalue towers.

mod critical;
mod fit;
mod operator;

use thiserror::Error;

use crate::numerics::{eigs_smallest, EigenError, EigenRequest, GridError, KineticError};
use crate::twobody::{GridMeta, OuterBoundary, SpectrumResult};

pub use critical::{
    critical_constants, refinement_family, CriticalConstants, CriticalOptions, LevelEstimate,
    RefinementPoint, MIN_LEVELS,
};
pub use fit::{fit_all, fit_asymptotics, FitModel, FitReport, MIN_FIT_POINTS};
pub use operator::{build_model_operator, strong_thresholds, BKernel, ContactModelOperator, ModelKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("coupling C must be finite and nonnegative, got {0}")]
    NegativeCoupling(f64),
    #[error("B kernel is not symmetric (max defect {defect})")]
    BKernelAsymmetric { defect: f64 },
    #[error("B kernel is not positive semidefinite (smallest eigenvalue {min_eigenvalue})")]
    BKernelNotPositive { min_eigenvalue: f64 },
    #[error("B kernel has size {got}, grid has {expected} nodes")]
    BKernelShape { expected: usize, got: usize },
    #[error("B kernel contains non-finite entries")]
    BKernelNonFinite,
    #[error("refinement needs at least {needed} levels, got {got}")]
    TooFewLevels { got: usize, needed: usize },
    #[error("consecutive r_min must halve, found ratio {ratio}")]
    BadRefinement { ratio: f64 },
    #[error("negative count drops from {count_lo} to {count_hi} between C = {c_lo} and C = {c_hi} at r_min = {r_min}; grid is under-resolved")]
    NonMonotone {
        r_min: f64,
        c_lo: f64,
        c_hi: f64,
        count_lo: usize,
        count_hi: usize,
    },
    #[error("no negative eigenvalue appears for C up to {c_max}")]
    NoOnset { c_max: f64 },
    #[error("negative count does not grow under refinement for C up to {c_max}")]
    NoDivergence { c_max: f64 },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("fit needs at least {needed} negative eigenvalues, got {got}")]
    TooFewPoints { got: usize, needed: usize },
    #[error("fit of model {0} produced non-finite parameters")]
    FitFailed(String),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// All negative eigenvalues of the operator, ascending, up to `req.k`.
///
/// `negative_count` is exact (dense inertia); `truncated` is set when fewer than
/// `req.k` negative eigenvalues exist.
pub fn efimov_sequence(op: &ContactModelOperator, req: &EigenRequest) -> Result<SpectrumResult, ContactError> {
    let negative_count = op.negative_count();
    let k = req.k.min(negative_count);
    let spec = eigs_smallest(op, &EigenRequest { k, ..*req })?;
    let grid = op.grid();
    Ok(SpectrumResult {
        eigenvalues: spec.values,
        residuals: spec.residuals,
        vectors: spec.vectors,
        grid_meta: GridMeta {
            n: grid.len(),
            r_min: grid.r_min(),
            r_max: grid.r_max(),
            spacing_law: grid.law(),
            inner_boundary: grid.inner_boundary(),
            outer_boundary: OuterBoundary::Dirichlet,
        },
        negative_count,
        truncated: k < req.k,
        method: spec.method.to_string(),
    })
}
