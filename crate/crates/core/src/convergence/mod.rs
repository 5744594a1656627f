//! Resolvent diagnostics for shrinking potentials: Birman-Schwinger kernels, the
//! Konno-Kuroda correction `R(z) - R0(z)` and epsilon sweeps.
//!
//! All operators act on s-wave radial functions `u = r phi` with the three-point
//! discretization of [`RadialHamiltonian`](crate::twobody::RadialHamiltonian).
//! Potentials are attractive, so the Birman-Schwinger weight is `u = -V >= 0`.

mod kernel;
mod kk;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{EigenError, FieldError, RadialField, RadialGrid};
use crate::twobody::{realize_potential, PotentialSpec, ScalingClass, TwobodyError};

pub use kernel::{bs_crossing, bs_kernel, bs_max_eigenvalue, free_hamiltonian, BSKernel};
pub use kk::{kk_correction, KKCorrection};
pub use sweep::{
    cross_term_norm, epsilon_sweep, ComponentNorms, EpsilonRecord, EpsilonSweepReport,
    SweepObservables, MONOTONE_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error("component {slot} must have the {expected:?} scaling class, got {got:?}")]
    WrongClass {
        slot: &'static str,
        expected: ScalingClass,
        got: ScalingClass,
    },
    #[error("Birman-Schwinger weight is negative at node {index} ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("spectral parameter z = {z} is not admissible: the base operator has {count} eigenvalues below -z")]
    ZInSpectrum { z: f64, count: usize },
    #[error("spectral parameter must be positive and finite, got {0}")]
    BadZ(f64),
    #[error("|Q(z)| = {q_norm} >= 1: 1 - Q(z) is not invertible by the Neumann bound (z too close to a bound state)")]
    NotInvertible { q_norm: f64 },
    #[error("weight has {got} nodes, base operator has {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("max eigenvalue of K(z) stays below 1 for z >= {z_lo}: no bound state to locate")]
    NoCrossing { z_lo: f64 },
    #[error("epsilon list is empty")]
    EmptySweep,
    #[error("epsilons must be strictly decreasing and lie in (0, 1], violated at position {index}")]
    BadEpsilons { index: usize },
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Twobody(#[from] TwobodyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// `V = V1 + V2 + V3` with a strong-class, a weak-class and an unscaled component.
///
/// Components with zero coupling are skipped when realized, so they place no
/// resolution requirement on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositePotential {
    pub v1: PotentialSpec,
    pub v2: PotentialSpec,
    pub v3: PotentialSpec,
}

impl CompositePotential {
    pub fn new(v1: PotentialSpec, v2: PotentialSpec, v3: PotentialSpec) -> Result<Self, ConvergenceError> {
        let c = Self { v1, v2, v3 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConvergenceError> {
        for (slot, spec, expected) in [
            ("v1", &self.v1, ScalingClass::Strong),
            ("v2", &self.v2, ScalingClass::Weak),
            ("v3", &self.v3, ScalingClass::Unscaled),
        ] {
            if spec.scaling_class != expected {
                return Err(ConvergenceError::WrongClass {
                    slot,
                    expected,
                    got: spec.scaling_class,
                });
            }
            spec.validate()?;
        }
        Ok(())
    }

    /// The three components with `epsilon` applied to the scaled ones.
    pub fn at_epsilon(&self, epsilon: f64) -> Result<[PotentialSpec; 3], ConvergenceError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ConvergenceError::BadEpsilon(epsilon));
        }
        Ok([self.v1.with_epsilon(epsilon), self.v2.with_epsilon(epsilon), self.v3.clone()])
    }

    /// Same composite with the unscaled part removed.
    pub fn without_regular(&self) -> Self {
        Self {
            v3: self.v3.with_coupling(0.0),
            ..self.clone()
        }
    }

    /// `V^eps` sampled on the grid.
    pub fn realize(&self, epsilon: f64, grid: &RadialGrid) -> Result<RadialField, ConvergenceError> {
        self.validate()?;
        let mut total = RadialField::zeros(grid.clone());
        for spec in self.at_epsilon(epsilon)? {
            if spec.coupling == 0.0 {
                continue;
            }
            total = total.add(&realize_potential(&spec, grid)?)?;
        }
        Ok(total)
    }
}

/// `u = -V`, the Birman-Schwinger weight of an attractive potential.
pub fn weight_from_potential(pot: &RadialField) -> RadialField {
    let mut u = pot.clone();
    u.values.iter_mut().for_each(|v| *v = -*v + 0.0);
    u
}
