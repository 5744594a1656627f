use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::kernel::{bs_max_eigenvalue, free_hamiltonian};
use super::{weight_from_potential, CompositePotential, ConvergenceError};
use crate::numerics::quad::tanh_sinh_pieces;
use crate::numerics::{tridiagonal_eigenvalue, RadialGrid, SymmetricOperator};
use crate::twobody::{extension_norms, ExtensionNorms, OuterBoundary, RadialHamiltonian};

/// Slack allowed when deciding that the ground eigenvalue did not increase.
pub const MONOTONE_TOL: f64 = 1e-8;

/// What to compute at every epsilon besides the ground eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepObservables {
    /// Spectral parameter for the Birman-Schwinger kernel of `-V^eps` against `H0`.
    pub bs_z: Option<f64>,
    pub norms: bool,
    pub cross_term: bool,
}

impl Default for SweepObservables {
    fn default() -> Self {
        Self {
            bs_z: Some(1.0),
            norms: true,
            cross_term: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentNorms {
    pub v1: ExtensionNorms,
    pub v2: ExtensionNorms,
    pub v3: ExtensionNorms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRecord {
    pub epsilon: f64,
    /// Lowest eigenvalue of `H0 + V^eps` on the grid (negative or not).
    pub ground_eigenvalue: f64,
    pub negative_count: usize,
    pub extension_norms: Option<ComponentNorms>,
    pub bs_max_eigenvalue: Option<f64>,
    pub cross_term_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweepReport {
    pub epsilons: Vec<f64>,
    pub per_epsilon: Vec<EpsilonRecord>,
    /// `|E(eps_i) - E(eps_i+1)|`
    pub cauchy_gaps: Vec<f64>,
    /// Ground eigenvalue nonincreasing as epsilon decreases, up to [`MONOTONE_TOL`].
    pub monotone_flag: bool,
    /// Cauchy gaps strictly decreasing.
    pub gaps_decreasing: bool,
}

fn check_epsilons(epsilons: &[f64]) -> Result<(), ConvergenceError> {
    if epsilons.is_empty() {
        return Err(ConvergenceError::EmptySweep);
    }
    for (i, e) in epsilons.iter().enumerate() {
        let in_range = *e > 0.0 && *e <= 1.0;
        let decreasing = i == 0 || *e < epsilons[i - 1];
        if !(in_range && decreasing) {
            return Err(ConvergenceError::BadEpsilons { index: i });
        }
    }
    Ok(())
}

fn record(
    composite: &CompositePotential,
    epsilon: f64,
    grid: &RadialGrid,
    obs: &SweepObservables,
) -> Result<EpsilonRecord, ConvergenceError> {
    let pot = composite.realize(epsilon, grid)?;
    let h = RadialHamiltonian::new(&pot, OuterBoundary::Dirichlet)?;
    let (diag, off) = h.tridiagonal().expect("radial operator is tridiagonal");
    let ground = tridiagonal_eigenvalue(diag, off, 0);
    let extension_norms = if obs.norms {
        let [v1, v2, v3] = composite.at_epsilon(epsilon)?;
        Some(ComponentNorms {
            v1: extension_norms(&v1)?,
            v2: extension_norms(&v2)?,
            v3: extension_norms(&v3)?,
        })
    } else {
        None
    };
    let bs_max_eigenvalue = match obs.bs_z {
        Some(z) => Some(bs_max_eigenvalue(&free_hamiltonian(grid), &weight_from_potential(&pot), z)?),
        None => None,
    };
    let cross = if obs.cross_term {
        Some(cross_term_norm(composite, epsilon)?)
    } else {
        None
    };
    Ok(EpsilonRecord {
        epsilon,
        ground_eigenvalue: ground,
        negative_count: h.count_below(0.0),
        extension_norms,
        bs_max_eigenvalue,
        cross_term_norm: cross,
    })
}

/// Ground eigenvalue and diagnostics of `H0 + V^eps` for each epsilon on one grid.
///
/// Epsilons are evaluated concurrently; records come back in input order.
pub fn epsilon_sweep(
    composite: &CompositePotential,
    epsilons: &[f64],
    grid: &RadialGrid,
    obs: &SweepObservables,
) -> Result<EpsilonSweepReport, ConvergenceError> {
    composite.validate()?;
    check_epsilons(epsilons)?;
    let per_epsilon = epsilons
        .par_iter()
        .map(|e| record(composite, *e, grid, obs))
        .collect::<Result<Vec<_>, _>>()?;
    let energies: Vec<f64> = per_epsilon.iter().map(|r| r.ground_eigenvalue).collect();
    let cauchy_gaps: Vec<f64> = energies.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let monotone_flag = energies.windows(2).all(|w| w[1] <= w[0] + MONOTONE_TOL);
    let gaps_decreasing = cauchy_gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(EpsilonSweepReport {
        epsilons: epsilons.to_vec(),
        per_epsilon,
        cauchy_gaps,
        monotone_flag,
        gaps_decreasing,
    })
}

/// `int sqrt(|V1^eps|) sqrt(|V2^eps| + |V3|) d^3y`, the L1 norm of the product of
/// square roots.
pub fn cross_term_norm(composite: &CompositePotential, epsilon: f64) -> Result<f64, ConvergenceError> {
    composite.validate()?;
    let [v1, v2, v3] = composite.at_epsilon(epsilon)?;
    if v1.coupling == 0.0 {
        return Ok(0.0);
    }
    let upper = v1.support();
    let mut pts = vec![0.0, upper];
    for spec in [&v1, &v2, &v3] {
        pts.extend(spec.breakpoints().into_iter().filter(|b| *b > 0.0 && *b < upper));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let f = |r: f64| {
        let a = v1.value(r).abs();
        let b = v2.value(r).abs() + v3.value(r).abs();
        if a == 0.0 || b == 0.0 {
            0.0
        } else {
            (a * b).sqrt() * r * r
        }
    };
    Ok(4.0 * PI * tanh_sinh_pieces(f, &pts, 1e-12))
}
