use nalgebra::DMatrix;

use super::kernel::{free_hamiltonian, support_of, ShiftedFactor};
use super::{weight_from_potential, CompositePotential, ConvergenceError};
use crate::numerics::RadialGrid;

/// `R(z) - R0(z)` for `H = H0 + V^eps` assembled from the Konno-Kuroda form
/// `[R0 B] [1 - Q]^-1 [B R0]` with `B = sqrt(-V^eps)` and `Q = B R0 B`.
#[derive(Debug, Clone, PartialEq)]
pub struct KKCorrection {
    pub z: f64,
    pub epsilon: f64,
    /// Largest eigenvalue of `Q(z)` (its norm, since `Q >= 0`).
    pub q_norm: f64,
    /// Grid indices where `B` is nonzero.
    pub support: Vec<usize>,
    /// Full `n x n` resolvent difference.
    pub matrix: DMatrix<f64>,
}

pub fn kk_correction(
    composite: &CompositePotential,
    epsilon: f64,
    z: f64,
    grid: &RadialGrid,
) -> Result<KKCorrection, ConvergenceError> {
    if !(z.is_finite() && z > 0.0) {
        return Err(ConvergenceError::BadZ(z));
    }
    let u = weight_from_potential(&composite.realize(epsilon, grid)?);
    let support = support_of(&u)?;
    let n = grid.len();
    if support.is_empty() {
        return Ok(KKCorrection {
            z,
            epsilon,
            q_norm: 0.0,
            support,
            matrix: DMatrix::zeros(n, n),
        });
    }
    let h0 = free_hamiltonian(grid);
    let factor = ShiftedFactor::new(&h0, z)?;
    // W = R0 B restricted to the support columns
    let mut w = factor.columns(&support);
    let b: Vec<f64> = support.iter().map(|&i| u.values[i].sqrt()).collect();
    for (c, bc) in b.iter().enumerate() {
        w.column_mut(c).scale_mut(*bc);
    }
    let s = support.len();
    let mut q = DMatrix::from_fn(s, s, |a, c| b[a] * w[(support[a], c)]);
    let qt = q.transpose();
    q = (q + qt) * 0.5;
    let q_norm = q.clone().symmetric_eigenvalues().iter().fold(0.0_f64, |m, v| m.max(*v));
    if q_norm >= 1.0 {
        return Err(ConvergenceError::NotInvertible { q_norm });
    }
    let one_minus_q = DMatrix::identity(s, s) - q;
    let chol = one_minus_q
        .cholesky()
        .ok_or(ConvergenceError::NotInvertible { q_norm })?;
    // [1 - Q]^-1 W^T, then W times that
    let right = chol.solve(&w.transpose());
    let mut matrix = &w * right;
    let mt = matrix.transpose();
    matrix = (matrix + mt) * 0.5;
    Ok(KKCorrection {
        z,
        epsilon,
        q_norm,
        support,
        matrix,
    })
}
