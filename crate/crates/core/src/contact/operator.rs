use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ContactError;
use crate::numerics::{operator_to_dense, RadialGrid, RadialSqrtKinetic, SymmetricOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `sqrt(H0) - C / r + B`
    Strong,
    /// `sqrt(H0) - C log r`
    Weak,
}

/// Symmetric positive semidefinite kernel `B(r_i, r_j)` acting as `h sum_j B_ij u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BKernel {
    matrix: DMatrix<f64>,
}

impl BKernel {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, ContactError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(ContactError::BKernelShape {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(ContactError::BKernelNonFinite);
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let defect = (&matrix - matrix.transpose()).amax();
        if defect > 1e-12 * scale {
            return Err(ContactError::BKernelAsymmetric { defect });
        }
        let min = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(*v));
        if min < -1e-10 * scale {
            return Err(ContactError::BKernelNotPositive { min_eigenvalue: min });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest diagonal entry; reported as a diagnostic because a positive kernel
    /// with an identically zero diagonal must vanish.
    pub fn max_diagonal(&self) -> f64 {
        self.matrix.diagonal().amax()
    }
}

/// Discretized model operator on an origin-aligned uniform grid with `r_min = h`.
#[derive(Debug, Clone)]
pub struct ContactModelOperator {
    kind: ModelKind,
    c: f64,
    grid: RadialGrid,
    kinetic: RadialSqrtKinetic,
    potential: Vec<f64>,
    b: Option<BKernel>,
}

pub fn build_model_operator(
    kind: ModelKind,
    c: f64,
    grid: &RadialGrid,
    b_kernel: Option<BKernel>,
) -> Result<ContactModelOperator, ContactError> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(ContactError::NegativeCoupling(c));
    }
    let kinetic = RadialSqrtKinetic::new(grid)?;
    if let Some(b) = &b_kernel {
        if b.matrix.nrows() != grid.len() {
            return Err(ContactError::BKernelShape {
                expected: grid.len(),
                got: b.matrix.nrows(),
            });
        }
    }
    let potential = grid
        .nodes()
        .iter()
        .map(|r| match kind {
            ModelKind::Strong => -c / r,
            ModelKind::Weak => -c * r.ln(),
        })
        .collect();
    Ok(ContactModelOperator {
        kind,
        c,
        grid: grid.clone(),
        kinetic,
        potential,
        b: b_kernel,
    })
}

impl ContactModelOperator {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn coupling(&self) -> f64 {
        self.c
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn b_kernel(&self) -> Option<&BKernel> {
        self.b.as_ref()
    }

    pub fn kinetic(&self) -> &RadialSqrtKinetic {
        &self.kinetic
    }

    pub fn dense(&self) -> DMatrix<f64> {
        operator_to_dense(self)
    }

    /// `sqrt(H0) + B` without the coupling term, assembled densely.
    pub fn dense_free_part(&self) -> DMatrix<f64> {
        let mut t = operator_to_dense(&self.kinetic);
        if let Some(b) = &self.b {
            t += b.matrix() * self.kinetic.spacing();
        }
        0.5 * (&t + t.transpose())
    }

    /// Exact count of negative eigenvalues by dense diagonalization.
    pub fn negative_count(&self) -> usize {
        match self.kind {
            ModelKind::Strong => {
                let mu = strong_thresholds(&self.dense_free_part(), self.grid.nodes());
                mu.iter().filter(|m| **m < self.c).count()
            }
            ModelKind::Weak => self
                .dense()
                .symmetric_eigenvalues()
                .iter()
                .filter(|v| **v < 0.0)
                .count(),
        }
    }
}

/// Eigenvalues of `r^{1/2} (sqrt(H0) + B) r^{1/2}`, ascending.
///
/// `sqrt(H0) + B - C/r` is congruent to `r^{-1/2} (M - C) r^{-1/2}` with this `M`, so by
/// Sylvester's law the number of negative eigenvalues at coupling `C` is `#{mu < C}`.
pub fn strong_thresholds(free_part: &DMatrix<f64>, nodes: &[f64]) -> Vec<f64> {
    let s: Vec<f64> = nodes.iter().map(|r| r.sqrt()).collect();
    let n = nodes.len();
    let m = DMatrix::from_fn(n, n, |i, j| s[i] * free_part[(i, j)] * s[j]);
    let mut mu: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    mu.sort_by(f64::total_cmp);
    mu
}

impl SymmetricOperator for ContactModelOperator {
    fn dim(&self) -> usize {
        self.potential.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.kinetic.apply(x, y);
        for ((yi, xi), v) in y.iter_mut().zip(x).zip(&self.potential) {
            *yi += v * xi;
        }
        if let Some(b) = &self.b {
            let h = self.kinetic.spacing();
            let n = x.len();
            for (i, yi) in y.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..n {
                    s += b.matrix[(i, j)] * x[j];
                }
                *yi += h * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dense_eigen, symmetry_defect};

    #[test]
    fn free_operator_is_positive() {
        let grid = RadialGrid::origin_aligned(120, 1.0).unwrap();
        let op = build_model_operator(ModelKind::Strong, 0.0, &grid, None).unwrap();
        let (vals, _) = dense_eigen(&op.dense());
        assert!(vals[0] > 0.0);
        assert_eq!(op.negative_count(), 0);
    }

    #[test]
    fn weak_kind_is_symmetric() {
        let grid = RadialGrid::origin_aligned(150, 3.0).unwrap();
        let op = build_model_operator(ModelKind::Weak, 1.0, &grid, None).unwrap();
        assert!(symmetry_defect(&op, 10, 1) < 1e-10);
    }

    #[test]
    fn invalid_inputs() {
        let grid = RadialGrid::origin_aligned(10, 1.0).unwrap();
        assert_eq!(
            build_model_operator(ModelKind::Strong, -1.0, &grid, None).unwrap_err(),
            ContactError::NegativeCoupling(-1.0)
        );
        let asym = DMatrix::from_fn(10, 10, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
        assert!(matches!(BKernel::new(asym), Err(ContactError::BKernelAsymmetric { .. })));
        let neg = DMatrix::from_fn(10, 10, |i, j| if (i, j) == (0, 1) || (i, j) == (1, 0) { 1.0 } else { 0.0 });
        assert!(matches!(BKernel::new(neg), Err(ContactError::BKernelNotPositive { .. })));
    }

    #[test]
    fn congruence_count_matches_dense_count() {
        let grid = RadialGrid::origin_aligned(100, 1.0).unwrap();
        for c in [0.5, 0.8, 2.0, 5.0] {
            let op = build_model_operator(ModelKind::Strong, c, &grid, None).unwrap();
            let (vals, _) = dense_eigen(&op.dense());
            assert_eq!(op.negative_count(), vals.iter().filter(|v| **v < 0.0).count());
        }
    }
}
