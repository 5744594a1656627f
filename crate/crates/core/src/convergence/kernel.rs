use nalgebra::DMatrix;
use rayon::prelude::*;

use super::ConvergenceError;
use crate::numerics::{lanczos_smallest, tridiagonal_smallest, EigenRequest, RadialField, RadialGrid, SymmetricOperator};
use crate::twobody::{GridMeta, OuterBoundary, RadialHamiltonian};

/// `-d^2/dr^2` with Dirichlet ends on `grid`.
pub fn free_hamiltonian(grid: &RadialGrid) -> RadialHamiltonian {
    RadialHamiltonian::new(&RadialField::zeros(grid.clone()), OuterBoundary::Dirichlet)
        .expect("zero potential is an s-wave field")
}

/// `LDL^T` factors of a symmetric tridiagonal matrix shifted by `z`.
pub(crate) struct ShiftedFactor {
    pivots: Vec<f64>,
    lower: Vec<f64>,
}

impl ShiftedFactor {
    /// Factors `T + z`. The number of negative pivots is the number of eigenvalues of
    /// `T` below `-z`; any such pivot (or a zero one) is reported.
    pub(crate) fn new(op: &RadialHamiltonian, z: f64) -> Result<Self, ConvergenceError> {
        let (diag, off) = op.tridiagonal().expect("radial operator is tridiagonal");
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        lower.push(0.0);
        pivots.push(diag[0] + z);
        for i in 1..n {
            let l = off[i - 1] / pivots[i - 1];
            lower.push(l);
            pivots.push(diag[i] + z - l * off[i - 1]);
        }
        if pivots.iter().any(|p| !(*p > 0.0)) {
            return Err(ConvergenceError::ZInSpectrum {
                z,
                count: op.count_below(-z).max(1),
            });
        }
        Ok(Self { pivots, lower })
    }

    pub(crate) fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 1..n {
            rhs[i] -= self.lower[i] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] / self.pivots[i] - self.lower[i + 1] * rhs[i + 1];
        }
    }

    /// Columns `(T + z)^-1 e_j` for `j` in `cols`, as an `n x cols.len()` matrix.
    pub(crate) fn columns(&self, cols: &[usize]) -> DMatrix<f64> {
        let n = self.pivots.len();
        let solved: Vec<Vec<f64>> = cols
            .par_iter()
            .map(|&j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.solve(&mut e);
                e
            })
            .collect();
        DMatrix::from_fn(n, cols.len(), |i, c| solved[c][i])
    }
}

pub(crate) fn support_of(u: &RadialField) -> Result<Vec<usize>, ConvergenceError> {
    if let Some((index, value)) = u.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(ConvergenceError::NegativeWeight { index, value: *value });
    }
    Ok((0..u.values.len()).filter(|i| u.values[*i] > 0.0).collect())
}

/// `K(z) = sqrt(u) (H + z)^-1 sqrt(u)` restricted to the support of `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BSKernel {
    pub z: f64,
    /// Symmetric, `support.len()` square.
    pub matrix: DMatrix<f64>,
    /// Grid indices of the rows and columns of `matrix`.
    pub support: Vec<usize>,
    pub potential_meta: GridMeta,
}

impl BSKernel {
    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.support.is_empty() {
            return Vec::new();
        }
        let mut v: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `#{eigenvalues > x}`; with `x = 1` this counts eigenvalues of `H - u` below `-z`.
    pub fn count_above(&self, x: f64) -> usize {
        self.eigenvalues().iter().filter(|v| **v > x).count()
    }
}

/// Birman-Schwinger kernel of the weight `u` relative to `h_base` at `z > 0`.
pub fn bs_kernel(h_base: &RadialHamiltonian, u: &RadialField, z: f64) -> Result<BSKernel, ConvergenceError> {
    if !(z.is_finite() && z > 0.0) {
        return Err(ConvergenceError::BadZ(z));
    }
    if u.values.len() != h_base.dim() {
        return Err(ConvergenceError::GridMismatch {
            expected: h_base.dim(),
            got: u.values.len(),
        });
    }
    u.require_s_wave()?;
    let support = support_of(u)?;
    let factor = ShiftedFactor::new(h_base, z)?;
    let cols = factor.columns(&support);
    let root: Vec<f64> = support.iter().map(|&i| u.values[i].sqrt()).collect();
    let s = support.len();
    let mut k = DMatrix::from_fn(s, s, |a, b| root[a] * cols[(support[a], b)] * root[b]);
    let t = k.transpose();
    k = (k + t) * 0.5;
    Ok(BSKernel {
        z,
        matrix: k,
        support,
        potential_meta: h_base.meta().clone(),
    })
}

/// `K(z)` applied without assembly: one tridiagonal solve per product. Lives on the
/// support of `u`, like [`BSKernel::matrix`].
pub(crate) struct KernelAction {
    factor: ShiftedFactor,
    support: Vec<usize>,
    root: Vec<f64>,
    n: usize,
}

impl KernelAction {
    pub(crate) fn new(h_base: &RadialHamiltonian, u: &RadialField, z: f64) -> Result<Self, ConvergenceError> {
        if !(z.is_finite() && z > 0.0) {
            return Err(ConvergenceError::BadZ(z));
        }
        if u.values.len() != h_base.dim() {
            return Err(ConvergenceError::GridMismatch {
                expected: h_base.dim(),
                got: u.values.len(),
            });
        }
        u.require_s_wave()?;
        let support = support_of(u)?;
        let root = support.iter().map(|&i| u.values[i].sqrt()).collect();
        Ok(Self {
            factor: ShiftedFactor::new(h_base, z)?,
            support,
            root,
            n: h_base.dim(),
        })
    }
}

impl SymmetricOperator for KernelAction {
    fn dim(&self) -> usize {
        self.support.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut full = vec![0.0; self.n];
        for ((&i, r), xi) in self.support.iter().zip(&self.root).zip(x) {
            full[i] = r * xi;
        }
        self.factor.solve(&mut full);
        for ((&i, r), yi) in self.support.iter().zip(&self.root).zip(y.iter_mut()) {
            *yi = r * full[i];
        }
    }
}

/// Largest eigenvalue of `K(z)` by Lanczos on the unassembled kernel; cheap even when
/// the support covers most of the grid.
pub fn bs_max_eigenvalue(h_base: &RadialHamiltonian, u: &RadialField, z: f64) -> Result<f64, ConvergenceError> {
    struct Negated(KernelAction);
    impl SymmetricOperator for Negated {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            self.0.apply(x, y);
            y.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let op = Negated(KernelAction::new(h_base, u, z)?);
    if op.dim() == 0 {
        return Ok(0.0);
    }
    let spec = lanczos_smallest(&op, &EigenRequest::new(1).with_tol(1e-10))?;
    Ok(-spec.values[0])
}

/// The `z* > 0` at which the largest eigenvalue of `K(z)` crosses 1, so that `-z*` is
/// the ground-state energy of `h_base - u`. Bisection to relative width `tol`.
pub fn bs_crossing(h_base: &RadialHamiltonian, u: &RadialField, tol: f64) -> Result<f64, ConvergenceError> {
    let (diag, off) = h_base.tridiagonal().expect("radial operator is tridiagonal");
    // h_base + z stays positive for z > -floor
    let floor = tridiagonal_smallest(diag, off, &EigenRequest::new(1))?.values[0];
    let z_lo = (-floor).max(0.0) + 1e-12;
    let lambda = |z: f64| bs_kernel(h_base, u, z).map(|k| k.max_eigenvalue());
    if lambda(z_lo)? < 1.0 {
        return Err(ConvergenceError::NoCrossing { z_lo });
    }
    // K(z) <= |u|_inf / (z + floor), so the crossing lies below |u|_inf - floor
    let u_max = u.values.iter().fold(0.0_f64, |m, v| m.max(*v));
    let mut lo = z_lo;
    let mut hi = (u_max - floor).max(z_lo) * 1.01 + 1e-12;
    while lambda(hi)? >= 1.0 {
        hi *= 2.0;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if lambda(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{operator_to_dense, RadialGrid};

    #[test]
    fn zero_weight_gives_empty_kernel() {
        let grid = RadialGrid::origin_aligned(100, 5.0).unwrap();
        let h = free_hamiltonian(&grid);
        let k = bs_kernel(&h, &RadialField::zeros(grid), 1.0).unwrap();
        assert!(k.support.is_empty());
        assert_eq!(k.max_eigenvalue(), 0.0);
    }

    #[test]
    fn kernel_matches_dense_inverse() {
        let grid = RadialGrid::origin_aligned(60, 3.0).unwrap();
        let h = free_hamiltonian(&grid);
        let u = RadialField::new(grid.clone(), (0..60).map(|i| if i < 20 { 1.0 + 0.1 * i as f64 } else { 0.0 }).collect()).unwrap();
        let k = bs_kernel(&h, &u, 0.7).unwrap();
        let mut a = operator_to_dense(&h);
        for i in 0..60 {
            a[(i, i)] += 0.7;
        }
        let inv = a.try_inverse().unwrap();
        for (p, &i) in k.support.iter().enumerate() {
            for (q, &j) in k.support.iter().enumerate() {
                let expect = u.values[i].sqrt() * inv[(i, j)] * u.values[j].sqrt();
                assert!((k.matrix[(p, q)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unassembled_maximum_matches_dense() {
        let grid = RadialGrid::origin_aligned(300, 4.0).unwrap();
        let h = free_hamiltonian(&grid);
        let u = RadialField::new(grid.clone(), grid.nodes().iter().map(|r| 8.0 * (-r * r).exp()).collect()).unwrap();
        let dense = bs_kernel(&h, &u, 0.5).unwrap().max_eigenvalue();
        let lanczos = bs_max_eigenvalue(&h, &u, 0.5).unwrap();
        assert!((dense - lanczos).abs() < 1e-9 * dense);
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = RadialGrid::origin_aligned(50, 2.0).unwrap();
        let h = free_hamiltonian(&grid);
        let mut u = RadialField::zeros(grid.clone());
        u.values[3] = -1.0;
        assert!(matches!(bs_kernel(&h, &u, 1.0), Err(ConvergenceError::NegativeWeight { index: 3, .. })));
        assert!(matches!(bs_kernel(&h, &RadialField::zeros(grid), 0.0), Err(ConvergenceError::BadZ(_))));
    }
}
