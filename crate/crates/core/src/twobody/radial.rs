use serde::{Deserialize, Serialize};

use super::TwobodyError;
use crate::numerics::{
    tridiagonal_count_below, tridiagonal_smallest, EigenRequest, RadialField, SpacingLaw,
    SymmetricOperator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBoundary {
    /// `u = 0` one spacing beyond the last node.
    #[default]
    Dirichlet,
    /// `u' = 0` at the last node; zero-energy resonances then become exact zero modes.
    Neumann,
}

/// Where a spectrum came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub spacing_law: SpacingLaw,
    pub inner_boundary: f64,
    pub outer_boundary: OuterBoundary,
}

/// Ascending eigenvalues with solver metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub grid_meta: GridMeta,
    /// Number of negative eigenvalues of the discretized operator (not just of
    /// those returned).
    pub negative_count: usize,
    /// Set when fewer eigenvalues than requested were available.
    pub truncated: bool,
    pub method: String,
}

/// Three-point discretization of `-u'' + V u` on the nodes of the potential's grid,
/// with a Dirichlet point one spacing below the first node.
///
/// Nonuniform grids use the symmetrized finite-volume form, so the matrix stays
/// symmetric in the plain Euclidean inner product.
#[derive(Debug, Clone)]
pub struct RadialHamiltonian {
    diag: Vec<f64>,
    off: Vec<f64>,
    meta: GridMeta,
}

impl RadialHamiltonian {
    pub fn new(pot: &RadialField, outer: OuterBoundary) -> Result<Self, TwobodyError> {
        pot.require_s_wave()?;
        let r = pot.grid.nodes();
        let n = r.len();
        // h[i] is the step from node i-1 to node i; h[0] reaches the inner Dirichlet point
        let mut h = Vec::with_capacity(n + 1);
        h.push(r[1] - r[0]);
        for w in r.windows(2) {
            h.push(w[1] - w[0]);
        }
        h.push(h[n - 1]);
        let weight: Vec<f64> = (0..n).map(|i| 0.5 * (h[i] + h[i + 1])).collect();
        let mut diag: Vec<f64> = (0..n)
            .map(|i| (1.0 / h[i] + 1.0 / h[i + 1]) / weight[i] + pot.values[i])
            .collect();
        if outer == OuterBoundary::Neumann {
            diag[n - 1] = 1.0 / (h[n - 1] * weight[n - 1]) + pot.values[n - 1];
        }
        let off = (0..n - 1)
            .map(|i| -1.0 / (h[i + 1] * (weight[i] * weight[i + 1]).sqrt()))
            .collect();
        let meta = GridMeta {
            n,
            r_min: pot.grid.r_min(),
            r_max: pot.grid.r_max(),
            spacing_law: pot.grid.law(),
            inner_boundary: pot.grid.inner_boundary(),
            outer_boundary: outer,
        };
        Ok(Self { diag, off, meta })
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn count_below(&self, x: f64) -> usize {
        tridiagonal_count_below(&self.diag, &self.off, x)
    }
}

impl SymmetricOperator for RadialHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    fn tridiagonal(&self) -> Option<(&[f64], &[f64])> {
        Some((&self.diag, &self.off))
    }
}

/// Negative s-wave eigenvalues of `-d^2/dr^2 + V` with Dirichlet ends.
pub fn bound_states_radial(pot: &RadialField, req: &EigenRequest) -> Result<SpectrumResult, TwobodyError> {
    bound_states_radial_with(pot, req, OuterBoundary::Dirichlet)
}

pub fn bound_states_radial_with(
    pot: &RadialField,
    req: &EigenRequest,
    outer: OuterBoundary,
) -> Result<SpectrumResult, TwobodyError> {
    let h = RadialHamiltonian::new(pot, outer)?;
    let negative_count = h.count_below(0.0);
    let k = req.k.min(negative_count);
    let sub = EigenRequest { k, ..*req };
    let (diag, off) = h.tridiagonal().expect("tridiagonal");
    let spec = tridiagonal_smallest(diag, off, &sub)?;
    Ok(SpectrumResult {
        eigenvalues: spec.values,
        residuals: spec.residuals,
        vectors: spec.vectors,
        grid_meta: h.meta,
        negative_count,
        truncated: k < req.k,
        method: spec.method.to_string(),
    })
}
