use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("inner cutoff r_min must be positive, got {0}")]
    NonPositiveRMin(f64),
    #[error("r_max ({r_max}) must exceed r_min ({r_min})")]
    RMaxNotAboveRMin { r_min: f64, r_max: f64 },
    #[error("a radial grid needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grid parameters must be finite")]
    NonFinite,
    #[error("box points per axis must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("box needs at least 8 points per axis, got {0}")]
    BoxTooCoarse(usize),
    #[error("box side must be positive and finite, got {0}")]
    BadSide(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingLaw {
    Uniform,
    Logarithmic,
}

/// Samples of the half-line `(0, inf)` between an inner cutoff and an outer radius.
///
/// The inner cutoff keeps every operator finite near the coincidence point `r = 0`;
/// refining it is how convergence towards the zero-range limit is studied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    law: SpacingLaw,
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, r_min: f64, r_max: f64, law: SpacingLaw) -> Result<Self, GridError> {
        if !r_min.is_finite() || !r_max.is_finite() {
            return Err(GridError::NonFinite);
        }
        if r_min <= 0.0 {
            return Err(GridError::NonPositiveRMin(r_min));
        }
        if r_max <= r_min {
            return Err(GridError::RMaxNotAboveRMin { r_min, r_max });
        }
        if n < 2 {
            return Err(GridError::TooFewNodes(n));
        }
        let last = (n - 1) as f64;
        let mut nodes: Vec<f64> = match law {
            SpacingLaw::Uniform => {
                let h = (r_max - r_min) / last;
                (0..n).map(|i| r_min + i as f64 * h).collect()
            }
            SpacingLaw::Logarithmic => {
                let (a, b) = (r_min.ln(), r_max.ln());
                let step = (b - a) / last;
                (0..n).map(|i| (a + i as f64 * step).exp()).collect()
            }
        };
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        Ok(Self {
            r_min,
            r_max,
            law,
            nodes,
        })
    }

    /// Uniform grid `h, 2h, ..., n h` with `h = r_max / n`, so that the Dirichlet point
    /// one step below the first node sits exactly at the origin.
    pub fn origin_aligned(n: usize, r_max: f64) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::TooFewNodes(n));
        }
        let h = r_max / n as f64;
        let mut grid = Self::new(n, h, r_max, SpacingLaw::Uniform)?;
        for (i, r) in grid.nodes.iter_mut().enumerate() {
            *r = (i + 1) as f64 * h;
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn law(&self) -> SpacingLaw {
        self.law
    }

    /// Constant node spacing for uniform grids.
    pub fn spacing(&self) -> Option<f64> {
        match self.law {
            SpacingLaw::Uniform => Some((self.r_max - self.r_min) / (self.len() - 1) as f64),
            SpacingLaw::Logarithmic => None,
        }
    }

    /// Radius of the inner Dirichlet point: one spacing below the first node.
    pub fn inner_boundary(&self) -> f64 {
        (self.nodes[0] - (self.nodes[1] - self.nodes[0])).max(0.0)
    }

    /// The same grid dilated by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            r_min: self.r_min * s,
            r_max: self.r_max * s,
            law: self.law,
            nodes: self.nodes.iter().map(|r| r * s).collect(),
        }
    }
}

/// Periodic cube `[-L/2, L/2)^3` with `m` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid3D {
    m: usize,
    side: f64,
}

impl BoxGrid3D {
    pub fn new(m: usize, side: f64) -> Result<Self, GridError> {
        if !m.is_power_of_two() {
            return Err(GridError::NotPowerOfTwo(m));
        }
        if m < 8 {
            return Err(GridError::BoxTooCoarse(m));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(GridError::BadSide(side));
        }
        Ok(Self { m, side })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn dx(&self) -> f64 {
        self.side / self.m as f64
    }

    /// Volume element `dx^3` used by every discrete integral on the box.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major flat index with x fastest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.m * (iy + self.m * iz)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.side + i as f64 * self.dx()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.coordinate(i)).collect()
    }

    /// Dual-lattice wavenumbers in FFT order: `2 pi / L * (0, 1, .., m/2 - 1, -m/2, .., -1)`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.m as i64;
        let dk = 2.0 * PI / self.side;
        (0..m)
            .map(|j| if j < m / 2 { j } else { j - m })
            .map(|j| j as f64 * dk)
            .collect()
    }

    /// `|k|^2` for every point of the flat FFT-ordered array.
    pub fn k_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let m = self.m;
        let mut out = Vec::with_capacity(self.len());
        for iz in 0..m {
            for iy in 0..m {
                for kx in &k {
                    out.push(kx * kx + k[iy] * k[iy] + k[iz] * k[iz]);
                }
            }
        }
        out
    }

    /// Largest `|k|^2` on the lattice (the corner of the Brillouin zone).
    pub fn max_k_squared(&self) -> f64 {
        let kmax = PI / self.dx();
        3.0 * kmax * kmax
    }

    /// `|x|^2` for every point of the flat array, measured from the box centre.
    pub fn r_squared(&self) -> Vec<f64> {
        let x = self.coordinates();
        let m = self.m;
        let mut out = Vec::with_capacity(self.len());
        for iz in 0..m {
            for iy in 0..m {
                for xx in &x {
                    out.push(xx * xx + x[iy] * x[iy] + x[iz] * x[iz]);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nodes_are_equally_spaced() {
        let g = RadialGrid::new(4, 0.25, 1.0, SpacingLaw::Uniform).unwrap();
        assert_eq!(g.nodes(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.spacing(), Some(0.25));
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert_eq!(
            RadialGrid::new(2, 1.0, 1.0, SpacingLaw::Uniform),
            Err(GridError::RMaxNotAboveRMin {
                r_min: 1.0,
                r_max: 1.0
            })
        );
        assert_eq!(
            RadialGrid::new(5, 0.0, 1.0, SpacingLaw::Uniform),
            Err(GridError::NonPositiveRMin(0.0))
        );
        assert_eq!(
            RadialGrid::new(1, 0.1, 1.0, SpacingLaw::Uniform),
            Err(GridError::TooFewNodes(1))
        );
    }

    #[test]
    fn logarithmic_ratio_is_constant() {
        let g = RadialGrid::new(1000, 1e-4, 50.0, SpacingLaw::Logarithmic).unwrap();
        let n = g.nodes();
        let q = n[1] / n[0];
        for w in n.windows(2) {
            assert!((w[1] / w[0] - q).abs() < 1e-12);
        }
        assert!(n[0] >= 1e-4 && n[999] <= 50.0);
    }

    #[test]
    fn origin_aligned_grid_starts_one_step_out() {
        let g = RadialGrid::origin_aligned(100, 1.0).unwrap();
        assert!((g.nodes()[0] - 0.01).abs() < 1e-15);
        assert!((g.nodes()[99] - 1.0).abs() < 1e-15);
        assert!(g.inner_boundary().abs() < 1e-15);
    }

    #[test]
    fn box_validation() {
        assert_eq!(BoxGrid3D::new(12, 1.0), Err(GridError::NotPowerOfTwo(12)));
        assert_eq!(BoxGrid3D::new(4, 1.0), Err(GridError::BoxTooCoarse(4)));
        let b = BoxGrid3D::new(8, 8.0).unwrap();
        assert_eq!(b.wavenumbers()[4], -PI);
        assert_eq!(b.coordinate(0), -4.0);
    }
}
