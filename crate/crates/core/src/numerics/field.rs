use num_complex::Complex64;
use thiserror::Error;

use super::grid::{BoxGrid3D, RadialGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field has {got} values, grid needs {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("only s-wave (l = 0) radial fields are supported, got l = {0}")]
    AngularMomentum(u32),
}

/// Complex scalar field sampled on a periodic box.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: BoxGrid3D,
    pub values: Vec<Complex64>,
    pub norm_target: Option<f64>,
}

impl WaveField {
    pub fn zeros(grid: BoxGrid3D) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            norm_target: None,
        }
    }

    pub fn from_values(grid: BoxGrid3D, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            norm_target: None,
        })
    }

    /// Samples `f(x, y, z)` at the box points.
    pub fn from_fn(grid: BoxGrid3D, f: impl Fn(f64, f64, f64) -> Complex64) -> Self {
        let x = grid.coordinates();
        let m = grid.m();
        let mut values = Vec::with_capacity(grid.len());
        for iz in 0..m {
            for iy in 0..m {
                for xx in &x {
                    values.push(f(*xx, x[iy], x[iz]));
                }
            }
        }
        Self {
            grid,
            values,
            norm_target: None,
        }
    }

    pub fn with_norm_target(mut self, mass: f64) -> Self {
        self.norm_target = Some(mass);
        self
    }

    pub fn check_finite(&self) -> Result<(), FieldError> {
        match self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            Some(i) => Err(FieldError::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// `sum |psi|^2 dx^3`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Discrete `L^2` inner product `sum conj(self) * other dx^3`.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.cell_volume()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Rescales to the given mass; a zero field is left untouched.
    pub fn normalize_to(&mut self, mass: f64) {
        let current = self.mass();
        if current > 0.0 {
            self.scale((mass / current).sqrt());
        }
    }

    pub fn max_abs_diff(&self, other: &WaveField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Real samples of a radial function on a [`RadialGrid`].
///
/// `jumps` lists radii where the sampled function is discontinuous. A node that sits
/// exactly on a jump carries the mean of the one-sided limits.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub angular_momentum: u32,
    pub jumps: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        Ok(Self {
            grid,
            values,
            angular_momentum: 0,
            jumps: Vec::new(),
        })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
            angular_momentum: 0,
            jumps: Vec::new(),
        }
    }

    pub fn with_jumps(mut self, jumps: Vec<f64>) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn require_s_wave(&self) -> Result<(), FieldError> {
        if self.angular_momentum != 0 {
            return Err(FieldError::AngularMomentum(self.angular_momentum));
        }
        Ok(())
    }

    /// Pointwise sum; jump lists are merged.
    pub fn add(&self, other: &RadialField) -> Result<RadialField, FieldError> {
        if other.values.len() != self.values.len() {
            return Err(FieldError::SizeMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        let mut jumps: Vec<f64> = self.jumps.iter().chain(&other.jumps).copied().collect();
        jumps.sort_by(f64::total_cmp);
        jumps.dedup();
        Ok(RadialField {
            grid: self.grid.clone(),
            values,
            angular_momentum: self.angular_momentum,
            jumps,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
