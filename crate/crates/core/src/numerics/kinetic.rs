use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use super::eigen::SymmetricOperator;
use super::fft::{Dst1, Fft3};
use super::field::{FieldError, WaveField};
use super::grid::{BoxGrid3D, RadialGrid, SpacingLaw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticError {
    #[error("kinetic order must be 1 or 2, got {0}")]
    UnsupportedOrder(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("field grid does not match the operator grid")]
    GridMismatch,
    #[error("half-line kinetic operator needs a uniform grid whose first node is one spacing from the origin")]
    NotOriginAligned,
}

/// Fourier multiplier `|k|^order` on a periodic box: `-Delta` for order 2 and
/// `sqrt(-Delta)` for order 1.
#[derive(Debug, Clone)]
pub struct KineticOperator {
    grid: BoxGrid3D,
    fft: Fft3,
    multiplier: Vec<f64>,
}

impl KineticOperator {
    pub fn new(grid: BoxGrid3D, order: f64) -> Result<Self, KineticError> {
        let k2 = grid.k_squared();
        let multiplier = if order == 2.0 {
            k2
        } else if order == 1.0 {
            k2.into_iter().map(f64::sqrt).collect()
        } else {
            return Err(KineticError::UnsupportedOrder(order));
        };
        Ok(Self {
            grid,
            fft: Fft3::new(grid.m()),
            multiplier,
        })
    }

    pub fn grid(&self) -> &BoxGrid3D {
        &self.grid
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    pub fn apply_values(&self, values: &mut [Complex64]) {
        self.fft.forward(values);
        for (v, s) in values.iter_mut().zip(&self.multiplier) {
            *v *= *s;
        }
        self.fft.inverse(values);
    }

    pub fn apply(&self, field: &WaveField) -> Result<WaveField, KineticError> {
        if field.grid != self.grid {
            return Err(KineticError::GridMismatch);
        }
        field.check_finite()?;
        let mut out = field.clone();
        self.apply_values(&mut out.values);
        Ok(out)
    }
}

/// Applies `|k|^order` (order 1 or 2) to a periodic field.
pub fn apply_kinetic(field: &WaveField, order: f64) -> Result<WaveField, KineticError> {
    KineticOperator::new(field.grid, order)?.apply(field)
}

/// `sqrt(-d^2/dr^2)` on the half-line with Dirichlet ends, defined spectrally in the sine
/// basis. Acting on `u = r phi` this is the s-wave restriction of `sqrt(H0)` in 3D.
///
/// Nodes must be `h, 2h, .., n h`; the sine modes vanish at `0` and `(n+1) h`.
#[derive(Debug, Clone)]
pub struct RadialSqrtKinetic {
    h: f64,
    dst: Dst1,
    symbol: Vec<f64>,
}

impl RadialSqrtKinetic {
    pub fn new(grid: &RadialGrid) -> Result<Self, KineticError> {
        let h = match (grid.law(), grid.spacing()) {
            (SpacingLaw::Uniform, Some(h)) => h,
            _ => return Err(KineticError::NotOriginAligned),
        };
        if (grid.nodes()[0] - h).abs() > 1e-9 * h {
            return Err(KineticError::NotOriginAligned);
        }
        let n = grid.len();
        let length = (n + 1) as f64 * h;
        let symbol = (1..=n).map(|m| PI * m as f64 / length).collect();
        Ok(Self {
            h,
            dst: Dst1::new(n),
            symbol,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Multiplier `|k_m| = pi m / ((n+1) h)` of each sine mode.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }
}

impl SymmetricOperator for RadialSqrtKinetic {
    fn dim(&self) -> usize {
        self.symbol.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut modes = vec![0.0; x.len()];
        self.dst.apply(x, &mut modes);
        for (c, k) in modes.iter_mut().zip(&self.symbol) {
            *c *= k;
        }
        self.dst.apply(&modes, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane_wave(grid: BoxGrid3D, n: [i32; 3]) -> (WaveField, f64) {
        let dk = 2.0 * PI / grid.side();
        let k = [n[0] as f64 * dk, n[1] as f64 * dk, n[2] as f64 * dk];
        let f = WaveField::from_fn(grid, |x, y, z| {
            Complex64::from_polar(1.0, k[0] * x + k[1] * y + k[2] * z)
        });
        (f, (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt())
    }

    #[test]
    fn plane_wave_scaled_by_k_power() {
        let grid = BoxGrid3D::new(16, 5.0).unwrap();
        let (f, kabs) = plane_wave(grid, [2, -1, 3]);
        for (order, factor) in [(2.0, kabs * kabs), (1.0, kabs)] {
            let out = apply_kinetic(&f, order).unwrap();
            for (a, b) in out.values.iter().zip(&f.values) {
                assert!((a - b * factor).norm() < 1e-10 * factor);
            }
        }
    }

    #[test]
    fn zero_in_zero_out_and_bad_order() {
        let grid = BoxGrid3D::new(8, 1.0).unwrap();
        let z = WaveField::zeros(grid);
        assert_eq!(apply_kinetic(&z, 2.0).unwrap(), z);
        assert_eq!(
            apply_kinetic(&z, 1.5).unwrap_err(),
            KineticError::UnsupportedOrder(1.5)
        );
        let mut bad = z.clone();
        bad.values[3].re = f64::NAN;
        assert!(matches!(
            apply_kinetic(&bad, 2.0),
            Err(KineticError::Field(FieldError::NonFinite(3)))
        ));
    }

    #[test]
    fn order_one_squared_is_order_two() {
        let grid = BoxGrid3D::new(16, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals = (0..grid.len())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let f = WaveField::from_values(grid, vals).unwrap();
        let once = apply_kinetic(&apply_kinetic(&f, 1.0).unwrap(), 1.0).unwrap();
        let twice = apply_kinetic(&f, 2.0).unwrap();
        let scale = twice.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(once.max_abs_diff(&twice) < 1e-10 * scale);
    }

    #[test]
    fn radial_sqrt_kinetic_squares_to_sine_laplacian() {
        let grid = RadialGrid::origin_aligned(31, 2.0).unwrap();
        let t = RadialSqrtKinetic::new(&grid).unwrap();
        let n = grid.len();
        let h = t.spacing();
        // sine mode 3 is an eigenvector with eigenvalue pi*3/((n+1)h)
        let mode: Vec<f64> = (1..=n)
            .map(|j| (PI * 3.0 * j as f64 / (n + 1) as f64).sin())
            .collect();
        let mut out = vec![0.0; n];
        t.apply(&mode, &mut out);
        let k = PI * 3.0 / ((n + 1) as f64 * h);
        for (a, b) in out.iter().zip(&mode) {
            assert!((a - k * b).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_sqrt_kinetic_rejects_shifted_grid() {
        let grid = RadialGrid::new(10, 0.5, 1.0, SpacingLaw::Uniform).unwrap();
        assert_eq!(
            RadialSqrtKinetic::new(&grid).unwrap_err(),
            KineticError::NotOriginAligned
        );
    }
}
