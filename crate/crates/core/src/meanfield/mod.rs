//! Focusing Gross-Pitaevskii functional on a periodic box, in the local cubic form
//! and the shell-averaged form.
//!
//! Conventions: `E(psi) = <psi, (-Delta + V) psi> - g int rho S[rho]` with
//! `rho = |psi|^2`, where `S` is the identity (cubic) or the average over spheres of
//! radius `r0` (shell). The gradient is `(-Delta + V) psi - 2 g psi S[rho]`, and the
//! same operator generates the dynamics `i psi_t = gradient`.

mod evolve;
mod functional;
mod ground;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::FieldError;

pub use evolve::{evolve, Trajectory, TrajectorySample, STABILITY_LIMIT};
pub use functional::{
    cubic_nonlinearity, gp_energy, gp_gradient, shell_nonlinearity, EnergyBreakdown, MeanFieldSystem,
};
pub use ground::{ground_state, GPState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Trap {
    None,
    /// `omega^2 |x|^2`
    Harmonic { omega: f64 },
    /// Radial table, linearly interpolated and constant beyond both ends.
    UserTable { radii: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    Cubic,
    Shell { r0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldConfig {
    pub g: f64,
    pub trap: Trap,
    pub nonlinearity: Nonlinearity,
    /// Normalization target `int |psi|^2`.
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    /// Ground-state stopping threshold on the projected gradient.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Evolution records mass and energy every this many steps (0: start and end only).
    pub sample_every: usize,
    /// Evolution keeps a field copy every this many steps (0: none).
    pub snapshot_every: usize,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            g: 0.0,
            trap: Trap::Harmonic { omega: 1.0 },
            nonlinearity: Nonlinearity::Cubic,
            mass: 1.0,
            dt: 1e-3,
            steps: 1000,
            tolerance: 1e-8,
            max_iter: 5000,
            sample_every: 100,
            snapshot_every: 0,
        }
    }
}

impl MeanFieldConfig {
    pub fn validate(&self) -> Result<(), MeanFieldError> {
        let bad = |msg: String| Err(MeanFieldError::InvalidConfig(msg));
        if !(self.g.is_finite() && self.g >= 0.0) {
            return bad(format!("g must be finite and nonnegative, got {}", self.g));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        match &self.trap {
            Trap::Harmonic { omega } if !(omega.is_finite() && *omega > 0.0) => {
                return bad(format!("trap frequency must be positive, got {omega}"));
            }
            Trap::UserTable { radii, values } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return bad("trap table needs at least two (radius, value) pairs".into());
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().chain(values).any(|v| !v.is_finite()) {
                    return bad("trap table radii must increase and all entries be finite".into());
                }
            }
            _ => {}
        }
        if let Nonlinearity::Shell { r0 } = self.nonlinearity {
            if !(r0.is_finite() && r0 > 0.0) {
                return bad(format!("shell radius must be positive, got {r0}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanFieldError {
    #[error("invalid mean-field configuration: {0}")]
    InvalidConfig(String),
    #[error("field lives on a different grid than the configuration")]
    GridMismatch,
    #[error("shell radius {r0} must lie in ({min}, {max})")]
    ShellRadius { r0: f64, min: f64, max: f64 },
    #[error("ground states need a confining trap")]
    TrapRequired,
    #[error("initial field is zero")]
    ZeroInitialField,
    #[error("focusing collapse after {iterations} iterations: energy {energy}, width^2 {width_squared}")]
    Collapse {
        iterations: usize,
        energy: f64,
        width_squared: f64,
    },
    #[error("no convergence after {iterations} iterations (projected gradient {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("time step {dt} exceeds the splitting limit {dt_max}")]
    Unstable { dt: f64, dt_max: f64 },
    #[error("field became non-finite at step {step} (t = {time})")]
    Blowup {
        step: usize,
        time: f64,
        partial: Box<Trajectory>,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{BoxGrid3D, WaveField};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian(grid: BoxGrid3D, width: f64) -> WaveField {
        let mut f = WaveField::from_fn(grid, |x, y, z| {
            Complex64::new((-(x * x + y * y + z * z) / (2.0 * width * width)).exp(), 0.0)
        });
        f.normalize_to(1.0);
        f
    }

    #[test]
    fn oscillator_energy_of_gaussian() {
        let grid = BoxGrid3D::new(32, 16.0).unwrap();
        let f = gaussian(grid, 1.0);
        let e = gp_energy(&f, &MeanFieldConfig::default()).unwrap();
        assert!((e.total - 3.0).abs() < 1e-6);
        assert!((e.kinetic - 1.5).abs() < 1e-6 && (e.trap - 1.5).abs() < 1e-6);
        assert_eq!(e.interaction, 0.0);
    }

    #[test]
    fn quartic_integral_of_gaussian() {
        // phi = pi^{-3/4} exp(-r^2/2): int |phi|^4 = pi^-3 (pi/2)^{3/2} = (2 pi)^{-3/2}
        let grid = BoxGrid3D::new(32, 16.0).unwrap();
        let f = gaussian(grid, 1.0);
        let cfg = MeanFieldConfig {
            g: 0.1,
            ..Default::default()
        };
        let e = gp_energy(&f, &cfg).unwrap();
        let quartic = (2.0 * PI).powf(-1.5);
        assert!((e.total - (3.0 - 0.1 * quartic)).abs() < 1e-6);
    }

    #[test]
    fn zero_field_has_zero_energy_and_gradient() {
        let grid = BoxGrid3D::new(8, 4.0).unwrap();
        let z = WaveField::zeros(grid);
        let cfg = MeanFieldConfig {
            g: 1.0,
            ..Default::default()
        };
        let e = gp_energy(&z, &cfg).unwrap();
        assert_eq!((e.kinetic, e.trap, e.interaction, e.total), (0.0, 0.0, 0.0, 0.0));
        assert!(gp_gradient(&z, &cfg).unwrap().values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_field_shell_average() {
        let grid = BoxGrid3D::new(16, 8.0).unwrap();
        let c = Complex64::new(0.6, -0.3);
        let f = WaveField::from_fn(grid, |_, _, _| c);
        let out = shell_nonlinearity(&f, 1.0).unwrap();
        let expect = c * c.norm_sqr();
        assert!(out.values.iter().all(|v| (v - expect).norm() < 1e-15));
        assert!(matches!(shell_nonlinearity(&f, 0.1), Err(MeanFieldError::ShellRadius { .. })));
        assert!(matches!(shell_nonlinearity(&f, 2.5), Err(MeanFieldError::ShellRadius { .. })));
    }

    #[test]
    fn trap_is_required_for_ground_states() {
        let grid = BoxGrid3D::new(8, 8.0).unwrap();
        let cfg = MeanFieldConfig {
            trap: Trap::None,
            ..Default::default()
        };
        assert_eq!(ground_state(&cfg, &gaussian(grid, 1.0)).unwrap_err(), MeanFieldError::TrapRequired);
    }

    #[test]
    fn unstable_time_step_is_rejected() {
        let grid = BoxGrid3D::new(16, 8.0).unwrap();
        let cfg = MeanFieldConfig {
            dt: 1.0,
            ..Default::default()
        };
        assert!(matches!(evolve(&gaussian(grid, 1.0), &cfg), Err(MeanFieldError::Unstable { .. })));
    }
}
