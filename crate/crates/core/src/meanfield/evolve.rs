use num_complex::Complex64;
use std::f64::consts::PI;

use super::functional::{EnergyBreakdown, MeanFieldSystem};
use super::{MeanFieldConfig, MeanFieldError};
use crate::numerics::WaveField;

/// Largest admissible `dt * max |k|^2`: beyond it the kinetic phase of the highest
/// mode wraps past `pi` per step.
pub const STABILITY_LIMIT: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectorySample {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub energy: EnergyBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// `(time, field)` copies taken every `snapshot_every` steps.
    pub snapshots: Vec<(f64, WaveField)>,
    /// Field after the last completed step.
    pub final_field: WaveField,
}

impl MeanFieldSystem {
    pub fn stability_number(&self) -> f64 {
        self.cfg.dt * self.grid.max_k_squared()
    }

    fn kinetic_phase(&self, values: &mut [Complex64], phase: &[Complex64]) {
        self.fft.forward(values);
        for (v, p) in values.iter_mut().zip(phase) {
            *v *= p;
        }
        self.fft.inverse(values);
    }

    /// Pointwise `exp(-i dt (V - 2 g S[|psi|^2]))`; the density is unchanged by it.
    fn potential_phase(&self, values: &mut [Complex64]) {
        let dt = self.cfg.dt;
        let two_g = 2.0 * self.cfg.g;
        let smeared = if self.cfg.g != 0.0 {
            let rho: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
            self.smear(&rho)
        } else {
            vec![0.0; values.len()]
        };
        for ((v, t), s) in values.iter_mut().zip(&self.trap).zip(&smeared) {
            *v *= Complex64::from_polar(1.0, -dt * (t - two_g * s));
        }
    }

    /// Strang splitting `K(dt/2) N(dt) K(dt/2)` for `i psi_t = (-Delta + V) psi - 2 g psi S[|psi|^2]`.
    ///
    /// Consecutive half kinetic steps are fused between samples.
    pub fn evolve(&self, init: &WaveField) -> Result<Trajectory, MeanFieldError> {
        self.check(init)?;
        let cfg = &self.cfg;
        let number = self.stability_number();
        if number > STABILITY_LIMIT {
            return Err(MeanFieldError::Unstable {
                dt: cfg.dt,
                dt_max: STABILITY_LIMIT / self.grid.max_k_squared(),
            });
        }
        let half: Vec<Complex64> = self.k2.iter().map(|k2| Complex64::from_polar(1.0, -0.5 * cfg.dt * k2)).collect();
        let full: Vec<Complex64> = self.k2.iter().map(|k2| Complex64::from_polar(1.0, -cfg.dt * k2)).collect();
        let dv = self.grid.cell_volume();
        let sample = |step: usize, v: &[Complex64]| TrajectorySample {
            step,
            time: step as f64 * cfg.dt,
            mass: v.iter().map(|x| x.norm_sqr()).sum::<f64>() * dv,
            energy: self.energy_values(v),
        };

        let mut psi = init.values.clone();
        let mut samples = vec![sample(0, &psi)];
        let mut snapshots = Vec::new();
        if cfg.snapshot_every > 0 {
            snapshots.push((0.0, init.clone()));
        }
        let mut last_valid = psi.clone();
        let is_sync = |step: usize| {
            step == cfg.steps
                || (cfg.sample_every > 0 && step.is_multiple_of(cfg.sample_every))
                || (cfg.snapshot_every > 0 && step.is_multiple_of(cfg.snapshot_every))
        };

        // psi is "synchronized" when no pending half kinetic step is owed
        let mut synced = true;
        for step in 1..=cfg.steps {
            if synced {
                self.kinetic_phase(&mut psi, &half);
            }
            self.potential_phase(&mut psi);
            if is_sync(step) {
                self.kinetic_phase(&mut psi, &half);
                synced = true;
            } else {
                self.kinetic_phase(&mut psi, &full);
                synced = false;
            }
            if psi.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                let partial = Trajectory {
                    samples,
                    snapshots,
                    final_field: WaveField::from_values(self.grid, last_valid)?,
                };
                return Err(MeanFieldError::Blowup {
                    step,
                    time: step as f64 * cfg.dt,
                    partial: Box::new(partial),
                });
            }
            if synced {
                last_valid.copy_from_slice(&psi);
                if step == cfg.steps || (cfg.sample_every > 0 && step.is_multiple_of(cfg.sample_every)) {
                    samples.push(sample(step, &psi));
                }
                if cfg.snapshot_every > 0 && step.is_multiple_of(cfg.snapshot_every) {
                    snapshots.push((step as f64 * cfg.dt, WaveField::from_values(self.grid, psi.clone())?));
                }
            }
        }
        Ok(Trajectory {
            samples,
            snapshots,
            final_field: WaveField::from_values(self.grid, psi)?,
        })
    }
}

pub fn evolve(init: &WaveField, cfg: &MeanFieldConfig) -> Result<Trajectory, MeanFieldError> {
    MeanFieldSystem::new(cfg, init.grid)?.evolve(init)
}
