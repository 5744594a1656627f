use num_complex::Complex64;

use super::functional::{EnergyBreakdown, MeanFieldSystem};
use super::{MeanFieldConfig, MeanFieldError, Trap};
use crate::numerics::WaveField;

/// A converged (or final) mean-field state.
#[derive(Debug, Clone, PartialEq)]
pub struct GPState {
    pub field: WaveField,
    pub energy: EnergyBreakdown,
    /// `|G - mu psi|_2` at the returned field.
    pub gradient_residual: f64,
    pub chemical_potential: f64,
    pub iterations: usize,
    /// Total energy after every accepted step, starting with the normalized input.
    pub energy_history: Vec<f64>,
}

/// Energy drops more than this many times `|E_init|` count as collapse when the
/// width is also shrinking.
const COLLAPSE_DROP: f64 = 10.0;

/// Accepted steps may raise the energy by at most this relative amount (round-off).
const ENERGY_SLACK: f64 = 1e-13;

fn re_dot(a: &[Complex64], b: &[Complex64], dv: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>() * dv
}

fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * a;
    }
}

impl MeanFieldSystem {
    fn width_squared(&self, values: &[Complex64], mass: f64) -> f64 {
        let r2 = self.grid.r_squared();
        values.iter().zip(&r2).map(|(v, r)| r * v.norm_sqr()).sum::<f64>() * self.grid.cell_volume() / mass
    }

    /// `(|k|^2 + alpha)^-1` applied spectrally.
    fn precondition(&self, values: &[Complex64], alpha: f64) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fft.forward(&mut buf);
        for (v, k2) in buf.iter_mut().zip(&self.k2) {
            *v /= k2 + alpha;
        }
        self.fft.inverse(&mut buf);
        buf
    }

    /// Minimizes the energy on the sphere `|psi|^2 = mass` by preconditioned
    /// nonlinear conjugate gradients along great circles, with an Armijo line search
    /// so that every accepted step lowers the energy.
    pub fn ground_state(&self, init: &WaveField) -> Result<GPState, MeanFieldError> {
        let cfg = &self.cfg;
        if matches!(cfg.trap, Trap::None) {
            return Err(MeanFieldError::TrapRequired);
        }
        self.check(init)?;
        if init.mass() == 0.0 {
            return Err(MeanFieldError::ZeroInitialField);
        }
        let dv = self.grid.cell_volume();
        let mass = cfg.mass;
        let mut phi = init.clone();
        phi.normalize_to(mass);
        let mut psi = phi.values;

        let mut energy = self.energy_values(&psi);
        let e_init = energy.total;
        let w_init = self.width_squared(&psi, mass);
        // mean square radius of a state squeezed onto a few cells
        let min_width = self.grid.dx().powi(2);
        let mut history = vec![energy.total];

        let mut prev_r: Option<Vec<Complex64>> = None;
        let mut prev_z: Option<Vec<Complex64>> = None;
        let mut prev_dir: Option<Vec<Complex64>> = None;
        let mut iterations = 0;
        loop {
            let grad = self.gradient_values(&psi);
            let mu = re_dot(&psi, &grad, dv) / mass;
            let mut r = grad;
            axpy(&mut r, -mu, &psi);
            let residual = re_dot(&r, &r, dv).sqrt();
            if residual <= cfg.tolerance {
                return Ok(GPState {
                    field: WaveField::from_values(self.grid, psi)?.with_norm_target(mass),
                    energy,
                    gradient_residual: residual,
                    chemical_potential: mu,
                    iterations,
                    energy_history: history,
                });
            }
            if iterations >= cfg.max_iter {
                return Err(MeanFieldError::NoConvergence {
                    iterations,
                    residual,
                });
            }

            let alpha = (energy.kinetic + energy.trap).max(0.0) / mass + 1.0;
            let mut z = self.precondition(&r, alpha);
            let along = re_dot(&psi, &z, dv) / mass;
            axpy(&mut z, -along, &psi);

            let beta = match (&prev_r, &prev_z) {
                (Some(pr), Some(pz)) => {
                    let denom = re_dot(pr, pz, dv);
                    let diff: Vec<Complex64> = r.iter().zip(pr).map(|(a, b)| a - b).collect();
                    (re_dot(&diff, &z, dv) / denom).max(0.0)
                }
                _ => 0.0,
            };
            let mut dir: Vec<Complex64> = z.iter().map(|v| -v).collect();
            if let Some(pd) = &prev_dir {
                if beta > 0.0 {
                    axpy(&mut dir, beta, pd);
                }
            }
            // keep the direction tangent and descending
            let along = re_dot(&psi, &dir, dv) / mass;
            axpy(&mut dir, -along, &psi);
            if re_dot(&r, &dir, dv) >= 0.0 {
                dir = z.iter().map(|v| -v).collect();
            }

            let dnorm = re_dot(&dir, &dir, dv).sqrt();
            let q: Vec<Complex64> = dir.iter().map(|v| v * (mass.sqrt() / dnorm)).collect();
            // E'(0) along the great circle
            let slope = 2.0 * re_dot(&r, &q, dv);

            // quadratic part of E(theta) is exact: c^2 A + s^2 B + 2 c s C
            let hq = self.linear(&q);
            let hpsi = self.linear(&psi);
            let a_q = re_dot(&psi, &hpsi, dv);
            let b_q = re_dot(&q, &hq, dv);
            let c_q = re_dot(&psi, &hq, dv);
            // E(theta) - E(0), with the quadratic part differenced analytically so
            // that no two O(1) grid sums are subtracted
            let trial = |theta: f64| -> (Vec<Complex64>, f64) {
                let (s, c) = theta.sin_cos();
                let v: Vec<Complex64> = psi.iter().zip(&q).map(|(p, d)| p * c + d * s).collect();
                let quad = s * s * (b_q - a_q) + 2.0 * c * s * c_q;
                let de = quad + (self.interaction(&v) - energy.interaction);
                (v, de)
            };

            let curvature = 2.0 * (b_q - a_q);
            let mut theta = if curvature > 0.0 { -slope / curvature } else { 0.1 };
            theta = theta.clamp(1e-8, 0.5);
            let slack = ENERGY_SLACK * energy.total.abs().max(1.0);
            let mut accepted = None;
            for _ in 0..40 {
                let (v, de) = trial(theta);
                if de <= 1e-4 * theta * slope {
                    accepted = Some((v, de));
                    break;
                }
                if de <= slack {
                    // Energy differences are at round-off level here, so the step is
                    // judged by the directional derivative, which has no cancellation.
                    let (sn, cs) = theta.sin_cos();
                    let tangent: Vec<Complex64> = psi.iter().zip(&q).map(|(p, d)| d * cs - p * sn).collect();
                    let d_theta = 2.0 * re_dot(&self.gradient_values(&v), &tangent, dv);
                    if d_theta.abs() < slope.abs() {
                        accepted = Some((v, de));
                        break;
                    }
                }
                theta *= 0.5;
            }
            let Some((v, _)) = accepted else {
                return Err(MeanFieldError::NoConvergence {
                    iterations,
                    residual,
                });
            };
            psi = v;
            // exact renormalization against drift from the trigonometric update
            let m_now = psi.iter().map(|x| x.norm_sqr()).sum::<f64>() * dv;
            let fix = (mass / m_now).sqrt();
            psi.iter_mut().for_each(|x| *x *= fix);
            energy = self.energy_values(&psi);
            history.push(energy.total);
            iterations += 1;

            let w = self.width_squared(&psi, mass);
            let dropped = energy.total < e_init - COLLAPSE_DROP * e_init.abs();
            if w < w_init && (dropped || w < min_width) {
                return Err(MeanFieldError::Collapse {
                    iterations,
                    energy: energy.total,
                    width_squared: w,
                });
            }

            prev_r = Some(r);
            prev_z = Some(z);
            prev_dir = Some(q.iter().map(|x| x * (dnorm / mass.sqrt())).collect());
        }
    }
}

/// Ground state for `cfg` started from `init`.
pub fn ground_state(cfg: &MeanFieldConfig, init: &WaveField) -> Result<GPState, MeanFieldError> {
    MeanFieldSystem::new(cfg, init.grid)?.ground_state(init)
}
