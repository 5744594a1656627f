use num_complex::Complex64;

use super::{MeanFieldConfig, MeanFieldError, Nonlinearity, Trap};
use crate::numerics::{BoxGrid3D, Fft3, WaveField};

/// Energy split into its three contributions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(kinetic: f64, trap: f64, interaction: f64) -> Self {
        Self {
            kinetic,
            trap,
            interaction,
            total: kinetic + trap + interaction,
        }
    }
}

/// Everything about a configuration that depends on the grid, precomputed once.
#[derive(Debug, Clone)]
pub struct MeanFieldSystem {
    pub(crate) cfg: MeanFieldConfig,
    pub(crate) grid: BoxGrid3D,
    pub(crate) fft: Fft3,
    pub(crate) k2: Vec<f64>,
    pub(crate) trap: Vec<f64>,
    /// Fourier symbol of the spherical mean, `sin(|k| r0) / (|k| r0)`.
    pub(crate) shell: Option<Vec<f64>>,
}

/// Fourier symbol of the normalized surface measure on the sphere of radius `r0`.
pub(crate) fn shell_symbol(grid: &BoxGrid3D, r0: f64) -> Vec<f64> {
    grid.k_squared()
        .into_iter()
        .map(|k2| {
            let x = k2.sqrt() * r0;
            if x < 1e-8 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        })
        .collect()
}

pub(crate) fn check_shell_radius(grid: &BoxGrid3D, r0: f64) -> Result<(), MeanFieldError> {
    let (lo, hi) = (grid.dx(), grid.side() / 4.0);
    if !(r0 > lo && r0 < hi) {
        return Err(MeanFieldError::ShellRadius { r0, min: lo, max: hi });
    }
    Ok(())
}

impl MeanFieldSystem {
    pub fn new(cfg: &MeanFieldConfig, grid: BoxGrid3D) -> Result<Self, MeanFieldError> {
        cfg.validate()?;
        let r2 = grid.r_squared();
        let trap = match &cfg.trap {
            Trap::None => vec![0.0; grid.len()],
            Trap::Harmonic { omega } => r2.iter().map(|r| omega * omega * r).collect(),
            Trap::UserTable { radii, values } => r2.iter().map(|r| interp(radii, values, r.sqrt())).collect(),
        };
        let shell = match cfg.nonlinearity {
            Nonlinearity::Cubic => None,
            Nonlinearity::Shell { r0 } => {
                check_shell_radius(&grid, r0)?;
                Some(shell_symbol(&grid, r0))
            }
        };
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            fft: Fft3::new(grid.m()),
            k2: grid.k_squared(),
            trap,
            shell,
        })
    }

    pub fn config(&self) -> &MeanFieldConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &BoxGrid3D {
        &self.grid
    }

    pub fn trap_values(&self) -> &[f64] {
        &self.trap
    }

    pub(crate) fn check(&self, field: &WaveField) -> Result<(), MeanFieldError> {
        if field.grid != self.grid {
            return Err(MeanFieldError::GridMismatch);
        }
        field.check_finite()?;
        Ok(())
    }

    /// `-Delta psi`
    pub(crate) fn laplacian(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fft.forward(&mut buf);
        for (v, k2) in buf.iter_mut().zip(&self.k2) {
            *v *= *k2;
        }
        self.fft.inverse(&mut buf);
        buf
    }

    /// `(-Delta + V) psi`
    pub(crate) fn linear(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.laplacian(values);
        for ((o, v), t) in out.iter_mut().zip(values).zip(&self.trap) {
            *o += v * t;
        }
        out
    }

    /// `S[rho]`: identity for the cubic mode, spherical mean for the shell mode.
    pub(crate) fn smear(&self, rho: &[f64]) -> Vec<f64> {
        match &self.shell {
            None => rho.to_vec(),
            Some(symbol) => {
                let mut buf: Vec<Complex64> = rho.iter().map(|r| Complex64::new(*r, 0.0)).collect();
                self.fft.forward(&mut buf);
                for (v, s) in buf.iter_mut().zip(symbol) {
                    *v *= *s;
                }
                self.fft.inverse(&mut buf);
                buf.iter().map(|v| v.re).collect()
            }
        }
    }

    /// Interaction energy `-g sum rho S[rho] dx^3`.
    pub(crate) fn interaction(&self, values: &[Complex64]) -> f64 {
        if self.cfg.g == 0.0 {
            return 0.0;
        }
        let rho: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
        let s = self.smear(&rho);
        -self.cfg.g * rho.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    pub(crate) fn energy_values(&self, values: &[Complex64]) -> EnergyBreakdown {
        let dv = self.grid.cell_volume();
        let mut hat = values.to_vec();
        self.fft.forward(&mut hat);
        let n = self.grid.len() as f64;
        let kinetic = hat.iter().zip(&self.k2).map(|(v, k2)| k2 * v.norm_sqr()).sum::<f64>() * dv / n;
        let trap = values.iter().zip(&self.trap).map(|(v, t)| t * v.norm_sqr()).sum::<f64>() * dv;
        EnergyBreakdown::new(kinetic, trap, self.interaction(values))
    }

    pub fn energy(&self, field: &WaveField) -> Result<EnergyBreakdown, MeanFieldError> {
        self.check(field)?;
        Ok(self.energy_values(&field.values))
    }

    /// `(-Delta + V) psi - 2 g psi S[|psi|^2]`; with this convention
    /// `dE = 2 Re <gradient, eta> dx^3`.
    pub(crate) fn gradient_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.linear(values);
        if self.cfg.g != 0.0 {
            let rho: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
            let s = self.smear(&rho);
            let two_g = 2.0 * self.cfg.g;
            for ((o, v), s) in out.iter_mut().zip(values).zip(&s) {
                *o -= v * (two_g * s);
            }
        }
        out
    }

    pub fn gradient(&self, field: &WaveField) -> Result<WaveField, MeanFieldError> {
        self.check(field)?;
        Ok(WaveField::from_values(self.grid, self.gradient_values(&field.values))?)
    }

    /// Gradient minus its component along the field: `G - mu psi` with
    /// `mu = Re <psi, G> / N`. Returns the projected gradient and `mu`.
    pub fn projected_gradient(&self, field: &WaveField) -> Result<(WaveField, f64), MeanFieldError> {
        let g = self.gradient(field)?;
        let mass = field.mass();
        if mass == 0.0 {
            return Ok((g, 0.0));
        }
        let mu = field.inner(&g).re / mass;
        let mut r = g;
        for (a, b) in r.values.iter_mut().zip(&field.values) {
            *a -= b * mu;
        }
        Ok((r, mu))
    }
}

fn interp(radii: &[f64], values: &[f64], r: f64) -> f64 {
    let last = radii.len() - 1;
    if r >= radii[last] {
        return values[last];
    }
    if r <= radii[0] {
        return values[0];
    }
    let j = radii.partition_point(|x| *x < r);
    let t = (r - radii[j - 1]) / (radii[j] - radii[j - 1]);
    values[j - 1] + t * (values[j] - values[j - 1])
}

pub fn gp_energy(field: &WaveField, cfg: &MeanFieldConfig) -> Result<EnergyBreakdown, MeanFieldError> {
    MeanFieldSystem::new(cfg, field.grid)?.energy(field)
}

pub fn gp_gradient(field: &WaveField, cfg: &MeanFieldConfig) -> Result<WaveField, MeanFieldError> {
    MeanFieldSystem::new(cfg, field.grid)?.gradient(field)
}

/// `psi S[|psi|^2]` with `S` the average over the sphere of radius `r0`.
pub fn shell_nonlinearity(field: &WaveField, r0: f64) -> Result<WaveField, MeanFieldError> {
    field.check_finite()?;
    check_shell_radius(&field.grid, r0)?;
    let fft = Fft3::new(field.grid.m());
    let symbol = shell_symbol(&field.grid, r0);
    let mut buf: Vec<Complex64> = field.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
    fft.forward(&mut buf);
    for (v, s) in buf.iter_mut().zip(&symbol) {
        *v *= *s;
    }
    fft.inverse(&mut buf);
    let values = field.values.iter().zip(&buf).map(|(p, s)| p * s.re).collect();
    Ok(WaveField::from_values(field.grid, values)?)
}

/// `psi |psi|^2`
pub fn cubic_nonlinearity(field: &WaveField) -> WaveField {
    let values = field.values.iter().map(|p| p * p.norm_sqr()).collect();
    WaveField {
        grid: field.grid,
        values,
        norm_target: None,
    }
}
