use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

/// Planned 3D transform on an `m^3` array stored with x fastest.
///
/// `forward` is unnormalized, `inverse` divides by `m^3`, so `inverse(forward(f)) = f`.
#[derive(Clone)]
pub struct Fft3 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft3").field("m", &self.m).finish()
    }
}

impl Fft3 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / (self.m * self.m * self.m) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m, "Fft3 buffer has wrong length");
        // x lines are contiguous
        fft.process(data);

        let mut lines = vec![Complex64::new(0.0, 0.0); m * m * m];
        // y lines: gather, transform in batch, scatter
        for iz in 0..m {
            for ix in 0..m {
                let line = &mut lines[(iz * m + ix) * m..(iz * m + ix + 1) * m];
                for (iy, v) in line.iter_mut().enumerate() {
                    *v = data[ix + m * (iy + m * iz)];
                }
            }
        }
        fft.process(&mut lines);
        for iz in 0..m {
            for ix in 0..m {
                let line = &lines[(iz * m + ix) * m..(iz * m + ix + 1) * m];
                for (iy, v) in line.iter().enumerate() {
                    data[ix + m * (iy + m * iz)] = *v;
                }
            }
        }
        // z lines
        for iy in 0..m {
            for ix in 0..m {
                let line = &mut lines[(iy * m + ix) * m..(iy * m + ix + 1) * m];
                for (iz, v) in line.iter_mut().enumerate() {
                    *v = data[ix + m * (iy + m * iz)];
                }
            }
        }
        fft.process(&mut lines);
        for iy in 0..m {
            for ix in 0..m {
                let line = &lines[(iy * m + ix) * m..(iy * m + ix + 1) * m];
                for (iz, v) in line.iter().enumerate() {
                    data[ix + m * (iy + m * iz)] = *v;
                }
            }
        }
    }
}

/// Orthonormal type-I discrete sine transform of length `n`,
/// `y_k = sqrt(2/(n+1)) sum_j x_j sin(pi j k / (n+1))` for `j, k = 1..n`.
///
/// The transform is its own inverse. It is evaluated through a complex FFT of the
/// odd extension of length `2(n+1)`.
#[derive(Clone)]
pub struct Dst1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Dst1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dst1").field("n", &self.n).finish()
    }
}

impl Dst1 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fft: planner.plan_fft_forward(2 * (n + 1)),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        assert!(x.len() == n && y.len() == n, "Dst1 length mismatch");
        let big = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); big];
        for j in 0..n {
            buf[j + 1] = Complex64::new(x[j], 0.0);
            buf[big - 1 - j] = Complex64::new(-x[j], 0.0);
        }
        self.fft.process(&mut buf);
        let s = -0.5 * (2.0 / (n + 1) as f64).sqrt();
        for k in 0..n {
            y[k] = s * buf[k + 1].im;
        }
    }
}
