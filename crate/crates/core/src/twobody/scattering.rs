use serde::{Deserialize, Serialize};

use super::{realize_potential, PotentialSpec, TwobodyError};
use crate::numerics::{RadialField, RadialGrid};

/// Fraction of the grid (outermost nodes) used to fit `u(r) = c (r - a)`.
pub const FIT_WINDOW: f64 = 0.25;

/// Potential values in the fit window must be below this fraction of `max |V|`.
const WINDOW_LEAK: f64 = 1e-12;

/// `exp` of the traceless matrix `[[p, q], [s, -p]]`.
fn expm_traceless(p: f64, q: f64, s: f64) -> [[f64; 2]; 2] {
    let d = p * p + q * s;
    let (c, sh) = if d.abs() < 1e-8 {
        // series in d keeps the small-argument case accurate
        (1.0 + d / 2.0 + d * d / 24.0, 1.0 + d / 6.0 + d * d / 120.0)
    } else if d > 0.0 {
        let w = d.sqrt();
        (w.cosh(), w.sinh() / w)
    } else {
        let w = (-d).sqrt();
        (w.cos(), w.sin() / w)
    };
    [[c + sh * p, sh * q], [sh * s, c - sh * p]]
}

/// One fourth-order Magnus step of `(u, u')' = [[0, 1], [V, 0]] (u, u')` over a cell of
/// width `h` where `V` is linear from `va` to `vb`. Exact for constant `V`.
fn magnus_step(state: [f64; 2], h: f64, va: f64, vb: f64) -> [f64; 2] {
    let c = 3f64.sqrt() / 6.0;
    let v1 = va + (0.5 - c) * (vb - va);
    let v2 = va + (0.5 + c) * (vb - va);
    let p = 3f64.sqrt() * h * h / 12.0 * (v1 - v2);
    let e = expm_traceless(p, h, 0.5 * h * (v1 + v2));
    [
        e[0][0] * state[0] + e[0][1] * state[1],
        e[1][0] * state[0] + e[1][1] * state[1],
    ]
}

/// Zero-energy solution `u` at the grid nodes, started from `u = 0, u' = 1` at the
/// inner Dirichlet point.
///
/// Between nodes the potential is linear. A cell that ends on a jump uses the
/// constant value of the sample at its other end, which makes square wells exact.
pub fn zero_energy_solution(pot: &RadialField) -> Result<Vec<f64>, TwobodyError> {
    pot.require_s_wave()?;
    let r = pot.grid.nodes();
    let v = &pot.values;
    let is_jump = |x: f64| pot.jumps.iter().any(|j| (x - j).abs() <= 1e-12 * j.abs().max(1e-300));

    let mut out = Vec::with_capacity(r.len());
    let mut state = [0.0, 1.0];
    let r0 = pot.grid.inner_boundary();
    // first cell: potential taken constant at the first sample
    state = magnus_step(state, r[0] - r0, v[0], v[0]);
    out.push(state[0]);
    for i in 0..r.len() - 1 {
        let (a, b) = (r[i], r[i + 1]);
        let interior: Vec<f64> = pot.jumps.iter().copied().filter(|j| *j > a && *j < b && !is_jump(a) && !is_jump(b)).collect();
        if let Some(&j) = interior.first() {
            state = magnus_step(state, j - a, v[i], v[i]);
            state = magnus_step(state, b - j, v[i + 1], v[i + 1]);
        } else if is_jump(a) {
            state = magnus_step(state, b - a, v[i + 1], v[i + 1]);
        } else if is_jump(b) {
            state = magnus_step(state, b - a, v[i], v[i]);
        } else {
            state = magnus_step(state, b - a, v[i], v[i + 1]);
        }
        out.push(state[0]);
    }
    Ok(out)
}

/// Scattering length from the zero-energy solution, `u(r) = c (r - a)` fitted by least
/// squares on the outer quarter of the grid.
pub fn scattering_length(pot: &RadialField) -> Result<f64, TwobodyError> {
    let r = pot.grid.nodes();
    let n = r.len();
    let start = n - ((n as f64 * FIT_WINDOW).ceil() as usize).max(2);
    let vmax = pot.max_abs();
    let leak = pot.values[start..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if vmax > 0.0 && leak > WINDOW_LEAK * vmax {
        return Err(TwobodyError::SupportInFitWindow {
            window_start: r[start],
            leak,
        });
    }
    let u = zero_energy_solution(pot)?;
    let xs = &r[start..];
    let ys = &u[start..];
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    if slope == 0.0 {
        // exactly at resonance the zero-energy solution is flat
        return Ok(f64::INFINITY.copysign(-intercept));
    }
    Ok(-intercept / slope)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub coupling: f64,
    pub scattering_length: f64,
    pub inverse_scattering_length: f64,
    pub iterations: usize,
}

/// Points of the monotonicity scan over the bracket.
const SCAN_POINTS: usize = 64;

/// Tunes the coupling of `spec` onto the zero-energy resonance inside `bracket` by
/// bisection on `1/a`.
///
/// `1/a` increases with `g` between its poles (the couplings where `a = 0`), so a
/// resonance is a `- -> +` sign change while a pole is a `+ -> -` jump. A scan
/// counts the resonances first; zero or several inside the bracket is an error.
pub fn tune_to_resonance(
    spec: &PotentialSpec,
    bracket: (f64, f64),
    grid: &RadialGrid,
) -> Result<ResonanceResult, TwobodyError> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(TwobodyError::InvalidSpec(format!("bad coupling bracket ({lo}, {hi})")));
    }
    let inv_a = |g: f64| -> Result<f64, TwobodyError> {
        let pot = realize_potential(&spec.with_coupling(g), grid)?;
        Ok(1.0 / scattering_length(&pot)?)
    };

    let mut samples = Vec::with_capacity(SCAN_POINTS + 1);
    for i in 0..=SCAN_POINTS {
        let g = lo + (hi - lo) * i as f64 / SCAN_POINTS as f64;
        samples.push((g, inv_a(g)?));
    }
    let crossings: Vec<(f64, f64)> = samples
        .windows(2)
        .filter(|w| w[0].1 < 0.0 && w[1].1 >= 0.0)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    match crossings.len() {
        0 => {
            return Err(TwobodyError::NoSignChange {
                g_lo: lo,
                g_hi: hi,
                inv_a_lo: samples[0].1,
                inv_a_hi: samples[SCAN_POINTS].1,
            })
        }
        1 => {}
        count => return Err(TwobodyError::MultipleResonances { count }),
    }
    let (mut a, mut b) = crossings[0];
    let mut iterations = 0;
    let mut fa = inv_a(a)?;
    let mut fb = inv_a(b)?;
    while iterations < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = inv_a(mid)?;
        iterations += 1;
        if fm < 0.0 {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let (g, f) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    Ok(ResonanceResult {
        coupling: g,
        scattering_length: 1.0 / f,
        inverse_scattering_length: f,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twobody::Shape;
    use std::f64::consts::PI;

    fn well(g: f64) -> PotentialSpec {
        PotentialSpec::unscaled(Shape::SquareWell { radius: 1.0 }, g)
    }

    #[test]
    fn square_well_closed_form() {
        let grid = RadialGrid::origin_aligned(1000, 10.0).unwrap();
        for g in [0.3, 1.0, 2.0, 5.0, 12.0, 30.0] {
            let a = scattering_length(&realize_potential(&well(g), &grid).unwrap()).unwrap();
            let k = g.sqrt();
            let exact = 1.0 - k.tan() / k;
            assert!((a - exact).abs() < 1e-9 * exact.abs(), "g={g}: {a} vs {exact}");
        }
    }

    #[test]
    fn free_scattering_length_is_zero() {
        let grid = RadialGrid::origin_aligned(100, 10.0).unwrap();
        let a = scattering_length(&RadialField::zeros(grid)).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn jump_between_nodes_is_exact() {
        // R = 1 falls strictly between nodes of this grid
        let grid = RadialGrid::origin_aligned(997, 10.0).unwrap();
        let a = scattering_length(&realize_potential(&well(1.7), &grid).unwrap()).unwrap();
        let exact = 1.0 - 1.7f64.sqrt().tan() / 1.7f64.sqrt();
        assert!((a - exact).abs() < 1e-10 * exact.abs());
    }

    #[test]
    fn support_in_window_is_rejected() {
        let grid = RadialGrid::origin_aligned(100, 1.2).unwrap();
        assert!(matches!(
            scattering_length(&realize_potential(&well(1.0), &grid).unwrap()),
            Err(TwobodyError::SupportInFitWindow { .. })
        ));
    }

    #[test]
    fn resonance_of_unit_square_well() {
        let grid = RadialGrid::origin_aligned(1000, 10.0).unwrap();
        let r = tune_to_resonance(&well(0.0), (1.0, 4.0), &grid).unwrap();
        assert!((r.coupling - PI * PI / 4.0).abs() < 1e-8);
        assert!(r.inverse_scattering_length.abs() <= 1e-8);
        assert!(matches!(
            tune_to_resonance(&well(0.0), (0.1, 0.2), &grid),
            Err(TwobodyError::NoSignChange { .. })
        ));
        // second resonance at 9 pi^2 / 4
        assert!(matches!(
            tune_to_resonance(&well(0.0), (1.0, 25.0), &grid),
            Err(TwobodyError::MultipleResonances { count: 2 })
        ));
    }
}
