use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{build_model_operator, strong_thresholds, ModelKind};
use super::ContactError;
use crate::numerics::RadialGrid;

/// Fewest refinement levels accepted by [`critical_constants`].
pub const MIN_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalOptions {
    /// Upper end of the coupling scan.
    pub c_max: f64,
    /// Spacing of the coupling scan used for the monotonicity check.
    pub scan_step: f64,
    /// Coupling at which the refinement trace is recorded; defaults to just above c2.
    pub probe_c: Option<f64>,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            c_max: 10.0,
            scan_step: 0.05,
            probe_c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    pub r_min: f64,
    pub n: usize,
    pub probe_c: f64,
    pub negative_count: usize,
}

/// Per-level thresholds: the couplings where the first and second negative
/// eigenvalues appear, and the onset estimate built from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub r_min: f64,
    pub first_threshold: f64,
    pub second_threshold: f64,
    /// `(4 t1 - t2) / 3`: in a box of logarithmic size the thresholds sit at
    /// `c + a (j delta)^2`, and this combination removes the quadratic term.
    pub onset_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    /// Onset coupling extrapolated across refinement levels.
    pub c1: f64,
    /// Smallest coupling where the negative count strictly grows at every refinement.
    pub c2: f64,
    /// `c1 -+ |finest level estimate - c1|`
    pub c1_bracket: (f64, f64),
    /// `|finest level estimate - c1| / c1`
    pub c1_relative_spread: f64,
    pub level_estimates: Vec<LevelEstimate>,
    pub refinement_trace: Vec<RefinementPoint>,
}

/// Origin-aligned grids on `(0, r_max]` with `r_min = r_min0 / 2^l`.
pub fn refinement_family(r_max: f64, r_min0: f64, levels: usize) -> Result<Vec<RadialGrid>, ContactError> {
    (0..levels)
        .map(|l| {
            let n = (r_max / r_min0 * (1u64 << l) as f64).round() as usize;
            Ok(RadialGrid::origin_aligned(n, r_max)?)
        })
        .collect()
}

enum LevelCounter {
    /// Sorted congruence thresholds (strong kind).
    Thresholds(Vec<f64>),
    /// Dense free part and `log r` (weak kind).
    Dense { free: DMatrix<f64>, log_r: Vec<f64> },
}

impl LevelCounter {
    fn count(&self, c: f64) -> usize {
        match self {
            LevelCounter::Thresholds(mu) => mu.partition_point(|m| *m < c),
            LevelCounter::Dense { free, log_r } => {
                let mut m = free.clone();
                for (i, l) in log_r.iter().enumerate() {
                    m[(i, i)] -= c * l;
                }
                m.symmetric_eigenvalues().iter().filter(|v| **v < 0.0).count()
            }
        }
    }
}

fn bisect(mut lo: f64, mut hi: f64, tol: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Aitken extrapolation of the last three entries; falls back to the last entry when
/// the sequence is not geometrically convergent.
fn aitken(e: &[f64]) -> f64 {
    let n = e.len();
    let (a, b, c) = (e[n - 3], e[n - 2], e[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    let ratio = d2 / d1;
    if d1 == 0.0 || !(ratio > 0.0 && ratio < 1.0) {
        return c;
    }
    c - d2 * d2 / (d2 - d1)
}

/// Critical couplings from a refinement family of grids.
pub fn critical_constants(
    kind: ModelKind,
    grids: &[RadialGrid],
    probe_tol: f64,
    opts: &CriticalOptions,
) -> Result<CriticalConstants, ContactError> {
    if grids.len() < MIN_LEVELS {
        return Err(ContactError::TooFewLevels {
            got: grids.len(),
            needed: MIN_LEVELS,
        });
    }
    if !(probe_tol > 0.0 && opts.scan_step > 0.0 && opts.c_max > opts.scan_step) {
        return Err(ContactError::InvalidOptions(
            "probe tolerance, scan step and c_max must be positive with c_max above the step".into(),
        ));
    }
    for w in grids.windows(2) {
        let ratio = w[0].r_min() / w[1].r_min();
        if (ratio - 2.0).abs() > 1e-6 {
            return Err(ContactError::BadRefinement { ratio });
        }
    }

    let counters: Vec<LevelCounter> = grids
        .par_iter()
        .map(|g| -> Result<LevelCounter, ContactError> {
            let op = build_model_operator(kind, 0.0, g, None)?;
            let free = op.dense_free_part();
            Ok(match kind {
                ModelKind::Strong => LevelCounter::Thresholds(strong_thresholds(&free, g.nodes())),
                ModelKind::Weak => LevelCounter::Dense {
                    free,
                    log_r: g.nodes().iter().map(|r| r.ln()).collect(),
                },
            })
        })
        .collect::<Result<_, _>>()?;

    let steps = (opts.c_max / opts.scan_step).ceil() as usize;
    let scan: Vec<f64> = (0..=steps).map(|k| k as f64 * opts.scan_step).collect();
    let counts: Vec<Vec<usize>> = counters
        .par_iter()
        .map(|ctr| scan.iter().map(|c| ctr.count(*c)).collect())
        .collect();

    for (l, row) in counts.iter().enumerate() {
        if let Some(k) = (1..row.len()).find(|&k| row[k] < row[k - 1]) {
            return Err(ContactError::NonMonotone {
                r_min: grids[l].r_min(),
                c_lo: scan[k - 1],
                c_hi: scan[k],
                count_lo: row[k - 1],
                count_hi: row[k],
            });
        }
    }

    let threshold = |l: usize, level: usize| -> Option<f64> {
        let k = counts[l].iter().position(|n| *n >= level)?;
        if k == 0 {
            return Some(0.0);
        }
        Some(bisect(scan[k - 1], scan[k], probe_tol, |c| counters[l].count(c) >= level))
    };
    let mut level_estimates = Vec::with_capacity(grids.len());
    for (l, g) in grids.iter().enumerate() {
        let t1 = threshold(l, 1).ok_or(ContactError::NoOnset { c_max: opts.c_max })?;
        let t2 = threshold(l, 2).unwrap_or(t1);
        level_estimates.push(LevelEstimate {
            r_min: g.r_min(),
            first_threshold: t1,
            second_threshold: t2,
            onset_estimate: (4.0 * t1 - t2) / 3.0,
        });
    }
    let e: Vec<f64> = level_estimates.iter().map(|x| x.onset_estimate).collect();
    let c1 = aitken(&e);
    let spread = (e[e.len() - 1] - c1).abs().max(probe_tol);

    let grows = |cts: &[usize]| cts.windows(2).all(|w| w[1] > w[0]);
    let k2 = (0..scan.len())
        .find(|&k| grows(&counts.iter().map(|row| row[k]).collect::<Vec<_>>()))
        .ok_or(ContactError::NoDivergence { c_max: opts.c_max })?;
    let c2 = if k2 == 0 {
        0.0
    } else {
        bisect(scan[k2 - 1], scan[k2], probe_tol, |c| {
            grows(&counters.iter().map(|ctr| ctr.count(c)).collect::<Vec<_>>())
        })
    };

    let probe_c = opts.probe_c.unwrap_or(c2 + probe_tol);
    let refinement_trace = grids
        .iter()
        .zip(&counters)
        .map(|(g, ctr)| RefinementPoint {
            r_min: g.r_min(),
            n: g.len(),
            probe_c,
            negative_count: ctr.count(probe_c),
        })
        .collect();

    Ok(CriticalConstants {
        c1,
        c2,
        c1_bracket: (c1 - spread, c1 + spread),
        c1_relative_spread: spread / c1.abs(),
        level_estimates,
        refinement_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_level_is_rejected() {
        let grids = refinement_family(1.0, 0.01, 1).unwrap();
        assert_eq!(
            critical_constants(ModelKind::Strong, &grids, 1e-6, &CriticalOptions::default()).unwrap_err(),
            ContactError::TooFewLevels { got: 1, needed: 4 }
        );
    }

    #[test]
    fn aitken_recovers_geometric_limit() {
        let e: Vec<f64> = (0..4).map(|k| 1.0 + 0.5f64.powi(k)).collect();
        assert!((aitken(&e) - 1.0).abs() < 1e-14);
        assert_eq!(aitken(&[1.0, 2.0, 3.0]), 3.0);
    }

    #[test]
    fn non_halving_family_is_rejected() {
        let grids: Vec<RadialGrid> = [100, 300, 600, 1200]
            .iter()
            .map(|n| RadialGrid::origin_aligned(*n, 1.0).unwrap())
            .collect();
        assert!(matches!(
            critical_constants(ModelKind::Strong, &grids, 1e-6, &CriticalOptions::default()),
            Err(ContactError::BadRefinement { .. })
        ));
    }
}
