use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::ContactError;

/// Fewest eigenvalues a fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `lambda_n = -c / sqrt(n)`, `n = 1` the deepest state.
    SqrtN,
    /// `lambda_n = -c / n`, `n = 1` the deepest state.
    InverseN,
    /// `lambda_n = -b log n`, `n = 1` the shallowest state.
    LogN,
    /// `lambda_n = -A exp(-kappa n)`, `n = 1` the deepest state.
    Geometric,
}

impl FitModel {
    pub const ALL: [FitModel; 4] = [
        FitModel::SqrtN,
        FitModel::InverseN,
        FitModel::LogN,
        FitModel::Geometric,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FitModel::SqrtN => "sqrt_n",
            FitModel::InverseN => "inverse_n",
            FitModel::LogN => "log_n",
            FitModel::Geometric => "geometric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: FitModel,
    /// Named fitted constants (`c`, `b`, or `amplitude` and `kappa`).
    pub params: BTreeMap<String, f64>,
    /// Root mean square of `lambda_n - model_n`.
    pub rms_residual: f64,
    pub n_used: usize,
}

impl FitReport {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

/// One-parameter least squares `y = p x`.
fn proportional(xs: &[f64], ys: &[f64]) -> f64 {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    sxy / sxx
}

fn rms(ys: &[f64], model: impl Fn(usize) -> f64) -> f64 {
    let s: f64 = ys.iter().enumerate().map(|(i, y)| (y - model(i)).powi(2)).sum();
    (s / ys.len() as f64).sqrt()
}

/// Fits a tower of nonpositive eigenvalues (any order) to the given model.
pub fn fit_asymptotics(eigenvalues: &[f64], model: FitModel) -> Result<FitReport, ContactError> {
    let mut tower: Vec<f64> = eigenvalues.iter().copied().filter(|v| *v <= 0.0).collect();
    if tower.len() < MIN_FIT_POINTS {
        return Err(ContactError::TooFewPoints {
            got: tower.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    // deepest first
    tower.sort_by(f64::total_cmp);
    let m = tower.len();
    let idx: Vec<f64> = (1..=m).map(|n| n as f64).collect();
    let (params, rms_residual) = match model {
        FitModel::SqrtN | FitModel::InverseN => {
            let basis: Vec<f64> = idx
                .iter()
                .map(|n| if model == FitModel::SqrtN { -1.0 / n.sqrt() } else { -1.0 / n })
                .collect();
            let c = proportional(&basis, &tower);
            (BTreeMap::from([("c".to_string(), c)]), rms(&tower, |i| c * basis[i]))
        }
        FitModel::LogN => {
            tower.reverse();
            let basis: Vec<f64> = idx.iter().map(|n| -n.ln()).collect();
            let b = proportional(&basis, &tower);
            (BTreeMap::from([("b".to_string(), b)]), rms(&tower, |i| b * basis[i]))
        }
        FitModel::Geometric => {
            if tower.iter().any(|v| *v >= 0.0) {
                return Err(ContactError::TooFewPoints {
                    got: tower.iter().filter(|v| **v < 0.0).count(),
                    needed: MIN_FIT_POINTS,
                });
            }
            let ly: Vec<f64> = tower.iter().map(|v| (-v).ln()).collect();
            let xbar = idx.iter().sum::<f64>() / m as f64;
            let ybar = ly.iter().sum::<f64>() / m as f64;
            let sxy: f64 = idx.iter().zip(&ly).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
            let sxx: f64 = idx.iter().map(|x| (x - xbar).powi(2)).sum();
            let slope = sxy / sxx;
            let amplitude = (ybar - slope * xbar).exp();
            let kappa = -slope;
            (
                BTreeMap::from([("amplitude".to_string(), amplitude), ("kappa".to_string(), kappa)]),
                rms(&tower, |i| -amplitude * (-kappa * idx[i]).exp()),
            )
        }
    };
    if params.values().any(|v| !v.is_finite()) {
        return Err(ContactError::FitFailed(model.name().to_string()));
    }
    Ok(FitReport {
        model,
        params,
        rms_residual,
        n_used: m,
    })
}

/// Every model that can be fitted, best (smallest residual) first.
pub fn fit_all(eigenvalues: &[f64]) -> Result<Vec<FitReport>, ContactError> {
    let mut out = Vec::new();
    let mut first_err = None;
    for model in FitModel::ALL {
        match fit_asymptotics(eigenvalues, model) {
            Ok(r) => out.push(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if out.is_empty() {
        return Err(first_err.expect("at least one model attempted"));
    }
    out.sort_by(|a, b| a.rms_residual.total_cmp(&b.rms_residual));
    Ok(out)
}
