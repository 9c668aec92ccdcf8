use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_SAMPLES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `C t^{-p}`
    Power,
    /// `(A + B log t) t^{-1/2}`
    LogPower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitParams {
    Power { c: f64, p: f64 },
    LogPower { a: f64, b: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub params: FitParams,
    pub window: (f64, f64),
    pub samples: usize,
    /// RMS of `log value − log model`; infinite when the model is not positive on the window.
    pub rms_log_residual: f64,
}

impl DecayFit {
    pub fn model(&self) -> DecayModel {
        match self.params {
            FitParams::Power { .. } => DecayModel::Power,
            FitParams::LogPower { .. } => DecayModel::LogPower,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.params {
            FitParams::Power { c, p } => c * t.powf(-p),
            FitParams::LogPower { a, b } => (a + b * t.ln()) / t.sqrt(),
        }
    }

    /// Decay exponent of a power fit.
    pub fn exponent(&self) -> Option<f64> {
        match self.params {
            FitParams::Power { p, .. } => Some(p),
            FitParams::LogPower { .. } => None,
        }
    }
}

/// Default window `[T/16, T/2]`.
pub fn default_window(horizon: f64) -> (f64, f64) {
    (horizon / 16.0, horizon / 2.0)
}

fn least_squares(rows: &[[f64; 2]], rhs: &[f64]) -> Result<[f64; 2]> {
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    if s.min() <= 1e-12 * s.max() {
        return Err(Error::DegenerateFit("design matrix is rank deficient".into()));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    Ok([x[0], x[1]])
}

/// Least-squares fit of `series` restricted to `window`.
pub fn fit_decay(series: &[(f64, f64)], model: DecayModel, window: (f64, f64)) -> Result<DecayFit> {
    let (t1, t2) = window;
    if !(t1 >= 1.0 && t2 > t1) {
        return Err(Error::DegenerateFit(format!("window [{t1}, {t2}] must satisfy 1 ≤ t₁ < t₂")));
    }
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t1 && t <= t2).collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::DegenerateFit(format!("{} samples in window, need {MIN_SAMPLES}", pts.len())));
    }
    if pts.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateFit("values must be positive".into()));
    }
    let params = match model {
        DecayModel::Power => {
            let rows: Vec<[f64; 2]> = pts.iter().map(|&(t, _)| [1.0, t.ln()]).collect();
            let rhs: Vec<f64> = pts.iter().map(|&(_, v)| v.ln()).collect();
            let [lc, slope] = least_squares(&rows, &rhs)?;
            FitParams::Power { c: lc.exp(), p: -slope }
        }
        DecayModel::LogPower => {
            let rows: Vec<[f64; 2]> = pts.iter().map(|&(t, _)| [1.0, t.ln()]).collect();
            let rhs: Vec<f64> = pts.iter().map(|&(t, v)| v * t.sqrt()).collect();
            let [a, b] = least_squares(&rows, &rhs)?;
            FitParams::LogPower { a, b }
        }
    };
    let mut fit = DecayFit { params, window, samples: pts.len(), rms_log_residual: 0.0 };
    let mut ss = 0.0;
    for &(t, v) in &pts {
        let m = fit.eval(t);
        if !(m > 0.0) {
            ss = f64::INFINITY;
            break;
        }
        ss += (v.ln() - m.ln()).powi(2);
    }
    fit.rms_log_residual = (ss / pts.len() as f64).sqrt();
    Ok(fit)
}

/// Log-log slope of `(t, value)` pairs with its RMS residual, no window restriction.
pub fn loglog_slope(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if series.iter().any(|&(t, v)| !(t > 0.0 && v > 0.0)) {
        return Err(Error::DegenerateFit("log-log fit needs positive data".into()));
    }
    let rows: Vec<[f64; 2]> = series.iter().map(|&(t, _)| [1.0, t.ln()]).collect();
    let rhs: Vec<f64> = series.iter().map(|&(_, v)| v.ln()).collect();
    let [c, slope] = least_squares(&rows, &rhs)?;
    let ss: f64 = series.iter().map(|&(t, v)| (v.ln() - c - slope * t.ln()).powi(2)).sum();
    Ok((slope, (ss / series.len() as f64).sqrt()))
}
