use serde::Serialize;

use super::config::NonresonantConfig;
use super::output::{csv, Gnuplot, Output};
use crate::asymptotics::{
    default_window, extract_w, fit_decay, frequency_history, integrating_phase_b, predict_pointwise, probe_history, CauchyPoint, DecayFit,
    DecayModel, FrequencyHistory,
};
use crate::error::{Error, Result};
use crate::evolution::{run, Model, Trajectory};
use crate::normalform::{normal_form_coefficients, residual_check, NormalFormCoeffs, NormalFormReport};
use crate::spectral::bracket;
use crate::{Grid, C64};

/// Dyadic blocks ending at `T` used for the oscillation table.
pub const OSCILLATION_BLOCKS: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyReport {
    pub xi: f64,
    pub corrected_oscillation: Vec<CauchyPoint>,
    pub uncorrected_oscillation: Vec<CauchyPoint>,
    /// Successive block ratios, later over earlier.
    pub corrected_ratios: Vec<f64>,
    pub uncorrected_ratios: Vec<f64>,
    /// Single-pair differences on the checkpoint grid.
    pub pairwise: Vec<CauchyPoint>,
    /// Uncorrected phase change over `[T/2, T]`.
    pub phase_drift: f64,
    /// Least-squares slope of `B(t)` against `ln t` over the fit window.
    pub b_slope: f64,
    /// `(3β₀/2)⟨ξ⟩^{-1}|Ŵ(ξ)|²`
    pub predicted_slope: f64,
    pub slope_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointPrediction {
    pub t: f64,
    pub x: f64,
    pub simulated: C64,
    pub predicted: C64,
    /// `|simulated − predicted|·t^{1/2}`
    pub scaled_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonresonantReport {
    pub normal_form: NormalFormReport,
    pub normal_form_relative: f64,
    pub sup_fit: DecayFit,
    pub frequencies: Vec<FrequencyReport>,
    pub w_sup: f64,
    pub w_cauchy: Vec<CauchyPoint>,
    pub predictions: Vec<PointPrediction>,
}

fn ratios(points: &[CauchyPoint]) -> Vec<f64> {
    points.windows(2).map(|w| w[1].diff / w[0].diff).collect()
}

fn slope_vs_log(series: &[(f64, f64)], window: (f64, f64)) -> f64 {
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|(t, _)| *t >= window.0 && *t <= window.1).map(|&(t, b)| (t.ln(), b)).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    sxy / sxx
}

/// Normal form check, sup-norm decay, modified-scattering histories and the pointwise prediction.
pub fn cmd_nonresonant(cfg: &NonresonantConfig, out: &Output) -> Result<NonresonantReport> {
    cfg.sim.validate()?;
    let grid = Grid::new(cfg.sim.half_length, cfg.sim.n_points)?;
    let alpha = Model::from_config(&cfg.sim, &grid)?.alpha;
    let nf = normal_form_coefficients(&alpha)?;
    let traj = run(&cfg.sim)?;
    report_from_trajectory(cfg, &traj, &nf, out)
}

/// Post-processing half of [`cmd_nonresonant`].
pub fn report_from_trajectory(
    cfg: &NonresonantConfig,
    traj: &Trajectory,
    nf: &NormalFormCoeffs,
    out: &Output,
) -> Result<NonresonantReport> {
    let horizon = cfg.sim.horizon;
    let beta0 = cfg.sim.beta0;
    let window = cfg.fit_window.unwrap_or_else(|| default_window(horizon));
    let normal_form = residual_check(traj, nf)?;
    out.json("normalform.json", &normal_form)?;
    let sup_fit = fit_decay(&traj.sup_series(), DecayModel::Power, window)?;
    let w = extract_w(traj, beta0)?;

    let frequencies = cfg
        .xis
        .iter()
        .map(|&xi| {
            let h: FrequencyHistory = probe_history(traj, beta0, xi)
                .ok_or_else(|| Error::Config(format!("frequency {xi} is not among sim.profile_probes")))?;
            let corrected_oscillation = h.oscillation(true, horizon, OSCILLATION_BLOCKS);
            let uncorrected_oscillation = h.oscillation(false, horizon, OSCILLATION_BLOCKS);
            let b_slope = slope_vs_log(&integrating_phase_b(traj, beta0, h.xi), window);
            let predicted_slope = 1.5 * beta0 / bracket(h.xi) * w.value_at(h.xi).norm_sqr();
            Ok(FrequencyReport {
                xi: h.xi,
                corrected_ratios: ratios(&corrected_oscillation),
                uncorrected_ratios: ratios(&uncorrected_oscillation),
                corrected_oscillation,
                uncorrected_oscillation,
                pairwise: frequency_history(traj, beta0, h.xi).cauchy(true, cfg.sim.dt),
                phase_drift: h.phase_drift(horizon / 2.0, horizon),
                b_slope,
                predicted_slope,
                slope_ratio: b_slope / predicted_slope,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let predictions = cfg
        .predict_points
        .iter()
        .map(|&(t, x)| {
            let simulated = traj.checkpoint_near(t).solution().interpolate(x);
            let predicted = predict_pointwise(&w, beta0, t, x);
            PointPrediction { t, x, simulated, predicted, scaled_error: (simulated - predicted).norm() * t.sqrt() }
        })
        .collect();

    let report = NonresonantReport {
        normal_form_relative: normal_form.relative(),
        normal_form,
        sup_fit,
        frequencies,
        w_sup: w.sup_norm(),
        w_cauchy: w.cauchy.clone(),
        predictions,
    };
    if out.dir().is_some() {
        out.text("profile_w.csv", &csv(&["xi", "re", "im"], w.xis.iter().zip(&w.values).map(|(&x, c)| [x, c.re, c.im])))?;
        out.text("sup.csv", &csv(&["t", "sup"], traj.sup_series().iter().map(|p| [p.0, p.1])))?;
        let mut rows = Vec::new();
        for f in &report.frequencies {
            for (c, u) in f.corrected_oscillation.iter().zip(&f.uncorrected_oscillation) {
                rows.push([f.xi, c.t1, c.t2, c.diff, u.diff]);
            }
        }
        out.text("oscillation.csv", &csv(&["xi", "t1", "t2", "corrected", "uncorrected"], rows))?;
        Gnuplot::new("sup norm", "t", "sup |v|").series("sup.csv", 1, 2, "sup").write(out, "sup")?;
        out.report("nonresonant", cfg, &report)?;
    }
    Ok(report)
}
