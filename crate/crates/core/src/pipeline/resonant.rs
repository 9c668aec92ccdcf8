use rayon::prelude::*;
use serde::Serialize;

use super::config::ResonantConfig;
use super::output::{csv, Gnuplot, Output};
use crate::asymptotics::{
    a0_from_origin, check_origin, compute_a0, default_window, extract_v, fit_decay, ray_series,
    AmplitudeA0, CauchyPoint, DecayFit, DecayModel, FitParams, OriginCheck, VmodSource,
};
use crate::coefficients::{resonance_values, sqrt3};
use crate::error::{Error, Result};
use crate::evolution::{run, Trajectory};
use crate::localdecay::geometric_times;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RayRole {
    Resonant,
    Control,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayFit {
    pub c: f64,
    pub role: RayRole,
    pub window: (f64, f64),
    pub power: DecayFit,
    pub logpower: DecayFit,
    /// Power rms over log-power rms; above 1 the log law fits better.
    pub residual_ratio: f64,
    /// `|a₀|²|α̂(∓√3)|/√8` on the resonant rays.
    pub predicted_b: Option<f64>,
}

impl RayFit {
    pub fn fitted_b(&self) -> f64 {
        match self.logpower.params {
            FitParams::LogPower { b, .. } => b,
            _ => f64::NAN,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VmodRow {
    pub t: f64,
    pub sign: f64,
    pub quadrature: C64,
    pub formula: C64,
    pub ratio: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OffRayScan {
    pub c: f64,
    /// `(t, |v_mod(t, ct)|·t^{1/2})`
    pub scaled: Vec<(f64, f64)>,
    pub max_over_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileSummary {
    pub t: f64,
    pub sup_norm: f64,
    pub cauchy: Vec<CauchyPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonantReport {
    pub alpha_hat_plus: C64,
    pub alpha_hat_minus: C64,
    pub a0: AmplitudeA0,
    pub a0_fit: C64,
    /// `|a₀(formula) − a₀(fit)| / |a₀(formula)|`
    pub a0_relative_difference: f64,
    pub origin: OriginCheck,
    pub rays: Vec<RayFit>,
    /// Ray fits on `[T/4, T]`, where the logarithm has had longer to separate from the constant.
    pub late_rays: Vec<RayFit>,
    pub vmod: Vec<VmodRow>,
    pub offray: Vec<OffRayScan>,
    pub v_profile: Option<ProfileSummary>,
}

impl ResonantReport {
    pub fn ray(&self, c: f64) -> Option<&RayFit> {
        self.rays.iter().find(|r| (r.c - c).abs() < 1e-12)
    }
}

fn fit_ray(traj: &Trajectory, c: f64, role: RayRole, window: (f64, f64), a0: C64) -> Result<RayFit> {
    let series: Vec<(f64, f64)> = ray_series(traj, c)
        .ok_or_else(|| Error::Config(format!("ray {c} is not among the recorded rays")))?
        .into_iter()
        .map(|(t, z)| (t, z.norm()))
        .collect();
    let power = fit_decay(&series, DecayModel::Power, window)?;
    let logpower = fit_decay(&series, DecayModel::LogPower, window)?;
    let predicted_b = (role == RayRole::Resonant).then(|| {
        let (plus, minus) = resonance_values(&traj.model.alpha);
        let ah = if c > 0.0 { minus } else { plus };
        a0.norm_sqr() * ah.norm() / 8f64.sqrt()
    });
    Ok(RayFit { c, role, window, residual_ratio: power.rms_log_residual / logpower.rms_log_residual, power, logpower, predicted_b })
}

/// Simulate, extract `a₀` two ways, fit the rays, compare `v_mod` with its ray formula and
/// extract `V̂`.
pub fn cmd_resonant(cfg: &ResonantConfig, out: &Output) -> Result<ResonantReport> {
    cfg.sim.validate()?;
    let ray = sqrt3() / 2.0;
    for c in &cfg.control_rays {
        if !cfg.sim.rays.iter().any(|r| (r - c).abs() < 1e-12) {
            return Err(Error::Config(format!("control ray {c} must be listed in sim.rays")));
        }
    }
    if !cfg.sim.rays.iter().any(|r| (r - ray).abs() < 1e-12) {
        return Err(Error::Config("sim.rays must contain the resonant ray √3/2".into()));
    }
    let traj = run(&cfg.sim)?;
    report_from_trajectory(cfg, &traj, out)
}

/// Post-processing half of [`cmd_resonant`].
pub fn report_from_trajectory(cfg: &ResonantConfig, traj: &Trajectory, out: &Output) -> Result<ResonantReport> {
    let horizon = cfg.sim.horizon;
    let window = cfg.fit_window.unwrap_or_else(|| default_window(horizon));
    let ray = sqrt3() / 2.0;
    let (alpha_hat_plus, alpha_hat_minus) = resonance_values(&traj.model.alpha);

    let a0 = compute_a0(traj)?;
    let origin_series = traj.origin_series();
    let a0_fit = a0_from_origin(&origin_series, window)?;
    let a0_relative_difference =
        if a0.value.norm() > 0.0 { (a0.value - a0_fit).norm() / a0.value.norm() } else { a0_fit.norm() };
    let origin = check_origin(&origin_series, a0.value, window);

    let mut targets: Vec<(f64, RayRole)> = vec![(ray, RayRole::Resonant), (-ray, RayRole::Resonant)];
    targets.retain(|(c, _)| traj.ray_index(*c).is_some());
    targets.extend(cfg.control_rays.iter().map(|&c| (c, RayRole::Control)));
    let fits = |w: (f64, f64)| -> Result<Vec<RayFit>> {
        targets.iter().map(|&(c, role)| fit_ray(traj, c, role, w, a0.value)).collect()
    };
    let rays = fits(window)?;
    let late_rays = fits((horizon / 4.0, horizon))?;

    let source = VmodSource::new(a0.value, &traj.model.alpha);
    let vmod: Vec<VmodRow> = cfg
        .vmod_times
        .par_iter()
        .flat_map_iter(|&t| {
            let source = &source;
            [1.0, -1.0].into_iter().map(move |sign| {
                let quadrature = source.eval(t, sign * ray * t);
                let formula = source.ray_formula(t, sign);
                let ratio = if formula.norm() > 0.0 { quadrature / formula } else { C64::new(f64::NAN, f64::NAN) };
                VmodRow { t, sign, quadrature, formula, ratio }
            })
        })
        .collect();
    let times = geometric_times(10.0, horizon, cfg.offray_samples.max(2));
    let offray: Vec<OffRayScan> = cfg
        .offray_speeds
        .iter()
        .map(|&c| {
            let scaled: Vec<(f64, f64)> =
                times.par_iter().map(|&t| (t, source.eval(t, c * t).norm() * t.sqrt())).collect();
            let max = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
            let min = scaled.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            OffRayScan { c, scaled, max_over_min: max / min }
        })
        .collect();

    let v_profile = if cfg.vmod_profiles {
        let v = extract_v(traj, a0.value)?;
        out.text("profile_v.csv", &csv(&["xi", "re", "im"], v.xis.iter().zip(&v.values).map(|(&x, c)| [x, c.re, c.im])))?;
        Some(ProfileSummary { t: v.t, sup_norm: v.sup_norm(), cauchy: v.cauchy })
    } else {
        None
    };

    let report = ResonantReport {
        alpha_hat_plus,
        alpha_hat_minus,
        a0,
        a0_fit,
        a0_relative_difference,
        origin,
        rays,
        late_rays,
        vmod,
        offray,
        v_profile,
    };
    write_outputs(cfg, traj, &report, out)?;
    Ok(report)
}

fn write_outputs(cfg: &ResonantConfig, traj: &Trajectory, report: &ResonantReport, out: &Output) -> Result<()> {
    if out.dir().is_none() {
        return Ok(());
    }
    let mut header = vec!["t".to_string()];
    let mut cols = Vec::new();
    for fit in &report.rays {
        header.push(format!("abs_v_c{:.4}", fit.c));
        cols.push(ray_series(traj, fit.c).unwrap_or_default());
    }
    let rows = (0..traj.series.len()).map(|i| {
        let mut row = vec![traj.series[i].t];
        row.extend(cols.iter().map(|c| c[i].1.norm()));
        row
    });
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    out.text("rays.csv", &csv(&hdr, rows))?;
    out.text(
        "origin.csv",
        &csv(&["t", "re", "im", "error"], traj.origin_series().iter().zip(&report.origin.errors).map(|(o, e)| [o.0, o.1.re, o.1.im, e.1])),
    )?;
    out.text(
        "vmod.csv",
        &csv(
            &["t", "sign", "quad_re", "quad_im", "formula_re", "formula_im", "ratio_abs"],
            report.vmod.iter().map(|r| [r.t, r.sign, r.quadrature.re, r.quadrature.im, r.formula.re, r.formula.im, r.ratio.norm()]),
        ),
    )?;
    let mut g = Gnuplot::new("|v| along rays", "t", "|v(t, ct)|");
    for (k, fit) in report.rays.iter().enumerate() {
        g = g.series("rays.csv", 1, k + 2, &format!("c = {:.4}", fit.c));
    }
    g.write(out, "rays")?;
    Gnuplot::new("origin error", "t", "|v(t,0) - leading|").series("origin.csv", 1, 4, "error").write(out, "origin")?;
    out.report("resonant", cfg, report)
}
