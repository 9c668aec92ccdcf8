use rayon::prelude::*;
use serde::Serialize;

use super::config::{with_amplitude, NonresonantConfig, ResonantConfig, SimulateConfig, SweepConfig, SweepTarget};
use super::diagnostics::{energy_drift, free_propagator_check, integrator_quality, FreePropagatorCheck, IntegratorQuality};
use super::output::{csv, Gnuplot, Output};
use super::{nonresonant, resonant};
use crate::asymptotics::{default_window, fit_decay, DecayModel};
use crate::error::Result;
use crate::evolution::{run, Model, SimConfig};
use crate::normalform::normal_form_coefficients;
use crate::Grid;

/// Horizon of the RK4 order runs.
pub const ORDER_HORIZON: f64 = 20.0;
/// Grid and times of the free-propagator check.
pub const FREE_CHECK_GRID: (f64, usize) = (400.0, 8192);
pub const FREE_CHECK_TIMES: [f64; 4] = [16.0, 32.0, 64.0, 128.0];

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub steps: usize,
    pub checkpoints: usize,
    pub final_t: f64,
    pub final_sup: f64,
    pub energy_drift: f64,
    pub integrator: Option<IntegratorQuality>,
    pub free_propagator: Option<FreePropagatorCheck>,
}

/// Run the simulation and write its series and checkpoints.
pub fn cmd_simulate(cfg: &SimulateConfig, out: &Output) -> Result<SimulateReport> {
    let traj = run(&cfg.sim)?;
    if let Some(dir) = out.dir() {
        traj.write_dir(dir)?;
        Gnuplot::new("sup norm", "t", "sup |v|").series("series.csv", 1, 2, "sup").write(out, "sup")?;
    }
    let (integrator, free_propagator) = if cfg.quality {
        let (l, n) = FREE_CHECK_GRID;
        (Some(integrator_quality(&cfg.sim, ORDER_HORIZON)?), Some(free_propagator_check(l, n, &FREE_CHECK_TIMES)?))
    } else {
        (None, None)
    };
    let report = SimulateReport {
        steps: cfg.sim.steps(),
        checkpoints: traj.checkpoints.len(),
        final_t: traj.last().t,
        final_sup: traj.last().solution().sup_norm(),
        energy_drift: energy_drift(&traj),
        integrator,
        free_propagator,
    };
    out.report("simulate", cfg, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub amplitude: f64,
    pub directory: String,
    pub final_sup: f64,
    pub energy_drift: f64,
    /// Decay exponent `p` of `sup|v| ≈ Ct^{-p}` over the default window.
    pub sup_exponent: Option<f64>,
    /// Log-power `B` on `x = (√3/2)t` for resonant targets.
    pub ray_b: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

fn sweep_point(cfg: &SweepConfig, epsilon: f64, amplitude: f64, out: &Output) -> Result<SweepPoint> {
    let mut sim = SimConfig { epsilon, ..cfg.sim.clone() };
    sim.alpha.profile = with_amplitude(&sim.alpha.profile, amplitude);
    let directory = format!("eps{epsilon}_amp{amplitude}");
    let out = out.child(&directory)?;
    let nf = match cfg.target {
        SweepTarget::Nonresonant => {
            let grid = Grid::new(sim.half_length, sim.n_points)?;
            Some(normal_form_coefficients(&Model::from_config(&sim, &grid)?.alpha)?)
        }
        _ => None,
    };
    let traj = run(&sim)?;
    let mut ray_b = None;
    match (cfg.target, nf) {
        (SweepTarget::Resonant, _) => {
            let r = resonant::report_from_trajectory(&ResonantConfig { sim: sim.clone(), ..ResonantConfig::default() }, &traj, &out)?;
            ray_b = r.rays.first().map(|f| f.fitted_b());
        }
        (SweepTarget::Nonresonant, Some(nf)) => {
            let c = NonresonantConfig { sim: sim.clone(), ..NonresonantConfig::default() };
            nonresonant::report_from_trajectory(&c, &traj, &nf, &out)?;
        }
        _ => {
            if let Some(dir) = out.dir() {
                traj.write_dir(dir)?;
            }
        }
    }
    // short horizons leave no fit window
    let sup_exponent =
        fit_decay(&traj.sup_series(), DecayModel::Power, default_window(sim.horizon)).ok().and_then(|f| f.exponent());
    Ok(SweepPoint {
        epsilon,
        amplitude,
        directory,
        final_sup: traj.last().solution().sup_norm(),
        energy_drift: energy_drift(&traj),
        sup_exponent,
        ray_b,
        error: None,
    })
}

/// Run the target over the `ε × amplitude` lattice in parallel.
pub fn cmd_sweep(cfg: &SweepConfig, out: &Output) -> Result<SweepReport> {
    cfg.sim.validate()?;
    let lattice: Vec<(f64, f64)> =
        cfg.epsilons.iter().flat_map(|&e| cfg.amplitudes.iter().map(move |&a| (e, a))).collect();
    let points: Vec<SweepPoint> = lattice
        .par_iter()
        .map(|&(epsilon, amplitude)| {
            sweep_point(cfg, epsilon, amplitude, out).unwrap_or_else(|e| {
                log::warn!("sweep point eps={epsilon} amp={amplitude} failed: {e}");
                SweepPoint {
                    epsilon,
                    amplitude,
                    directory: String::new(),
                    final_sup: f64::NAN,
                    energy_drift: f64::NAN,
                    sup_exponent: None,
                    ray_b: None,
                    error: Some(e.to_string()),
                }
            })
        })
        .collect();
    let report = SweepReport { points };
    out.text(
        "sweep.csv",
        &csv(
            &["epsilon", "amplitude", "final_sup", "energy_drift", "sup_exponent"],
            report.points.iter().map(|p| [p.epsilon, p.amplitude, p.final_sup, p.energy_drift, p.sup_exponent.unwrap_or(f64::NAN)]),
        ),
    )?;
    out.report("sweep", cfg, &report)?;
    Ok(report)
}
