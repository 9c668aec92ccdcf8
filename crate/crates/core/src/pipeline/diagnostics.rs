use serde::Serialize;

use crate::error::Result;
use crate::evolution::{run, SimConfig, Trajectory};
use crate::spectral::{bracket, free_wave_asymptotic, from_spectrum, to_spectrum};
use crate::{Field, Grid, C64};

#[derive(Clone, Debug, Serialize)]
pub struct FreePropagatorCheck {
    pub half_length: f64,
    pub n_points: usize,
    /// `(t, t^{5/8} sup_{|x| ≤ 0.9t} |e^{it⟨∇⟩}f₀ − leading|)`
    pub scaled_errors: Vec<(f64, f64)>,
    pub non_increasing: bool,
    pub max: f64,
}

/// Free Klein-Gordon flow of `e^{-x²/2}` against its leading asymptotic term.
pub fn free_propagator_check(half_length: f64, n_points: usize, times: &[f64]) -> Result<FreePropagatorCheck> {
    let grid = Grid::new(half_length, n_points)?;
    let f0 = Field::from_real_fn(&grid, |x| (-0.5 * x * x).exp());
    let spec = to_spectrum(&f0);
    let scaled_errors: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| {
            let v = from_spectrum(&spec.map(|xi, c| c * C64::from_polar(1.0, t * bracket(xi))));
            let err = grid
                .nodes()
                .iter()
                .zip(v.values())
                .filter(|(x, _)| x.abs() <= 0.9 * t)
                .map(|(&x, &z)| (z - free_wave_asymptotic(&f0, t, x)).norm())
                .fold(0.0, f64::max);
            (t, err * t.powf(0.625))
        })
        .collect();
    let non_increasing = scaled_errors.windows(2).all(|w| w[1].1 <= w[0].1);
    let max = scaled_errors.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(FreePropagatorCheck { half_length, n_points, scaled_errors, non_increasing, max })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegratorQuality {
    /// `max_t |E(t) − E(0)| / |E(0)|` over the configured run.
    pub energy_drift: f64,
    pub order_horizon: f64,
    pub order_dts: [f64; 3],
    /// Sup distance of final profiles at successive step sizes.
    pub successive_differences: [f64; 2],
    pub order_ratio: f64,
    pub final_sup: f64,
    /// Sup of the doubled-`N` run over the base nodes.
    pub doubled_resolution_sup: f64,
    pub resolution_change: f64,
    /// `max_j |v_N(x_j) − v_{2N}(x_j)|` over the base nodes.
    pub pointwise_change: f64,
}

pub fn energy_drift(traj: &Trajectory) -> f64 {
    let e0 = traj.series.first().map_or(0.0, |r| r.energy);
    if e0 == 0.0 {
        return 0.0;
    }
    traj.series.iter().map(|r| ((r.energy - e0) / e0).abs()).fold(0.0, f64::max)
}

/// Energy drift of `cfg`, RK4 order from `2dt, dt, dt/2` over `order_horizon`, and the effect
/// of doubling `N`.
pub fn integrator_quality(cfg: &SimConfig, order_horizon: f64) -> Result<IntegratorQuality> {
    let base = run(cfg)?;
    let energy_drift = energy_drift(&base);
    let order_dts = [2.0 * cfg.dt, cfg.dt, 0.5 * cfg.dt];
    let finals = order_dts
        .iter()
        .map(|&dt| {
            let c = SimConfig { dt, horizon: order_horizon, ..cfg.clone() };
            Ok(run(&c)?.last().profile.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let successive_differences = [finals[0].sub(&finals[1])?.sup_norm(), finals[1].sub(&finals[2])?.sup_norm()];
    let doubled = run(&SimConfig { n_points: 2 * cfg.n_points, ..cfg.clone() })?;
    // doubled-grid nodes 2j coincide with the base nodes j
    let fine = doubled.last().solution();
    let coarse = base.last().solution();
    let (a, b) = (coarse.sup_norm(), fine.values().iter().step_by(2).map(|z| z.norm()).fold(0.0, f64::max));
    let pointwise_change =
        coarse.values().iter().zip(fine.values().iter().step_by(2)).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    Ok(IntegratorQuality {
        energy_drift,
        order_horizon,
        order_dts,
        successive_differences,
        order_ratio: successive_differences[0] / successive_differences[1],
        final_sup: a,
        doubled_resolution_sup: b,
        resolution_change: (a - b).abs(),
        pointwise_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::ProfileKind;
    use crate::evolution::CoefficientSpec;

    #[test]
    fn free_propagator_error_decays() {
        let chk = free_propagator_check(200.0, 4096, &[16.0, 32.0, 64.0]).unwrap();
        assert!(chk.non_increasing, "{:?}", chk.scaled_errors);
        assert!(chk.max < 1.0);
    }

    #[test]
    fn linear_flow_is_exact_in_time() {
        let cfg = SimConfig {
            alpha: CoefficientSpec::zero(),
            horizon: 4.0,
            half_length: 100.0,
            n_points: 1024,
            ..SimConfig::default()
        };
        let q = integrator_quality(&cfg, 2.0).unwrap();
        assert!(q.energy_drift < 1e-12);
        assert!(q.successive_differences.iter().all(|&d| d == 0.0));
        assert!(q.resolution_change < 1e-10 && q.pointwise_change < 1e-10, "{:?}", q);
    }

    #[test]
    fn rk4_order_on_a_short_nonlinear_run() {
        let cfg = SimConfig {
            alpha: CoefficientSpec::plain(ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }),
            epsilon: 0.5,
            horizon: 4.0,
            half_length: 100.0,
            n_points: 1024,
            ..SimConfig::default()
        };
        let q = integrator_quality(&cfg, 4.0).unwrap();
        assert!((q.order_ratio - 16.0).abs() < 2.0, "{}", q.order_ratio);
    }
}
