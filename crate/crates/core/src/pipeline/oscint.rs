use serde::Serialize;

use super::config::OscintConfig;
use super::output::{csv, Gnuplot, Output};
use crate::asymptotics::loglog_slope;
use crate::error::Result;
use crate::oscillatory::{
    brute_force_2d, cubic_phase_data, cubic_phase_newton, stationary_phase_2d, CubicPhaseData, Cutoff, Point, QuadraticPhase,
};
use crate::C64;

/// Newton starting offsets from the closed-form stationary point, all within 0.5 of it.
pub const NEWTON_OFFSETS: [Point; 5] = [[0.3, -0.2], [-0.35, -0.3], [0.33, 0.33], [-0.25, 0.4], [0.45, -0.1]];

#[derive(Clone, Debug, Serialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub leading: C64,
    pub brute: C64,
    pub axis_points: usize,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CubicRow {
    pub closed: CubicPhaseData,
    pub newton: Vec<CubicPhaseData>,
    /// Largest discrepancy in point, value and determinant over the starts.
    pub max_deviation: f64,
    pub signatures_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub points_per_wavelength: f64,
    pub axis_points: usize,
    pub value: C64,
    /// Distance to the densest value.
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscintReport {
    pub lambdas: Vec<LambdaRow>,
    pub abs_exponent: f64,
    pub rel_exponent: f64,
    pub cubic: Vec<CubicRow>,
    pub convergence: Vec<ConvergenceRow>,
}

impl OscintReport {
    pub fn at(&self, lambda: f64) -> Option<&LambdaRow> {
        self.lambdas.iter().find(|r| r.lambda == lambda)
    }
}

fn amplitude(p: Point) -> C64 {
    C64::new((-0.5 * (p[0] * p[0] + p[1] * p[1])).exp(), 0.0)
}

fn deviation(a: &CubicPhaseData, b: &CubicPhaseData) -> f64 {
    [(a.point[0] - b.point[0]).abs(), (a.point[1] - b.point[1]).abs(), (a.value - b.value).abs(), (a.det - b.det).abs()]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Stationary phase against brute force, cubic phase geometry and brute-force self-convergence.
pub fn cmd_oscint(cfg: &OscintConfig, out: &Output) -> Result<OscintReport> {
    cfg.validate()?;
    let phase = QuadraticPhase::diagonal(cfg.hessian[0], cfg.hessian[1]);
    let cutoff = Cutoff::standard();
    let lambdas = cfg
        .lambdas
        .iter()
        .map(|&lambda| {
            let sp = stationary_phase_2d(&phase, &amplitude, &cutoff, lambda)?;
            let bf = brute_force_2d(&phase, &amplitude, &cutoff, lambda, cfg.points_per_wavelength)?;
            let abs_error = (sp.leading - bf.value).norm();
            log::info!("lambda {lambda}: {} axis points, error {abs_error:.3e}", bf.axis_points);
            Ok(LambdaRow {
                lambda,
                leading: sp.leading,
                brute: bf.value,
                axis_points: bf.axis_points,
                abs_error,
                rel_error: abs_error / bf.value.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (abs_exponent, rel_exponent) = if lambdas.len() >= 2 {
        let abs: Vec<(f64, f64)> = lambdas.iter().map(|r| (r.lambda, r.abs_error)).collect();
        let rel: Vec<(f64, f64)> = lambdas.iter().map(|r| (r.lambda, r.rel_error)).collect();
        (loglog_slope(&abs)?.0, loglog_slope(&rel)?.0)
    } else {
        (f64::NAN, f64::NAN)
    };

    let mut cubic = Vec::new();
    for j in 1..=4u8 {
        for &xi in &cfg.cubic_xis {
            let closed = cubic_phase_data(j, xi)?;
            let newton = NEWTON_OFFSETS
                .iter()
                .map(|o| cubic_phase_newton(j, xi, [closed.point[0] + o[0], closed.point[1] + o[1]]))
                .collect::<Result<Vec<_>>>()?;
            let max_deviation = newton.iter().map(|n| deviation(&closed, n)).fold(0.0, f64::max);
            let signatures_match = newton.iter().all(|n| n.signature == closed.signature);
            cubic.push(CubicRow { closed, newton, max_deviation, signatures_match });
        }
    }

    let thin = Cutoff { center: [0.0, 0.0], inner: 1.97, outer: 2.0 };
    let values = cfg
        .convergence_densities
        .iter()
        .map(|&ppw| brute_force_2d(&phase, &amplitude, &thin, cfg.convergence_lambda, ppw))
        .collect::<Result<Vec<_>>>()?;
    let reference = values.last().map(|b| b.value).unwrap_or_default();
    let convergence = cfg
        .convergence_densities
        .iter()
        .zip(&values)
        .map(|(&ppw, b)| ConvergenceRow {
            points_per_wavelength: ppw,
            axis_points: b.axis_points,
            value: b.value,
            difference: (b.value - reference).norm(),
        })
        .collect();

    let report = OscintReport { lambdas, abs_exponent, rel_exponent, cubic, convergence };
    if out.dir().is_some() {
        out.text(
            "stationary_phase.csv",
            &csv(
                &["lambda", "leading_re", "leading_im", "brute_re", "brute_im", "abs_error", "rel_error"],
                report.lambdas.iter().map(|r| [r.lambda, r.leading.re, r.leading.im, r.brute.re, r.brute.im, r.abs_error, r.rel_error]),
            ),
        )?;
        let rows = report.cubic.iter().flat_map(|c| {
            std::iter::once((0.0, &c.closed)).chain(c.newton.iter().map(|n| (1.0, n))).map(|(newton, d)| {
                [d.j as f64, d.xi, newton, d.point[0], d.point[1], d.value, d.det, d.signature as f64]
            })
        });
        out.text("cubic_phases.csv", &csv(&["j", "xi", "newton", "eta", "sigma", "value", "det", "signature"], rows))?;
        Gnuplot::new("stationary phase error", "lambda", "error")
            .series("stationary_phase.csv", 1, 6, "absolute")
            .series("stationary_phase.csv", 1, 7, "relative")
            .write(out, "stationary_phase")?;
        out.report("oscint", cfg, &report)?;
    }
    Ok(report)
}
