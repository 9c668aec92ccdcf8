use serde::Serialize;

use super::config::LocalDecayConfig;
use super::output::{csv, Gnuplot, Output};
use crate::error::Result;
use crate::localdecay::{decay_scan, geometric_times, DecayScan, Variant};
use crate::Grid;

#[derive(Clone, Debug, Serialize)]
pub struct VariantDecay {
    pub scan: DecayScan,
    /// Scan at twice the window, when requested.
    pub wide: Option<DecayScan>,
    /// `max_t |‖M_W‖ − ‖M_{2W}‖| / ‖M_{2W}‖`
    pub saturation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDecayReport {
    pub times: Vec<f64>,
    pub variants: Vec<VariantDecay>,
    /// Exponents strictly decrease along `plain`, `px_over_bracket`, `bracket_minus_one`.
    pub hierarchy: Option<bool>,
}

impl LocalDecayReport {
    pub fn variant(&self, v: Variant) -> Option<&VariantDecay> {
        self.variants.iter().find(|d| d.scan.variant == v)
    }
}

/// Weighted-propagator norms over geometric times for each variant.
pub fn cmd_localdecay(cfg: &LocalDecayConfig, out: &Output) -> Result<LocalDecayReport> {
    cfg.validate()?;
    let grid = Grid::new(cfg.half_length, cfg.n_points)?;
    let times = geometric_times(cfg.t_min, cfg.t_max, cfg.samples);
    let variants = cfg
        .variants
        .iter()
        .map(|&v| {
            let scan = decay_scan(v, cfg.a, cfg.b, &times, cfg.window, &grid)?;
            let wide = if cfg.saturation_check {
                Some(decay_scan(v, cfg.a, cfg.b, &times, 2.0 * cfg.window, &grid)?)
            } else {
                None
            };
            let saturation = wide.as_ref().map(|w| {
                scan.norms.iter().zip(&w.norms).map(|(a, b)| (a.1 - b.1).abs() / b.1).fold(0.0, f64::max)
            });
            log::info!("{}: exponent {:.4}", v.name(), scan.exponent);
            Ok(VariantDecay { scan, wide, saturation })
        })
        .collect::<Result<Vec<_>>>()?;
    let exps: Option<Vec<f64>> =
        Variant::ALL.iter().map(|&v| variants.iter().find(|d| d.scan.variant == v).map(|d| d.scan.exponent)).collect();
    let hierarchy = exps.map(|e| e.windows(2).all(|w| w[1] < w[0]));
    let report = LocalDecayReport { times, variants, hierarchy };

    if out.dir().is_some() {
        let mut g = Gnuplot::new("weighted propagator norms", "t", "norm");
        for d in &report.variants {
            let name = d.scan.variant.name();
            let file = format!("decay_{name}.csv");
            out.text(&file, &csv(&["t", "norm"], d.scan.norms.iter().map(|p| [p.0, p.1])))?;
            g = g.series(&file, 1, 2, name);
        }
        g.write(out, "decay")?;
        out.report("localdecay", cfg, &report)?;
    }
    Ok(report)
}
