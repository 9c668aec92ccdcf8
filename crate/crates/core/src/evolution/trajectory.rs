use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::{Model, SimConfig};
use crate::error::Result;
use crate::spectral::from_spectrum;
use crate::{Field, Grid, Spectrum, C64};

/// Profile snapshot together with the running integral `∫₁^t |⟨ξ⟩^{3/2} f̂|²/s ds`.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub t: f64,
    pub profile: Spectrum,
    pub self_phase_integral: Vec<f64>,
}

impl Checkpoint {
    /// Solution `v = e^{it⟨∇⟩} f` in physical space.
    pub fn solution(&self) -> Field {
        let t = self.t;
        from_spectrum(&self.profile.map(|xi, c| c * C64::from_polar(1.0, t * crate::spectral::bracket(xi))))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRecord {
    pub t: f64,
    pub sup_norm: f64,
    pub energy: f64,
    pub origin: C64,
    pub rays: Vec<C64>,
    /// `‖⟨x⟩^{-2} v‖`
    pub weighted_v: f64,
    /// `‖⟨x⟩^{-2} ∂_x v‖`
    pub weighted_dx_v: f64,
    /// `‖⟨x⟩^{-2} ∂_t(e^{-it} v)‖`
    pub weighted_filtered: f64,
    /// `‖⟨∇⟩ L v‖`
    pub l_norm: f64,
    /// `|∂_t(e^{-it} v)(t, 0)|`
    pub origin_filtered: f64,
}

/// Spatial integrals entering the amplitude at the origin, recorded every step.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BilinearRecord {
    pub t: f64,
    /// `∫ α ∂_s(e^{-is}v)(e^{-is}v) dx`
    pub s1: C64,
    /// `∫ α ∂_s|v|² dx`
    pub s2: f64,
    /// `∂_t(e^{-it} v)(t, 0)`
    pub origin_filtered: C64,
    pub origin: C64,
}

/// Profile values at fixed lattice frequencies.
#[derive(Clone, Debug)]
pub struct ProbeSeries {
    pub xis: Vec<f64>,
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SimConfig,
    pub grid: Arc<Grid>,
    pub model: Model,
    pub checkpoints: Vec<Checkpoint>,
    pub series: Vec<SeriesRecord>,
    pub bilinear: Vec<BilinearRecord>,
    pub probes: ProbeSeries,
}

impl Trajectory {
    pub fn initial(&self) -> &Checkpoint {
        &self.checkpoints[0]
    }

    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("trajectory has checkpoints")
    }

    pub fn initial_solution(&self) -> Field {
        self.initial().solution()
    }

    /// `(t, v(t,0))` from the series.
    pub fn origin_series(&self) -> Vec<(f64, C64)> {
        self.series.iter().map(|r| (r.t, r.origin)).collect()
    }

    pub fn sup_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|r| (r.t, r.sup_norm)).collect()
    }

    /// Index of a densely recorded ray speed.
    pub fn ray_index(&self, c: f64) -> Option<usize> {
        self.config.rays.iter().position(|&r| (r - c).abs() < 1e-12)
    }

    /// Checkpoint whose time is closest to `t`.
    pub fn checkpoint_near(&self, t: f64) -> &Checkpoint {
        self.checkpoints
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory has checkpoints")
    }

    /// Write `config.json`, `series.csv` and `snapshots/t_<time>.csv` under `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("snapshots"))?;
        let config = serde_json::json!({
            "version": crate::VERSION,
            "config": self.config,
        });
        fs::write(dir.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;
        let mut out = fs::File::create(dir.join("series.csv"))?;
        out.write_all(self.series_csv().as_bytes())?;
        for cp in &self.checkpoints {
            let mut s = String::from("xi,re,im\n");
            for (xi, c) in cp.profile.sorted() {
                s.push_str(&format!("{xi:.12e},{:.12e},{:.12e}\n", c.re, c.im));
            }
            fs::write(dir.join("snapshots").join(format!("t_{:.4}.csv", cp.t)), s)?;
        }
        Ok(())
    }

    pub fn series_csv(&self) -> String {
        let mut s = String::from("t,sup_norm,energy,origin_re,origin_im");
        for c in &self.config.rays {
            s.push_str(&format!(",ray_{c:.6}_re,ray_{c:.6}_im"));
        }
        s.push_str(",weighted_v,weighted_dx_v,weighted_filtered,l_norm,origin_filtered\n");
        for r in &self.series {
            s.push_str(&format!("{:.6},{:.12e},{:.12e},{:.12e},{:.12e}", r.t, r.sup_norm, r.energy, r.origin.re, r.origin.im));
            for z in &r.rays {
                s.push_str(&format!(",{:.12e},{:.12e}", z.re, z.im));
            }
            s.push_str(&format!(
                ",{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.weighted_v, r.weighted_dx_v, r.weighted_filtered, r.l_norm, r.origin_filtered
            ));
        }
        s
    }
}
