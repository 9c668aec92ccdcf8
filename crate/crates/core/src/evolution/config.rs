use serde::{Deserialize, Serialize};

use crate::coefficients::{ProfileKind, DEFAULT_WINDOW_SIGMA};
use crate::error::{Error, Result};

/// Coefficient preset with optional removal of its resonant content.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    #[serde(flatten)]
    pub profile: ProfileKind,
    /// Width of the Gaussian de-resonation window, when requested.
    #[serde(default)]
    pub deresonate_window: Option<f64>,
}

impl CoefficientSpec {
    pub fn zero() -> Self {
        CoefficientSpec { profile: ProfileKind::Zero, deresonate_window: None }
    }

    pub fn plain(profile: ProfileKind) -> Self {
        CoefficientSpec { profile, deresonate_window: None }
    }

    pub fn deresonated(profile: ProfileKind) -> Self {
        CoefficientSpec { profile, deresonate_window: Some(DEFAULT_WINDOW_SIGMA) }
    }
}

/// Initial data shapes; both are multiplied by `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub u0: ProfileKind,
    pub u1: ProfileKind,
}

impl DataSpec {
    pub fn support_radius(&self) -> f64 {
        self.u0.support_radius().max(self.u1.support_radius())
    }
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec { u0: ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }, u1: ProfileKind::Zero }
    }
}

/// Sup norm above which a run is aborted.
pub const BLOWUP_THRESHOLD: f64 = 1e3;
/// Relative energy drift above which a run is aborted.
pub const ENERGY_ABORT: f64 = 1e-4;

/// Ray speeds sampled densely during a run: `±√3/2`, `0.6`, `0.95·√3/2`.
pub fn default_rays() -> Vec<f64> {
    let c = 3f64.sqrt() / 2.0;
    vec![c, -c, 0.6, 0.95 * c]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub half_length: f64,
    pub n_points: usize,
    pub alpha: CoefficientSpec,
    pub beta: CoefficientSpec,
    pub beta0: f64,
    pub data: DataSpec,
    pub epsilon: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Checkpoints at `T·2^{-j·ratio_log2}` down to `checkpoint_start`, plus `t = 0`.
    pub checkpoint_ratio_log2: f64,
    pub checkpoint_start: f64,
    pub dealias: bool,
    /// Steps between series records.
    pub record_every: usize,
    pub rays: Vec<f64>,
    /// Frequencies whose profile values are recorded at every series time.
    pub profile_probes: Vec<f64>,
    pub blowup_threshold: f64,
    pub energy_abort: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            half_length: 150.0,
            n_points: 4096,
            alpha: CoefficientSpec::plain(ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }),
            beta: CoefficientSpec::zero(),
            beta0: 0.0,
            data: DataSpec::default(),
            epsilon: 0.05,
            horizon: 100.0,
            dt: 0.05,
            checkpoint_ratio_log2: 0.25,
            checkpoint_start: 1.0,
            dealias: true,
            record_every: 10,
            rays: default_rays(),
            profile_probes: vec![0.0, 1.0, 2.0],
            blowup_threshold: BLOWUP_THRESHOLD,
            energy_abort: ENERGY_ABORT,
        }
    }
}

impl SimConfig {
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return bad(format!("dt must lie in (0, 0.1], got {}", self.dt));
        }
        if !(0.0..=0.5).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 0.5], got {}", self.epsilon));
        }
        if !(self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return bad(format!("horizon {} is not a whole number of steps of {}", self.horizon, self.dt));
        }
        let limit = self.half_length - self.data.support_radius() - 10.0;
        if self.horizon > limit {
            return bad(format!(
                "horizon {} exceeds L - support - 10 = {limit:.3}; the wave would wrap around",
                self.horizon
            ));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.checkpoint_ratio_log2 > 0.0) || !(self.checkpoint_start > 0.0) {
            return bad("checkpoint ratio and start must be positive".into());
        }
        if self.rays.iter().any(|c| c.abs() >= 1.0) {
            return bad("ray speeds must satisfy |c| < 1".into());
        }
        if !self.beta0.is_finite() {
            return bad("beta0 must be finite".into());
        }
        Ok(())
    }

    /// Step indices carrying a checkpoint, increasing, starting with 0.
    pub fn checkpoint_steps(&self) -> Vec<usize> {
        let n = self.steps();
        let mut steps = vec![n];
        let mut j = 1;
        loop {
            let t = self.horizon * 2f64.powf(-(j as f64) * self.checkpoint_ratio_log2);
            if t < self.checkpoint_start - 1e-9 {
                break;
            }
            steps.push((t / self.dt).round() as usize);
            j += 1;
        }
        steps.push(0);
        steps.sort_unstable();
        steps.dedup();
        steps
    }
}
