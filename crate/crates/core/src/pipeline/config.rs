use serde::{Deserialize, Serialize};

use crate::coefficients::ProfileKind;
use crate::error::{Error, Result};
use crate::evolution::{CoefficientSpec, DataSpec, SimConfig};
use crate::localdecay::{Variant, MAX_WINDOW_NODES};
use crate::oscillatory::MIN_POINTS_PER_WAVELENGTH;

/// Grid, coefficients and data of the flagship resonant run.
pub fn resonant_sim() -> SimConfig {
    SimConfig {
        half_length: 1100.0,
        n_points: 1 << 15,
        alpha: CoefficientSpec::plain(ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }),
        data: DataSpec { u0: ProfileKind::Gaussian { amplitude: 1.0, sigma: 3.0, center: 0.0 }, u1: ProfileKind::Zero },
        epsilon: 0.05,
        horizon: 1000.0,
        ..SimConfig::default()
    }
}

/// [`resonant_sim`] with odd coefficient and data, so that `v(t, 0) ≡ 0`.
pub fn odd_resonant_sim() -> SimConfig {
    SimConfig {
        alpha: CoefficientSpec::plain(ProfileKind::OddGaussian { amplitude: 1.0, sigma: 1.0 }),
        data: DataSpec { u0: ProfileKind::OddGaussian { amplitude: 1.0, sigma: 3.0 }, u1: ProfileKind::Zero },
        ..resonant_sim()
    }
}

/// Same grid as [`resonant_sim`] with a de-resonated coefficient and a cubic term.
pub fn nonresonant_sim() -> SimConfig {
    SimConfig {
        alpha: CoefficientSpec::deresonated(ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }),
        data: DataSpec::default(),
        beta0: 1.0,
        ..resonant_sim()
    }
}

fn default_control_rays() -> Vec<f64> {
    vec![0.6]
}

fn default_vmod_times() -> Vec<f64> {
    vec![10.0, 100.0, 300.0, 1000.0]
}

fn default_offray_speeds() -> Vec<f64> {
    vec![0.5, 0.99]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonantConfig {
    pub sim: SimConfig,
    /// Fit window; `[T/16, T/2]` when absent.
    pub fit_window: Option<(f64, f64)>,
    pub control_rays: Vec<f64>,
    pub vmod_times: Vec<f64>,
    pub offray_speeds: Vec<f64>,
    /// Geometric times in `[10, T]` for the off-ray scan.
    pub offray_samples: usize,
    pub vmod_profiles: bool,
}

impl Default for ResonantConfig {
    fn default() -> Self {
        ResonantConfig {
            sim: resonant_sim(),
            fit_window: None,
            control_rays: default_control_rays(),
            vmod_times: default_vmod_times(),
            offray_speeds: default_offray_speeds(),
            offray_samples: 7,
            vmod_profiles: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonresonantConfig {
    pub sim: SimConfig,
    pub fit_window: Option<(f64, f64)>,
    /// Frequencies whose corrected and uncorrected histories are reported.
    pub xis: Vec<f64>,
    /// `(t, x)` pairs for the pointwise prediction table.
    pub predict_points: Vec<(f64, f64)>,
}

impl Default for NonresonantConfig {
    fn default() -> Self {
        NonresonantConfig {
            sim: nonresonant_sim(),
            fit_window: None,
            xis: vec![0.0, 1.0, 2.0],
            predict_points: vec![(500.0, 0.0), (1000.0, 0.0), (1000.0, -300.0), (1000.0, -500.0), (1000.0, 300.0)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalDecayConfig {
    pub half_length: f64,
    pub n_points: usize,
    pub window: f64,
    pub a: f64,
    pub b: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub variants: Vec<Variant>,
    /// Also scan at twice the window and report the largest relative change.
    pub saturation_check: bool,
}

impl Default for LocalDecayConfig {
    fn default() -> Self {
        LocalDecayConfig {
            half_length: 1200.0,
            n_points: 16384,
            window: 40.0,
            a: 2.0,
            b: 0.0,
            t_min: 10.0,
            t_max: 300.0,
            samples: 12,
            variants: Variant::ALL.to_vec(),
            saturation_check: true,
        }
    }
}

impl LocalDecayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.half_length < 4.0 * self.t_max {
            return Err(Error::Config(format!("L = {} must be at least 4·t_max = {}", self.half_length, 4.0 * self.t_max)));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.samples >= 2) {
            return Err(Error::Config("need 0 < t_min < t_max and at least two samples".into()));
        }
        let dx = 2.0 * self.half_length / self.n_points as f64;
        let span = if self.saturation_check { 2.0 * self.window } else { self.window };
        if (2.0 * span / dx) as usize + 1 > MAX_WINDOW_NODES {
            return Err(Error::Config(format!("window {span} holds more than {MAX_WINDOW_NODES} nodes")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscintConfig {
    pub lambdas: Vec<f64>,
    pub points_per_wavelength: f64,
    /// Diagonal of the Hessian of the test phase `½(h₁η² + h₂σ²)`.
    pub hessian: [f64; 2],
    pub cubic_xis: Vec<f64>,
    /// Thin-shell cutoff and densities for the brute-force self-convergence table.
    pub convergence_lambda: f64,
    pub convergence_densities: Vec<f64>,
}

impl Default for OscintConfig {
    fn default() -> Self {
        OscintConfig {
            lambdas: vec![50.0, 100.0, 200.0, 400.0],
            points_per_wavelength: MIN_POINTS_PER_WAVELENGTH,
            hessian: [1.0, 1.0],
            cubic_xis: vec![-2.0, 0.0, 1.0, 5.0],
            convergence_lambda: 10.0,
            convergence_densities: vec![40.0, 80.0, 160.0, 640.0],
        }
    }
}

impl OscintConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|&l| !(l > 0.0)) || self.lambdas.is_empty() {
            return Err(Error::Config("lambdas must be positive and non-empty".into()));
        }
        if self.hessian.iter().any(|&h| h == 0.0 || !h.is_finite()) {
            return Err(Error::Config("test phase Hessian must be non-degenerate".into()));
        }
        if self.points_per_wavelength < MIN_POINTS_PER_WAVELENGTH {
            return Err(Error::Config(format!("points_per_wavelength must be at least {MIN_POINTS_PER_WAVELENGTH}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub sim: SimConfig,
    /// Also run the integrator and free-propagator quality checks.
    pub quality: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    Simulate,
    Resonant,
    Nonresonant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub target: SweepTarget,
    pub sim: SimConfig,
    pub epsilons: Vec<f64>,
    /// Amplitudes substituted into the quadratic coefficient preset.
    pub amplitudes: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            target: SweepTarget::Simulate,
            sim: SimConfig::default(),
            epsilons: vec![0.025, 0.05, 0.1],
            amplitudes: vec![0.5, 1.0],
        }
    }
}

/// `kind` with its amplitude replaced.
pub fn with_amplitude(kind: &ProfileKind, a: f64) -> ProfileKind {
    let mut k = kind.clone();
    match &mut k {
        ProfileKind::Zero => {}
        ProfileKind::Gaussian { amplitude, .. }
        | ProfileKind::Sech2 { amplitude, .. }
        | ProfileKind::SechTanh { amplitude }
        | ProfileKind::CosineGaussian { amplitude, .. }
        | ProfileKind::OddGaussian { amplitude, .. } => *amplitude = a,
    }
    k
}
