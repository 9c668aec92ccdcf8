//! Decay fits, amplitude at the origin, `v_mod` and limit profiles extracted from trajectories.

mod fit;
mod origin;
mod profiles;
mod vmod;

pub use fit::{default_window, fit_decay, loglog_slope, DecayFit, DecayModel, FitParams, MIN_SAMPLES};
pub use origin::{a0_from_origin, check_origin, compute_a0, A0Breakdown, AmplitudeA0, OriginCheck, INTEGRATION_FRACTION, TAIL_LIMIT};
pub use profiles::{
    corrected_profiles, dyadic_pairs, extract_v, extract_w, frequency_history, integrating_phase_b, predict_pointwise, probe_history,
    ray_series, sample_ray, scattering_profiles, CauchyPoint, FrequencyHistory, LimitProfile,
};
pub use vmod::{
    filon_panel, panel_nodes, resonance_kernel, vmod_off_ray_bound, vmod_quadrature, vmod_ray_formula, VmodSource,
};
