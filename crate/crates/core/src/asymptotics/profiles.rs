use serde::Serialize;
use std::f64::consts::FRAC_PI_4;

use super::vmod::VmodSource;
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::spectral::{bracket, cubic_interpolate};
use crate::{Spectrum, C64};

/// Sup distance between profiles at `t1` and `t2 ≈ 2 t1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CauchyPoint {
    pub t1: f64,
    pub t2: f64,
    pub diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitProfile {
    pub t: f64,
    /// Lattice frequencies, increasing.
    pub xis: Vec<f64>,
    pub values: Vec<C64>,
    pub cauchy: Vec<CauchyPoint>,
}

impl LimitProfile {
    fn from_spectrum(t: f64, s: &Spectrum, cauchy: Vec<CauchyPoint>) -> Self {
        let (xis, values) = s.sorted().into_iter().unzip();
        LimitProfile { t, xis, values, cauchy }
    }

    /// Linear interpolation between lattice frequencies; zero outside the lattice range.
    pub fn value_at(&self, xi: f64) -> C64 {
        let n = self.xis.len();
        if n == 0 || xi < self.xis[0] || xi > self.xis[n - 1] {
            return C64::new(0.0, 0.0);
        }
        let j = self.xis.partition_point(|&x| x <= xi).min(n - 1).max(1);
        let (x0, x1) = (self.xis[j - 1], self.xis[j]);
        let w = (xi - x0) / (x1 - x0);
        self.values[j - 1] * (1.0 - w) + self.values[j] * w
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Checkpoint index pairs `(i, j)` with `t_j` within one step of `2 t_i`, `t_i ≥ 1`.
pub fn dyadic_pairs(times: &[f64], dt: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        if t < 1.0 - 1e-9 {
            continue;
        }
        if let Some(j) = times.iter().position(|&s| (s - 2.0 * t).abs() <= dt * 0.5 + 1e-9) {
            out.push((i, j));
        }
    }
    out
}

fn cauchy_curve(times: &[f64], profiles: &[Spectrum], dt: f64) -> Result<Vec<CauchyPoint>> {
    dyadic_pairs(times, dt)
        .into_iter()
        .map(|(i, j)| Ok(CauchyPoint { t1: times[i], t2: times[j], diff: profiles[j].sub(&profiles[i])?.sup_norm() }))
        .collect()
}

/// `⟨ξ⟩^{3/2}` times the profile of `v − v_mod` at each checkpoint.
pub fn corrected_profiles(traj: &Trajectory, source: &VmodSource) -> Result<Vec<Spectrum>> {
    let times: Vec<f64> = traj.checkpoints.iter().map(|c| c.t).collect();
    let mods = source.profile_series(&times)?;
    traj.checkpoints
        .iter()
        .zip(mods)
        .map(|(cp, m)| Ok(cp.profile.sub(&m)?.map(|xi, c| c * bracket(xi).powf(1.5))))
        .collect()
}

/// `V̂ = ⟨ξ⟩^{3/2}ĝ(T)` with `g` the profile of `v − v_mod`, plus its dyadic Cauchy curve.
pub fn extract_v(traj: &Trajectory, a0: C64) -> Result<LimitProfile> {
    let source = VmodSource::new(a0, &traj.model.alpha);
    let profiles = corrected_profiles(traj, &source)?;
    let times: Vec<f64> = traj.checkpoints.iter().map(|c| c.t).collect();
    let cauchy = cauchy_curve(&times, &profiles, traj.config.dt)?;
    let last = profiles.last().ok_or_else(|| Error::Domain("trajectory has no checkpoints".into()))?;
    Ok(LimitProfile::from_spectrum(traj.last().t, last, cauchy))
}

/// `B(t) = (3β₀/2)⟨ξ⟩^{-1}∫₁^t |⟨ξ⟩^{3/2}f̂(s,ξ)|²/s ds` at the nearest lattice frequency.
///
/// Uses the dense profile probes when `ξ` is probed, the checkpoint integrals otherwise.
pub fn integrating_phase_b(traj: &Trajectory, beta0: f64, xi: f64) -> Vec<(f64, f64)> {
    let k = traj.grid.nearest_freq_index(xi);
    let xk = traj.grid.freqs()[k];
    let scale = 1.5 * beta0 / bracket(xk);
    if let Some(p) = traj.probes.indices.iter().position(|&i| i == k) {
        let b3 = bracket(xk).powi(3);
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for (&t, vals) in traj.probes.times.iter().zip(&traj.probes.values) {
            if t < 1.0 - 1e-9 {
                continue;
            }
            let q = vals[p].norm_sqr() * b3 / t;
            if let Some((t0, q0)) = prev {
                acc += 0.5 * (t - t0) * (q + q0);
            }
            prev = Some((t, q));
            out.push((t, scale * acc));
        }
        out
    } else {
        traj.checkpoints.iter().filter(|c| c.t >= 1.0 - 1e-9).map(|c| (c.t, scale * c.self_phase_integral[k])).collect()
    }
}

/// `⟨ξ⟩^{3/2} f̂(t)` at each checkpoint, optionally multiplied by `e^{iB(t,ξ)}`.
pub fn scattering_profiles(traj: &Trajectory, beta0: f64, corrected: bool) -> Vec<Spectrum> {
    traj.checkpoints
        .iter()
        .map(|cp| {
            let mut s = cp.profile.map(|xi, c| c * bracket(xi).powf(1.5));
            if corrected {
                for ((c, &xi), &integral) in s.coeffs_mut().iter_mut().zip(traj.grid.freqs()).zip(&cp.self_phase_integral) {
                    *c *= C64::from_polar(1.0, 1.5 * beta0 / bracket(xi) * integral);
                }
            }
            s
        })
        .collect()
}

/// `Ŵ = ⟨ξ⟩^{3/2} f̂(T) e^{iB(T)}` with the Cauchy curve of the corrected profiles.
pub fn extract_w(traj: &Trajectory, beta0: f64) -> Result<LimitProfile> {
    let profiles = scattering_profiles(traj, beta0, true);
    let times: Vec<f64> = traj.checkpoints.iter().map(|c| c.t).collect();
    let cauchy = cauchy_curve(&times, &profiles, traj.config.dt)?;
    let last = profiles.last().ok_or_else(|| Error::Domain("trajectory has no checkpoints".into()))?;
    Ok(LimitProfile::from_spectrum(traj.last().t, last, cauchy))
}

/// Corrected and uncorrected `⟨ξ⟩^{3/2}f̂` at one lattice frequency across checkpoints.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencyHistory {
    pub xi: f64,
    pub times: Vec<f64>,
    pub corrected: Vec<C64>,
    pub uncorrected: Vec<C64>,
}

impl FrequencyHistory {
    /// `|P(t_j) − P(t_i)|` over dyadic checkpoint pairs.
    pub fn cauchy(&self, corrected: bool, dt: f64) -> Vec<CauchyPoint> {
        let vals = if corrected { &self.corrected } else { &self.uncorrected };
        dyadic_pairs(&self.times, dt)
            .into_iter()
            .map(|(i, j)| CauchyPoint { t1: self.times[i], t2: self.times[j], diff: (vals[j] - vals[i]).norm() })
            .collect()
    }

    /// Oscillation `sup |P(s) − P(s')|` over `s, s' ∈ [t_end/2^k, t_end/2^{k−1}]`, `k = blocks … 1`.
    pub fn oscillation(&self, corrected: bool, t_end: f64, blocks: usize) -> Vec<CauchyPoint> {
        let vals = if corrected { &self.corrected } else { &self.uncorrected };
        (1..=blocks)
            .rev()
            .map(|k| {
                let t2 = t_end / 2f64.powi(k as i32 - 1);
                let t1 = t2 / 2.0;
                let block: Vec<C64> =
                    self.times.iter().zip(vals).filter(|(&t, _)| t >= t1 - 1e-9 && t <= t2 + 1e-9).map(|(_, &v)| v).collect();
                let diff = block
                    .iter()
                    .enumerate()
                    .flat_map(|(i, a)| block[i + 1..].iter().map(move |b| (a - b).norm()))
                    .fold(0.0, f64::max);
                CauchyPoint { t1, t2, diff }
            })
            .collect()
    }

    /// Phase change of the uncorrected profile between `t` and the checkpoint nearest `2t`.
    pub fn phase_drift(&self, t1: f64, t2: f64) -> f64 {
        let near = |t: f64| {
            (0..self.times.len()).min_by(|&a, &b| (self.times[a] - t).abs().total_cmp(&(self.times[b] - t).abs())).unwrap()
        };
        let (a, b) = (self.uncorrected[near(t1)], self.uncorrected[near(t2)]);
        (b * a.conj()).arg().abs()
    }
}

pub fn frequency_history(traj: &Trajectory, beta0: f64, xi: f64) -> FrequencyHistory {
    let k = traj.grid.nearest_freq_index(xi);
    let xk = traj.grid.freqs()[k];
    let w = bracket(xk).powf(1.5);
    let mut h = FrequencyHistory { xi: xk, times: Vec::new(), corrected: Vec::new(), uncorrected: Vec::new() };
    for cp in &traj.checkpoints {
        let p = cp.profile.coeffs()[k] * w;
        h.times.push(cp.t);
        h.uncorrected.push(p);
        h.corrected.push(p * C64::from_polar(1.0, 1.5 * beta0 / bracket(xk) * cp.self_phase_integral[k]));
    }
    h
}

/// Dense history from the profile probes; `None` when `ξ` is not probed.
pub fn probe_history(traj: &Trajectory, beta0: f64, xi: f64) -> Option<FrequencyHistory> {
    let k = traj.grid.nearest_freq_index(xi);
    let p = traj.probes.indices.iter().position(|&i| i == k)?;
    let xk = traj.grid.freqs()[k];
    let w = bracket(xk).powf(1.5);
    let b = integrating_phase_b(traj, beta0, xk);
    let mut h = FrequencyHistory { xi: xk, times: Vec::new(), corrected: Vec::new(), uncorrected: Vec::new() };
    for ((&t, vals), &(tb, phase)) in traj.probes.times.iter().zip(&traj.probes.values).filter(|(&t, _)| t >= 1.0 - 1e-9).zip(&b) {
        debug_assert!((t - tb).abs() < 1e-9);
        let v = vals[p] * w;
        h.times.push(t);
        h.uncorrected.push(v);
        h.corrected.push(v * C64::from_polar(1.0, phase));
    }
    Some(h)
}

/// `t^{-1/2}e^{iπ/4}e^{iρ}e^{-i(3β₀/2)⟨x/ρ⟩^{-1}|Ŵ(−x/ρ)|² log t}Ŵ(−x/ρ)`; zero for `|x| ≥ t`.
pub fn predict_pointwise(w: &LimitProfile, beta0: f64, t: f64, x: f64) -> C64 {
    if x.abs() >= t {
        return C64::new(0.0, 0.0);
    }
    let rho = (t * t - x * x).sqrt();
    let xi = -x / rho;
    let wv = w.value_at(xi);
    let phase = FRAC_PI_4 + rho - 1.5 * beta0 / bracket(xi) * wv.norm_sqr() * t.ln();
    wv * C64::from_polar(t.powf(-0.5), phase)
}

/// `v(t, ct)` at each checkpoint by cubic interpolation.
pub fn sample_ray(traj: &Trajectory, c: f64) -> Result<Vec<(f64, C64)>> {
    if c.abs() >= 1.0 {
        return Err(Error::Domain(format!("ray speed {c} must satisfy |c| < 1")));
    }
    let l = traj.grid.half_length();
    let dx = traj.grid.dx();
    let mut out = Vec::new();
    for cp in &traj.checkpoints {
        let x = c * cp.t;
        if x.abs() > 0.9 * l {
            log::warn!("ray c = {c} leaves the resolved region at t = {}; truncating", cp.t);
            break;
        }
        let v = cp.solution();
        out.push((cp.t, cubic_interpolate(v.values(), (x + l) / dx)));
    }
    Ok(out)
}

/// Densely recorded `v(t, ct)` when `c` is one of the configured rays.
pub fn ray_series(traj: &Trajectory, c: f64) -> Option<Vec<(f64, C64)>> {
    let k = traj.ray_index(c)?;
    Some(traj.series.iter().map(|r| (r.t, r.rays[k])).collect())
}
