use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

use super::fit::{fit_decay, DecayFit, DecayModel};
use crate::error::{Error, Result};
use crate::evolution::{BilinearRecord, Trajectory};
use crate::spectral::to_spectrum;
use crate::{Field, C64};

/// Fraction of the horizon covered by the time integrals.
pub const INTEGRATION_FRACTION: f64 = 0.8;
/// Tail estimates above this fraction of `|a₀|` mark the value unreliable.
pub const TAIL_LIMIT: f64 = 0.2;

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct A0Breakdown {
    /// `v̂₀(0)`
    pub data: C64,
    /// `½∫αv₀²`
    pub square: C64,
    /// `∫α|v₀|²`
    pub modulus: C64,
    /// `(1/6)∫αv̄₀²`
    pub conj_square: C64,
    /// `∫e^{is}∫α ∂_s(e^{-is}v)(e^{-is}v)`
    pub j1: C64,
    /// `∫e^{-is}∫α ∂_s|v|²`
    pub j2: C64,
    /// `(1/3)∫e^{-3is}∫α ∂_s(e^{is}v̄)(e^{is}v̄)`
    pub j3: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplitudeA0 {
    pub value: C64,
    pub t_int: f64,
    /// `2C T_int^{-1/2}` with `C` fitted to `s^{-3/2}` over the last decade.
    pub tail: f64,
    pub tail_constant: f64,
    pub unreliable: bool,
    pub breakdown: A0Breakdown,
}

fn trapezoid(records: &[BilinearRecord], g: impl Fn(&BilinearRecord) -> C64) -> C64 {
    records.windows(2).map(|w| (g(&w[0]) + g(&w[1])) * (0.5 * (w[1].t - w[0].t))).sum()
}

fn static_terms(v0: &Field, alpha: &[f64]) -> (C64, C64, C64) {
    let dx = v0.grid().dx();
    let mut sq = C64::new(0.0, 0.0);
    let mut md = 0.0;
    for (z, a) in v0.values().iter().zip(alpha) {
        sq += a * z * z;
        md += a * z.norm_sqr();
    }
    (sq * dx, C64::new(md * dx, 0.0), sq.conj() * dx)
}

/// Amplitude at the origin from the initial data and the recorded bilinear integrands.
pub fn compute_a0(traj: &Trajectory) -> Result<AmplitudeA0> {
    let v0 = traj.initial_solution();
    let data = to_spectrum(&v0).coeffs()[0];
    let alpha = traj.model.alpha.samples();
    let (sq, md, csq) = static_terms(&v0, &alpha);
    let norm = 1.0 / (2.0 * PI).sqrt();

    let t_int = INTEGRATION_FRACTION * traj.config.horizon;
    let recs: Vec<BilinearRecord> = traj.bilinear.iter().copied().filter(|r| r.t <= t_int + 1e-9).collect();
    let t_int = recs.last().map_or(0.0, |r| r.t);
    let j1 = trapezoid(&recs, |r| C64::from_polar(1.0, r.t) * r.s1);
    let j2 = trapezoid(&recs, |r| C64::from_polar(r.s2, -r.t));
    let j3 = trapezoid(&recs, |r| C64::from_polar(1.0, -3.0 * r.t) * r.s1.conj()) / 3.0;

    let breakdown = A0Breakdown {
        data,
        square: 0.5 * sq * norm,
        modulus: md * norm,
        conj_square: csq / 6.0 * norm,
        j1: j1 * norm,
        j2: j2 * norm,
        j3: j3 * norm,
    };
    let b = &breakdown;
    let value = b.data + b.square - b.modulus - b.conj_square + b.j1 - b.j2 - b.j3;

    let decade: Vec<&BilinearRecord> = recs.iter().filter(|r| r.t >= 0.1 * t_int && r.t > 0.0).collect();
    let (num, den) = decade.iter().fold((0.0, 0.0), |(n, d), r| {
        let g = norm * (r.s1.norm() + r.s2.abs() + r.s1.norm() / 3.0);
        let w = r.t.powf(-1.5);
        (n + g * w, d + w * w)
    });
    let tail_constant = if den > 0.0 { num / den } else { 0.0 };
    let tail = if t_int > 0.0 { 2.0 * tail_constant / t_int.sqrt() } else { 0.0 };
    let unreliable = tail > TAIL_LIMIT * value.norm();
    Ok(AmplitudeA0 { value, t_int, tail, tail_constant, unreliable, breakdown })
}

/// `v(t,0) t^{1/2} e^{-it} e^{-iπ/4}` averaged over `window`.
pub fn a0_from_origin(series: &[(f64, C64)], window: (f64, f64)) -> Result<C64> {
    let vals: Vec<C64> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .map(|&(t, z)| z * C64::from_polar(t.sqrt(), -t - FRAC_PI_4))
        .collect();
    if vals.is_empty() {
        return Err(Error::DegenerateFit(format!("no origin samples in [{}, {}]", window.0, window.1)));
    }
    Ok(vals.iter().sum::<C64>() / vals.len() as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct OriginCheck {
    pub errors: Vec<(f64, f64)>,
    /// Power fit of the error over the window; absent when the error vanishes identically.
    pub fit: Option<DecayFit>,
}

impl OriginCheck {
    /// Fitted error exponent `−p`.
    pub fn exponent(&self) -> Option<f64> {
        self.fit.as_ref().and_then(|f| f.exponent()).map(|p| -p)
    }
}

/// `|v(t,0) − t^{-1/2}e^{iπ/4}e^{it}a₀|` with a power fit over `window`.
pub fn check_origin(series: &[(f64, C64)], a0: C64, window: (f64, f64)) -> OriginCheck {
    let errors: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t > 0.0)
        .map(|&(t, z)| (t, (z - a0 * C64::from_polar(t.powf(-0.5), FRAC_PI_4 + t)).norm()))
        .collect();
    let fit = fit_decay(&errors, DecayModel::Power, window).ok();
    OriginCheck { errors, fit }
}
