//! `v_mod(t,x) = (a₀²/2)∫₁^t (e^{i(t−s)⟨∇⟩}⟨∇⟩^{-1}α)(x) e^{2is}/s ds`.
//!
//! On the Fourier side the profile of `v_mod` is `(a₀²/2)⟨ξ⟩^{-1}α̂(ξ) K(t,ξ)` with
//! `K(t,ξ) = ∫₁^t e^{is(2−⟨ξ⟩)}/s ds`, evaluated with linear Filon panels.

use rayon::prelude::*;

use crate::coefficients::{resonance_values, sqrt3, Coefficient};
use crate::error::{Error, Result};
use crate::spectral::{bracket, to_spectrum};
use crate::{Grid, Spectrum, C64};
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

const I: C64 = C64::new(0.0, 1.0);
/// Frequencies with `|α̂| ≤ CUTOFF·max|α̂|` are dropped.
const CUTOFF: f64 = 1e-14;

/// `∫_0^1 e^{iθu} du` and `∫_0^1 u e^{iθu} du`.
fn filon_moments(theta: f64) -> (C64, C64) {
    if theta.abs() < 1e-2 {
        let z = I * theta;
        let mut e0 = C64::new(0.0, 0.0);
        let mut b = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..8 {
            e0 += p / (fact * (n + 1) as f64);
            b += p / (fact * (n + 2) as f64);
            p *= z;
            fact *= (n + 1) as f64;
        }
        (e0, b)
    } else {
        let e = C64::from_polar(1.0, theta);
        let e0 = (e - 1.0) / (I * theta);
        let b = e / (I * theta) + (e - 1.0) / (theta * theta);
        (e0, b)
    }
}

/// `∫_a^{a+h} e^{iks} g(s) ds` with `g` linear between `fa` and `fb`.
pub fn filon_panel(k: f64, a: f64, h: f64, fa: f64, fb: f64) -> C64 {
    let (e0, b) = filon_moments(k * h);
    C64::from_polar(h, k * a) * ((e0 - b) * fa + b * fb)
}

/// Panel nodes on `[a, b]`: step `min(0.2, s/50)`, or `0.05` within one unit of `target`; all scaled by `refine`.
pub fn panel_nodes(a: f64, b: f64, target: f64, refine: f64) -> Vec<f64> {
    let mut nodes = vec![a];
    let mut s = a;
    while s < b {
        let h = if target - s <= 1.0 { 0.05 } else { (s / 50.0).min(0.2) } * refine;
        s = (s + h).min(b);
        if b - s < 1e-9 * b {
            s = b;
        }
        nodes.push(s);
    }
    nodes
}

/// `∫ e^{iks}/s ds` over consecutive panels.
fn kernel_on(nodes: &[f64], k: f64) -> C64 {
    nodes.windows(2).map(|w| filon_panel(k, w[0], w[1] - w[0], 1.0 / w[0], 1.0 / w[1])).sum()
}

/// `K(t,ξ) = ∫₁^t e^{is(2−⟨ξ⟩)}/s ds`; zero for `t ≤ 1`.
pub fn resonance_kernel(t: f64, xi: f64) -> C64 {
    if t <= 1.0 {
        return C64::new(0.0, 0.0);
    }
    kernel_on(&panel_nodes(1.0, t, t, 1.0), 2.0 - bracket(xi))
}

/// Precomputed source `(a₀²/2)⟨ξ⟩^{-1}α̂(ξ)` on the lattice frequencies where `α̂` is not negligible.
#[derive(Clone, Debug)]
pub struct VmodSource {
    grid: Arc<Grid>,
    a0: C64,
    indices: Vec<usize>,
    xis: Vec<f64>,
    weights: Vec<C64>,
    alpha_minus: C64,
    alpha_plus: C64,
}

impl VmodSource {
    pub fn new(a0: C64, alpha: &Coefficient) -> Self {
        let grid = alpha.grid().clone();
        let ah = to_spectrum(alpha.field());
        let max = ah.sup_norm();
        let mut indices = Vec::new();
        let mut xis = Vec::new();
        let mut weights = Vec::new();
        if max > 0.0 && a0 != C64::new(0.0, 0.0) {
            for (i, (&xi, &c)) in grid.freqs().iter().zip(ah.coeffs()).enumerate() {
                if c.norm() > CUTOFF * max {
                    indices.push(i);
                    xis.push(xi);
                    weights.push(0.5 * a0 * a0 * c / bracket(xi));
                }
            }
        }
        let (alpha_plus, alpha_minus) = resonance_values(alpha);
        VmodSource { grid, a0, indices, xis, weights, alpha_minus, alpha_plus }
    }

    pub fn a0(&self) -> C64 {
        self.a0
    }

    pub fn active_frequencies(&self) -> usize {
        self.xis.len()
    }

    fn kernels(&self, nodes: &[f64]) -> Vec<C64> {
        self.xis.par_iter().map(|&xi| kernel_on(nodes, 2.0 - bracket(xi))).collect()
    }

    /// Profile of `v_mod` on the active frequencies at time `t`.
    fn profile_values(&self, t: f64, refine: f64) -> Vec<C64> {
        if t <= 1.0 {
            return vec![C64::new(0.0, 0.0); self.xis.len()];
        }
        let nodes = panel_nodes(1.0, t, t, refine);
        self.kernels(&nodes).iter().zip(&self.weights).map(|(k, w)| k * w).collect()
    }

    fn embed(&self, values: &[C64]) -> Spectrum {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (&i, &v) in self.indices.iter().zip(values) {
            coeffs[i] = v;
        }
        Spectrum::from_coeffs(&self.grid, coeffs).expect("grid length")
    }

    /// Profile `ĝ_mod(t,·)` on the full lattice.
    pub fn profile(&self, t: f64) -> Spectrum {
        self.embed(&self.profile_values(t, 1.0))
    }

    /// Profiles at increasing `times`, accumulating the kernel segment by segment.
    pub fn profile_series(&self, times: &[f64]) -> Result<Vec<Spectrum>> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("profile times must be increasing".into()));
        }
        let mut acc = vec![C64::new(0.0, 0.0); self.xis.len()];
        let mut prev = 1.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t > prev {
                let nodes = panel_nodes(prev, t, t, 1.0);
                for (a, k) in acc.iter_mut().zip(self.kernels(&nodes)) {
                    *a += k;
                }
                prev = t;
            }
            let vals: Vec<C64> = acc.iter().zip(&self.weights).map(|(k, w)| k * w).collect();
            out.push(self.embed(&vals));
        }
        Ok(out)
    }

    /// `v_mod(t, x)` with quadrature steps scaled by `refine`.
    pub fn eval_refined(&self, t: f64, x: f64, refine: f64) -> C64 {
        let g = self.profile_values(t, refine);
        let sum: C64 = g
            .iter()
            .zip(&self.xis)
            .map(|(c, &xi)| c * C64::from_polar(1.0, x * xi + t * bracket(xi)))
            .sum();
        sum * (self.grid.dxi() / (2.0 * PI).sqrt())
    }

    pub fn eval(&self, t: f64, x: f64) -> C64 {
        self.eval_refined(t, x, 1.0)
    }

    /// Leading term on the ray `x = sign·(√3/2)t`.
    pub fn ray_formula(&self, t: f64, sign: f64) -> C64 {
        let ah = if sign >= 0.0 { self.alpha_minus } else { self.alpha_plus };
        let amp = t.ln() / t.sqrt() / 8f64.sqrt();
        self.a0 * self.a0 * ah * C64::from_polar(amp, FRAC_PI_4 + 0.5 * t)
    }
}

/// `v_mod(t, x)` by quadrature in `s` with the propagator applied spectrally.
pub fn vmod_quadrature(a0: C64, alpha: &Coefficient, t: f64, x: f64) -> C64 {
    VmodSource::new(a0, alpha).eval(t, x)
}

/// `(a₀²/√8) e^{iπ/4} e^{it/2} α̂(∓√3) log t / t^{1/2}` on `x = ±(√3/2)t`.
pub fn vmod_ray_formula(a0: C64, alpha: &Coefficient, t: f64, sign: f64) -> C64 {
    VmodSource::new(a0, alpha).ray_formula(t, sign)
}

/// `|v_mod(t, ct)|·t^{1/2}` away from the resonant rays.
pub fn vmod_off_ray_bound(source: &VmodSource, t: f64, c: f64, delta: f64) -> Result<f64> {
    let ray = sqrt3() / 2.0;
    if (c - ray).abs() < delta || (c + ray).abs() < delta {
        return Err(Error::Domain(format!("speed {c} lies within {delta} of a resonant ray")));
    }
    Ok(source.eval(t, c * t).norm() * t.sqrt())
}
