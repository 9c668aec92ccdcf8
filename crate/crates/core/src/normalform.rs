//! Quadratic normal form at the origin for non-resonant coefficients.
//!
//! With `z = v(t,0)`, `Q = α₁z² + α₂|z|² + α₃z̄²` where
//! `α̂₁ = ½(2−⟨ξ⟩)^{-1}⟨ξ⟩^{-1}α̂`, `α̂₂ = −⟨ξ⟩^{-2}α̂`, `α̂₃ = −½(2+⟨ξ⟩)^{-1}⟨ξ⟩^{-1}α̂`.

use serde::Serialize;

use crate::coefficients::{resonance_values, Coefficient};
use crate::error::{Error, Result};
use crate::evolution::{dealias_mask, nonlinearity, phase_filtered_derivative, Model, SimState, Trajectory};
use crate::spectral::{bracket, from_spectrum, to_spectrum, GUARD_BAND};
use crate::{Field, Spectrum, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Interpolation data for one guard band around `±√3`.
#[derive(Clone, Debug, Serialize)]
pub struct GuardBand {
    pub center: f64,
    /// Lattice frequencies inside the band.
    pub band_xis: Vec<f64>,
    /// Largest `|α̂₁|` inside the band.
    pub band_max: f64,
    /// Largest `|α̂₁|` at the two lattice points adjacent to the band.
    pub edge_max: f64,
    /// Distance from the resonant frequency to the nearest lattice point.
    pub nearest_offset: f64,
}

#[derive(Clone, Debug)]
pub struct NormalFormCoeffs {
    pub alpha1: Field,
    pub alpha2: Field,
    pub alpha3: Field,
    pub spectra: [Spectrum; 3],
    pub source: Coefficient,
    pub guards: Vec<GuardBand>,
}

impl NormalFormCoeffs {
    /// Guard bands satisfy `max |α̂₁| ≤ 10 × edge value`.
    pub fn guards_ok(&self) -> bool {
        self.guards.iter().all(|g| g.band_max <= 10.0 * g.edge_max || g.band_xis.is_empty())
    }
}

fn lagrange_cubic(xs: [f64; 4], ys: [C64; 4], x: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += ys[i] * w;
    }
    acc
}

/// Coefficients `α₁, α₂, α₃`; inside the guard band the quotient for `α̂₁` is interpolated
/// with a cubic through two lattice points on each side.
pub fn normal_form_coefficients(alpha: &Coefficient) -> Result<NormalFormCoeffs> {
    if alpha.is_resonant() {
        let (p, m) = resonance_values(alpha);
        return Err(Error::ResonantCoefficient { plus: p.norm(), minus: m.norm() });
    }
    let grid = alpha.grid().clone();
    let ah = to_spectrum(alpha.field());
    let a2 = ah.map(|xi, c| -c / (1.0 + xi * xi));
    let a3 = ah.map(|xi, c| -0.5 * c / ((2.0 + bracket(xi)) * bracket(xi)));
    let quotient = |xi: f64, c: C64| 0.5 * c / ((2.0 - bracket(xi)) * bracket(xi));
    let in_band = |xi: f64| (2.0 - bracket(xi)).abs() < GUARD_BAND;
    let mut a1 = ah.map(|xi, c| if in_band(xi) { C64::new(0.0, 0.0) } else { quotient(xi, c) });

    let order: Vec<usize> = grid.sorted_indices().collect();
    let freqs = grid.freqs();
    let mut guards = Vec::new();
    for center in [-(3f64.sqrt()), 3f64.sqrt()] {
        let nearest = grid.nearest_freq_index(center);
        let pos = order.iter().position(|&i| i == nearest).expect("index in lattice");
        let mut lo = pos;
        while lo > 0 && in_band(freqs[order[lo - 1]]) {
            lo -= 1;
        }
        let mut hi = pos;
        while hi + 1 < order.len() && in_band(freqs[order[hi + 1]]) {
            hi += 1;
        }
        let band: Vec<usize> = (lo..=hi).filter(|&p| in_band(freqs[order[p]])).collect();
        let mut band_max: f64 = 0.0;
        let mut edge_max: f64 = 0.0;
        if let (Some(&first), Some(&last)) = (band.first(), band.last()) {
            let support = [first - 2, first - 1, last + 1, last + 2].map(|p| order[p]);
            let xs = support.map(|i| freqs[i]);
            let ys = support.map(|i| quotient(freqs[i], ah.coeffs()[i]));
            for &p in &band {
                let i = order[p];
                let val = lagrange_cubic(xs, ys, freqs[i]);
                a1.coeffs_mut()[i] = val;
                band_max = band_max.max(val.norm());
            }
            edge_max = ys[1].norm().max(ys[2].norm());
        }
        guards.push(GuardBand {
            center,
            band_xis: band.iter().map(|&p| freqs[order[p]]).collect(),
            band_max,
            edge_max,
            nearest_offset: (freqs[nearest] - center).abs(),
        });
    }

    let alpha1 = from_spectrum(&a1).into_real(1e-10)?;
    let alpha2 = from_spectrum(&a2).into_real(1e-10)?;
    let alpha3 = from_spectrum(&a3).into_real(1e-10)?;
    Ok(NormalFormCoeffs { alpha1, alpha2, alpha3, spectra: [a1, a2, a3], source: alpha.clone(), guards })
}

/// `Q = α₁z² + α₂|z|² + α₃z̄²`.
pub fn q_field(nf: &NormalFormCoeffs, z: C64) -> Field {
    let (p, q, r) = (z * z, z.norm_sqr(), z.conj() * z.conj());
    let values = nf
        .alpha1
        .values()
        .iter()
        .zip(nf.alpha2.values())
        .zip(nf.alpha3.values())
        .map(|((a1, a2), a3)| a1 * p + a2 * q + a3 * r)
        .collect();
    Field::from_values(nf.alpha1.grid(), values).expect("same grid")
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub residual: f64,
    pub v_l2: f64,
    /// `‖2α₁e^{2it}w′w + 2α₂Re(w′w̄) + 2α₃e^{-2it}w̄′w̄‖_{L²}`, `w = e^{-it}v(t,0)`.
    pub source_l2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormReport {
    pub samples: Vec<ResidualSample>,
    pub max_residual: f64,
    pub max_v_l2: f64,
    pub guards: Vec<GuardBand>,
    pub guards_ok: bool,
}

impl NormalFormReport {
    /// `max residual / max ‖v‖`.
    pub fn relative(&self) -> f64 {
        if self.max_v_l2 == 0.0 {
            0.0
        } else {
            self.max_residual / self.max_v_l2
        }
    }
}

fn l2(s: &[C64], dxi: f64) -> f64 {
    (s.iter().map(|z| z.norm_sqr()).sum::<f64>() * dxi).sqrt()
}

/// Residual of `(∂_t − i⟨∇⟩)(v + Q) = RHS` at one state.
///
/// The left side uses the equation for `∂_t v` and the chain rule on `Q`; the right side is
/// assembled from the six terms of the transformed equation. The `α u₀²` part of the quadratic
/// term uses the coefficient the normal form was built from, so the identity also holds when
/// `model` carries a different (or no) quadratic coefficient.
pub fn residual_at(state: &SimState, nf: &NormalFormCoeffs, model: &Model) -> Result<ResidualSample> {
    let grid = state.grid().clone();
    let mask = dealias_mask(&grid, model.dealias);
    let t = state.t;
    let dxi = grid.dxi();
    let point = dxi / (2.0 * std::f64::consts::PI).sqrt();
    let vh: Vec<C64> = state.solution_spectrum().coeffs().iter().zip(&mask).map(|(c, m)| c * m).collect();
    let nh = nonlinearity(state, model)?;

    let z: C64 = vh.iter().sum::<C64>() * point;
    let zdot: C64 = vh
        .iter()
        .zip(nh.coeffs())
        .zip(grid.freqs())
        .map(|((v, n), &xi)| I * bracket(xi) * v + n)
        .sum::<C64>()
        * point;
    let [a1, a2, a3] = &nf.spectra;
    let qdot_coef = [2.0 * z * zdot, C64::new(2.0 * (z.conj() * zdot).re, 0.0), 2.0 * z.conj() * zdot.conj()];
    let q_coef = [z * z, C64::new(z.norm_sqr(), 0.0), z.conj() * z.conj()];

    let wdot = phase_filtered_derivative(state, model)?.at_origin();
    let w = z * C64::from_polar(1.0, -t);
    let src = [
        2.0 * C64::from_polar(1.0, 2.0 * t) * wdot * w,
        C64::new(2.0 * (wdot * w.conj()).re, 0.0),
        2.0 * C64::from_polar(1.0, -2.0 * t) * wdot.conj() * w.conj(),
    ];

    let v = from_spectrum(&Spectrum::from_coeffs(&grid, vh.clone())?);
    let u: Vec<f64> = v.values().iter().map(|z| 2.0 * z.re).collect();
    let u0 = 2.0 * z.re;
    let alpha = model.alpha.samples();
    let beta = model.beta.samples();
    let duhamel = |vals: Vec<f64>| -> Result<Vec<C64>> {
        let f = Field::from_real_values(&grid, &vals)?;
        Ok(to_spectrum(&f)
            .coeffs()
            .iter()
            .zip(grid.freqs())
            .zip(&mask)
            .map(|((c, &xi), m)| c * m / (2.0 * I * bracket(xi)))
            .collect())
    };
    let t4 = duhamel(u.iter().zip(&alpha).map(|(u, a)| a * u * u).collect())?;
    let t4_origin: Vec<C64> = to_spectrum(nf.source.field())
        .coeffs()
        .iter()
        .zip(grid.freqs())
        .map(|(c, &xi)| c * u0 * u0 / (2.0 * I * bracket(xi)))
        .collect();
    let t5 = duhamel(u.iter().zip(&beta).map(|(u, b)| b * u * u * u).collect())?;
    let t6 = duhamel(u.iter().map(|u| model.beta0 * u * u * u).collect())?;

    let mut diff = Vec::with_capacity(grid.len());
    let mut source = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let xi = grid.freqs()[k];
        let aj = [a1.coeffs()[k], a2.coeffs()[k], a3.coeffs()[k]];
        let qk: C64 = (0..3).map(|j| aj[j] * q_coef[j]).sum();
        let qdot: C64 = (0..3).map(|j| aj[j] * qdot_coef[j]).sum();
        let lhs = nh.coeffs()[k] + qdot - I * bracket(xi) * qk;
        let s: C64 = (0..3).map(|j| aj[j] * src[j]).sum();
        let rhs = s + t4[k] - t4_origin[k] + t5[k] + t6[k];
        diff.push(lhs - rhs);
        source.push(s);
    }
    Ok(ResidualSample { t, residual: l2(&diff, dxi), v_l2: l2(&vh, dxi), source_l2: l2(&source, dxi) })
}

/// Maximum over checkpoints of the transformed-equation residual.
pub fn residual_check(traj: &Trajectory, nf: &NormalFormCoeffs) -> Result<NormalFormReport> {
    let samples = traj
        .checkpoints
        .iter()
        .map(|cp| residual_at(&SimState::new(cp.t, cp.profile.clone()), nf, &traj.model))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let max_v_l2 = samples.iter().map(|s| s.v_l2).fold(0.0, f64::max);
    Ok(NormalFormReport { samples, max_residual, max_v_l2, guards: nf.guards.clone(), guards_ok: nf.guards_ok() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{deresonate, gaussian_window, make_profile, ProfileKind};
    use crate::evolution::step;
    use crate::Grid;
    use std::sync::Arc;

    fn deresonated(grid: &Arc<Grid>) -> Coefficient {
        let a = make_profile(&ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }, grid).unwrap();
        deresonate(&a, &gaussian_window(grid, 2.0)).unwrap()
    }

    #[test]
    fn resonant_alpha_rejected() {
        let g = Grid::new(100.0, 2048).unwrap();
        let a = make_profile(&ProfileKind::Gaussian { amplitude: 1.0, sigma: 1.0, center: 0.0 }, &g).unwrap();
        assert!(matches!(normal_form_coefficients(&a), Err(Error::ResonantCoefficient { .. })));
    }

    #[test]
    fn narrow_band_alpha_divides_directly() {
        let g = Grid::new(200.0, 4096).unwrap();
        let a = make_profile(&ProfileKind::Gaussian { amplitude: 1.0, sigma: 12.0, center: 0.0 }, &g).unwrap();
        assert!(!a.is_resonant());
        let nf = normal_form_coefficients(&a).unwrap();
        let ah = to_spectrum(a.field());
        for ((&xi, c), d) in g.freqs().iter().zip(ah.coeffs()).zip(nf.spectra[0].coeffs()) {
            if xi.abs() <= 1.0 {
                let expect = 0.5 * c / ((2.0 - bracket(xi)) * bracket(xi));
                assert!((d - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn alpha2_identity_and_origin_value() {
        let g = Grid::new(100.0, 2048).unwrap();
        let a = deresonated(&g);
        let nf = normal_form_coefficients(&a).unwrap();
        let ah = to_spectrum(a.field());
        for ((&xi, c), d) in g.freqs().iter().zip(ah.coeffs()).zip(nf.spectra[1].coeffs()) {
            assert_eq!(*d, -c / (1.0 + xi * xi));
        }
        assert_eq!(nf.spectra[1].coeffs()[0], -ah.coeffs()[0]);
        for f in [&nf.alpha1, &nf.alpha2, &nf.alpha3] {
            assert!(f.is_tagged_real());
        }
    }

    #[test]
    fn guard_band_interpolation_is_bounded() {
        let l = std::f64::consts::PI / 3f64.sqrt() * 200.0;
        let g = Grid::new(l, 8192).unwrap();
        let a = deresonated(&g);
        let nf = normal_form_coefficients(&a).unwrap();
        assert!(nf.guards.iter().all(|b| !b.band_xis.is_empty()));
        assert!(nf.guards_ok(), "{:?}", nf.guards);
        let k = g.nearest_freq_index(3f64.sqrt());
        let neighbours = [k - 1, k + 1].map(|i| nf.spectra[0].coeffs()[i]);
        let mid = nf.spectra[0].coeffs()[k];
        let avg = (neighbours[0] + neighbours[1]) * 0.5;
        assert!((mid - avg).norm() < 1e-3 * avg.norm().max(1e-12));
    }

    #[test]
    fn q_field_examples() {
        let g = Grid::new(100.0, 2048).unwrap();
        let nf = normal_form_coefficients(&deresonated(&g)).unwrap();
        assert_eq!(q_field(&nf, C64::new(0.0, 0.0)).sup_norm(), 0.0);
        let sum = nf.alpha1.add(&nf.alpha2).unwrap().add(&nf.alpha3).unwrap();
        assert!(q_field(&nf, C64::new(1.0, 0.0)).sub(&sum).unwrap().sup_norm() < 1e-15);
        let z = C64::new(0.3, 0.0);
        let a = q_field(&nf, z * 2.0);
        let b = q_field(&nf, z).scale(C64::new(4.0, 0.0));
        assert!(a.sub(&b).unwrap().sup_norm() < 1e-15);
        let z = C64::new(0.2, -0.7);
        let bound = (nf.alpha1.sup_norm() + nf.alpha2.sup_norm() + nf.alpha3.sup_norm()) * z.norm_sqr();
        assert!(q_field(&nf, z).sup_norm() <= bound + 1e-15);
    }

    #[test]
    fn residual_vanishes_along_the_flow() {
        let g = Grid::new(100.0, 2048).unwrap();
        let nf = normal_form_coefficients(&deresonated(&g)).unwrap();
        let v0 = Field::from_real_fn(&g, |x| 0.05 * (-x * x / 2.0).exp());
        let zero = SimState::from_solution(0.0, &Field::zeros(&g));
        let lin = Model::linear(&g);
        assert_eq!(residual_at(&zero, &nf, &lin).unwrap().residual, 0.0);
        let mut s = SimState::from_solution(0.0, &v0);
        for _ in 0..5 {
            s = step(&s, &lin, 0.05).unwrap();
        }
        let r = residual_at(&s, &nf, &lin).unwrap();
        assert!(r.residual <= 1e-10, "{r:?}");
        let mut model = Model::linear(&g);
        model.alpha = nf.source.clone();
        model.beta0 = 1.0;
        let mut s = SimState::from_solution(0.0, &v0);
        for _ in 0..20 {
            s = step(&s, &model, 0.05).unwrap();
        }
        let r = residual_at(&s, &nf, &model).unwrap();
        assert!(r.residual <= 1e-10 * r.v_l2, "{r:?}");
    }
}
