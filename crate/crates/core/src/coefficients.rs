//! Localized real coefficients and their resonance data at `ξ = ±√3`.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bracket, ft_at, to_spectrum};
use crate::{Field, Grid, C64};

/// Relative size of `|α̂(±√3)|` below which a coefficient counts as non-resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-8;
/// Boundary values above `BOUNDARY_TOLERANCE · A` are rejected.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;
/// Width of the default de-resonation window.
pub const DEFAULT_WINDOW_SIGMA: f64 = 2.0;

pub fn sqrt3() -> f64 {
    3f64.sqrt()
}

/// Named coefficient presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Zero,
    Gaussian {
        amplitude: f64,
        sigma: f64,
        #[serde(default)]
        center: f64,
    },
    Sech2 { amplitude: f64, width: f64 },
    SechTanh { amplitude: f64 },
    CosineGaussian { amplitude: f64, sigma: f64, omega: f64 },
    /// `A (x/σ) e^{-x²/(2σ²)}`
    OddGaussian { amplitude: f64, sigma: f64 },
}

impl ProfileKind {
    pub fn amplitude(&self) -> f64 {
        match *self {
            ProfileKind::Zero => 0.0,
            ProfileKind::Gaussian { amplitude, .. }
            | ProfileKind::Sech2 { amplitude, .. }
            | ProfileKind::SechTanh { amplitude }
            | ProfileKind::CosineGaussian { amplitude, .. }
            | ProfileKind::OddGaussian { amplitude, .. } => amplitude,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ProfileKind::Zero => 0.0,
            ProfileKind::Gaussian { amplitude, sigma, center } => {
                let z = (x - center) / sigma;
                amplitude * (-0.5 * z * z).exp()
            }
            ProfileKind::Sech2 { amplitude, width } => amplitude / (x / width).cosh().powi(2),
            ProfileKind::SechTanh { amplitude } => amplitude * x.tanh() / x.cosh(),
            ProfileKind::CosineGaussian { amplitude, sigma, omega } => {
                let z = x / sigma;
                amplitude * (omega * x).cos() * (-0.5 * z * z).exp()
            }
            ProfileKind::OddGaussian { amplitude, sigma } => {
                let z = x / sigma;
                amplitude * z * (-0.5 * z * z).exp()
            }
        }
    }

    /// Half-width outside which the profile is below `1e-10·A`.
    pub fn support_radius(&self) -> f64 {
        let log = (1e10f64).ln();
        match *self {
            ProfileKind::Zero => 0.0,
            ProfileKind::Gaussian { sigma, center, .. } => center.abs() + sigma * (2.0 * log).sqrt(),
            ProfileKind::CosineGaussian { sigma, .. } => sigma * (2.0 * log).sqrt(),
            ProfileKind::OddGaussian { sigma, .. } => sigma * (2.0 * (log + 2.0)).sqrt(),
            ProfileKind::Sech2 { width, .. } => width * 0.5 * (log + 2f64.ln() * 2.0),
            ProfileKind::SechTanh { .. } => log + 2f64.ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            ProfileKind::Gaussian { sigma, .. }
            | ProfileKind::CosineGaussian { sigma, .. }
            | ProfileKind::OddGaussian { sigma, .. } => positive("sigma", sigma),
            ProfileKind::Sech2 { width, .. } => positive("width", width),
            _ => Ok(()),
        }
    }
}

/// Real coefficient with its resonance values `r± = α̂(±√3)`.
#[derive(Clone, Debug)]
pub struct Coefficient {
    field: Field,
    r_plus: C64,
    r_minus: C64,
    l2: f64,
    resonant: bool,
    sobolev: Vec<SobolevNorm>,
    deresonation: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorm {
    pub weight: u32,
    pub derivatives: u32,
    pub value: f64,
}

/// Weight/derivative orders recorded on every coefficient.
const RECORDED_NORMS: [(u32, u32); 3] = [(0, 0), (2, 4), (8, 3)];

impl Coefficient {
    /// Wrap a real field, computing resonance values and recorded norms.
    pub fn from_field(field: Field) -> Result<Self> {
        let field = field.into_real(1e-12)?;
        let r_plus = ft_at(&field, sqrt3());
        let r_minus = ft_at(&field, -sqrt3());
        let l2 = field.norm_l2();
        let resonant = r_plus.norm().max(r_minus.norm()) > RESONANCE_TOLERANCE * l2;
        let sobolev = RECORDED_NORMS
            .iter()
            .map(|&(weight, derivatives)| {
                let value = weighted_sobolev(&field, weight, derivatives)?;
                Ok(SobolevNorm { weight, derivatives, value })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Coefficient { field, r_plus, r_minus, l2, resonant, sobolev, deresonation: None })
    }

    pub fn zero(grid: &Arc<Grid>) -> Self {
        Self::from_field(Field::zeros(grid)).expect("zero field is real")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.field.grid()
    }

    /// Real sample values.
    pub fn samples(&self) -> Vec<f64> {
        self.field.real_parts()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2
    }

    pub fn is_resonant(&self) -> bool {
        self.resonant
    }

    pub fn is_zero(&self) -> bool {
        self.field.sup_norm() == 0.0
    }

    pub fn sobolev_norms(&self) -> &[SobolevNorm] {
        &self.sobolev
    }

    /// Carrier weights `(c₁, c₂)` if this coefficient came out of [`deresonate`].
    pub fn deresonation(&self) -> Option<[f64; 2]> {
        self.deresonation
    }

    /// `(α̂(+√3), α̂(−√3))` recomputed by quadrature.
    pub fn recompute_resonance(&self) -> (C64, C64) {
        (ft_at(&self.field, sqrt3()), ft_at(&self.field, -sqrt3()))
    }
}

/// Build a preset coefficient on `grid`.
pub fn make_profile(kind: &ProfileKind, grid: &Arc<Grid>) -> Result<Coefficient> {
    let field = sample_profile(kind, grid)?;
    Coefficient::from_field(field)
}

/// Sample a preset as a real field, rejecting profiles that do not decay on the grid.
pub fn sample_profile(kind: &ProfileKind, grid: &Arc<Grid>) -> Result<Field> {
    kind.validate()?;
    let field = Field::from_real_fn(grid, |x| kind.eval(x));
    let edge = field.boundary_magnitude();
    if edge > BOUNDARY_TOLERANCE * kind.amplitude().abs() {
        return Err(Error::BoundaryDecay(edge));
    }
    Ok(field)
}

/// Stored resonance values `(r₊, r₋)`.
pub fn resonance_values(c: &Coefficient) -> (C64, C64) {
    (c.r_plus, c.r_minus)
}

/// Gaussian window `e^{-x²/(2σ²)}`.
pub fn gaussian_window(grid: &Arc<Grid>, sigma: f64) -> Field {
    Field::from_real_fn(grid, |x| (-0.5 * (x / sigma).powi(2)).exp())
}

/// Remove the resonant content at `±√3` with real carriers `cos(√3x)g`, `sin(√3x)g`.
pub fn deresonate(c: &Coefficient, window: &Field) -> Result<Coefficient> {
    if !c.grid().same_as(window.grid()) {
        return Err(Error::GridMismatch);
    }
    let s = sqrt3();
    let cos_g = window.map(|x, g| g * (s * x).cos());
    let sin_g = window.map(|x, g| g * (s * x).sin());
    let a = ft_at(&cos_g, s);
    let b = ft_at(&sin_g, s);
    let m = Matrix2::new(a.re, b.re, a.im, b.im);
    let det = m.determinant();
    let scale = a.norm() * b.norm();
    if scale == 0.0 || det.abs() <= 1e-12 * scale {
        return Err(Error::SingularWindow(det));
    }
    let (r, _) = resonance_values(c);
    let coef = m.try_inverse().ok_or(Error::SingularWindow(det))? * Vector2::new(r.re, r.im);
    let (c1, c2) = (coef[0], coef[1]);
    let samples: Vec<f64> = c
        .field()
        .values()
        .iter()
        .zip(cos_g.values().iter().zip(sin_g.values()))
        .map(|(v, (p, q))| v.re - c1 * p.re - c2 * q.re)
        .collect();
    let mut out = Coefficient::from_field(Field::from_real_values(c.grid(), &samples)?)?;
    out.deresonation = Some([c1, c2]);
    Ok(out)
}

/// `‖⟨x⟩^j f‖_{H^m}` with spectral derivatives.
pub fn weighted_sobolev(f: &Field, j: u32, m: u32) -> Result<f64> {
    if m > 4 {
        return Err(Error::Domain(format!("derivative order {m} exceeds 4")));
    }
    let w = f.map(|x, z| z * bracket(x).powi(j as i32));
    let spec = to_spectrum(&w);
    let dxi = f.grid().dxi();
    let total: f64 = spec
        .coeffs()
        .iter()
        .zip(f.grid().freqs())
        .map(|(c, &xi)| {
            let x2 = xi * xi;
            let mut p = 1.0;
            let mut acc = 0.0;
            for _ in 0..=m {
                acc += p;
                p *= x2;
            }
            c.norm_sqr() * acc
        })
        .sum();
    Ok((total * dxi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Arc<Grid> {
        Grid::new(100.0, 2048).unwrap()
    }

    fn gauss(a: f64, s: f64) -> ProfileKind {
        ProfileKind::Gaussian { amplitude: a, sigma: s, center: 0.0 }
    }

    #[test]
    fn gaussian_resonance_value() {
        let c = make_profile(&gauss(1.0, 1.0), &grid()).unwrap();
        let (rp, rm) = resonance_values(&c);
        assert_relative_eq!(rp.re, (-1.5f64).exp(), epsilon = 1e-12);
        assert!(rp.im.abs() < 1e-14);
        assert!((rm - rp.conj()).norm() < 1e-12);
        assert!(c.is_resonant());
    }

    #[test]
    fn odd_coefficient_has_imaginary_resonance() {
        let c = make_profile(&ProfileKind::SechTanh { amplitude: 1.0 }, &grid()).unwrap();
        let (rp, _) = resonance_values(&c);
        assert!(rp.re.abs() < 1e-14);
        assert!(rp.im.abs() > 1e-3);
        assert!(c.is_resonant());
    }

    #[test]
    fn cosine_gaussian_peaks_at_resonance() {
        let g = grid();
        let mag = |omega: f64| {
            let c = make_profile(&ProfileKind::CosineGaussian { amplitude: 1.0, sigma: 3.0, omega }, &g).unwrap();
            c.recompute_resonance().0.norm()
        };
        let best = mag(sqrt3());
        for k in 0..=30 {
            let omega = 0.5 + 0.1 * k as f64;
            assert!(mag(omega) <= best + 1e-12, "omega {omega}");
        }
    }

    #[test]
    fn rejects_non_decaying_profile() {
        let g = Grid::new(20.0, 512).unwrap();
        let r = make_profile(&gauss(1.0, 8.0), &g);
        assert!(matches!(r, Err(Error::BoundaryDecay(_))));
    }

    #[test]
    fn deresonation_kills_both_values() {
        let g = grid();
        let c = make_profile(&gauss(1.0, 1.0), &g).unwrap();
        let d = deresonate(&c, &gaussian_window(&g, DEFAULT_WINDOW_SIGMA)).unwrap();
        let (rp, rm) = d.recompute_resonance();
        assert!(rp.norm() <= 1e-10 && rm.norm() <= 1e-10);
        assert!(!d.is_resonant());
        let [c1, c2] = d.deresonation().unwrap();
        let diff = d.field().sub(c.field()).unwrap().norm_l2();
        let gl2 = gaussian_window(&g, DEFAULT_WINDOW_SIGMA).norm_l2();
        assert!(diff <= (c1.abs() + c2.abs()) * gl2 + 1e-12);
        let again = deresonate(&d, &gaussian_window(&g, DEFAULT_WINDOW_SIGMA)).unwrap();
        assert!(again.field().sub(d.field()).unwrap().sup_norm() <= 1e-10);
        let [a1, a2] = again.deresonation().unwrap();
        assert!(a1.abs() <= 1e-10 && a2.abs() <= 1e-10);
    }

    #[test]
    fn deresonation_of_shifted_profile() {
        let g = grid();
        let kind = ProfileKind::Gaussian { amplitude: 0.7, sigma: 1.3, center: 1.5 };
        let c = make_profile(&kind, &g).unwrap();
        let d = deresonate(&c, &gaussian_window(&g, 2.0)).unwrap();
        let (rp, rm) = d.recompute_resonance();
        assert!(rp.norm() <= 1e-10 && rm.norm() <= 1e-10);
    }

    #[test]
    fn degenerate_window_rejected() {
        let g = grid();
        let c = make_profile(&gauss(1.0, 1.0), &g).unwrap();
        assert!(matches!(deresonate(&c, &Field::zeros(&g)), Err(Error::SingularWindow(_))));
    }

    #[test]
    fn sobolev_values() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        assert_relative_eq!(weighted_sobolev(&f, 0, 0).unwrap(), f.norm_l2(), max_relative = 1e-12);
        let expect = (std::f64::consts::PI.sqrt() * 1.5).sqrt();
        assert_relative_eq!(weighted_sobolev(&f, 0, 1).unwrap(), expect, max_relative = 1e-10);
        assert_relative_eq!(expect, 1.630546, epsilon = 1e-6);
        let f2 = f.scale(C64::new(2.0, 0.0));
        assert_relative_eq!(weighted_sobolev(&f2, 2, 3).unwrap(), 2.0 * weighted_sobolev(&f, 2, 3).unwrap(), max_relative = 1e-12);
        assert!(weighted_sobolev(&f, 0, 5).is_err());
    }

    #[test]
    fn presets_are_interior_dominated() {
        let g = grid();
        let kinds = [
            gauss(1.0, 1.0),
            ProfileKind::Sech2 { amplitude: 1.0, width: 1.0 },
            ProfileKind::SechTanh { amplitude: 1.0 },
            ProfileKind::CosineGaussian { amplitude: 1.0, sigma: 2.0, omega: 1.0 },
        ];
        for kind in &kinds {
            let c = make_profile(kind, &g).unwrap();
            let total = weighted_sobolev(c.field(), 8, 3).unwrap();
            let outer = c.field().map(|x, z| if x.abs() > 0.8 * 100.0 { z } else { C64::new(0.0, 0.0) });
            let edge = weighted_sobolev(&outer, 8, 3).unwrap();
            assert!(edge < 1e-8 * total, "{kind:?}: {edge:e} vs {total:e}");
        }
    }
}
