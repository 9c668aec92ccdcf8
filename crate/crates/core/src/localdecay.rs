//! Operator norms of `⟨x⟩^{-a}⟨∇⟩^{-b} m(∇) e^{±it⟨∇⟩}⟨x⟩^{-a}` restricted to a window.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::asymptotics::loglog_slope;
use crate::error::{Error, Result};
use crate::spectral::bracket;
use crate::{Grid, C64};

/// Largest dense window.
pub const MAX_WINDOW_NODES: usize = 2048;
/// Relative change of the Rayleigh quotient at which power iteration stops.
pub const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    PxOverBracket,
    BracketMinusOne,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Plain, Variant::PxOverBracket, Variant::BracketMinusOne];

    pub fn symbol(self, xi: f64) -> C64 {
        match self {
            Variant::Plain => C64::new(1.0, 0.0),
            Variant::PxOverBracket => C64::new(0.0, xi / bracket(xi)),
            Variant::BracketMinusOne => C64::new((bracket(xi) - 1.0) / bracket(xi), 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::PxOverBracket => "px_over_bracket",
            Variant::BracketMinusOne => "bracket_minus_one",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeightedPropagatorSpec {
    pub a: f64,
    pub b: f64,
    pub variant: Variant,
    pub t: f64,
    /// Restrict to `|x| ≤ window`.
    pub window: f64,
    /// `+1` for `e^{+it⟨∇⟩}`, `−1` for `e^{−it⟨∇⟩}`.
    pub sign: f64,
}

impl WeightedPropagatorSpec {
    pub fn new(variant: Variant, a: f64, t: f64, window: f64) -> Self {
        WeightedPropagatorSpec { a, b: 0.0, variant, t, window, sign: 1.0 }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if self.a < 1.0 || self.b < 0.0 {
            return Err(Error::Domain(format!("need a ≥ 1 and b ≥ 0, got a = {}, b = {}", self.a, self.b)));
        }
        if self.window > grid.half_length() / 2.0 {
            return Err(Error::Domain(format!("window {} exceeds L/2", self.window)));
        }
        Ok(())
    }
}

/// Node indices with `|x| ≤ window`.
pub fn window_indices(grid: &Grid, window: f64) -> Vec<usize> {
    grid.nodes().iter().enumerate().filter(|(_, x)| x.abs() <= window).map(|(i, _)| i).collect()
}

/// Fraction of the Nyquist frequency where the taper starts.
pub const TAPER_START: f64 = 0.5;
/// Fraction of the Nyquist frequency beyond which the symbol vanishes.
pub const TAPER_END: f64 = 0.8;

/// Smooth spectral taper, 1 below `TAPER_START·ξ_N` and 0 above `TAPER_END·ξ_N`.
///
/// Without it the wrap of `⟨ξ⟩` at the Nyquist frequency has a kink whose kernel decays only
/// like `1/t` inside the window.
pub fn taper(xi: f64, nyquist: f64) -> f64 {
    let u = (xi.abs() / nyquist - TAPER_START) / (TAPER_END - TAPER_START);
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    f(1.0 - u) / (f(1.0 - u) + f(u))
}

/// First column of the circulant matrix of the Fourier multiplier.
fn circulant_column(spec: &WeightedPropagatorSpec, grid: &Grid) -> Vec<C64> {
    let n = grid.len();
    let nyquist = std::f64::consts::PI / grid.dx();
    let mut c: Vec<C64> = grid
        .freqs()
        .iter()
        .map(|&xi| {
            spec.variant.symbol(xi)
                * (taper(xi, nyquist) * bracket(xi).powf(-spec.b))
                * C64::from_polar(1.0, spec.sign * spec.t * bracket(xi))
        })
        .collect();
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut c);
    let scale = 1.0 / n as f64;
    c.iter_mut().for_each(|z| *z *= scale);
    c
}

/// Dense matrix of the weighted operator on the window nodes.
///
/// Column `j` is the operator applied to the node indicator at `x_j`; in the nodal basis the
/// matrix norm equals the `L²` operator norm of the discretised operator.
pub fn build_matrix(spec: &WeightedPropagatorSpec, grid: &Arc<Grid>) -> Result<DMatrix<C64>> {
    spec.validate(grid)?;
    let idx = window_indices(grid, spec.window);
    if idx.len() > MAX_WINDOW_NODES {
        return Err(Error::WindowTooLarge(idx.len()));
    }
    let n = grid.len();
    let col = circulant_column(spec, grid);
    let w: Vec<f64> = idx.iter().map(|&i| bracket(grid.nodes()[i]).powf(-spec.a)).collect();
    let m = idx.len();
    Ok(DMatrix::from_fn(m, m, |r, c| {
        let k = (idx[r] + n - idx[c]) % n;
        col[k] * (w[r] * w[c])
    }))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value by power iteration on `M†M`.
pub fn operator_norm(m: &DMatrix<C64>) -> NormEstimate {
    let cols = m.ncols();
    if cols == 0 || m.nrows() == 0 {
        return NormEstimate { norm: 0.0, iterations: 0, converged: true };
    }
    let mh = m.adjoint();
    let mut v = DVector::from_fn(cols, |i, _| C64::new(1.0 + 0.01 * ((i * 7919) % 101) as f64, 0.0));
    v /= C64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for it in 1..=POWER_MAX_ITER {
        let w = &mh * (m * &v);
        let next = w.norm();
        if next == 0.0 {
            return NormEstimate { norm: 0.0, iterations: it, converged: true };
        }
        v = w / C64::new(next, 0.0);
        if (next - lambda).abs() <= POWER_TOL * next {
            return NormEstimate { norm: next.sqrt(), iterations: it, converged: true };
        }
        lambda = next;
    }
    log::warn!("power iteration did not reach {POWER_TOL:e} in {POWER_MAX_ITER} steps");
    NormEstimate { norm: lambda.sqrt(), iterations: POWER_MAX_ITER, converged: false }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayScan {
    pub variant: Variant,
    pub a: f64,
    pub b: f64,
    pub window: f64,
    pub norms: Vec<(f64, f64)>,
    pub exponent: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Norms at each `t` and the log-log exponent.
pub fn decay_scan(variant: Variant, a: f64, b: f64, times: &[f64], window: f64, grid: &Arc<Grid>) -> Result<DecayScan> {
    let results: Vec<(f64, NormEstimate)> = times
        .par_iter()
        .map(|&t| {
            let spec = WeightedPropagatorSpec { a, b, variant, t, window, sign: 1.0 };
            Ok((t, operator_norm(&build_matrix(&spec, grid)?)))
        })
        .collect::<Result<_>>()?;
    let norms: Vec<(f64, f64)> = results.iter().map(|(t, e)| (*t, e.norm)).collect();
    let (exponent, residual) = loglog_slope(&norms)?;
    Ok(DecayScan { variant, a, b, window, norms, exponent, residual, converged: results.iter().all(|(_, e)| e.converged) })
}

/// `count` times geometric in `[t1, t2]`.
pub fn geometric_times(t1: f64, t2: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![t1];
    }
    let r = (t2 / t1).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| t1 * r.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<Grid> {
        Grid::new(100.0, 2048).unwrap()
    }

    #[test]
    fn time_zero_is_weighted_multiplication() {
        let g = grid();
        let m = build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 2.0, 0.0, 10.0), &g).unwrap();
        assert_eq!(m.ncols(), window_indices(&g, 10.0).len());
        for (i, row) in m.row_iter().enumerate() {
            let off = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, z)| z.norm()).fold(0.0, f64::max);
            assert!(m[(i, i)].norm() > 2.0 * off);
        }
        let est = operator_norm(&m);
        assert!(est.converged && est.norm <= 1.0 + 1e-12 && est.norm > 0.95, "{est:?}");
    }

    #[test]
    fn adjoint_is_time_reversal() {
        let g = grid();
        let fwd = build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 2.0, 7.0, 10.0), &g).unwrap();
        let back = build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 2.0, -7.0, 10.0), &g).unwrap();
        assert!((fwd.adjoint() - back).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn small_norm_examples() {
        let id = DMatrix::<C64>::identity(5, 5);
        assert!((operator_norm(&id).norm - 1.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(1.0, 0.0)]));
        assert!((operator_norm(&d).norm - 3.0).abs() < 1e-7);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let m = DMatrix::from_fn(50, 50, |i, j| {
            let k = (i * 31 + j * 17) as f64;
            C64::new((0.37 * k).sin(), (0.11 * k * k).cos() / (1.0 + j as f64))
        });
        let svd = m.clone().svd(false, false);
        let top = svd.singular_values.max();
        assert!((operator_norm(&m).norm - top).abs() < 1e-6 * top);
    }

    #[test]
    fn window_guards() {
        let g = grid();
        assert!(build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 2.0, 1.0, 60.0), &g).is_err());
        assert!(build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 0.5, 1.0, 10.0), &g).is_err());
        let fine = Grid::new(200.0, 1 << 15).unwrap();
        assert!(matches!(
            build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 2.0, 1.0, 20.0), &fine),
            Err(Error::WindowTooLarge(_))
        ));
    }

    #[test]
    fn plain_variant_is_a_contraction() {
        let g = grid();
        for t in [1.0, 5.0, 20.0] {
            let m = build_matrix(&WeightedPropagatorSpec::new(Variant::Plain, 2.0, t, 20.0), &g).unwrap();
            assert!(operator_norm(&m).norm <= 1.0 + 1e-12);
        }
    }

    /// Leading stationary-phase constants at `ξ = 0` with `a = 2`.
    fn leading_norm(v: Variant, t: f64) -> f64 {
        let c = (2.0 * std::f64::consts::PI).sqrt();
        match v {
            Variant::Plain => c / 4.0 * t.powf(-0.5),
            Variant::PxOverBracket => c / 4.0 * t.powf(-1.5),
            Variant::BracketMinusOne => c / 8.0 * t.powf(-1.5),
        }
    }

    #[test]
    fn late_norms_match_leading_asymptotics() {
        let g = Grid::new(1200.0, 16384).unwrap();
        for v in Variant::ALL {
            let m = build_matrix(&WeightedPropagatorSpec::new(v, 2.0, 300.0, 80.0), &g).unwrap();
            let rel = operator_norm(&m).norm / leading_norm(v, 300.0) - 1.0;
            assert!(rel.abs() < 0.03, "{v:?}: {rel}");
        }
    }

    #[test]
    fn hierarchy_and_saturation() {
        let g = Grid::new(1200.0, 16384).unwrap();
        for t in geometric_times(10.0, 300.0, 4) {
            let norm = |v, w| operator_norm(&build_matrix(&WeightedPropagatorSpec::new(v, 2.0, t, w), &g).unwrap()).norm;
            let [p, d, b] = Variant::ALL.map(|v| norm(v, 40.0));
            assert!(b <= 3.0 * d && d <= 3.0 * p);
            for (v, n) in Variant::ALL.into_iter().zip([p, d, b]) {
                assert!((norm(v, 80.0) / n - 1.0).abs() < 0.02, "{v:?} t = {t}");
            }
        }
    }

    #[test]
    fn taper_is_smooth_step() {
        assert_eq!(taper(0.4, 1.0), 1.0);
        assert_eq!(taper(-0.9, 1.0), 0.0);
        assert!((taper(0.65, 1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn geometric_times_span() {
        let ts = geometric_times(10.0, 300.0, 6);
        assert_eq!(ts.len(), 6);
        assert!((ts[0] - 10.0).abs() < 1e-12 && (ts[5] - 300.0).abs() < 1e-9);
    }
}
