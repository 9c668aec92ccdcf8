//! Two-dimensional stationary phase, its brute-force oracle, the cubic phases `φ₁…φ₄`
//! and the phase geometry of `v_mod`.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::spectral::bracket;
use crate::C64;

pub type Point = [f64; 2];

/// Smooth phase with analytic derivatives.
pub trait Phase2D: Sync {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> Point;
    fn hessian(&self, p: Point) -> [[f64; 2]; 2];
}

/// `ψ(p) = ½ pᵀ H p`.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticPhase {
    pub h: [[f64; 2]; 2],
}

impl QuadraticPhase {
    pub fn diagonal(a: f64, b: f64) -> Self {
        QuadraticPhase { h: [[a, 0.0], [0.0, b]] }
    }
}

impl Phase2D for QuadraticPhase {
    fn value(&self, p: Point) -> f64 {
        let g = self.gradient(p);
        0.5 * (p[0] * g[0] + p[1] * g[1])
    }
    fn gradient(&self, p: Point) -> Point {
        let h = self.h;
        [h[0][0] * p[0] + h[0][1] * p[1], h[1][0] * p[0] + h[1][1] * p[1]]
    }
    fn hessian(&self, _: Point) -> [[f64; 2]; 2] {
        self.h
    }
}

/// `φ_j(ξ, η, σ)` as a function of `(η, σ)`:
/// signs `(c₀, c₁, c₂)` in `−⟨ξ⟩ + c₀⟨ξ−η−σ⟩ + c₁⟨η⟩ + c₂⟨σ⟩` are
/// `(+,+,+)`, `(+,−,+)`, `(+,−,−)`, `(−,−,−)` for `j = 1…4`.
#[derive(Clone, Copy, Debug)]
pub struct CubicPhase {
    pub j: u8,
    pub xi: f64,
    signs: [f64; 3],
}

impl CubicPhase {
    pub fn new(j: u8, xi: f64) -> Result<Self> {
        let signs = match j {
            1 => [1.0, 1.0, 1.0],
            2 => [1.0, -1.0, 1.0],
            3 => [1.0, -1.0, -1.0],
            4 => [-1.0, -1.0, -1.0],
            _ => return Err(Error::Domain(format!("cubic phase index {j} not in 1..=4"))),
        };
        Ok(CubicPhase { j, xi, signs })
    }
}

fn d1(x: f64) -> f64 {
    x / bracket(x)
}

fn d2(x: f64) -> f64 {
    bracket(x).powi(-3)
}

impl Phase2D for CubicPhase {
    fn value(&self, p: Point) -> f64 {
        let [c0, c1, c2] = self.signs;
        -bracket(self.xi) + c0 * bracket(self.xi - p[0] - p[1]) + c1 * bracket(p[0]) + c2 * bracket(p[1])
    }
    fn gradient(&self, p: Point) -> Point {
        let [c0, c1, c2] = self.signs;
        let w = -c0 * d1(self.xi - p[0] - p[1]);
        [w + c1 * d1(p[0]), w + c2 * d1(p[1])]
    }
    fn hessian(&self, p: Point) -> [[f64; 2]; 2] {
        let [c0, c1, c2] = self.signs;
        let w = c0 * d2(self.xi - p[0] - p[1]);
        [[w + c1 * d2(p[0]), w], [w, w + c2 * d2(p[1])]]
    }
}

/// Largest discrepancy between analytic and central-difference derivatives at `p`.
pub fn finite_difference_check(phase: &dyn Phase2D, p: Point, step: f64) -> f64 {
    let g = phase.gradient(p);
    let h = phase.hessian(p);
    let mut err: f64 = 0.0;
    for k in 0..2 {
        let mut a = p;
        let mut b = p;
        a[k] += step;
        b[k] -= step;
        let fd = (phase.value(a) - phase.value(b)) / (2.0 * step);
        err = err.max((fd - g[k]).abs());
        let (ga, gb) = (phase.gradient(a), phase.gradient(b));
        for l in 0..2 {
            err = err.max(((ga[l] - gb[l]) / (2.0 * step) - h[l][k]).abs());
        }
    }
    err
}

/// Radial cutoff equal to 1 on `|p − c| ≤ inner`, vanishing smoothly at `outer`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cutoff {
    pub center: Point,
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    /// Support in the ball of radius 2 about the origin.
    pub fn standard() -> Self {
        Cutoff { center: [0.0, 0.0], inner: 0.5, outer: 2.0 }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let r = (p[0] - self.center[0]).hypot(p[1] - self.center[1]);
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let u = (self.outer - r) / (self.outer - self.inner);
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseAnalysis2D {
    pub point: Point,
    pub value: f64,
    pub det: f64,
    pub signature: i32,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Signature of a symmetric 2×2 matrix; `0` also for singular matrices.
pub fn signature(h: [[f64; 2]; 2]) -> i32 {
    let eig = SymmetricEigen::new(Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]));
    eig.eigenvalues.iter().map(|&l| if l > 0.0 { 1 } else if l < 0.0 { -1 } else { 0 }).sum()
}

const NEWTON_ITERATIONS: usize = 50;
const GRADIENT_TOL: f64 = 1e-13;
const DEGENERATE_DET: f64 = 1e-8;
/// Longest Newton step; keeps the iteration inside the basin of saturating phases.
const MAX_STEP: f64 = 0.25;

fn norm(g: Point) -> f64 {
    g[0].hypot(g[1])
}

/// Damped Newton iteration on `∇ψ = 0` with step-length control.
pub fn find_stationary_point(phase: &dyn Phase2D, start: Point) -> Result<PhaseAnalysis2D> {
    let mut p = start;
    let mut g = phase.gradient(p);
    let mut iterations = 0;
    while norm(g) > GRADIENT_TOL {
        if iterations == NEWTON_ITERATIONS {
            return Err(Error::Newton(norm(g)));
        }
        iterations += 1;
        let h = phase.hessian(p);
        let m = Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]);
        let gv = Vector2::new(g[0], g[1]);
        // near-singular Hessians away from the root get a descent step on |∇ψ|²
        let step = match m.try_inverse().filter(|_| m.determinant().abs() >= DEGENERATE_DET) {
            Some(inv) => inv * gv,
            None => {
                let d = m.transpose() * gv;
                d * (gv.norm_squared() / d.norm_squared().max(f64::MIN_POSITIVE))
            }
        };
        let mut damp = (MAX_STEP / step.norm()).min(1.0);
        loop {
            let q = [p[0] - damp * step[0], p[1] - damp * step[1]];
            let gq = phase.gradient(q);
            if norm(gq) < norm(g) || damp < 1e-4 {
                p = q;
                g = gq;
                break;
            }
            damp *= 0.5;
        }
    }
    let h = phase.hessian(p);
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det.abs() < DEGENERATE_DET {
        return Err(Error::DegenerateHessian(det));
    }
    Ok(PhaseAnalysis2D { point: p, value: phase.value(p), det, signature: signature(h), iterations, gradient_norm: norm(g) })
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryPhase {
    pub analysis: PhaseAnalysis2D,
    pub leading: C64,
}

/// `2π e^{iπs/4} Δ^{-1/2} e^{iλψ(p₀)} λ^{-1} F(p₀)χ(p₀)` with `p₀` found from the cutoff centre.
pub fn stationary_phase_2d(
    phase: &dyn Phase2D,
    amplitude: &(dyn Fn(Point) -> C64 + Sync),
    cutoff: &Cutoff,
    lambda: f64,
) -> Result<StationaryPhase> {
    let analysis = find_stationary_point(phase, cutoff.center)?;
    let p = analysis.point;
    let factor = C64::from_polar(2.0 * PI / (analysis.det.abs().sqrt() * lambda), FRAC_PI_4 * analysis.signature as f64 + lambda * analysis.value);
    let leading = factor * amplitude(p) * cutoff.eval(p);
    Ok(StationaryPhase { analysis, leading })
}

/// Grids above this many points are refused.
pub const MAX_GRID_POINTS: u64 = 4_000_000_000;
/// Minimum oscillation sampling of the brute-force grid.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 40.0;
const MIN_AXIS_POINTS: usize = 256;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BruteForce {
    pub value: C64,
    pub spacing: f64,
    pub axis_points: usize,
}

/// Tensor-grid trapezoid over the cutoff's bounding square.
///
/// The spacing gives at least `points_per_wavelength` samples per period of `e^{iλψ}` along each
/// axis, using the largest partial derivative of `ψ` on a 65×65 survey of the support.
pub fn brute_force_2d(
    phase: &dyn Phase2D,
    amplitude: &(dyn Fn(Point) -> C64 + Sync),
    cutoff: &Cutoff,
    lambda: f64,
    points_per_wavelength: f64,
) -> Result<BruteForce> {
    if points_per_wavelength < MIN_POINTS_PER_WAVELENGTH {
        return Err(Error::Domain(format!("at least {MIN_POINTS_PER_WAVELENGTH} points per wavelength required")));
    }
    let r = cutoff.outer;
    let [cx, cy] = cutoff.center;
    let survey = 64;
    let mut gmax: f64 = 0.0;
    for i in 0..=survey {
        for j in 0..=survey {
            let p = [cx - r + 2.0 * r * i as f64 / survey as f64, cy - r + 2.0 * r * j as f64 / survey as f64];
            if cutoff.eval(p) > 0.0 {
                let g = phase.gradient(p);
                gmax = gmax.max(g[0].abs()).max(g[1].abs());
            }
        }
    }
    let mut n = MIN_AXIS_POINTS;
    if lambda * gmax > 0.0 {
        let h = 2.0 * PI / (lambda.abs() * gmax * points_per_wavelength);
        n = n.max((2.0 * r / h).ceil() as usize);
    }
    let total = (n as u64 + 1).pow(2);
    if total > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge(total));
    }
    let h = 2.0 * r / n as f64;
    let row = |i: usize| -> C64 {
        let y = cy - r + i as f64 * h;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..=n {
            let p = [cx - r + j as f64 * h, y];
            let c = cutoff.eval(p);
            if c > 0.0 {
                acc += amplitude(p) * c * C64::from_polar(1.0, lambda * phase.value(p));
            }
        }
        acc
    };
    let rows: Vec<C64> = (0..=n).into_par_iter().map(row).collect();
    let value = rows.iter().sum::<C64>() * (h * h);
    Ok(BruteForce { value, spacing: h, axis_points: n + 1 })
}

#[derive(Clone, Debug, Serialize)]
pub struct CubicPhaseData {
    pub j: u8,
    pub xi: f64,
    pub point: Point,
    pub value: f64,
    pub det: f64,
    pub signature: i32,
}

/// Closed-form stationary data of `φ_j(ξ,·,·)`.
pub fn cubic_phase_data(j: u8, xi: f64) -> Result<CubicPhaseData> {
    let b = bracket(xi);
    let b3 = bracket(xi / 3.0);
    let (point, value, det, signature) = match j {
        1 => ([xi / 3.0, xi / 3.0], -b + 3.0 * b3, 3.0 * b3.powi(-6), 2),
        2 => ([-xi, xi], 0.0, -b.powi(-6), 0),
        3 => ([xi, xi], -2.0 * b, -b.powi(-6), 0),
        4 => ([xi / 3.0, xi / 3.0], -b - 3.0 * b3, 3.0 * b3.powi(-6), -2),
        _ => return Err(Error::Domain(format!("cubic phase index {j} not in 1..=4"))),
    };
    Ok(CubicPhaseData { j, xi, point, value, det, signature })
}

/// Newton stationary data of `φ_j(ξ,·,·)` started at `start`.
pub fn cubic_phase_newton(j: u8, xi: f64, start: Point) -> Result<CubicPhaseData> {
    let a = find_stationary_point(&CubicPhase::new(j, xi)?, start)?;
    Ok(CubicPhaseData { j, xi, point: a.point, value: a.value, det: a.det, signature: a.signature })
}

/// `(ψ, ∂_ξψ, ∂²_ξψ)` for `ψ(s,ξ;t,x) = xξ + (t−s)⟨ξ⟩ + 2s`.
pub fn vmod_phase(s: f64, xi: f64, t: f64, x: f64) -> (f64, f64, f64) {
    let b = bracket(xi);
    (x * xi + (t - s) * b + 2.0 * s, x + (t - s) * xi / b, (t - s) / b.powi(3))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RayPhase {
    pub phi: f64,
    /// `|φ − t/2|`
    pub deviation: f64,
    /// `|φ − t/2|·t/s²`, zero at `s = 0`.
    pub constant: f64,
}

/// `φ(s;t) = ((t−s)² − ¾t²)^{1/2} + 2s` on the ray `x = (√3/2)t`.
pub fn ray_phase_taylor(t: f64, s: f64) -> Result<RayPhase> {
    let limit = t - 3f64.sqrt() / 2.0 * t;
    if !(s >= 0.0 && s < limit) {
        return Err(Error::Domain(format!("s = {s} outside [0, {limit})")));
    }
    let tau = t - s;
    let phi = (tau * tau - 0.75 * t * t).sqrt() + 2.0 * s;
    let deviation = (phi - 0.5 * t).abs();
    let constant = if s > 0.0 { deviation * t / (s * s) } else { 0.0 };
    Ok(RayPhase { phi, deviation, constant })
}
