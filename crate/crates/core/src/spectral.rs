//! Periodic pseudospectral representation of functions on the line.
//!
//! Coefficients use the continuous normalization
//! `f̂(ξ) = (2π)^{-1/2} ∫ e^{-ixξ} f(x) dx`, stored in FFT order.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::real::Real;

/// Half-width of the band `|2 − ⟨ξ⟩| < GUARD_BAND` around the resonant frequencies.
pub const GUARD_BAND: f64 = 1e-3;
/// Smallest admissible Nyquist frequency.
pub const MIN_NYQUIST: f64 = 8.0;
/// Smallest admissible number of nodes.
pub const MIN_POINTS: usize = 256;
/// Relative boundary magnitude above which `ft_at` warns.
pub const DECAY_THRESHOLD: f64 = 1e-10;

/// `⟨ξ⟩ = (1 + ξ²)^{1/2}`.
#[inline]
pub fn bracket<T: Real>(xi: T) -> T {
    (T::one() + xi * xi).sqrt()
}

pub struct Grid<T: Real> {
    half_length: T,
    n: usize,
    dx: T,
    nodes: Vec<T>,
    freqs: Vec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.half_length)
            .field("n", &self.n)
            .field("dx", &self.dx)
            .finish()
    }
}

impl<T: Real> Grid<T> {
    /// Grid on `[-L, L)` with `n` nodes, checked for resolution of the resonant frequencies.
    pub fn new(half_length: T, n: usize) -> Result<Arc<Self>> {
        if n < MIN_POINTS {
            return Err(Error::Grid(format!("need at least {MIN_POINTS} nodes, got {n}")));
        }
        let g = Self::coarse(half_length, n)?;
        if g.nyquist().as_f64() < MIN_NYQUIST - 1e-12 {
            return Err(Error::Grid(format!(
                "Nyquist frequency {:.4} below {MIN_NYQUIST}: resonant frequencies under-resolved",
                g.nyquist()
            )));
        }
        Ok(g)
    }

    /// Grid without the resolution requirements, for small algebraic checks.
    pub fn coarse(half_length: T, n: usize) -> Result<Arc<Self>> {
        if !(half_length > T::zero()) || !half_length.is_finite() {
            return Err(Error::Grid(format!("half length must be positive, got {half_length}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("node count must be a power of two, got {n}")));
        }
        let nt = T::from_usize(n).unwrap();
        let dx = T::lit(2.0) * half_length / nt;
        let nodes = (0..n).map(|j| -half_length + T::from_usize(j).unwrap() * dx).collect();
        let dxi = T::PI() / half_length;
        let freqs = (0..n).map(|i| T::from_i64(wavenumber(i, n)).unwrap() * dxi).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid { half_length, n, dx, nodes, freqs, fwd, inv }))
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Lattice spacing `π/L` in frequency.
    pub fn dxi(&self) -> T {
        T::PI() / self.half_length
    }

    pub fn nyquist(&self) -> T {
        T::PI() * T::from_usize(self.n).unwrap() / (T::lit(2.0) * self.half_length)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Frequencies in FFT storage order.
    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    /// Index of the node `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// FFT-order index of the lattice frequency closest to `xi`.
    pub fn nearest_freq_index(&self, xi: T) -> usize {
        let half = (self.n / 2) as i64;
        let k = (xi / self.dxi()).round().to_i64().unwrap_or(0).clamp(-half, half - 1);
        k.rem_euclid(self.n as i64) as usize
    }

    /// FFT-order indices sorted by increasing frequency.
    pub fn sorted_indices(&self) -> impl Iterator<Item = usize> {
        let n = self.n;
        (n / 2..n).chain(0..n / 2)
    }

    /// True when both grids discretize the same interval with the same node count.
    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }

    pub(crate) fn forward(&self, buf: &mut [Complex<T>]) {
        self.fwd.process(buf);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex<T>]) {
        self.inv.process(buf);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())
    }

    pub(crate) fn forward_with_scratch(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.fwd.process_with_scratch(buf, scratch);
    }

    pub(crate) fn inverse_with_scratch(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.inv.process_with_scratch(buf, scratch);
    }
}

/// Signed wavenumber of FFT index `i`.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Checked constructor matching the grid contract.
pub fn make_grid<T: Real>(half_length: T, n: usize) -> Result<Arc<Grid<T>>> {
    Grid::new(half_length, n)
}

fn check_same<T: Real>(a: &Grid<T>, b: &Grid<T>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Complex samples at the grid nodes.
#[derive(Clone, Debug)]
pub struct Field<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<Complex<T>>,
    real: bool,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Field { grid: grid.clone(), values: vec![Complex::new(T::zero(), T::zero()); grid.len()], real: true }
    }

    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Field { grid: grid.clone(), values, real: false }
    }

    pub fn from_real_fn(grid: &Arc<Grid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().iter().map(|&x| Complex::new(f(x), T::zero())).collect();
        Field { grid: grid.clone(), values, real: true }
    }

    pub fn from_values(grid: &Arc<Grid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Field { grid: grid.clone(), values, real: false })
    }

    pub fn from_real_values(grid: &Arc<Grid<T>>, values: &[T]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let values = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        Ok(Field { grid: grid.clone(), values, real: true })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Whether the field carries the "real" tag.
    pub fn is_tagged_real(&self) -> bool {
        self.real
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn imaginary_ratio(&self) -> T {
        let sup = self.sup_norm();
        if sup == T::zero() {
            return T::zero();
        }
        self.values.iter().map(|z| z.im.abs()).fold(T::zero(), T::max) / sup
    }

    /// Tag the field as real after checking its imaginary parts against `tol` (relative).
    pub fn into_real(mut self, tol: T) -> Result<Self> {
        let ratio = self.imaginary_ratio();
        if ratio > tol {
            return Err(Error::NotReal(ratio.as_f64()));
        }
        for z in &mut self.values {
            z.im = T::zero();
        }
        self.real = true;
        Ok(self)
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(T, Complex<T>) -> Complex<T>) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&x, &z)| f(x, z)).collect();
        Field { grid: self.grid.clone(), values, real: false }
    }

    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|z| z.conj()).collect();
        Field { grid: self.grid.clone(), values, real: self.real }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let values = self.values.iter().map(|&z| z * c).collect();
        Field { grid: self.grid.clone(), values, real: self.real && c.im == T::zero() }
    }

    pub fn add(&self, other: &Field<T>) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Ok(Field { grid: self.grid.clone(), values, real: self.real && other.real })
    }

    pub fn sub(&self, other: &Field<T>) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Field { grid: self.grid.clone(), values, real: self.real && other.real })
    }

    pub fn mul(&self, other: &Field<T>) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect();
        Ok(Field { grid: self.grid.clone(), values, real: self.real && other.real })
    }

    /// `‖f‖_{L²}` by the trapezoidal rule.
    pub fn norm_l2(&self) -> T {
        (self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<T>()).sqrt()
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// `∫ f dx` by the trapezoidal rule.
    pub fn integral(&self) -> Complex<T> {
        let s: Complex<T> = self.values.iter().fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b);
        s * self.grid.dx()
    }

    /// Largest modulus at the two boundary nodes.
    pub fn boundary_magnitude(&self) -> T {
        self.values[0].norm().max(self.values[self.values.len() - 1].norm())
    }

    pub fn at_origin(&self) -> Complex<T> {
        self.values[self.grid.origin_index()]
    }

    /// Four-point cubic Lagrange interpolation at `x` (periodic wrap).
    pub fn interpolate(&self, x: T) -> Complex<T> {
        cubic_interpolate(&self.values, (x + self.grid.half_length()) / self.grid.dx())
    }
}

/// Cubic Lagrange interpolation of periodic samples at fractional index `s`.
pub fn cubic_interpolate<T: Real>(values: &[Complex<T>], s: T) -> Complex<T> {
    let n = values.len() as i64;
    let j = s.floor();
    let u = s - j;
    let j = j.to_i64().unwrap_or(0);
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let w = [
        -u * (u - one) * (u - two) / six,
        (u + one) * (u - one) * (u - two) / two,
        -(u + one) * u * (u - two) / two,
        (u + one) * u * (u - one) / six,
    ];
    let mut acc = Complex::new(T::zero(), T::zero());
    for (m, wm) in w.iter().enumerate() {
        let idx = (j - 1 + m as i64).rem_euclid(n) as usize;
        acc = acc + values[idx] * *wm;
    }
    acc
}

/// Continuous-normalized Fourier coefficients on the frequency lattice, FFT order.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    grid: Arc<Grid<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Spectrum { grid: grid.clone(), coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(T) -> Complex<T>) -> Self {
        let coeffs = grid.freqs().iter().map(|&xi| f(xi)).collect();
        Spectrum { grid: grid.clone(), coeffs }
    }

    pub fn from_coeffs(grid: &Arc<Grid<T>>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Spectrum { grid: grid.clone(), coeffs })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Pointwise product with a function of the frequency.
    pub fn map(&self, f: impl Fn(T, Complex<T>) -> Complex<T>) -> Self {
        let coeffs = self.grid.freqs().iter().zip(&self.coeffs).map(|(&xi, &c)| f(xi, c)).collect();
        Spectrum { grid: self.grid.clone(), coeffs }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|_, z| z * c)
    }

    pub fn add(&self, other: &Spectrum<T>) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect();
        Ok(Spectrum { grid: self.grid.clone(), coeffs })
    }

    pub fn sub(&self, other: &Spectrum<T>) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect();
        Ok(Spectrum { grid: self.grid.clone(), coeffs })
    }

    /// `‖f̂‖_{L²}` as a Riemann sum over the lattice.
    pub fn norm_l2(&self) -> T {
        (self.grid.dxi() * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<T>()).sqrt()
    }

    pub fn sup_norm(&self) -> T {
        self.coeffs.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Linear interpolation between lattice frequencies.
    pub fn value_at(&self, xi: T) -> Complex<T> {
        let n = self.grid.len() as i64;
        let s = xi / self.grid.dxi();
        let k = s.floor();
        let u = s - k;
        let k = k.to_i64().unwrap_or(0);
        let half = n / 2;
        let fetch = |k: i64| {
            if k < -half || k >= half {
                Complex::new(T::zero(), T::zero())
            } else {
                self.coeffs[k.rem_euclid(n) as usize]
            }
        };
        fetch(k) * (T::one() - u) + fetch(k + 1) * u
    }

    /// `(ξ, f̂(ξ))` pairs in increasing frequency.
    pub fn sorted(&self) -> Vec<(T, Complex<T>)> {
        self.grid.sorted_indices().map(|i| (self.grid.freqs()[i], self.coeffs[i])).collect()
    }
}

fn node_phase<T: Real>(i: usize) -> T {
    if i % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Lattice Fourier transform with the continuous normalization and the `e^{iLξ_k}` node offset.
pub fn to_spectrum<T: Real>(f: &Field<T>) -> Spectrum<T> {
    let grid = f.grid();
    let mut buf = f.values().to_vec();
    grid.forward(&mut buf);
    let pre = grid.dx() / (T::lit(2.0) * T::PI()).sqrt();
    for (i, z) in buf.iter_mut().enumerate() {
        *z = *z * (pre * node_phase::<T>(i));
    }
    Spectrum { grid: grid.clone(), coeffs: buf }
}

/// Inverse of [`to_spectrum`].
pub fn from_spectrum<T: Real>(s: &Spectrum<T>) -> Field<T> {
    let grid = s.grid();
    let mut buf = s.coeffs().to_vec();
    let pre = (T::lit(2.0) * T::PI()).sqrt() / (grid.dx() * T::from_usize(grid.len()).unwrap());
    for (i, z) in buf.iter_mut().enumerate() {
        *z = *z * (pre * node_phase::<T>(i));
    }
    grid.inverse(&mut buf);
    Field { grid: grid.clone(), values: buf, real: false }
}

/// Fourier multipliers of the half-wave calculus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier<T> {
    /// `⟨ξ⟩^s`
    BracketPow(T),
    /// `iξ`
    Derivative,
    /// `e^{it⟨ξ⟩}`
    Propagator(T),
    /// `(2 − ⟨ξ⟩)^{-1}`, guarded near `ξ = ±√3`; the payload is the cancellation tolerance
    /// relative to the largest coefficient.
    InvTwoMinusBracket(T),
    /// `(2 + ⟨ξ⟩)^{-1}`
    InvTwoPlusBracket,
    /// `(⟨ξ⟩ − 1)/⟨ξ⟩`
    BracketMinusOneOverBracket,
    /// `ξ/⟨ξ⟩`
    XiOverBracket,
}

impl<T: Real> Multiplier<T> {
    /// Symbol value at `xi`; the guarded symbol returns zero inside the band.
    pub fn symbol(&self, xi: T) -> Complex<T> {
        let b = bracket(xi);
        let re = |v: T| Complex::new(v, T::zero());
        match *self {
            Multiplier::BracketPow(s) => re(b.powf(s)),
            Multiplier::Derivative => Complex::new(T::zero(), xi),
            Multiplier::Propagator(t) => Complex::from_polar(T::one(), t * b),
            Multiplier::InvTwoMinusBracket(_) => {
                let d = T::lit(2.0) - b;
                if d.abs() < T::lit(GUARD_BAND) {
                    re(T::zero())
                } else {
                    re(d.recip())
                }
            }
            Multiplier::InvTwoPlusBracket => re((T::lit(2.0) + b).recip()),
            Multiplier::BracketMinusOneOverBracket => re((b - T::one()) / b),
            Multiplier::XiOverBracket => re(xi / b),
        }
    }
}

/// Pointwise multiplication by `m(ξ_k)`.
pub fn apply_multiplier<T: Real>(s: &Spectrum<T>, m: Multiplier<T>) -> Result<Spectrum<T>> {
    if let Multiplier::InvTwoMinusBracket(tol) = m {
        let limit = tol * s.sup_norm();
        for (&xi, c) in s.grid().freqs().iter().zip(s.coeffs()) {
            let in_band = (T::lit(2.0) - bracket(xi)).abs() < T::lit(GUARD_BAND);
            if in_band && c.norm() > limit {
                return Err(Error::Resonance { xi: xi.as_f64(), magnitude: c.norm().as_f64() });
            }
        }
    }
    Ok(s.map(|xi, c| c * m.symbol(xi)))
}

/// Apply a multiplier in physical space (transform, multiply, invert).
pub fn apply_to_field<T: Real>(f: &Field<T>, m: Multiplier<T>) -> Result<Field<T>> {
    Ok(from_spectrum(&apply_multiplier(&to_spectrum(f), m)?))
}

/// Trapezoidal evaluation of `f̂(ξ₀)` at an arbitrary frequency.
pub fn ft_at<T: Real>(f: &Field<T>, xi0: T) -> Complex<T> {
    let sup = f.sup_norm();
    if sup > T::zero() && f.boundary_magnitude() > T::lit(DECAY_THRESHOLD) * sup {
        log::warn!(
            "ft_at: boundary magnitude {:e} exceeds the decay threshold",
            (f.boundary_magnitude() / sup).as_f64()
        );
    }
    let grid = f.grid();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (&x, &v) in grid.nodes().iter().zip(f.values()) {
        acc = acc + v * Complex::from_polar(T::one(), -xi0 * x);
    }
    acc * (grid.dx() / (T::lit(2.0) * T::PI()).sqrt())
}

/// Leading term `t^{-1/2} e^{iπ/4} e^{iρ} ⟨x/ρ⟩^{3/2} f̂₀(−x/ρ) θ(x/t)` with `f̂₀` supplied.
pub fn free_wave_leading<T: Real>(t: T, x: T, fhat: impl Fn(T) -> Complex<T>) -> Complex<T> {
    if x.abs() >= t {
        return Complex::new(T::zero(), T::zero());
    }
    let rho = (t * t - x * x).sqrt();
    let z = x / rho;
    let amp = bracket(z).powf(T::lit(1.5)) / t.sqrt();
    Complex::from_polar(amp, T::FRAC_PI_4() + rho) * fhat(-z)
}

/// Leading asymptotic term of `e^{it⟨∇⟩} f₀` at `(t, x)`.
pub fn free_wave_asymptotic<T: Real>(f0: &Field<T>, t: T, x: T) -> Complex<T> {
    free_wave_leading(t, x, |xi| ft_at(f0, xi))
}

/// `L v = ⟨∇⟩(x v) − i t ∂_x v`, computed spectrally.
pub fn l_operator<T: Real>(v: &Field<T>, t: T) -> Field<T> {
    from_spectrum(&l_operator_spectrum(v, t))
}

/// Spectrum of `L v`.
pub fn l_operator_spectrum<T: Real>(v: &Field<T>, t: T) -> Spectrum<T> {
    let xv = v.map(|x, z| z * x);
    let a = to_spectrum(&xv);
    let b = to_spectrum(v);
    let coeffs = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .zip(v.grid().freqs())
        .map(|((&p, &q), &xi)| p * bracket(xi) + q * (t * xi))
        .collect();
    Spectrum { grid: v.grid().clone(), coeffs }
}

/// Spectral derivative `∂_x f`.
pub fn derivative<T: Real>(f: &Field<T>) -> Field<T> {
    from_spectrum(&to_spectrum(f).map(|xi, c| c * Complex::new(T::zero(), xi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn grid() -> Arc<Grid<f64>> {
        Grid::new(100.0, 2048).unwrap()
    }

    #[test]
    fn grid_arithmetic() {
        let g = grid();
        assert_relative_eq!(g.dx(), 0.09765625, epsilon = 1e-12);
        assert_relative_eq!(g.nyquist(), 32.17, epsilon = 5e-3);
        let g = Grid::<f64>::new(50.0, 256).unwrap();
        assert_relative_eq!(g.nyquist(), 2.56 * std::f64::consts::PI, epsilon = 1e-12);
        assert!(Grid::<f64>::new(100.0, 100).is_err());
        assert!(Grid::<f64>::new(-1.0, 1024).is_err());
        assert!(Grid::<f64>::new(400.0, 512).is_err());
    }

    #[test]
    fn nodes_and_frequencies() {
        let g = grid();
        assert_eq!(g.nodes()[0], -100.0);
        assert_eq!(g.nodes()[g.origin_index()], 0.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        let sorted: Vec<f64> = g.sorted_indices().map(|i| g.freqs()[i]).collect();
        assert!(sorted.windows(2).all(|w| (w[1] - w[0] - g.dxi()).abs() < 1e-12));
        assert_relative_eq!(sorted[0], -g.nyquist(), epsilon = 1e-12);
        let k = g.nearest_freq_index(3f64.sqrt());
        assert!((g.freqs()[k] - 3f64.sqrt()).abs() <= 0.5 * g.dxi());
    }

    #[test]
    fn gaussian_transforms() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let s = to_spectrum(&f);
        for (&xi, c) in g.freqs().iter().zip(s.coeffs()) {
            assert!((c - Complex64::new((-xi * xi / 2.0).exp(), 0.0)).norm() <= 1e-10);
        }
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        let s = to_spectrum(&f);
        for (&xi, c) in g.freqs().iter().zip(s.coeffs()) {
            let exact = (-xi * xi / 4.0).exp() / 2f64.sqrt();
            assert!((c - Complex64::new(exact, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn shifted_gaussian_phase() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-(x - 3.0) * (x - 3.0) / 2.0).exp());
        let s = to_spectrum(&f);
        for (&xi, c) in g.freqs().iter().zip(s.coeffs()).step_by(37) {
            let exact = Complex64::from_polar((-xi * xi / 2.0).exp(), -3.0 * xi);
            assert!((c - exact).norm() <= 1e-10);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = grid();
        let f = Field::from_fn(&g, |x| Complex64::new((-x * x / 8.0).exp() * x.cos(), (-x * x / 3.0).exp()));
        let s = to_spectrum(&f);
        let back = from_spectrum(&s);
        let err = back.sub(&f).unwrap().sup_norm() / f.sup_norm();
        assert!(err <= 1e-12);
        assert_relative_eq!(f.norm_l2(), s.norm_l2(), max_relative = 1e-10);
    }

    #[test]
    fn real_fields_have_hermitian_spectra() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-(x - 1.0) * (x - 1.0)).exp() * (2.0 * x).sin());
        let s = to_spectrum(&f);
        let n = g.len();
        for i in 1..n {
            let j = n - i;
            assert!((s.coeffs()[i] - s.coeffs()[j].conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn multiplier_values() {
        let m = Multiplier::BracketPow(1.0);
        assert_eq!(m.symbol(0.0), Complex64::new(1.0, 0.0));
        assert_relative_eq!(m.symbol(3f64.sqrt()).re, 2.0, epsilon = 1e-15);
        let p = Multiplier::Propagator(0.0);
        assert_eq!(p.symbol(1.7), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn multiplier_composition_and_group() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let s = to_spectrum(&f);
        let a = apply_multiplier(&s, Multiplier::BracketPow(1.7)).unwrap();
        let b = apply_multiplier(&a, Multiplier::BracketPow(-1.7)).unwrap();
        assert!(b.sub(&s).unwrap().sup_norm() <= 1e-12);
        let p1 = apply_multiplier(&s, Multiplier::Propagator(3.0)).unwrap();
        let p12 = apply_multiplier(&p1, Multiplier::Propagator(4.5)).unwrap();
        let p = apply_multiplier(&s, Multiplier::Propagator(7.5)).unwrap();
        assert!(p12.sub(&p).unwrap().sup_norm() <= 1e-10);
        assert_relative_eq!(p.norm_l2(), s.norm_l2(), max_relative = 1e-14);
    }

    #[test]
    fn guarded_symbol_rejects_resonant_content() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let s = to_spectrum(&f);
        let g2 = Grid::<f64>::new(std::f64::consts::PI / 3f64.sqrt() * 128.0, 4096).unwrap();
        let k = g2.nearest_freq_index(3f64.sqrt());
        assert!((2.0 - bracket(g2.freqs()[k])).abs() < GUARD_BAND);
        let f2 = Field::from_real_fn(&g2, |x| (-x * x / 2.0).exp());
        let r = apply_multiplier(&to_spectrum(&f2), Multiplier::InvTwoMinusBracket(1e-8));
        assert!(matches!(r, Err(Error::Resonance { .. })));
        assert!(apply_multiplier(&s, Multiplier::InvTwoMinusBracket(1e-8)).is_ok());
    }

    #[test]
    fn ft_at_gaussian() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let r = ft_at(&f, 3f64.sqrt());
        assert_relative_eq!(r.re, (-1.5f64).exp(), epsilon = 1e-12);
        assert_relative_eq!((-1.5f64).exp(), 0.223130, epsilon = 1e-6);
        let h = Field::from_real_fn(&g, |x| x * (-x * x / 2.0).exp() + (-(x - 1.0).powi(2)).exp());
        let p = ft_at(&h, 3f64.sqrt());
        let m = ft_at(&h, -(3f64.sqrt()));
        assert!((p - m.conj()).norm() < 1e-14);
        let odd = Field::from_real_fn(&g, |x| x * (-x * x / 2.0).exp());
        assert!(ft_at(&odd, 0.0).norm() < 1e-14);
    }

    #[test]
    fn free_wave_special_points() {
        let g = grid();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        assert_eq!(free_wave_asymptotic(&f, 10.0, 10.0), Complex64::new(0.0, 0.0));
        assert_eq!(free_wave_asymptotic(&f, 10.0, -12.0), Complex64::new(0.0, 0.0));
        let t = 50.0;
        let at0 = free_wave_asymptotic(&f, t, 0.0);
        let expect = Complex64::from_polar(t.powf(-0.5), std::f64::consts::FRAC_PI_4 + t);
        assert!((at0 - expect).norm() < 1e-12);
        let x = 3f64.sqrt() / 2.0 * t;
        let ray = free_wave_asymptotic(&f, t, x);
        let expect = Complex64::from_polar(t.powf(-0.5) * 2f64.powf(1.5) * (-1.5f64).exp(), std::f64::consts::FRAC_PI_4 + t / 2.0);
        assert!((ray - expect).norm() < 1e-12);
    }

    #[test]
    fn l_operator_at_time_zero() {
        let g = grid();
        let v = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let l = l_operator(&v, 0.0);
        let xv = v.map(|x, z| z * x);
        let expect = apply_to_field(&xv, Multiplier::BracketPow(1.0)).unwrap();
        assert!(l.sub(&expect).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn cubic_interpolation_is_fourth_order() {
        let err = |n: usize| {
            let g = Grid::<f64>::coarse(10.0, n).unwrap();
            let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
            (0..50)
                .map(|i| {
                    let x = -3.0 + 0.1237 * i as f64;
                    (f.interpolate(x).re - (-x * x / 2.0).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(128) / err(256);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn single_precision_round_trip() {
        let g = Grid::<f32>::new(50.0, 512).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let s = to_spectrum(&f);
        assert!((s.coeffs()[0].re - 1.0).abs() < 1e-5);
        let back = from_spectrum(&s);
        assert!(back.sub(&f).unwrap().sup_norm() < 1e-5);
    }
}
