//! Interaction-picture integration of `(∂_t − i⟨∇⟩)v = (1/2i)⟨∇⟩^{-1}(αu² + β₀u³ + βu³)`, `u = v + v̄`.

mod config;
mod trajectory;

use std::sync::Arc;

pub use config::{default_rays, BLOWUP_THRESHOLD, ENERGY_ABORT, CoefficientSpec, DataSpec, SimConfig};
pub use trajectory::{BilinearRecord, Checkpoint, ProbeSeries, SeriesRecord, Trajectory};

use crate::coefficients::{deresonate, gaussian_window, make_profile, sample_profile, Coefficient};
use crate::error::{Error, Result};
use crate::spectral::{apply_multiplier, bracket, from_spectrum, to_spectrum, wavenumber};
use crate::{Field, Grid, Multiplier, Spectrum, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Coefficients of the nonlinearity.
#[derive(Clone, Debug)]
pub struct Model {
    pub alpha: Coefficient,
    pub beta: Coefficient,
    pub beta0: f64,
    pub dealias: bool,
}

impl Model {
    pub fn linear(grid: &Arc<Grid>) -> Self {
        Model { alpha: Coefficient::zero(grid), beta: Coefficient::zero(grid), beta0: 0.0, dealias: true }
    }

    pub fn from_config(cfg: &SimConfig, grid: &Arc<Grid>) -> Result<Self> {
        let build = |spec: &CoefficientSpec| -> Result<Coefficient> {
            let c = make_profile(&spec.profile, grid)?;
            match spec.deresonate_window {
                Some(sigma) => deresonate(&c, &gaussian_window(grid, sigma)),
                None => Ok(c),
            }
        };
        Ok(Model { alpha: build(&cfg.alpha)?, beta: build(&cfg.beta)?, beta0: cfg.beta0, dealias: cfg.dealias })
    }

    pub fn is_linear(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero() && self.beta0 == 0.0
    }
}

/// Time and profile `f = e^{-it⟨∇⟩} v`.
#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub profile: Spectrum,
}

impl SimState {
    pub fn new(t: f64, profile: Spectrum) -> Self {
        SimState { t, profile }
    }

    /// State at time `t` whose solution is `v`.
    pub fn from_solution(t: f64, v: &Field) -> Self {
        let profile = to_spectrum(v).map(|xi, c| c * C64::from_polar(1.0, -t * bracket(xi)));
        SimState { t, profile }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.profile.grid()
    }

    pub fn solution_spectrum(&self) -> Spectrum {
        let t = self.t;
        self.profile.map(|xi, c| c * C64::from_polar(1.0, t * bracket(xi)))
    }

    pub fn solution(&self) -> Field {
        from_spectrum(&self.solution_spectrum())
    }

    /// `u = v + v̄`.
    pub fn reconstruct_u(&self) -> Field {
        let v = self.solution();
        v.map(|_, z| C64::new(2.0 * z.re, 0.0))
    }

    /// `u_t = −2⟨∇⟩ Im v`.
    pub fn velocity(&self) -> Field {
        let v = self.solution();
        let im = v.map(|_, z| C64::new(z.im, 0.0));
        from_spectrum(&to_spectrum(&im).map(|xi, c| c * (-2.0 * bracket(xi))))
    }
}

/// `v₀ = ½(u₀ − i⟨∇⟩^{-1}u₁)`.
pub fn make_initial_data(u0: &Field, u1: &Field) -> Result<Field> {
    for f in [u0, u1] {
        let r = f.imaginary_ratio();
        if r > 1e-12 {
            return Err(Error::NotReal(r));
        }
    }
    let w = from_spectrum(&apply_multiplier(&to_spectrum(u1), Multiplier::BracketPow(-1.0))?);
    let v0 = u0.values().iter().zip(w.values()).map(|(a, b)| 0.5 * (C64::new(a.re, 0.0) - I * b.re)).collect();
    Field::from_values(u0.grid(), v0)
}

/// Initial data `ε·(u₀, u₁)` from the configuration.
pub fn initial_data(cfg: &SimConfig, grid: &Arc<Grid>) -> Result<Field> {
    let u0 = sample_profile(&cfg.data.u0, grid)?.scale(C64::new(cfg.epsilon, 0.0));
    let u1 = sample_profile(&cfg.data.u1, grid)?.scale(C64::new(cfg.epsilon, 0.0));
    make_initial_data(&u0, &u1)
}

/// 2/3-rule mask in FFT order (all ones when `on` is false).
pub fn dealias_mask(grid: &Grid, on: bool) -> Vec<f64> {
    let n = grid.len();
    (0..n).map(|i| if !on || 3 * wavenumber(i, n).unsigned_abs() as usize <= n { 1.0 } else { 0.0 }).collect()
}

/// Workspace for the right-hand side evaluation; owned by a single run.
struct Engine {
    grid: Arc<Grid>,
    alpha: Vec<f64>,
    cubic: Vec<f64>,
    bracket: Vec<f64>,
    mask: Vec<f64>,
    phys_scale: Vec<f64>,
    spec_scale: Vec<f64>,
    nl_scale: Vec<f64>,
    blowup: f64,
    v_hat: Vec<C64>,
    v: Vec<C64>,
    n_hat: Vec<C64>,
    work: Vec<C64>,
    scratch: Vec<C64>,
}

impl Engine {
    fn new(grid: &Arc<Grid>, model: &Model, blowup: f64) -> Self {
        let n = grid.len();
        let alpha = model.alpha.samples();
        let cubic = model.beta.samples().iter().map(|b| b + model.beta0).collect();
        let bracket: Vec<f64> = grid.freqs().iter().map(|&xi| bracket(xi)).collect();
        let mask = dealias_mask(grid, model.dealias);
        let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        let two_pi_sqrt = (2.0 * std::f64::consts::PI).sqrt();
        let to_phys = two_pi_sqrt / (grid.dx() * n as f64);
        let to_spec = grid.dx() / two_pi_sqrt;
        let phys_scale = (0..n).map(|i| sign(i) * to_phys).collect();
        let spec_scale: Vec<f64> = (0..n).map(|i| sign(i) * to_spec).collect();
        let nl_scale = (0..n).map(|i| 0.5 * spec_scale[i] * mask[i] / bracket[i]).collect();
        let zero = vec![C64::new(0.0, 0.0); n];
        Engine {
            grid: grid.clone(),
            alpha,
            cubic,
            bracket,
            mask,
            phys_scale,
            spec_scale,
            nl_scale,
            blowup,
            v_hat: zero.clone(),
            v: zero.clone(),
            n_hat: zero.clone(),
            work: zero,
            scratch: vec![C64::new(0.0, 0.0); grid.scratch_len()],
        }
    }

    fn phases(&self, t: f64, out: &mut [C64]) {
        for (e, &b) in out.iter_mut().zip(&self.bracket) {
            *e = C64::from_polar(1.0, t * b);
        }
    }

    /// `k = e^{-iτ⟨ξ⟩} N̂(e^{iτ⟨ξ⟩} g)`; leaves `v̂`, `v`, `N̂` of the stage in the buffers.
    fn stage(&mut self, t: f64, e: &[C64], g: &[C64], k: &mut [C64]) -> Result<()> {
        for i in 0..g.len() {
            let vh = e[i] * g[i] * self.mask[i];
            self.v_hat[i] = vh;
            self.v[i] = vh * self.phys_scale[i];
        }
        self.grid.inverse_with_scratch(&mut self.v, &mut self.scratch);
        let sup2 = self.v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        if sup2 > self.blowup * self.blowup {
            return Err(Error::BlowUp { t, sup: sup2.sqrt() });
        }
        for i in 0..g.len() {
            let u = 2.0 * self.v[i].re;
            self.work[i] = C64::new(u * u * (self.alpha[i] + self.cubic[i] * u), 0.0);
        }
        self.grid.forward_with_scratch(&mut self.work, &mut self.scratch);
        for i in 0..g.len() {
            let nh = self.work[i] * C64::new(0.0, -self.nl_scale[i]);
            self.n_hat[i] = nh;
            k[i] = e[i].conj() * nh;
        }
        Ok(())
    }

    /// `∂_t v − i v = i(⟨∇⟩ − 1)v + N` in physical space, from the last stage buffers.
    fn shifted_derivative(&mut self, out: &mut [C64]) {
        for i in 0..out.len() {
            out[i] = (I * (self.bracket[i] - 1.0) * self.v_hat[i] + self.n_hat[i]) * self.phys_scale[i];
        }
        self.grid.inverse_with_scratch(out, &mut self.scratch);
    }

    fn energy(&self, dv: &[C64], vx: &[C64]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.v.len() {
            let u = 2.0 * self.v[i].re;
            let ut = 2.0 * dv[i].re - 2.0 * self.v[i].im;
            let ux = 2.0 * vx[i].re;
            e += 0.5 * (ut * ut + ux * ux + u * u) - self.alpha[i] * u * u * u / 3.0 - 0.25 * self.cubic[i] * u * u * u * u;
        }
        e * self.grid.dx()
    }

    fn derivative_field(&mut self, out: &mut [C64]) {
        let freqs = self.grid.freqs();
        for i in 0..out.len() {
            out[i] = I * freqs[i] * self.v_hat[i] * self.phys_scale[i];
        }
        self.grid.inverse_with_scratch(out, &mut self.scratch);
    }

    fn l_norm(&mut self, t: f64, buf: &mut [C64]) -> f64 {
        let nodes = self.grid.nodes();
        for i in 0..buf.len() {
            buf[i] = self.v[i] * nodes[i];
        }
        self.grid.forward_with_scratch(buf, &mut self.scratch);
        let freqs = self.grid.freqs();
        let mut acc = 0.0;
        for i in 0..buf.len() {
            let l = buf[i] * self.spec_scale[i] * self.bracket[i] + self.v_hat[i] * (t * freqs[i]);
            acc += (l * self.bracket[i]).norm_sqr();
        }
        (acc * self.grid.dxi()).sqrt()
    }
}

/// Spectrum of `(1/2i)⟨∇⟩^{-1}(αu² + β₀u³ + βu³)` at the state's solution.
pub fn nonlinearity(s: &SimState, model: &Model) -> Result<Spectrum> {
    let grid = s.grid().clone();
    let mut eng = Engine::new(&grid, model, f64::INFINITY);
    let mut e = vec![C64::new(0.0, 0.0); grid.len()];
    eng.phases(s.t, &mut e);
    let mut k = vec![C64::new(0.0, 0.0); grid.len()];
    eng.stage(s.t, &e, s.profile.coeffs(), &mut k)?;
    Spectrum::from_coeffs(&grid, eng.n_hat)
}

/// Classical RK4 on `∂_t f̂ = e^{-it⟨ξ⟩} N̂(t)`.
pub fn step(s: &SimState, model: &Model, dt: f64) -> Result<SimState> {
    if !(dt.abs() <= 0.1) {
        return Err(Error::Config(format!("dt must not exceed 0.1, got {dt}")));
    }
    let grid = s.grid().clone();
    let mut eng = Engine::new(&grid, model, BLOWUP_THRESHOLD);
    let mut rk = Rk4::new(grid.len());
    eng.phases(s.t, &mut rk.e0);
    let mut f = s.profile.coeffs().to_vec();
    rk.first_stage(&mut eng, s.t, &f)?;
    rk.finish(&mut eng, s.t, dt, &mut f)?;
    Ok(SimState { t: s.t + dt, profile: Spectrum::from_coeffs(&grid, f)? })
}

struct Rk4 {
    e0: Vec<C64>,
    eh: Vec<C64>,
    e1: Vec<C64>,
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Rk4 { e0: z.clone(), eh: z.clone(), e1: z.clone(), k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    fn first_stage(&mut self, eng: &mut Engine, t: f64, f: &[C64]) -> Result<()> {
        eng.stage(t, &self.e0, f, &mut self.k1)
    }

    /// Remaining stages and update; afterwards `e0` holds the phases at `t + h`.
    fn finish(&mut self, eng: &mut Engine, t: f64, h: f64, f: &mut [C64]) -> Result<()> {
        let n = f.len();
        eng.phases(t + h, &mut self.e1);
        for i in 0..n {
            self.eh[i] = self.e0[i] * C64::from_polar(1.0, 0.5 * h * eng.bracket[i]);
        }
        for i in 0..n {
            self.tmp[i] = f[i] + self.k1[i] * (0.5 * h);
        }
        eng.stage(t + 0.5 * h, &self.eh, &self.tmp, &mut self.k2)?;
        for i in 0..n {
            self.tmp[i] = f[i] + self.k2[i] * (0.5 * h);
        }
        eng.stage(t + 0.5 * h, &self.eh, &self.tmp, &mut self.k3)?;
        for i in 0..n {
            self.tmp[i] = f[i] + self.k3[i] * h;
        }
        eng.stage(t + h, &self.e1, &self.tmp, &mut self.k4)?;
        for i in 0..n {
            f[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (h / 6.0);
        }
        std::mem::swap(&mut self.e0, &mut self.e1);
        Ok(())
    }
}

/// `E = ∫ ½u_t² + ½u_x² + ½u² − (α/3)u³ − ((β₀+β)/4)u⁴ dx`.
pub fn energy(s: &SimState, model: &Model) -> Result<f64> {
    let grid = s.grid().clone();
    let n = grid.len();
    let mut eng = Engine::new(&grid, model, f64::INFINITY);
    let mut e = vec![C64::new(0.0, 0.0); n];
    eng.phases(s.t, &mut e);
    let mut k = vec![C64::new(0.0, 0.0); n];
    eng.stage(s.t, &e, s.profile.coeffs(), &mut k)?;
    let mut dv = vec![C64::new(0.0, 0.0); n];
    eng.shifted_derivative(&mut dv);
    let mut vx = vec![C64::new(0.0, 0.0); n];
    eng.derivative_field(&mut vx);
    Ok(eng.energy(&dv, &vx))
}

/// `∂_t(e^{-it}v) = e^{-it}(i(⟨∇⟩ − 1)v + (∂_t − i⟨∇⟩)v)`, evaluated from the equation.
pub fn phase_filtered_derivative(s: &SimState, model: &Model) -> Result<Field> {
    let grid = s.grid().clone();
    let n = grid.len();
    let mut eng = Engine::new(&grid, model, f64::INFINITY);
    let mut e = vec![C64::new(0.0, 0.0); n];
    eng.phases(s.t, &mut e);
    let mut k = vec![C64::new(0.0, 0.0); n];
    eng.stage(s.t, &e, s.profile.coeffs(), &mut k)?;
    let mut dv = vec![C64::new(0.0, 0.0); n];
    eng.shifted_derivative(&mut dv);
    let rot = C64::from_polar(1.0, -s.t);
    Field::from_values(&grid, dv.into_iter().map(|z| z * rot).collect())
}

/// Run the configured simulation.
pub fn run(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = Grid::new(cfg.half_length, cfg.n_points)?;
    let model = Model::from_config(cfg, &grid)?;
    let v0 = initial_data(cfg, &grid)?;
    run_from(cfg, model, &v0)
}

/// Run from explicit initial data and coefficients.
pub fn run_from(cfg: &SimConfig, model: Model, v0: &Field) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = v0.grid().clone();
    if grid.len() != cfg.n_points || grid.half_length() != cfg.half_length {
        return Err(Error::Config("initial data grid does not match the configuration".into()));
    }
    let n = grid.len();
    let dt = cfg.dt;
    let n_steps = cfg.steps();
    let checkpoints = cfg.checkpoint_steps();
    let mut next_cp = 0;
    let origin = grid.origin_index();
    let dx = grid.dx();

    let mut eng = Engine::new(&grid, &model, cfg.blowup_threshold);
    let mut rk = Rk4::new(n);
    let mut f = to_spectrum(v0).into_coeffs();
    for i in 0..n {
        rk.e0[i] = C64::new(1.0, 0.0);
    }

    let weight4: Vec<f64> = grid.nodes().iter().map(|x| (1.0 + x * x).powi(-2)).collect();
    let b3: Vec<f64> = eng.bracket.iter().map(|b| b * b * b).collect();
    let probe_idx: Vec<usize> = cfg.profile_probes.iter().map(|&xi| grid.nearest_freq_index(xi)).collect();
    let mut probes = ProbeSeries {
        xis: probe_idx.iter().map(|&i| grid.freqs()[i]).collect(),
        indices: probe_idx.clone(),
        times: Vec::new(),
        values: Vec::new(),
    };
    let start_step = (1.0 / dt).round() as usize;
    let mut phase_integral = vec![0.0; n];
    let mut q_prev = vec![0.0; n];

    let mut dv = vec![C64::new(0.0, 0.0); n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut series = Vec::new();
    let mut bilinear = Vec::with_capacity(n_steps + 1);
    let mut cps = Vec::with_capacity(checkpoints.len());
    let mut e_initial: Option<f64> = None;

    for step_idx in 0..=n_steps {
        let t = step_idx as f64 * dt;
        rk.first_stage(&mut eng, t, &f)?;
        eng.shifted_derivative(&mut dv);

        let rot2 = C64::from_polar(1.0, -2.0 * t);
        let mut s1 = C64::new(0.0, 0.0);
        let mut s2 = 0.0;
        for i in 0..n {
            let a = eng.alpha[i];
            if a != 0.0 {
                s1 += a * dv[i] * eng.v[i];
                s2 += a * 2.0 * (eng.v[i].conj() * dv[i]).re;
            }
        }
        let filtered0 = dv[origin] * C64::from_polar(1.0, -t);
        bilinear.push(BilinearRecord { t, s1: s1 * rot2 * dx, s2: s2 * dx, origin_filtered: filtered0, origin: eng.v[origin] });

        if step_idx >= start_step {
            let inv_t = 1.0 / t;
            for i in 0..n {
                let q = f[i].norm_sqr() * b3[i] * inv_t;
                if step_idx > start_step {
                    phase_integral[i] += 0.5 * dt * (q + q_prev[i]);
                }
                q_prev[i] = q;
            }
        }

        let is_cp = next_cp < checkpoints.len() && checkpoints[next_cp] == step_idx;
        if step_idx % cfg.record_every == 0 || step_idx == n_steps || is_cp {
            eng.derivative_field(&mut buf);
            let energy = eng.energy(&dv, &buf);
            let mut wdx = 0.0;
            let mut wv = 0.0;
            let mut wf = 0.0;
            for i in 0..n {
                wdx += buf[i].norm_sqr() * weight4[i];
                wv += eng.v[i].norm_sqr() * weight4[i];
                wf += dv[i].norm_sqr() * weight4[i];
            }
            let l_norm = eng.l_norm(t, &mut buf);
            let sup_norm = eng.v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt();
            let rays = cfg
                .rays
                .iter()
                .map(|&c| crate::spectral::cubic_interpolate(&eng.v, (c * t + grid.half_length()) / dx))
                .collect();
            let e0 = *e_initial.get_or_insert(energy);
            if e0.abs() > 0.0 {
                let drift = ((energy - e0) / e0).abs();
                if drift > cfg.energy_abort {
                    return Err(Error::EnergyDrift { t, drift });
                }
            }
            series.push(SeriesRecord {
                t,
                sup_norm,
                energy,
                origin: eng.v[origin],
                rays,
                weighted_v: (wv * dx).sqrt(),
                weighted_dx_v: (wdx * dx).sqrt(),
                weighted_filtered: (wf * dx).sqrt(),
                l_norm,
                origin_filtered: dv[origin].norm(),
            });
            probes.times.push(t);
            probes.values.push(probe_idx.iter().map(|&i| f[i]).collect());
        }
        if is_cp {
            cps.push(Checkpoint { t, profile: Spectrum::from_coeffs(&grid, f.clone())?, self_phase_integral: phase_integral.clone() });
            next_cp += 1;
        }
        if step_idx == n_steps {
            break;
        }
        rk.finish(&mut eng, t, dt, &mut f)?;
    }

    Ok(Trajectory { config: cfg.clone(), grid, model, checkpoints: cps, series, bilinear, probes })
}
