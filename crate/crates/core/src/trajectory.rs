//! Emission spectrum from conditional (quantum-trajectory) dynamics.
//!
//! The zero-photon branch |ψ(t)⟩ evolves under the non-Hermitian
//! H_eff = H(t) − i(Γ_e/2)|e⟩⟨e|, and the one-photon branch for a photon of
//! frequency ω_j obeys
//!
//! d|ψ_ω⟩/dt = √(Γ_e/τ) σ₋^{et}|ψ(t)⟩ − i(H_eff + ω_j)|ψ_ω⟩,
//!
//! with the photon frequencies on the Fourier grid of the window [0, τ]. The
//! spectrum is S(ω_j) = ⟨ψ_ω(τ)|ψ_ω(τ)⟩. Everything here is deterministic;
//! no jumps are sampled.
//!
//! The zero-photon solution is computed once and its Runge-Kutta stage values
//! are shared by every frequency, so each one-photon integration is exactly
//! the classical RK4 step of the coupled system.

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{generalized_rabi, omega_eff, AtomParams, DriveProfile};
use crate::rk4;
use crate::spectrum::{FrequencyGrid, SpectrumResult};
use crate::state::{Level, StateVector};

/// Tolerance on norm growth of the zero-photon state.
pub const NORM_TOL: f64 = 1e-8;

/// Largest acceptable L∞ change of the normalized spectrum when dt is halved.
pub const STEP_HALVING_TOL: f64 = 1e-4;

/// Ω(t)/2 · e^{iδt}, the coefficient of |e⟩⟨g| in H(t).
fn coupling(params: &AtomParams, drive: &DriveProfile, t: f64) -> C64 {
    let half = 0.5 * drive.evaluate(t);
    if params.delta == 0.0 {
        C64::from(half)
    } else {
        C64::from_polar(half, params.delta * t)
    }
}

/// −i H_eff ψ for the given coupling.
fn no_jump_rhs(c: C64, gamma_e: f64, psi: &Vector3<C64>) -> Vector3<C64> {
    let mi = C64::new(0.0, -1.0);
    Vector3::new(
        mi * c.conj() * psi[1],
        mi * c * psi[0] - psi[1] * (0.5 * gamma_e),
        C64::from(0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct StepRecord {
    /// ψ_e at the four RK4 stage states.
    excited: [C64; 4],
    /// Coupling at t, t + dt/2, t + dt.
    coupling: [C64; 3],
}

/// Zero-photon conditional state sampled after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct NoJumpTrajectory {
    pub times: Vec<f64>,
    pub psi: Vec<StateVector>,
    params: AtomParams,
    drive: DriveProfile,
    steps: Vec<StepRecord>,
}

impl NoJumpTrajectory {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn norm_sqr(&self) -> Vec<f64> {
        self.psi.iter().map(StateVector::norm_sqr).collect()
    }

    /// Γ_e ∫₀ᵗ |ψ_e(s)|² ds at every sample: the probability that a photon
    /// has been emitted by time t.
    ///
    /// Quadrature is the endpoint-corrected trapezoidal rule, using the exact
    /// derivative of |ψ_e|² from the equation of motion at each sample.
    pub fn emitted_probability(&self) -> Vec<f64> {
        let g = self.params.gamma_e;
        let flux = |k: usize| {
            let t = self.times[k];
            let psi = &self.psi[k].0;
            let d = no_jump_rhs(coupling(&self.params, &self.drive, t), g, psi);
            let e = psi[1];
            (g * e.norm_sqr(), g * 2.0 * (e.conj() * d[1]).re)
        };
        let mut out = Vec::with_capacity(self.times.len());
        out.push(0.0);
        let mut acc = 0.0;
        let (mut f0, mut d0) = flux(0);
        for k in 1..self.times.len() {
            let h = self.times[k] - self.times[k - 1];
            let (f1, d1) = flux(k);
            acc += 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
            out.push(acc);
            (f0, d0) = (f1, d1);
        }
        out
    }

    /// max over samples of |norm²(t) + emitted(t) − norm²(0)|.
    pub fn bookkeeping_defect(&self) -> f64 {
        let n0 = self.psi[0].norm_sqr();
        self.norm_sqr()
            .iter()
            .zip(self.emitted_probability())
            .map(|(n, p)| (n + p - n0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates the zero-photon state from `psi0` over `[0, t_end]` with RK4.
pub fn propagate_no_jump(
    psi0: &StateVector,
    params: &AtomParams,
    drive: &DriveProfile,
    t_end: f64,
    dt: f64,
) -> Result<NoJumpTrajectory> {
    params.validate()?;
    drive.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid("t_end", format!("must be finite and > 0, got {t_end}")));
    }
    if (psi0.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "psi0",
            format!("must be normalized, norm² = {}", psi0.norm_sqr()),
        ));
    }

    let (n, h) = rk4::steps_for(t_end, dt);
    let gamma_e = params.gamma_e;
    let rhs = |t: f64, y: &Vector3<C64>| no_jump_rhs(coupling(params, drive, t), gamma_e, y);

    let mut times = Vec::with_capacity(n + 1);
    let mut psi = Vec::with_capacity(n + 1);
    let mut steps = Vec::with_capacity(n);
    let mut y = psi0.0;
    let mut norm = psi0.norm_sqr();
    times.push(0.0);
    psi.push(*psi0);
    for k in 0..n {
        let t = k as f64 * h;
        let (next, stages) = rk4::step_with_stages(rhs, t, &y, h);
        let t_next = (k + 1) as f64 * h;
        let next_norm = next.norm_squared();
        if next_norm > norm + NORM_TOL {
            return Err(Error::NormIncrease {
                time: t_next,
                dt: h,
                growth: next_norm - norm,
            });
        }
        steps.push(StepRecord {
            excited: stages.states.map(|s| s[1]),
            coupling: [
                coupling(params, drive, t),
                coupling(params, drive, t + 0.5 * h),
                coupling(params, drive, t_next),
            ],
        });
        y = next;
        norm = next_norm;
        times.push(t_next);
        psi.push(StateVector(y));
    }
    Ok(NoJumpTrajectory {
        times,
        psi,
        params: *params,
        drive: *drive,
        steps,
    })
}

/// Right-hand side of the one-photon equation for a given stage.
fn photon_rhs(c: C64, gamma_e: f64, omega: f64, source: C64, y: &Vector3<C64>) -> Vector3<C64> {
    let mut d = no_jump_rhs(c, gamma_e, y);
    d -= y * C64::new(0.0, omega);
    d[2] += source;
    d
}

/// Full one-photon state ψ_ω(t) at every sample of `no_jump`, for a window of
/// length `tau`. Only the trap amplitude is ever populated.
pub fn photon_trajectory(no_jump: &NoJumpTrajectory, omega: f64, tau: f64) -> Vec<StateVector> {
    let mut out = Vec::with_capacity(no_jump.times.len());
    let mut y = Vector3::zeros();
    out.push(StateVector(y));
    for_each_photon_step(no_jump, omega, tau, &mut y, |v| out.push(StateVector(*v)));
    out
}

fn for_each_photon_step(
    no_jump: &NoJumpTrajectory,
    omega: f64,
    tau: f64,
    y: &mut Vector3<C64>,
    mut visit: impl FnMut(&Vector3<C64>),
) {
    let gamma_e = no_jump.params.gamma_e;
    let strength = (gamma_e / tau).sqrt();
    for (k, rec) in no_jump.steps.iter().enumerate() {
        let h = no_jump.times[k + 1] - no_jump.times[k];
        let src = rec.excited.map(|e| e * strength);
        let f = |stage: usize, c: C64, v: &Vector3<C64>| photon_rhs(c, gamma_e, omega, src[stage], v);
        let k1 = f(0, rec.coupling[0], y);
        let k2 = f(1, rec.coupling[1], &(*y + k1 * C64::from(0.5 * h)));
        let k3 = f(2, rec.coupling[1], &(*y + k2 * C64::from(0.5 * h)));
        let k4 = f(3, rec.coupling[2], &(*y + k3 * C64::from(h)));
        *y += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
        visit(y);
    }
}

/// Final one-photon amplitudes for every grid frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonTrajectorySet {
    pub grid: FrequencyGrid,
    /// f_{ω_j}(τ), the trap amplitude of each one-photon state at the end of the window.
    pub f_values: Vec<C64>,
    /// ⟨ψ_{ω_j}(τ)|ψ_{ω_j}(τ)⟩
    pub final_norms: Vec<f64>,
}

fn check_grid(grid: &FrequencyGrid, tau: f64) -> Result<()> {
    if (grid.tau() - tau).abs() > 1e-12 * tau.abs().max(1.0) {
        return Err(Error::GridMismatch {
            grid_tau: grid.tau(),
            tau,
        });
    }
    Ok(())
}

/// Integrates the one-photon branch for every frequency of `grid`, starting
/// from ψ(0) = |g⟩.
pub fn photon_trajectories(
    params: &AtomParams,
    drive: &DriveProfile,
    tau: f64,
    grid: &FrequencyGrid,
    dt: f64,
) -> Result<PhotonTrajectorySet> {
    check_grid(grid, tau)?;
    let no_jump = propagate_no_jump(&StateVector::basis(Level::G), params, drive, tau, dt)?;
    let omegas: Vec<f64> = grid.omegas().collect();
    let finals: Vec<Vector3<C64>> = omegas
        .par_iter()
        .map(|&w| {
            let mut y = Vector3::zeros();
            for_each_photon_step(&no_jump, w, tau, &mut y, |_| {});
            y
        })
        .collect();
    Ok(PhotonTrajectorySet {
        grid: *grid,
        f_values: finals.iter().map(|v| v[Level::T.index()]).collect(),
        final_norms: finals.iter().map(|v| v.norm_squared()).collect(),
    })
}

/// Peak-normalized one-photon spectrum S(ω_j) = ⟨ψ_ω(τ)|ψ_ω(τ)⟩.
///
/// The run is repeated at dt/2 and rejected if the normalized spectra differ
/// by more than [`STEP_HALVING_TOL`]. The result at `dt` is returned.
pub fn single_photon_spectrum(
    params: &AtomParams,
    drive: &DriveProfile,
    tau: f64,
    grid: &FrequencyGrid,
    dt: f64,
) -> Result<SpectrumResult> {
    let coarse = photon_trajectories(params, drive, tau, grid, dt)?;
    let fine = photon_trajectories(params, drive, tau, grid, 0.5 * dt)?;
    let coarse = SpectrumResult::from_real(*grid, coarse.final_norms).normalized();
    let fine = SpectrumResult::from_real(*grid, fine.final_norms).normalized();
    let diff = coarse
        .s_values
        .iter()
        .zip(&fine.s_values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if diff > STEP_HALVING_TOL {
        return Err(Error::NotConverged {
            what: "one-photon spectrum under step halving",
            trace: vec![diff],
        });
    }
    Ok(coarse)
}

/// One-photon spectrum for a time-dependent drive and/or finite detuning.
///
/// The machinery is that of [`single_photon_spectrum`], which already
/// evaluates H(t) = (Ω(t)/2)(σ₊^{ge} e^{iδt} + σ₋^{ge} e^{−iδt}) at every stage.
pub fn transient_spectrum(
    params: &AtomParams,
    drive: &DriveProfile,
    tau: f64,
    grid: &FrequencyGrid,
    dt: f64,
) -> Result<SpectrumResult> {
    single_photon_spectrum(params, drive, tau, grid, dt)
}

/// Grid on window `tau` spanning ±2√(Ω_max² + δ²).
pub fn default_grid(params: &AtomParams, drive: &DriveProfile, tau: f64) -> Result<FrequencyGrid> {
    let span = 2.0
        * generalized_rabi(&AtomParams {
            rabi: drive.peak(),
            ..*params
        });
    FrequencyGrid::covering(tau, span.max(params.gamma_e).max(1.0))
}

/// Closed-form one-photon amplitude for constant resonant drive, up to scale:
///
/// f(t) ∝ [sin(Ω_eff t/2) e^{−Γ_e t/4} (iω − Γ_e/4) − (Ω_eff/2) cos(Ω_eff t/2) e^{−Γ_e t/4}
///         + (Ω_eff/2) e^{−iωt}] / [(iω − Γ_e/4)² + Ω_eff²/4].
///
/// Multiply by [`photon_amplitude_prefactor`] for the absolute amplitude.
pub fn analytic_f(params: &AtomParams, omega_j: f64, t: f64) -> Result<C64> {
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::invalid("delta", "the closed form holds at zero detuning only"));
    }
    let half = 0.5 * omega_eff(params)?;
    let quarter = 0.25 * params.gamma_e;
    let iw = C64::new(-quarter, omega_j);
    let env = (-quarter * t).exp();
    let (s, c) = (half * t).sin_cos();
    let numer = iw * (s * env) - C64::from(half * c * env) + C64::from_polar(half, -omega_j * t);
    Ok(numer / (iw * iw + half * half))
}

/// Scale q of the closed-form amplitude, q = (4/Ω)√(Γ_e/τ) λ₊λ₋/(λ₊ − λ₋),
/// where λ± = −Γ_e/4 ± iΩ_eff/2 are the eigenvalues of −iH_eff on the g–e
/// block. With this scale, `q · analytic_f` is the unnormalized amplitude.
pub fn photon_amplitude_prefactor(params: &AtomParams, tau: f64) -> Result<C64> {
    if !(params.rabi > 0.0) {
        return Err(Error::invalid("rabi", "must be > 0"));
    }
    let half = 0.5 * omega_eff(params)?;
    let plus = C64::new(-0.25 * params.gamma_e, half);
    let minus = C64::new(-0.25 * params.gamma_e, -half);
    Ok(plus * minus / (plus - minus) * (4.0 / params.rabi * (params.gamma_e / tau).sqrt()))
}
