//! Steady-state emission spectrum of the |e⟩ → |t⟩ transition from the
//! two-time correlation K(τ) = ⟨σ₊^{et}(t+τ) σ₋^{et}(t)⟩, with σ₋^{et} = |t⟩⟨e|.
//!
//! By the quantum regression theorem K(τ) obeys the same linear equations as
//! the one-time coherences. Starting from X(0) = σ₋^{et} ρ_ss, only the
//! elements X_tg and X_te are populated and they form a closed pair, so
//! K(τ) = X_te(τ) is obtained by propagating a two-component vector with the
//! corresponding 2×2 block of the master-equation generator.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::{build_generator, steady_state};
use crate::params::{omega_eff, AtomParams, DriveProfile};
use crate::rk4;
use crate::spectrum::{shape_distance, FrequencyGrid, SpectrumResult};
use crate::state::Level;

/// Largest acceptable |K(τ_max)| / |K(0)| before the transform is attempted.
pub const DECAY_THRESHOLD: f64 = 1e-6;

/// Successive-difference threshold of [`gamma_t_limit_spectrum`].
pub const LIMIT_TOLERANCE: f64 = 1e-3;

/// Samples of the steady-state correlation K(τ) for τ ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub taus: Vec<f64>,
    pub k_values: Vec<C64>,
}

impl CorrelationTrace {
    pub fn k0(&self) -> C64 {
        self.k_values[0]
    }
}

/// Sampling choices for the regression-theorem spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrtNumerics {
    pub tau_max: f64,
    pub dt: f64,
}

impl QrtNumerics {
    /// τ_max long enough for the slowest correlation mode to fall by e^{-16},
    /// with dt = 0.005 / max rate.
    pub fn for_params(params: &AtomParams) -> Result<Self> {
        let rate = slowest_correlation_rate(params);
        if !(rate > 0.0) {
            return Err(Error::invalid(
                "gamma_t",
                "correlation does not decay; need gamma_t > 0",
            ));
        }
        Ok(QrtNumerics {
            tau_max: 16.0 / rate,
            dt: 0.005 / params.max_rate(),
        })
    }
}

/// Decay rate of the slower eigenmode of the (tg, te) block.
fn slowest_correlation_rate(params: &AtomParams) -> f64 {
    let mean = params.gamma_e / 4.0 + params.gamma_t / 2.0;
    let disc = params.gamma_e * params.gamma_e / 16.0 - params.rabi * params.rabi / 4.0;
    mean - disc.max(0.0).sqrt()
}

const TG: usize = Level::T.vec_index(Level::G);
const TE: usize = Level::T.vec_index(Level::E);

/// K(τ) on [0, tau_max] by the quantum regression theorem.
pub fn qrt_correlation(params: &AtomParams, tau_max: f64, dt: f64) -> Result<CorrelationTrace> {
    params.validate()?;
    if !(params.gamma_t > 0.0) {
        return Err(Error::invalid(
            "gamma_t",
            "the regression theorem needs a nontrivial steady state (gamma_t > 0); \
             approach gamma_t = 0 with gamma_t_limit_spectrum",
        ));
    }
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::invalid(
            "tau_max",
            format!("must be finite and > 0, got {tau_max}"),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    let rho = steady_state(params)?;
    let full = build_generator(params, &DriveProfile::constant(params), 0.0).mat;
    let block = [TG, TE];
    debug_assert!(
        block.iter().all(|&r| (0..9)
            .filter(|c| !block.contains(c))
            .all(|c| full[(r, c)] == C64::from(0.0))),
        "the (tg, te) pair must be closed under the generator"
    );
    let g = Matrix2::from_fn(|i, j| full[(block[i], block[j])]);

    // X(0) = |t⟩⟨e| ρ: row t of X is row e of ρ.
    let mut x = Vector2::new(rho.get(Level::E, Level::G), rho.get(Level::E, Level::E));

    let (n, h) = rk4::steps_for(tau_max, dt);
    let mut taus = Vec::with_capacity(n + 1);
    let mut k_values = Vec::with_capacity(n + 1);
    taus.push(0.0);
    k_values.push(x[1]);
    for k in 0..n {
        x = rk4::step(|_, v| g * v, k as f64 * h, &x, h);
        taus.push((k + 1) as f64 * h);
        k_values.push(x[1]);
    }
    Ok(CorrelationTrace { taus, k_values })
}

/// Two-sided transform S(ω) = ∫ K(τ) e^{−iωτ} dτ over the grid.
///
/// Uses K(−τ) = conj K(τ), so S(ω) = 2 Re ∫₀^{τ_max} K(τ) e^{−iωτ} dτ, with
/// the half-line integral done by the trapezoidal rule on the stored samples.
pub fn spectrum_from_correlation(corr: &CorrelationTrace, grid: &FrequencyGrid) -> Result<SpectrumResult> {
    let (taus, ks) = (&corr.taus, &corr.k_values);
    if taus.len() < 2 || taus.len() != ks.len() {
        return Err(Error::invalid("corr", "need at least two matched (tau, K) samples"));
    }
    let k0 = ks[0].norm();
    let tail = ks[ks.len() - 1].norm();
    if tail > DECAY_THRESHOLD * k0 || (k0 == 0.0 && tail > 0.0) {
        return Err(Error::InsufficientDecay {
            tau_max: taus[taus.len() - 1],
            ratio: if k0 > 0.0 { tail / k0 } else { f64::INFINITY },
        });
    }
    let omegas: Vec<f64> = grid.omegas().collect();
    let values = omegas
        .par_iter()
        .map(|&w| {
            let term = |k: usize| ks[k] * C64::from_polar(1.0, -w * taus[k]);
            let mut acc = C64::from(0.0);
            let mut prev = term(0);
            for k in 1..taus.len() {
                let cur = term(k);
                acc += (prev + cur) * (0.5 * (taus[k] - taus[k - 1]));
                prev = cur;
            }
            C64::new(2.0 * acc.re, 0.0)
        })
        .collect();
    Ok(SpectrumResult::new(*grid, values))
}

/// The closed-form AC-Stark-split spectrum
///
/// S(ω) = ρ_tt/(πΩ_eff) Σ± (±iΓ_e/4 + Ω_eff/2)(Γ_e/4 + Γ_t/2)
///        / [(Γ_e/4 + Γ_t/2)² + (ω ± Ω_eff/2)²],
///
/// evaluated as written. ρ_tt is the steady-state trap population, taken as 1
/// when Γ_t = 0.
pub fn analytic_spectrum(params: &AtomParams, grid: &FrequencyGrid) -> Result<SpectrumResult> {
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::invalid("delta", "the closed form holds at zero detuning only"));
    }
    let w_eff = omega_eff(params)?;
    let rho_tt = if params.gamma_t == 0.0 {
        1.0
    } else {
        steady_state(params)?.population(Level::T)
    };
    let width = params.gamma_e / 4.0 + params.gamma_t / 2.0;
    let half = w_eff / 2.0;
    let pref = rho_tt / (PI * w_eff);
    let quarter = params.gamma_e / 4.0;
    let values = grid
        .omegas()
        .map(|w| {
            let lower = C64::new(half, quarter) * width / (width * width + (w + half).powi(2));
            let upper = C64::new(half, -quarter) * width / (width * width + (w - half).powi(2));
            (lower + upper) * pref
        })
        .collect();
    Ok(SpectrumResult::new(*grid, values))
}

/// Whether the Γ_t → 0 sequence was long enough to judge convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitStatus {
    Converged,
    NotAssessed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub gamma_t: Vec<f64>,
    /// L∞ distance between successive peak-normalized |S|².
    pub differences: Vec<f64>,
    pub status: LimitStatus,
}

/// Regression-theorem spectra along a decreasing Γ_t sequence.
///
/// Returns the peak-normalized spectrum for the last Γ_t. Convergence means
/// the last successive difference is below [`LIMIT_TOLERANCE`].
pub fn gamma_t_limit_spectrum(
    params_base: &AtomParams,
    grid: &FrequencyGrid,
    gamma_t_sequence: &[f64],
) -> Result<(SpectrumResult, LimitReport)> {
    if gamma_t_sequence.is_empty() {
        return Err(Error::invalid("gamma_t_sequence", "must not be empty"));
    }
    if gamma_t_sequence.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::invalid("gamma_t_sequence", "all values must be finite and > 0"));
    }
    if gamma_t_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("gamma_t_sequence", "must be strictly decreasing"));
    }
    let spectra = gamma_t_sequence
        .par_iter()
        .map(|&gamma_t| {
            let params = params_base.with_gamma_t(gamma_t);
            let num = QrtNumerics::for_params(&params)?;
            let corr = qrt_correlation(&params, num.tau_max, num.dt)?;
            Ok(spectrum_from_correlation(&corr, grid)?.normalized())
        })
        .collect::<Result<Vec<_>>>()?;
    let differences = spectra
        .windows(2)
        .map(|w| shape_distance(&w[0], &w[1]).map(|d| d.linf))
        .collect::<Result<Vec<_>>>()?;
    let status = match differences.last() {
        None => LimitStatus::NotAssessed,
        Some(&d) if d < LIMIT_TOLERANCE => LimitStatus::Converged,
        Some(_) => {
            return Err(Error::NotConverged {
                what: "gamma_t -> 0 limit",
                trace: differences,
            })
        }
    };
    let report = LimitReport {
        gamma_t: gamma_t_sequence.to_vec(),
        differences,
        status,
    };
    Ok((spectra.into_iter().last().expect("nonempty"), report))
}
