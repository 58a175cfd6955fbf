//! Atom and drive parameters.
//!
//! All rates and frequencies are dimensionless, measured in units of a
//! reference rate. The conventional choice is Γ_e = 1.

use crate::error::{Error, Result};

/// Rates and detuning of the driven three-level atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    /// Peak Rabi frequency Ω of the g–e drive.
    pub rabi: f64,
    /// Decay rate Γ_e of |e⟩ → |t⟩.
    pub gamma_e: f64,
    /// Decay rate Γ_t of |t⟩ → |g⟩.
    pub gamma_t: f64,
    /// Laser detuning δ.
    pub delta: f64,
}

impl Default for AtomParams {
    /// Ω = 5, Γ_e = 1, Γ_t = 0, δ = 0.
    fn default() -> Self {
        AtomParams {
            rabi: 5.0,
            gamma_e: 1.0,
            gamma_t: 0.0,
            delta: 0.0,
        }
    }
}

impl AtomParams {
    pub fn new(rabi: f64, gamma_e: f64, gamma_t: f64) -> Self {
        AtomParams {
            rabi,
            gamma_e,
            gamma_t,
            delta: 0.0,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        AtomParams { delta, ..self }
    }

    pub fn with_gamma_t(self, gamma_t: f64) -> Self {
        AtomParams { gamma_t, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: f64| {
            if !v.is_finite() {
                Err(Error::invalid(name, format!("must be finite, got {v}")))
            } else if v < 0.0 {
                Err(Error::invalid(name, format!("must be >= 0, got {v}")))
            } else {
                Ok(())
            }
        };
        check("rabi", self.rabi)?;
        check("gamma_e", self.gamma_e)?;
        check("gamma_t", self.gamma_t)?;
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", format!("must be finite, got {}", self.delta)));
        }
        Ok(())
    }

    /// Largest rate in the problem, floored at 1.
    pub fn max_rate(&self) -> f64 {
        [self.rabi, self.gamma_e, self.gamma_t, self.delta.abs(), 1.0]
            .into_iter()
            .fold(f64::MIN, f64::max)
    }
}

/// Effective (damped) Rabi frequency Ω_eff = √(Ω² − Γ_e²/4).
pub fn omega_eff(params: &AtomParams) -> Result<f64> {
    let disc = params.rabi * params.rabi - params.gamma_e * params.gamma_e / 4.0;
    if disc <= 0.0 {
        return Err(Error::Overdamped {
            rabi: params.rabi,
            gamma_e: params.gamma_e,
        });
    }
    Ok(disc.sqrt())
}

/// Generalized Rabi frequency √(Ω² + δ²).
pub fn generalized_rabi(params: &AtomParams) -> f64 {
    params.rabi.hypot(params.delta)
}

/// Time dependence of the Rabi frequency Ω(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveProfile {
    Constant(f64),
    /// Ω(t) = omega_max · (1 − exp(−(t − t_start)/rise_time)) for t ≥ t_start, else 0.
    ExpRamp {
        omega_max: f64,
        rise_time: f64,
        t_start: f64,
    },
}

impl DriveProfile {
    pub fn constant(params: &AtomParams) -> Self {
        DriveProfile::Constant(params.rabi)
    }

    pub fn exp_ramp(omega_max: f64, rise_time: f64) -> Self {
        DriveProfile::ExpRamp {
            omega_max,
            rise_time,
            t_start: 0.0,
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match *self {
            DriveProfile::Constant(omega) => omega,
            DriveProfile::ExpRamp {
                omega_max,
                rise_time,
                t_start,
            } => {
                if t < t_start {
                    0.0
                } else {
                    // exp_m1 keeps the early-time slope accurate.
                    -omega_max * (-(t - t_start) / rise_time).exp_m1()
                }
            }
        }
    }

    /// Supremum of Ω(t).
    pub fn peak(&self) -> f64 {
        match *self {
            DriveProfile::Constant(omega) => omega,
            DriveProfile::ExpRamp { omega_max, .. } => omega_max,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DriveProfile::Constant(_))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DriveProfile::Constant(omega) => {
                if !(omega.is_finite() && omega >= 0.0) {
                    return Err(Error::invalid("rabi", format!("must be finite and >= 0, got {omega}")));
                }
            }
            DriveProfile::ExpRamp {
                omega_max,
                rise_time,
                t_start,
            } => {
                if !(omega_max.is_finite() && omega_max >= 0.0) {
                    return Err(Error::invalid(
                        "omega_max",
                        format!("must be finite and >= 0, got {omega_max}"),
                    ));
                }
                if !(rise_time.is_finite() && rise_time > 0.0) {
                    return Err(Error::invalid(
                        "rise_time",
                        format!("must be finite and > 0, got {rise_time}"),
                    ));
                }
                if !t_start.is_finite() {
                    return Err(Error::invalid("t_start", format!("must be finite, got {t_start}")));
                }
            }
        }
        Ok(())
    }
}
