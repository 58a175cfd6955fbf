use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Ω² ≤ Γ_e²/4: the doublet peaks are not defined.
    #[error("overdamped regime: doublet peak structure undefined (rabi = {rabi}, gamma_e = {gamma_e})")]
    Overdamped { rabi: f64, gamma_e: f64 },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("frequency grid was built for tau = {grid_tau} but the run uses tau = {tau}")]
    GridMismatch { grid_tau: f64, tau: f64 },

    #[error(
        "state left the physical set at t = {time} ({check} defect {defect:.3e}); \
         reduce the step size below dt = {dt}"
    )]
    Unphysical {
        time: f64,
        dt: f64,
        check: &'static str,
        defect: f64,
    },

    #[error("no-jump norm grew by {growth:.3e} at t = {time}; the integrator step dt = {dt} is too large")]
    NormIncrease { time: f64, dt: f64, growth: f64 },

    #[error("steady state is not unique: generator null space has dimension {dim}")]
    DegenerateSteadyState { dim: usize },

    #[error(
        "correlation has not decayed at tau_max = {tau_max}: |K(tau_max)|/|K(0)| = {ratio:.3e} \
         (need < 1e-6); increase tau_max"
    )]
    InsufficientDecay { tau_max: f64, ratio: f64 },

    #[error("{what} did not converge; successive differences {trace:?}")]
    NotConverged { what: &'static str, trace: Vec<f64> },
}

impl Error {
    /// True for failures of the numerics (step size, convergence, degeneracy),
    /// false for rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unphysical { .. }
                | Error::NormIncrease { .. }
                | Error::DegenerateSteadyState { .. }
                | Error::InsufficientDecay { .. }
                | Error::NotConverged { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
