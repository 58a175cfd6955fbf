//! Master-equation dynamics of the driven three-level atom.
//!
//! The generator combines the coherent g–e drive
//! H(t) = (Ω(t)/2)(σ₊^{ge} e^{iδt} + σ₋^{ge} e^{−iδt})
//! with two decay channels, |e⟩ → |t⟩ at rate Γ_e and |t⟩ → |g⟩ at rate Γ_t.
//! There is no direct |e⟩ → |g⟩ decay.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::{AtomParams, DriveProfile};
use crate::rk4;
use crate::state::{is_physical, DensityMatrix, Level};

pub type SuperMatrix = SMatrix<C64, 9, 9>;
pub type SuperVector = SVector<C64, 9>;

/// Tolerance for the physicality checks made while stepping.
pub const STEP_TOL: f64 = 1e-8;

/// Generator of the vectorized master equation, d(vec ρ)/dt = mat · vec ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub mat: SuperMatrix,
    pub time_dependent: bool,
}

impl Liouvillian {
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_vec(&(self.mat * rho.to_vec()))
    }

    /// The trace covector: 1 at the diagonal positions of vec ρ.
    pub fn trace_covector() -> SMatrix<C64, 1, 9> {
        SMatrix::from_fn(|_, k| if k % 4 == 0 { C64::from(1.0) } else { C64::from(0.0) })
    }
}

fn ket_bra(row: Level, col: Level) -> nalgebra::Matrix3<C64> {
    let mut m = nalgebra::Matrix3::zeros();
    m[(row.index(), col.index())] = C64::from(1.0);
    m
}

/// Superoperator of a map on 3×3 matrices, built column by column from its
/// action on the basis matrices.
fn superoperator(map: impl Fn(&nalgebra::Matrix3<C64>) -> nalgebra::Matrix3<C64>) -> SuperMatrix {
    let mut out = SuperMatrix::zeros();
    for k in 0..9 {
        let mut basis = SuperVector::zeros();
        basis[k] = C64::from(1.0);
        let image = map(&DensityMatrix::from_vec(&basis).0);
        out.set_column(k, &DensityMatrix(image).to_vec());
    }
    out
}

/// Time-independent pieces of the generator. The full generator at time t is
/// `dissipator + (Ω(t)/2)(e^{iδt} raise + e^{−iδt} lower)`.
#[derive(Debug, Clone)]
pub(crate) struct GeneratorParts {
    dissipator: SuperMatrix,
    /// −i[σ₊^{ge}, ·]
    raise: SuperMatrix,
    /// −i[σ₋^{ge}, ·]
    lower: SuperMatrix,
    params: AtomParams,
    drive: DriveProfile,
}

impl GeneratorParts {
    pub(crate) fn new(params: &AtomParams, drive: &DriveProfile) -> Self {
        let decay_et = ket_bra(Level::T, Level::E);
        let decay_tg = ket_bra(Level::G, Level::T);
        let channels = [(params.gamma_e, decay_et), (params.gamma_t, decay_tg)];
        let dissipator = superoperator(|rho| {
            let mut out = nalgebra::Matrix3::zeros();
            for (rate, l) in &channels {
                let ld = l.adjoint();
                let ldl = ld * l;
                out += (l * rho * ld - (ldl * rho + rho * ldl).scale(0.5)).scale(*rate);
            }
            out
        });
        let commutator =
            |op: nalgebra::Matrix3<C64>| superoperator(move |rho| (op * rho - rho * op) * C64::new(0.0, -1.0));
        GeneratorParts {
            dissipator,
            raise: commutator(ket_bra(Level::E, Level::G)),
            lower: commutator(ket_bra(Level::G, Level::E)),
            params: *params,
            drive: *drive,
        }
    }

    pub(crate) fn is_time_dependent(&self) -> bool {
        !self.drive.is_constant() || self.params.delta != 0.0
    }

    pub(crate) fn at(&self, t: f64) -> SuperMatrix {
        let half = 0.5 * self.drive.evaluate(t);
        if self.params.delta == 0.0 {
            return self.dissipator + (self.raise + self.lower) * C64::from(half);
        }
        let phase = C64::from_polar(1.0, self.params.delta * t);
        self.dissipator + self.raise * (phase * half) + self.lower * (phase.conj() * half)
    }
}

/// Generator of the master equation at time `t`.
pub fn build_generator(params: &AtomParams, drive: &DriveProfile, t: f64) -> Liouvillian {
    let parts = GeneratorParts::new(params, drive);
    Liouvillian {
        mat: parts.at(t),
        time_dependent: parts.is_time_dependent(),
    }
}

/// Default RK4 step 0.005 / max(Ω_max, Γ_e, Γ_t, |δ|, 1).
pub fn default_step(params: &AtomParams, drive: &DriveProfile) -> f64 {
    0.005 / params.max_rate().max(drive.peak())
}

/// Density-matrix samples along a propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub rho_gg: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub rho_tt: Vec<f64>,
    pub coh_ge: Vec<C64>,
    pub coh_et: Vec<C64>,
    pub coh_gt: Vec<C64>,
    /// Full density matrix at every sample.
    pub states: Vec<DensityMatrix>,
}

impl PopulationTrace {
    fn with_capacity(n: usize) -> Self {
        PopulationTrace {
            times: Vec::with_capacity(n),
            rho_gg: Vec::with_capacity(n),
            rho_ee: Vec::with_capacity(n),
            rho_tt: Vec::with_capacity(n),
            coh_ge: Vec::with_capacity(n),
            coh_et: Vec::with_capacity(n),
            coh_gt: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: f64, rho: &DensityMatrix) {
        use Level::*;
        self.times.push(t);
        self.rho_gg.push(rho.population(G));
        self.rho_ee.push(rho.population(E));
        self.rho_tt.push(rho.population(T));
        self.coh_ge.push(rho.get(G, E));
        self.coh_et.push(rho.get(E, T));
        self.coh_gt.push(rho.get(G, T));
        self.states.push(*rho);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> DensityMatrix {
        self.states[k]
    }

    pub fn final_state(&self) -> DensityMatrix {
        self.state(self.len() - 1)
    }
}

fn check_step(rho: &DensityMatrix, t: f64, dt: f64) -> Result<()> {
    let report = is_physical(rho, STEP_TOL);
    match report.worst() {
        None => Ok(()),
        Some((check, defect)) => Err(Error::Unphysical {
            time: t,
            dt,
            check,
            defect,
        }),
    }
}

/// Integrates the master equation from `rho0` over `[0, t_end]` with
/// fixed-step RK4, sampling after every step.
///
/// The step is shrunk slightly if needed so that an integer number of steps
/// lands exactly on `t_end`. Time-dependent generators are evaluated at the
/// stage times t, t + dt/2 and t + dt.
pub fn propagate(
    rho0: &DensityMatrix,
    params: &AtomParams,
    drive: &DriveProfile,
    t_end: f64,
    dt: f64,
) -> Result<PopulationTrace> {
    params.validate()?;
    drive.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid("t_end", format!("must be finite and > 0, got {t_end}")));
    }
    let report = is_physical(rho0, 1e-9);
    if !report.is_physical() {
        return Err(Error::invalid("rho0", report.to_string()));
    }

    let parts = GeneratorParts::new(params, drive);
    let fixed = (!parts.is_time_dependent()).then(|| parts.at(0.0));
    let rhs = |t: f64, v: &SuperVector| match &fixed {
        Some(m) => m * v,
        None => parts.at(t) * v,
    };

    let (n, h) = rk4::steps_for(t_end, dt);
    let mut trace = PopulationTrace::with_capacity(n + 1);
    let mut v = rho0.to_vec();
    trace.push(0.0, rho0);
    for k in 0..n {
        let t = k as f64 * h;
        v = rk4::step(rhs, t, &v, h);
        let t_next = (k + 1) as f64 * h;
        let rho = DensityMatrix::from_vec(&v);
        check_step(&rho, t_next, h)?;
        trace.push(t_next, &rho);
    }
    Ok(trace)
}

/// Dimension of the numerical null space of a generator.
pub fn null_space_dimension(mat: &SuperMatrix) -> usize {
    let sv = mat.svd(false, false).singular_values;
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s < 1e-10 * scale).count()
}

/// Stationary state of the constant-drive master equation.
///
/// Solves the bordered system `[L  cᵀ; c  0] [x; μ] = [0; 1]` where `c` is the
/// trace covector; it is nonsingular exactly when the null space of `L` is
/// one-dimensional.
pub fn steady_state(params: &AtomParams) -> Result<DensityMatrix> {
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::invalid(
            "delta",
            "the lab-frame generator is time dependent for nonzero detuning; no stationary state",
        ));
    }
    let mat = build_generator(params, &DriveProfile::constant(params), 0.0).mat;
    let dim = null_space_dimension(&mat);
    if dim != 1 {
        return Err(Error::DegenerateSteadyState { dim });
    }
    let trace = Liouvillian::trace_covector();
    let mut bordered = SMatrix::<C64, 10, 10>::zeros();
    bordered.fixed_view_mut::<9, 9>(0, 0).copy_from(&mat);
    bordered.fixed_view_mut::<1, 9>(9, 0).copy_from(&trace);
    bordered.fixed_view_mut::<9, 1>(0, 9).copy_from(&trace.transpose());
    let mut rhs = SVector::<C64, 10>::zeros();
    rhs[9] = C64::from(1.0);
    let sol = bordered.lu().solve(&rhs).ok_or(Error::DegenerateSteadyState { dim })?;
    let raw = DensityMatrix::from_vec(&sol.fixed_rows::<9>(0).into_owned());
    let rho = DensityMatrix((raw.0 + raw.0.adjoint()).scale(0.5));
    let report = is_physical(&rho, 1e-9);
    match report.worst() {
        None => Ok(rho),
        Some((check, defect)) => Err(Error::Unphysical {
            time: f64::INFINITY,
            dt: 0.0,
            check,
            defect,
        }),
    }
}
