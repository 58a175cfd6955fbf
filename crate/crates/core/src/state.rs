//! Level basis, pure and mixed states, and physicality checks.
//!
//! Every vector and matrix in the crate uses the basis order (g, e, t).
//! Density matrices vectorize row-major: `vec[3 * i + j] = rho[(i, j)]`.

use std::fmt;

use nalgebra::{Matrix3, SVector, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// The three internal states of the atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Ground state |g⟩, the state atoms enter the laser in.
    G = 0,
    /// Excited state |e⟩.
    E = 1,
    /// Trap state |t⟩.
    T = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::T];

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Position of the element (self, col) in the row-major vectorization.
    pub const fn vec_index(self, col: Level) -> usize {
        3 * self.index() + col.index()
    }
}

/// Pure state of the atom, amplitudes ordered (g, e, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub Vector3<C64>);

impl StateVector {
    pub fn new(g: C64, e: C64, t: C64) -> Self {
        StateVector(Vector3::new(g, e, t))
    }

    pub fn basis(level: Level) -> Self {
        let mut v = Vector3::zeros();
        v[level.index()] = C64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn amp(&self, level: Level) -> C64 {
        self.0[level.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Density matrix of the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix3<C64>);

impl DensityMatrix {
    /// |level⟩⟨level|
    pub fn basis(level: Level) -> Self {
        dm_from_pure(&StateVector::basis(level)).expect("basis state is nonzero")
    }

    pub fn get(&self, row: Level, col: Level) -> C64 {
        self.0[(row.index(), col.index())]
    }

    pub fn population(&self, level: Level) -> f64 {
        self.get(level, level).re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn to_vec(&self) -> SVector<C64, 9> {
        SVector::from_fn(|k, _| self.0[(k / 3, k % 3)])
    }

    pub fn from_vec(v: &SVector<C64, 9>) -> Self {
        DensityMatrix(Matrix3::from_fn(|i, j| v[3 * i + j]))
    }

    /// max_ij |ρ_ij − conj(ρ_ji)|
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.0;
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part (ρ + ρ†)/2.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.0 + self.0.adjoint()).scale(0.5);
        h.symmetric_eigenvalues().min()
    }
}

/// |ψ⟩⟨ψ| scaled to unit trace.
pub fn dm_from_pure(psi: &StateVector) -> Result<DensityMatrix> {
    let n = psi.norm_sqr();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid("psi", "state vector must be nonzero and finite"));
    }
    Ok(DensityMatrix((psi.0 * psi.0.adjoint()).unscale(n)))
}

/// Outcome of [`is_physical`]: the measured defect of each check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub tol: f64,
    /// max |ρ_ij − conj(ρ_ji)|
    pub hermiticity: f64,
    /// |Tr ρ − 1|
    pub trace: f64,
    /// max(0, −λ_min); zero for positive semidefinite matrices.
    pub positivity: f64,
}

impl PhysicalityReport {
    pub fn is_physical(&self) -> bool {
        self.hermiticity < self.tol && self.trace < self.tol && self.positivity <= self.tol
    }

    /// Name and size of every violated check.
    pub fn violations(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if self.hermiticity >= self.tol {
            out.push(("hermiticity", self.hermiticity));
        }
        if self.trace >= self.tol {
            out.push(("trace", self.trace));
        }
        if self.positivity > self.tol {
            out.push(("positivity", self.positivity));
        }
        out
    }

    /// The largest violation, if any.
    pub fn worst(&self) -> Option<(&'static str, f64)> {
        self.violations().into_iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

impl fmt::Display for PhysicalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_physical() {
            return write!(f, "physical (tol {:.1e})", self.tol);
        }
        write!(f, "unphysical (tol {:.1e}):", self.tol)?;
        for (name, v) in self.violations() {
            write!(f, " {name} violation {v:.3e};")?;
        }
        Ok(())
    }
}

/// Checks Hermiticity, unit trace and positivity of `rho` within `tol`.
pub fn is_physical(rho: &DensityMatrix, tol: f64) -> PhysicalityReport {
    PhysicalityReport {
        tol,
        hermiticity: rho.hermiticity_defect(),
        trace: (rho.trace() - C64::new(1.0, 0.0)).norm(),
        positivity: (-rho.min_eigenvalue()).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_order_is_fixed() {
        assert_eq!(Level::G.index(), 0);
        assert_eq!(Level::E.index(), 1);
        assert_eq!(Level::T.index(), 2);
        assert_eq!(Level::T.vec_index(Level::E), 7);
    }

    #[test]
    fn pure_ground_state() {
        let rho = dm_from_pure(&StateVector::basis(Level::G)).unwrap();
        assert_eq!(rho.population(Level::G), 1.0);
        for (i, j) in [(0, 1), (1, 1), (2, 2), (1, 2), (0, 2)] {
            assert_eq!(rho.0[(i, j)], c(0.0, 0.0));
        }
    }

    #[test]
    fn equal_superposition() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = dm_from_pure(&StateVector::new(c(s, 0.0), c(s, 0.0), c(0.0, 0.0))).unwrap();
        for (a, b) in [
            (Level::G, Level::G),
            (Level::E, Level::E),
            (Level::G, Level::E),
            (Level::E, Level::G),
        ] {
            assert_abs_diff_eq!(rho.get(a, b).re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(rho.get(a, b).im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn normalization_absorbs_scale() {
        let rho = dm_from_pure(&StateVector::new(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0))).unwrap();
        assert_eq!(rho.population(Level::T), 1.0);
        assert_eq!(rho.trace(), c(1.0, 0.0));
    }

    #[test]
    fn zero_vector_rejected() {
        let zero = StateVector::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(dm_from_pure(&zero).is_err());
    }

    #[test]
    fn maximally_mixed_is_physical() {
        let rho = DensityMatrix(Matrix3::identity().unscale(3.0));
        assert!(is_physical(&rho, 1e-12).is_physical());
    }

    #[test]
    fn negative_population_flagged() {
        let rho = DensityMatrix(Matrix3::from_diagonal(&Vector3::new(
            c(1.5, 0.0),
            c(-0.5, 0.0),
            c(0.0, 0.0),
        )));
        let report = is_physical(&rho, 1e-10);
        assert!(!report.is_physical());
        assert_abs_diff_eq!(report.positivity, 0.5, epsilon = 1e-12);
        assert_eq!(report.worst().unwrap().0, "positivity");
    }

    #[test]
    fn asymmetry_flagged() {
        let mut m = Matrix3::from_diagonal(&Vector3::new(c(0.4, 0.0), c(0.3, 0.0), c(0.3, 0.0)));
        m[(0, 1)] = c(0.0, 1e-6);
        let report = is_physical(&DensityMatrix(m), 1e-10);
        assert!(!report.is_physical());
        assert_abs_diff_eq!(report.hermiticity, 1e-6, epsilon = 1e-18);
        assert!(report.to_string().contains("hermiticity"));
    }

    #[test]
    fn vectorization_is_row_major() {
        let m = Matrix3::from_fn(|i, j| c(i as f64, j as f64));
        let v = DensityMatrix(m).to_vec();
        assert_eq!(v[5], c(1.0, 2.0));
        assert_eq!(DensityMatrix::from_vec(&v).0, m);
    }

    proptest! {
        #[test]
        fn pure_states_are_physical(parts in proptest::array::uniform6(-1.0f64..1.0)) {
            let psi = StateVector::new(c(parts[0], parts[1]), c(parts[2], parts[3]), c(parts[4], parts[5]));
            prop_assume!(psi.norm_sqr() > 1e-6);
            let rho = dm_from_pure(&psi).unwrap();
            let report = is_physical(&rho, 1e-12);
            prop_assert!(report.is_physical(), "{}", report);
        }
    }
}
