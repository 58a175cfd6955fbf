//! Cross-module checks: independent routes to the same physics must agree.

use threelevel::correlation::{qrt_correlation, spectrum_from_correlation, QrtNumerics};
use threelevel::lindblad::{propagate, steady_state};
use threelevel::spectrum::shape_distance;
use threelevel::trajectory::{default_grid, photon_trajectories, propagate_no_jump, single_photon_spectrum};
use threelevel::{AtomParams, DensityMatrix, DriveProfile, FrequencyGrid, Level, StateVector};

#[test]
fn regression_and_trajectory_spectra_agree() {
    // The trajectory spectrum |f(τ)|² and the regression spectrum S(ω)
    // have the same shape once Γ_t is small, so their normalized squares
    // agree as well.
    let p = AtomParams::new(5.0, 1.0, 0.0);
    let d = DriveProfile::constant(&p);
    let grid = default_grid(&p, &d, 40.0).unwrap();
    let traj = single_photon_spectrum(&p, &d, 40.0, &grid, 0.001).unwrap();

    let q = p.with_gamma_t(1e-4);
    let num = QrtNumerics::for_params(&q).unwrap();
    let qrt = spectrum_from_correlation(&qrt_correlation(&q, num.tau_max, num.dt).unwrap(), &grid).unwrap();
    let dist = shape_distance(&traj, &qrt).unwrap();
    assert!(dist.linf < 1e-3, "{dist:?}");
}

#[test]
fn pure_state_evolution_matches_density_matrix_without_decay() {
    let p = AtomParams::new(3.0, 0.0, 0.0).with_delta(0.7);
    let d = DriveProfile::exp_ramp(3.0, 0.5);
    let psi = propagate_no_jump(&StateVector::basis(Level::G), &p, &d, 8.0, 0.001).unwrap();
    let rho = propagate(&DensityMatrix::basis(Level::G), &p, &d, 8.0, 0.001).unwrap();
    for (s, r) in psi.psi.iter().zip(&rho.states).step_by(97) {
        for a in Level::ALL {
            for b in Level::ALL {
                let pure = s.amp(a) * s.amp(b).conj();
                assert!((pure - r.get(a, b)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn no_jump_norm_is_the_undecayed_population() {
    // Without repumping, 1 − ρ_tt is the probability that no photon has
    // been emitted, which is the no-jump norm.
    let p = AtomParams::new(4.0, 1.5, 0.0).with_delta(-1.0);
    let d = DriveProfile::exp_ramp(4.0, 2.0);
    let psi = propagate_no_jump(&StateVector::basis(Level::G), &p, &d, 20.0, 0.002).unwrap();
    let rho = propagate(&DensityMatrix::basis(Level::G), &p, &d, 20.0, 0.002).unwrap();
    for (n, tt) in psi.norm_sqr().iter().zip(&rho.rho_tt) {
        assert!((n - (1.0 - tt)).abs() < 1e-9);
    }
}

#[test]
fn photon_norms_sum_to_emitted_probability() {
    // Σ_j |f_j(τ)|² over a wide grid approximates ∫ |√Γ_e ψ_e|² dt, the
    // emitted probability, by Parseval on the window.
    let p = AtomParams::new(5.0, 1.0, 0.0);
    let d = DriveProfile::constant(&p);
    let grid = FrequencyGrid::new(40.0, 256).unwrap();
    let set = photon_trajectories(&p, &d, 40.0, &grid, 0.002).unwrap();
    let total: f64 = set.final_norms.iter().sum();
    assert!((total - 1.0).abs() < 0.01, "{total}");
}

#[test]
fn cycling_steady_state_balances_both_decays() {
    for gamma_t in [0.1, 2.0, 10.0] {
        let p = AtomParams::new(5.0, 1.0, gamma_t);
        let ss = steady_state(&p).unwrap();
        let flux = p.gamma_e * ss.population(Level::E) - p.gamma_t * ss.population(Level::T);
        assert!(flux.abs() < 1e-9, "gamma_t = {gamma_t}: {flux}");
    }
}
