use nalgebra::SVector;
use num_complex::Complex64 as C64;

/// Stage states of one classical Runge-Kutta step, evaluated at
/// t, t + dt/2, t + dt/2 and t + dt.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stages<const N: usize> {
    pub states: [SVector<C64, N>; 4],
}

/// One classical fourth-order Runge-Kutta step of dy/dt = f(t, y).
pub(crate) fn step<const N: usize, F>(f: F, t: f64, y: &SVector<C64, N>, dt: f64) -> SVector<C64, N>
where
    F: Fn(f64, &SVector<C64, N>) -> SVector<C64, N>,
{
    step_with_stages(f, t, y, dt).0
}

/// As [`step`], also returning the stage states.
pub(crate) fn step_with_stages<const N: usize, F>(
    f: F,
    t: f64,
    y: &SVector<C64, N>,
    dt: f64,
) -> (SVector<C64, N>, Stages<N>)
where
    F: Fn(f64, &SVector<C64, N>) -> SVector<C64, N>,
{
    let half = 0.5 * dt;
    let y1 = *y;
    let k1 = f(t, &y1);
    let y2 = y + k1 * C64::from(half);
    let k2 = f(t + half, &y2);
    let y3 = y + k2 * C64::from(half);
    let k3 = f(t + half, &y3);
    let y4 = y + k3 * C64::from(dt);
    let k4 = f(t + dt, &y4);
    let next = y + (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(dt / 6.0);
    (
        next,
        Stages {
            states: [y1, y2, y3, y4],
        },
    )
}

/// Number of fixed steps of size close to `dt` that exactly cover `[0, t_end]`,
/// and the adjusted step.
pub(crate) fn steps_for(t_end: f64, dt: f64) -> (usize, f64) {
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}
