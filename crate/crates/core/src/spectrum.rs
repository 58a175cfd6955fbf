//! Frequency grids, spectra and the shape measures used to compare them.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Symmetric frequency grid ω_j = j · 2π/τ, j = −n_half..=n_half.
///
/// The spacing is the Fourier resolution of an observation window of length τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    tau: f64,
    n_half: usize,
}

impl FrequencyGrid {
    pub fn new(tau: f64, n_half: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be finite and > 0, got {tau}")));
        }
        if n_half == 0 {
            return Err(Error::invalid("n_half", "must be positive"));
        }
        Ok(FrequencyGrid { tau, n_half })
    }

    /// Smallest grid on window `tau` whose span reaches ±`half_span`.
    pub fn covering(tau: f64, half_span: f64) -> Result<Self> {
        if !(half_span.is_finite() && half_span > 0.0) {
            return Err(Error::invalid(
                "half_span",
                format!("must be finite and > 0, got {half_span}"),
            ));
        }
        let n_half = (half_span * tau / (2.0 * PI)).ceil().max(1.0) as usize;
        Self::new(tau, n_half)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.tau
    }

    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn omega(&self, index: usize) -> f64 {
        (index as f64 - self.n_half as f64) * self.spacing()
    }

    pub fn omegas(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.omega(k))
    }
}

/// Spectrum samples S(ω_j) on a grid, with |S(ω_j)|².
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub grid: FrequencyGrid,
    pub s_values: Vec<C64>,
    pub abs2: Vec<f64>,
}

/// A local maximum of |S|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Position refined by a parabola through the three neighbouring samples.
    pub omega: f64,
    pub height: f64,
}

impl SpectrumResult {
    pub fn new(grid: FrequencyGrid, s_values: Vec<C64>) -> Self {
        assert_eq!(grid.len(), s_values.len(), "one sample per grid frequency");
        let abs2 = s_values.iter().map(|s| s.re * s.re + s.im * s.im).collect();
        SpectrumResult { grid, s_values, abs2 }
    }

    pub fn from_real(grid: FrequencyGrid, values: impl IntoIterator<Item = f64>) -> Self {
        Self::new(grid, values.into_iter().map(|v| C64::new(v, 0.0)).collect())
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.grid.omegas().collect()
    }

    pub fn max_abs2(&self) -> f64 {
        self.abs2.iter().copied().fold(0.0, f64::max)
    }

    /// Rescaled so that max |S| = 1. A spectrum that is zero everywhere is
    /// returned unchanged.
    pub fn normalized(&self) -> SpectrumResult {
        let peak = self.max_abs2().sqrt();
        if peak == 0.0 || !peak.is_finite() {
            return self.clone();
        }
        SpectrumResult::new(self.grid, self.s_values.iter().map(|s| s / peak).collect())
    }

    pub fn argmax(&self) -> usize {
        self.abs2
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    /// Interior local maxima of |S|², tallest first.
    pub fn peaks(&self) -> Vec<Peak> {
        let a = &self.abs2;
        let h = self.grid.spacing();
        let mut out: Vec<Peak> = (1..a.len().saturating_sub(1))
            .filter(|&k| a[k] > a[k - 1] && a[k] >= a[k + 1])
            .map(|k| {
                let (l, c, r) = (a[k - 1], a[k], a[k + 1]);
                let curv = l - 2.0 * c + r;
                let shift = if curv < 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
                Peak {
                    index: k,
                    omega: self.grid.omega(k) + shift * h,
                    height: c,
                }
            })
            .collect();
        out.sort_by(|x, y| y.height.total_cmp(&x.height));
        out
    }

    /// The two tallest peaks ordered by frequency, if there are two.
    pub fn doublet(&self) -> Option<(Peak, Peak)> {
        let peaks = self.peaks();
        if peaks.len() < 2 {
            return None;
        }
        let (a, b) = (peaks[0], peaks[1]);
        Some(if a.omega < b.omega { (a, b) } else { (b, a) })
    }

    pub fn peak_separation(&self) -> Option<f64> {
        self.doublet().map(|(lo, hi)| hi.omega - lo.omega)
    }
}

/// Fraction of Σ|S|² carried by grid points with |ω_j| < `half_width`.
pub fn band_weight(spec: &SpectrumResult, half_width: f64) -> Result<f64> {
    if !(half_width > 0.0) {
        return Err(Error::invalid("half_width", format!("must be > 0, got {half_width}")));
    }
    let total: f64 = spec.abs2.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let inside: f64 = spec
        .grid
        .omegas()
        .zip(&spec.abs2)
        .filter(|(w, _)| w.abs() < half_width)
        .map(|(_, a)| a)
        .sum();
    Ok(inside / total)
}

/// L∞ and L2 distances between the peak-normalized |S|² of two spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeDistance {
    pub linf: f64,
    pub l2: f64,
}

pub fn shape_distance(a: &SpectrumResult, b: &SpectrumResult) -> Result<ShapeDistance> {
    if a.grid != b.grid {
        return Err(Error::invalid("grid", "spectra must share an identical frequency grid"));
    }
    let (na, nb) = (a.normalized(), b.normalized());
    let mut linf = 0.0_f64;
    let mut sq = 0.0;
    for (x, y) in na.abs2.iter().zip(&nb.abs2) {
        let d = (x - y).abs();
        linf = linf.max(d);
        sq += d * d;
    }
    Ok(ShapeDistance {
        linf,
        l2: (sq / na.abs2.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_layout() {
        let g = FrequencyGrid::new(40.0, 3).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.omega(3), 0.0);
        assert_abs_diff_eq!(g.omega(0), -3.0 * 2.0 * PI / 40.0, epsilon = 1e-15);
        assert!(FrequencyGrid::new(0.0, 3).is_err());
        assert!(FrequencyGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn covering_grid_reaches_span() {
        let g = FrequencyGrid::covering(40.0, 10.0).unwrap();
        assert_eq!(g.n_half(), 64);
        assert!(g.omega(g.len() - 1) >= 10.0);
    }

    #[test]
    fn band_weight_of_a_delta_at_zero() {
        let g = FrequencyGrid::new(40.0, 20).unwrap();
        let s = SpectrumResult::from_real(g, g.omegas().map(|w| if w == 0.0 { 3.0 } else { 0.0 }));
        assert_eq!(band_weight(&s, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn band_weight_excludes_a_distant_doublet() {
        let g = FrequencyGrid::new(40.0, 64).unwrap();
        let s = SpectrumResult::from_real(
            g,
            g.omegas()
                .map(|w| 1.0 / (0.0625 + (w - 2.5).powi(2)) + 1.0 / (0.0625 + (w + 2.5).powi(2))),
        );
        let bw = band_weight(&s, 0.5).unwrap();
        assert!(bw < 0.01, "{bw}");
        assert!(band_weight(&s, 0.0).is_err());
    }

    #[test]
    fn doublet_peaks_are_refined() {
        let g = FrequencyGrid::new(40.0, 64).unwrap();
        let lor = |w: f64, c: f64| 1.0 / (0.0625 + (w - c).powi(2));
        let s = SpectrumResult::from_real(g, g.omegas().map(|w| (lor(w, 2.4) + lor(w, -2.4)).sqrt()));
        let (lo, hi) = s.doublet().unwrap();
        assert!((hi.omega - 2.4).abs() < 0.3 * g.spacing());
        assert!((lo.omega + 2.4).abs() < 0.3 * g.spacing());
        assert_abs_diff_eq!(s.normalized().max_abs2(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn shape_distance_requires_same_grid() {
        let a = SpectrumResult::from_real(FrequencyGrid::new(40.0, 4).unwrap(), vec![1.0; 9]);
        let b = SpectrumResult::from_real(FrequencyGrid::new(20.0, 4).unwrap(), vec![1.0; 9]);
        assert!(shape_distance(&a, &b).is_err());
        let d = shape_distance(&a, &a).unwrap();
        assert_eq!(d.linf, 0.0);
    }

    proptest! {
        #[test]
        fn spacing_times_tau_is_two_pi(tau in 0.1f64..1000.0, n in 1usize..500) {
            let g = FrequencyGrid::new(tau, n).unwrap();
            prop_assert!((g.spacing() * tau - 2.0 * PI).abs() < 1e-13);
            prop_assert_eq!(g.len(), 2 * n + 1);
            for k in 0..g.len() {
                prop_assert_eq!(g.omega(k), -g.omega(g.len() - 1 - k));
            }
        }

        #[test]
        fn abs2_matches_components(re in proptest::collection::vec(-1e3f64..1e3, 5), im in proptest::collection::vec(-1e3f64..1e3, 5)) {
            let g = FrequencyGrid::new(1.0, 2).unwrap();
            let s = SpectrumResult::new(g, re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect());
            for (v, a) in s.s_values.iter().zip(&s.abs2) {
                prop_assert_eq!(*a, v.re * v.re + v.im * v.im);
                prop_assert!(*a >= 0.0);
            }
        }
    }
}
