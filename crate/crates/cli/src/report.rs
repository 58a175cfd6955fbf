//! Cross-method comparison of spectra computed on one frequency grid.

use std::fmt;

use threelevel::spectrum::shape_distance;
use threelevel::{band_weight, SpectrumResult};

use crate::csv::{fmt_num, table_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub label: String,
    pub peaks: Option<(f64, f64)>,
    pub separation: Option<f64>,
    /// Distances of normalized |S|² to the reference method.
    pub linf: f64,
    pub l2: f64,
    pub band_weight: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub reference: String,
    pub tolerance: f64,
    pub methods: Vec<MethodSummary>,
}

impl ComparisonReport {
    /// Compares every spectrum against the first one. All spectra must share
    /// the reference grid.
    pub fn build(spectra: &[(&str, &SpectrumResult)], tolerance: f64) -> threelevel::Result<Self> {
        let (ref_label, reference) = spectra[0];
        let methods = spectra
            .iter()
            .map(|&(label, spec)| {
                let d = shape_distance(spec, reference)?;
                let doublet = spec.doublet();
                Ok(MethodSummary {
                    label: label.to_string(),
                    peaks: doublet.map(|(lo, hi)| (lo.omega, hi.omega)),
                    separation: spec.peak_separation(),
                    linf: d.linf,
                    l2: d.l2,
                    band_weight: band_weight(spec, 0.5)?,
                    pass: d.linf < tolerance,
                })
            })
            .collect::<threelevel::Result<Vec<_>>>()?;
        Ok(ComparisonReport {
            reference: ref_label.to_string(),
            tolerance,
            methods,
        })
    }

    pub fn passed(&self) -> bool {
        self.methods.iter().all(|m| m.pass)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let rows: Vec<Vec<String>> = self
            .methods
            .iter()
            .map(|m| {
                vec![
                    m.label.clone(),
                    opt(m.peaks.map(|p| p.0)),
                    opt(m.peaks.map(|p| p.1)),
                    opt(m.separation),
                    fmt_num(m.linf),
                    fmt_num(m.l2),
                    fmt_num(m.band_weight),
                    fmt_num(self.tolerance),
                    if m.pass { "pass" } else { "fail" }.to_string(),
                ]
            })
            .collect();
        table_csv(
            &[
                "method",
                "peak_lo",
                "peak_hi",
                "separation",
                "linf",
                "l2",
                "band_weight_0.5",
                "tolerance",
                "result",
            ],
            &rows,
        )
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "normalized |S|^2 compared against `{}`, L-inf tolerance {}",
            self.reference, self.tolerance
        )?;
        for m in &self.methods {
            let peaks = match m.peaks {
                Some((lo, hi)) => format!("{lo:+.4} / {hi:+.4}"),
                None => "none".into(),
            };
            writeln!(
                f,
                "  {:<12} peaks {peaks:<18} L-inf {:.4}  L2 {:.4}  band weight {:.4}  {}",
                m.label,
                m.linf,
                m.l2,
                m.band_weight,
                if m.pass { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
