//! Scenario execution. Every result is computed in memory first; files are
//! written only once the whole scenario has succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use threelevel::correlation::{
    analytic_spectrum, gamma_t_limit_spectrum, qrt_correlation, spectrum_from_correlation, QrtNumerics,
};
use threelevel::lindblad::{propagate, PopulationTrace};
use threelevel::trajectory::{default_grid, single_photon_spectrum, transient_spectrum};
use threelevel::{band_weight, AtomParams, DensityMatrix, DriveProfile, FrequencyGrid, Level, SpectrumResult};

use crate::config::{Mode, ScenarioConfig, Sweep};
use crate::csv::{fmt_num, populations_csv, spectrum_csv, table_csv};
use crate::plot::{LineChart, Series};
use crate::report::ComparisonReport;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{stage}: {source}")]
    Model {
        stage: &'static str,
        #[source]
        source: threelevel::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Model { source, .. } if source.is_numerical() => 3,
            RunError::Model { .. } => 2,
            RunError::Io { .. } => 4,
        }
    }
}

fn at(stage: &'static str) -> impl FnOnce(threelevel::Error) -> RunError {
    move |source| RunError::Model { stage, source }
}

/// A file to be written, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Human-readable summary lines for stdout.
    pub summary: Vec<String>,
}

impl Outcome {
    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact {
            name: name.into(),
            contents,
        });
    }
}

enum PointResult {
    Populations(PopulationTrace),
    Spectrum(SpectrumResult),
}

fn grid_for(cfg: &ScenarioConfig, atom: &AtomParams, drive: &DriveProfile) -> threelevel::Result<FrequencyGrid> {
    match cfg.numerics.n_half {
        Some(n) => FrequencyGrid::new(cfg.numerics.tau, n),
        None => default_grid(atom, drive, cfg.numerics.tau),
    }
}

fn run_populations(cfg: &ScenarioConfig, atom: &AtomParams, drive: &DriveProfile) -> Result<PopulationTrace, RunError> {
    propagate(
        &DensityMatrix::basis(Level::G),
        atom,
        drive,
        cfg.numerics.t_end,
        cfg.numerics.dt,
    )
    .map_err(at("lindblad-dynamics"))
}

fn run_qrt(
    cfg: &ScenarioConfig,
    atom: &AtomParams,
    grid: &FrequencyGrid,
    summary: &mut Vec<String>,
) -> Result<SpectrumResult, RunError> {
    if atom.gamma_t > 0.0 {
        let num = QrtNumerics::for_params(atom).map_err(at("correlation-spectrum"))?;
        let corr =
            qrt_correlation(atom, num.tau_max, num.dt.min(cfg.numerics.dt)).map_err(at("correlation-spectrum"))?;
        let spec = spectrum_from_correlation(&corr, grid).map_err(at("correlation-spectrum"))?;
        return Ok(spec.normalized());
    }
    let (spec, report) =
        gamma_t_limit_spectrum(atom, grid, &cfg.numerics.gamma_t_sequence).map_err(at("correlation-spectrum"))?;
    summary.push(format!(
        "gamma_t -> 0 limit over {:?}: successive L-inf differences {:?} ({:?})",
        report.gamma_t, report.differences, report.status
    ));
    Ok(spec)
}

fn run_spectrum(
    cfg: &ScenarioConfig,
    mode: Mode,
    atom: &AtomParams,
    drive: &DriveProfile,
    summary: &mut Vec<String>,
) -> Result<SpectrumResult, RunError> {
    let grid = grid_for(cfg, atom, drive).map_err(at("harness-cli"))?;
    let (tau, dt) = (cfg.numerics.tau, cfg.numerics.dt);
    match mode {
        Mode::SpectrumAnalytic => Ok(analytic_spectrum(atom, &grid)
            .map_err(at("correlation-spectrum"))?
            .normalized()),
        Mode::SpectrumQrt => run_qrt(cfg, atom, &grid, summary),
        Mode::SpectrumTrajectory => {
            single_photon_spectrum(atom, drive, tau, &grid, dt).map_err(at("trajectory-spectrum"))
        }
        Mode::SpectrumTransient => transient_spectrum(atom, drive, tau, &grid, dt).map_err(at("trajectory-spectrum")),
        Mode::Populations | Mode::Compare | Mode::Sweep => unreachable!("not a spectrum mode"),
    }
}

fn run_point(
    cfg: &ScenarioConfig,
    mode: Mode,
    atom: &AtomParams,
    drive: &DriveProfile,
    summary: &mut Vec<String>,
) -> Result<PointResult, RunError> {
    match mode {
        Mode::Populations => run_populations(cfg, atom, drive).map(PointResult::Populations),
        _ => run_spectrum(cfg, mode, atom, drive, summary).map(PointResult::Spectrum),
    }
}

fn population_chart(title: &str, trace: &PopulationTrace, every: usize) -> LineChart {
    let idx = sample_indices(trace.len(), every);
    let pick = |v: &[f64]| idx.iter().map(|&k| v[k]).collect::<Vec<_>>();
    let t = pick(&trace.times);
    LineChart::new(title, "t", "population")
        .with(Series::new("rho_gg", t.clone(), pick(&trace.rho_gg)))
        .with(Series::new("rho_ee", t.clone(), pick(&trace.rho_ee)))
        .with(Series::new("rho_tt", t, pick(&trace.rho_tt)))
}

fn sample_indices(len: usize, every: usize) -> Vec<usize> {
    (0..len).filter(|k| k % every == 0 || *k == len - 1).collect()
}

/// Ω(t) at the written population samples.
fn drive_samples(trace: &PopulationTrace, drive: &DriveProfile, every: usize) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = sample_indices(trace.len(), every)
        .into_iter()
        .map(|k| trace.times[k])
        .collect();
    let omega = t.iter().map(|&t| drive.evaluate(t)).collect();
    (t, omega)
}

fn drive_csv(t: &[f64], omega: &[f64]) -> String {
    let rows: Vec<Vec<String>> = t
        .iter()
        .zip(omega)
        .map(|(&a, &b)| vec![fmt_num(a), fmt_num(b)])
        .collect();
    table_csv(&["t", "omega"], &rows)
}

fn spectrum_series(label: impl Into<String>, spec: &SpectrumResult) -> Series {
    let n = spec.normalized();
    Series::new(label, n.omegas(), n.abs2)
}

fn describe_spectrum(label: &str, spec: &SpectrumResult) -> String {
    let peaks = match spec.doublet() {
        Some((lo, hi)) => format!(
            "peaks at {:+.4} and {:+.4}, separation {:.4}",
            lo.omega,
            hi.omega,
            hi.omega - lo.omega
        ),
        None => "no doublet".into(),
    };
    let bw = band_weight(spec, 0.5).unwrap_or(f64::NAN);
    format!(
        "{label}: {} grid points, spacing {:.4}, {peaks}, band_weight(0.5) = {bw:.4}",
        spec.grid.len(),
        spec.grid.spacing()
    )
}

/// Runs `cfg` and returns the files it produces, without touching the disk.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let mut out = Outcome::default();
    let (atom, drive) = (cfg.atom, cfg.drive);
    match cfg.mode {
        Mode::Populations => {
            let trace = run_populations(cfg, &atom, &drive)?;
            out.summary.push(format!(
                "final populations at t = {}: rho_gg = {:.6}, rho_ee = {:.6}, rho_tt = {:.6}",
                trace.times.last().unwrap(),
                trace.rho_gg.last().unwrap(),
                trace.rho_ee.last().unwrap(),
                trace.rho_tt.last().unwrap()
            ));
            out.file("populations.csv", populations_csv(&trace, cfg.output.every));
            if cfg.output.plot {
                out.file(
                    "populations.svg",
                    population_chart("Populations", &trace, cfg.output.every).to_svg(),
                );
            }
            if !drive.is_constant() {
                let (t, omega) = drive_samples(&trace, &drive, cfg.output.every);
                out.file("drive.csv", drive_csv(&t, &omega));
                if cfg.output.plot {
                    let chart = LineChart::new("Drive", "t", "Omega(t)").with(Series::new("Omega", t, omega));
                    out.file("drive.svg", chart.to_svg());
                }
            }
        }
        Mode::SpectrumAnalytic | Mode::SpectrumQrt | Mode::SpectrumTrajectory | Mode::SpectrumTransient => {
            let spec = run_spectrum(cfg, cfg.mode, &atom, &drive, &mut out.summary)?;
            out.summary.push(describe_spectrum(cfg.mode.name(), &spec));
            out.file("spectrum.csv", spectrum_csv(&spec));
            if cfg.output.plot {
                let chart = LineChart::new(
                    format!("Emission spectrum ({})", cfg.mode.name()),
                    "omega",
                    "normalized |S|^2",
                )
                .with(spectrum_series(cfg.mode.name(), &spec));
                out.file("spectrum.svg", chart.to_svg());
            }
        }
        Mode::Compare => compare(cfg, &mut out)?,
        Mode::Sweep => sweep(cfg, cfg.sweep.as_ref().expect("validated sweep"), &mut out)?,
    }
    Ok(out)
}

fn compare(cfg: &ScenarioConfig, out: &mut Outcome) -> Result<(), RunError> {
    let (atom, drive) = (cfg.atom, cfg.drive);
    let modes = [Mode::SpectrumAnalytic, Mode::SpectrumQrt, Mode::SpectrumTrajectory];
    let results = modes
        .par_iter()
        .map(|&m| {
            let mut notes = Vec::new();
            run_spectrum(cfg, m, &atom, &drive, &mut notes).map(|s| (s, notes))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = ["analytic", "qrt", "trajectory"];
    for ((spec, notes), label) in results.iter().zip(labels) {
        out.summary.extend(notes.iter().cloned());
        out.file(format!("spectrum_{label}.csv"), spectrum_csv(spec));
    }
    let pairs: Vec<(&str, &SpectrumResult)> = labels.iter().copied().zip(results.iter().map(|r| &r.0)).collect();
    let report = ComparisonReport::build(&pairs, cfg.numerics.tolerance).map_err(at("harness-cli"))?;
    out.summary.push(report.to_string().trim_end().to_string());
    out.summary.push(format!(
        "comparison {}",
        if report.passed() { "passed" } else { "failed" }
    ));
    out.file("comparison.csv", report.to_csv());
    if cfg.output.plot {
        let chart = pairs.iter().fold(
            LineChart::new("Spectrum by method", "omega", "normalized |S|^2"),
            |c, (l, s)| c.with(spectrum_series(*l, s)),
        );
        out.file("comparison.svg", chart.to_svg());
    }
    Ok(())
}

fn sweep(cfg: &ScenarioConfig, sw: &Sweep, out: &mut Outcome) -> Result<(), RunError> {
    let param = sw.parameter.name();
    let points = cfg.points();
    let results = points
        .par_iter()
        .map(|(atom, drive, mode)| {
            let mut notes = Vec::new();
            run_point(cfg, *mode, atom, drive, &mut notes).map(|r| (r, notes))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut drive_chart = LineChart::new(format!("Drive over {param}"), "t", "Omega(t)");
    let mut chart_title = format!("Sweep over {param}");
    let mut chart = None::<LineChart>;
    let header: Vec<&str>;
    match sw.kind {
        Mode::Populations => {
            header = vec![param, "rho_gg_final", "rho_ee_final", "rho_tt_final"];
            chart_title.push_str(": rho_tt");
        }
        _ => {
            header = vec![param, "peak_lo", "peak_hi", "separation", "band_weight_0.5"];
            chart_title.push_str(&format!(": {}", sw.kind.name()));
        }
    }
    for ((&value, (result, notes)), (_, drive, _)) in sw.values.iter().zip(&results).zip(&points) {
        out.summary
            .extend(notes.iter().map(|n| format!("{param} = {value}: {n}")));
        let tag = format!("{param}_{value}");
        let c = chart.take().unwrap_or_else(|| {
            let y = if sw.kind == Mode::Populations {
                "rho_tt"
            } else {
                "normalized |S|^2"
            };
            let x = if sw.kind == Mode::Populations { "t" } else { "omega" };
            LineChart::new(chart_title.clone(), x, y)
        });
        match result {
            PointResult::Populations(trace) => {
                out.summary.push(format!(
                    "{param} = {value}: final rho_gg = {:.6}, rho_ee = {:.6}, rho_tt = {:.6}",
                    trace.rho_gg.last().unwrap(),
                    trace.rho_ee.last().unwrap(),
                    trace.rho_tt.last().unwrap()
                ));
                out.file(
                    format!("populations_{tag}.csv"),
                    populations_csv(trace, cfg.output.every),
                );
                if cfg.output.plot {
                    let title = format!("Populations, {param} = {value}");
                    out.file(
                        format!("populations_{tag}.svg"),
                        population_chart(&title, trace, cfg.output.every).to_svg(),
                    );
                }
                rows.push(vec![
                    fmt_num(value),
                    fmt_num(*trace.rho_gg.last().unwrap()),
                    fmt_num(*trace.rho_ee.last().unwrap()),
                    fmt_num(*trace.rho_tt.last().unwrap()),
                ]);
                if !drive.is_constant() {
                    let (t, omega) = drive_samples(trace, drive, cfg.output.every);
                    out.file(format!("drive_{tag}.csv"), drive_csv(&t, &omega));
                    drive_chart = drive_chart.with(Series::new(format!("{param} = {value}"), t, omega));
                }
                let idx = sample_indices(trace.len(), cfg.output.every);
                chart = Some(c.with(Series::new(
                    format!("{param} = {value}"),
                    idx.iter().map(|&k| trace.times[k]).collect(),
                    idx.iter().map(|&k| trace.rho_tt[k]).collect(),
                )));
            }
            PointResult::Spectrum(spec) => {
                out.summary.push(describe_spectrum(&format!("{param} = {value}"), spec));
                out.file(format!("spectrum_{tag}.csv"), spectrum_csv(spec));
                let doublet = spec.doublet();
                let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
                rows.push(vec![
                    fmt_num(value),
                    opt(doublet.map(|d| d.0.omega)),
                    opt(doublet.map(|d| d.1.omega)),
                    opt(spec.peak_separation()),
                    fmt_num(band_weight(spec, 0.5).map_err(at("harness-cli"))?),
                ]);
                chart = Some(c.with(spectrum_series(format!("{param} = {value}"), spec)));
            }
        }
    }
    out.file("sweep_summary.csv", table_csv(&header, &rows));
    if cfg.output.plot {
        if let Some(c) = chart {
            out.file("sweep.svg", c.to_svg());
        }
        if !drive_chart.series.is_empty() {
            out.file("drive.svg", drive_chart.to_svg());
        }
    }
    Ok(())
}

/// Writes all artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
