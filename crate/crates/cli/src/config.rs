//! Scenario configuration: a TOML document, overridden by command-line flags,
//! resolved into a fully validated [`ScenarioConfig`].

use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;
use threelevel::{omega_eff, AtomParams, DriveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Populations,
    SpectrumAnalytic,
    SpectrumQrt,
    SpectrumTrajectory,
    SpectrumTransient,
    Compare,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Populations => "populations",
            Mode::SpectrumAnalytic => "spectrum-analytic",
            Mode::SpectrumQrt => "spectrum-qrt",
            Mode::SpectrumTrajectory => "spectrum-trajectory",
            Mode::SpectrumTransient => "spectrum-transient",
            Mode::Compare => "compare",
            Mode::Sweep => "sweep",
        }
    }

    fn needs_resonant_constant_drive(self) -> bool {
        matches!(self, Mode::SpectrumAnalytic | Mode::SpectrumQrt | Mode::Compare)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    Constant,
    ExpRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepParameter {
    Rabi,
    GammaE,
    GammaT,
    Delta,
    RiseTime,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Rabi => "rabi",
            SweepParameter::GammaE => "gamma_e",
            SweepParameter::GammaT => "gamma_t",
            SweepParameter::Delta => "delta",
            SweepParameter::RiseTime => "rise_time",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    #[serde(default)]
    atom: RawAtom,
    #[serde(default)]
    drive: RawDrive,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    output: RawOutput,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    rabi: Option<f64>,
    gamma_e: Option<f64>,
    gamma_t: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    kind: Option<DriveKind>,
    omega_max: Option<f64>,
    rise_time: Option<f64>,
    t_start: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    dt: Option<f64>,
    t_end: Option<f64>,
    tau: Option<f64>,
    n_half: Option<i64>,
    gamma_t_sequence: Option<Vec<f64>>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    plot: Option<bool>,
    every: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: Option<SweepParameter>,
    values: Option<Vec<f64>>,
    kind: Option<Mode>,
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Scenario file (TOML). Missing keys take their defaults.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory [default: output]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write SVG plots
    #[arg(long)]
    pub plot: bool,
    /// Rabi frequency Ω; also the constant drive amplitude [default: 5]
    #[arg(long, allow_negative_numbers = true)]
    pub rabi: Option<f64>,
    /// Decay rate Γ_e of |e⟩ → |t⟩ [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_e: Option<f64>,
    /// Decay rate Γ_t of |t⟩ → |g⟩ [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_t: Option<f64>,
    /// Laser detuning δ [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Drive profile [default: constant]
    #[arg(long, value_enum)]
    pub drive: Option<DriveKind>,
    /// Final amplitude of the exponential ramp [default: rabi]
    #[arg(long, allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    /// Rise time of the exponential ramp (required for exp-ramp)
    #[arg(long, allow_negative_numbers = true)]
    pub rise_time: Option<f64>,
    /// Switch-on time of the exponential ramp [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub t_start: Option<f64>,
    /// Integrator step [default: 0.001]
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// End time of population runs [default: 40]
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Observation window of the spectrum; sets the grid spacing 2π/τ [default: 40]
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Grid half-size; the grid is ω_j = j·2π/τ for |j| ≤ n_half [default: covers ±2√(Ω² + δ²)]
    #[arg(long, allow_negative_numbers = true)]
    pub n_half: Option<i64>,
    /// Decreasing Γ_t values for the Γ_t → 0 limit of the QRT spectrum [default: 1e-3,1e-4,1e-5]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub gamma_t_sequence: Option<Vec<f64>>,
    /// L∞ tolerance of the cross-method comparison [default: 0.05]
    #[arg(long, allow_negative_numbers = true)]
    pub tolerance: Option<f64>,
    /// Write every n-th sample of population runs [default: 20]
    #[arg(long, allow_negative_numbers = true)]
    pub every: Option<i64>,
    /// Swept parameter (sweep mode)
    #[arg(long, value_enum)]
    pub sweep_parameter: Option<SweepParameter>,
    /// Comma-separated values of the swept parameter (sweep mode)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sweep_values: Option<Vec<f64>>,
    /// Mode run at every sweep point [default: spectrum-transient]
    #[arg(long, value_enum)]
    pub sweep_kind: Option<Mode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub dt: f64,
    pub t_end: f64,
    pub tau: f64,
    pub n_half: Option<usize>,
    pub gamma_t_sequence: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub dir: PathBuf,
    pub plot: bool,
    pub every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub kind: Mode,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub atom: AtomParams,
    pub drive: DriveProfile,
    pub numerics: Numerics,
    pub output: Output,
    pub sweep: Option<Sweep>,
}

/// Rejected configuration, naming the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn from_model(section: &str, err: threelevel::Error) -> ConfigError {
    match err {
        threelevel::Error::InvalidArgument { name, reason } => ConfigError::new(format!("{section}.{name}"), reason),
        threelevel::Error::Overdamped { .. } => ConfigError::new(format!("{section}.rabi"), err.to_string()),
        other => ConfigError::new(section, other.to_string()),
    }
}

/// Parses `text` as a scenario document and applies `overrides`.
///
/// `mode` is the subcommand, if any; it wins over the document's `mode` key.
pub fn parse_config(text: &str, mode: Option<Mode>, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let key = e.message().split('`').nth(1).unwrap_or("<document>").to_string();
        ConfigError::new(key, e.to_string().trim_end().to_string())
    })?;
    resolve(raw, mode, overrides)
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be finite and > 0, got {v}")))
    }
}

fn count(key: &str, v: i64) -> Result<usize, ConfigError> {
    usize::try_from(v)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| ConfigError::new(key, format!("must be a positive integer, got {v}")))
}

fn resolve(raw: RawConfig, mode: Option<Mode>, o: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let mode = mode
        .or(raw.mode)
        .ok_or_else(|| ConfigError::new("mode", "no mode given; set `mode` in the file or use a subcommand"))?;

    let atom = AtomParams {
        rabi: o.rabi.or(raw.atom.rabi).unwrap_or(5.0),
        gamma_e: o.gamma_e.or(raw.atom.gamma_e).unwrap_or(1.0),
        gamma_t: o.gamma_t.or(raw.atom.gamma_t).unwrap_or(0.0),
        delta: o.delta.or(raw.atom.delta).unwrap_or(0.0),
    };
    atom.validate().map_err(|e| from_model("atom", e))?;

    let kind = o.drive.or(raw.drive.kind).unwrap_or(DriveKind::Constant);
    let omega_max = o.omega_max.or(raw.drive.omega_max);
    let rise_time = o.rise_time.or(raw.drive.rise_time);
    let t_start = o.t_start.or(raw.drive.t_start);
    let drive = match kind {
        DriveKind::Constant => {
            for (key, v) in [("omega_max", omega_max), ("rise_time", rise_time), ("t_start", t_start)] {
                if v.is_some() {
                    return Err(ConfigError::new(
                        format!("drive.{key}"),
                        "only used with kind = \"exp-ramp\"",
                    ));
                }
            }
            DriveProfile::constant(&atom)
        }
        DriveKind::ExpRamp => DriveProfile::ExpRamp {
            omega_max: omega_max.unwrap_or(atom.rabi),
            rise_time: rise_time
                .ok_or_else(|| ConfigError::new("drive.rise_time", "required for kind = \"exp-ramp\""))?,
            t_start: t_start.unwrap_or(0.0),
        },
    };
    drive.validate().map_err(|e| from_model("drive", e))?;

    let numerics = Numerics {
        dt: positive("numerics.dt", o.dt.or(raw.numerics.dt).unwrap_or(0.001))?,
        t_end: positive("numerics.t_end", o.t_end.or(raw.numerics.t_end).unwrap_or(40.0))?,
        tau: positive("numerics.tau", o.tau.or(raw.numerics.tau).unwrap_or(40.0))?,
        n_half: o
            .n_half
            .or(raw.numerics.n_half)
            .map(|n| count("numerics.n_half", n))
            .transpose()?,
        gamma_t_sequence: o
            .gamma_t_sequence
            .clone()
            .or(raw.numerics.gamma_t_sequence)
            .unwrap_or_else(|| vec![1e-3, 1e-4, 1e-5]),
        tolerance: positive(
            "numerics.tolerance",
            o.tolerance.or(raw.numerics.tolerance).unwrap_or(0.05),
        )?,
    };
    if numerics.dt > numerics.t_end.min(numerics.tau) {
        return Err(ConfigError::new("numerics.dt", "must not exceed t_end or tau"));
    }
    let seq = &numerics.gamma_t_sequence;
    if seq.is_empty() || seq.iter().any(|g| !(g.is_finite() && *g > 0.0)) || seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ConfigError::new(
            "numerics.gamma_t_sequence",
            "must be a non-empty, strictly decreasing list of positive values",
        ));
    }

    let output = Output {
        dir: o
            .out_dir
            .clone()
            .or(raw.output.dir)
            .unwrap_or_else(|| PathBuf::from("output")),
        plot: o.plot || raw.output.plot.unwrap_or(false),
        every: count("output.every", o.every.or(raw.output.every).unwrap_or(20))?,
    };

    let sweep_given =
        raw.sweep.is_some() || o.sweep_parameter.is_some() || o.sweep_values.is_some() || o.sweep_kind.is_some();
    let sweep = if mode == Mode::Sweep {
        let rs = raw.sweep.unwrap_or_default();
        let parameter = o
            .sweep_parameter
            .or(rs.parameter)
            .ok_or_else(|| ConfigError::new("sweep.parameter", "required in sweep mode"))?;
        let values = o
            .sweep_values
            .clone()
            .or(rs.values)
            .ok_or_else(|| ConfigError::new("sweep.values", "required in sweep mode"))?;
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::new(
                "sweep.values",
                "must be a non-empty list of finite numbers",
            ));
        }
        let kind = o.sweep_kind.or(rs.kind).unwrap_or(Mode::SpectrumTransient);
        if matches!(kind, Mode::Sweep | Mode::Compare) {
            return Err(ConfigError::new(
                "sweep.kind",
                format!("cannot sweep mode `{}`", kind.name()),
            ));
        }
        if parameter == SweepParameter::RiseTime && drive.is_constant() {
            return Err(ConfigError::new(
                "sweep.parameter",
                "rise_time requires drive kind = \"exp-ramp\"",
            ));
        }
        Some(Sweep {
            parameter,
            values,
            kind,
        })
    } else if sweep_given {
        return Err(ConfigError::new("sweep", "only allowed in sweep mode"));
    } else {
        None
    };

    let cfg = ScenarioConfig {
        mode,
        atom,
        drive,
        numerics,
        output,
        sweep,
    };
    for (atom, drive, mode) in cfg.points() {
        check_mode(&atom, &drive, mode)?;
    }
    Ok(cfg)
}

fn check_mode(atom: &AtomParams, drive: &DriveProfile, mode: Mode) -> Result<(), ConfigError> {
    atom.validate().map_err(|e| from_model("atom", e))?;
    drive.validate().map_err(|e| from_model("drive", e))?;
    if mode.needs_resonant_constant_drive() {
        if !drive.is_constant() {
            return Err(ConfigError::new(
                "drive.kind",
                format!("mode `{}` needs a constant drive; use spectrum-transient", mode.name()),
            ));
        }
        if atom.delta != 0.0 {
            return Err(ConfigError::new(
                "atom.delta",
                format!("mode `{}` needs delta = 0; use spectrum-transient", mode.name()),
            ));
        }
    }
    if matches!(mode, Mode::SpectrumAnalytic | Mode::Compare) {
        omega_eff(atom).map_err(|e| from_model("atom", e))?;
    }
    if mode == Mode::SpectrumTrajectory && !drive.is_constant() {
        return Err(ConfigError::new(
            "drive.kind",
            "spectrum-trajectory uses a constant drive; use spectrum-transient for ramps",
        ));
    }
    Ok(())
}

impl ScenarioConfig {
    /// Parameters, drive and mode of every run: one for plain modes, one per
    /// value in sweep mode.
    pub fn points(&self) -> Vec<(AtomParams, DriveProfile, Mode)> {
        let Some(sweep) = &self.sweep else {
            return vec![(self.atom, self.drive, self.mode)];
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut atom = self.atom;
                let mut drive = self.drive;
                match sweep.parameter {
                    SweepParameter::Rabi => {
                        atom.rabi = v;
                        drive = match drive {
                            DriveProfile::Constant(_) => DriveProfile::Constant(v),
                            DriveProfile::ExpRamp { rise_time, t_start, .. } => DriveProfile::ExpRamp {
                                omega_max: v,
                                rise_time,
                                t_start,
                            },
                        };
                    }
                    SweepParameter::GammaE => atom.gamma_e = v,
                    SweepParameter::GammaT => atom.gamma_t = v,
                    SweepParameter::Delta => atom.delta = v,
                    SweepParameter::RiseTime => {
                        if let DriveProfile::ExpRamp { rise_time, .. } = &mut drive {
                            *rise_time = v;
                        }
                    }
                }
                (atom, drive, sweep.kind)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, mode: Option<Mode>, o: &Overrides) -> Result<ScenarioConfig, ConfigError> {
        parse_config(text, mode, o)
    }

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse("", Some(Mode::Populations), &Overrides::default()).unwrap();
        assert_eq!(cfg.atom, AtomParams::new(5.0, 1.0, 0.0));
        assert_eq!(cfg.drive, DriveProfile::Constant(5.0));
        assert_eq!(cfg.numerics.dt, 0.001);
        assert_eq!(cfg.numerics.t_end, 40.0);
        assert_eq!(cfg.numerics.tau, 40.0);
        assert_eq!(cfg.output.every, 20);
        assert!(!cfg.output.plot);
    }

    #[test]
    fn flag_beats_file() {
        let o = Overrides {
            rabi: Some(3.0),
            ..Default::default()
        };
        let cfg = parse("[atom]\nrabi = 5.0\n", Some(Mode::Populations), &o).unwrap();
        assert_eq!(cfg.atom.rabi, 3.0);
        assert_eq!(cfg.drive, DriveProfile::Constant(3.0));
    }

    #[test]
    fn negative_rate_names_the_key() {
        let o = Overrides {
            gamma_e: Some(-1.0),
            ..Default::default()
        };
        let err = parse("", Some(Mode::Populations), &o).unwrap_err();
        assert_eq!(err.key, "atom.gamma_e");
        assert!(err.to_string().contains("gamma_e"));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse("[atom]\nrabbi = 5.0\n", Some(Mode::Populations), &Overrides::default()).unwrap_err();
        assert_eq!(err.key, "rabbi");
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let err = parse(
            "[numerics]\ndt = \"small\"\n",
            Some(Mode::Populations),
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
    }

    #[test]
    fn mode_comes_from_file_or_subcommand() {
        assert!(parse("", None, &Overrides::default()).is_err());
        let cfg = parse("mode = \"compare\"\n", None, &Overrides::default()).unwrap();
        assert_eq!(cfg.mode, Mode::Compare);
        let cfg = parse("mode = \"compare\"\n", Some(Mode::Populations), &Overrides::default()).unwrap();
        assert_eq!(cfg.mode, Mode::Populations);
    }

    #[test]
    fn ramp_needs_rise_time() {
        let err = parse(
            "[drive]\nkind = \"exp-ramp\"\n",
            Some(Mode::SpectrumTransient),
            &Overrides::default(),
        )
        .unwrap_err();
        assert_eq!(err.key, "drive.rise_time");
        let cfg = parse(
            "[drive]\nkind = \"exp-ramp\"\nrise_time = 0.2\n",
            Some(Mode::SpectrumTransient),
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.drive, DriveProfile::exp_ramp(5.0, 0.2));
    }

    #[test]
    fn closed_form_modes_reject_detuning_and_ramps() {
        let o = Overrides {
            delta: Some(1.0),
            ..Default::default()
        };
        assert_eq!(
            parse("", Some(Mode::SpectrumAnalytic), &o).unwrap_err().key,
            "atom.delta"
        );
        assert!(parse("", Some(Mode::SpectrumTransient), &o).is_ok());
        let o = Overrides {
            rabi: Some(0.3),
            ..Default::default()
        };
        assert_eq!(parse("", Some(Mode::Compare), &o).unwrap_err().key, "atom.rabi");
    }

    #[test]
    fn sweep_points_follow_the_axis() {
        let text = "mode = \"sweep\"\n[sweep]\nparameter = \"delta\"\nvalues = [0.0, 1.0, 2.0]\n";
        let cfg = parse(text, None, &Overrides::default()).unwrap();
        let deltas: Vec<f64> = cfg.points().iter().map(|p| p.0.delta).collect();
        assert_eq!(deltas, vec![0.0, 1.0, 2.0]);
        assert!(cfg.points().iter().all(|p| p.2 == Mode::SpectrumTransient));
    }

    #[test]
    fn sweep_section_outside_sweep_mode_is_rejected() {
        let text = "[sweep]\nparameter = \"delta\"\nvalues = [1.0]\n";
        assert_eq!(
            parse(text, Some(Mode::Populations), &Overrides::default())
                .unwrap_err()
                .key,
            "sweep"
        );
    }

    #[test]
    fn sweep_values_are_validated_per_point() {
        let text = "mode = \"sweep\"\n[sweep]\nparameter = \"gamma_e\"\nvalues = [1.0, -2.0]\n";
        assert_eq!(
            parse(text, None, &Overrides::default()).unwrap_err().key,
            "atom.gamma_e"
        );
        let text = "mode = \"sweep\"\n[sweep]\nparameter = \"rise_time\"\nvalues = [1.0]\n";
        assert_eq!(
            parse(text, None, &Overrides::default()).unwrap_err().key,
            "sweep.parameter"
        );
    }

    #[test]
    fn limit_sequence_must_decrease() {
        let o = Overrides {
            gamma_t_sequence: Some(vec![1e-3, 1e-2]),
            ..Default::default()
        };
        assert_eq!(
            parse("", Some(Mode::SpectrumQrt), &o).unwrap_err().key,
            "numerics.gamma_t_sequence"
        );
    }
}
