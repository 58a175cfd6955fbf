use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_threelevel"));
    c.env_remove("THREELEVEL_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

#[test]
fn populations_defaults_end_in_the_trap() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("pop");
    let out = run(&["populations", "--out-dir", out_dir.to_str().unwrap(), "--plot"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = read(&out_dir.join("populations.csv"));
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,rho_gg,rho_ee,rho_tt,re_ge,im_ge,re_et,im_et,re_gt,im_gt"
    );
    let t = column(&csv, "t");
    assert_eq!(*t.last().unwrap(), 40.0);
    assert!(*column(&csv, "rho_tt").last().unwrap() > 0.999);
    assert!(csv.ends_with('\n'));
    let svg = read(&out_dir.join("populations.svg"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let outputs: Vec<String> = [None, Some("3")]
        .iter()
        .enumerate()
        .map(|(k, threads)| {
            let d = dir.path().join(format!("run{k}"));
            let mut cmd = bin();
            cmd.args([
                "spectrum-transient",
                "--drive",
                "exp-ramp",
                "--rise-time",
                "1",
                "--tau",
                "20",
                "--n-half",
                "24",
                "--out-dir",
                d.to_str().unwrap(),
            ]);
            if let Some(n) = threads {
                cmd.env("THREELEVEL_THREADS", n);
            }
            let out = cmd.output().unwrap();
            assert_eq!(code(&out), 0, "{}", stderr(&out));
            read(&d.join("spectrum.csv"))
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].lines().count(), 2 * 24 + 2);
}

#[test]
fn invalid_flag_names_the_key_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    let out = run(&["populations", "--gamma-e", "-1", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("gamma_e"), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "mode = \"populations\"\n[atom]\nrabi = 5.0\ngamma_x = 1.0\n").unwrap();
    let out_dir = dir.path().join("never");
    let out = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("gamma_x"), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(&cfg, "[atom]\nrabi = 5.0\n[numerics]\nt_end = 2.0\n").unwrap();
    let go = |extra: &[&str], name: &str| {
        let d = dir.path().join(name);
        let mut args = vec![
            "populations",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            d.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        read(&d.join("populations.csv"))
    };
    let from_file = go(&[], "a");
    let overridden = go(&["--rabi", "3"], "b");
    let explicit = go(&["--rabi", "3"], "c");
    assert_ne!(from_file, overridden);
    assert_eq!(overridden, explicit);
}

#[test]
fn missing_mode_is_a_validation_error() {
    let out = run(&["run"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("mode"));
}

#[test]
fn oversized_step_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    let out = run(&[
        "populations",
        "--rabi",
        "50",
        "--dt",
        "0.5",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("lindblad-dynamics"));
    assert!(!out_dir.exists());
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = run(&[
        "spectrum-analytic",
        "--n-half",
        "8",
        "--out-dir",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn analytic_spectrum_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "spectrum-analytic",
        "--n-half",
        "10",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = read(&dir.path().join("spectrum.csv"));
    assert_eq!(csv.lines().next().unwrap(), "omega,s_re,s_im,s_abs2");
    assert_eq!(csv.lines().count(), 2 * 10 + 2);
    assert!(csv.lines().skip(1).all(|l| !l.contains('e')));
}

#[test]
fn compare_reports_every_method_on_one_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["compare", "--out-dir", dir.path().to_str().unwrap(), "--plot"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read(&dir.path().join("comparison.csv"));
    let methods: Vec<&str> = report.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["analytic", "qrt", "trajectory"]);
    let spacing = 2.0 * std::f64::consts::PI / 40.0;
    let hi = column(&report, "peak_hi");
    assert!(hi.iter().all(|p| (p - hi[0]).abs() < spacing));
    let lines: Vec<usize> = ["analytic", "qrt", "trajectory"]
        .iter()
        .map(|m| read(&dir.path().join(format!("spectrum_{m}.csv"))).lines().count())
        .collect();
    assert!(lines.iter().all(|&n| n == lines[0]));
    assert_eq!(read(&dir.path().join("comparison.svg")).matches("<polyline").count(), 3);
}

#[test]
fn detuning_sweep_widens_the_splitting() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--sweep-parameter",
        "delta",
        "--sweep-values",
        "0,1,2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for v in ["0", "1", "2"] {
        assert!(dir.path().join(format!("spectrum_delta_{v}.csv")).exists());
    }
    let summary = read(&dir.path().join("sweep_summary.csv"));
    assert_eq!(
        summary.lines().next().unwrap(),
        "delta,peak_lo,peak_hi,separation,band_weight_0.5"
    );
    let sep = column(&summary, "separation");
    assert_eq!(sep.len(), 3);
    assert!(sep.windows(2).all(|w| w[1] > w[0]), "{sep:?}");
}

#[test]
fn shipped_scenarios_validate() {
    // Each shipped scenario must parse; an invalid numerics override then
    // stops it before any work, proving the file itself was accepted.
    let mut names: Vec<PathBuf> = fs::read_dir(examples_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for path in names {
        let out = run(&["run", "--config", path.to_str().unwrap(), "--tolerance", "-1"]);
        assert_eq!(code(&out), 2, "{}", path.display());
        assert!(
            stderr(&out).contains("numerics.tolerance"),
            "{}: {}",
            path.display(),
            stderr(&out)
        );
    }
}

#[test]
fn population_sweep_runs_from_a_shipped_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = examples_dir().join("pumping_populations.toml");
    let out = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = read(&dir.path().join("sweep_summary.csv"));
    let tt = column(&summary, "rho_tt_final");
    assert!(tt[0] > 0.999);
    assert!(tt[1] < 0.5);
    assert!(dir.path().join("populations_gamma_t_2.svg").exists());
}
