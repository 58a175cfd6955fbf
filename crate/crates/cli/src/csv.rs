//! CSV rendering. Numbers are written in plain decimal notation with twelve
//! significant digits so that files are stable under re-runs and easy to diff.

use threelevel::lindblad::PopulationTrace;
use threelevel::SpectrumResult;

pub const POPULATION_COLUMNS: [&str; 10] = [
    "t", "rho_gg", "rho_ee", "rho_tt", "re_ge", "im_ge", "re_et", "im_et", "re_gt", "im_gt",
];

pub const SPECTRUM_COLUMNS: [&str; 4] = ["omega", "s_re", "s_im", "s_abs2"];

const SIG_DIGITS: i32 = 12;

/// `x` in decimal notation with twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mut exp = x.abs().log10().floor() as i32;
    let mut s = render(x, exp);
    // Rounding can carry into a new leading digit (9.99…→10.0…).
    if s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(exp + 1)) {
        exp += 1;
        s = render(x, exp);
    }
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s.remove(0);
    }
    s
}

fn render(x: f64, exp: i32) -> String {
    let decimals = SIG_DIGITS - 1 - exp;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    }
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let mut first = true;
    for c in cells {
        if !first {
            out.push(',');
        }
        out.push_str(&c);
        first = false;
    }
    out.push('\n');
}

/// Populations and coherences at every `every`-th sample; the last sample is
/// always included.
pub fn populations_csv(trace: &PopulationTrace, every: usize) -> String {
    let mut out = String::new();
    push_row(&mut out, POPULATION_COLUMNS.map(String::from));
    let last = trace.len() - 1;
    for k in (0..trace.len()).filter(|&k| k % every == 0 || k == last) {
        let nums = [
            trace.times[k],
            trace.rho_gg[k],
            trace.rho_ee[k],
            trace.rho_tt[k],
            trace.coh_ge[k].re,
            trace.coh_ge[k].im,
            trace.coh_et[k].re,
            trace.coh_et[k].im,
            trace.coh_gt[k].re,
            trace.coh_gt[k].im,
        ];
        push_row(&mut out, nums.map(fmt_num));
    }
    out
}

pub fn spectrum_csv(spec: &SpectrumResult) -> String {
    let mut out = String::new();
    push_row(&mut out, SPECTRUM_COLUMNS.map(String::from));
    for ((w, s), a) in spec.grid.omegas().zip(&spec.s_values).zip(&spec.abs2) {
        push_row(&mut out, [w, s.re, s.im, *a].map(fmt_num));
    }
    out
}

/// A free-form table: header plus rows of already formatted cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    push_row(&mut out, header.iter().map(|s| s.to_string()));
    for row in rows {
        push_row(&mut out, row.iter().cloned());
    }
    out
}
