//! Text serializations of runs: time-series CSV, metrics summary, comparison
//! table, sweep CSV and a small SVG plot.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::engine::{Metrics, TimeSeries};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,t_int_true,t_int_measured,t_wall,t_ext,y_star,y_star_dot,q_command,q_applied,f_estim";

/// Formats `x` with 9 significant digits, C `%.9g` style.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn timeseries_csv(ts: &TimeSeries) -> String {
    let mut out = String::with_capacity(ts.records.len() * 110 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &ts.records {
        let fields = [
            r.t,
            r.t_int_true,
            r.t_int_measured,
            r.t_wall,
            r.t_ext,
            r.y_star,
            r.y_star_dot,
            r.q_command,
            r.q_applied,
        ];
        for v in fields {
            out.push_str(&format_sig9(v));
            out.push(',');
        }
        if let Some(f) = r.f_estim {
            out.push_str(&format_sig9(f));
        }
        out.push('\n');
    }
    out
}

pub fn metrics_text(m: &Metrics) -> String {
    let mut out = String::new();
    for (k, v) in metric_fields(m) {
        let _ = writeln!(out, "{k} = {}", format_sig9(v));
    }
    out
}

fn metric_fields(m: &Metrics) -> [(&'static str, f64); 6] {
    [
        ("rmse", m.rmse),
        ("max_abs_error", m.max_abs_error),
        ("energy", m.energy),
        ("cooling_energy", m.cooling_energy),
        ("control_variation", m.control_variation),
        ("saturation_fraction", m.saturation_fraction),
    ]
}

/// Fixed-width table, one row per run, columns in [`Metrics`] field order.
pub fn comparison_table(rows: &[(String, Metrics)]) -> String {
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("run".len());
    let cols = metric_fields(&Metrics {
        rmse: 0.0,
        max_abs_error: 0.0,
        energy: 0.0,
        cooling_energy: 0.0,
        control_variation: 0.0,
        saturation_fraction: 0.0,
    })
    .map(|(k, _)| k);
    let col_w = cols.iter().map(|c| c.len()).max().unwrap_or(0).max(15);

    let mut out = format!("{:<name_w$}", "run");
    for c in cols {
        let _ = write!(out, "  {c:>col_w$}");
    }
    out.push('\n');
    for (name, m) in rows {
        let _ = write!(out, "{name:<name_w$}");
        for (_, v) in metric_fields(m) {
            let _ = write!(out, "  {:>col_w$}", format_sig9(v));
        }
        out.push('\n');
    }
    out
}

pub const SWEEP_HEADER: &str = "controller,factor,rmse,energy,control_variation";

pub fn sweep_csv(rows: &[(String, f64, Metrics)]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (name, f, m) in rows {
        let _ = writeln!(
            out,
            "{name},{},{},{},{}",
            format_sig9(*f),
            format_sig9(m.rmse),
            format_sig9(m.energy),
            format_sig9(m.control_variation)
        );
    }
    out
}

const W: f64 = 900.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 50.0;

/// Two stacked line charts: reference and true indoor temperature on top,
/// applied heat below. Time axis in hours.
pub fn plot_svg(ts: &TimeSeries) -> String {
    let h = 2.0 * PANEL_H + 3.0 * MARGIN;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{h}\" viewBox=\"0 0 {W} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let t: Vec<f64> = ts.records.iter().map(|r| r.t / 3600.0).collect();
    let y_star: Vec<f64> = ts.records.iter().map(|r| r.y_star).collect();
    let y: Vec<f64> = ts.records.iter().map(|r| r.t_int_true).collect();
    let q: Vec<f64> = ts.records.iter().map(|r| r.q_applied).collect();

    panel(
        &mut out,
        MARGIN,
        "temperature (C)",
        &t,
        &[(&y_star, "#1f77b4", "y*"), (&y, "#d62728", "T_int")],
    );
    panel(&mut out, 2.0 * MARGIN + PANEL_H, "Q (W)", &t, &[(&q, "#2ca02c", "Q")]);
    out.push_str("</svg>\n");
    out
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn panel(out: &mut String, top: f64, label: &str, t: &[f64], series: &[(&Vec<f64>, &str, &str)]) {
    let left = MARGIN;
    let width = W - 2.0 * MARGIN;
    let (t0, t1) = range(t.iter().copied());
    let (v0, v1) = range(series.iter().flat_map(|(s, _, _)| s.iter().copied()));
    let px = |x: f64| left + (x - t0) / (t1 - t0) * width;
    let py = |v: f64| top + PANEL_H - (v - v0) / (v1 - v0) * PANEL_H;

    let _ = writeln!(
        out,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{width}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{left}\" y=\"{}\" font-size=\"12\">{label}</text>",
        top - 6.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.1}</text>",
        left - 4.0,
        top + 10.0,
        v1
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.1}</text>",
        left - 4.0,
        top + PANEL_H,
        v0
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.0} h</text>",
        left + width,
        top + PANEL_H + 14.0,
        t1
    );
    for (i, (s, color, name)) in series.iter().enumerate() {
        let mut pts = String::with_capacity(s.len() * 16);
        for (x, v) in t.iter().zip(s.iter()) {
            let _ = write!(pts, "{:.2},{:.2} ", px(*x), py(*v));
        }
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
            pts.trim_end()
        );
        let lx = left + width - 80.0;
        let ly = top + 16.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            "<text x=\"{lx}\" y=\"{ly}\" font-size=\"11\" fill=\"{color}\">{name}</text>"
        );
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
