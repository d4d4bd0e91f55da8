//! CSV and SVG output. Floats use Rust's shortest round-trip formatting, so
//! the CSV carries full double precision and is byte-stable for equal data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::EntropySeries;

pub const CSV_HEADER: &str = "t,S_L_q,S_V_q,S_L_cl,S_V_cl,norm_drift,energy_drift,oor_frac";

pub fn csv_string(s: &EntropySeries) -> String {
    let mut out = String::with_capacity(64 * (s.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let cols = s.columns();
    for i in 0..s.len() {
        for (k, c) in cols.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{:?}", c[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(s: &EntropySeries, path: &Path) -> Result<()> {
    if s.is_empty() {
        return Err(Error::validation("runner.empty_series", "nothing to write"));
    }
    fs::write(path, csv_string(s)).map_err(|e| Error::io(path, e))
}

const SVG_W: f64 = 720.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Line chart of the four entropy columns against `t`.
pub fn svg_string(s: &EntropySeries) -> String {
    let series = [
        ("S_L quantum", &s.s_l_quantum, "#1f5fbf", ""),
        ("S_V quantum", &s.s_v_quantum, "#c0392b", ""),
        ("S_L classical", &s.s_l_classical, "#1f5fbf", "6 4"),
        ("S_V classical", &s.s_v_classical, "#c0392b", "6 4"),
    ];
    let t_max = s.times.last().copied().unwrap_or(0.0).max(1e-12);
    let finite = series.iter().flat_map(|(_, v, _, _)| v.iter().copied()).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((0f64, 1f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pw = SVG_W - 2.0 * MARGIN;
    let ph = SVG_H - 2.0 * MARGIN;
    let sx = |t: f64| MARGIN + pw * t / t_max;
    let sy = |v: f64| SVG_H - MARGIN - ph * (v - lo) / (hi - lo);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        SVG_W / 2.0,
        escape(&s.name)
    )
    .unwrap();
    writeln!(
        out,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN
    )
    .unwrap();
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, MARGIN - 4.0, sy(v) + 4.0).unwrap();
        let t = t_max * k as f64 / 4.0;
        writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{t:.1}</text>"#, sx(t), SVG_H - MARGIN + 16.0).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, SVG_W / 2.0, SVG_H - 10.0).unwrap();
    for (k, (label, v, color, dash)) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (&t, &y) in s.times.iter().zip(v.iter()) {
            if !y.is_finite() {
                pen_down = false;
                continue;
            }
            write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, sx(t), sy(y)).unwrap();
            pen_down = true;
        }
        if !d.is_empty() {
            writeln!(
                out,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
                d.trim_end()
            )
            .unwrap();
        }
        let ly = MARGIN + 14.0 * k as f64;
        let lx = SVG_W - MARGIN - 150.0;
        writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/><text x="{}" y="{}">{label}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(s: &EntropySeries, path: &Path) -> Result<()> {
    if s.is_empty() {
        return Err(Error::validation("runner.empty_series", "nothing to plot"));
    }
    fs::write(path, svg_string(s)).map_err(|e| Error::io(path, e))
}

/// Write `<name>.csv` and, if `plot`, `<name>.svg` into `dir`.
pub fn emit(s: &EntropySeries, dir: &Path, plot: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(format!("{}.csv", s.name));
    write_csv(s, &csv)?;
    let mut written = vec![csv];
    if plot {
        let svg = dir.join(format!("{}.svg", s.name));
        write_svg(s, &svg)?;
        written.push(svg);
    }
    Ok(written)
}
