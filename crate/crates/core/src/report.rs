//! Minimal SVG output: a heat map for energy maps and box plots for metric
//! distributions. The CSV files stay the numerical record.

use std::fmt::Write as _;

use crate::metrics::EnergyMap;

const CELL: f64 = 18.0;
const MARGIN: f64 = 40.0;

fn header(w: f64, h: f64) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" font-family=\"sans-serif\" font-size=\"10\">\n")
}

/// Light-to-dark ramp for `t` in `[0, 1]`.
fn shade(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - 0.8 * t)) as u8;
    let g = (255.0 * (1.0 - 0.9 * t)) as u8;
    let b = (255.0 * (1.0 - 0.5 * t)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Window index down, channel across; colour scaled to the map maximum.
pub fn heat_map_svg(map: &EnergyMap) -> String {
    let cols = map.channel_ids.len();
    let rows = map.rows.len();
    let max = map.rows.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
    let mut s = header(2.0 * MARGIN + cols as f64 * CELL, 2.0 * MARGIN + rows as f64 * CELL);
    for (j, id) in map.channel_ids.iter().enumerate() {
        let x = MARGIN + (j as f64 + 0.5) * CELL;
        let _ =
            writeln!(s, "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", MARGIN - 6.0, escape(id));
    }
    for (i, row) in map.rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let t = if max > 0.0 { v / max } else { 0.0 };
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\"/>",
                MARGIN + j as f64 * CELL,
                MARGIN + i as f64 * CELL,
                shade(t)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One box (quartiles, median, min/max whiskers) per named group, on a
/// shared `[0, 1]` axis.
pub fn box_plot_svg(groups: &[(String, Vec<f64>)]) -> String {
    let (bw, gap, height) = (30.0, 20.0, 200.0);
    let width = 2.0 * MARGIN + groups.len() as f64 * (bw + gap);
    let mut s = header(width, height + 2.0 * MARGIN);
    let y = |v: f64| MARGIN + height * (1.0 - v.clamp(0.0, 1.0));
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{:.1}\" stroke=\"black\"/>",
        MARGIN + height
    );
    for (k, (name, vals)) in groups.iter().enumerate() {
        let x0 = MARGIN + gap / 2.0 + k as f64 * (bw + gap);
        let xm = x0 + bw / 2.0;
        let _ = writeln!(
            s,
            "<text x=\"{xm:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            MARGIN + height + 14.0,
            escape(name)
        );
        let mut v: Vec<f64> = vals.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            continue;
        }
        v.sort_by(f64::total_cmp);
        let (q1, q2, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
        let (lo, hi) = (v[0], v[v.len() - 1]);
        let _ = writeln!(
            s,
            "<line x1=\"{xm:.1}\" y1=\"{:.1}\" x2=\"{xm:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            y(hi),
            y(lo)
        );
        let _ = writeln!(
            s,
            "<rect x=\"{x0:.1}\" y=\"{:.1}\" width=\"{bw}\" height=\"{:.1}\" fill=\"#c6dbef\" stroke=\"black\"/>",
            y(q3),
            (y(q1) - y(q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            "<line x1=\"{x0:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"2\"/>",
            y(q2),
            x0 + bw,
            y(q2)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
