// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use crate::dynamics::TrajectoryResult;

/// `%.9g`: nine significant digits, trailing zeros removed, exponent form
/// outside `1e-5 <= |x| < 1e9`.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    strip_zeros(&format!("{x:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn trajectory_csv(traj: &TrajectoryResult) -> String {
    let mut out = String::from("tau");
    for label in &traj.labels {
        out.push_str(",E_");
        out.push_str(label);
    }
    out.push('\n');
    for (k, t) in traj.tau.iter().enumerate() {
        out.push_str(&format_g9(*t));
        for series in &traj.energies {
            out.push(',');
            out.push_str(&format_g9(series[k]));
        }
        out.push('\n');
    }
    out
}

const COLORS: [&str; 6] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Line plot of every energy series against `tau`.
pub fn trajectory_svg(traj: &TrajectoryResult, title: &str) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 20.0, 30.0, 50.0);
    let t_max = traj
        .tau
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let x = |t: f64| left + (w - left - right) * t / t_max;
    let y = |e: f64| top + (h - top - bottom) * (1.0 - e);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        l = left,
        t = top,
        b = h - bottom,
        r = w - right
    );
    for k in 0..=4 {
        let e = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            y(e) + 4.0,
            e
        );
        let t = t_max * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            x(t),
            h - bottom + 16.0,
            format_g9((t * 100.0).round() / 100.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">tau</text>"#,
        (left + w - right) / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">energy density</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, (series, label)) in traj.energies.iter().zip(&traj.labels).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = traj
            .tau
            .iter()
            .zip(series)
            .map(|(t, e)| format!("{:.2},{:.2}", x(*t), y(*e)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 10.0 + 16.0 * i as f64;
        let lx = w - right - 80.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11">E_{}</text>"#,
            lx + 25.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
