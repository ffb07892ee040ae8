//! Static SVG figures for run records and load-deflection curves.

use std::fmt::Write as _;

use crate::scenario::RunRecord;

const W: f64 = 420.0;
const H: f64 = 300.0;
const PAD: f64 = 40.0;

struct Panel {
    x0: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Panel {
    fn new(x0: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| {
            if (b - a).abs() < 1e-12 {
                (a - 0.5, b + 0.5)
            } else {
                (a, b)
            }
        };
        Self {
            x0,
            x_range: widen(x_range),
            y_range: widen(y_range),
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (xa, xb) = self.x_range;
        let (ya, yb) = self.y_range;
        let px = self.x0 + PAD + (x - xa) / (xb - xa) * (W - 2.0 * PAD);
        let py = H - PAD - (y - ya) / (yb - ya) * (H - 2.0 * PAD);
        (px, py)
    }

    fn polyline(&self, out: &mut String, pts: impl Iterator<Item = (f64, f64)>, style: &str) {
        let coords: Vec<String> = pts
            .map(|(x, y)| {
                let (px, py) = self.map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" "));
    }

    fn axes(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (l, b) = (self.x0 + PAD, H - PAD);
        let (r, t) = (self.x0 + W - PAD, PAD);
        let _ = writeln!(
            out,
            r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
            r - l,
            b - t
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="20" font-size="13" text-anchor="middle">{title}</text>"#,
            (l + r) / 2.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{x_label}</text>"#,
            (l + r) / 2.0,
            H - 8.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" transform="rotate(-90 {} {})">{y_label}</text>"#,
            self.x0 + 12.0,
            (t + b) / 2.0,
            self.x0 + 12.0,
            (t + b) / 2.0
        );
        let fmt = |v: f64| format!("{v:.2}");
        for (x, anchor) in [(self.x_range.0, "start"), (self.x_range.1, "end")] {
            let (px, _) = self.map(x, self.y_range.0);
            let _ = writeln!(
                out,
                r#"<text x="{px:.2}" y="{}" font-size="10" text-anchor="{anchor}">{}</text>"#,
                b + 12.0,
                fmt(x)
            );
        }
        for y in [self.y_range.0, self.y_range.1] {
            let (_, py) = self.map(self.x_range.0, y);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{py:.2}" font-size="10" text-anchor="end">{}</text>"#,
                l - 3.0,
                fmt(y)
            );
        }
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn header(width: f64) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{H}" viewBox="0 0 {width} {H}" font-family="sans-serif">"#
    ) + "\n"
}

/// Deployed length over time next to the side-view shape frames.
pub fn run_svg(record: &RunRecord) -> String {
    let mut out = header(2.0 * W);
    let t_end = record.samples.last().map_or(1.0, |s| s.t.max(1e-9));
    let (_, l_max) = bounds(record.samples.iter().map(|s| s.deployed_length));
    let left = Panel::new(0.0, (0.0, t_end), (0.0, l_max.max(0.1)));
    let title = match &record.model_note {
        Some(note) => format!("{}: deployed length ({note})", record.scenario),
        None => format!("{}: deployed length", record.scenario),
    };
    left.axes(&mut out, &title, "t [s]", "length [m]");
    left.polyline(
        &mut out,
        record.samples.iter().map(|s| (s.t, s.deployed_length)),
        r##"stroke="#1f5fa8" stroke-width="1.5""##,
    );

    let all = record.frames.iter().flat_map(|f| f.points.iter());
    let (xa, xb) = bounds(all.clone().map(|p| p[0]));
    let (ya, yb) = bounds(all.map(|p| p[1]));
    let span = (xb - xa).max(yb - ya.min(0.0)).max(0.1);
    let right = Panel::new(
        W,
        (xa.min(0.0), xa.min(0.0) + span),
        (ya.min(0.0), ya.min(0.0) + span * (H - 2.0 * PAD) / (W - 2.0 * PAD)),
    );
    right.axes(&mut out, "side view", "x [m]", "y [m]");
    right.polyline(
        &mut out,
        [(right.x_range.0, 0.0), (right.x_range.1, 0.0)].into_iter(),
        r##"stroke="#6b4f2a""##,
    );
    let n = record.frames.len().max(1);
    for (i, f) in record.frames.iter().enumerate() {
        let opacity = 0.15 + 0.85 * (i + 1) as f64 / n as f64;
        right.polyline(
            &mut out,
            f.points.iter().map(|p| (p[0], p[1])),
            &format!(r##"stroke="#2a7a3b" stroke-opacity="{opacity:.3}" stroke-width="1.5""##),
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Load-deflection curves, one polyline per named series.
pub fn deflection_svg(series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = header(W);
    let (_, x_max) = bounds(series.iter().flat_map(|(_, s)| s.iter().map(|p| p.0)));
    let (_, y_max) = bounds(series.iter().flat_map(|(_, s)| s.iter().map(|p| p.1)));
    let panel = Panel::new(0.0, (0.0, x_max.max(1e-3)), (0.0, y_max.max(1e-3)));
    panel.axes(&mut out, "tip deflection vs load", "load [kg]", "deflection [m]");
    let colors = ["#1f5fa8", "#c4512b", "#2a7a3b", "#7a2a6b"];
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        panel.polyline(
            &mut out,
            pts.iter().copied(),
            &format!(r#"stroke="{color}" stroke-width="1.5""#),
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" fill="{color}">{name}</text>"#,
            PAD + 8.0,
            PAD + 14.0 + 12.0 * i as f64
        );
    }
    out.push_str("</svg>\n");
    out
}
