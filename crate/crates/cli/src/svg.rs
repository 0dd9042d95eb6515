//! Minimal SVG line and scatter plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub style: Style,
}

pub enum Style {
    Line,
    /// Closed filled outline.
    Area,
    Dots(f64),
    /// Vertical band: `points` holds `(x, low)` then, reversed, `(x, high)`.
    Band,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y: false,
            series: Vec::new(),
        }
    }

    fn y_value(&self, y: f64) -> Option<f64> {
        if self.log_y {
            (y > 0.0).then(|| y.log10())
        } else {
            y.is_finite().then_some(y)
        }
    }

    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter_map(|&(x, y)| self.y_value(y).map(|y| (x, y)))
            .filter(|p| p.0.is_finite())
            .collect();
        let bounds = |f: fn(&(f64, f64)) -> f64| {
            let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            match (lo.is_finite(), hi > lo) {
                (false, _) => (0.0, 1.0),
                (true, true) => {
                    let pad = (hi - lo) * 0.05;
                    (lo - pad, hi + pad)
                }
                (true, false) => (lo - 0.5, lo + 0.5),
            }
        };
        let (x0, x1) = bounds(|p| p.0);
        let (y0, y1) = bounds(|p| p.1);
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(
            out,
            r#"<path d="M{m} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
            m = MARGIN,
            t = MARGIN,
            b = H - MARGIN,
            r = W - MARGIN
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let ylab = if self.log_y { format!("1e{fy:.1}") } else { format!("{fy:.3}") };
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#, sx(fx), H - MARGIN + 16.0);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ylab}</text>"#, MARGIN - 4.0, sy(fy) + 4.0);
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="14" y="{y}" text-anchor="middle" transform="rotate(-90 14 {y})">{}</text>"#,
            escape(&self.y_label),
            y = H / 2.0
        );

        for (k, s) in self.series.iter().enumerate() {
            let coords: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter_map(|&(x, y)| self.y_value(y).map(|y| (sx(x), sy(y))))
                .collect();
            let path = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ");
            let c = s.color;
            match s.style {
                Style::Line => {
                    let _ = writeln!(out, r#"<polyline points="{path}" fill="none" stroke="{c}" stroke-width="2"/>"#);
                }
                Style::Area => {
                    let _ = writeln!(out, r#"<polygon points="{path}" fill="{c}" fill-opacity="0.25" stroke="{c}"/>"#);
                }
                Style::Band => {
                    let _ = writeln!(out, r#"<polygon points="{path}" fill="{c}" fill-opacity="0.15" stroke="none"/>"#);
                }
                Style::Dots(r) => {
                    for (x, y) in &coords {
                        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{c}"/>"#);
                    }
                }
            }
            if !s.label.is_empty() {
                let ly = MARGIN + 16.0 * k as f64;
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="10" height="10" fill="{c}"/><text x="{}" y="{}">{}</text>"#,
                    W - MARGIN - 150.0,
                    ly - 9.0,
                    W - MARGIN - 135.0,
                    ly,
                    escape(&s.label)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
