//! Minimal SVG writer: paths, circles and text on a fixed canvas.

use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height, body: String::new() }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, closed: bool) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.3},{:.3} ", if i == 0 { 'M' } else { 'L' }, x, y);
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{fill}"/>"#);
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let s = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.3}" y="{y:.3}" font-size="{size}" font-family="sans-serif" text-anchor="{anchor}">{s}</text>"#
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="{stroke}"/>"#
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// A named series of `(x, y)` points with positive coordinates.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Log-log line plot with decade ticks.
pub fn loglog(title: &str, xlabel: &str, series: &[Series<'_>]) -> String {
    let (w, h) = (640.0, 440.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let pos: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    let mut svg = Svg::new(w, h);
    svg.text(w / 2.0, 24.0, 15.0, "middle", title);
    svg.rect(left, top, w - left - right, h - top - bottom, "#444");
    if pos.is_empty() {
        return svg.finish();
    }
    let lx = |v: f64| v.log10();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pos {
        x0 = x0.min(lx(x));
        x1 = x1.max(lx(x));
        y0 = y0.min(lx(y));
        y1 = y1.max(lx(y));
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |v: f64| left + (lx(v) - x0) / (x1 - x0) * (w - left - right);
    let py = |v: f64| h - bottom - (lx(v) - y0) / (y1 - y0) * (h - top - bottom);
    for d in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(d));
        svg.polyline(&[(x, h - bottom), (x, h - bottom + 5.0)], "#444", 1.0, false);
        svg.text(x, h - bottom + 18.0, 11.0, "middle", &format!("1e{d}"));
    }
    for d in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(d));
        svg.polyline(&[(left - 5.0, y), (left, y)], "#444", 1.0, false);
        svg.text(left - 8.0, y + 4.0, 11.0, "end", &format!("1e{d}"));
    }
    svg.text(w / 2.0, h - 12.0, 12.0, "middle", xlabel);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> =
            s.points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|&(x, y)| (px(x), py(y))).collect();
        svg.polyline(&pts, color, 1.5, false);
        for &(x, y) in &pts {
            svg.circle(x, y, 2.0, color);
        }
        svg.text(left + 10.0, top + 16.0 + 14.0 * i as f64, 11.0, "start", s.label);
        svg.polyline(&[(left + 100.0, top + 12.0 + 14.0 * i as f64), (left + 120.0, top + 12.0 + 14.0 * i as f64)], color, 2.0, false);
    }
    svg.finish()
}
