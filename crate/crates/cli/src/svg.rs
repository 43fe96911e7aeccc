//! Minimal self-contained SVG plots: axes with ticks, bars, polylines,
//! points and horizontal reference lines.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Five evenly spaced tick values across `range`.
fn ticks(range: (f64, f64)) -> Vec<f64> {
    (0..=4)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / 4.0)
        .collect()
}

impl Plot {
    /// Degenerate ranges are widened so every coordinate stays finite.
    pub fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_range: widen(x_range),
            y_range: widen(y_range),
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * (HEIGHT - TOP - BOTTOM)
    }

    /// Bars of width `width` centred on each `x`, rising from zero.
    pub fn bars(&mut self, data: &[(f64, f64)], width: f64, fill: &str) {
        for &(x, y) in data {
            let (x0, x1) = (self.px(x - width / 2.0), self.px(x + width / 2.0));
            let (y0, y1) = (self.py(0.0_f64.max(self.y_range.0)), self.py(y));
            writeln!(
                self.body,
                r#"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="none"/>"#,
                y1.min(y0),
                x1 - x0,
                (y0 - y1).abs()
            )
            .unwrap();
        }
    }

    pub fn line(&mut self, data: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = data
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }

    pub fn points(&mut self, data: &[(f64, f64)], fill: &str) {
        for &(x, y) in data {
            writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{fill}"/>"#,
                self.px(x),
                self.py(y)
            )
            .unwrap();
        }
    }

    pub fn hline(&mut self, y: f64, stroke: &str, label: &str) {
        let (x0, x1, py) = (self.px(self.x_range.0), self.px(self.x_range.1), self.py(y));
        writeln!(
            self.body,
            r#"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="{stroke}" stroke-dasharray="6 4"/>"#
        )
        .unwrap();
        writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end" fill="{stroke}">{}</text>"#,
            x1 - 4.0,
            py - 4.0,
            escape(label)
        )
        .unwrap();
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        writeln!(
            s,
            r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        for t in ticks(self.x_range) {
            let x = self.px(t);
            writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.1}" stroke="black"/><text x="{x:.2}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                tick_label(t)
            )
            .unwrap();
        }
        for t in ticks(self.y_range) {
            let y = self.py(t);
            writeln!(
                s,
                r#"<line x1="{:.1}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                tick_label(t)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="18" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_map_to_plot_area() {
        let p = Plot::new("t", "x", "y", (0.0, 4.0), (-1.0, 1.0));
        assert_eq!(p.px(0.0), LEFT);
        assert_eq!(p.px(4.0), WIDTH - RIGHT);
        assert_eq!(p.py(-1.0), HEIGHT - BOTTOM);
        assert_eq!(p.py(1.0), TOP);
    }

    #[test]
    fn render_is_well_formed_and_escaped() {
        let mut p = Plot::new("a<b & c", "s", "P(s)", (0.0, 1.0), (0.0, 1.0));
        p.bars(&[(0.5, 0.5)], 0.1, "#ccc");
        p.line(&[(0.0, 0.0), (1.0, 1.0)], "red");
        p.points(&[(0.2, 0.3)], "blue");
        p.hline(0.69, "gray", "ln 2");
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b &amp; c"));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn degenerate_range_is_widened() {
        let p = Plot::new("t", "x", "y", (1.0, 1.0), (0.0, 0.0));
        assert!(p.px(1.0).is_finite() && p.py(0.0).is_finite());
    }

    #[test]
    fn tick_labels_are_compact() {
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(2.0), "2");
        assert_eq!(tick_label(-0.0001), "0");
    }
}
