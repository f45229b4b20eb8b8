//! Minimal SVG line and scatter plots.

use std::fmt::Write;

use crate::first_maps::BoundaryLabel;
use crate::geometry::ParamDomain;
use crate::hybrid::{HybridTrajectory, Mode};
use crate::planar::ParametricMapSample;
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub style: Style,
    /// Points; a NaN coordinate breaks a line.
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, color: impl Into<String>, style: Style, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), color: color.into(), style, points }
    }
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: f64,
    pub height: f64,
    /// Fixed ranges; computed from the data when absent.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    /// Keep one unit in x the same length as one unit in y.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

const MARGIN: f64 = 48.0;

pub fn label_color(l: BoundaryLabel) -> &'static str {
    match l {
        BoundaryLabel::A1 => "#d95f02",
        BoundaryLabel::A2 => "#1b9e77",
        BoundaryLabel::A3 => "#7570b3",
        BoundaryLabel::B => "#e7298a",
        BoundaryLabel::C => "#386cb0",
        BoundaryLabel::Unresolved => "#999999",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Round tick spacing near `span / 5`.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag)
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 560.0,
            height: 420.0,
            x_range: None,
            y_range: None,
            equal_aspect: false,
            series: Vec::new(),
        }
    }

    pub fn ranges(mut self, x: (f64, f64), y: (f64, f64)) -> Self {
        self.x_range = Some(x);
        self.y_range = Some(y);
        self
    }

    pub fn push(&mut self, s: Series) {
        self.series.push(s);
    }

    pub fn to_svg(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1) = self.x_range.unwrap_or_else(|| extent(pts().map(|p| p.0)));
        let (mut y0, mut y1) = self.y_range.unwrap_or_else(|| extent(pts().map(|p| p.1)));
        let (pw, ph) = (self.width - 2.0 * MARGIN, self.height - 2.0 * MARGIN);
        if self.equal_aspect {
            let k = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            (x0, x1) = (cx - 0.5 * k * pw, cx + 0.5 * k * pw);
            (y0, y1) = (cy - 0.5 * k * ph, cy + 0.5 * k * ph);
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| self.height - MARGIN - (y - y0) / (y1 - y0) * ph;
        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ =
            writeln!(o, r##"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
        for (lo, hi, vertical) in [(x0, x1, true), (y0, y1, false)] {
            let step = tick_step(hi - lo);
            let digits = (-step.log10().floor()).max(0.0) as usize;
            let mut k = (lo / step).ceil();
            while k * step <= hi + 1e-9 * step {
                let v = k * step;
                let label = format!("{v:.digits$}");
                if vertical {
                    let x = sx(v);
                    let _ = writeln!(
                        o,
                        r##"<line x1="{x:.2}" y1="{a:.2}" x2="{x:.2}" y2="{b:.2}" stroke="#ddd"/><text x="{x:.2}" y="{ty:.2}" text-anchor="middle">{label}</text>"##,
                        a = MARGIN,
                        b = self.height - MARGIN,
                        ty = self.height - MARGIN + 14.0
                    );
                } else {
                    let y = sy(v);
                    let _ = writeln!(
                        o,
                        r##"<line x1="{a:.2}" y1="{y:.2}" x2="{b:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{tx:.2}" y="{ty:.2}" text-anchor="end">{label}</text>"##,
                        a = MARGIN,
                        b = self.width - MARGIN,
                        tx = MARGIN - 4.0,
                        ty = y + 4.0
                    );
                }
                k += 1.0;
            }
        }
        for s in &self.series {
            match s.style {
                Style::Line => {
                    let mut d = String::new();
                    let mut pen_down = false;
                    for &(x, y) in &s.points {
                        if !(x.is_finite() && y.is_finite()) {
                            pen_down = false;
                            continue;
                        }
                        let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
                        pen_down = true;
                    }
                    let _ = writeln!(
                        o,
                        r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                        d.trim_end(),
                        s.color
                    );
                }
                Style::Dots => {
                    for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                        let _ =
                            writeln!(o, r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{}"/>"#, sx(x), sy(y), s.color);
                    }
                }
            }
        }
        let mut ly = MARGIN + 14.0;
        for s in self.series.iter().filter(|s| !s.label.is_empty()) {
            let lx = self.width - MARGIN - 110.0;
            let _ = writeln!(
                o,
                r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                ly - 9.0,
                s.color,
                lx + 14.0,
                escape(&s.label)
            );
            ly += 14.0;
        }
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            self.width / 2.0,
            MARGIN - 16.0,
            escape(&self.title)
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            self.width / 2.0,
            self.height - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            self.height / 2.0,
            self.height / 2.0,
            escape(&self.y_label)
        );
        o.push_str("</svg>\n");
        o
    }
}

/// `F(s)` against `s` for each map, over the diagonal.
pub fn map_plot(title: &str, maps: &[(&ParametricMapSample, &str, &str)]) -> Plot {
    let mut p = Plot::new(title, "s", "F(s)");
    let all = maps.iter().flat_map(|m| m.0.samples.iter());
    let (lo, hi) = match maps.first().map(|m| m.0.domain) {
        Some(ParamDomain::Line) => extent(all.flat_map(|s| [Some(s.s), s.value]).flatten()),
        _ => (0.0, 1.0),
    };
    p = p.ranges((lo, hi), (lo, hi));
    p.push(Series::new("", "#bbbbbb", Style::Line, vec![(lo, lo), (hi, hi)]));
    for (m, label, color) in maps {
        let pts = m.samples.iter().filter_map(|s| s.value.map(|v| (s.s, v))).collect();
        p.push(Series::new(*label, *color, Style::Dots, pts));
    }
    p
}

/// Boundary samples `c(s)` colored by type.
pub fn types_plot(title: &str, points: &[(Point, BoundaryLabel)]) -> Plot {
    let mut p = Plot::new(title, "x", "y");
    p.equal_aspect = true;
    for l in [
        BoundaryLabel::A1,
        BoundaryLabel::A2,
        BoundaryLabel::A3,
        BoundaryLabel::B,
        BoundaryLabel::C,
        BoundaryLabel::Unresolved,
    ] {
        let pts: Vec<_> = points.iter().filter(|q| q.1 == l).map(|q| (q.0.x, q.0.y)).collect();
        if !pts.is_empty() {
            p.push(Series::new(l.as_str(), label_color(l), Style::Dots, pts));
        }
    }
    p
}

/// Flow and sliding segments of a hybrid trajectory; jumps show as gaps.
pub fn trajectory_plot(title: &str, traj: &HybridTrajectory) -> Plot {
    let mut p = Plot::new(title, "x", "y");
    let mut flow = Vec::new();
    let mut slide = Vec::new();
    for seg in &traj.segments {
        let target = if seg.mode == Mode::Flow { &mut flow } else { &mut slide };
        target.extend(seg.path.iter().map(|&(_, q)| (q.x, q.y)));
        target.push((f64::NAN, f64::NAN));
    }
    p.push(Series::new("flow", "#386cb0", Style::Line, flow));
    if slide.len() > 1 {
        p.push(Series::new("sliding", "#d95f02", Style::Line, slide));
    }
    let jumps = traj.jumps.iter().flat_map(|j| [(j.pre.x, j.pre.y), (j.post.x, j.post.y)]).collect();
    p.push(Series::new("jump ends", "#e7298a", Style::Dots, jumps));
    p
}
