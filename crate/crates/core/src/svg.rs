//! Radar and origami plots as SVG 1.1.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::aggregate::ScoreCard;
use crate::error::{Error, Result};

pub const CANVAS: f64 = 800.0;
pub const RADIUS: f64 = 350.0;
const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlotKind {
    Radar,
    Origami { h: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub axes: Vec<String>,
    /// Model name and normalized values, one per axis.
    pub polygons: Vec<(String, Vec<f64>)>,
}

impl PlotSpec {
    pub fn from_card(card: &ScoreCard, kind: PlotKind) -> Self {
        PlotSpec {
            kind,
            axes: card.axes.iter().map(|a| a.name.clone()).collect(),
            polygons: card.models.iter().map(|m| (m.name.clone(), m.normalized.clone())).collect(),
        }
    }
}

/// Polygon vertices on the unit-radius chart, centered at the origin. Radar
/// charts have one vertex per axis; origami charts interleave an auxiliary
/// vertex at radius `h` halfway between consecutive axes.
pub fn polygon_vertices(kind: PlotKind, values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    let step = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(2 * n);
    for (i, &r) in values.iter().enumerate() {
        let a = step * i as f64;
        out.push((r * a.cos(), r * a.sin()));
        if let PlotKind::Origami { h } = kind {
            let b = a + step / 2.0;
            out.push((h * b.cos(), h * b.sin()));
        }
    }
    out
}

pub fn shoelace_area(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() / 2.0
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn to_canvas(p: (f64, f64)) -> (f64, f64) {
    (CANVAS / 2.0 + RADIUS * p.0, CANVAS / 2.0 + RADIUS * p.1)
}

fn path_data(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, &p) in points.iter().enumerate() {
        let (x, y) = to_canvas(p);
        let _ = write!(d, "{}{x:.6},{y:.6} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

pub fn emit_svg(plot: &PlotSpec) -> Result<String> {
    let n = plot.axes.len();
    if n < 3 {
        return Err(Error::Invalid(format!("a plot needs at least 3 axes, got {n}")));
    }
    if let Some((name, v)) = plot.polygons.iter().find(|(_, v)| v.len() != n) {
        return Err(Error::Shape(format!("model {name} has {} values for {n} axes", v.len())));
    }
    if let PlotKind::Origami { h } = plot.kind {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::Invalid(format!("auxiliary radius h must lie in (0, 1], got {h}")));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let outline = polygon_vertices(PlotKind::Radar, &vec![1.0; n]);
    let _ = writeln!(s, r##"<path class="frame" d="{}" fill="none" stroke="#cccccc"/>"##, path_data(&outline));
    for (i, label) in plot.axes.iter().enumerate() {
        let (x, y) = to_canvas(outline[i]);
        let _ = writeln!(
            s,
            r##"<line class="axis" x1="{:.6}" y1="{:.6}" x2="{x:.6}" y2="{y:.6}" stroke="#999999"/>"##,
            CANVAS / 2.0,
            CANVAS / 2.0
        );
        let (lx, ly) = to_canvas((outline[i].0 * 1.08, outline[i].1 * 1.08));
        let _ = writeln!(
            s,
            r#"<text x="{lx:.6}" y="{ly:.6}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            escape(label)
        );
    }
    for (m, (name, values)) in plot.polygons.iter().enumerate() {
        let color = PALETTE[m % PALETTE.len()];
        let points = polygon_vertices(plot.kind, values);
        let _ = writeln!(
            s,
            r#"<path class="model" data-model="{}" d="{}" fill="{color}" fill-opacity="0.2" stroke="{color}" stroke-width="2"/>"#,
            escape(name),
            path_data(&points)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" fill="{color}">{}</text>"#,
            24 + 20 * m,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Vertices of every model polygon in an emitted document, mapped back to
/// the unit-radius chart.
pub fn model_polygons(svg: &str) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for line in svg.lines().filter(|l| l.contains(r#"class="model""#)) {
        let Some(start) = line.find(" d=\"").map(|i| i + 4) else { continue };
        let Some(len) = line[start..].find('"') else { continue };
        let points = line[start..start + len]
            .split_whitespace()
            .filter(|t| *t != "Z")
            .filter_map(|t| {
                let (x, y) = t.trim_start_matches(['M', 'L']).split_once(',')?;
                let (x, y): (f64, f64) = (x.parse().ok()?, y.parse().ok()?);
                Some(((x - CANVAS / 2.0) / RADIUS, (y - CANVAS / 2.0) / RADIUS))
            })
            .collect();
        out.push(points);
    }
    out
}
