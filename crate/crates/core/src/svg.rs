//! Deterministic SVG rendering of trees and point sets.

use std::fmt::Write;

use num_complex::Complex64 as C64;

use crate::geom_tree::{bounding_box, GeomTree};

/// What a layer draws.
#[derive(Debug, Clone)]
pub enum LayerContent {
    Tree(GeomTree),
    Points(Vec<C64>),
}

#[derive(Debug, Clone)]
pub struct Layer {
    /// Used as the group id and CSS class.
    pub name: String,
    pub content: LayerContent,
    pub stroke: String,
    /// Stroke width as a fraction of the drawing's larger side.
    pub stroke_width: f64,
    /// Draw vertices of trees as circles.
    pub show_vertices: bool,
}

impl Layer {
    pub fn tree(name: &str, tree: &GeomTree, stroke: &str) -> Self {
        Layer {
            name: name.to_string(),
            content: LayerContent::Tree(tree.clone()),
            stroke: stroke.to_string(),
            stroke_width: 0.002,
            show_vertices: false,
        }
    }

    pub fn points(name: &str, points: &[C64], stroke: &str) -> Self {
        Layer {
            name: name.to_string(),
            content: LayerContent::Points(points.to_vec()),
            stroke: stroke.to_string(),
            stroke_width: 0.002,
            show_vertices: false,
        }
    }

    pub fn with_stroke_width(mut self, w: f64) -> Self {
        self.stroke_width = w;
        self
    }

    pub fn with_vertices(mut self) -> Self {
        self.show_vertices = true;
        self
    }

    fn points_iter(&self) -> Box<dyn Iterator<Item = C64> + '_> {
        match &self.content {
            LayerContent::Tree(t) => Box::new(t.all_points()),
            LayerContent::Points(p) => Box::new(p.iter().copied()),
        }
    }
}

/// Fixed-precision number formatting; keeps output byte-stable.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Renders the layers into one SVG document. The y axis points up.
pub fn render_svg(layers: &[Layer]) -> String {
    let bbox = bounding_box(layers.iter().flat_map(|l| l.points_iter()));
    let (lo, hi) = bbox.unwrap_or((C64::new(-1.0, -1.0), C64::new(1.0, 1.0)));
    let mut w = hi.re - lo.re;
    let mut h = hi.im - lo.im;
    let side = w.max(h).max(1e-12);
    w = w.max(side * 1e-3);
    h = h.max(side * 1e-3);
    let margin = 0.05 * side;
    let (x0, y0) = (lo.re - margin, -(lo.im + h) - margin);
    let (vw, vh) = (w + 2.0 * margin, h + 2.0 * margin);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        num(x0),
        num(y0),
        num(vw),
        num(vh),
        (800.0 * vh / vw).round() as i64
    );
    for layer in layers {
        let sw = num(layer.stroke_width * side);
        let _ = writeln!(
            out,
            r#"<g id="{0}" class="{0}" fill="none" stroke="{1}" stroke-width="{2}" stroke-linecap="round" stroke-linejoin="round">"#,
            layer.name, layer.stroke, sw
        );
        match &layer.content {
            LayerContent::Tree(t) => {
                for e in &t.edges {
                    let mut d = String::new();
                    for (k, z) in e.polyline.iter().enumerate() {
                        let _ = write!(d, "{}{} {}", if k == 0 { "M" } else { " L" }, num(z.re), num(-z.im));
                    }
                    let _ = writeln!(out, r#"<path d="{d}"/>"#);
                }
                if layer.show_vertices {
                    let r = num(layer.stroke_width * side * 1.5);
                    for z in &t.vertices {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                            num(z.re),
                            num(-z.im),
                            r,
                            layer.stroke
                        );
                    }
                }
            }
            LayerContent::Points(pts) => {
                let r = num(layer.stroke_width * side);
                for z in pts {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{}" cy="{}" r="{}" fill="{}" stroke="none"/>"#,
                        num(z.re),
                        num(-z.im),
                        r,
                        layer.stroke
                    );
                }
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
