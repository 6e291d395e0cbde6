//! Sampled test continua.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

/// Points per unit length used by the samplers.
pub const DENSITY: f64 = 500.0;

fn polyline(corners: &[C64]) -> Vec<C64> {
    let mut out = vec![corners[0]];
    for w in corners.windows(2) {
        let pieces = ((w[1] - w[0]).norm() * DENSITY).ceil().max(1.0) as usize;
        out.extend((1..pieces).map(|k| w[0] + (w[1] - w[0]) * (k as f64 / pieces as f64)));
        out.push(w[1]);
    }
    out
}

/// Horizontal segment from `0.1 + 0.5i` to `0.9 + 0.5i`.
pub fn segment() -> Vec<C64> {
    polyline(&[C64::new(0.1, 0.5), C64::new(0.9, 0.5)])
}

/// Circle of radius 0.4 about `0.5 + 0.5i`.
pub fn circle() -> Vec<C64> {
    let n = (2.0 * PI * 0.4 * DENSITY).ceil() as usize;
    (0..n).map(|k| C64::new(0.5, 0.5) + C64::from_polar(0.4, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// The L through `0.1 + 0.9i`, `0.1 + 0.1i`, `0.9 + 0.1i`.
pub fn l_polyline() -> Vec<C64> {
    polyline(&[C64::new(0.1, 0.9), C64::new(0.1, 0.1), C64::new(0.9, 0.1)])
}

/// A plus sign centred at `0.5 + 0.5i` with arms of length 0.4.
pub fn plus() -> Vec<C64> {
    let c = C64::new(0.5, 0.5);
    let mut out = polyline(&[c - 0.4, c + 0.4]);
    out.extend(polyline(&[c - C64::new(0.0, 0.4), c + C64::new(0.0, 0.4)]));
    out
}

/// Looks a shape up by name.
pub fn by_name(name: &str) -> Option<Vec<C64>> {
    match name {
        "segment" => Some(segment()),
        "circle" => Some(circle()),
        "l-polyline" | "L" => Some(l_polyline()),
        "plus" => Some(plus()),
        _ => None,
    }
}

pub const NAMES: [&str; 4] = ["segment", "circle", "l-polyline", "plus"];
