//! Planar and linear domains, distance to the boundary, curve fixtures and
//! geometric criteria (Ahlfors three-point constant, box-counting dimension,
//! sampled quasisymmetry modulus).

mod ahlfors;
mod dimension;
mod distance;
mod domain;
mod fixtures;
mod nazarov;
mod quasisymmetry;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ahlfors::{ahlfors_constant, ahlfors_trend, AhlforsReport};
pub use dimension::{box_counting_dimension, sample_intervals, sample_polyline, scale_ladder, DimensionReport};
pub use distance::{DistanceMode, DistanceOracle};
pub use domain::{DomainSpec, IntervalUnion, LengthRule};
pub use fixtures::{CANTOR_MAX_DEPTH, KOCH_MAX_ITERATIONS, 
    cantor_remainder,
    build_cantor_gaps, build_koch_snowflake, build_nazarov_domain, cantor_gaps_exact, graph_curve, regular_polygon,
    CantorGap,
};
pub use nazarov::{NazarovGeometry, NAZAROV_MAX_N};
pub use quasisymmetry::{sample_domain_points, sample_quasisymmetry_modulus, ModulusBin, ModulusTable, TripleSamplePlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("invalid geometry: {0}")]
    Validation(String),
    /// Strict distance queries outside the closed domain; carries the signed (negative) distance.
    #[error("exterior point (signed distance {distance})")]
    Exterior { distance: f64 },
}

/// A point of the plane, identified with `x + iy`. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// A point of the real line embedded in the plane.
    pub const fn on_line(x: f64) -> Self {
        Point2 { x, y: 0.0 }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Point2::new(z.re, z.im)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned window `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// A polyline: closed (a polygon) or open (a window of an arc, possibly one
/// with an endpoint at infinity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    pub closed: bool,
    #[serde(rename = "points")]
    pub vertices: Vec<Point2>,
    /// Truncation parameters `(start, end)` of the curve's parameter when the
    /// true curve is unbounded and only a window is represented.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
}

impl ClosedCurve {
    pub fn new(vertices: Vec<Point2>, closed: bool) -> Result<Self, GeometryError> {
        let c = ClosedCurve { closed, vertices, window: None };
        c.validate()?;
        Ok(c)
    }

    pub fn with_window(mut self, start: f64, end: f64) -> Self {
        self.window = Some((start, end));
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        if self.closed && n < 3 {
            return Err(GeometryError::Validation(format!("closed curve needs at least 3 vertices, got {n}")));
        }
        if !self.closed && n < 2 {
            return Err(GeometryError::Validation(format!("open curve needs at least 2 vertices, got {n}")));
        }
        if let Some(i) = self.vertices.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::Validation(format!("vertex {i} is not finite")));
        }
        for (i, pair) in self.edges().enumerate() {
            if pair.0 == pair.1 {
                return Err(GeometryError::Validation(format!("repeated consecutive vertex at edge {i}")));
            }
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..self.edge_count()).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// Shoelace signed area (closed curves).
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
    }

    /// Image under a similarity `z -> scale * e^{i angle} z + shift`.
    pub fn similarity(&self, scale: f64, angle: f64, shift: Point2) -> ClosedCurve {
        let rot = Complex64::from_polar(scale, angle);
        let vertices = self
            .vertices
            .iter()
            .map(|p| Point2::from_complex(rot * p.to_complex()) + shift)
            .collect();
        ClosedCurve { closed: self.closed, vertices, window: self.window }
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_serializes_as_pair() {
        let s = serde_json::to_string(&Point2::new(1.5, -2.0)).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let p: Point2 = serde_json::from_str("[0.25, 4]").unwrap();
        assert_eq!(p, Point2::new(0.25, 4.0));
    }

    #[test]
    fn curve_file_shape() {
        let c: ClosedCurve = serde_json::from_str(r#"{"closed": true, "points": [[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!(c.validate().is_ok());
        assert_eq!(c.edge_count(), 3);
        assert!((c.signed_area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_curves() {
        let p = Point2::new(1.0, 1.0);
        assert!(ClosedCurve::new(vec![Point2::ORIGIN, p, p], true).is_err());
        assert!(ClosedCurve::new(vec![Point2::ORIGIN, p], true).is_err());
        assert!(ClosedCurve::new(vec![Point2::ORIGIN, Point2::new(f64::NAN, 0.0)], false).is_err());
    }

    #[test]
    fn segment_distance_cases() {
        let (a, b) = (Point2::ORIGIN, Point2::new(2.0, 0.0));
        assert_eq!(segment_distance(Point2::new(1.0, 3.0), a, b), 3.0);
        assert_eq!(segment_distance(Point2::new(5.0, 4.0), a, b), 5.0);
    }
}
