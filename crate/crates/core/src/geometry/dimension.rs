use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{ClosedCurve, GeometryError, Point2};
use crate::numeric::ols;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    /// Box sizes, strictly decreasing.
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln count` against `ln(1 / scale)`.
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub fit_quality: f64,
    pub sample_count: usize,
}

/// `count` box sizes `largest, largest/2, largest/4, ...`.
pub fn scale_ladder(largest: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| largest * 0.5f64.powi(k as i32)).collect()
}

/// Points along every edge of a polyline, at most `h` apart.
pub fn sample_polyline(curve: &ClosedCurve, h: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    for (a, b) in curve.edges() {
        let steps = ((a.dist(b) / h).ceil() as usize).max(1);
        for i in 0..steps {
            out.push(a + (b - a) * (i as f64 / steps as f64));
        }
    }
    if !curve.closed {
        out.push(*curve.vertices.last().unwrap());
    }
    out
}

/// Points along closed intervals of the real line, at most `h` apart.
pub fn sample_intervals(intervals: &[(f64, f64)], h: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    for &(a, b) in intervals {
        let steps = (((b - a) / h).ceil() as usize).max(1);
        for i in 0..=steps {
            out.push(Point2::on_line(a + (b - a) * i as f64 / steps as f64));
        }
    }
    out
}

/// Box-counting estimate on a grid anchored at the origin.
///
/// Needs at least 4 scales spanning at least two decades.
pub fn box_counting_dimension(points: &[Point2], scales: &[f64]) -> Result<DimensionReport, GeometryError> {
    if scales.len() < 4 {
        return Err(GeometryError::Parameter(format!("need at least 4 scales, got {}", scales.len())));
    }
    if scales.windows(2).any(|w| !(w[1] < w[0])) || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(GeometryError::Parameter("scales must be positive and strictly decreasing".into()));
    }
    let span = scales[0] / scales[scales.len() - 1];
    if span < 100.0 * (1.0 - 1e-12) {
        return Err(GeometryError::Parameter(format!("scales span a factor {span:.3}, need at least 100")));
    }
    if points.is_empty() {
        return Err(GeometryError::Parameter("no sample points".into()));
    }
    let counts: Vec<usize> = scales
        .iter()
        .map(|&s| {
            let boxes: HashSet<(i64, i64)> =
                points.iter().map(|p| ((p.x / s).floor() as i64, (p.y / s).floor() as i64)).collect();
            boxes.len()
        })
        .collect();
    let xs: Vec<f64> = scales.iter().map(|s| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = ols(&xs, &ys).ok_or_else(|| GeometryError::Parameter("degenerate scale ladder".into()))?;
    Ok(DimensionReport {
        scales: scales.to_vec(),
        counts,
        slope: fit.slope,
        intercept: fit.intercept,
        fit_quality: fit.r_squared,
        sample_count: points.len(),
    })
}
