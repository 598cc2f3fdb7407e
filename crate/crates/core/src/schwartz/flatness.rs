use serde::{Deserialize, Serialize};

use super::{SchwartzError, TestFunction};
use crate::numeric::{factorial, fd_weights_on};

/// Default tolerance on Taylor coefficients.
pub const FLATNESS_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessPoint {
    pub point: Vec<f64>,
    /// Signs of the one-sided stencil along each axis.
    pub direction: Vec<f64>,
    /// `|d^a f / a!|` for `|a| <= max_order`; row-major `[i][j]` flattened in two dimensions.
    pub coefficients: Vec<f64>,
    /// Rounding allowance added to the tolerance, per coefficient.
    pub allowance: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub max_order: usize,
    pub step: f64,
    pub tolerance: f64,
    pub max_coefficient: f64,
    pub points: Vec<FlatnessPoint>,
    pub pass: bool,
}

/// Inward axis signs at `p` from the gradient of the signed boundary distance.
fn inward_signs(f: &TestFunction, p: &[f64], step: f64) -> Result<Vec<f64>, SchwartzError> {
    let eta = step * 1e-2;
    let mut out = Vec::with_capacity(p.len());
    for axis in 0..p.len() {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[axis] += eta;
        b[axis] -= eta;
        let g = f.boundary_distance(&a)? - f.boundary_distance(&b)?;
        out.push(if g < 0.0 { -1.0 } else { 1.0 });
    }
    Ok(out)
}

/// One-sided finite-difference Taylor coefficients of the zero extension of `f` at each point.
///
/// The stencil uses nodes `0..=max_order + 2` steps of size `step` along each axis,
/// oriented into the domain. A point passes when every coefficient is at most
/// `tolerance` plus the rounding allowance of its stencil.
pub fn flatness_check(
    f: &TestFunction,
    points: &[Vec<f64>],
    max_order: usize,
    step: f64,
    tolerance: f64,
) -> Result<FlatnessReport, SchwartzError> {
    if max_order > 4 {
        return Err(SchwartzError::Parameter(format!("flatness order {max_order} exceeds 4")));
    }
    if !(step > 0.0) {
        return Err(SchwartzError::Parameter("flatness step must be positive".into()));
    }
    let nodes: Vec<f64> = (0..=max_order + 2).map(|i| i as f64).collect();
    let weights: Vec<Vec<f64>> = (0..=max_order).map(|k| fd_weights_on(k, &nodes)).collect();
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let dir = inward_signs(f, p, step)?;
        let (coefficients, allowance) = match p.len() {
            1 => {
                let samples: Vec<f64> = nodes
                    .iter()
                    .map(|t| f.value_ext(&[p[0] + dir[0] * t * step]))
                    .collect::<Result<_, _>>()?;
                let big = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (0..=max_order)
                    .map(|k| {
                        let w = &weights[k];
                        let scale = step.powi(k as i32) * factorial(k);
                        let d: f64 = w.iter().zip(&samples).map(|(a, b)| a * b).sum();
                        let abs_w: f64 = w.iter().map(|a| a.abs()).sum();
                        ((d / scale).abs(), 4.0 * f64::EPSILON * big * abs_w / scale)
                    })
                    .unzip()
            }
            2 => {
                let n = nodes.len();
                let mut grid = vec![0.0; n * n];
                for (a, s) in nodes.iter().enumerate() {
                    for (b, t) in nodes.iter().enumerate() {
                        grid[a * n + b] = f.value_ext(&[p[0] + dir[0] * s * step, p[1] + dir[1] * t * step])?;
                    }
                }
                let big = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let mut c = Vec::new();
                let mut r = Vec::new();
                for i in 0..=max_order {
                    for j in 0..=(max_order - i) {
                        let (wx, wy) = (&weights[i], &weights[j]);
                        let mut acc = 0.0;
                        for a in 0..n {
                            for b in 0..n {
                                acc += wx[a] * wy[b] * grid[a * n + b];
                            }
                        }
                        // one-sided nodes run in the `dir` orientation
                        let sign = dir[0].powi(i as i32) * dir[1].powi(j as i32);
                        let scale = step.powi((i + j) as i32) * factorial(i) * factorial(j);
                        let abs_w: f64 = wx.iter().map(|v| v.abs()).sum::<f64>() * wy.iter().map(|v| v.abs()).sum::<f64>();
                        c.push((sign * acc / scale).abs());
                        r.push(4.0 * f64::EPSILON * big * abs_w / scale);
                    }
                }
                (c, r)
            }
            d => return Err(SchwartzError::Parameter(format!("point of dimension {d}"))),
        };
        let pass = coefficients.iter().zip(&allowance).all(|(c, a)| *c <= tolerance + a);
        out.push(FlatnessPoint { point: p.clone(), direction: dir, coefficients, allowance, pass });
    }
    let max_coefficient = out.iter().flat_map(|r| r.coefficients.iter().copied()).fold(0.0, f64::max);
    let pass = out.iter().all(|r| r.pass);
    Ok(FlatnessReport { max_order, step, tolerance, max_coefficient, points: out, pass })
}
