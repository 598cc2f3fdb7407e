use serde::{Deserialize, Serialize};

use super::{ClosedCurve, GeometryError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsReport {
    /// `max_{x,y} min diam(sub-arc) / |x - y|` over vertex pairs.
    pub constant: f64,
    /// Maximizing vertex pair `(i, j)`, `i < j`; smallest pair on ties.
    pub witness: (usize, usize),
    pub vertex_count: usize,
    pub closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
}

/// Three-point constant of a polyline, evaluated over vertex pairs.
///
/// For closed curves both sub-arcs between the pair are compared and the
/// smaller diameter is used; for open curves (windows of arcs) the sub-arc
/// between the pair. Diameters are exact: `diam[L][i]`, the diameter of the
/// vertex run `i..=i+L`, satisfies
/// `diam[L][i] = max(diam[L-1][i], diam[L-1][i+1], |v_i - v_{i+L}|)`,
/// which makes the whole scan `O(n^2)`.
pub fn ahlfors_constant(curve: &ClosedCurve) -> Result<AhlforsReport, GeometryError> {
    curve.validate()?;
    let v = &curve.vertices;
    let n = v.len();
    let at = |i: usize| v[i % n];
    // diam[L * n + i] for L in 0..=n (closed) or 0..n (open)
    let rows = n + 1;
    let mut diam = vec![0.0f64; rows * n];
    for l in 1..rows {
        for i in 0..n {
            if !curve.closed && i + l >= n {
                continue;
            }
            let prev = diam[(l - 1) * n + i].max(diam[(l - 1) * n + (i + 1) % n]);
            diam[l * n + i] = prev.max(at(i).dist(at(i + l)));
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut witness = (0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let chord = v[i].dist(v[j]);
            if chord == 0.0 {
                return Err(GeometryError::Validation(format!("vertices {i} and {j} coincide")));
            }
            let l = j - i;
            let inner = diam[l * n + i];
            let arc = if curve.closed { inner.min(diam[(n - l) * n + j]) } else { inner };
            let ratio = arc / chord;
            if ratio > best {
                best = ratio;
                witness = (i, j);
            }
        }
    }
    Ok(AhlforsReport { constant: best, witness, vertex_count: n, closed: curve.closed, window: curve.window })
}

/// Constants along a refinement sequence; the polyline value approaches the
/// curve's constant from below, so the trend is what gets reported.
pub fn ahlfors_trend(curves: &[ClosedCurve]) -> Result<Vec<AhlforsReport>, GeometryError> {
    curves.iter().map(ahlfors_constant).collect()
}
