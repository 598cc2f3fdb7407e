use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::nazarov::NAZAROV_MAX_N;
use super::{ClosedCurve, DomainSpec, GeometryError, IntervalUnion, Point2};

pub const KOCH_MAX_ITERATIONS: usize = 8;
pub const CANTOR_MAX_DEPTH: u32 = 30;

/// Koch snowflake over the counter-clockwise equilateral triangle with side 1,
/// bumps pointing outward. Has `3 * 4^iterations` edges.
pub fn build_koch_snowflake(iterations: usize) -> Result<ClosedCurve, GeometryError> {
    if iterations > KOCH_MAX_ITERATIONS {
        return Err(GeometryError::Parameter(format!(
            "Koch iterations {iterations} outside 0..={KOCH_MAX_ITERATIONS}"
        )));
    }
    let mut pts = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 3f64.sqrt() / 2.0),
    ];
    let turn = Complex64::from_polar(1.0, -PI / 3.0);
    for _ in 0..iterations {
        let n = pts.len();
        let mut next = Vec::with_capacity(4 * n);
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let third = (b - a) / 3.0;
            next.push(a);
            next.push(a + third);
            next.push(a + third + third * turn);
            next.push(a + third * 2.0);
        }
        pts = next;
    }
    ClosedCurve::new(pts.into_iter().map(Point2::from_complex).collect(), true)
}

/// Regular `n`-gon inscribed in the circle of the given radius about the origin.
pub fn regular_polygon(n: usize, radius: f64) -> Result<ClosedCurve, GeometryError> {
    let pts = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point2::new(radius * t.cos(), radius * t.sin())
        })
        .collect();
    ClosedCurve::new(pts, true)
}

/// Open polyline through `(x, f(x))` at `samples` equally spaced `x` in `[a, b]`,
/// recorded with the window `(a, b)`.
pub fn graph_curve<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> Result<ClosedCurve, GeometryError> {
    if samples < 2 || !(a < b) {
        return Err(GeometryError::Parameter("graph needs a < b and at least 2 samples".into()));
    }
    let pts = (0..samples)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (samples - 1) as f64;
            Point2::new(x, f(x))
        })
        .collect();
    Ok(ClosedCurve::new(pts, false)?.with_window(a, b))
}

/// A middle-third gap `(k / 3^m, (k + 1) / 3^m)` with exact integer data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorGap {
    pub generation: u32,
    pub numerator: u64,
}

impl CantorGap {
    /// The `index`-th gap (1-based) in enumeration order: decreasing length,
    /// then increasing left endpoint.
    pub fn from_index(index: u64) -> Self {
        assert!(index >= 1);
        let generation = 64 - index.leading_zeros();
        let word = index - (1u64 << (generation - 1));
        // bits of `word` are the ternary digits 0/2 before the middle digit 1
        let mut numerator = 0u64;
        for bit in (0..generation - 1).rev() {
            numerator = 3 * numerator + 2 * ((word >> bit) & 1);
        }
        CantorGap { generation, numerator: 3 * numerator + 1 }
    }

    /// Inverse of `from_index`.
    pub fn index(&self) -> u64 {
        let mut word = 0u64;
        let mut k = self.numerator / 3;
        let mut bits = Vec::with_capacity(self.generation as usize);
        for _ in 1..self.generation {
            bits.push(k % 3 / 2);
            k /= 3;
        }
        for b in bits.iter().rev() {
            word = 2 * word + b;
        }
        (1u64 << (self.generation - 1)) + word
    }

    pub fn denominator(&self) -> u64 {
        3u64.pow(self.generation)
    }

    pub fn left(&self) -> f64 {
        self.numerator as f64 / self.denominator() as f64
    }

    pub fn right(&self) -> f64 {
        (self.numerator + 1) as f64 / self.denominator() as f64
    }

    /// `3^{-generation}`.
    pub fn length(&self) -> f64 {
        1.0 / self.denominator() as f64
    }

    /// The gap containing `y`, searching generations up to `depth`.
    pub fn containing(y: f64, depth: u32) -> Option<Self> {
        if !(y > 0.0 && y < 1.0) {
            return None;
        }
        let mut prefix = 0u64;
        for m in 1..=depth {
            let den = 3u64.pow(m) as f64;
            let k = (y * den).floor() as u64;
            match k.checked_sub(3 * prefix) {
                Some(1) => {
                    let gap = CantorGap { generation: m, numerator: k };
                    // guard against rounding at the gap edges
                    return (y > gap.left() && y < gap.right()).then_some(gap);
                }
                Some(0 | 2) => prefix = k,
                _ => return None,
            }
        }
        None
    }
}

/// Gaps of generations `1..=depth` in enumeration order, as exact rationals.
pub fn cantor_gaps_exact(depth: u32) -> Result<Vec<CantorGap>, GeometryError> {
    if !(1..=CANTOR_MAX_DEPTH).contains(&depth) {
        return Err(GeometryError::Parameter(format!("Cantor depth {depth} outside 1..={CANTOR_MAX_DEPTH}")));
    }
    let count = (1u64 << depth) - 1;
    Ok((1..=count).map(CantorGap::from_index).collect())
}

/// The gaps of the middle-thirds Cantor set up to `depth` generations, as an
/// interval union in enumeration order. Memory grows like `2^depth`.
pub fn build_cantor_gaps(depth: u32) -> Result<IntervalUnion, GeometryError> {
    let gaps = cantor_gaps_exact(depth)?;
    IntervalUnion::new(gaps.iter().map(|g| (g.left(), g.right())).collect())
}

/// The `2^depth` closed intervals left after removing `depth` generations of gaps.
pub fn cantor_remainder(depth: u32) -> Vec<(f64, f64)> {
    let den = 3f64.powi(depth as i32);
    (0..(1u64 << depth))
        .map(|word| {
            let mut k = 0u64;
            for bit in (0..depth).rev() {
                k = 3 * k + 2 * ((word >> bit) & 1);
            }
            (k as f64 / den, (k + 1) as f64 / den)
        })
        .collect()
}

pub fn build_nazarov_domain(n_max: usize) -> Result<DomainSpec, GeometryError> {
    if !(1..=NAZAROV_MAX_N).contains(&n_max) {
        return Err(GeometryError::Parameter(format!("n_max = {n_max} is outside 1..={NAZAROV_MAX_N}")));
    }
    Ok(DomainSpec::NazarovDomain { n_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn koch_counts_and_length() {
        assert_eq!(build_koch_snowflake(0).unwrap().vertices.len(), 3);
        assert_eq!(build_koch_snowflake(1).unwrap().edge_count(), 12);
        let k3 = build_koch_snowflake(3).unwrap();
        assert_eq!(k3.edge_count(), 192);
        assert!((k3.length() - 64.0 / 9.0).abs() < 1e-12);
        assert!(build_koch_snowflake(9).is_err());
        // outward bumps grow the area: 2 sqrt(3)/5 in the limit, sqrt(3)/4 * 4/3 after one step
        let k1 = build_koch_snowflake(1).unwrap();
        assert!((k1.signed_area() - 3f64.sqrt() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn koch_length_recurrence_all_levels() {
        for k in 0..=6 {
            let c = build_koch_snowflake(k).unwrap();
            let exact = 3.0 * (4.0f64 / 3.0).powi(k as i32);
            assert!((c.length() - exact).abs() <= 1e-12 * exact, "level {k}");
        }
    }

    #[test]
    fn cantor_order() {
        let g = cantor_gaps_exact(3).unwrap();
        let pairs: Vec<(u64, u64)> = g.iter().map(|g| (g.numerator, g.denominator())).collect();
        assert_eq!(pairs, vec![(1, 3), (1, 9), (7, 9), (1, 27), (7, 27), (19, 27), (25, 27)]);
        for (i, gap) in g.iter().enumerate() {
            assert_eq!(gap.index(), i as u64 + 1);
        }
    }

    #[test]
    fn cantor_counts_per_generation() {
        for depth in 1..=12u32 {
            let g = cantor_gaps_exact(depth).unwrap();
            assert_eq!(g.len() as u64, (1u64 << depth) - 1);
            for m in 1..=depth {
                assert_eq!(g.iter().filter(|x| x.generation == m).count() as u64, 1u64 << (m - 1));
            }
        }
        assert!(cantor_gaps_exact(0).is_err());
        assert!(cantor_gaps_exact(31).is_err());
    }

    #[test]
    fn containing_gap() {
        assert_eq!(CantorGap::containing(0.5, 3), Some(CantorGap { generation: 1, numerator: 1 }));
        assert_eq!(CantorGap::containing(5.0 / 12.0, 3), Some(CantorGap { generation: 1, numerator: 1 }));
        assert_eq!(CantorGap::containing(0.15, 3), Some(CantorGap { generation: 2, numerator: 1 }));
        assert_eq!(CantorGap::containing(0.0, 3), None);
        let deep = CantorGap::from_index(1_000_000);
        let mid = 0.5 * (deep.left() + deep.right());
        assert_eq!(CantorGap::containing(mid, 30), Some(deep));
    }

    #[test]
    fn remainder_complements_gaps() {
        let rem = cantor_remainder(3);
        assert_eq!(rem.len(), 8);
        let total: f64 = rem.iter().map(|(a, b)| b - a).sum::<f64>()
            + cantor_gaps_exact(3).unwrap().iter().map(|g| g.length()).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
