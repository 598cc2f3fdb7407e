use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DistanceOracle, GeometryError, Point2, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleSamplePlan {
    /// Number of sample points; all ordered triples of distinct points are scanned.
    pub points: usize,
    pub seed: u64,
    /// Sampling window; points are drawn uniformly in it and kept when inside the domain.
    pub window: Rect,
    /// Bin edges for `t = |x - y| / |x - z|`, increasing.
    pub bin_edges: Vec<f64>,
}

impl TripleSamplePlan {
    /// Log-spaced bins from `1e-2` to `1e2`.
    pub fn new(points: usize, seed: u64, window: Rect) -> Self {
        let bin_edges = (0..=16).map(|k| 10f64.powf(-2.0 + 0.25 * k as f64)).collect();
        TripleSamplePlan { points, seed, window, bin_edges }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusBin {
    pub t_lo: f64,
    pub t_hi: f64,
    pub count: usize,
    /// Largest observed `|f(x) - f(y)| / |f(x) - f(z)|`; `0` for an empty bin.
    pub max_ratio: f64,
    /// Largest `t` seen in the bin.
    pub max_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub bins: Vec<ModulusBin>,
    /// Triples skipped for coincident points or failed evaluation.
    pub skipped: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub window: Rect,
}

impl ModulusTable {
    pub fn overall_max(&self) -> f64 {
        self.bins.iter().map(|b| b.max_ratio).fold(0.0, f64::max)
    }
}

/// Draw the plan's sample points inside `domain`.
pub fn sample_domain_points(domain: &DistanceOracle, plan: &TripleSamplePlan) -> Result<Vec<Point2>, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let w = plan.window;
    let mut pts = Vec::with_capacity(plan.points);
    let mut tries = 0usize;
    while pts.len() < plan.points {
        tries += 1;
        if tries > 1000 * plan.points.max(1) {
            return Err(GeometryError::Parameter("sampling window barely meets the domain".into()));
        }
        let p = Point2::new(rng.gen_range(w.x0..=w.x1), rng.gen_range(w.y0..=w.y1));
        if domain.contains(p) {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Empirical lower envelope of the distortion gauge of `map`: for every ordered
/// triple of distinct sample points, `t = |x - y| / |x - z|` is binned and the
/// largest image ratio per bin recorded.
pub fn sample_quasisymmetry_modulus<F>(
    map: F,
    domain: &DistanceOracle,
    plan: &TripleSamplePlan,
) -> Result<ModulusTable, GeometryError>
where
    F: Fn(Point2) -> Option<Point2>,
{
    if plan.bin_edges.len() < 2 || plan.bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GeometryError::Parameter("bin edges must be increasing".into()));
    }
    let pts = sample_domain_points(domain, plan)?;
    let images: Vec<Option<Point2>> = pts.iter().map(|&p| map(p).filter(|q| q.is_finite())).collect();
    let mut bins: Vec<ModulusBin> = plan
        .bin_edges
        .windows(2)
        .map(|w| ModulusBin { t_lo: w[0], t_hi: w[1], count: 0, max_ratio: 0.0, max_t: 0.0 })
        .collect();
    let mut skipped = 0;
    let n = pts.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || i == k || j == k {
                    continue;
                }
                let (dxy, dxz) = (pts[i].dist(pts[j]), pts[i].dist(pts[k]));
                let (Some(fx), Some(fy), Some(fz)) = (images[i], images[j], images[k]) else {
                    skipped += 1;
                    continue;
                };
                let den = fx.dist(fz);
                if dxy == 0.0 || dxz == 0.0 || den == 0.0 {
                    skipped += 1;
                    continue;
                }
                let t = dxy / dxz;
                let b = plan.bin_edges.partition_point(|&e| e <= t);
                if b == 0 || b == plan.bin_edges.len() {
                    continue;
                }
                let bin = &mut bins[b - 1];
                bin.count += 1;
                bin.max_ratio = bin.max_ratio.max(fx.dist(fy) / den);
                bin.max_t = bin.max_t.max(t);
            }
        }
    }
    Ok(ModulusTable { bins, skipped, sample_count: n, seed: plan.seed, window: plan.window })
}

#[cfg(test)]
mod tests {
    use super::super::DomainSpec;
    use super::*;

    #[test]
    fn identity_gauge_is_t() {
        let o = DistanceOracle::exact(DomainSpec::unit_disc()).unwrap();
        let plan = TripleSamplePlan::new(25, 7, Rect::new(-1.0, 1.0, -1.0, 1.0));
        let table = sample_quasisymmetry_modulus(Some, &o, &plan).unwrap();
        for b in &table.bins {
            if b.count > 0 {
                assert!((b.max_ratio - b.max_t).abs() <= 1e-12 * b.max_t);
            }
        }
        assert_eq!(table.skipped, 0);
    }

    #[test]
    fn coincident_images_are_skipped() {
        let o = DistanceOracle::exact(DomainSpec::unit_disc()).unwrap();
        let plan = TripleSamplePlan::new(6, 1, Rect::new(-1.0, 1.0, -1.0, 1.0));
        let table = sample_quasisymmetry_modulus(|_| Some(Point2::ORIGIN), &o, &plan).unwrap();
        assert_eq!(table.skipped, 6 * 5 * 4);
    }
}
