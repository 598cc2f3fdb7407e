use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{segment_distance, ClosedCurve, DomainSpec, GeometryError, NazarovGeometry, Point2, Rect};
use crate::numeric::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DistanceMode {
    Exact,
    /// Nearest point of a boundary discretization with spacing at most `h`.
    Sampled { h: f64 },
}

/// Distance to the complement of a domain.
///
/// `signed_distance` is positive inside, negative outside and zero on the
/// boundary; `distance` is the strict version that rejects exterior points.
#[derive(Clone, Debug)]
pub struct DistanceOracle {
    domain: DomainSpec,
    mode: DistanceMode,
    nazarov: Option<NazarovGeometry>,
    samples: Option<SampleIndex>,
    parts: Vec<DistanceOracle>,
}

impl DistanceOracle {
    pub fn exact(domain: DomainSpec) -> Result<Self, GeometryError> {
        domain.validate()?;
        let nazarov = match &domain {
            DomainSpec::NazarovDomain { n_max } => Some(NazarovGeometry::new(*n_max)?),
            _ => None,
        };
        let parts = match &domain {
            DomainSpec::Intersection { parts } => {
                parts.iter().cloned().map(DistanceOracle::exact).collect::<Result<_, _>>()?
            }
            _ => Vec::new(),
        };
        Ok(DistanceOracle { domain, mode: DistanceMode::Exact, nazarov, samples: None, parts })
    }

    /// Sampled oracle. `window` clips unbounded boundary pieces (half-plane, strip, cusp).
    pub fn sampled(domain: DomainSpec, h: f64, window: Option<Rect>) -> Result<Self, GeometryError> {
        if !(h > 0.0) {
            return Err(GeometryError::Parameter(format!("sample spacing h = {h} must be positive")));
        }
        let mut oracle = DistanceOracle::exact(domain)?;
        oracle.mode = DistanceMode::Sampled { h };
        if let DomainSpec::Intersection { parts } = &oracle.domain {
            oracle.parts =
                parts.iter().cloned().map(|d| DistanceOracle::sampled(d, h, window)).collect::<Result<_, _>>()?;
            return Ok(oracle);
        }
        if oracle.domain.is_line() {
            // endpoints are the whole boundary; nothing to discretize
            return Ok(oracle);
        }
        let pts = boundary_samples(&oracle.domain, oracle.nazarov.as_ref(), h, window)?;
        if pts.is_empty() {
            return Err(GeometryError::Parameter("boundary window contains no samples".into()));
        }
        oracle.samples = Some(SampleIndex::new(pts, h));
        Ok(oracle)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    pub fn nazarov(&self) -> Option<&NazarovGeometry> {
        self.nazarov.as_ref()
    }

    pub fn contains(&self, p: Point2) -> bool {
        match &self.domain {
            DomainSpec::Intersection { .. } => self.parts.iter().all(|o| o.contains(p)),
            DomainSpec::NazarovDomain { .. } => self.nazarov.as_ref().unwrap().contains(p),
            DomainSpec::CuspDomain { p: poly } => p.x > 0.0 && p.y > 0.0 && p.y < (-poly.eval(p.x)).exp(),
            _ => exact_signed_distance(&self.domain, p) > 0.0,
        }
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        if let DomainSpec::Intersection { .. } = self.domain {
            return self.parts.iter().map(|o| o.signed_distance(p)).fold(f64::INFINITY, f64::min);
        }
        match (&self.samples, self.mode) {
            (Some(index), DistanceMode::Sampled { .. }) => {
                let d = index.nearest(p);
                if self.contains(p) {
                    d
                } else {
                    -d
                }
            }
            _ => match &self.nazarov {
                Some(g) => g.signed_distance(p),
                None => exact_signed_distance(&self.domain, p),
            },
        }
    }

    /// Strict distance: an error carrying the (negative) signed distance for exterior points.
    pub fn distance(&self, p: Point2) -> Result<f64, GeometryError> {
        let d = self.signed_distance(p);
        if d < 0.0 {
            Err(GeometryError::Exterior { distance: d })
        } else {
            Ok(d)
        }
    }

    /// `(inside, ln |signed distance|)`; exact in log space for the disc chain,
    /// whose strips are far thinner than the smallest positive `f64`.
    pub fn ln_distance(&self, p: Point2) -> (bool, f64) {
        if let (Some(g), DistanceMode::Exact) = (&self.nazarov, self.mode) {
            return g.ln_distance(p);
        }
        let d = self.signed_distance(p);
        (d > 0.0, d.abs().ln())
    }

    /// Signed distance for domains on the real line.
    pub fn distance_1d(&self, x: f64) -> f64 {
        self.signed_distance(Point2::on_line(x))
    }
}

fn polygon_contains(curve: &ClosedCurve, p: Point2) -> bool {
    let v = &curve.vertices;
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn polyline_distance(curve: &ClosedCurve, p: Point2) -> f64 {
    curve.edges().map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// Signed distance to the boundary of the cusp `{u > 0, 0 < v < exp(-p(u))}`.
fn cusp_signed_distance(poly: &Polynomial, q: Point2) -> f64 {
    let (a, b) = (q.x, q.y);
    let w = |u: f64| (-poly.eval(u)).exp();
    let inside = a > 0.0 && b > 0.0 && b.ln() < -poly.eval(a);
    // left segment {0} x [0, w(0)] and bottom ray [0, inf) x {0}
    let seg = segment_distance(q, Point2::ORIGIN, Point2::new(0.0, w(0.0)));
    let ray = if a >= 0.0 { b.abs() } else { a.hypot(b) };
    let mut best = seg.min(ray);
    let graph_at = |u: f64| (u - a).hypot(w(u) - b);
    if a >= 0.0 {
        best = best.min(graph_at(a));
    }
    // the closest graph point lies within `best` of q horizontally
    let lo = (a - best).max(0.0);
    let hi = a + best;
    if hi > lo {
        const N: usize = 64;
        let step = (hi - lo) / N as f64;
        let mut k_best = 0;
        let mut f_best = f64::INFINITY;
        for k in 0..=N {
            let f = graph_at(lo + k as f64 * step);
            if f < f_best {
                f_best = f;
                k_best = k;
            }
        }
        let (mut l, mut r) = ((lo + (k_best as f64 - 1.0) * step).max(lo), (lo + (k_best as f64 + 1.0) * step).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let m1 = r - g * (r - l);
            let m2 = l + g * (r - l);
            if graph_at(m1) <= graph_at(m2) {
                r = m2;
            } else {
                l = m1;
            }
        }
        best = best.min(f_best).min(graph_at(0.5 * (l + r)));
    }
    if inside {
        best
    } else {
        -best
    }
}

/// Exact signed distance for every variant except the disc chain (handled by `NazarovGeometry`)
/// and intersections (handled by the oracle).
fn exact_signed_distance(domain: &DomainSpec, p: Point2) -> f64 {
    match domain {
        DomainSpec::Disc { center, radius } => radius - p.dist(*center),
        DomainSpec::ExteriorDisc { center, radius } => p.dist(*center) - radius,
        DomainSpec::HalfPlane => p.y,
        DomainSpec::Strip { x_min, height } => {
            let inside = p.x > *x_min && p.y > 0.0 && p.y < *height;
            if inside {
                (p.x - x_min).min(p.y).min(height - p.y)
            } else {
                let dx = (x_min - p.x).max(0.0);
                let dy = (-p.y).max(p.y - height).max(0.0);
                if dx == 0.0 && dy == 0.0 {
                    // on the boundary
                    0.0
                } else {
                    -dx.hypot(dy)
                }
            }
        }
        DomainSpec::CuspDomain { p: poly } => cusp_signed_distance(poly, p),
        DomainSpec::NazarovDomain { n_max } => NazarovGeometry::new(*n_max).map(|g| g.signed_distance(p)).unwrap_or(f64::NAN),
        DomainSpec::PolygonDomain { curve } => {
            let d = polyline_distance(curve, p);
            if polygon_contains(curve, p) {
                d
            } else {
                -d
            }
        }
        DomainSpec::SlitPlane { slit } => polyline_distance(slit, p),
        DomainSpec::IntervalDomain { intervals } => intervals.signed_distance(p.x),
        DomainSpec::Plane => f64::INFINITY,
        DomainSpec::PuncturedPlane { point } => p.dist(*point),
        DomainSpec::Intersection { parts } => {
            parts.iter().map(|d| exact_signed_distance(d, p)).fold(f64::INFINITY, f64::min)
        }
    }
}

fn sample_segment(out: &mut Vec<Point2>, a: Point2, b: Point2, h: f64) {
    let count = ((a.dist(b) / h).ceil() as usize).max(1);
    for i in 0..=count {
        out.push(a + (b - a) * (i as f64 / count as f64));
    }
}

fn sample_circle(out: &mut Vec<Point2>, c: Point2, r: f64, h: f64) {
    let count = ((2.0 * std::f64::consts::PI * r / h).ceil() as usize).max(16);
    for i in 0..count {
        let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
        out.push(Point2::new(c.x + r * t.cos(), c.y + r * t.sin()));
    }
}

fn need_window(window: Option<Rect>, what: &str) -> Result<Rect, GeometryError> {
    window.ok_or_else(|| GeometryError::Parameter(format!("sampled distance on {what} needs a window")))
}

fn boundary_samples(
    domain: &DomainSpec,
    nazarov: Option<&NazarovGeometry>,
    h: f64,
    window: Option<Rect>,
) -> Result<Vec<Point2>, GeometryError> {
    let mut out = Vec::new();
    match domain {
        DomainSpec::Disc { center, radius } | DomainSpec::ExteriorDisc { center, radius } => {
            sample_circle(&mut out, *center, *radius, h)
        }
        DomainSpec::HalfPlane => {
            let w = need_window(window, "a half-plane")?;
            sample_segment(&mut out, Point2::new(w.x0, 0.0), Point2::new(w.x1, 0.0), h);
        }
        DomainSpec::Strip { x_min, height } => {
            let w = need_window(window, "a strip")?;
            let x1 = w.x1.max(*x_min + h);
            sample_segment(&mut out, Point2::new(*x_min, 0.0), Point2::new(x1, 0.0), h);
            sample_segment(&mut out, Point2::new(*x_min, *height), Point2::new(x1, *height), h);
            sample_segment(&mut out, Point2::new(*x_min, 0.0), Point2::new(*x_min, *height), h);
        }
        DomainSpec::CuspDomain { p } => {
            let w = need_window(window, "a cusp")?;
            let u1 = w.x1.max(h);
            let top = (-p.eval(0.0)).exp();
            sample_segment(&mut out, Point2::ORIGIN, Point2::new(0.0, top), h);
            sample_segment(&mut out, Point2::ORIGIN, Point2::new(u1, 0.0), h);
            // graph, refined until consecutive samples are within h
            let mut u = 0.0;
            let mut prev = Point2::new(0.0, top);
            out.push(prev);
            while u < u1 {
                let mut du = h;
                loop {
                    let next = Point2::new(u + du, (-p.eval(u + du)).exp());
                    if next.dist(prev) <= h || du < 1e-12 {
                        break;
                    }
                    du *= 0.5;
                }
                u += du;
                prev = Point2::new(u, (-p.eval(u)).exp());
                out.push(prev);
            }
        }
        DomainSpec::NazarovDomain { .. } => out = nazarov.expect("chain geometry").boundary_samples(h),
        DomainSpec::PolygonDomain { curve: c } | DomainSpec::SlitPlane { slit: c } => {
            for (a, b) in c.edges() {
                sample_segment(&mut out, a, b, h);
            }
        }
        DomainSpec::IntervalDomain { .. } | DomainSpec::Intersection { .. } | DomainSpec::Plane => {}
        DomainSpec::PuncturedPlane { point } => out.push(*point),
    }
    Ok(out)
}

/// Uniform-grid bucket index for nearest-sample queries.
#[derive(Clone, Debug)]
struct SampleIndex {
    points: Vec<Point2>,
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    bounds: Rect,
}

impl SampleIndex {
    fn new(points: Vec<Point2>, h: f64) -> Self {
        let xs = points.iter().map(|p| p.x);
        let ys = points.iter().map(|p| p.y);
        let bounds = Rect::new(
            xs.clone().fold(f64::INFINITY, f64::min),
            xs.fold(f64::NEG_INFINITY, f64::max),
            ys.clone().fold(f64::INFINITY, f64::min),
            ys.fold(f64::NEG_INFINITY, f64::max),
        );
        let span = bounds.width().max(bounds.height()).max(h);
        let cell = (span / (points.len() as f64).sqrt()).max(4.0 * h);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(cell, *p)).or_default().push(i);
        }
        SampleIndex { points, cell, buckets, bounds }
    }

    fn key(cell: f64, p: Point2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    fn brute(&self, p: Point2) -> f64 {
        self.points.iter().map(|q| q.dist(p)).fold(f64::INFINITY, f64::min)
    }

    fn nearest(&self, p: Point2) -> f64 {
        let outside_x = (self.bounds.x0 - p.x).max(p.x - self.bounds.x1).max(0.0);
        let outside_y = (self.bounds.y0 - p.y).max(p.y - self.bounds.y1).max(0.0);
        if outside_x.hypot(outside_y) > 4.0 * self.cell {
            return self.brute(p);
        }
        let (ci, cj) = Self::key(self.cell, p);
        let mut best = f64::INFINITY;
        let max_ring = 64;
        for k in 0..=max_ring {
            for i in (ci - k)..=(ci + k) {
                for j in (cj - k)..=(cj + k) {
                    if (i - ci).abs() != k && (j - cj).abs() != k {
                        continue;
                    }
                    if let Some(idx) = self.buckets.get(&(i, j)) {
                        for &m in idx {
                            best = best.min(self.points[m].dist(p));
                        }
                    }
                }
            }
            if best <= k as f64 * self.cell {
                return best;
            }
        }
        self.brute(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cusp() -> DomainSpec {
        DomainSpec::CuspDomain { p: Polynomial::identity() }
    }

    #[test]
    fn trivial_values() {
        let disc = DistanceOracle::exact(DomainSpec::unit_disc()).unwrap();
        assert_eq!(disc.distance(Point2::ORIGIN).unwrap(), 1.0);
        let strip = DistanceOracle::exact(DomainSpec::Strip { x_min: 1.0, height: 1.0 }).unwrap();
        assert_eq!(strip.distance(Point2::new(3.0, 0.25)).unwrap(), 0.25);
        assert!(matches!(strip.distance(Point2::new(0.0, 0.5)), Err(GeometryError::Exterior { distance }) if distance == -1.0));
    }

    #[test]
    fn nazarov_exact_matches_dense_sampling() {
        let d = DomainSpec::NazarovDomain { n_max: 5 };
        let exact = DistanceOracle::exact(d.clone()).unwrap();
        let sampled = DistanceOracle::sampled(d, 1e-4, None).unwrap();
        for p in [Point2::new(1.5, 0.0), Point2::new(1.2, 0.7), Point2::new(2.1, 0.05), Point2::new(4.0, 0.03)] {
            let (a, b) = (exact.signed_distance(p), sampled.signed_distance(p));
            assert!((a - b).abs() <= 1e-4, "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn cusp_distance_matches_sampling() {
        let exact = DistanceOracle::exact(cusp()).unwrap();
        let sampled = DistanceOracle::sampled(cusp(), 1e-4, Some(Rect::new(0.0, 6.0, 0.0, 1.0))).unwrap();
        for p in [Point2::new(0.5, 0.2), Point2::new(2.0, 0.1), Point2::new(0.1, 0.85), Point2::new(1.0, 0.5)] {
            let (a, b) = (exact.signed_distance(p), sampled.signed_distance(p));
            assert!((a - b).abs() <= 1e-4, "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn polygon_and_slit() {
        let square = ClosedCurve::new(
            vec![Point2::ORIGIN, Point2::new(2.0, 0.0), Point2::new(2.0, 2.0), Point2::new(0.0, 2.0)],
            true,
        )
        .unwrap();
        let o = DistanceOracle::exact(DomainSpec::PolygonDomain { curve: square }).unwrap();
        assert_eq!(o.signed_distance(Point2::new(1.0, 1.0)), 1.0);
        assert_eq!(o.signed_distance(Point2::new(3.0, 1.0)), -1.0);
        let slit = ClosedCurve::new(vec![Point2::ORIGIN, Point2::new(1.0, 0.0)], false).unwrap();
        let s = DistanceOracle::exact(DomainSpec::SlitPlane { slit }).unwrap();
        assert_eq!(s.signed_distance(Point2::new(0.5, -0.5)), 0.5);
    }

    #[test]
    fn intersection_is_minimum() {
        let slit = ClosedCurve::new(vec![Point2::ORIGIN, Point2::new(1.0, 0.0)], false).unwrap();
        let d = DomainSpec::Intersection { parts: vec![DomainSpec::unit_disc(), DomainSpec::SlitPlane { slit }] };
        let o = DistanceOracle::exact(d).unwrap();
        assert!((o.signed_distance(Point2::new(0.5, 0.2)) - 0.2).abs() < 1e-15);
        assert!((o.signed_distance(Point2::new(-0.5, 0.0)) - 0.5).abs() < 1e-15);
    }

    fn lipschitz_check(o: &DistanceOracle, window: Rect, seed: u64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let p = Point2::new(rng.gen_range(window.x0..window.x1), rng.gen_range(window.y0..window.y1));
            let q = Point2::new(rng.gen_range(window.x0..window.x1), rng.gen_range(window.y0..window.y1));
            let (a, b) = (o.signed_distance(p), o.signed_distance(q));
            assert!((a - b).abs() <= p.dist(q) * (1.0 + 1e-9) + 1e-12, "{p:?} {q:?}: {a} {b}");
        }
    }

    #[test]
    fn lipschitz_on_every_exact_domain() {
        let w = Rect::new(-2.0, 6.0, -2.0, 2.0);
        let tri = ClosedCurve::new(vec![Point2::ORIGIN, Point2::new(3.0, 0.0), Point2::new(1.0, 1.5)], true).unwrap();
        let domains = vec![
            DomainSpec::unit_disc(),
            DomainSpec::unit_exterior(),
            DomainSpec::HalfPlane,
            DomainSpec::Strip { x_min: 1.0, height: 1.0 },
            cusp(),
            DomainSpec::NazarovDomain { n_max: 5 },
            DomainSpec::PolygonDomain { curve: tri },
        ];
        for (i, d) in domains.into_iter().enumerate() {
            lipschitz_check(&DistanceOracle::exact(d).unwrap(), w, i as u64);
        }
    }

    proptest! {
        #[test]
        fn interval_distance_is_lipschitz(x in -2.0f64..8.0, y in -2.0f64..8.0) {
            let u = super::super::IntervalUnion::new(vec![(0.0, 1.0), (2.0, 2.5), (4.0, f64::INFINITY)]).unwrap();
            let o = DistanceOracle::exact(DomainSpec::IntervalDomain { intervals: u }).unwrap();
            prop_assert!((o.distance_1d(x) - o.distance_1d(y)).abs() <= (x - y).abs() + 1e-12);
        }
    }
}
