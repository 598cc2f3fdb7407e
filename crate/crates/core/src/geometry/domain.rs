use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClosedCurve, GeometryError, Point2, Rect};
use crate::numeric::Polynomial;
use crate::serde_ext::ext_pairs;

/// Interval-length rule `n -> a(n)` with values in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LengthRule {
    /// `a(n) = value`.
    Constant { value: f64 },
    /// `a(n) = n^{-power}`.
    InversePower { power: f64 },
    /// `a(n) = e^{-rate n}`.
    Exponential { rate: f64 },
    /// Explicit values `a(1), a(2), ...`.
    Table { values: Vec<f64> },
}

impl LengthRule {
    /// Natural log of `a(n)`, exact for the closed-form rules (no underflow).
    pub fn ln_length(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            LengthRule::Constant { value } => value.ln(),
            LengthRule::InversePower { power } => -power * nf.ln(),
            LengthRule::Exponential { rate } => -rate * nf,
            LengthRule::Table { values } => values.get(n - 1).copied().unwrap_or(f64::NAN).ln(),
        }
    }

    pub fn length(&self, n: usize) -> f64 {
        match self {
            LengthRule::Constant { value } => *value,
            LengthRule::Table { values } => values.get(n - 1).copied().unwrap_or(f64::NAN),
            LengthRule::InversePower { power } => 1.0 / (n as f64).powf(*power),
            LengthRule::Exponential { rate } => (-rate * n as f64).exp(),
        }
    }

    pub fn validate(&self, n_max: usize) -> Result<(), GeometryError> {
        for n in 1..=n_max {
            let a = self.length(n);
            if !(a > 0.0 && a <= 1.0) {
                return Err(GeometryError::Parameter(format!("a({n}) = {a} is not in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// A finite union of disjoint open intervals, kept in construction order
/// (which may be an enumeration order other than left-to-right).
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
    /// Indices into `intervals`, sorted by left endpoint.
    by_left: Vec<usize>,
    generator: Option<(LengthRule, usize)>,
}

impl IntervalUnion {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        for (i, &(l, r)) in intervals.iter().enumerate() {
            if l.is_nan() || r.is_nan() || l >= r {
                return Err(GeometryError::Validation(format!("interval {i} = ({l}, {r}) is empty")));
            }
        }
        let mut by_left: Vec<usize> = (0..intervals.len()).collect();
        by_left.sort_by(|&a, &b| intervals[a].0.total_cmp(&intervals[b].0));
        for w in by_left.windows(2) {
            if intervals[w[0]].1 > intervals[w[1]].0 {
                return Err(GeometryError::Validation(format!("intervals {} and {} overlap", w[0], w[1])));
            }
        }
        Ok(IntervalUnion { intervals, by_left, generator: None })
    }

    /// `N_a = U_{n <= n_max} (n, n + a(n))`.
    pub fn from_rule(rule: LengthRule, n_max: usize) -> Result<Self, GeometryError> {
        if n_max == 0 {
            return Err(GeometryError::Parameter("n_max must be at least 1".into()));
        }
        rule.validate(n_max)?;
        let intervals = (1..=n_max).map(|n| (n as f64, n as f64 + rule.length(n))).collect();
        let mut u = IntervalUnion::new(intervals)?;
        u.generator = Some((rule, n_max));
        Ok(u)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn generator(&self) -> Option<&(LengthRule, usize)> {
        self.generator.as_ref()
    }

    /// Position (in construction order) of the interval containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let k = self.by_left.partition_point(|&i| self.intervals[i].0 < x);
        if k == 0 {
            return None;
        }
        let i = self.by_left[k - 1];
        (x < self.intervals[i].1).then_some(i)
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    pub fn signed_distance(&self, x: f64) -> f64 {
        if let Some(i) = self.locate(x) {
            let (l, r) = self.intervals[i];
            return (x - l).min(r - x);
        }
        let k = self.by_left.partition_point(|&i| self.intervals[i].0 < x);
        let mut best = f64::INFINITY;
        if k > 0 {
            best = best.min((x - self.intervals[self.by_left[k - 1]].1).abs());
        }
        if k < self.by_left.len() {
            best = best.min((self.intervals[self.by_left[k]].0 - x).abs());
        }
        -best
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntervalUnionRepr {
    Plain(#[serde(with = "ext_pairs")] Vec<(f64, f64)>),
    Generated {
        #[serde(with = "ext_pairs")]
        intervals: Vec<(f64, f64)>,
        generator: LengthRule,
        n_max: usize,
    },
}

impl Serialize for IntervalUnion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.generator {
            None => IntervalUnionRepr::Plain(self.intervals.clone()).serialize(s),
            Some((rule, n_max)) => IntervalUnionRepr::Generated {
                intervals: self.intervals.clone(),
                generator: rule.clone(),
                n_max: *n_max,
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match IntervalUnionRepr::deserialize(d)? {
            IntervalUnionRepr::Plain(v) => IntervalUnion::new(v).map_err(D::Error::custom),
            IntervalUnionRepr::Generated { intervals, generator, n_max } => {
                let mut u = IntervalUnion::new(intervals).map_err(D::Error::custom)?;
                u.generator = Some((generator, n_max));
                Ok(u)
            }
        }
    }
}

fn unit() -> f64 {
    1.0
}

/// Open subsets of the plane (or of the line, for `IntervalDomain`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum DomainSpec {
    Disc {
        #[serde(default)]
        center: Point2,
        #[serde(default = "unit")]
        radius: f64,
    },
    ExteriorDisc {
        #[serde(default)]
        center: Point2,
        #[serde(default = "unit")]
        radius: f64,
    },
    /// `{ y > 0 }`.
    HalfPlane,
    /// `{ x > x_min, 0 < y < height }`.
    Strip { x_min: f64, height: f64 },
    /// `{ u > 0, 0 < v < exp(-p(u)) }`.
    CuspDomain { p: Polynomial },
    /// Discs `B(n, 1/n^2)` joined by strips of height `exp(-exp(n^2))`, `n <= n_max`.
    NazarovDomain { n_max: usize },
    PolygonDomain { curve: ClosedCurve },
    /// The plane minus a polyline.
    SlitPlane { slit: ClosedCurve },
    /// A subset of the real line.
    IntervalDomain { intervals: IntervalUnion },
    /// Intersection of several domains; its boundary distance is the minimum of theirs.
    Intersection { parts: Vec<DomainSpec> },
    /// The whole plane; its complement is empty.
    Plane,
    /// The plane minus one point.
    PuncturedPlane { point: Point2 },
}

impl DomainSpec {
    pub fn unit_disc() -> Self {
        DomainSpec::Disc { center: Point2::ORIGIN, radius: 1.0 }
    }

    pub fn unit_exterior() -> Self {
        DomainSpec::ExteriorDisc { center: Point2::ORIGIN, radius: 1.0 }
    }

    /// A single open interval `(left, right)`; endpoints may be infinite.
    pub fn interval(left: f64, right: f64) -> Result<Self, GeometryError> {
        Ok(DomainSpec::IntervalDomain { intervals: IntervalUnion::new(vec![(left, right)])? })
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            DomainSpec::Disc { radius, center } | DomainSpec::ExteriorDisc { radius, center } => {
                if !(*radius > 0.0) || !center.is_finite() {
                    return Err(GeometryError::Parameter(format!("bad disc radius {radius}")));
                }
            }
            DomainSpec::Strip { height, x_min } => {
                if !(*height > 0.0) || !x_min.is_finite() {
                    return Err(GeometryError::Parameter(format!("bad strip height {height}")));
                }
            }
            DomainSpec::CuspDomain { p } => {
                if p.degree() == 0 || p.leading() <= 0.0 {
                    return Err(GeometryError::Parameter(
                        "cusp polynomial must be non-constant with positive leading coefficient".into(),
                    ));
                }
            }
            DomainSpec::NazarovDomain { n_max } => {
                if *n_max < 1 {
                    return Err(GeometryError::Parameter("n_max must be at least 1".into()));
                }
            }
            DomainSpec::PolygonDomain { curve } => {
                curve.validate()?;
                if !curve.closed {
                    return Err(GeometryError::Validation("polygon boundary must be closed".into()));
                }
            }
            DomainSpec::SlitPlane { slit } => slit.validate()?,
            DomainSpec::IntervalDomain { .. } | DomainSpec::HalfPlane | DomainSpec::Plane => {}
            DomainSpec::PuncturedPlane { point } => {
                if !point.is_finite() {
                    return Err(GeometryError::Parameter("puncture must be finite".into()));
                }
            }
            DomainSpec::Intersection { parts } => {
                if parts.is_empty() {
                    return Err(GeometryError::Validation("empty intersection".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Whether the ambient space is the real line.
    pub fn is_line(&self) -> bool {
        matches!(self, DomainSpec::IntervalDomain { .. })
    }

    /// A bounding window for bounded domains; `None` when the domain is unbounded.
    pub fn bounding_box(&self) -> Option<Rect> {
        match self {
            DomainSpec::Disc { center, radius } => {
                Some(Rect::new(center.x - radius, center.x + radius, center.y - radius, center.y + radius))
            }
            DomainSpec::NazarovDomain { n_max } => Some(Rect::new(0.0, *n_max as f64 + 1.0, -1.0, 1.0)),
            DomainSpec::PolygonDomain { curve } => {
                let xs = curve.vertices.iter().map(|p| p.x);
                let ys = curve.vertices.iter().map(|p| p.y);
                Some(Rect::new(
                    xs.clone().fold(f64::INFINITY, f64::min),
                    xs.fold(f64::NEG_INFINITY, f64::max),
                    ys.clone().fold(f64::INFINITY, f64::min),
                    ys.fold(f64::NEG_INFINITY, f64::max),
                ))
            }
            DomainSpec::IntervalDomain { intervals } => {
                let lo = intervals.intervals().iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
                let hi = intervals.intervals().iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
                (lo.is_finite() && hi.is_finite()).then(|| Rect::new(lo, hi, 0.0, 0.0))
            }
            DomainSpec::Intersection { parts } => {
                let boxes: Vec<Rect> = parts.iter().filter_map(|p| p.bounding_box()).collect();
                boxes.into_iter().reduce(|a, b| {
                    Rect::new(a.x0.max(b.x0), a.x1.min(b.x1), a.y0.max(b.y0), a.y1.min(b.y1))
                })
            }
            _ => None,
        }
    }
}
