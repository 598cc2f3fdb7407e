use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::SchwartzError;
use crate::geometry::{
    CantorGap, DistanceOracle, DomainSpec, IntervalUnion, LengthRule, Point2, NAZAROV_MAX_N,
};
use crate::maps::{AnyMap, BumpSpec, LineMap, PlaneMap};
use crate::numeric::{
    binomial, chain_rule_1d, fd_step, psi_derivatives, smooth_step_derivatives, Polynomial, SignedLog, Stencil,
};

/// Largest derivative order a test function evaluates.
pub const MAX_FUNCTION_ORDER: usize = 6;

/// Base finite-difference step, clamped by the boundary distance.
pub const FUNCTION_FD_STEP: f64 = 1e-3;

/// Intervals that each carry one rescaled bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum UnionLayout {
    /// `(n, n + a(n))` for `n = 1..=n_max`.
    Rule { rule: LengthRule, n_max: usize },
    /// The middle-third gaps of the first `depth` generations, in enumeration order.
    CantorGaps { depth: u32 },
}

impl UnionLayout {
    pub fn count(&self) -> usize {
        match self {
            UnionLayout::Rule { n_max, .. } => *n_max,
            UnionLayout::CantorGaps { depth } => (1usize << depth) - 1,
        }
    }

    /// Interval with 1-based index `n`.
    pub fn interval(&self, n: usize) -> (f64, f64) {
        match self {
            UnionLayout::Rule { rule, .. } => (n as f64, n as f64 + rule.length(n)),
            UnionLayout::CantorGaps { .. } => {
                let g = CantorGap::from_index(n as u64);
                (g.left(), g.right())
            }
        }
    }

    /// 1-based index of the interval containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        match self {
            UnionLayout::Rule { rule, n_max } => {
                let n = x.floor();
                if n < 1.0 || n > *n_max as f64 {
                    return None;
                }
                let n = n as usize;
                (x - n as f64 > 0.0 && x - (n as f64) < rule.length(n)).then_some(n)
            }
            UnionLayout::CantorGaps { depth } => CantorGap::containing(x, *depth).map(|g| g.index() as usize),
        }
    }

    pub fn union(&self) -> Result<IntervalUnion, SchwartzError> {
        let ivs = (1..=self.count()).map(|n| self.interval(n)).collect();
        Ok(IntervalUnion::new(ivs)?)
    }

    fn validate(&self) -> Result<(), SchwartzError> {
        match self {
            UnionLayout::Rule { rule, n_max } => Ok(rule.validate(*n_max)?),
            UnionLayout::CantorGaps { depth } => {
                if (1..=20).contains(depth) {
                    Ok(())
                } else {
                    Err(SchwartzError::Parameter(format!("gap layout depth {depth} outside 1..=20")))
                }
            }
        }
    }
}

/// Height of the bump on interval `n` of length `len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weight", rename_all = "snake_case")]
pub enum BumpWeight {
    /// `exp(-rate n)`.
    ExpIndex { rate: f64 },
    /// `exp(-1 / len)`.
    ExpInverseLength,
}

impl BumpWeight {
    fn ln(&self, n: usize, len: f64) -> f64 {
        match self {
            BumpWeight::ExpIndex { rate } => -rate * n as f64,
            BumpWeight::ExpInverseLength => -1.0 / len,
        }
    }
}

/// Built-in functions, tagged by name in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `exp(-|x - center|^2 / width^2)` in dimension `center.len()`.
    Gaussian {
        center: Vec<f64>,
        #[serde(default = "one")]
        width: f64,
    },
    /// A one-dimensional plateau bump.
    Bump { profile: BumpSpec },
    /// `chi(|z - center|)` for a plateau profile `chi`.
    RadialBump { center: Point2, profile: BumpSpec },
    /// `exp(-1/x)` for `x > 0`, zero otherwise.
    FlatExp,
    /// Zero for `x < 0`, `exp(-x)` for `x > 1`, joined by the smooth step.
    TailExample,
    /// `exp(-y - 1/y)` on `(0, inf)`.
    InverseExp,
    /// `sum_n exp(-n) chi(n^2 (z - n))` with `chi` equal to 1 on the disc of radius 1/2
    /// and supported in the unit disc.
    NazarovF { n_max: usize },
    /// `exp(1 / (|z| - 1))` on the unit disc.
    RadialG,
    /// `sum_i a(n_i) chi(x - m_i - 1/2)` with `chi` supported in `[-1/4, 1/4]`, `chi(0) = 1`.
    IntervalWitness { a: LengthRule, pairs: Vec<(usize, usize)> },
    /// One bump `w(n) chi((x - left) / len)` per interval.
    UnionBumps { layout: UnionLayout, weight: BumpWeight },
    /// `exp(-(x - x_min) - 1/(x - x_min) - 1/(s (1 - s)))`, `s = y / height`, on the half-strip.
    StripFlat { x_min: f64, height: f64 },
    /// `exp(-1/u - 1/(s (1 - s)) - exp(2 p(u)))`, `s = v exp(p(u))`, on the cusp domain of `p`.
    CuspFlat { p: Polynomial },
    Scaled { factor: f64, function: Box<FunctionSpec> },
    /// `f o map` on `domain`.
    Pullback { function: Box<FunctionSpec>, map: AnyMap, domain: DomainSpec },
}

fn one() -> f64 {
    1.0
}

fn nazarov_profile() -> BumpSpec {
    BumpSpec::symmetric(0.5, 1.0).expect("valid profile")
}

fn interval_profile() -> BumpSpec {
    BumpSpec::symmetric(0.125, 0.25).expect("valid profile")
}

fn union_profile() -> BumpSpec {
    BumpSpec::new((0.0, 1.0), (0.25, 0.75)).expect("valid profile")
}

fn stencil(order: usize) -> &'static Stencil {
    static STENCILS: OnceLock<Vec<Stencil>> = OnceLock::new();
    &STENCILS.get_or_init(|| (0..=MAX_FUNCTION_ORDER).map(Stencil::new).collect())[order]
}

/// Natural domain of a map, used as the domain of its pullbacks.
pub fn map_domain(map: &AnyMap) -> Result<DomainSpec, SchwartzError> {
    Ok(match map {
        AnyMap::Line(m) => m.domain()?,
        AnyMap::Plane(m) => plane_map_domain(m),
    })
}

fn plane_map_domain(m: &PlaneMap) -> DomainSpec {
    match m {
        PlaneMap::Mobius { c, d, .. } if c.norm() > 0.0 => {
            DomainSpec::PuncturedPlane { point: Point2::from_complex(-d / c) }
        }
        PlaneMap::Cusp(r) => DomainSpec::CuspDomain { p: r.p.clone() },
        PlaneMap::Inverse { map } if matches!(**map, PlaneMap::Cusp(_)) => DomainSpec::Strip { x_min: 1.0, height: 1.0 },
        PlaneMap::Composition { maps } => maps.first().map(plane_map_domain).unwrap_or(DomainSpec::Plane),
        _ => DomainSpec::Plane,
    }
}

/// Derivatives at a point: `values[i]` in one dimension, `values[i (order + 1) + j]`
/// for `d_x^i d_y^j` in two.
#[derive(Clone, Debug, PartialEq)]
pub struct Partials {
    pub dim: usize,
    pub order: usize,
    pub values: Vec<f64>,
    /// Finite-difference step, `None` for closed forms.
    pub step: Option<f64>,
}

impl Partials {
    pub fn get(&self, k: &[usize]) -> f64 {
        match self.dim {
            1 => self.values[k[0]],
            _ => self.values[k[0] * (self.order + 1) + k[1]],
        }
    }
}

/// A smooth function on an open set, flat on its complement.
#[derive(Clone, Debug)]
pub struct TestFunction {
    spec: FunctionSpec,
    domain: DomainSpec,
    oracle: Arc<DistanceOracle>,
    log_mode: bool,
    inner: Option<Arc<TestFunction>>,
    bounds: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TestFunctionRepr {
    function: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<DomainSpec>,
    #[serde(default)]
    log_mode: bool,
}

impl Serialize for TestFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let natural = natural_domain(&self.spec).ok();
        let domain = (natural.as_ref() != Some(&self.domain)).then(|| self.domain.clone());
        TestFunctionRepr { function: self.spec.clone(), domain, log_mode: self.log_mode }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = TestFunctionRepr::deserialize(d)?;
        let mut f = TestFunction::from_spec(r.function).map_err(serde::de::Error::custom)?;
        if let Some(dom) = r.domain {
            f = f.restrict(dom).map_err(serde::de::Error::custom)?;
        }
        Ok(f.with_log_mode(r.log_mode))
    }
}

impl PartialEq for TestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.domain == other.domain && self.log_mode == other.log_mode
    }
}

fn natural_domain(spec: &FunctionSpec) -> Result<DomainSpec, SchwartzError> {
    let line = || DomainSpec::interval(f64::NEG_INFINITY, f64::INFINITY);
    let half_line = || DomainSpec::interval(0.0, f64::INFINITY);
    Ok(match spec {
        FunctionSpec::Gaussian { center, .. } => {
            if center.len() == 1 {
                line()?
            } else {
                DomainSpec::Plane
            }
        }
        FunctionSpec::Bump { .. } | FunctionSpec::TailExample => line()?,
        FunctionSpec::RadialBump { .. } => DomainSpec::Plane,
        FunctionSpec::FlatExp | FunctionSpec::InverseExp => half_line()?,
        FunctionSpec::NazarovF { n_max } => DomainSpec::NazarovDomain { n_max: *n_max },
        FunctionSpec::RadialG => DomainSpec::unit_disc(),
        FunctionSpec::IntervalWitness { pairs, .. } => {
            let top = pairs.iter().map(|p| p.1).max().unwrap_or(1).max(1);
            DomainSpec::IntervalDomain { intervals: IntervalUnion::from_rule(LengthRule::Constant { value: 1.0 }, top)? }
        }
        FunctionSpec::UnionBumps { layout, .. } => DomainSpec::IntervalDomain { intervals: layout.union()? },
        FunctionSpec::StripFlat { x_min, height } => DomainSpec::Strip { x_min: *x_min, height: *height },
        FunctionSpec::CuspFlat { p } => DomainSpec::CuspDomain { p: p.clone() },
        FunctionSpec::Scaled { function, .. } => natural_domain(function)?,
        FunctionSpec::Pullback { domain, .. } => domain.clone(),
    })
}

impl TestFunction {
    pub fn from_spec(spec: FunctionSpec) -> Result<Self, SchwartzError> {
        let mut bounds = None;
        let mut inner = None;
        match &spec {
            FunctionSpec::Gaussian { center, width } => {
                if !(1..=2).contains(&center.len()) || !(*width > 0.0) {
                    return Err(SchwartzError::Parameter("Gaussian needs a 1- or 2-D center and positive width".into()));
                }
            }
            FunctionSpec::Bump { profile } | FunctionSpec::RadialBump { profile, .. } => {
                profile.validate()?;
                bounds = Some(profile.derivative_bounds(4));
            }
            FunctionSpec::NazarovF { n_max } => {
                if !(1..=NAZAROV_MAX_N).contains(n_max) {
                    return Err(SchwartzError::Parameter(format!("n_max = {n_max} outside 1..={NAZAROV_MAX_N}")));
                }
                bounds = Some(nazarov_profile().derivative_bounds(4));
            }
            FunctionSpec::IntervalWitness { a, pairs } => {
                let mut ms: Vec<usize> = pairs.iter().map(|p| p.1).collect();
                ms.sort_unstable();
                if ms.windows(2).any(|w| w[0] == w[1]) {
                    return Err(SchwartzError::Parameter("interval witness targets m_i must be distinct".into()));
                }
                if pairs.iter().any(|p| p.0 == 0 || p.1 == 0) {
                    return Err(SchwartzError::Parameter("interval indices start at 1".into()));
                }
                let top = pairs.iter().map(|p| p.0).max().unwrap_or(1);
                a.validate(top)?;
                bounds = Some(interval_profile().derivative_bounds(4));
            }
            FunctionSpec::UnionBumps { layout, .. } => {
                layout.validate()?;
                bounds = Some(union_profile().derivative_bounds(4));
            }
            FunctionSpec::StripFlat { height, .. } => {
                if !(*height > 0.0) {
                    return Err(SchwartzError::Parameter("strip height must be positive".into()));
                }
            }
            FunctionSpec::Scaled { function, .. } => {
                inner = Some(Arc::new(TestFunction::from_spec((**function).clone())?));
            }
            FunctionSpec::Pullback { function, map, .. } => {
                let f = TestFunction::from_spec((**function).clone())?;
                if f.dim() != map.dim() {
                    return Err(SchwartzError::Parameter("map and function dimensions differ".into()));
                }
                inner = Some(Arc::new(f));
            }
            _ => {}
        }
        let domain = natural_domain(&spec)?;
        let oracle = Arc::new(DistanceOracle::exact(domain.clone())?);
        Ok(TestFunction { spec, domain, oracle, log_mode: false, inner, bounds })
    }

    /// The same function viewed on a smaller open set.
    pub fn restrict(mut self, domain: DomainSpec) -> Result<Self, SchwartzError> {
        self.oracle = Arc::new(DistanceOracle::exact(domain.clone())?);
        self.domain = domain;
        Ok(self)
    }

    pub fn with_log_mode(mut self, on: bool) -> Self {
        self.log_mode = on;
        self
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn oracle(&self) -> &DistanceOracle {
        &self.oracle
    }

    pub fn log_mode(&self) -> bool {
        self.log_mode
    }

    pub fn dim(&self) -> usize {
        if self.domain.is_line() {
            1
        } else {
            2
        }
    }

    /// `C_l = max |chi^{(l)}|`, `l <= 4`, for functions built from a bump profile.
    pub fn derivative_bounds(&self) -> Option<&[f64]> {
        self.bounds.as_deref()
    }

    /// Where every Taylor coefficient vanishes.
    pub fn flat_set(&self) -> String {
        match &self.spec {
            FunctionSpec::Bump { .. } | FunctionSpec::RadialBump { .. } => "outside the bump support".into(),
            FunctionSpec::FlatExp | FunctionSpec::TailExample => "the closed half-line x <= 0".into(),
            _ => "the complement of the domain".into(),
        }
    }

    fn point(&self, p: &[f64]) -> Result<Point2, SchwartzError> {
        match (self.dim(), p.len()) {
            (1, 1) => Ok(Point2::on_line(p[0])),
            (2, 2) => Ok(Point2::new(p[0], p[1])),
            (d, n) => Err(SchwartzError::Parameter(format!("point of dimension {n} for a function in dimension {d}"))),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.point(p).map(|q| self.oracle.contains(q)).unwrap_or(false)
    }

    /// Boundary distance of `p` in this function's domain (`inf` for the whole space).
    pub fn boundary_distance(&self, p: &[f64]) -> Result<f64, SchwartzError> {
        Ok(self.oracle.signed_distance(self.point(p)?))
    }

    fn check(&self, p: &[f64]) -> Result<(), SchwartzError> {
        let q = self.point(p)?;
        if self.oracle.contains(q) {
            Ok(())
        } else {
            Err(SchwartzError::Domain(format!("{p:?} is outside the domain")))
        }
    }

    pub fn value(&self, p: &[f64]) -> Result<f64, SchwartzError> {
        self.check(p)?;
        self.raw(p)
    }

    /// The extension by zero to the whole space.
    pub fn value_ext(&self, p: &[f64]) -> Result<f64, SchwartzError> {
        if self.contains(p) {
            self.raw(p)
        } else {
            Ok(0.0)
        }
    }

    /// `f(p)` as sign and log-magnitude; representable far below `f64` underflow.
    pub fn ln_value(&self, p: &[f64]) -> Result<SignedLog, SchwartzError> {
        self.check(p)?;
        self.raw_ln(p)
    }

    fn inner(&self) -> &TestFunction {
        self.inner.as_deref().expect("composite function has an inner function")
    }

    fn raw(&self, p: &[f64]) -> Result<f64, SchwartzError> {
        Ok(match &self.spec {
            FunctionSpec::Gaussian { center, width } => {
                let r2: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                (-r2 / (width * width)).exp()
            }
            FunctionSpec::Bump { profile } => profile.eval(p[0]),
            FunctionSpec::RadialBump { center, profile } => profile.eval(Point2::new(p[0], p[1]).dist(*center)),
            FunctionSpec::FlatExp => psi_derivatives(p[0], 0)[0],
            FunctionSpec::TailExample => smooth_step_derivatives(p[0], 0)[0] * (-p[0]).exp(),
            FunctionSpec::InverseExp => {
                if p[0] > 0.0 {
                    (-p[0] - 1.0 / p[0]).exp()
                } else {
                    0.0
                }
            }
            FunctionSpec::Scaled { factor, .. } => factor * self.inner().value_ext(p)?,
            FunctionSpec::Pullback { map, .. } => {
                let q = map.apply(p)?;
                self.inner().value_ext(&q)?
            }
            _ => self.raw_ln(p)?.to_f64(),
        })
    }

    fn raw_ln(&self, p: &[f64]) -> Result<SignedLog, SchwartzError> {
        let ln = match &self.spec {
            FunctionSpec::Gaussian { center, width } => {
                let r2: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                -r2 / (width * width)
            }
            FunctionSpec::Bump { profile } => profile.ln_eval(p[0]),
            FunctionSpec::RadialBump { center, profile } => profile.ln_eval(Point2::new(p[0], p[1]).dist(*center)),
            FunctionSpec::FlatExp => {
                if p[0] > 0.0 {
                    -1.0 / p[0]
                } else {
                    f64::NEG_INFINITY
                }
            }
            FunctionSpec::TailExample => {
                let x = p[0];
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else if x >= 1.0 {
                    -x
                } else {
                    let (a, b) = (-1.0 / x, -1.0 / (1.0 - x));
                    let hi = a.max(b);
                    a - (hi + ((a - hi).exp() + (b - hi).exp()).ln()) - x
                }
            }
            FunctionSpec::InverseExp => {
                if p[0] > 0.0 {
                    -p[0] - 1.0 / p[0]
                } else {
                    f64::NEG_INFINITY
                }
            }
            FunctionSpec::NazarovF { n_max } => {
                let z = Point2::new(p[0], p[1]);
                let chi = nazarov_profile();
                let lo = (z.x.floor() as i64 - 1).max(1);
                let hi = (z.x.ceil() as i64 + 1).min(*n_max as i64);
                let mut acc = SignedLog::ZERO;
                for n in lo..=hi {
                    let nf = n as f64;
                    let w = nf * nf * z.dist(Point2::new(nf, 0.0));
                    acc = acc.add(SignedLog::from_ln(-nf + chi.ln_eval(w)));
                }
                return Ok(acc);
            }
            FunctionSpec::RadialG => {
                let r = p[0].hypot(p[1]);
                if r < 1.0 {
                    1.0 / (r - 1.0)
                } else {
                    f64::NEG_INFINITY
                }
            }
            FunctionSpec::IntervalWitness { a, pairs } => {
                let chi = interval_profile();
                let mut acc = SignedLog::ZERO;
                for &(n, m) in pairs {
                    let t = p[0] - m as f64 - 0.5;
                    if t.abs() < 0.25 {
                        acc = acc.add(SignedLog::from_ln(a.ln_length(n) + chi.ln_eval(t)));
                    }
                }
                return Ok(acc);
            }
            FunctionSpec::UnionBumps { layout, weight } => match layout.locate(p[0]) {
                Some(n) => {
                    let (l, r) = layout.interval(n);
                    weight.ln(n, r - l) + union_profile().ln_eval((p[0] - l) / (r - l))
                }
                None => f64::NEG_INFINITY,
            },
            FunctionSpec::StripFlat { x_min, height } => {
                let (t, s) = (p[0] - x_min, p[1] / height);
                if t > 0.0 && s > 0.0 && s < 1.0 {
                    -t - 1.0 / t - 1.0 / (s * (1.0 - s))
                } else {
                    f64::NEG_INFINITY
                }
            }
            FunctionSpec::CuspFlat { p: poly } => {
                let (u, v) = (p[0], p[1]);
                let pu = poly.eval(u);
                let s = v * pu.exp();
                if u > 0.0 && s > 0.0 && s < 1.0 {
                    -1.0 / u - 1.0 / (s * (1.0 - s)) - (2.0 * pu).exp()
                } else {
                    f64::NEG_INFINITY
                }
            }
            FunctionSpec::Scaled { factor, .. } => {
                let v = if self.inner().contains(p) { self.inner().raw_ln(p)? } else { SignedLog::ZERO };
                return Ok(v.mul(SignedLog::from_f64(*factor)));
            }
            FunctionSpec::Pullback { map, .. } => {
                let q = map.apply(p)?;
                let inner = self.inner();
                return if inner.contains(&q) { inner.raw_ln(&q) } else { Ok(SignedLog::ZERO) };
            }
        };
        Ok(SignedLog::from_ln(ln))
    }

    /// Closed-form derivatives in one dimension, `k = 0..=order`, where available.
    pub fn exact_derivatives_1d(&self, x: f64, order: usize) -> Result<Option<Vec<f64>>, SchwartzError> {
        if self.dim() != 1 {
            return Ok(None);
        }
        Ok(Some(match &self.spec {
            FunctionSpec::Gaussian { center, width } => {
                // d^k/dx^k exp(-s^2) = (-1)^k H_k(s) exp(-s^2) / w^k, s = (x - c) / w
                let s = (x - center[0]) / width;
                let e = (-s * s).exp();
                let mut h = vec![1.0, 2.0 * s];
                for k in 1..order {
                    let next = 2.0 * s * h[k] - 2.0 * k as f64 * h[k - 1];
                    h.push(next);
                }
                (0..=order)
                    .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * h[k] * e / width.powi(k as i32))
                    .collect()
            }
            FunctionSpec::Bump { profile } => profile.derivatives(x, order),
            FunctionSpec::FlatExp => psi_derivatives(x, order),
            FunctionSpec::TailExample => {
                let s = smooth_step_derivatives(x, order);
                let e = (-x).exp();
                (0..=order)
                    .map(|k| {
                        (0..=k)
                            .map(|j| binomial(k, j) * s[j] * if (k - j) % 2 == 0 { e } else { -e })
                            .sum()
                    })
                    .collect()
            }
            FunctionSpec::IntervalWitness { a, pairs } => {
                let chi = interval_profile();
                let mut out = vec![0.0; order + 1];
                for &(n, m) in pairs {
                    let t = x - m as f64 - 0.5;
                    if t.abs() < 0.25 {
                        for (o, d) in out.iter_mut().zip(chi.derivatives(t, order)) {
                            *o += a.length(n) * d;
                        }
                    }
                }
                out
            }
            FunctionSpec::UnionBumps { layout, weight } => match layout.locate(x) {
                Some(n) => {
                    let (l, r) = layout.interval(n);
                    let len = r - l;
                    let w = weight.ln(n, len).exp();
                    union_profile()
                        .derivatives((x - l) / len, order)
                        .into_iter()
                        .enumerate()
                        .map(|(k, d)| w * d / len.powi(k as i32))
                        .collect()
                }
                None => vec![0.0; order + 1],
            },
            FunctionSpec::Scaled { factor, .. } => {
                let inner = self.inner();
                if !inner.contains(&[x]) {
                    return Ok(Some(vec![0.0; order + 1]));
                }
                match inner.exact_derivatives_1d(x, order)? {
                    Some(d) => d.into_iter().map(|v| factor * v).collect(),
                    None => return Ok(None),
                }
            }
            FunctionSpec::Pullback { map: AnyMap::Line(m), .. } => {
                let Some(g) = m.derivatives(x, order)? else { return Ok(None) };
                let inner = self.inner();
                if !inner.contains(&[g[0]]) {
                    return Ok(Some(vec![0.0; order + 1]));
                }
                let Some(f) = inner.exact_derivatives_1d(g[0], order)? else { return Ok(None) };
                chain_rule_1d(&f, &g)
            }
            _ => return Ok(None),
        }))
    }

    /// All partial derivatives up to total order `order` at `p`.
    ///
    /// Closed forms are used in one dimension when available; otherwise a
    /// centred stencil on the zero extension with step
    /// `min(1e-3, 3d / (4 R sqrt(dim)))`, `d` the boundary distance.
    pub fn derivatives(&self, p: &[f64], order: usize, boundary_distance: Option<f64>) -> Result<Partials, SchwartzError> {
        if order > MAX_FUNCTION_ORDER {
            return Err(SchwartzError::Parameter(format!("derivative order {order} exceeds {MAX_FUNCTION_ORDER}")));
        }
        self.check(p)?;
        let dim = self.dim();
        if dim == 1 {
            if let Some(values) = self.exact_derivatives_1d(p[0], order)? {
                return Ok(Partials { dim, order, values, step: None });
            }
        }
        let d = match boundary_distance {
            Some(d) => d,
            None => self.boundary_distance(p)?,
        };
        let st = stencil(order.max(1));
        let h = fd_step(FUNCTION_FD_STEP, d, st.reach, dim).max(1e-10);
        let err = OnceLock::new();
        let values = if dim == 1 {
            let v = st.derivatives_1d(
                |x| {
                    self.value_ext(&[x]).unwrap_or_else(|e| {
                        let _ = err.set(e);
                        f64::NAN
                    })
                },
                p[0],
                h,
            );
            v[..=order].to_vec()
        } else {
            let grid = st.derivatives_2d(
                |x, y| {
                    self.value_ext(&[x, y]).unwrap_or_else(|e| {
                        let _ = err.set(e);
                        f64::NAN
                    })
                },
                p[0],
                p[1],
                h,
            );
            let mut values = vec![0.0; (order + 1) * (order + 1)];
            for i in 0..=order {
                for j in 0..=(order - i) {
                    values[i * (order + 1) + j] = grid[i][j];
                }
            }
            values
        };
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(Partials { dim, order, values, step: Some(h) })
    }
}

/// A plateau bump on the line; caches `C_l = max |chi^{(l)}|` for `l <= 4`.
pub fn make_bump(profile: BumpSpec) -> Result<TestFunction, SchwartzError> {
    TestFunction::from_spec(FunctionSpec::Bump { profile })
}

/// The witness on the disc chain: `exp(-n)` on `B(n, 1/(2n^2))`, zero near the boundary.
pub fn make_nazarov_f(n_max: usize) -> Result<TestFunction, SchwartzError> {
    Ok(TestFunction::from_spec(FunctionSpec::NazarovF { n_max })?.with_log_mode(true))
}

/// `exp(1/(|z| - 1))` on the unit disc.
pub fn make_radial_g() -> TestFunction {
    TestFunction::from_spec(FunctionSpec::RadialG).expect("radial witness").with_log_mode(true)
}

/// `sum_i a(n_i) chi(x - m_i - 1/2)` on the union of unit intervals.
pub fn make_interval_witness_f(a: LengthRule, pairs: Vec<(usize, usize)>) -> Result<TestFunction, SchwartzError> {
    TestFunction::from_spec(FunctionSpec::IntervalWitness { a, pairs })
}

/// `f o map`, living on the map's natural domain.
pub fn pullback(f: &TestFunction, map: &AnyMap) -> Result<TestFunction, SchwartzError> {
    let domain = map_domain(map)?;
    let spec = FunctionSpec::Pullback { function: Box::new(f.spec.clone()), map: map.clone(), domain };
    let mut g = TestFunction::from_spec(spec)?.with_log_mode(f.log_mode);
    // carries any restriction of `f`
    g.inner = Some(Arc::new(f.clone()));
    Ok(g)
}

/// Pullback along a line map given by value (convenience for the interval families).
pub fn pullback_line(f: &TestFunction, map: &LineMap) -> Result<TestFunction, SchwartzError> {
    pullback(f, &AnyMap::Line(map.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nazarov_plateau_values() {
        let f = make_nazarov_f(10).unwrap();
        for n in 1..=10 {
            let x = n as f64;
            assert!((f.value(&[x, 0.0]).unwrap() - (-x).exp()).abs() < 1e-15);
            let off = 0.4 / (x * x);
            assert!((f.value(&[x + off, 0.0]).unwrap() - (-x).exp()).abs() < 1e-15);
        }
        assert_eq!(f.value_ext(&[1.5, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn radial_g_values() {
        let g = make_radial_g();
        assert!((g.value(&[0.0, 0.0]).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(matches!(g.value(&[1.0, 0.0]), Err(SchwartzError::Domain(_))));
        let ln = g.ln_value(&[1.0 - 1e-6, 0.0]).unwrap();
        assert!((ln.ln_abs + 1e6).abs() < 1.0);
        assert_eq!(g.value(&[1.0 - 1e-6, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn log_mode_agrees_with_plain() {
        let fs = vec![
            make_radial_g(),
            make_nazarov_f(5).unwrap(),
            TestFunction::from_spec(FunctionSpec::TailExample).unwrap(),
            TestFunction::from_spec(FunctionSpec::CuspFlat { p: Polynomial::identity() }).unwrap(),
            TestFunction::from_spec(FunctionSpec::StripFlat { x_min: 1.0, height: 1.0 }).unwrap(),
        ];
        let pts: Vec<Vec<f64>> = vec![vec![0.3, 0.2], vec![1.2, 0.1], vec![0.5], vec![0.7, 0.3], vec![2.0, 0.4], vec![1.9, 0.01]];
        for f in &fs {
            for p in &pts {
                if p.len() != f.dim() || !f.contains(p) {
                    continue;
                }
                let plain = f.value(p).unwrap();
                let logv = f.ln_value(p).unwrap().to_f64();
                if plain > 1e-300 {
                    assert!((plain - logv).abs() <= 1e-12 * plain, "{:?} at {p:?}", f.spec());
                }
            }
        }
    }

    #[test]
    fn interval_witness_values() {
        let a = LengthRule::Exponential { rate: 1.0 };
        let f = make_interval_witness_f(a, vec![(3, 2), (5, 4)]).unwrap();
        assert!((f.value(&[2.5]).unwrap() - (-3f64).exp()).abs() < 1e-15);
        assert!((f.value(&[4.5]).unwrap() - (-5f64).exp()).abs() < 1e-15);
        assert_eq!(f.value_ext(&[3.0]).unwrap(), 0.0);
        assert!(make_interval_witness_f(LengthRule::Constant { value: 1.0 }, vec![(1, 2), (3, 2)]).is_err());
        assert_eq!(f.derivative_bounds().unwrap()[0], 1.0);
    }

    #[test]
    fn gaussian_exact_matches_differences() {
        let g = TestFunction::from_spec(FunctionSpec::Gaussian { center: vec![0.2], width: 1.5 }).unwrap();
        let exact = g.exact_derivatives_1d(0.7, 4).unwrap().unwrap();
        let st = Stencil::new(4);
        let fd = st.derivatives_1d(|x| g.value(&[x]).unwrap(), 0.7, 1e-2);
        for k in 0..=4 {
            assert!((exact[k] - fd[k]).abs() < 1e-6, "order {k}");
        }
    }

    #[test]
    fn union_bumps_scale_with_interval() {
        let layout = UnionLayout::CantorGaps { depth: 4 };
        let f = TestFunction::from_spec(FunctionSpec::UnionBumps { layout, weight: BumpWeight::ExpInverseLength }).unwrap();
        assert!((f.value(&[0.5]).unwrap() - (-3f64).exp()).abs() < 1e-15);
        assert!((f.value(&[1.5 / 9.0]).unwrap() - (-9f64).exp()).abs() < 1e-15);
        assert!(f.value(&[0.3]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let f = make_nazarov_f(4).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: TestFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let g = TestFunction::from_spec(FunctionSpec::Gaussian { center: vec![0.0], width: 1.0 })
            .unwrap()
            .restrict(DomainSpec::interval(0.0, 1.0).unwrap())
            .unwrap();
        let back: TestFunction = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    fn gaussian2(c: [f64; 2]) -> TestFunction {
        TestFunction::from_spec(FunctionSpec::Gaussian { center: c.to_vec(), width: 1.0 }).unwrap()
    }

    fn mobius(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> AnyMap {
        use num_complex::Complex64 as C;
        crate::maps::make_mobius(C::new(a[0], a[1]), C::new(b[0], b[1]), C::new(c[0], c[1]), C::new(d[0], d[1]))
            .unwrap()
            .into()
    }

    #[test]
    fn pullback_identity_and_shift() {
        let f = gaussian2([0.3, -0.2]);
        let id = pullback(&f, &crate::maps::make_identity().into()).unwrap();
        let shift = pullback(&f, &mobius([1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0])).unwrap();
        let shifted = gaussian2([-0.7, -0.2]);
        for p in [[0.0, 0.0], [1.2, -0.4], [-2.0, 0.5]] {
            assert!((id.value(&p).unwrap() - f.value(&p).unwrap()).abs() < 1e-12);
            assert!((shift.value(&p).unwrap() - shifted.value(&p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_along_reciprocal_obeys_chain_rule() {
        let (c1, c2) = (0.3, -0.2);
        let f = gaussian2([c1, c2]);
        let g = pullback(&f, &mobius([0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0])).unwrap();
        assert_eq!(g.domain(), &DomainSpec::PuncturedPlane { point: Point2::ORIGIN });
        for (x, y) in [(0.8, 0.5), (-1.3, 0.4), (2.0, -1.0)] {
            let r2 = x * x + y * y;
            let (u, v) = (x / r2, -y / r2);
            let (ux, vx) = ((y * y - x * x) / (r2 * r2), 2.0 * x * y / (r2 * r2));
            let (uy, vy) = (-2.0 * x * y / (r2 * r2), (y * y - x * x) / (r2 * r2));
            let val = (-((u - c1).powi(2) + (v - c2).powi(2))).exp();
            let dx = -2.0 * val * ((u - c1) * ux + (v - c2) * vx);
            let dy = -2.0 * val * ((u - c1) * uy + (v - c2) * vy);
            let d = g.derivatives(&[x, y], 1, None).unwrap();
            assert!((d.get(&[1, 0]) - dx).abs() <= 1e-5 * dx.abs().max(1e-3), "{} vs {dx}", d.get(&[1, 0]));
            assert!((d.get(&[0, 1]) - dy).abs() <= 1e-5 * dy.abs().max(1e-3), "{} vs {dy}", d.get(&[0, 1]));
        }
    }

    #[test]
    fn pullback_respects_composition() {
        let f = gaussian2([0.1, 0.4]);
        let phi = mobius([2.0, 1.0], [0.5, 0.0], [0.0, 0.0], [1.0, 0.0]);
        let psi = mobius([1.0, 0.0], [0.0, -1.0], [0.0, 0.0], [3.0, 0.5]);
        let both = crate::maps::compose(vec![psi.clone(), phi.clone()]).unwrap();
        let a = pullback(&f, &both).unwrap();
        let b = pullback(&pullback(&f, &phi).unwrap(), &psi).unwrap();
        for p in [[0.2, 0.1], [-0.5, 0.9], [1.5, -0.3]] {
            assert!((a.value(&p).unwrap() - b.value(&p).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn tail_example_along_log_grows_with_window() {
        let f = TestFunction::from_spec(FunctionSpec::TailExample).unwrap();
        let g = pullback_line(&f, &crate::maps::make_exp_log().inverse()).unwrap();
        for y in [3.0, 10.0, 250.0] {
            assert!((g.value(&[y]).unwrap() - 1.0 / y).abs() < 1e-15);
        }
        let d = g.exact_derivatives_1d(10.0, 2).unwrap().unwrap();
        assert!((d[2] - 2e-3).abs() < 1e-15);
        // sup of y^2 (1/y) over [e, 10^j]
        let plan = super::super::SamplePlan { window: 10.0, window_growth: 10.0, nodes: 16, ..Default::default() };
        let r = super::super::seminorm(&g, &[0], &[2], &plan).unwrap();
        for (j, t) in r.trend.iter().enumerate() {
            let edge = 10f64.powi(j as i32 + 1);
            assert!((t.sup / edge - 1.0).abs() < 1e-9, "level {j}: {}", t.sup);
        }
        assert_eq!(r.verdict, super::super::TrendVerdict::Geometric);
    }

    #[test]
    fn nazarov_decay_is_stable_on_fixed_window() {
        let f = make_nazarov_f(10).unwrap();
        let plan = super::super::SamplePlan { window: 3.0, window_growth: 1.0, ..Default::default() };
        let r = super::super::decay_ratio(&f, &f.oracle().clone(), 2, &plan).unwrap();
        assert!(r.ln_sup.0.is_finite());
        assert_eq!(r.verdict, super::super::TrendVerdict::Stable);
    }
}
