use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SchwartzError, TestFunction};
use crate::geometry::{DistanceOracle, DomainSpec, NazarovGeometry, Point2};
use crate::serde_ext::LogScalar;

/// Refinement schedule for sampled suprema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplePlan {
    pub levels: usize,
    /// Interior nodes per bounded axis at level 0; doubles per level.
    pub nodes: usize,
    /// Boundary layers at level 0; two more per level.
    pub layers: usize,
    /// Half-width of the level-0 window on unbounded axes (disc count for the disc chain).
    pub window: f64,
    /// Intervals of a countable union sampled at level 0, before growth.
    pub components: usize,
    /// Window growth per level. With growth 1 the fixed window is refined instead.
    pub window_growth: f64,
    /// Halvings of the first hill-climb step before the climb stops.
    pub polish_rounds: usize,
    /// Extra hill-climb starts drawn from the grid with the seeded generator.
    pub random_points: usize,
    /// Best grid nodes per component used as hill-climb starts.
    pub peaks: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            levels: 3,
            nodes: 32,
            layers: 6,
            window: 8.0,
            components: 63,
            window_growth: 2.0,
            polish_rounds: 12,
            random_points: 4,
            peaks: 6,
            seed: 0,
        }
    }
}

impl SamplePlan {
    fn validate(&self) -> Result<(), SchwartzError> {
        if self.levels == 0 || self.nodes < 2 || !(self.window > 0.0) || !(self.window_growth >= 1.0) {
            return Err(SchwartzError::Parameter(
                "plan needs levels >= 1, nodes >= 2, window > 0 and growth >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One refinement level of a sampled supremum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendLevel {
    pub level: usize,
    pub node_count: usize,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub sup: f64,
    pub ln_sup: LogScalar,
    pub argmax: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendVerdict {
    /// Growth below 1% per level.
    Stable,
    /// Growth above 2x per level.
    Geometric,
    Inconclusive,
}

impl TrendVerdict {
    pub fn classify(ln_sups: &[f64]) -> TrendVerdict {
        let steps: Vec<f64> = ln_sups
            .windows(2)
            .map(|w| if w[0] == w[1] { 0.0 } else { w[1] - w[0] })
            .collect();
        if steps.is_empty() {
            return TrendVerdict::Inconclusive;
        }
        if steps.iter().all(|d| *d < 1.01f64.ln()) {
            TrendVerdict::Stable
        } else if steps.iter().all(|d| *d > 2f64.ln()) {
            TrendVerdict::Geometric
        } else {
            TrendVerdict::Inconclusive
        }
    }
}

/// Sampled estimate of `sup |x^l d^k f|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    /// Derivative multi-index.
    pub k: Vec<usize>,
    /// Monomial multi-index.
    pub l: Vec<usize>,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub sup_value: f64,
    pub ln_sup: LogScalar,
    pub argmax: Vec<f64>,
    pub level: usize,
    pub node_count: usize,
    pub seed: u64,
    pub trend: Vec<TrendLevel>,
    pub verdict: TrendVerdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Sampled estimate of `sup |f| / d^m`, `d` the boundary distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub m: u32,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub sup_value: f64,
    pub ln_sup: LogScalar,
    pub argmax: Vec<f64>,
    pub level: usize,
    pub node_count: usize,
    pub seed: u64,
    pub trend: Vec<TrendLevel>,
    pub verdict: TrendVerdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Parameter values on one axis of a chart.
#[derive(Clone, Copy, Debug)]
enum Axis {
    /// `(a, b)` with boundary layers at both ends.
    Walled { a: f64, b: f64 },
    /// `[a, b)`: includes `a`, layers only near `b`.
    OpenStart { a: f64, b: f64 },
    /// `(a, inf)` with layers near `a`.
    HalfLine { a: f64 },
    /// `(-inf, a)` with layers near `a`.
    HalfLineLeft { a: f64 },
    Line,
    Angle,
}

struct Level<'a> {
    plan: &'a SamplePlan,
    j: usize,
}

impl Level<'_> {
    fn refined(&self) -> usize {
        self.plan.nodes << self.j
    }

    fn layer_count(&self) -> usize {
        self.plan.layers + 2 * self.j
    }

    fn extent(&self) -> f64 {
        self.plan.window * self.plan.window_growth.powi(self.j as i32)
    }

    fn unbounded_spacing(&self) -> f64 {
        let s = self.plan.window / self.plan.nodes as f64;
        if self.plan.window_growth > 1.0 {
            s
        } else {
            s / (1u64 << self.j) as f64
        }
    }

    /// Distances `spacing0 * 2^-i`, `i = 1..=layers`, from a wall.
    fn layers(&self, spacing0: f64) -> impl Iterator<Item = f64> {
        (1..=self.layer_count()).map(move |i| spacing0 * 0.5f64.powi(i as i32))
    }

    fn values(&self, axis: Axis) -> Vec<f64> {
        let mut out = Vec::new();
        match axis {
            Axis::Walled { a, b } => {
                let n = self.refined();
                let len = b - a;
                out.extend((1..n).map(|k| a + len * k as f64 / n as f64));
                let s0 = len / self.plan.nodes as f64;
                for d in self.layers(s0) {
                    out.push(a + d);
                    out.push(b - d);
                }
            }
            Axis::OpenStart { a, b } => {
                let n = self.refined();
                let len = b - a;
                out.extend((0..n).map(|k| a + len * k as f64 / n as f64));
                out.extend(self.layers(len / self.plan.nodes as f64).map(|d| b - d));
            }
            Axis::HalfLine { a } | Axis::HalfLineLeft { a } => {
                let s = self.unbounded_spacing();
                let count = (self.extent() / s).round() as usize;
                let sign = if matches!(axis, Axis::HalfLine { .. }) { 1.0 } else { -1.0 };
                out.extend((1..=count).map(|k| a + sign * s * k as f64));
                out.extend(self.layers(self.plan.window / self.plan.nodes as f64).map(|d| a + sign * d));
            }
            Axis::Line => {
                let s = self.unbounded_spacing();
                let count = (self.extent() / s).round() as i64;
                out.extend((-count..=count).map(|k| s * k as f64));
            }
            Axis::Angle => {
                let n = 4 * self.refined();
                out.extend((0..n).map(|k| TAU * k as f64 / n as f64));
            }
        }
        out
    }

    fn tensor(&self, ax: Axis, ay: Axis, map: impl Fn(f64, f64) -> [f64; 2]) -> Vec<Vec<f64>> {
        let xs = self.values(ax);
        let ys = self.values(ay);
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                let p = map(x, y);
                out.push(p.to_vec());
            }
        }
        out
    }

    fn polar(&self, center: Point2, radial: Axis) -> Vec<Vec<f64>> {
        let mut pts = self.tensor(radial, Axis::Angle, |r, t| [center.x + r * t.cos(), center.y + r * t.sin()]);
        if matches!(radial, Axis::OpenStart { a, .. } if a == 0.0) {
            // the angle sweep repeats the centre; keep it once
            let n = self.values(Axis::Angle).len();
            pts.drain(1..n);
        }
        pts
    }

    fn points(&self, domain: &DomainSpec) -> Vec<Vec<f64>> {
        match domain {
            DomainSpec::IntervalDomain { intervals } => {
                let mut ivs: Vec<(f64, f64)> = intervals.intervals().to_vec();
                if ivs.len() > 1 {
                    // longest first, then by position: generation order for gap families
                    ivs.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)).then(a.0.total_cmp(&b.0)));
                    let take = ((self.plan.components + 1) as f64 * self.plan.window_growth.powi(self.j as i32))
                        .round() as usize
                        - 1;
                    ivs.truncate(take.max(1));
                }
                let mut out = Vec::new();
                for (a, b) in ivs {
                    let axis = match (a.is_finite(), b.is_finite()) {
                        (true, true) => Axis::Walled { a, b },
                        (true, false) => Axis::HalfLine { a },
                        (false, true) => Axis::HalfLineLeft { a: b },
                        (false, false) => Axis::Line,
                    };
                    out.extend(self.values(axis).into_iter().map(|x| vec![x]));
                }
                out
            }
            DomainSpec::Disc { center, radius } => self.polar(*center, Axis::OpenStart { a: 0.0, b: *radius }),
            DomainSpec::ExteriorDisc { center, radius } => self.polar(*center, Axis::HalfLine { a: *radius }),
            DomainSpec::PuncturedPlane { point } => self.polar(*point, Axis::HalfLine { a: 0.0 }),
            DomainSpec::Plane => self.tensor(Axis::Line, Axis::Line, |x, y| [x, y]),
            DomainSpec::HalfPlane => self.tensor(Axis::Line, Axis::HalfLine { a: 0.0 }, |x, y| [x, y]),
            DomainSpec::Strip { x_min, height } => {
                self.tensor(Axis::HalfLine { a: *x_min }, Axis::Walled { a: 0.0, b: *height }, |x, y| [x, y])
            }
            DomainSpec::CuspDomain { p } => self.tensor(Axis::HalfLine { a: 0.0 }, Axis::Walled { a: 0.0, b: 1.0 }, |u, t| {
                [u, t * (-p.eval(u)).exp()]
            }),
            DomainSpec::NazarovDomain { n_max } => {
                let geo = NazarovGeometry::new(*n_max).expect("validated domain");
                let count = (self.extent().round() as usize).clamp(1, *n_max);
                let mut out = Vec::new();
                for n in 1..=count {
                    out.extend(self.polar(geo.center(n), Axis::OpenStart { a: 0.0, b: geo.radius(n) }));
                    let h = geo.half_height(n);
                    if n < *n_max && h > 1e-300 {
                        let a = n as f64;
                        out.extend(self.tensor(Axis::Walled { a, b: a + 1.0 }, Axis::Walled { a: -h, b: h }, |x, y| [x, y]));
                    }
                }
                out
            }
            other => {
                let w = self.extent();
                let bb = other.bounding_box();
                let (ax, ay) = match bb {
                    Some(r) => (Axis::Walled { a: r.x0, b: r.x1 }, Axis::Walled { a: r.y0, b: r.y1 }),
                    None => (Axis::Walled { a: -w, b: w }, Axis::Walled { a: -w, b: w }),
                };
                self.tensor(ax, ay, |x, y| [x, y])
            }
        }
    }
}

fn to_point(p: &[f64]) -> Point2 {
    if p.len() == 1 {
        Point2::on_line(p[0])
    } else {
        Point2::new(p[0], p[1])
    }
}

/// Level-`j` base nodes of the plan on `domain` (before containment filtering).
pub(crate) fn level_points(domain: &DomainSpec, plan: &SamplePlan, j: usize) -> Vec<Vec<f64>> {
    Level { plan, j }.points(domain)
}

/// Per-component refinement trends of a vector of log-valued quantities.
pub(crate) struct SweepOutcome {
    pub trends: Vec<Vec<TrendLevel>>,
    pub warnings: Vec<String>,
}

struct Sweep<'a, Q> {
    plan: &'a SamplePlan,
    oracle: &'a DistanceOracle,
    components: usize,
    quantity: Q,
}

impl<Q> Sweep<'_, Q>
where
    Q: Fn(&[f64]) -> Result<Vec<f64>, SchwartzError> + Sync,
{
    fn contains(&self, p: &[f64]) -> bool {
        self.oracle.contains(to_point(p))
    }

    fn eval(&self, p: &[f64]) -> Option<Vec<f64>> {
        if !self.contains(p) {
            return None;
        }
        match (self.quantity)(p) {
            Ok(q) if q.len() == self.components && !q.iter().any(|v| v.is_nan()) => Some(q),
            _ => None,
        }
    }

    /// Hill-climb on component `c` inside `window`: coordinate probes plus a step
    /// along their difference quotient, halving the step when nothing improves.
    fn polish(&self, c: usize, start: &[f64], q0: f64, step: f64, window: &[(f64, f64)]) -> (Vec<f64>, f64) {
        let mut p = start.to_vec();
        let mut best = q0;
        let mut h = step;
        let h_min = step * 0.5f64.powi(self.plan.polish_rounds as i32);
        let mut moves = 0;
        while h >= h_min && best < f64::INFINITY && best > f64::NEG_INFINITY && moves < 200 {
            let mut improved: Option<(Vec<f64>, f64)> = None;
            let mut slope = vec![0.0; p.len()];
            let consider = |cand: Vec<f64>, improved: &mut Option<(Vec<f64>, f64)>| -> Option<f64> {
                if cand.iter().zip(window).any(|(x, w)| *x < w.0 || *x > w.1) {
                    return None;
                }
                let q = self.eval(&cand)?[c];
                if q > improved.as_ref().map_or(best, |b| b.1) {
                    *improved = Some((cand, q));
                }
                Some(q)
            };
            for axis in 0..p.len() {
                let mut sides = [None; 2];
                for (side, sign) in [-1.0, 1.0].into_iter().enumerate() {
                    let mut cand = p.clone();
                    cand[axis] += sign * h;
                    sides[side] = consider(cand, &mut improved);
                }
                if let [Some(lo), Some(hi)] = sides {
                    slope[axis] = hi - lo;
                }
            }
            let norm = slope.iter().map(|g| g * g).sum::<f64>().sqrt();
            if p.len() > 1 && norm > 0.0 && norm.is_finite() {
                let cand: Vec<f64> = p.iter().zip(&slope).map(|(x, g)| x + h * g / norm).collect();
                consider(cand, &mut improved);
            }
            match improved {
                Some((cand, q)) => {
                    p = cand;
                    best = q;
                    moves += 1;
                    h = (h * 1.5).min(step);
                }
                None => {
                    h *= 0.5;
                }
            }
        }
        (p, best)
    }

    fn run(&self) -> Result<SweepOutcome, SchwartzError> {
        self.plan.validate()?;
        let nc = self.components;
        let mut carried: Vec<Vec<(Vec<f64>, f64)>> = vec![Vec::new(); nc];
        let mut trends: Vec<Vec<TrendLevel>> = vec![Vec::new(); nc];
        let mut warnings = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(self.plan.seed);
        for j in 0..self.plan.levels {
            let level = Level { plan: self.plan, j };
            let pts: Vec<Vec<f64>> =
                level.points(self.oracle.domain()).into_iter().filter(|p| self.contains(p)).collect();
            if pts.is_empty() {
                return Err(SchwartzError::Numerical("sampling window contains no domain points".into()));
            }
            let values: Vec<Option<Vec<f64>>> = pts.par_iter().map(|p| self.eval(p)).collect();
            let good: Vec<usize> = (0..pts.len()).filter(|&i| values[i].is_some()).collect();
            let skipped = pts.len() - good.len();
            if skipped > 0 {
                warnings.push(format!("level {j}: {skipped} samples failed to evaluate"));
            }
            let dim = pts[0].len();
            let mut window = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
            for p in &pts {
                for (w, x) in window.iter_mut().zip(p) {
                    w.0 = w.0.min(*x);
                    w.1 = w.1.max(*x);
                }
            }
            // per-component best nodes, ties to the smallest index, kept a few cells apart
            let extent = window.iter().map(|w| w.1 - w.0).filter(|e| e.is_finite()).fold(0.0, f64::max);
            let separation = 4.0 * extent / level.refined() as f64;
            let peaks: Vec<Vec<usize>> = (0..nc)
                .into_par_iter()
                .map(|c| {
                    let mut order = good.clone();
                    let key = |i: &usize| values[*i].as_ref().unwrap()[c];
                    order.sort_by(|a, b| key(b).total_cmp(&key(a)).then(a.cmp(b)));
                    let mut chosen: Vec<usize> = Vec::new();
                    for i in order {
                        if chosen.len() >= self.plan.peaks.max(1) {
                            break;
                        }
                        let far = chosen.iter().all(|&k| {
                            pts[k].iter().zip(&pts[i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > separation
                        });
                        if far {
                            chosen.push(i);
                        }
                    }
                    chosen
                })
                .collect();
            let base_best: Vec<Option<usize>> = peaks.iter().map(|p| p.first().copied()).collect();
            let randoms: Vec<usize> = if good.is_empty() {
                Vec::new()
            } else {
                (0..self.plan.random_points).map(|_| good[rng.gen_range(0..good.len())]).collect()
            };
            let spacing = 1.0 / level.refined() as f64;
            // past level 0, climb only where the grid beats every carried point
            let fresh: Vec<bool> = (0..nc)
                .map(|c| {
                    let carried_best = carried[c].iter().map(|(_, q)| *q).fold(f64::NEG_INFINITY, f64::max);
                    j == 0 || base_best[c].is_some_and(|i| values[i].as_ref().unwrap()[c] > carried_best)
                })
                .collect();
            // starts two decades under the grid maximum are not worth a climb
            let values_ref = &values;
            let jobs: Vec<(usize, usize)> = (0..nc)
                .filter(|&c| fresh[c])
                .flat_map(|c| {
                    let top = base_best[c].map_or(f64::NEG_INFINITY, |i| values_ref[i].as_ref().unwrap()[c]);
                    peaks[c]
                        .iter()
                        .copied()
                        .chain(randoms.iter().copied())
                        .filter(move |&i| values_ref[i].as_ref().unwrap()[c] > top - 100f64.ln())
                        .map(move |i| (c, i))
                })
                .collect();
            let polished: Vec<(usize, Vec<f64>, f64)> = jobs
                .par_iter()
                .map(|&(c, i)| {
                    let d = self.oracle.signed_distance(to_point(&pts[i]));
                    let step = if d.is_finite() { 0.25 * spacing.min(d) } else { 0.25 * spacing * self.plan.window };
                    let (p, q) = self.polish(c, &pts[i], values[i].as_ref().unwrap()[c], step.max(1e-12), &window);
                    (c, p, q)
                })
                .collect();
            for (c, p, q) in polished {
                carried[c].push((p, q));
            }
            for c in 0..nc {
                let mut best: Option<(Vec<f64>, f64)> =
                    base_best[c].map(|i| (pts[i].clone(), values[i].as_ref().unwrap()[c]));
                for (p, q) in &carried[c] {
                    if best.as_ref().map_or(true, |b| *q > b.1) {
                        best = Some((p.clone(), *q));
                    }
                }
                let (argmax, ln_sup) = best.unwrap_or((pts[0].clone(), f64::NEG_INFINITY));
                trends[c].push(TrendLevel {
                    level: j,
                    node_count: pts.len() + carried[c].len(),
                    sup: ln_sup.exp(),
                    ln_sup: LogScalar(ln_sup),
                    argmax,
                });
            }
        }
        Ok(SweepOutcome { trends, warnings })
    }
}

/// Sampled suprema of `quantity` (a vector of logarithms) over the plan's nested grids on the oracle's domain.
pub(crate) fn sweep<Q>(oracle: &DistanceOracle, plan: &SamplePlan, components: usize, quantity: Q) -> Result<SweepOutcome, SchwartzError>
where
    Q: Fn(&[f64]) -> Result<Vec<f64>, SchwartzError> + Sync,
{
    Sweep { plan, oracle, components, quantity }.run()
}

fn check_oracle(f: &TestFunction, oracle: &DistanceOracle) -> Result<(), SchwartzError> {
    if oracle.domain() != f.domain() {
        return Err(SchwartzError::Parameter("distance oracle does not match the function's domain".into()));
    }
    Ok(())
}

fn verdict_of(trend: &[TrendLevel]) -> TrendVerdict {
    TrendVerdict::classify(&trend.iter().map(|t| t.ln_sup.0).collect::<Vec<_>>())
}

/// `sup |x^l d^k f(x)|` over the plan's grids, `k` the derivative and `l` the monomial multi-index.
pub fn seminorm(f: &TestFunction, k: &[usize], l: &[usize], plan: &SamplePlan) -> Result<SeminormReport, SchwartzError> {
    Ok(seminorms(f, &[(k.to_vec(), l.to_vec())], plan)?.remove(0))
}

/// Several seminorms from one shared sweep; each pair is `(k, l)`.
pub fn seminorms(f: &TestFunction, indices: &[(Vec<usize>, Vec<usize>)], plan: &SamplePlan) -> Result<Vec<SeminormReport>, SchwartzError> {
    let dim = f.dim();
    let mut order = 0;
    for (k, l) in indices {
        if k.len() != dim || l.len() != dim {
            return Err(SchwartzError::Parameter(format!("multi-indices must have length {dim}")));
        }
        let o: usize = k.iter().sum();
        if o > 4 {
            return Err(SchwartzError::Parameter(format!("derivative order |k| = {o} exceeds 4")));
        }
        order = order.max(o);
    }
    let quantity = |p: &[f64]| -> Result<Vec<f64>, SchwartzError> {
        let partials = if order > 0 { Some(f.derivatives(p, order, None)?) } else { None };
        let ln_value = if indices.iter().any(|(k, _)| k.iter().sum::<usize>() == 0) {
            f.ln_value(p)?.ln_abs
        } else {
            0.0
        };
        Ok(indices
            .iter()
            .map(|(k, l)| {
                let mono: f64 =
                    p.iter().zip(l).map(|(x, e)| if *e == 0 { 0.0 } else { *e as f64 * x.abs().ln() }).sum();
                let ln_d = if k.iter().sum::<usize>() == 0 {
                    ln_value
                } else {
                    partials.as_ref().unwrap().get(k).abs().ln()
                };
                if ln_d == f64::NEG_INFINITY {
                    ln_d
                } else {
                    mono + ln_d
                }
            })
            .collect())
    };
    let fd_note = if order > 0 { fd_warning(f, plan) } else { None };
    let res = sweep(f.oracle(), plan, indices.len(), quantity)?;
    let mut warnings = res.warnings;
    warnings.extend(fd_note);
    Ok(indices
        .iter()
        .zip(res.trends)
        .map(|((k, l), trend)| {
            let last = trend.last().expect("at least one level").clone();
            SeminormReport {
                k: k.clone(),
                l: l.clone(),
                sup_value: last.sup,
                ln_sup: last.ln_sup,
                argmax: last.argmax,
                level: last.level,
                node_count: last.node_count,
                seed: plan.seed,
                verdict: verdict_of(&trend),
                trend,
                warnings: warnings.clone(),
            }
        })
        .collect())
}

fn fd_warning(f: &TestFunction, plan: &SamplePlan) -> Option<String> {
    if f.dim() == 1 && f.exact_derivatives_1d(0.0, 0).is_ok_and(|d| d.is_some()) {
        return None;
    }
    let deepest = plan.layers + 2 * (plan.levels - 1);
    (deepest > 20).then(|| {
        format!("boundary layers reach 2^-{deepest}; finite-difference derivatives there carry rounding error")
    })
}

/// `sup |f| / d^m` with `d` from `oracle`, in log arithmetic.
pub fn decay_ratio(f: &TestFunction, oracle: &DistanceOracle, m: u32, plan: &SamplePlan) -> Result<DecayReport, SchwartzError> {
    Ok(decay_ratios(f, oracle, &[m], plan)?.remove(0))
}

/// Several decay orders from one shared sweep.
pub fn decay_ratios(f: &TestFunction, oracle: &DistanceOracle, ms: &[u32], plan: &SamplePlan) -> Result<Vec<DecayReport>, SchwartzError> {
    if let Some(m) = ms.iter().find(|m| **m > 8) {
        return Err(SchwartzError::Parameter(format!("decay order m = {m} exceeds 8")));
    }
    check_oracle(f, oracle)?;
    let quantity = |p: &[f64]| -> Result<Vec<f64>, SchwartzError> {
        let (inside, ln_d) = oracle.ln_distance(to_point(p));
        if !inside {
            return Err(SchwartzError::Domain(format!("{p:?} is outside the domain")));
        }
        let ln_f = f.ln_value(p)?.ln_abs;
        Ok(ms.iter().map(|m| if ln_f == f64::NEG_INFINITY { ln_f } else { ln_f - *m as f64 * ln_d }).collect())
    };
    let res = sweep(oracle, plan, ms.len(), quantity)?;
    Ok(ms
        .iter()
        .zip(res.trends)
        .map(|(m, trend)| {
            let last = trend.last().expect("at least one level").clone();
            DecayReport {
                m: *m,
                sup_value: last.sup,
                ln_sup: last.ln_sup,
                argmax: last.argmax,
                level: last.level,
                node_count: last.node_count,
                seed: plan.seed,
                verdict: verdict_of(&trend),
                trend,
                warnings: res.warnings.clone(),
            }
        })
        .collect())
}
