use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::geometry::{DistanceOracle, DomainSpec};
use crate::maps::{AnyMap, LineMap, PlaneMap};
use crate::schwartz::{
    decay_ratios, pullback, seminorms, DecayReport, FunctionSpec, SamplePlan, SeminormReport, TestFunction,
    TrendVerdict,
};

/// Largest derivative order, monomial order and decay order tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferOrders {
    pub k_max: usize,
    pub l_max: usize,
    pub m_max: u32,
}

impl Default for TransferOrders {
    fn default() -> Self {
        TransferOrders { k_max: 3, l_max: 3, m_max: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferVerdict {
    Supported,
    Refuted,
    Inconclusive,
}

impl TransferVerdict {
    /// Exit status convention: 0 supported, 1 refuted, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            TransferVerdict::Supported => 0,
            TransferVerdict::Refuted => 1,
            TransferVerdict::Inconclusive => 2,
        }
    }
}

/// Trends of one pulled-back function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionEvidence {
    pub function: String,
    pub domain: DomainSpec,
    pub decay: Vec<DecayReport>,
    pub seminorms: Vec<SeminormReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferEvidence {
    pub map: String,
    /// Functions on the target, pulled back along the map.
    pub suite: Vec<String>,
    /// Functions on the source, pulled back along the inverse.
    pub mirror_suite: Vec<String>,
    pub forward: Vec<FunctionEvidence>,
    pub inverse: Vec<FunctionEvidence>,
    pub verdict: TransferVerdict,
    /// The fastest-growing geometric trend, when refuted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Smallest per-level growth factor of that trend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_growth: Option<f64>,
    pub seed: u64,
}

/// Short name of a map family.
pub fn map_id(map: &AnyMap) -> String {
    fn plane(m: &PlaneMap) -> String {
        match m {
            PlaneMap::Mobius { .. } => "mobius".into(),
            PlaneMap::Square => "square".into(),
            PlaneMap::SqrtBranch { .. } => "sqrt_branch".into(),
            PlaneMap::Cusp(_) => "cusp".into(),
            PlaneMap::PlanarExp => "planar_exp".into(),
            PlaneMap::RadialPower { .. } => "radial_power".into(),
            PlaneMap::Composition { maps } => format!("composition({})", maps.iter().map(plane).collect::<Vec<_>>().join(",")),
            PlaneMap::Inverse { map } => format!("inverse({})", plane(map)),
        }
    }
    fn line(m: &LineMap) -> String {
        let (name, inv) = match m {
            LineMap::IntervalLinear { inverted, .. } => ("interval_linear", *inverted),
            LineMap::Cantor { inverted, .. } => ("cantor", *inverted),
            LineMap::ExpLog { inverted } => ("exp", *inverted),
            LineMap::Composition { maps } => {
                return format!("composition({})", maps.iter().map(line).collect::<Vec<_>>().join(","));
            }
        };
        if inv {
            format!("inverse({name})")
        } else {
            name.into()
        }
    }
    match map {
        AnyMap::Plane(m) => plane(m),
        AnyMap::Line(m) => line(m),
    }
}

/// Short name of a function, from its builtin tag.
pub fn function_id(spec: &FunctionSpec) -> String {
    match spec {
        FunctionSpec::Pullback { function, map, .. } => {
            format!("pullback({}, {})", function_id(function), map_id(map))
        }
        FunctionSpec::Scaled { factor, function } => format!("{factor}*{}", function_id(function)),
        other => serde_json::to_value(other)
            .ok()
            .and_then(|v| v.get("builtin").and_then(|b| b.as_str()).map(str::to_owned))
            .unwrap_or_else(|| "function".into()),
    }
}

fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    match dim {
        1 => (0..=max).map(|k| vec![k]).collect(),
        _ => (0..=max).flat_map(|t| (0..=t).map(move |i| vec![t - i, i])).collect(),
    }
}

/// Monomial weights whose seminorms bound every `|x^l|` with `|l| <= max`, since
/// `|x^l| <= 1 + |x_1|^max + |x_2|^max`.
fn monomial_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    match (dim, max) {
        (1, _) => multi_indices(1, max),
        (_, 0) => vec![vec![0, 0]],
        _ => vec![vec![0, 0], vec![max, 0], vec![0, max]],
    }
}

fn has_boundary(domain: &DomainSpec) -> bool {
    match domain {
        DomainSpec::Plane => false,
        DomainSpec::IntervalDomain { intervals } => {
            !(intervals.len() == 1 && intervals.intervals()[0] == (f64::NEG_INFINITY, f64::INFINITY))
        }
        _ => true,
    }
}

fn evidence(
    g: &TestFunction,
    oracle: &DistanceOracle,
    orders: &TransferOrders,
    plan: &SamplePlan,
) -> Result<FunctionEvidence, VerifyError> {
    let ks = multi_indices(g.dim(), orders.k_max);
    let ls = monomial_indices(g.dim(), orders.l_max);
    let pairs: Vec<(Vec<usize>, Vec<usize>)> =
        ks.iter().flat_map(|k| ls.iter().map(move |l| (k.clone(), l.clone()))).collect();
    let seminorm_reports = seminorms(g, &pairs, plan)?;
    let decay = if has_boundary(g.domain()) && orders.m_max > 0 {
        let ms: Vec<u32> = (1..=orders.m_max).collect();
        decay_ratios(g, oracle, &ms, plan)?
    } else {
        Vec::new()
    };
    Ok(FunctionEvidence { function: function_id(g.spec()), domain: g.domain().clone(), decay, seminorms: seminorm_reports })
}

fn pulled_back(f: &TestFunction, map: &AnyMap, domain: &DomainSpec) -> Result<TestFunction, VerifyError> {
    let g = pullback(f, map)?;
    Ok(if g.domain() == domain { g } else { g.restrict(domain.clone())? })
}

fn growth_factor(trend: &[crate::schwartz::TrendLevel]) -> f64 {
    let steps: Vec<f64> = trend.windows(2).map(|w| w[1].ln_sup.0 - w[0].ln_sup.0).collect();
    steps.iter().copied().fold(f64::INFINITY, f64::min).exp()
}

/// Pulls every suite function on `V` back to `U` along `map` (and every mirror function
/// on `U` back to `V` along the inverse), and classifies the refinement trends of
/// all seminorms and decay ratios up to `orders`.
pub fn positive_transfer(
    u: &DistanceOracle,
    v: &DistanceOracle,
    map: &AnyMap,
    suite: &[TestFunction],
    mirror: &[TestFunction],
    orders: &TransferOrders,
    plan: &SamplePlan,
) -> Result<TransferEvidence, VerifyError> {
    if orders.k_max > 4 || orders.m_max > 8 {
        return Err(VerifyError::Parameter("orders exceed k <= 4, m <= 8".into()));
    }
    let forward: Vec<FunctionEvidence> = suite
        .par_iter()
        .map(|f| evidence(&pulled_back(f, map, u.domain())?, u, orders, plan))
        .collect::<Result<_, _>>()?;
    let inverse: Vec<FunctionEvidence> = if mirror.is_empty() {
        Vec::new()
    } else {
        let inv = map.inverse()?;
        mirror
            .par_iter()
            .map(|f| evidence(&pulled_back(f, &inv, v.domain())?, v, orders, plan))
            .collect::<Result<_, _>>()?
    };
    let mut all_stable = true;
    let mut witness = None;
    let mut witness_growth = None;
    for (side, list) in [("forward", &forward), ("inverse", &inverse)] {
        for ev in list {
            let trends = ev
                .seminorms
                .iter()
                .map(|s| (format!("seminorm k={:?} l={:?}", s.k, s.l), s.verdict, &s.trend))
                .chain(ev.decay.iter().map(|d| (format!("decay m={}", d.m), d.verdict, &d.trend)));
            for (what, verdict, trend) in trends {
                all_stable &= verdict == TrendVerdict::Stable;
                if verdict == TrendVerdict::Geometric {
                    let g = growth_factor(trend);
                    if witness_growth.is_none_or(|w| g > w) {
                        witness = Some(format!("{side} {}: {what} grows by at least {g:.3}x per level", ev.function));
                        witness_growth = Some(g);
                    }
                }
            }
        }
    }
    let verdict = if witness.is_some() {
        TransferVerdict::Refuted
    } else if all_stable {
        TransferVerdict::Supported
    } else {
        TransferVerdict::Inconclusive
    };
    Ok(TransferEvidence {
        map: map_id(map),
        suite: suite.iter().map(|f| function_id(f.spec())).collect(),
        mirror_suite: mirror.iter().map(|f| function_id(f.spec())).collect(),
        forward,
        inverse,
        verdict,
        witness,
        witness_growth,
        seed: plan.seed,
    })
}

/// A map with matched function suites on both sides.
#[derive(Clone, Debug)]
pub struct TransferSuite {
    pub name: String,
    pub u: DistanceOracle,
    pub v: DistanceOracle,
    pub map: AnyMap,
    pub suite: Vec<TestFunction>,
    pub mirror: Vec<TestFunction>,
}

impl TransferSuite {
    pub fn run(&self, orders: &TransferOrders, plan: &SamplePlan) -> Result<TransferEvidence, VerifyError> {
        positive_transfer(&self.u, &self.v, &self.map, &self.suite, &self.mirror, orders, plan)
    }
}

/// Built-in fixtures for the equivalence examples and the exp/log non-example.
pub mod suites {
    use num_complex::Complex64;

    use super::*;
    use crate::geometry::{LengthRule, Point2};
    use crate::maps::{make_cantor_map, make_cusp_map, make_exp_log, make_interval_linear_map, make_mobius, BumpSpec};
    use crate::numeric::Polynomial;
    use crate::schwartz::{BumpWeight, UnionLayout};

    fn exact(d: DomainSpec) -> Result<DistanceOracle, VerifyError> {
        Ok(DistanceOracle::exact(d)?)
    }

    fn func(spec: FunctionSpec) -> Result<TestFunction, VerifyError> {
        Ok(TestFunction::from_spec(spec)?)
    }

    /// The cusp `{u > 0, 0 < v < e^{-p(u)}}` onto the half-strip, with boundary-flat functions on both.
    pub fn cusp(p: Polynomial) -> Result<TransferSuite, VerifyError> {
        let map = make_cusp_map(p.clone())?;
        let strip = DomainSpec::Strip { x_min: 1.0, height: 1.0 };
        Ok(TransferSuite {
            name: "cusp".into(),
            u: exact(DomainSpec::CuspDomain { p: p.clone() })?,
            v: exact(strip)?,
            map: map.into(),
            suite: vec![func(FunctionSpec::StripFlat { x_min: 1.0, height: 1.0 })?],
            mirror: vec![func(FunctionSpec::CuspFlat { p })?],
        })
    }

    /// Unit intervals onto the middle-third gaps of the first `depth` generations.
    pub fn cantor(depth: u32) -> Result<TransferSuite, VerifyError> {
        let map = make_cantor_map(depth)?;
        let count = (1usize << depth) - 1;
        Ok(TransferSuite {
            name: "cantor".into(),
            u: exact(map.domain()?)?,
            v: exact(map.codomain()?)?,
            map: map.into(),
            suite: vec![func(FunctionSpec::UnionBumps {
                layout: UnionLayout::CantorGaps { depth },
                weight: BumpWeight::ExpInverseLength,
            })?],
            mirror: vec![func(FunctionSpec::UnionBumps {
                layout: UnionLayout::Rule { rule: LengthRule::Constant { value: 1.0 }, n_max: count },
                weight: BumpWeight::ExpIndex { rate: 1.0 },
            })?],
        })
    }

    /// `(n, n + a(n))` onto `(n, n + b(n))` by the affine map on each piece.
    pub fn interval_linear(a: LengthRule, b: LengthRule, n_max: usize) -> Result<TransferSuite, VerifyError> {
        let map = make_interval_linear_map(a.clone(), b.clone(), n_max)?;
        Ok(TransferSuite {
            name: "interval_linear".into(),
            u: exact(map.domain()?)?,
            v: exact(map.codomain()?)?,
            map: map.into(),
            suite: vec![func(FunctionSpec::UnionBumps {
                layout: UnionLayout::Rule { rule: b, n_max },
                weight: BumpWeight::ExpIndex { rate: 1.0 },
            })?],
            mirror: vec![func(FunctionSpec::UnionBumps {
                layout: UnionLayout::Rule { rule: a, n_max },
                weight: BumpWeight::ExpIndex { rate: 1.0 },
            })?],
        })
    }

    /// `log` from the positive half-line onto the line; the suite holds the
    /// function that is zero on the negative axis and `e^{-x}` for `x > 1`.
    pub fn exp_log() -> Result<TransferSuite, VerifyError> {
        let log = make_exp_log().inverse();
        Ok(TransferSuite {
            name: "exp_log".into(),
            u: exact(log.domain()?)?,
            v: exact(log.codomain()?)?,
            map: log.into(),
            suite: vec![func(FunctionSpec::TailExample)?],
            mirror: vec![func(FunctionSpec::InverseExp)?],
        })
    }

    /// `z -> 1/(z - z0)` from the exterior of the unit disc about `z0` onto the punctured unit disc.
    pub fn mobius(z0: Point2) -> Result<TransferSuite, VerifyError> {
        let one = Complex64::new(1.0, 0.0);
        let map = make_mobius(Complex64::new(0.0, 0.0), one, one, -z0.to_complex())?;
        let v = DomainSpec::Intersection {
            parts: vec![DomainSpec::unit_disc(), DomainSpec::PuncturedPlane { point: Point2::ORIGIN }],
        };
        let ring = |center: Point2, support: (f64, f64), plateau: (f64, f64)| -> Result<TestFunction, VerifyError> {
            func(FunctionSpec::RadialBump { center, profile: BumpSpec::new(support, plateau)? })
        };
        Ok(TransferSuite {
            name: "mobius".into(),
            u: exact(DomainSpec::ExteriorDisc { center: z0, radius: 1.0 })?,
            v: exact(v)?,
            map: map.into(),
            suite: vec![ring(Point2::ORIGIN, (0.2, 0.8), (0.35, 0.65))?],
            // wide transitions in both radii keep the image bump smooth
            mirror: vec![ring(z0, (1.2, 3.0), (1.6, 2.2))?],
        })
    }
}
