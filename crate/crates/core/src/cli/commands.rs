use clap::{ArgGroup, Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::json::load;
use super::table::{cell, Table};
use super::{CliError, Command, Outcome, Verdict};
use crate::geometry::{
    ahlfors_constant, box_counting_dimension, build_koch_snowflake, cantor_gaps_exact, cantor_remainder,
    regular_polygon, sample_intervals, sample_polyline, scale_ladder, ClosedCurve, DistanceOracle, DomainSpec,
    IntervalUnion, LengthRule, NazarovGeometry, Point2,
};
use crate::maps::{
    make_cantor_map, make_cusp_map, make_exp_log, make_identity, make_interval_linear_map, map_derivative, AnyMap,
    PlaneMap,
};
use crate::numeric::Polynomial;
use crate::schwartz::{FunctionSpec, SamplePlan, TestFunction, TrendLevel, TrendVerdict};
use crate::serde_ext::LogScalar;
use crate::verify::{
    check_derivative_blowup, check_holder_distortion, interval_obstruction, nazarov_obstruction, positive_transfer,
    suites, Bijection, GrowthClass, TransferEvidence, TransferOrders, TransferSuite, TransferVerdict,
};

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Failure(e.to_string()))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Comma-separated floats, e.g. `0.5,-0.25`.
fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("`{t}` is not a number in `{s}`"))))
        .collect()
}

fn parse_indices(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("`{t}` is not an index in `{s}`"))))
        .collect()
}

/// `constant:V`, `inverse-power:P`, `exponential:R`, or a JSON rule.
pub(crate) fn parse_rule(s: &str) -> Result<LengthRule, CliError> {
    if s.trim_start().starts_with('{') {
        return load(s);
    }
    let (kind, arg) = s.split_once(':').ok_or_else(|| usage(format!("length rule `{s}` needs the form kind:value")))?;
    let v: f64 = arg.parse().map_err(|_| usage(format!("`{arg}` is not a number")))?;
    match kind {
        "constant" => Ok(LengthRule::Constant { value: v }),
        "inverse-power" => Ok(LengthRule::InversePower { power: v }),
        "exponential" => Ok(LengthRule::Exponential { rate: v }),
        _ => Err(usage(format!("unknown length rule `{kind}`; use constant, inverse-power or exponential"))),
    }
}

fn parse_bijection(s: &str) -> Result<Bijection, CliError> {
    match s {
        "identity" => Ok(Bijection::Identity),
        "pair-swap" => Ok(Bijection::PairSwap),
        _ if s.trim_start().starts_with('{') => load(s),
        _ => Ok(Bijection::Explicit { values: parse_indices(s)? }),
    }
}

fn trend_rows(t: &mut Table, prefix: &[String], trend: &[TrendLevel]) {
    for lv in trend {
        let mut row = prefix.to_vec();
        row.extend([lv.level.to_string(), lv.node_count.to_string(), cell(lv.sup), cell(lv.ln_sup.0)]);
        t.push(row);
    }
}

fn curve_table(curve: &ClosedCurve) -> Table {
    let mut t = Table::new(&["index", "x", "y"]);
    for (i, p) in curve.vertices.iter().enumerate() {
        t.push(vec![i.to_string(), cell(p.x), cell(p.y)]);
    }
    t
}

// ---------------------------------------------------------------- sampling plan

#[derive(Debug, Clone, Args, Serialize)]
pub(crate) struct PlanArgs {
    /// Refinement levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Interior nodes per bounded axis at level 0.
    #[arg(long)]
    nodes: Option<usize>,
    /// Boundary layers at level 0.
    #[arg(long)]
    layers: Option<usize>,
    /// Half-width of the level-0 window on unbounded axes.
    #[arg(long)]
    window: Option<f64>,
    /// Window growth per level (1 refines a fixed window).
    #[arg(long)]
    window_growth: Option<f64>,
    /// Components of a countable union sampled at level 0.
    #[arg(long)]
    components: Option<usize>,
}

impl PlanArgs {
    fn plan(&self, seed: u64) -> SamplePlan {
        let d = SamplePlan::default();
        SamplePlan {
            levels: self.levels.unwrap_or(d.levels),
            nodes: self.nodes.unwrap_or(d.nodes),
            layers: self.layers.unwrap_or(d.layers),
            window: self.window.unwrap_or(d.window),
            window_growth: self.window_growth.unwrap_or(d.window_growth),
            components: self.components.unwrap_or(d.components),
            seed,
            ..d
        }
    }
}

// ---------------------------------------------------------------- quasicircle

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true)))]
pub(crate) struct QuasicircleArgs {
    /// Polyline JSON: {"closed": bool, "points": [[x, y], ...]}.
    #[arg(long, group = "source")]
    curve: Option<String>,
    /// Koch snowflake with this many iterations.
    #[arg(long, group = "source")]
    koch: Option<usize>,
    /// Regular polygon with this many sides.
    #[arg(long, group = "source")]
    polygon: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// For --koch, also report every iteration below.
    #[arg(long)]
    trend: bool,
}

fn quasicircle(a: &QuasicircleArgs) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let curve = if let Some(path) = &a.curve {
        inputs.push(path.clone());
        let c: ClosedCurve = load(path)?;
        c.validate()?;
        c
    } else if let Some(k) = a.koch {
        build_koch_snowflake(k)?
    } else {
        regular_polygon(a.polygon.unwrap_or(3), a.radius)?
    };
    let report = ahlfors_constant(&curve)?;
    let (i, j) = report.witness;
    let mut result = json!({
        "constant": report.constant,
        "witness": [i, j],
        "witness_points": [curve.vertices[i], curve.vertices[j]],
        "report": to_value(&report)?,
    });
    if let (Some(k), true) = (a.koch, a.trend) {
        let trend: Result<Vec<_>, CliError> =
            (0..=k).map(|m| Ok(ahlfors_constant(&build_koch_snowflake(m)?)?.constant)).collect();
        result["trend"] = to_value(&trend?)?;
    }
    let verdict = if report.constant.is_finite() && report.constant >= 1.0 { Verdict::Pass } else { Verdict::Violation };
    Ok(Outcome { verdict, result, table: curve_table(&curve), inputs })
}

// ---------------------------------------------------------------- dimension

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum DimensionFixture {
    Koch,
    Cantor,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true)))]
pub(crate) struct DimensionArgs {
    #[arg(long, value_enum, group = "source")]
    fixture: Option<DimensionFixture>,
    /// Polyline JSON file.
    #[arg(long, group = "source")]
    curve: Option<String>,
    /// Koch iterations or Cantor depth (defaults 5 and 10).
    #[arg(long)]
    level: Option<usize>,
    /// Largest box size; each further scale halves it.
    #[arg(long)]
    largest: Option<f64>,
    /// Number of box sizes.
    #[arg(long)]
    scales: Option<usize>,
    /// Sample spacing along the set.
    #[arg(long)]
    spacing: Option<f64>,
    /// Allowed distance from the known dimension.
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
}

fn dimension(a: &DimensionArgs) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let (points, reference, largest, scales) = match (a.fixture, &a.curve) {
        (Some(DimensionFixture::Koch), _) => {
            let k = a.level.unwrap_or(5);
            let curve = build_koch_snowflake(k)?;
            let h = a.spacing.unwrap_or(3f64.powi(-(k as i32)) / 4.0);
            (sample_polyline(&curve, h), Some(4f64.ln() / 3f64.ln()), 0.5, 8)
        }
        (Some(DimensionFixture::Cantor), _) => {
            let depth = a.level.unwrap_or(10);
            let depth = u32::try_from(depth).map_err(|_| usage("depth too large"))?;
            let h = a.spacing.unwrap_or(3f64.powi(-(depth as i32)) / 2.0);
            (sample_intervals(&cantor_remainder(depth), h), Some(2f64.ln() / 3f64.ln()), 0.25, 12)
        }
        (None, Some(path)) => {
            inputs.push(path.clone());
            let curve: ClosedCurve = load(path)?;
            curve.validate()?;
            let shortest = curve.edges().map(|(p, q)| p.dist(q)).fold(f64::INFINITY, f64::min);
            let xs = curve.vertices.iter().map(|p| p.x);
            let ys = curve.vertices.iter().map(|p| p.y);
            let span = |it: &mut dyn Iterator<Item = f64>| {
                let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                hi - lo
            };
            let size = span(&mut xs.into_iter()).max(span(&mut ys.into_iter()));
            (sample_polyline(&curve, a.spacing.unwrap_or(shortest / 4.0)), None, size / 2.0, 8)
        }
        (None, None) => return Err(usage("give --fixture or --curve")),
    };
    let ladder = scale_ladder(a.largest.unwrap_or(largest), a.scales.unwrap_or(scales));
    let report = box_counting_dimension(&points, &ladder)?;
    let error = reference.map(|r| report.slope - r);
    let verdict = match error {
        Some(e) if e.abs() > a.tolerance => Verdict::Violation,
        _ => Verdict::Pass,
    };
    let mut t = Table::new(&["scale", "count"]);
    for (s, c) in report.scales.iter().zip(&report.counts) {
        t.push(vec![cell(*s), c.to_string()]);
    }
    let result = json!({
        "dimension": report.slope,
        "reference": reference,
        "error": error,
        "report": to_value(&report)?,
    });
    Ok(Outcome { verdict, result, table: t, inputs })
}

// ---------------------------------------------------------------- map

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum BuiltinMap {
    Identity,
    Square,
    PlanarExp,
    Cusp,
    Exp,
    Log,
    Cantor,
    IntervalLinear,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("map_source").required(true)))]
pub(crate) struct MapSource {
    /// Map JSON file (or inline JSON).
    #[arg(long, group = "map_source")]
    map: Option<String>,
    #[arg(long, value_enum, group = "map_source")]
    builtin: Option<BuiltinMap>,
    /// Cusp exponent polynomial, coefficients from the constant term up.
    #[arg(long, default_value = "0,1")]
    p: String,
    /// Cantor generations.
    #[arg(long, default_value_t = 6)]
    depth: u32,
    /// Source interval lengths.
    #[arg(long, default_value = "constant:1")]
    a: String,
    /// Target interval lengths.
    #[arg(long, default_value = "inverse-power:2")]
    b: String,
    #[arg(long, default_value_t = 200)]
    n_max: usize,
}

impl MapSource {
    fn build(&self, inputs: &mut Vec<String>) -> Result<AnyMap, CliError> {
        if let Some(path) = &self.map {
            if !path.trim_start().starts_with('{') {
                inputs.push(path.clone());
            }
            return load(path);
        }
        Ok(match self.builtin.unwrap_or(BuiltinMap::Identity) {
            BuiltinMap::Identity => make_identity().into(),
            BuiltinMap::Square => PlaneMap::Square.into(),
            BuiltinMap::PlanarExp => PlaneMap::PlanarExp.into(),
            BuiltinMap::Cusp => make_cusp_map(Polynomial::new(parse_floats(&self.p)?))?.into(),
            BuiltinMap::Exp => make_exp_log().into(),
            BuiltinMap::Log => make_exp_log().inverse().into(),
            BuiltinMap::Cantor => make_cantor_map(self.depth)?.into(),
            BuiltinMap::IntervalLinear => {
                make_interval_linear_map(parse_rule(&self.a)?, parse_rule(&self.b)?, self.n_max)?.into()
            }
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub(crate) struct MapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: MapSource,
    /// Evaluation point `x` or `x,y`; repeatable.
    #[arg(long = "at", allow_hyphen_values = true)]
    at: Vec<String>,
    /// JSON file with a list of points.
    #[arg(long)]
    points: Option<String>,
    /// Also report the partial derivative with this multi-index, e.g. `2,0`.
    #[arg(long)]
    derivative: Option<String>,
    /// Evaluate the inverse map instead.
    #[arg(long)]
    inverse: bool,
    /// Report |inverse(map(p)) - p|; errors above this bound are violations.
    #[arg(long)]
    round_trip: Option<f64>,
}

fn map_command(a: &MapArgs) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let mut map = a.source.build(&mut inputs)?;
    if a.inverse {
        map = map.inverse()?;
    }
    let mut pts: Vec<Vec<f64>> = a.at.iter().map(|s| parse_floats(s)).collect::<Result<_, _>>()?;
    if let Some(path) = &a.points {
        inputs.push(path.clone());
        pts.extend(load::<Vec<Vec<f64>>>(path)?);
    }
    if pts.is_empty() {
        return Err(usage("give at least one point with --at or --points"));
    }
    if let Some(p) = pts.iter().find(|p| p.len() != map.dim()) {
        return Err(usage(format!("point {p:?} does not have dimension {}", map.dim())));
    }
    let k = a.derivative.as_deref().map(parse_indices).transpose()?;
    let inverse = if a.round_trip.is_some() { Some(map.inverse()?) } else { None };
    let mut rows = Vec::new();
    let mut table = Table::new(&["point", "image", "derivative", "round_trip_error", "error"]);
    let mut failed = false;
    let mut violated = false;
    let join = |v: &[f64]| v.iter().map(|x| cell(*x)).collect::<Vec<_>>().join(" ");
    for p in &pts {
        let mut row = json!({ "point": p });
        let mut cells = vec![join(p), String::new(), String::new(), String::new(), String::new()];
        match map.apply(p) {
            Ok(img) => {
                cells[1] = join(&img);
                row["image"] = to_value(&img)?;
                if let Some(k) = &k {
                    let d = map_derivative(&map, k, p, None)?;
                    cells[2] = join(&d.value);
                    row["derivative"] = to_value(&d)?;
                }
                if let (Some(inv), Some(tol)) = (&inverse, a.round_trip) {
                    let back = inv.apply(&img)?;
                    let err = back.iter().zip(p).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                    violated |= !(err <= tol);
                    cells[3] = cell(err);
                    row["round_trip_error"] = json!(err);
                }
            }
            Err(e) => {
                failed = true;
                cells[4] = e.to_string();
                row["error"] = json!(e.to_string());
            }
        }
        table.push(cells);
        rows.push(row);
    }
    let verdict = if violated {
        Verdict::Violation
    } else if failed {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(Outcome { verdict, result: json!({ "map": to_value(&map)?, "evaluations": rows }), table, inputs })
}

// ---------------------------------------------------------------- pullback-check

#[derive(Debug, Clone, Args, Serialize)]
pub(crate) struct PullbackArgs {
    #[command(flatten)]
    #[serde(flatten)]
    source: MapSource,
    /// Source domain JSON (file or inline).
    #[arg(long)]
    u: String,
    /// Target domain JSON (file or inline).
    #[arg(long)]
    v: String,
    /// Highest derivative order for the blow-up check (plane maps; 0 skips it).
    #[arg(long, default_value_t = 3)]
    max_order: usize,
    #[command(flatten)]
    #[serde(flatten)]
    plan: PlanArgs,
}

fn load_domain(arg: &str, inputs: &mut Vec<String>) -> Result<DistanceOracle, CliError> {
    if !arg.trim_start().starts_with('{') {
        inputs.push(arg.to_string());
    }
    let d: DomainSpec = load(arg)?;
    d.validate()?;
    Ok(DistanceOracle::exact(d)?)
}

fn pullback_check(a: &PullbackArgs, seed: u64) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let map = a.source.build(&mut inputs)?;
    let u = load_domain(&a.u, &mut inputs)?;
    let v = load_domain(&a.v, &mut inputs)?;
    let plan = a.plan.plan(seed);
    let holder = check_holder_distortion(&map, &u, &v, &plan)?;
    let mut blowups = Vec::new();
    if let AnyMap::Plane(m) = &map {
        if a.max_order > 3 {
            return Err(usage("--max-order is at most 3"));
        }
        for n in 1..=a.max_order {
            blowups.push(check_derivative_blowup(m, &u, n, &plan)?);
        }
    }
    let mut table = Table::new(&["quantity", "level", "node_count", "sup", "ln_sup"]);
    for (j, c) in holder.ln_c_trend.iter().enumerate() {
        table.push(vec!["holder_constant".into(), j.to_string(), String::new(), cell(c.exp()), cell(*c)]);
    }
    for b in &blowups {
        trend_rows(&mut table, &[format!("blowup_{}", b.n)], &b.trend);
    }
    let verdict = if holder.violation || blowups.iter().any(|b| b.verdict == TrendVerdict::Geometric) {
        Verdict::Violation
    } else if blowups.iter().any(|b| !b.pass) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let result = json!({ "holder": to_value(&holder)?, "blowup": to_value(&blowups)? });
    Ok(Outcome { verdict, result, table, inputs })
}

// ---------------------------------------------------------------- transfer

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum SuiteName {
    Cusp,
    Cantor,
    IntervalLinear,
    ExpLog,
    Mobius,
}

/// A user-supplied transfer problem.
#[derive(Debug, Clone, Deserialize)]
struct TransferSpec {
    u: DomainSpec,
    v: DomainSpec,
    map: AnyMap,
    suite: Vec<FunctionSpec>,
    #[serde(default)]
    mirror: Vec<FunctionSpec>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("problem").required(true)))]
pub(crate) struct TransferArgs {
    #[arg(long, value_enum, group = "problem")]
    suite: Option<SuiteName>,
    /// JSON with u, v, map, suite and mirror function lists.
    #[arg(long, group = "problem")]
    spec: Option<String>,
    /// Cusp exponent polynomial, coefficients from the constant term up.
    #[arg(long, default_value = "0,1")]
    p: String,
    /// Cantor generations.
    #[arg(long, default_value_t = 6)]
    depth: u32,
    #[arg(long, default_value = "constant:1")]
    a: String,
    #[arg(long, default_value = "inverse-power:2")]
    b: String,
    #[arg(long, default_value_t = 200)]
    n_max: usize,
    /// Pole of the Mobius map `1/(z - center)`.
    #[arg(long, default_value = "0.5,-0.25", allow_hyphen_values = true)]
    center: String,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    #[arg(long, default_value_t = 3)]
    l_max: usize,
    #[arg(long, default_value_t = 3)]
    m_max: u32,
    #[command(flatten)]
    #[serde(flatten)]
    plan: PlanArgs,
}

fn transfer_suite(a: &TransferArgs, inputs: &mut Vec<String>) -> Result<TransferSuite, CliError> {
    if let Some(path) = &a.spec {
        if !path.trim_start().starts_with('{') {
            inputs.push(path.clone());
        }
        let spec: TransferSpec = load(path)?;
        let u = DistanceOracle::exact(spec.u.clone())?;
        let v = DistanceOracle::exact(spec.v.clone())?;
        let on = |specs: &[FunctionSpec], d: &DomainSpec| -> Result<Vec<TestFunction>, CliError> {
            specs
                .iter()
                .map(|s| {
                    let f = TestFunction::from_spec(s.clone())?;
                    Ok(if f.domain() == d { f } else { f.restrict(d.clone())? })
                })
                .collect()
        };
        let suite = on(&spec.suite, &spec.v)?;
        let mirror = on(&spec.mirror, &spec.u)?;
        return Ok(TransferSuite { name: "custom".into(), u, v, map: spec.map, suite, mirror });
    }
    Ok(match a.suite.expect("clap enforces a problem source") {
        SuiteName::Cusp => suites::cusp(Polynomial::new(parse_floats(&a.p)?))?,
        SuiteName::Cantor => suites::cantor(a.depth)?,
        SuiteName::IntervalLinear => suites::interval_linear(parse_rule(&a.a)?, parse_rule(&a.b)?, a.n_max)?,
        SuiteName::ExpLog => suites::exp_log()?,
        SuiteName::Mobius => {
            let c = parse_floats(&a.center)?;
            if c.len() != 2 {
                return Err(usage("--center takes x,y"));
            }
            suites::mobius(Point2::new(c[0], c[1]))?
        }
    })
}

pub(crate) fn transfer_table(ev: &TransferEvidence) -> Table {
    let mut t =
        Table::new(&["direction", "function", "quantity", "k", "l", "m", "level", "node_count", "sup", "ln_sup"]);
    let ix = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for (dir, list) in [("forward", &ev.forward), ("inverse", &ev.inverse)] {
        for f in list {
            for s in &f.seminorms {
                let prefix =
                    [dir.into(), f.function.clone(), "seminorm".into(), ix(&s.k), ix(&s.l), String::new()];
                trend_rows(&mut t, &prefix, &s.trend);
            }
            for d in &f.decay {
                let prefix =
                    [dir.into(), f.function.clone(), "decay".into(), String::new(), String::new(), d.m.to_string()];
                trend_rows(&mut t, &prefix, &d.trend);
            }
        }
    }
    t
}

fn transfer(a: &TransferArgs, seed: u64) -> Result<Outcome, CliError> {
    let mut inputs = Vec::new();
    let s = transfer_suite(a, &mut inputs)?;
    let orders = TransferOrders { k_max: a.k_max, l_max: a.l_max, m_max: a.m_max };
    let ev = positive_transfer(&s.u, &s.v, &s.map, &s.suite, &s.mirror, &orders, &a.plan.plan(seed))?;
    let verdict = match ev.verdict {
        TransferVerdict::Supported => Verdict::Supported,
        TransferVerdict::Refuted => Verdict::Refuted,
        TransferVerdict::Inconclusive => Verdict::Inconclusive,
    };
    Ok(Outcome { verdict, table: transfer_table(&ev), result: to_value(&ev)?, inputs })
}

// ---------------------------------------------------------------- counterexample

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum CounterexampleCommand {
    /// Disc chain joined by super-exponentially thin strips.
    Nazarov {
        /// Assumed bound on the pulled-back seminorm.
        #[arg(long = "C", default_value_t = 1000.0)]
        #[serde(rename = "C")]
        c: f64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Unit intervals against intervals of length a(n).
    Intervals {
        #[arg(long, default_value = "exponential:1")]
        a: String,
        /// identity, pair-swap, or a comma-separated list m(1),m(2),...
        #[arg(long, default_value = "identity")]
        bijection: String,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        #[arg(long, default_value_t = 1e6)]
        threshold: f64,
    },
}

impl CounterexampleCommand {
    pub(crate) fn name(&self) -> &'static str {
        match self {
            CounterexampleCommand::Nazarov { .. } => "nazarov",
            CounterexampleCommand::Intervals { .. } => "intervals",
        }
    }
}

fn counterexample(c: &CounterexampleCommand) -> Result<Outcome, CliError> {
    match c {
        CounterexampleCommand::Nazarov { c, n_min, n_max } => {
            let cert = nazarov_obstruction(*c, *n_min, *n_max)?;
            let mut t = Table::new(&["n", "margin_sign", "ln_abs_margin", "ln_lower_exponent", "ln_strip_exponent"]);
            for e in &cert.nazarov_margins {
                t.push(vec![
                    e.n.to_string(),
                    e.margin.sign.to_string(),
                    cell(e.margin.ln_abs),
                    cell(e.ln_lower_exponent.0),
                    cell(e.ln_strip_exponent.0),
                ]);
            }
            let verdict =
                if cert.minimal_index.is_some() && cert.monotone { Verdict::Pass } else { Verdict::Inconclusive };
            Ok(Outcome { verdict, result: to_value(&cert)?, table: t, inputs: Vec::new() })
        }
        CounterexampleCommand::Intervals { a, bijection, n_max, threshold } => {
            let cert = interval_obstruction(parse_rule(a)?, parse_bijection(bijection)?, *n_max, *threshold)?;
            let mut t = Table::new(&["n", "m", "ln_ratio"]);
            for e in &cert.interval_ratios {
                t.push(vec![e.n.to_string(), e.m.to_string(), cell(e.ln_ratio.0)]);
            }
            let diverges = matches!(cert.growth, Some(GrowthClass::Superpolynomial)) && cert.threshold_index.is_some();
            let verdict = if diverges { Verdict::Pass } else { Verdict::Inconclusive };
            Ok(Outcome { verdict, result: to_value(&cert)?, table: t, inputs: Vec::new() })
        }
    }
}

// ---------------------------------------------------------------- fixtures

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum FixtureCommand {
    /// Middle-third gaps by decreasing length, then left to right.
    Cantor {
        #[arg(long, default_value_t = 3)]
        depth: u32,
    },
    /// Koch snowflake over the unit triangle.
    Koch {
        #[arg(long, default_value_t = 3)]
        iterations: usize,
    },
    /// Regular polygon about the origin.
    Polygon {
        #[arg(long, default_value_t = 512)]
        sides: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Discs B(n, 1/n^2) joined by strips of height exp(-exp(n^2)).
    Nazarov {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Intervals (n, n + a(n)).
    Intervals {
        #[arg(long, default_value = "inverse-power:2")]
        rule: String,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
    },
}

impl FixtureCommand {
    pub(crate) fn name(&self) -> &'static str {
        match self {
            FixtureCommand::Cantor { .. } => "cantor",
            FixtureCommand::Koch { .. } => "koch",
            FixtureCommand::Polygon { .. } => "polygon",
            FixtureCommand::Nazarov { .. } => "nazarov",
            FixtureCommand::Intervals { .. } => "intervals",
        }
    }
}

fn fixtures(f: &FixtureCommand) -> Result<Outcome, CliError> {
    let (result, table) = match f {
        FixtureCommand::Cantor { depth } => {
            let gaps = cantor_gaps_exact(*depth)?;
            let mut t = Table::new(&["index", "generation", "numerator", "denominator", "left", "right"]);
            let rows: Vec<Value> = gaps
                .iter()
                .map(|g| {
                    t.push(vec![
                        g.index().to_string(),
                        g.generation.to_string(),
                        g.numerator.to_string(),
                        g.denominator().to_string(),
                        cell(g.left()),
                        cell(g.right()),
                    ]);
                    json!({
                        "index": g.index(),
                        "generation": g.generation,
                        "numerator": g.numerator,
                        "denominator": g.denominator(),
                        "left": g.left(),
                        "right": g.right(),
                    })
                })
                .collect();
            (json!({ "depth": depth, "count": gaps.len(), "intervals": rows }), t)
        }
        FixtureCommand::Koch { iterations } => {
            let c = build_koch_snowflake(*iterations)?;
            (json!({ "edge_count": c.edge_count(), "curve": to_value(&c)? }), curve_table(&c))
        }
        FixtureCommand::Polygon { sides, radius } => {
            let c = regular_polygon(*sides, *radius)?;
            (json!({ "edge_count": c.edge_count(), "curve": to_value(&c)? }), curve_table(&c))
        }
        FixtureCommand::Nazarov { n_max } => {
            let g = NazarovGeometry::new(*n_max)?;
            let mut t = Table::new(&["n", "center_x", "radius", "ln_ln_height"]);
            let discs: Vec<Value> = (1..=*n_max)
                .map(|n| {
                    t.push(vec![n.to_string(), cell(g.center(n).x), cell(g.radius(n)), cell(g.ln_ln_height(n))]);
                    json!({
                        "n": n,
                        "center": g.center(n),
                        "radius": g.radius(n),
                        "ln_ln_height": LogScalar(g.ln_ln_height(n)),
                    })
                })
                .collect();
            (json!({ "domain": to_value(&DomainSpec::NazarovDomain { n_max: *n_max })?, "discs": discs }), t)
        }
        FixtureCommand::Intervals { rule, n_max } => {
            let u = IntervalUnion::from_rule(parse_rule(rule)?, *n_max)?;
            let mut t = Table::new(&["index", "left", "right"]);
            for (i, (l, r)) in u.intervals().iter().enumerate() {
                t.push(vec![(i + 1).to_string(), cell(*l), cell(*r)]);
            }
            (json!({ "domain": to_value(&DomainSpec::IntervalDomain { intervals: u })? }), t)
        }
    };
    Ok(Outcome { verdict: Verdict::Pass, result, table, inputs: Vec::new() })
}

pub(crate) fn execute(command: &Command, seed: u64) -> Result<Outcome, CliError> {
    match command {
        Command::Quasicircle(a) => quasicircle(a),
        Command::Dimension(a) => dimension(a),
        Command::Map(a) => map_command(a),
        Command::PullbackCheck(a) => pullback_check(a, seed),
        Command::Transfer(a) => transfer(a, seed),
        Command::Counterexample(c) => counterexample(c),
        Command::Fixtures(f) => fixtures(f),
    }
}
