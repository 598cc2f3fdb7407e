use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::geometry::{DistanceOracle, Point2};
use crate::maps::{AnyMap, PlaneMap};
use crate::numeric::ols;
use crate::schwartz::{level_points, SamplePlan, TrendVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Fitted envelope `target <= C source^alpha` on log-log samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub alpha: f64,
    /// Smallest constant with every sample under `C source^alpha`, at the last level.
    #[serde(rename = "C", with = "crate::serde_ext::ext_f64")]
    pub c: f64,
    /// `ln C` per refinement level.
    pub ln_c_trend: Vec<f64>,
    /// Largest log-excess of a sample over the least-squares line.
    pub residual: f64,
    pub r_squared: f64,
    pub samples: usize,
    pub direction: Direction,
    /// Set when `alpha <= 0` or the envelope constant keeps growing with refinement.
    pub violation: bool,
}

/// Builds the fit from `(ln source, ln target)` samples grouped by level.
fn fit_levels(levels: &[Vec<(f64, f64)>], direction: Direction) -> Result<HolderFit, VerifyError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = levels.iter().flatten().copied().unzip();
    let fit = ols(&xs, &ys)
        .ok_or_else(|| VerifyError::DegenerateFit("all samples share one source distance".into()))?;
    let alpha = fit.slope;
    let ln_c_trend: Vec<f64> = levels
        .iter()
        .map(|lv| lv.iter().map(|(x, y)| y - alpha * x).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let residual =
        xs.iter().zip(&ys).map(|(x, y)| y - fit.intercept - alpha * x).fold(f64::NEG_INFINITY, f64::max);
    let stable = TrendVerdict::classify(&ln_c_trend) == TrendVerdict::Stable;
    Ok(HolderFit {
        alpha,
        c: ln_c_trend.last().copied().unwrap_or(f64::NAN).exp(),
        ln_c_trend,
        residual,
        r_squared: fit.r_squared,
        samples: xs.len(),
        direction,
        violation: !(alpha > 0.0) || !stable,
    })
}

fn to_point(p: &[f64]) -> Point2 {
    if p.len() == 1 {
        Point2::on_line(p[0])
    } else {
        Point2::new(p[0], p[1])
    }
}

/// Log-log fit of `d(phi(x), boundary of V)` against `d(x, boundary of U)` for `x`
/// within a tenth of the domain scale of the boundary.
pub fn check_holder_distortion(
    map: &AnyMap,
    u: &DistanceOracle,
    v: &DistanceOracle,
    plan: &SamplePlan,
) -> Result<HolderFit, VerifyError> {
    let scale = match u.domain().bounding_box() {
        Some(r) => r.width().hypot(r.height()),
        None => plan.window,
    };
    let cut = 0.1 * scale;
    let mut levels = Vec::with_capacity(plan.levels);
    for j in 0..plan.levels {
        let mut samples = Vec::new();
        for p in level_points(u.domain(), plan, j) {
            let d = u.signed_distance(to_point(&p));
            if !(d > 0.0 && d <= cut) {
                continue;
            }
            let q = map.apply(&p)?;
            let dv = v.signed_distance(to_point(&q));
            if !(dv > 0.0) {
                return Err(VerifyError::Validation(format!("image of {p:?} is not inside the target domain")));
            }
            samples.push((d.ln(), dv.ln()));
        }
        levels.push(samples);
    }
    fit_levels(&levels, Direction::Forward)
}

/// Sampled pairs for a bi-Holder fit of a plane map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoriPlan {
    /// Pin one end of every pair here.
    pub anchor: Option<Point2>,
    pub pairs: usize,
    /// Half-width of the level-0 window.
    pub window: f64,
    pub window_growth: f64,
    pub levels: usize,
    /// Smallest pair separation, relative to the level-0 window.
    pub min_separation: f64,
    pub seed: u64,
}

impl Default for MoriPlan {
    fn default() -> Self {
        MoriPlan { anchor: None, pairs: 2000, window: 1.0, window_growth: 2.0, levels: 3, min_separation: 1e-4, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoriReport {
    pub forward: HolderFit,
    pub inverse: HolderFit,
}

/// Fits `|phi(x) - phi(y)| <= C |x - y|^alpha` and the reverse inequality over sampled pairs.
pub fn mori_exponent(map: &PlaneMap, plan: &MoriPlan) -> Result<MoriReport, VerifyError> {
    if plan.levels == 0 || plan.pairs < 2 || !(plan.window > 0.0) || !(plan.min_separation > 0.0) {
        return Err(VerifyError::Parameter("pair plan needs levels, pairs >= 2 and positive scales".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut fwd = Vec::new();
    let mut inv = Vec::new();
    for j in 0..plan.levels {
        let w = plan.window * plan.window_growth.powi(j as i32);
        let (lo, hi) = ((plan.min_separation * plan.window).ln(), w.ln());
        let mut f_level = Vec::new();
        let mut i_level = Vec::new();
        for _ in 0..plan.pairs {
            let x = match plan.anchor {
                Some(a) => a,
                None => Point2::new(rng.gen_range(-w..w), rng.gen_range(-w..w)),
            };
            let r = rng.gen_range(lo..hi).exp();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let y = Point2::new(x.x + r * t.cos(), x.y + r * t.sin());
            let (Ok(fx), Ok(fy)) = (map.apply(x), map.apply(y)) else { continue };
            let (dx, dy) = (x.dist(y), fx.dist(fy));
            if dx > 0.0 && dy > 0.0 && dy.is_finite() {
                f_level.push((dx.ln(), dy.ln()));
                i_level.push((dy.ln(), dx.ln()));
            }
        }
        fwd.push(f_level);
        inv.push(i_level);
    }
    Ok(MoriReport { forward: fit_levels(&fwd, Direction::Forward)?, inverse: fit_levels(&inv, Direction::Inverse)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::maps::{make_exp_log, make_identity};

    fn disc() -> DistanceOracle {
        DistanceOracle::exact(DomainSpec::unit_disc()).unwrap()
    }

    #[test]
    fn square_on_disc() {
        let fit = check_holder_distortion(&PlaneMap::Square.into(), &disc(), &disc(), &SamplePlan::default()).unwrap();
        assert!((fit.alpha - 1.0).abs() < 0.02, "{}", fit.alpha);
        assert!(fit.c <= 2.0 + 1e-12);
        assert!(!fit.violation);
    }

    #[test]
    fn identity_on_disc() {
        let fit = check_holder_distortion(&make_identity().into(), &disc(), &disc(), &SamplePlan::default()).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-9);
        assert!((fit.c - 1.0).abs() < 1e-9);
        assert!(!fit.violation);
    }

    #[test]
    fn log_near_zero_violates() {
        let u = DistanceOracle::exact(DomainSpec::interval(0.0, 1.0).unwrap()).unwrap();
        let v = DistanceOracle::exact(DomainSpec::interval(f64::NEG_INFINITY, 0.0).unwrap()).unwrap();
        let fit = check_holder_distortion(&make_exp_log().inverse().into(), &u, &v, &SamplePlan::default()).unwrap();
        assert!(fit.violation);
        assert!(fit.ln_c_trend.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn identical_distances_are_degenerate() {
        let levels = vec![vec![(0.5, 1.0), (0.5, 2.0)]];
        assert!(matches!(fit_levels(&levels, Direction::Forward), Err(VerifyError::DegenerateFit(_))));
    }

    #[test]
    fn radial_stretch_exponents() {
        let plan = MoriPlan { anchor: Some(Point2::ORIGIN), ..MoriPlan::default() };
        let r = mori_exponent(&PlaneMap::RadialPower { exponent: 1.0 }, &plan).unwrap();
        assert!((r.forward.alpha - 2.0).abs() < 1e-9);
        assert!((r.inverse.alpha - 0.5).abs() < 1e-9);
        let r = mori_exponent(&PlaneMap::RadialPower { exponent: -0.5 }, &plan).unwrap();
        assert!((r.forward.alpha - 0.5).abs() < 1e-9);
        assert!(!r.forward.violation);
    }

    #[test]
    fn identity_and_exponential_pairs() {
        let r = mori_exponent(&make_identity(), &MoriPlan::default()).unwrap();
        assert!((r.forward.alpha - 1.0).abs() < 1e-9 && (r.inverse.alpha - 1.0).abs() < 1e-9);
        assert!(!r.forward.violation && !r.inverse.violation);
        let r = mori_exponent(&PlaneMap::PlanarExp, &MoriPlan { window: 2.0, ..MoriPlan::default() }).unwrap();
        assert!(r.forward.violation || r.inverse.violation);
    }
}
