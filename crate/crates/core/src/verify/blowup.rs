use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::geometry::{DistanceOracle, Point2};
use crate::maps::{map_derivative, AnyMap, PlaneMap};
use crate::schwartz::{sweep, SamplePlan, SchwartzError, TrendLevel, TrendVerdict};

/// Sampled `sup |phi^{(n)}(z)| d(z)^n` with its refinement trend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub n: usize,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub sup_value: f64,
    pub argmax: Vec<f64>,
    pub seed: u64,
    pub trend: Vec<TrendLevel>,
    pub verdict: TrendVerdict,
    pub pass: bool,
}

/// Checks that `|phi^{(n)}| d^n` stays bounded on `U` for a conformal `phi`.
pub fn check_derivative_blowup(
    map: &PlaneMap,
    u: &DistanceOracle,
    n: usize,
    plan: &SamplePlan,
) -> Result<BlowupReport, VerifyError> {
    if !(1..=3).contains(&n) {
        return Err(VerifyError::Parameter(format!("derivative order {n} outside 1..=3")));
    }
    if u.domain().is_line() {
        return Err(VerifyError::Parameter("derivative blow-up needs a planar domain".into()));
    }
    let any = AnyMap::Plane(map.clone());
    let quantity = |p: &[f64]| -> Result<Vec<f64>, SchwartzError> {
        let d = u.signed_distance(Point2::new(p[0], p[1]));
        let z = Complex64::new(p[0], p[1]);
        let deriv = match map.complex_derivative(z, n)? {
            Some(w) => w.norm(),
            None => {
                // holomorphic: d^n/dz^n = d^n/dx^n
                let v = map_derivative(&any, &[n, 0], p, Some(d))?.value;
                v[0].hypot(v[1])
            }
        };
        Ok(vec![deriv.ln() + n as f64 * d.ln()])
    };
    let res = sweep(u, plan, 1, quantity)?;
    let trend = res.trends.into_iter().next().expect("one component");
    let verdict = TrendVerdict::classify(&trend.iter().map(|t| t.ln_sup.0).collect::<Vec<_>>());
    let last = trend.last().expect("at least one level");
    Ok(BlowupReport {
        n,
        sup_value: last.sup,
        argmax: last.argmax.clone(),
        seed: plan.seed,
        verdict,
        pass: verdict == TrendVerdict::Stable,
        trend,
    })
}
