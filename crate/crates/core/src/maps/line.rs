use serde::{Deserialize, Serialize};

use super::MapError;
use crate::geometry::{CantorGap, DomainSpec, IntervalUnion, LengthRule};
use crate::numeric::factorial;

/// Explicit maps between open subsets of the real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum LineMap {
    /// `(n, n + a(n)) -> (n, n + b(n))` linearly, `n = 1..=n_max`.
    IntervalLinear { a: LengthRule, b: LengthRule, n_max: usize, #[serde(default)] inverted: bool },
    /// `(n, n + 1) -> I_n`, the `n`-th middle-third gap, `n < 2^depth`.
    Cantor { depth: u32, #[serde(default)] inverted: bool },
    /// `exp: R -> (0, inf)`; inverted it is `log`.
    ExpLog { #[serde(default)] inverted: bool },
    /// Applied in list order.
    Composition { maps: Vec<LineMap> },
}

pub fn make_interval_linear_map(a: LengthRule, b: LengthRule, n_max: usize) -> Result<LineMap, MapError> {
    if n_max == 0 {
        return Err(MapError::Construction("n_max must be at least 1".into()));
    }
    for (name, rule) in [("a", &a), ("b", &b)] {
        rule.validate(n_max).map_err(|e| MapError::Construction(format!("{name}: {e}")))?;
    }
    Ok(LineMap::IntervalLinear { a, b, n_max, inverted: false })
}

pub fn make_cantor_map(depth: u32) -> Result<LineMap, MapError> {
    if !(1..=crate::geometry::CANTOR_MAX_DEPTH).contains(&depth) {
        return Err(MapError::Construction(format!("Cantor depth {depth} outside 1..=30")));
    }
    Ok(LineMap::Cantor { depth, inverted: false })
}

pub fn make_exp_log() -> LineMap {
    LineMap::ExpLog { inverted: false }
}

/// Position of `x` in `N_rule`: `(n, x - n)` with `0 < x - n < len(n)`.
fn locate_unit(x: f64, n_max: usize, len: impl Fn(usize) -> f64) -> Result<(usize, f64), MapError> {
    let n = x.floor();
    if !(n >= 1.0 && n <= n_max as f64) {
        return Err(MapError::Domain(format!("{x} is outside the interval union")));
    }
    let n = n as usize;
    let t = x - n as f64;
    if !(t > 0.0 && t < len(n)) {
        return Err(MapError::Domain(format!("{x} is outside the interval union")));
    }
    Ok((n, t))
}

impl LineMap {
    pub fn inverse(&self) -> LineMap {
        match self {
            LineMap::IntervalLinear { a, b, n_max, inverted } => {
                LineMap::IntervalLinear { a: a.clone(), b: b.clone(), n_max: *n_max, inverted: !inverted }
            }
            LineMap::Cantor { depth, inverted } => LineMap::Cantor { depth: *depth, inverted: !inverted },
            LineMap::ExpLog { inverted } => LineMap::ExpLog { inverted: !inverted },
            LineMap::Composition { maps } => LineMap::Composition { maps: maps.iter().rev().map(|m| m.inverse()).collect() },
        }
    }

    fn forward(&self, x: f64) -> Result<f64, MapError> {
        match self {
            LineMap::IntervalLinear { a, b, n_max, .. } => {
                let (n, t) = locate_unit(x, *n_max, |n| a.length(n))?;
                Ok(n as f64 + t * b.length(n) / a.length(n))
            }
            LineMap::Cantor { depth, .. } => {
                let count = (1u64 << depth) - 1;
                let (n, t) = locate_unit(x, count as usize, |_| 1.0)?;
                let gap = CantorGap::from_index(n as u64);
                Ok(gap.left() + t * gap.length())
            }
            LineMap::ExpLog { .. } => Ok(x.exp()),
            LineMap::Composition { .. } => unreachable!(),
        }
    }

    fn backward(&self, y: f64) -> Result<f64, MapError> {
        match self {
            LineMap::IntervalLinear { a, b, n_max, .. } => {
                let (n, t) = locate_unit(y, *n_max, |n| b.length(n))?;
                Ok(n as f64 + t * a.length(n) / b.length(n))
            }
            LineMap::Cantor { depth, .. } => {
                let gap = CantorGap::containing(y, *depth)
                    .ok_or_else(|| MapError::Domain(format!("{y} is in no gap of depth {depth}")))?;
                Ok(gap.index() as f64 + (y - gap.left()) * gap.denominator() as f64)
            }
            LineMap::ExpLog { .. } => {
                if y > 0.0 {
                    Ok(y.ln())
                } else {
                    Err(MapError::Domain(format!("log of {y}")))
                }
            }
            LineMap::Composition { .. } => unreachable!(),
        }
    }

    fn is_inverted(&self) -> bool {
        match self {
            LineMap::IntervalLinear { inverted, .. } | LineMap::Cantor { inverted, .. } | LineMap::ExpLog { inverted } => {
                *inverted
            }
            LineMap::Composition { .. } => false,
        }
    }

    pub fn apply(&self, x: f64) -> Result<f64, MapError> {
        if let LineMap::Composition { maps } = self {
            return maps.iter().try_fold(x, |acc, m| m.apply(acc));
        }
        if self.is_inverted() {
            self.backward(x)
        } else {
            self.forward(x)
        }
    }

    pub fn apply_inverse(&self, y: f64) -> Result<f64, MapError> {
        self.inverse().apply(y)
    }

    /// Closed-form derivatives `phi^{(k)}(x)` for `k = 0..=order`; `None` for compositions.
    pub fn derivatives(&self, x: f64, order: usize) -> Result<Option<Vec<f64>>, MapError> {
        let value = self.apply(x)?;
        let mut out = vec![0.0; order + 1];
        out[0] = value;
        match self {
            LineMap::IntervalLinear { .. } | LineMap::Cantor { .. } => {
                if order >= 1 {
                    out[1] = self.slope(x)?;
                }
            }
            LineMap::ExpLog { inverted: false } => out.iter_mut().for_each(|v| *v = value),
            LineMap::ExpLog { inverted: true } => {
                for (k, v) in out.iter_mut().enumerate().skip(1) {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *v = sign * factorial(k - 1) / x.powi(k as i32);
                }
            }
            LineMap::Composition { .. } => return Ok(None),
        }
        Ok(Some(out))
    }

    /// Locally constant slope of the piecewise-linear families.
    pub fn slope(&self, x: f64) -> Result<f64, MapError> {
        match self {
            LineMap::IntervalLinear { a, b, n_max, inverted } => {
                let (num, den) = if *inverted { (a, b) } else { (b, a) };
                let (n, _) = locate_unit(x, *n_max, |n| den.length(n))?;
                Ok(num.length(n) / den.length(n))
            }
            LineMap::Cantor { depth, inverted } => {
                if *inverted {
                    let gap = CantorGap::containing(x, *depth).ok_or_else(|| MapError::Domain(format!("{x} is in no gap")))?;
                    Ok(gap.denominator() as f64)
                } else {
                    let (n, _) = locate_unit(x, ((1u64 << depth) - 1) as usize, |_| 1.0)?;
                    Ok(CantorGap::from_index(n as u64).length())
                }
            }
            _ => Err(MapError::Numerical("slope is only defined for piecewise-linear maps".into())),
        }
    }

    /// Open set the map is defined on.
    pub fn domain(&self) -> Result<DomainSpec, MapError> {
        let inv = self.is_inverted();
        let union = |v: Vec<(f64, f64)>| -> Result<DomainSpec, MapError> {
            Ok(DomainSpec::IntervalDomain { intervals: IntervalUnion::new(v).map_err(|e| MapError::Construction(e.to_string()))? })
        };
        match self {
            LineMap::IntervalLinear { a, b, n_max, .. } => {
                let rule = if inv { b } else { a };
                Ok(DomainSpec::IntervalDomain {
                    intervals: IntervalUnion::from_rule(rule.clone(), *n_max).map_err(|e| MapError::Construction(e.to_string()))?,
                })
            }
            LineMap::Cantor { depth, .. } => {
                if inv {
                    Ok(DomainSpec::IntervalDomain {
                        intervals: crate::geometry::build_cantor_gaps(*depth).map_err(|e| MapError::Construction(e.to_string()))?,
                    })
                } else {
                    let count = (1u64 << depth) - 1;
                    union((1..=count).map(|n| (n as f64, n as f64 + 1.0)).collect())
                }
            }
            LineMap::ExpLog { .. } => {
                if inv {
                    union(vec![(0.0, f64::INFINITY)])
                } else {
                    union(vec![(f64::NEG_INFINITY, f64::INFINITY)])
                }
            }
            LineMap::Composition { maps } => maps
                .first()
                .ok_or_else(|| MapError::Construction("empty composition".into()))?
                .domain(),
        }
    }

    pub fn codomain(&self) -> Result<DomainSpec, MapError> {
        self.inverse().domain()
    }
}

/// For `x` in `(n, n + 1)` and `y = phi(x)` in the gap of generation `m`:
/// `(d(x, boundary of N), d(y, boundary of the gaps), m)`. The two distances
/// differ by exactly the factor `3^m`.
pub fn cantor_distance_pair(x: f64, depth: u32) -> Result<(f64, f64, u32), MapError> {
    let map = make_cantor_map(depth)?;
    let y = map.apply(x)?;
    let t = x - x.floor();
    let gap = CantorGap::containing(y, depth).ok_or_else(|| MapError::Numerical(format!("image {y} left its gap")))?;
    Ok((t.min(1.0 - t), (y - gap.left()).min(gap.right() - y), gap.generation))
}
