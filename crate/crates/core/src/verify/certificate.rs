use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::geometry::{LengthRule, NAZAROV_MAX_N};
use crate::numeric::{ln_diff_exp, SignedLog};
use crate::serde_ext::LogScalar;

/// The index map induced on the unit intervals by a diffeomorphism, restricted to `1..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bijection {
    Identity,
    /// `2k - 1 <-> 2k`; an odd last index is fixed.
    PairSwap,
    /// `values[n - 1] = m(n)`.
    Explicit { values: Vec<usize> },
}

impl Bijection {
    fn image(&self, n: usize, n_max: usize) -> usize {
        match self {
            Bijection::Identity => n,
            Bijection::PairSwap => {
                if n % 2 == 0 {
                    n - 1
                } else if n < n_max {
                    n + 1
                } else {
                    n
                }
            }
            Bijection::Explicit { values } => values[n - 1],
        }
    }

    fn validate(&self, n_max: usize) -> Result<(), VerifyError> {
        if let Bijection::Explicit { values } = self {
            if values.len() < n_max {
                return Err(VerifyError::Validation(format!(
                    "bijection lists {} values for a prefix of {n_max}",
                    values.len()
                )));
            }
        }
        let mut seen = vec![false; n_max + 1];
        for n in 1..=n_max {
            let m = self.image(n, n_max);
            if m == 0 || m > n_max {
                return Err(VerifyError::Validation(format!("m({n}) = {m} leaves the prefix 1..={n_max}")));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(VerifyError::Validation(format!("m is not injective: value {m} repeats")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    /// Disc chain: `C` bounds the relevant seminorm of the pulled-back witness.
    Nazarov {
        #[serde(rename = "C")]
        c: f64,
        n_min: usize,
        n_max: usize,
    },
    /// Unions of unit intervals against `(n, n + a(n))`.
    Intervals {
        a: LengthRule,
        bijection: Bijection,
        n_max: usize,
        /// Ratio level whose first crossing is reported.
        threshold: f64,
    },
}

/// One index of the disc-chain argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NazarovEntry {
    pub n: usize,
    /// `ln(C e^{n+1})`: the lower bound on the witness is `exp(-C e^{n+1})`.
    pub ln_lower_exponent: LogScalar,
    /// `ln(e^{n^2}) = n^2`: the strip bound is `exp(-e^{n^2})`.
    pub ln_strip_exponent: LogScalar,
    /// `e^{n^2} - C e^{n+1}`, the log of the ratio of the two bounds.
    #[serde(with = "crate::serde_ext::signed_log")]
    pub margin: SignedLog,
    /// Strip point with `x = n + 1/2` on the axis of symmetry.
    pub witness: [f64; 2],
}

/// One index of the pigeonhole subsequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalEntry {
    pub n: usize,
    pub m: usize,
    /// `ln(1 / a(n))`, a lower bound for the witness ratio.
    pub ln_ratio: LogScalar,
    /// `m + 1/2`, where the witness takes the value `a(n)`.
    pub witness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    Polynomial { degree: f64 },
    Superpolynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionCertificate {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nazarov_margins: Vec<NazarovEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interval_ratios: Vec<IntervalEntry>,
    /// Smallest index with a positive margin (first subsequence index for intervals).
    pub minimal_index: Option<usize>,
    /// Margins strictly increase from `minimal_index` to the end of the range.
    pub monotone: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthClass>,
    /// First index whose ratio exceeds the scenario threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_index: Option<usize>,
    pub note: String,
}

fn margin(c: f64, n: usize) -> (f64, f64, SignedLog) {
    let strip = (n * n) as f64;
    let lower = c.ln() + n as f64 + 1.0;
    let m = match strip.partial_cmp(&lower) {
        Some(Ordering::Greater) => SignedLog { sign: 1, ln_abs: ln_diff_exp(strip, lower) },
        Some(Ordering::Less) => SignedLog { sign: -1, ln_abs: ln_diff_exp(lower, strip) },
        _ => SignedLog::ZERO,
    };
    (lower, strip, m)
}

/// Margins `e^{n^2} - C e^{n+1}` for `n` in `n_min..=n_max`, all in log space.
///
/// A positive margin at `n` means the lower bound `exp(-C e^{n+1})` on the
/// witness along the strip exceeds the height bound `exp(-e^{n^2})` by a factor
/// no fixed constant can absorb as `n` grows.
pub fn nazarov_obstruction(c: f64, n_min: usize, n_max: usize) -> Result<ObstructionCertificate, VerifyError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(VerifyError::Parameter(format!("assumed bound C = {c} must be positive and finite")));
    }
    if n_min < 2 || n_max > NAZAROV_MAX_N || n_min > n_max {
        return Err(VerifyError::Parameter(format!("index range {n_min}..={n_max} must lie in 2..={NAZAROV_MAX_N}")));
    }
    let entries: Vec<NazarovEntry> = (n_min..=n_max)
        .map(|n| {
            let (lower, strip, m) = margin(c, n);
            NazarovEntry {
                n,
                ln_lower_exponent: LogScalar(lower),
                ln_strip_exponent: LogScalar(strip),
                margin: m,
                witness: [n as f64 + 0.5, 0.0],
            }
        })
        .collect();
    let minimal_index = entries.iter().find(|e| e.margin.sign > 0).map(|e| e.n);
    let monotone = match minimal_index {
        Some(n0) => entries
            .iter()
            .filter(|e| e.n >= n0)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1].margin.partial_cmp(&w[0].margin) == Some(Ordering::Greater)),
        None => false,
    };
    let note = match minimal_index {
        Some(n) => format!("margin positive from n = {n}; the strip bound cannot hold for any fixed constant"),
        None => format!("no positive margin up to n = {n_max}; extend the range"),
    };
    Ok(ObstructionCertificate {
        scenario: Scenario::Nazarov { c, n_min, n_max },
        nazarov_margins: entries,
        interval_ratios: Vec::new(),
        minimal_index,
        monotone,
        growth: None,
        threshold_index: None,
        note,
    })
}

fn classify_growth(entries: &[IntervalEntry]) -> GrowthClass {
    let rates: Vec<(f64, f64)> =
        entries.iter().filter(|e| e.n >= 2).map(|e| (e.ln_ratio.0, e.ln_ratio.0 / (e.n as f64).ln())).collect();
    let Some(&(last_ln, last)) = rates.last() else { return GrowthClass::Bounded };
    let first_ln = entries[0].ln_ratio.0;
    if last_ln - first_ln < 1e-9 {
        return GrowthClass::Bounded;
    }
    let mid = rates[rates.len() / 2].1;
    if last > 1.25 * mid && last > mid + 0.5 {
        GrowthClass::Superpolynomial
    } else {
        GrowthClass::Polynomial { degree: last }
    }
}

/// Ratios `1 / a(n)` along every `n <= n_max` with `m(n) <= n`.
pub fn interval_obstruction(
    a: LengthRule,
    bijection: Bijection,
    n_max: usize,
    threshold: f64,
) -> Result<ObstructionCertificate, VerifyError> {
    if n_max == 0 || !(threshold > 0.0) {
        return Err(VerifyError::Parameter("need n_max >= 1 and a positive threshold".into()));
    }
    a.validate(n_max)?;
    bijection.validate(n_max)?;
    let entries: Vec<IntervalEntry> = (1..=n_max)
        .filter_map(|n| {
            let m = bijection.image(n, n_max);
            (m <= n).then(|| IntervalEntry { n, m, ln_ratio: LogScalar(-a.ln_length(n)), witness: m as f64 + 0.5 })
        })
        .collect();
    if entries.is_empty() {
        return Err(VerifyError::Validation("no index with m(n) <= n in the prefix".into()));
    }
    let monotone = entries.windows(2).all(|w| w[1].ln_ratio.0 > w[0].ln_ratio.0);
    let threshold_index = entries.iter().find(|e| e.ln_ratio.0 > threshold.ln()).map(|e| e.n);
    let growth = classify_growth(&entries);
    let note = match &growth {
        GrowthClass::Superpolynomial => "ratios diverge faster than any power of n".to_string(),
        GrowthClass::Polynomial { degree } => format!(
            "ratios grow only polynomially (degree about {degree:.3}); no superpolynomial divergence, \
             as expected when a(n) is bounded below by a power of n"
        ),
        GrowthClass::Bounded => "ratios stay bounded".to_string(),
    };
    Ok(ObstructionCertificate {
        scenario: Scenario::Intervals { a, bijection, n_max, threshold },
        nazarov_margins: Vec::new(),
        minimal_index: entries.first().map(|e| e.n),
        interval_ratios: entries,
        monotone,
        growth: Some(growth),
        threshold_index,
        note,
    })
}

/// Recomputes a certificate from its stored scenario.
pub fn replay_certificate(cert: &ObstructionCertificate) -> Result<ObstructionCertificate, VerifyError> {
    match &cert.scenario {
        Scenario::Nazarov { c, n_min, n_max } => nazarov_obstruction(*c, *n_min, *n_max),
        Scenario::Intervals { a, bijection, n_max, threshold } => {
            interval_obstruction(a.clone(), bijection.clone(), *n_max, *threshold)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_indices() {
        assert_eq!(nazarov_obstruction(1000.0, 2, 10).unwrap().minimal_index, Some(4));
        assert_eq!(nazarov_obstruction(1.0, 2, 10).unwrap().minimal_index, Some(2));
        let cert = nazarov_obstruction(1000.0, 2, 40).unwrap();
        assert!(cert.monotone);
        // e^16 - 1000 e^5 = 8.886e6 - 1.484e5
        let m4 = &cert.nazarov_margins[2];
        let oracle = 16f64.exp() - 1000.0 * 5f64.exp();
        assert!((m4.margin.ln_abs - oracle.ln()).abs() < 1e-12);
        assert_eq!(cert.nazarov_margins[1].margin.sign, -1);
        assert!(cert.nazarov_margins.iter().all(|e| e.margin.ln_abs.is_finite()));
    }

    #[test]
    fn nazarov_range_checked() {
        assert!(nazarov_obstruction(1.0, 1, 5).is_err());
        assert!(nazarov_obstruction(1.0, 2, 41).is_err());
        assert!(nazarov_obstruction(0.0, 2, 5).is_err());
    }

    #[test]
    fn exponential_lengths_identity() {
        let c = interval_obstruction(LengthRule::Exponential { rate: 1.0 }, Bijection::Identity, 40, 1e6).unwrap();
        assert_eq!(c.threshold_index, Some(14));
        assert_eq!(c.interval_ratios.len(), 40);
        assert!((c.interval_ratios[13].ln_ratio.0 - 14.0).abs() < 1e-12);
        assert_eq!(c.growth, Some(GrowthClass::Superpolynomial));
        assert!(c.monotone);
    }

    #[test]
    fn swap_subsequence_is_even() {
        let c = interval_obstruction(LengthRule::Exponential { rate: 1.0 }, Bijection::PairSwap, 20, 1e6).unwrap();
        let ns: Vec<usize> = c.interval_ratios.iter().map(|e| e.n).collect();
        assert_eq!(ns, (1..=10).map(|k| 2 * k).collect::<Vec<_>>());
    }

    #[test]
    fn polynomial_lengths() {
        let c = interval_obstruction(LengthRule::InversePower { power: 2.0 }, Bijection::Identity, 200, 1e6).unwrap();
        match c.growth {
            Some(GrowthClass::Polynomial { degree }) => assert!((degree - 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bijection_validation() {
        let bad = Bijection::Explicit { values: vec![2, 2, 1] };
        assert!(matches!(
            interval_obstruction(LengthRule::Constant { value: 1.0 }, bad, 3, 1e6),
            Err(VerifyError::Validation(_))
        ));
        let out = Bijection::Explicit { values: vec![2, 3, 4] };
        assert!(interval_obstruction(LengthRule::Constant { value: 1.0 }, out, 3, 1e6).is_err());
    }

    #[test]
    fn replay_reproduces() {
        for cert in [
            nazarov_obstruction(37.5, 2, 40).unwrap(),
            interval_obstruction(LengthRule::Exponential { rate: 0.5 }, Bijection::PairSwap, 31, 1e3).unwrap(),
        ] {
            let json = serde_json::to_string(&cert).unwrap();
            let back: ObstructionCertificate = serde_json::from_str(&json).unwrap();
            assert_eq!(replay_certificate(&back).unwrap(), cert);
        }
    }

    proptest! {
        #[test]
        fn margins_antitone_in_bound(c1 in 0.01f64..1e6, factor in 1.0f64..1e3, n in 2usize..=40) {
            let (_, _, a) = margin(c1, n);
            let (_, _, b) = margin(c1 * factor, n);
            prop_assert!(b.partial_cmp(&a) != Some(Ordering::Greater));
        }

        #[test]
        fn margins_increase_past_minimum(c in 0.01f64..1e8) {
            let cert = nazarov_obstruction(c, 2, 40).unwrap();
            prop_assert!(cert.minimal_index.is_some());
            prop_assert!(cert.monotone);
        }
    }
}
