use serde::{Deserialize, Serialize};

use super::MapError;
use crate::numeric::smooth_step_derivatives;
use crate::serde_ext::ext_f64;

/// Smooth plateau function: `1` on `[plateau.0, plateau.1]`, `0` outside
/// `(support.0, support.1)`, monotone on each transition. Transitions are the
/// smooth step built from `exp(-1/t)`. Either side may be infinite, which turns
/// the bump into a one-sided step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    #[serde(with = "ext_f64")]
    pub support_lo: f64,
    #[serde(with = "ext_f64")]
    pub plateau_lo: f64,
    #[serde(with = "ext_f64")]
    pub plateau_hi: f64,
    #[serde(with = "ext_f64")]
    pub support_hi: f64,
}

impl BumpSpec {
    pub fn new(support: (f64, f64), plateau: (f64, f64)) -> Result<Self, MapError> {
        let b = BumpSpec { support_lo: support.0, plateau_lo: plateau.0, plateau_hi: plateau.1, support_hi: support.1 };
        b.validate()?;
        Ok(b)
    }

    /// The symmetric bump supported on `[-outer, outer]` with plateau `[-inner, inner]`.
    pub fn symmetric(inner: f64, outer: f64) -> Result<Self, MapError> {
        BumpSpec::new((-outer, outer), (-inner, inner))
    }

    /// `0` for `x <= lo`, `1` for `x >= hi`.
    pub fn step(lo: f64, hi: f64) -> Result<Self, MapError> {
        BumpSpec::new((lo, f64::INFINITY), (hi, f64::INFINITY))
    }

    pub fn validate(&self) -> Result<(), MapError> {
        let ok_lo = self.support_lo < self.plateau_lo || (self.support_lo == f64::NEG_INFINITY && self.plateau_lo == f64::NEG_INFINITY);
        let ok_hi = self.plateau_hi < self.support_hi || (self.support_hi == f64::INFINITY && self.plateau_hi == f64::INFINITY);
        if !(ok_lo && ok_hi && self.plateau_lo <= self.plateau_hi) {
            return Err(MapError::Construction(format!(
                "bump plateau [{}, {}] must sit strictly inside support ({}, {})",
                self.plateau_lo, self.plateau_hi, self.support_lo, self.support_hi
            )));
        }
        Ok(())
    }

    /// Derivatives `chi^{(k)}(x)`, `k = 0..=order`.
    pub fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        if x <= self.support_lo || x >= self.support_hi {
            return out;
        }
        if x < self.plateau_lo {
            let w = self.plateau_lo - self.support_lo;
            let s = smooth_step_derivatives((x - self.support_lo) / w, order);
            for (k, v) in s.into_iter().enumerate() {
                out[k] = v / w.powi(k as i32);
            }
        } else if x > self.plateau_hi {
            let w = self.support_hi - self.plateau_hi;
            let s = smooth_step_derivatives((self.support_hi - x) / w, order);
            for (k, v) in s.into_iter().enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out[k] = sign * v / w.powi(k as i32);
            }
        } else {
            out[0] = 1.0;
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivatives(x, 0)[0]
    }

    /// `ln chi(x)`, finite wherever `chi(x) > 0` even when `chi(x)` underflows.
    pub fn ln_eval(&self, x: f64) -> f64 {
        let t = if x <= self.support_lo || x >= self.support_hi {
            return f64::NEG_INFINITY;
        } else if x < self.plateau_lo {
            (x - self.support_lo) / (self.plateau_lo - self.support_lo)
        } else if x > self.plateau_hi {
            (self.support_hi - x) / (self.support_hi - self.plateau_hi)
        } else {
            return 0.0;
        };
        // S(t) = psi(t) / (psi(t) + psi(1 - t)), psi(t) = exp(-1/t)
        let (a, b) = (-1.0 / t, -1.0 / (1.0 - t));
        let hi = a.max(b);
        a - (hi + ((a - hi).exp() + (b - hi).exp()).ln())
    }

    /// `max |chi^{(l)}|` for `l = 0..=order`, by dense sampling of the transitions.
    pub fn derivative_bounds(&self, order: usize) -> Vec<f64> {
        let mut bounds = vec![0.0f64; order + 1];
        bounds[0] = 1.0;
        let mut scan = |lo: f64, hi: f64| {
            const N: usize = 4000;
            for i in 1..N {
                let x = lo + (hi - lo) * i as f64 / N as f64;
                for (b, v) in bounds.iter_mut().zip(self.derivatives(x, order)) {
                    *b = b.max(v.abs());
                }
            }
        };
        if self.support_lo.is_finite() {
            scan(self.support_lo, self.plateau_lo);
        }
        if self.support_hi.is_finite() {
            scan(self.plateau_hi, self.support_hi);
        }
        bounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_support_and_flatness() {
        let b = BumpSpec::symmetric(0.125, 0.25).unwrap();
        assert_eq!(b.eval(0.0), 1.0);
        assert_eq!(b.eval(0.3), 0.0);
        assert_eq!(b.eval(-0.25), 0.0);
        let near = b.derivatives(0.25 - 1e-3, 4);
        assert!(near.iter().all(|v| v.abs() < 1e-6), "{near:?}");
        assert_eq!(b.derivative_bounds(2)[0], 1.0);
    }

    #[test]
    fn monotone_transitions() {
        let b = BumpSpec::symmetric(0.5, 1.0).unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = -1.0 + 0.5 * i as f64 / 1000.0;
            let v = b.eval(x);
            assert!(v >= prev);
            prev = v;
        }
        assert!(b.derivatives(0.75, 1)[1] < 0.0);
    }

    #[test]
    fn step_variant() {
        let s = BumpSpec::step(1.0, 2.0).unwrap();
        assert_eq!(s.eval(0.5), 0.0);
        assert_eq!(s.eval(2.0), 1.0);
        assert_eq!(s.eval(1e6), 1.0);
        assert!((s.eval(1.5) - 0.5).abs() < 1e-15);
        assert!(BumpSpec::new((0.0, 1.0), (0.5, 1.5)).is_err());
    }

    #[test]
    fn log_values() {
        let b = BumpSpec::symmetric(0.5, 1.0).unwrap();
        for x in [-0.9, -0.6, 0.0, 0.55, 0.8, 0.99] {
            assert!((b.ln_eval(x).exp() - b.eval(x)).abs() <= 1e-12 * b.eval(x));
        }
        assert!((b.ln_eval(1.0 - 1e-5) + 5e4 - 1.0).abs() < 1e-3);
        assert_eq!(b.ln_eval(1.5), f64::NEG_INFINITY);
    }

    #[test]
    fn derivatives_match_differences() {
        let b = BumpSpec::symmetric(0.5, 1.0).unwrap();
        let x = 0.7;
        let h = 1e-5;
        let d = b.derivatives(x, 2);
        assert!((d[1] - (b.eval(x + h) - b.eval(x - h)) / (2.0 * h)).abs() < 1e-6);
    }
}
