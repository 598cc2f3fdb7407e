//! The diffeomorphism from the exponential cusp `{u > 0, 0 < v < exp(-p(u))}`
//! onto the half-strip `{x > 1, 0 < y < 1}`.
//!
//! Near the tip it is the affine map `phi_1(u, v) = (alpha u + 1, v e^{p(u)})`
//! with `alpha = (e^{p(M)} - 1) / M`, far out it is `phi_2(u, v) = (e^{p(u)}, v e^{p(u)})`,
//! and the two are blended by a smooth step `chi` rising from `M` to `2M`.

use serde::{Deserialize, Serialize};

use super::{BumpSpec, MapError};
use crate::numeric::{binomial, safeguarded_newton, Polynomial};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 80;
const LADDER_STEP: f64 = 0.5;
const LADDER_LEN: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CuspRepr", into = "CuspRepr")]
pub struct CuspMapRecord {
    pub p: Polynomial,
    /// Slope and intercept `p(u) = mu + lambda u` in the degree-one case.
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    /// Blend threshold.
    pub m: f64,
    pub alpha: f64,
    pub chi: BumpSpec,
    /// `E_k` with `(d/du)^k e^{p(u)} = e^{p(u)} E_k(u)`; these are the polynomial
    /// factors bounding the derivatives of the tail map.
    pub exp_factors: Vec<Polynomial>,
}

#[derive(Serialize, Deserialize)]
struct CuspRepr {
    p: Polynomial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
}

impl TryFrom<CuspRepr> for CuspMapRecord {
    type Error = MapError;
    fn try_from(r: CuspRepr) -> Result<Self, MapError> {
        match r.m {
            Some(m) => CuspMapRecord::with_threshold(r.p, m),
            None => CuspMapRecord::new(r.p),
        }
    }
}

impl From<CuspMapRecord> for CuspRepr {
    fn from(c: CuspMapRecord) -> Self {
        CuspRepr { p: c.p, m: Some(c.m) }
    }
}

/// Does `q(u) > 0` hold for every `u > m`? Sufficient test: all Taylor
/// coefficients of `q` at `m` are non-negative and the constant one is positive.
fn positive_beyond(q: &Polynomial, m: f64) -> bool {
    let shifted = q.taylor_shift(m);
    let c = shifted.coeffs();
    c.first().is_some_and(|&c0| c0 > 0.0) && c.iter().all(|&x| x >= 0.0)
}

impl CuspMapRecord {
    /// Picks the smallest admissible threshold on the ladder `0.5, 1.0, 1.5, ...`.
    pub fn new(p: Polynomial) -> Result<Self, MapError> {
        Self::check_polynomial(&p)?;
        for k in 1..=LADDER_LEN {
            let m = LADDER_STEP * k as f64;
            if Self::admissible(&p, m) {
                return Self::with_threshold(p, m);
            }
        }
        Err(MapError::Construction("no admissible threshold on the ladder".into()))
    }

    fn check_polynomial(p: &Polynomial) -> Result<(), MapError> {
        if p.degree() == 0 || !(p.leading() > 0.0) {
            return Err(MapError::Construction(
                "cusp polynomial must be non-constant with positive leading coefficient".into(),
            ));
        }
        Ok(())
    }

    /// The threshold conditions: `p' > 0` beyond `m` and `p(m) > 1`, plus
    /// `m > 1/lambda` in degree one, or `p' > 1` beyond `m` and `m > 1` otherwise.
    pub fn admissible(p: &Polynomial, m: f64) -> bool {
        let dp = p.derivative();
        if !(m > 0.0 && positive_beyond(&dp, m) && p.eval(m) > 1.0) {
            return false;
        }
        if p.degree() == 1 {
            m > 1.0 / p.leading()
        } else {
            m > 1.0 && positive_beyond(&dp.sub_constant(1.0), m)
        }
    }

    pub fn with_threshold(p: Polynomial, m: f64) -> Result<Self, MapError> {
        Self::check_polynomial(&p)?;
        if !Self::admissible(&p, m) {
            return Err(MapError::Construction(format!("threshold M = {m} is not admissible")));
        }
        let (lambda, mu) = if p.degree() == 1 { (Some(p.coeffs()[1]), Some(p.coeffs()[0])) } else { (None, None) };
        let alpha = (p.eval(m).exp() - 1.0) / m;
        let chi = BumpSpec::step(m, 2.0 * m)?;
        let exp_factors = p.exp_derivative_factors(8);
        Ok(CuspMapRecord { p, lambda, mu, m, alpha, chi, exp_factors })
    }

    /// Upper edge `exp(-p(u))` of the cusp.
    pub fn height(&self, u: f64) -> f64 {
        (-self.p.eval(u)).exp()
    }

    /// `b(u) = e^{p(u)} - (alpha u + 1)`, positive on `(M, 2M)`.
    pub fn b(&self, u: f64) -> f64 {
        self.p.eval(u).exp() - (self.alpha * u + 1.0)
    }

    fn exp_factor(&self, k: usize, u: f64) -> f64 {
        if k < self.exp_factors.len() {
            self.exp_factors[k].eval(u)
        } else {
            self.p.exp_derivative_factors(k)[k].eval(u)
        }
    }

    /// Derivatives of the first coordinate `a(u) = (1 - chi) (alpha u + 1) + chi e^{p(u)}`.
    pub fn first_derivatives(&self, u: f64, order: usize) -> Vec<f64> {
        let chi = self.chi.derivatives(u, order);
        let ep = self.p.eval(u).exp();
        let lin = |k: usize| match k {
            0 => self.alpha * u + 1.0,
            1 => self.alpha,
            _ => 0.0,
        };
        (0..=order)
            .map(|k| {
                let mut acc = lin(k);
                for j in 0..=k {
                    if chi[j] == 0.0 {
                        continue;
                    }
                    acc += binomial(k, j) * chi[j] * (ep * self.exp_factor(k - j, u) - lin(k - j));
                }
                acc
            })
            .collect()
    }

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        let a = self.first_derivatives(u, 0)[0];
        (a, v * self.p.eval(u).exp())
    }

    /// Mixed partial `d^{k1}_u d^{k2}_v` of both coordinates, in closed form.
    pub fn partial(&self, u: f64, v: f64, k1: usize, k2: usize) -> [f64; 2] {
        let first = if k2 == 0 { self.first_derivatives(u, k1)[k1] } else { 0.0 };
        let ep = self.p.eval(u).exp() * self.exp_factor(k1, u);
        let second = match k2 {
            0 => v * ep,
            1 => ep,
            _ => 0.0,
        };
        [first, second]
    }

    pub fn jacobian_determinant(&self, u: f64) -> f64 {
        self.first_derivatives(u, 1)[1] * self.p.eval(u).exp()
    }

    /// `g(x) = p^{-1}(ln x)` on the tail `u >= 2M`.
    pub fn tail_inverse(&self, x: f64) -> Result<f64, MapError> {
        let target = x.ln();
        let lo = 2.0 * self.m;
        if self.p.eval(lo) > target {
            return Err(MapError::Domain(format!("x = {x} is below the tail")));
        }
        let mut hi = lo.max(1.0) * 2.0;
        while self.p.eval(hi) < target {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(MapError::Domain(format!("x = {x} out of range")));
            }
        }
        let deg = self.p.degree() as f64;
        let guess = (target / self.p.leading()).max(0.0).powf(1.0 / deg);
        let dp = self.p.derivative();
        safeguarded_newton(|u| (self.p.eval(u) - target, dp.eval(u)), lo, hi, guess, NEWTON_TOL, NEWTON_MAX_ITER)
            .map(|r| r.root)
            .map_err(|e| MapError::Numerical(e.to_string()))
    }

    /// Inverse from the half-strip back to the cusp.
    pub fn apply_inverse(&self, x: f64, y: f64) -> Result<(f64, f64), MapError> {
        if !(x > 1.0 && y > 0.0 && y < 1.0) {
            return Err(MapError::Domain(format!("({x}, {y}) is outside the half-strip")));
        }
        let joint = self.alpha * self.m + 1.0;
        let tail = (self.p.eval(2.0 * self.m)).exp();
        let u = if x <= joint {
            (x - 1.0) / self.alpha
        } else if x >= tail {
            return Ok((self.tail_inverse(x)?, y / x));
        } else {
            safeguarded_newton(
                |u| {
                    let d = self.first_derivatives(u, 1);
                    (d[0] - x, d[1])
                },
                self.m,
                2.0 * self.m,
                self.m + self.m * (x - joint) / (tail - joint),
                NEWTON_TOL,
                NEWTON_MAX_ITER,
            )
            .map_err(|e| MapError::Numerical(e.to_string()))?
            .root
        };
        Ok((u, y * (-self.p.eval(u)).exp()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> CuspMapRecord {
        CuspMapRecord::new(Polynomial::identity()).unwrap()
    }

    fn quadratic() -> CuspMapRecord {
        CuspMapRecord::new(Polynomial::new(vec![0.0, 0.0, 1.0])).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(linear().m, 1.5);
        assert_eq!(quadratic().m, 1.5);
        // p = 3u: p(M) > 1 and M > 1/3 first hold at M = 0.5
        assert_eq!(CuspMapRecord::new(Polynomial::new(vec![0.0, 3.0])).unwrap().m, 0.5);
        assert!(CuspMapRecord::new(Polynomial::new(vec![1.0, -1.0])).is_err());
        assert!(CuspMapRecord::with_threshold(Polynomial::identity(), 1.0).is_err());
    }

    #[test]
    fn tail_values() {
        let c = linear();
        let (x, y) = c.apply(3.0, (-3.0f64).exp() / 2.0);
        assert!((x - 3f64.exp()).abs() < 1e-12 * x);
        assert!((y - 0.5).abs() < 1e-15);
        assert!((c.tail_inverse(5f64.exp()).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn b_vanishes_at_threshold() {
        for c in [linear(), quadratic()] {
            assert!(c.b(c.m).abs() < 1e-12);
            assert!((1..1000).all(|i| c.b(c.m * (1.0 + i as f64 / 1000.0)) > 0.0));
        }
    }

    #[test]
    fn round_trip_through_all_zones() {
        for c in [linear(), quadratic()] {
            for i in 1..200 {
                let u = 3.0 * c.m * i as f64 / 200.0;
                let v = c.height(u) * 0.37;
                let (x, y) = c.apply(u, v);
                let (u2, v2) = c.apply_inverse(x, y).unwrap();
                assert!((u2 - u).abs() <= 1e-10 * (1.0 + u), "u = {u}: {u2}");
                assert!((v2 - v).abs() <= 1e-10 * (1.0 + v));
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let c = quadratic();
        for u in [0.7, 1.6, 2.2, 2.9, 3.5] {
            let d = c.first_derivatives(u, 3);
            let h = 1e-4;
            let f = |t: f64| c.first_derivatives(t, 0)[0];
            let fd1 = (f(u + h) - f(u - h)) / (2.0 * h);
            let fd2 = (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h);
            assert!((d[1] - fd1).abs() <= 1e-6 * d[1].abs().max(1.0), "u = {u}");
            assert!((d[2] - fd2).abs() <= 1e-4 * d[2].abs().max(1.0), "u = {u}");
        }
        // second coordinate is linear in v with slope e^{p(u)} in the tail
        assert_eq!(c.partial(4.0, 1e-9, 0, 1)[1], 16f64.exp());
    }

    #[test]
    fn serde_round_trip() {
        let c = quadratic();
        let s = serde_json::to_string(&c).unwrap();
        let back: CuspMapRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let fresh: CuspMapRecord = serde_json::from_str(r#"{"p": [0.0, 1.0]}"#).unwrap();
        assert_eq!(fresh.m, 1.5);
    }
}
