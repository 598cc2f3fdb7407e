use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// A real number carried as sign and natural log of its magnitude.
///
/// Quantities such as `exp(-exp(n^2))` have no `f64` representation once
/// `n >= 3`, but their logarithms (and the logarithms of their logarithms)
/// are ordinary floats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    /// -1, 0 or +1.
    pub sign: i8,
    /// `ln |x|`; `-inf` when `sign == 0`.
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, ln_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1, ln_abs: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if x > 0.0 { 1 } else { -1 }, ln_abs: x.abs().ln() }
        }
    }

    /// Positive number `exp(ln)`.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: 1, ln_abs: ln }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => s as f64 * self.ln_abs.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        SignedLog { sign: self.sign.abs(), ln_abs: self.ln_abs }
    }

    pub fn neg(self) -> Self {
        SignedLog { sign: -self.sign, ln_abs: self.ln_abs }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        SignedLog { sign: self.sign * other.sign, ln_abs: self.ln_abs + other.ln_abs }
    }

    pub fn div(self, other: Self) -> Self {
        assert!(other.sign != 0, "division by zero in log space");
        if self.sign == 0 {
            return Self::ZERO;
        }
        SignedLog { sign: self.sign * other.sign, ln_abs: self.ln_abs - other.ln_abs }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        SignedLog { sign, ln_abs: self.ln_abs * n as f64 }
    }

    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        if big.sign == small.sign {
            let ln = big.ln_abs + (small.ln_abs - big.ln_abs).exp().ln_1p();
            SignedLog { sign: big.sign, ln_abs: ln }
        } else if big.ln_abs == small.ln_abs {
            Self::ZERO
        } else {
            SignedLog { sign: big.sign, ln_abs: ln_diff_exp(big.ln_abs, small.ln_abs) }
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }
}

impl PartialOrd for SignedLog {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&other.ln_abs),
                _ => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            ord => Some(ord),
        }
    }
}

/// `ln(exp(a) - exp(b))` for `a > b`.
pub fn ln_diff_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    a + (-(b - a).exp()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn doubly_exponential_values_stay_finite() {
        // exp(-exp(9)) underflows but its log does not.
        let x = SignedLog::from_ln(-(9.0f64).exp());
        assert_eq!(x.to_f64(), 0.0);
        assert!(x.ln_abs.is_finite());
        let y = x.mul(SignedLog::from_f64(2.0));
        assert!((y.ln_abs - (x.ln_abs + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn cancellation_gives_zero() {
        let a = SignedLog::from_f64(3.0);
        assert!(a.sub(a).is_zero());
    }

    proptest! {
        #[test]
        fn agrees_with_plain_arithmetic(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let (la, lb) = (SignedLog::from_f64(a), SignedLog::from_f64(b));
            let sum = la.add(lb).to_f64();
            prop_assert!((sum - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1.0));
            let prod = la.mul(lb).to_f64();
            prop_assert!((prod - a * b).abs() <= 1e-12 * (a * b).abs().max(1e-300));
            prop_assert_eq!(la.partial_cmp(&lb), a.partial_cmp(&b));
        }
    }
}
