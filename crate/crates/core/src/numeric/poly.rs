use serde::{Deserialize, Serialize};

/// Real polynomial with coefficients in ascending order (`c[0] + c[1] u + ...`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `p(u) = u`.
    pub fn identity() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        if self.coeffs.len() == 1 && self.coeffs[0] == 0.0 {
            0
        } else {
            self.coeffs.len() - 1
        }
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Polynomial, i: usize| p.coeffs.get(i).copied().unwrap_or(0.0);
        Polynomial::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn sub_constant(&self, c: f64) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= c;
        Polynomial::new(coeffs)
    }

    /// Coefficients of `q(t) = p(c + t)`.
    pub fn taylor_shift(&self, c: f64) -> Polynomial {
        let mut a = self.coeffs.clone();
        let n = a.len();
        // Repeated synthetic division by (u - c).
        for i in 0..n {
            for j in (i..n - 1).rev() {
                a[j] += c * a[j + 1];
            }
        }
        Polynomial::new(a)
    }

    /// Polynomials `E_k` with `(d/du)^k exp(p(u)) = exp(p(u)) E_k(u)` for `k = 0..=order`.
    pub fn exp_derivative_factors(&self, order: usize) -> Vec<Polynomial> {
        let dp = self.derivative();
        let mut out = vec![Polynomial::constant(1.0)];
        for k in 0..order {
            let next = out[k].derivative().add(&dp.mul(&out[k]));
            out.push(next);
        }
        out
    }
}
