//! Numerical building blocks shared by the geometry, map and function layers.

mod diff;
mod fit;
mod logspace;
mod poly;
mod roots;
mod smooth;

pub use diff::{chain_rule_1d, fd_step, fd_weights, fd_weights_on, Stencil};
pub use fit::{ols, LinearFit};
pub use logspace::{ln_diff_exp, SignedLog};
pub use poly::Polynomial;
pub use roots::{safeguarded_newton, RootError, RootReport};
pub use smooth::{psi_derivatives, smooth_step_derivatives};

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(factorial(5), 120.0);
    }
}
