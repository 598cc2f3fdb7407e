//! The flat profile `psi(t) = exp(-1/t)` and the smooth step built from it.

use super::binomial;

/// Above this value of `1/t` every derivative of `psi` underflows.
const PSI_CUTOFF: f64 = 745.0;

/// `psi^{(k)}(t)` for `k = 0..=order`, where `psi(t) = exp(-1/t)` for `t > 0` and `0` otherwise.
///
/// Uses `psi^{(k)}(t) = P_k(1/t) exp(-1/t)` with `P_0 = 1`, `P_{k+1}(s) = s^2 (P_k(s) - P_k'(s))`.
pub fn psi_derivatives(t: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if t <= 0.0 {
        return out;
    }
    let s = 1.0 / t;
    if s > PSI_CUTOFF {
        return out;
    }
    let e = (-s).exp();
    let mut p: Vec<f64> = vec![1.0];
    for slot in out.iter_mut() {
        let val = p.iter().rev().fold(0.0, |acc, &c| acc * s + c);
        *slot = val * e;
        // next P = s^2 (P - P')
        let mut next = vec![0.0; p.len() + 2];
        for (i, &c) in p.iter().enumerate() {
            next[i + 2] += c;
            if i > 0 {
                next[i + 1] -= c * i as f64;
            }
        }
        p = next;
    }
    out
}

/// Derivatives `S^{(k)}(t)`, `k = 0..=order`, of the smooth step
/// `S(t) = psi(t) / (psi(t) + psi(1 - t))`: `0` for `t <= 0`, `1` for `t >= 1`,
/// monotone in between and flat at both joints.
pub fn smooth_step_derivatives(t: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if t <= 0.0 {
        return out;
    }
    if t >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let a = psi_derivatives(t, order);
    let b = psi_derivatives(1.0 - t, order);
    // d^j/dt^j psi(1 - t) = (-1)^j psi^{(j)}(1 - t)
    let denom: Vec<f64> = (0..=order)
        .map(|j| a[j] + if j % 2 == 0 { b[j] } else { -b[j] })
        .collect();
    for k in 0..=order {
        let mut acc = a[k];
        for j in 1..=k {
            acc -= binomial(k, j) * denom[j] * out[k - j];
        }
        out[k] = acc / denom[0];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_first_derivative_closed_form() {
        let t = 0.37;
        let d = psi_derivatives(t, 2);
        let e = (-1.0 / t).exp();
        assert!((d[1] - e / (t * t)).abs() < 1e-14);
        // psi'' = (1/t^4 - 2/t^3) e
        assert!((d[2] - e * (1.0 / t.powi(4) - 2.0 / t.powi(3))).abs() < 1e-12);
    }

    #[test]
    fn step_is_symmetric_and_monotone() {
        let mut prev = 0.0;
        for i in 1..100 {
            let t = i as f64 / 100.0;
            let s = smooth_step_derivatives(t, 0)[0];
            let r = smooth_step_derivatives(1.0 - t, 0)[0];
            assert!((s + r - 1.0).abs() < 1e-14);
            assert!(s >= prev);
            prev = s;
        }
        assert_eq!(smooth_step_derivatives(0.5, 0)[0], 0.5);
    }

    #[test]
    fn step_derivatives_match_differences() {
        let h = 1e-5;
        for &t in &[0.2, 0.5, 0.81] {
            let d = smooth_step_derivatives(t, 3);
            for k in 0..3 {
                let fd = (smooth_step_derivatives(t + h, k)[k] - smooth_step_derivatives(t - h, k)[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-5 * d[k + 1].abs().max(1.0), "k={k} t={t}");
            }
        }
    }

    #[test]
    fn no_nan_near_joints() {
        for &t in &[1e-300, 1e-8, 1.0 - 1e-12] {
            assert!(smooth_step_derivatives(t, 6).iter().all(|v| v.is_finite()));
        }
    }
}
