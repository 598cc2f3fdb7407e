use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RootError {
    #[error("bracket [{lo}, {hi}] does not straddle a sign change")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootReport {
    pub root: f64,
    pub iterations: usize,
}

/// Newton iteration kept inside a shrinking bracket; falls back to bisection
/// whenever the Newton step leaves the bracket or the derivative vanishes.
///
/// `f` returns `(value, derivative)`. Converges when the step falls below
/// `tol * max(1, |x|)`; one extra Newton step is then taken to reach full precision.
pub fn safeguarded_newton<F>(f: F, lo: f64, hi: f64, x0: f64, tol: f64, max_iter: usize) -> Result<RootReport, RootError>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo).0, f(hi).0);
    if flo == 0.0 {
        return Ok(RootReport { root: lo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(RootReport { root: hi, iterations: 0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoSignChange { lo, hi });
    }
    let increasing = fhi > 0.0;
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    for it in 1..=max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(RootReport { root: x, iterations: it });
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let newton = if dfx != 0.0 { x - fx / dfx } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs().max(1.0) || hi - lo <= tol * x.abs().max(1.0) * 1e-3 {
            let (fx, dfx) = f(x);
            if dfx != 0.0 {
                let polished = x - fx / dfx;
                if polished >= lo && polished <= hi {
                    x = polished;
                }
            }
            return Ok(RootReport { root: x, iterations: it });
        }
    }
    Err(RootError::NoConvergence(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1.0, 1e-12, 80).unwrap();
        assert!((r.root - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_guess_still_converges() {
        // Newton from x = 0.01 on atan overshoots wildly; the bracket keeps it honest.
        let r = safeguarded_newton(|x: f64| (x.atan() - 1.0, 1.0 / (1.0 + x * x)), -10.0, 100.0, 90.0, 1e-12, 80).unwrap();
        assert!((r.root - 1f64.tan()).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(matches!(
            safeguarded_newton(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 0.0, 1e-12, 10),
            Err(RootError::NoSignChange { .. })
        ));
    }
}
