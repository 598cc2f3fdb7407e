//! The chain of discs `B(n, 1/n^2)` joined by strips of height `exp(-exp(n^2))`.
//!
//! Strip heights underflow `f64` from `n = 3` on, so everything that touches
//! them is carried as a natural log. Distances come from a case analysis over
//! the visible boundary pieces (circle arcs, strip walls, the end cap).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2};
use crate::numeric::ln_diff_exp;

/// Largest supported truncation index.
pub const NAZAROV_MAX_N: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NazarovGeometry {
    pub n_max: usize,
    /// `ln(h_n / 2) = -exp(n^2) - ln 2` for `n = 1..=n_max`; `-inf` from `n = 27` on,
    /// where those strips degenerate to segments of the real axis.
    pub ln_half_heights: Vec<f64>,
}

/// `ln(hypot(a, exp(ln_b)))` for `a >= 0`.
fn ln_hypot(a: f64, ln_b: f64) -> f64 {
    if a == 0.0 {
        return ln_b;
    }
    let la = a.ln();
    if ln_b == f64::NEG_INFINITY {
        return la;
    }
    let (hi, lo) = if la >= ln_b { (la, ln_b) } else { (ln_b, la) };
    hi + 0.5 * (2.0 * (lo - hi)).exp().ln_1p()
}

/// `ln | |y| - exp(ln_s) |`.
fn ln_gap(y: f64, ln_s: f64) -> f64 {
    if y == 0.0 {
        return ln_s;
    }
    let ly = y.abs().ln();
    if ly >= ln_s {
        ln_diff_exp(ly, ln_s)
    } else {
        ln_diff_exp(ln_s, ly)
    }
}

/// Angular interval `(lo, hi)` with `lo <= hi`, angles in radians (not reduced).
type Arc = (f64, f64);

fn normalize(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

impl NazarovGeometry {
    pub fn new(n_max: usize) -> Result<Self, GeometryError> {
        if !(1..=NAZAROV_MAX_N).contains(&n_max) {
            return Err(GeometryError::Parameter(format!("n_max = {n_max} is outside 1..={NAZAROV_MAX_N}")));
        }
        let ln_half_heights = (1..=n_max).map(|n| -((n * n) as f64).exp() - 2f64.ln()).collect();
        Ok(NazarovGeometry { n_max, ln_half_heights })
    }

    pub fn center(&self, n: usize) -> Point2 {
        Point2::on_line(n as f64)
    }

    pub fn radius(&self, n: usize) -> f64 {
        1.0 / (n * n) as f64
    }

    /// `ln(h_n / 2)`.
    pub fn ln_half_height(&self, n: usize) -> f64 {
        self.ln_half_heights[n - 1]
    }

    /// `ln(-ln h_n) = n^2`, finite for every `n` even where `ln h_n` overflows.
    pub fn ln_ln_height(&self, n: usize) -> f64 {
        (n * n) as f64
    }

    /// `h_n / 2`, which is `0.0` once it underflows.
    pub fn half_height(&self, n: usize) -> f64 {
        self.ln_half_height(n).exp()
    }

    pub fn in_disc(&self, n: usize, p: Point2) -> bool {
        p.dist(self.center(n)) < self.radius(n)
    }

    pub fn in_strip(&self, n: usize, p: Point2) -> bool {
        let k = n as f64;
        p.x > k && p.x < k + 1.0 && (p.y == 0.0 || p.y.abs().ln() < self.ln_half_height(n))
    }

    pub fn contains(&self, p: Point2) -> bool {
        let lo = (p.x.floor() as i64 - 2).max(1) as usize;
        let hi = ((p.x.ceil() as i64 + 2).max(0) as usize).min(self.n_max);
        (lo..=hi).any(|n| self.in_disc(n, p) || self.in_strip(n, p))
    }

    /// Parts of circle `n` covered by other components, merged, in `(-pi, pi]` coordinates
    /// possibly extending past `pi` for the interval around the negative axis.
    fn covered_arcs(&self, n: usize) -> Vec<Arc> {
        let r = self.radius(n);
        let mut arcs: Vec<Arc> = Vec::new();
        for m in [n.wrapping_sub(1), n + 1] {
            if m == 0 || m > self.n_max {
                continue;
            }
            let rm = self.radius(m);
            // |q - c_m|^2 < r_m^2  <=>  sgn(m - n) cos(theta) > kappa
            let kappa = (r * r + 1.0 - rm * rm) / (2.0 * r);
            if kappa >= 1.0 {
                continue;
            }
            let half = if kappa <= -1.0 { PI } else { kappa.acos() };
            if m > n {
                arcs.push((-half, half));
            } else {
                arcs.push((PI - half, PI + half));
            }
        }
        // strip n leaves to the right, strip n - 1 arrives from the left
        let right = (self.half_height(n) / r).min(1.0).asin();
        arcs.push((-right, right));
        if n > 1 {
            let left = (self.half_height(n - 1) / r).min(1.0).asin();
            arcs.push((PI - left, PI + left));
        }
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<Arc> = Vec::new();
        for a in arcs {
            match merged.last_mut() {
                Some(last) if a.0 <= last.1 => last.1 = last.1.max(a.1),
                _ => merged.push(a),
            }
        }
        merged
    }

    /// Distance from `p` to the visible part of circle `n`.
    fn arc_distance(&self, n: usize, p: Point2) -> f64 {
        let c = self.center(n);
        let r = self.radius(n);
        let rho = p.dist(c);
        let phi = (p.y - c.y).atan2(p.x - c.x);
        let on_circle = |theta: f64| (rho * rho + r * r - 2.0 * rho * r * (theta - phi).cos()).max(0.0).sqrt();
        for (lo, hi) in self.covered_arcs(n) {
            for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
                let t = phi + shift;
                if t > lo && t < hi {
                    if hi - lo >= 2.0 * PI {
                        return f64::INFINITY;
                    }
                    return on_circle(lo).min(on_circle(hi));
                }
            }
        }
        (rho - r).abs()
    }

    /// Visible x-range of the walls of strip `n`, if any.
    fn wall_range(&self, n: usize) -> Option<(f64, f64)> {
        let s = self.half_height(n);
        let k = n as f64;
        let r0 = self.radius(n);
        let xa = k + (r0 * r0 - s * s).max(0.0).sqrt();
        let xb = if n < self.n_max {
            let r1 = self.radius(n + 1);
            k + 1.0 - (r1 * r1 - s * s).max(0.0).sqrt()
        } else {
            k + 1.0
        };
        (xa < xb).then_some((xa, xb))
    }

    /// `ln` distance from `p` to the walls `y = +-h_n/2` of strip `n`.
    fn ln_wall_distance(&self, n: usize, p: Point2) -> f64 {
        let Some((xa, xb)) = self.wall_range(n) else {
            return f64::INFINITY;
        };
        let ln_s = self.ln_half_height(n);
        let dx = if p.x < xa {
            xa - p.x
        } else if p.x > xb {
            p.x - xb
        } else {
            0.0
        };
        ln_hypot(dx, ln_gap(p.y, ln_s))
    }

    /// `ln` distance from `p` to the end cap `x = n_max + 1, |y| <= h/2`.
    fn ln_cap_distance(&self, p: Point2) -> f64 {
        let ln_s = self.ln_half_height(self.n_max);
        let dx = (p.x - (self.n_max as f64 + 1.0)).abs();
        let inside = p.y == 0.0 || p.y.abs().ln() <= ln_s;
        if inside {
            dx.ln()
        } else {
            ln_hypot(dx, ln_gap(p.y, ln_s))
        }
    }

    /// `ln` of the distance from an interior point to the boundary.
    fn ln_interior_distance(&self, p: Point2) -> f64 {
        let lo = (p.x.floor() as i64 - 2).max(1) as usize;
        let hi = ((p.x.ceil() as i64 + 2).max(1) as usize).min(self.n_max);
        let mut best = f64::INFINITY;
        for n in lo..=hi {
            best = best.min(self.arc_distance(n, p).ln());
            best = best.min(self.ln_wall_distance(n, p));
        }
        if hi == self.n_max {
            best = best.min(self.ln_cap_distance(p));
        }
        best
    }

    /// `ln` of the distance from an exterior point to the closed domain.
    fn ln_exterior_distance(&self, p: Point2) -> f64 {
        let mut best = f64::INFINITY;
        for n in 1..=self.n_max {
            let to_disc = p.dist(self.center(n)) - self.radius(n);
            best = best.min(to_disc.max(0.0).ln());
            let k = n as f64;
            let dx = (k - p.x).max(p.x - k - 1.0).max(0.0);
            let ln_s = self.ln_half_height(n);
            let ln_dy = if p.y == 0.0 || p.y.abs().ln() <= ln_s { f64::NEG_INFINITY } else { ln_gap(p.y, ln_s) };
            best = best.min(ln_hypot(dx, ln_dy));
        }
        best
    }

    /// `(inside, ln |signed distance|)`.
    pub fn ln_distance(&self, p: Point2) -> (bool, f64) {
        if self.contains(p) {
            (true, self.ln_interior_distance(p))
        } else {
            (false, self.ln_exterior_distance(p))
        }
    }

    /// Signed distance to the boundary, positive inside (may underflow to `0.0` inside thin strips).
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let (inside, ln_d) = self.ln_distance(p);
        if inside {
            ln_d.exp()
        } else {
            -ln_d.exp()
        }
    }

    /// Points spaced at most `h` apart along the whole boundary, excluding covered parts.
    pub fn boundary_samples(&self, h: f64) -> Vec<Point2> {
        let mut out = Vec::new();
        for n in 1..=self.n_max {
            let c = self.center(n);
            let r = self.radius(n);
            let count = ((2.0 * PI * r / h).ceil() as usize).max(16);
            let covered = self.covered_arcs(n);
            for i in 0..count {
                let theta = normalize(2.0 * PI * i as f64 / count as f64);
                let hidden = covered.iter().any(|&(lo, hi)| {
                    [theta - 2.0 * PI, theta, theta + 2.0 * PI].iter().any(|&t| t > lo && t < hi)
                });
                if !hidden {
                    out.push(Point2::new(c.x + r * theta.cos(), c.y + r * theta.sin()));
                }
            }
            if let Some((xa, xb)) = self.wall_range(n) {
                let s = self.half_height(n);
                let count = ((xb - xa) / h).ceil() as usize;
                for i in 0..=count {
                    let x = xa + (xb - xa) * i as f64 / count.max(1) as f64;
                    out.push(Point2::new(x, s));
                    out.push(Point2::new(x, -s));
                }
            }
        }
        let s = self.half_height(self.n_max);
        let x = self.n_max as f64 + 1.0;
        let count = ((2.0 * s / h).ceil() as usize).max(1);
        for i in 0..=count {
            out.push(Point2::new(x, -s + 2.0 * s * i as f64 / count as f64));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_height_logs() {
        let g = NazarovGeometry::new(3).unwrap();
        assert!((g.ln_half_height(1) - (-std::f64::consts::E - 2f64.ln())).abs() < 1e-12);
        assert!((g.ln_half_height(1) + 3.4114).abs() < 1e-4);
        assert_eq!(g.half_height(3), 0.0);
        assert!(g.ln_half_height(3).is_finite());
        assert!(NazarovGeometry::new(0).is_err());
        assert!(NazarovGeometry::new(41).is_err());
        let g = NazarovGeometry::new(40).unwrap();
        assert!(g.ln_half_height(26).is_finite());
        assert_eq!(g.ln_half_height(27), f64::NEG_INFINITY);
        assert_eq!(g.ln_ln_height(40), 1600.0);
    }

    #[test]
    fn hand_computed_distance() {
        // nearest visible point of circle 1 is where it leaves disc 2: cos(theta) = 31/32
        let g = NazarovGeometry::new(5).unwrap();
        let d = g.signed_distance(Point2::new(1.5, 0.0));
        assert!((d - (1.25f64 - 31.0 / 32.0).sqrt()).abs() < 1e-12, "{d}");
        assert!((g.signed_distance(Point2::new(1.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deep_strip_in_log_space() {
        let g = NazarovGeometry::new(5).unwrap();
        let (inside, ln_d) = g.ln_distance(Point2::new(3.5, 0.0));
        assert!(inside);
        assert!((ln_d - g.ln_half_height(3)).abs() < 1e-9);
        let (inside, _) = g.ln_distance(Point2::new(3.5, 1e-300));
        assert!(!inside);
        assert!(g.contains(Point2::new(2.5, 0.0)));
        assert!(g.signed_distance(Point2::new(2.5, 0.0)) > 0.0);
    }

    #[test]
    fn exterior_is_negative() {
        let g = NazarovGeometry::new(2).unwrap();
        assert!((g.signed_distance(Point2::new(1.0, 3.0)) + 2.0).abs() < 1e-12);
        assert!((g.signed_distance(Point2::new(4.0, 0.0)) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn samples_avoid_covered_parts() {
        let g = NazarovGeometry::new(4).unwrap();
        for q in g.boundary_samples(1e-2) {
            let inside = (1..=4).any(|n| g.in_disc(n, q) && q.dist(g.center(n)) < g.radius(n) - 1e-12);
            assert!(!inside, "{q:?}");
        }
    }
}
