//! Explicit homeomorphisms between planar domains and between open subsets of the line.

mod bump;
mod cusp;
mod line;
mod plane;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::numeric::{fd_step, Stencil};

pub use bump::BumpSpec;
pub use cusp::CuspMapRecord;
pub use line::{cantor_distance_pair, make_cantor_map, make_exp_log, make_interval_linear_map, LineMap};
pub use plane::{make_cusp_map, make_identity, make_mobius, make_sqrt_branch, sqrt_preimage_curve, PlaneMap};

/// Largest total derivative order `map_derivative` accepts.
pub const MAX_DERIVATIVE_ORDER: usize = 6;

/// Default finite-difference step before clamping to the boundary distance.
pub const FD_BASE_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("invalid map construction: {0}")]
    Construction(String),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("pole of the map")]
    Pole,
    #[error("branch cut: {0}")]
    Branch(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("incompatible maps: {0}")]
    Incompatible(String),
}

/// A map of the plane or of the line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyMap {
    Plane(PlaneMap),
    Line(LineMap),
}

impl AnyMap {
    pub fn dim(&self) -> usize {
        match self {
            AnyMap::Plane(_) => 2,
            AnyMap::Line(_) => 1,
        }
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>, MapError> {
        match self {
            AnyMap::Plane(m) => {
                check_dim(p, 2)?;
                let q = m.apply(Point2::new(p[0], p[1]))?;
                Ok(vec![q.x, q.y])
            }
            AnyMap::Line(m) => {
                check_dim(p, 1)?;
                Ok(vec![m.apply(p[0])?])
            }
        }
    }

    pub fn apply_inverse(&self, p: &[f64]) -> Result<Vec<f64>, MapError> {
        match self {
            AnyMap::Plane(m) => {
                check_dim(p, 2)?;
                let q = m.apply_inverse(Point2::new(p[0], p[1]))?;
                Ok(vec![q.x, q.y])
            }
            AnyMap::Line(m) => {
                check_dim(p, 1)?;
                Ok(vec![m.apply_inverse(p[0])?])
            }
        }
    }

    pub fn inverse(&self) -> Result<AnyMap, MapError> {
        Ok(match self {
            AnyMap::Plane(m) => AnyMap::Plane(m.inverse()?),
            AnyMap::Line(m) => AnyMap::Line(m.inverse()),
        })
    }
}

impl From<PlaneMap> for AnyMap {
    fn from(m: PlaneMap) -> Self {
        AnyMap::Plane(m)
    }
}

impl From<LineMap> for AnyMap {
    fn from(m: LineMap) -> Self {
        AnyMap::Line(m)
    }
}

fn check_dim(p: &[f64], dim: usize) -> Result<(), MapError> {
    if p.len() != dim {
        return Err(MapError::Incompatible(format!("expected a point of dimension {dim}, got {}", p.len())));
    }
    Ok(())
}

/// Composition applied in list order: `maps[0]` acts first.
pub fn compose(maps: Vec<AnyMap>) -> Result<AnyMap, MapError> {
    let first = maps.first().ok_or_else(|| MapError::Incompatible("nothing to compose".into()))?;
    let dim = first.dim();
    if maps.iter().any(|m| m.dim() != dim) {
        return Err(MapError::Incompatible("cannot compose plane maps with line maps".into()));
    }
    Ok(if dim == 2 {
        AnyMap::Plane(PlaneMap::Composition {
            maps: maps.into_iter().filter_map(|m| if let AnyMap::Plane(p) = m { Some(p) } else { None }).collect(),
        })
    } else {
        AnyMap::Line(LineMap::Composition {
            maps: maps.into_iter().filter_map(|m| if let AnyMap::Line(l) = m { Some(l) } else { None }).collect(),
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Exact,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    /// One entry per output coordinate.
    pub value: Vec<f64>,
    pub mode: DerivativeMode,
    /// Finite-difference step, absent for exact values.
    pub step: Option<f64>,
    pub warning: Option<String>,
}

/// Partial derivative `d^k phi(p)` for a multi-index `k` with `|k| <= 6`.
///
/// Closed forms are used where the family has them (holomorphic maps via
/// `d_x^i d_y^j f = i^j f^(i+j)`, the cusp map, and every line map); anything
/// else falls back to a centred stencil whose step is clamped by
/// `boundary_distance` so no sample leaves the domain.
pub fn map_derivative(
    map: &AnyMap,
    k: &[usize],
    p: &[f64],
    boundary_distance: Option<f64>,
) -> Result<DerivativeReport, MapError> {
    if k.len() != map.dim() {
        return Err(MapError::Incompatible("multi-index length must match the dimension".into()));
    }
    let order: usize = k.iter().sum();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(MapError::Incompatible(format!("derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")));
    }
    if let Some(value) = exact_derivative(map, k, p)? {
        return Ok(DerivativeReport { value, mode: DerivativeMode::Exact, step: None, warning: None });
    }
    let stencil = Stencil::new(order.max(1));
    let dim = map.dim();
    let h = match boundary_distance {
        Some(d) if d > 0.0 => fd_step(FD_BASE_STEP, d, stencil.reach, dim),
        Some(d) => return Err(MapError::Domain(format!("boundary distance {d} is not positive"))),
        None => FD_BASE_STEP,
    };
    let value = match map {
        AnyMap::Line(m) => {
            let err = std::cell::OnceCell::new();
            let d = stencil.derivatives_1d(
                |x| m.apply(x).unwrap_or_else(|e| {
                    let _ = err.set(e);
                    f64::NAN
                }),
                p[0],
                h,
            );
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            vec![d[order]]
        }
        AnyMap::Plane(m) => {
            let mut out = vec![0.0; 2];
            for (c, slot) in out.iter_mut().enumerate() {
                let err = std::cell::OnceCell::new();
                let d = stencil.derivatives_2d(
                    |x, y| match m.apply(Point2::new(x, y)) {
                        Ok(q) => [q.x, q.y][c],
                        Err(e) => {
                            let _ = err.set(e);
                            f64::NAN
                        }
                    },
                    p[0],
                    p[1],
                    h,
                );
                if let Some(e) = err.into_inner() {
                    return Err(e);
                }
                *slot = d[k[0]][k[1]];
            }
            out
        }
    };
    // Rounding error of an order-n stencil scales like eps / h^n.
    let warning = (order > 0 && f64::EPSILON / h.powi(order as i32) > 1e-6).then(|| {
        format!("step {h:.3e} is small for order {order}; expect roughly {:.1e} relative rounding error", f64::EPSILON / h.powi(order as i32))
    });
    Ok(DerivativeReport { value, mode: DerivativeMode::FiniteDifference, step: Some(h), warning })
}

fn exact_derivative(map: &AnyMap, k: &[usize], p: &[f64]) -> Result<Option<Vec<f64>>, MapError> {
    match map {
        AnyMap::Line(m) => {
            check_dim(p, 1)?;
            Ok(m.derivatives(p[0], k[0])?.map(|d| vec![d[k[0]]]))
        }
        AnyMap::Plane(m) => {
            check_dim(p, 2)?;
            if let PlaneMap::Cusp(c) = m {
                if !(p[0] > 0.0 && p[1] > 0.0 && p[1] < c.height(p[0])) {
                    return Err(MapError::Domain(format!("({}, {}) is outside the cusp", p[0], p[1])));
                }
                return Ok(Some(c.partial(p[0], p[1], k[0], k[1]).to_vec()));
            }
            let z = Complex64::new(p[0], p[1]);
            let n = k[0] + k[1];
            Ok(m.complex_derivative(z, n)?.map(|d| {
                let w = d * Complex64::i().powu(k[1] as u32);
                vec![w.re, w.im]
            }))
        }
    }
}

/// Jacobian matrix `[[dx phi1, dy phi1], [dx phi2, dy phi2]]` of a plane map.
pub fn jacobian(map: &PlaneMap, p: Point2, boundary_distance: Option<f64>) -> Result<[[f64; 2]; 2], MapError> {
    let any = AnyMap::Plane(map.clone());
    let dx = map_derivative(&any, &[1, 0], &[p.x, p.y], boundary_distance)?.value;
    let dy = map_derivative(&any, &[0, 1], &[p.x, p.y], boundary_distance)?.value;
    Ok([[dx[0], dy[0]], [dx[1], dy[1]]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LengthRule;
    use crate::numeric::Polynomial;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reciprocal() -> AnyMap {
        make_mobius(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap().into()
    }

    #[test]
    fn reciprocal_closed_form() {
        let m = reciprocal();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p: [f64; 2] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if r < 0.1 {
                continue;
            }
            for n in 1..=4 {
                let d = map_derivative(&m, &[n, 0], &p, None).unwrap();
                assert_eq!(d.mode, DerivativeMode::Exact);
                let modulus = d.value[0].hypot(d.value[1]);
                let expected = crate::numeric::factorial(n) / r.powi(n as i32 + 1);
                assert!((modulus / expected - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn closed_forms_match_differences() {
        let maps: Vec<(AnyMap, [f64; 2])> = vec![
            (reciprocal(), [0.7, -0.4]),
            (make_sqrt_branch(0.0, c(-1.0, 0.0), c(0.0, 1.0)).unwrap().into(), [-0.3, 0.5]),
            (PlaneMap::Square.into(), [0.3, 0.9]),
            (PlaneMap::PlanarExp.into(), [0.2, 1.1]),
        ];
        for (m, p) in maps {
            let AnyMap::Plane(pm) = &m else { unreachable!() };
            let fd_map: AnyMap = PlaneMap::Composition { maps: vec![pm.clone()] }.into();
            for k in [[1, 0], [0, 1], [2, 0], [1, 1], [1, 2], [0, 3]] {
                let exact = map_derivative(&m, &k, &p, Some(0.05)).unwrap();
                let fd = map_derivative(&fd_map, &k, &p, Some(0.05)).unwrap();
                assert_eq!(fd.mode, DerivativeMode::FiniteDifference);
                let scale = exact.value[0].hypot(exact.value[1]).max(1.0);
                for i in 0..2 {
                    assert!((exact.value[i] - fd.value[i]).abs() < 1e-5 * scale, "{pm:?} {k:?}: {exact:?} vs {fd:?}");
                }
            }
        }
    }

    #[test]
    fn identity_derivatives() {
        let m: AnyMap = make_identity().into();
        assert_eq!(map_derivative(&m, &[1, 0], &[0.3, 0.2], None).unwrap().value, vec![1.0, 0.0]);
        assert_eq!(map_derivative(&m, &[0, 1], &[0.3, 0.2], None).unwrap().value, vec![0.0, 1.0]);
        assert_eq!(map_derivative(&m, &[1, 1], &[0.3, 0.2], None).unwrap().value, vec![0.0, 0.0]);
        assert_eq!(map_derivative(&m, &[0, 3], &[0.3, 0.2], None).unwrap().value, vec![0.0, 0.0]);
    }

    #[test]
    fn cusp_tail_vertical_derivative() {
        let p = Polynomial::new(vec![0.0, 1.0]);
        let m: AnyMap = make_cusp_map(p).unwrap().into();
        let d = map_derivative(&m, &[0, 1], &[5.0, 1e-3], None).unwrap();
        assert_eq!(d.value[1], 5f64.exp());
        assert!(map_derivative(&m, &[0, 1], &[5.0, 1.0], None).is_err());
    }

    #[test]
    fn order_limit_and_warning() {
        let m = reciprocal();
        assert!(matches!(map_derivative(&m, &[4, 3], &[1.0, 1.0], None), Err(MapError::Incompatible(_))));
        let fd: AnyMap = PlaneMap::Composition { maps: vec![PlaneMap::Square] }.into();
        let r = map_derivative(&fd, &[3, 0], &[1.0, 1.0], Some(1e-4)).unwrap();
        assert!(r.warning.is_some());
        assert!(map_derivative(&fd, &[1, 0], &[1.0, 1.0], Some(0.5)).unwrap().warning.is_none());
    }

    #[test]
    fn compose_order_and_compatibility() {
        let z0 = c(0.5, 0.25);
        let shift = make_mobius(c(1.0, 0.0), -z0, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let recip = make_mobius(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let m = compose(vec![shift.into(), recip.into()]).unwrap();
        let z = c(1.5, -0.5);
        let q = m.apply(&[z.re, z.im]).unwrap();
        let expected = 1.0 / (z - z0);
        assert!((q[0] - expected.re).abs() < 1e-15 && (q[1] - expected.im).abs() < 1e-15);

        let sq = compose(vec![make_sqrt_branch(0.0, c(-1.0, 0.0), c(0.0, 1.0)).unwrap().into(), PlaneMap::Square.into()]).unwrap();
        let q = sq.apply(&[-0.4, 0.3]).unwrap();
        assert!((q[0] + 0.4).abs() < 1e-15 && (q[1] - 0.3).abs() < 1e-15);

        let line = make_interval_linear_map(LengthRule::Constant { value: 1.0 }, LengthRule::InversePower { power: 2.0 }, 5).unwrap();
        assert!(matches!(compose(vec![line.into(), PlaneMap::Square.into()]), Err(MapError::Incompatible(_))));
    }

    #[test]
    fn line_derivatives() {
        let line: AnyMap = make_interval_linear_map(LengthRule::Constant { value: 1.0 }, LengthRule::InversePower { power: 2.0 }, 5)
            .unwrap()
            .into();
        assert_eq!(map_derivative(&line, &[1], &[3.5], None).unwrap().value, vec![1.0 / 9.0]);
        assert_eq!(map_derivative(&line, &[2], &[3.5], None).unwrap().value, vec![0.0]);
        let log: AnyMap = make_exp_log().inverse().into();
        let composed = compose(vec![log.clone()]).unwrap();
        for k in 1..=3 {
            let e = map_derivative(&log, &[k], &[2.0], Some(1.0)).unwrap().value[0];
            let f = map_derivative(&composed, &[k], &[2.0], Some(1.0)).unwrap().value[0];
            assert!((e - f).abs() < 1e-5 * e.abs());
        }
    }

    #[test]
    fn serde_round_trip() {
        let maps: Vec<AnyMap> = vec![reciprocal(), make_exp_log().into(), make_cantor_map(4).unwrap().into(), PlaneMap::Square.into()];
        for m in maps {
            let s = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<AnyMap>(&s).unwrap(), m, "{s}");
        }
    }
}
