use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CuspMapRecord, MapError};
use crate::geometry::{ClosedCurve, GeometryError, Point2};
use crate::numeric::{factorial, Polynomial};

/// Explicit maps of the plane, identified with `C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum PlaneMap {
    /// `z -> (a z + b) / (c z + d)`.
    Mobius { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
    /// `z -> z^2`.
    Square,
    /// The square root on the plane cut along the ray of angle `cut_angle`,
    /// with the sign fixed by `g(base_point) = base_value`.
    SqrtBranch { cut_angle: f64, base_point: Complex64, base_value: Complex64 },
    Cusp(CuspMapRecord),
    /// `(x, y) -> (e^x cos y, e^x sin y)`.
    PlanarExp,
    /// `z -> z |z|^exponent`.
    RadialPower { exponent: f64 },
    /// Applied in list order: `maps[0]` first.
    Composition { maps: Vec<PlaneMap> },
    /// The inverse of a map that has no closed-form inverse family member.
    Inverse { map: Box<PlaneMap> },
}

pub fn make_mobius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<PlaneMap, MapError> {
    let det = a * d - b * c;
    if det.norm() == 0.0 || !det.is_finite() {
        return Err(MapError::Construction("Mobius coefficients have ad - bc = 0".into()));
    }
    Ok(PlaneMap::Mobius { a, b, c, d })
}

pub fn make_identity() -> PlaneMap {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    PlaneMap::Mobius { a: one, b: zero, c: zero, d: one }
}

pub fn make_sqrt_branch(cut_angle: f64, base_point: Complex64, base_value: Complex64) -> Result<PlaneMap, MapError> {
    let map = PlaneMap::SqrtBranch { cut_angle, base_point, base_value };
    if (base_value * base_value - base_point).norm() > 1e-12 * base_point.norm().max(1.0) {
        return Err(MapError::Construction("base value does not square to the base point".into()));
    }
    if on_cut(cut_angle, base_point) {
        return Err(MapError::Construction("base point lies on the cut".into()));
    }
    Ok(map)
}

pub fn make_cusp_map(p: Polynomial) -> Result<PlaneMap, MapError> {
    Ok(PlaneMap::Cusp(CuspMapRecord::new(p)?))
}

fn on_cut(cut_angle: f64, z: Complex64) -> bool {
    let w = z * Complex64::from_polar(1.0, -cut_angle);
    z.norm() == 0.0 || (w.im.abs() <= 1e-15 * w.norm() && w.re > 0.0)
}

/// Root with argument in `(0, 2 pi)` measured from the cut, before sign selection.
fn raw_sqrt(cut_angle: f64, z: Complex64) -> Complex64 {
    let w = z * Complex64::from_polar(1.0, -cut_angle);
    let mut arg = w.im.atan2(w.re);
    if arg <= 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    Complex64::from_polar(w.norm().sqrt(), 0.5 * arg) * Complex64::from_polar(1.0, 0.5 * cut_angle)
}

pub(crate) fn cplx(p: Point2) -> Complex64 {
    p.to_complex()
}

pub(crate) fn pt(z: Complex64) -> Point2 {
    Point2::from_complex(z)
}

impl PlaneMap {
    pub fn apply(&self, p: Point2) -> Result<Point2, MapError> {
        let z = cplx(p);
        let out = match self {
            PlaneMap::Mobius { a, b, c, d } => {
                let den = c * z + d;
                if den.norm() == 0.0 {
                    return Err(MapError::Pole);
                }
                pt((a * z + b) / den)
            }
            PlaneMap::Square => pt(z * z),
            PlaneMap::SqrtBranch { cut_angle, base_point, base_value } => {
                if on_cut(*cut_angle, z) {
                    return Err(MapError::Branch(format!("{z} lies on the cut")));
                }
                let sign = if (raw_sqrt(*cut_angle, *base_point) - base_value).norm() <= base_value.norm() { 1.0 } else { -1.0 };
                pt(raw_sqrt(*cut_angle, z) * sign)
            }
            PlaneMap::Cusp(c) => {
                let (x, y) = c.apply(p.x, p.y);
                Point2::new(x, y)
            }
            PlaneMap::PlanarExp => pt(z.exp()),
            PlaneMap::RadialPower { exponent } => {
                let r = z.norm();
                if r == 0.0 {
                    Point2::ORIGIN
                } else {
                    pt(z * r.powf(*exponent))
                }
            }
            PlaneMap::Composition { maps } => {
                let mut q = p;
                for m in maps {
                    q = m.apply(q)?;
                }
                q
            }
            PlaneMap::Inverse { map } => map.apply_inverse(p)?,
        };
        if !out.is_finite() {
            return Err(MapError::Numerical(format!("non-finite image of {p:?}")));
        }
        Ok(out)
    }

    pub fn apply_inverse(&self, p: Point2) -> Result<Point2, MapError> {
        match self {
            PlaneMap::Mobius { .. } | PlaneMap::RadialPower { .. } | PlaneMap::SqrtBranch { .. } => {
                self.inverse()?.apply(p)
            }
            PlaneMap::Square => Err(MapError::NotInvertible("z^2 is two-to-one".into())),
            PlaneMap::Cusp(c) => {
                let (u, v) = c.apply_inverse(p.x, p.y)?;
                Ok(Point2::new(u, v))
            }
            PlaneMap::PlanarExp => {
                let z = cplx(p);
                if z.norm() == 0.0 {
                    return Err(MapError::Domain("log of zero".into()));
                }
                Ok(pt(z.ln()))
            }
            PlaneMap::Composition { maps } => {
                let mut q = p;
                for m in maps.iter().rev() {
                    q = m.apply_inverse(q)?;
                }
                Ok(q)
            }
            PlaneMap::Inverse { map } => map.apply(p),
        }
    }

    /// The inverse as a map value; exact family members where they exist.
    pub fn inverse(&self) -> Result<PlaneMap, MapError> {
        Ok(match self {
            PlaneMap::Mobius { a, b, c, d } => PlaneMap::Mobius { a: *d, b: -b, c: -c, d: *a },
            PlaneMap::RadialPower { exponent } => {
                PlaneMap::RadialPower { exponent: -exponent / (1.0 + exponent) }
            }
            PlaneMap::SqrtBranch { .. } => PlaneMap::Square,
            PlaneMap::Square => return Err(MapError::NotInvertible("z^2 is two-to-one".into())),
            PlaneMap::Composition { maps } => {
                PlaneMap::Composition { maps: maps.iter().rev().map(|m| m.inverse()).collect::<Result<_, _>>()? }
            }
            PlaneMap::Inverse { map } => (**map).clone(),
            other => PlaneMap::Inverse { map: Box::new(other.clone()) },
        })
    }

    /// Whether `map_derivative` has a closed form for this map.
    pub fn has_exact_derivatives(&self) -> bool {
        matches!(
            self,
            PlaneMap::Mobius { .. } | PlaneMap::Square | PlaneMap::SqrtBranch { .. } | PlaneMap::Cusp(_) | PlaneMap::PlanarExp
        )
    }

    /// Complex derivative `f^{(n)}(z)` for the holomorphic families.
    pub fn complex_derivative(&self, z: Complex64, n: usize) -> Result<Option<Complex64>, MapError> {
        if n == 0 {
            return self.apply(pt(z)).map(|q| Some(cplx(q)));
        }
        Ok(match self {
            PlaneMap::Mobius { a, b, c, d } => {
                let den = c * z + d;
                if den.norm() == 0.0 {
                    return Err(MapError::Pole);
                }
                let det = a * d - b * c;
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                Some(det * c.powu(n as u32 - 1) * factorial(n) * sign / den.powu(n as u32 + 1))
            }
            PlaneMap::Square => Some(match n {
                1 => z * 2.0,
                2 => Complex64::new(2.0, 0.0),
                _ => Complex64::new(0.0, 0.0),
            }),
            PlaneMap::SqrtBranch { .. } => {
                let g = cplx(self.apply(pt(z))?);
                // g^{(n)} = (1/2)(1/2 - 1)...(1/2 - n + 1) g / z^n
                let coeff: f64 = (0..n).map(|j| 0.5 - j as f64).product();
                Some(g * coeff / z.powu(n as u32))
            }
            PlaneMap::PlanarExp => Some(z.exp()),
            _ => None,
        })
    }
}

/// Preimage of a quasiarc from the origin under `z -> z^2`: both square roots
/// of every vertex, joined through `0` into one symmetric polyline.
pub fn sqrt_preimage_curve(arc: &ClosedCurve) -> Result<ClosedCurve, GeometryError> {
    arc.validate()?;
    if arc.closed || arc.vertices[0] != Point2::ORIGIN {
        return Err(GeometryError::Validation("quasiarc must be an open polyline starting at the origin".into()));
    }
    // continue the root along the arc so consecutive roots stay close
    let mut roots: Vec<Complex64> = Vec::with_capacity(arc.vertices.len() - 1);
    for p in &arc.vertices[1..] {
        let r = p.to_complex().sqrt();
        let r = match roots.last() {
            Some(prev) if (r - prev).norm() > (-r - prev).norm() => -r,
            _ => r,
        };
        roots.push(r);
    }
    let mut pts: Vec<Point2> = roots.iter().rev().map(|r| Point2::from_complex(-r)).collect();
    pts.push(Point2::ORIGIN);
    pts.extend(roots.iter().map(|r| Point2::from_complex(*r)));
    let mut out = ClosedCurve::new(pts, false)?;
    out.window = arc.window;
    Ok(out)
}
