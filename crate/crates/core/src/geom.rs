//! Geometric primitives shared by the reconstruction pipeline.
//!
//! Positions and directions are plain `nalgebra` double-precision types.
//! Degeneracy is decided against [`EPS`] on squared norms; coordinates are
//! expected to be in a model-unit scale.

use std::f64::consts::TAU;

use crate::error::GeomError;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Point2 = nalgebra::Point2<f64>;

/// Degeneracy threshold applied to squared norms and side lengths.
pub const EPS: f64 = 1e-12;

/// Maximum deviation of a [`UnitNormal`] norm from one.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// A direction with Euclidean norm within `1 ± 1e-6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitNormal(Vec3);

impl UnitNormal {
    /// Normalizes `v`; fails when `v` is (numerically) zero or not finite.
    pub fn new_normalize(v: Vec3) -> Result<Self, GeomError> {
        let n2 = v.norm_squared();
        if !n2.is_finite() || n2 < EPS {
            return Err(GeomError::ZeroVector);
        }
        Ok(UnitNormal(v / n2.sqrt()))
    }

    /// Accepts `v` as-is when it is already unit length.
    pub fn try_from_unit(v: Vec3) -> Result<Self, GeomError> {
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GeomError::NotUnit(n));
        }
        Ok(UnitNormal(v))
    }

    pub fn x_axis() -> Self {
        UnitNormal(Vec3::x())
    }

    pub fn y_axis() -> Self {
        UnitNormal(Vec3::y())
    }

    pub fn z_axis() -> Self {
        UnitNormal(Vec3::z())
    }

    #[inline]
    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    #[inline]
    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    #[inline]
    pub fn dot(&self, other: &UnitNormal) -> f64 {
        self.0.dot(&other.0)
    }

    #[inline]
    pub fn flipped(self) -> Self {
        UnitNormal(-self.0)
    }
}

impl std::ops::Deref for UnitNormal {
    type Target = Vec3;

    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// Orthogonal projection of `p` onto the plane through `origin` with normal `normal`.
#[inline]
pub fn project_to_plane(p: &Point3, origin: &Point3, normal: &UnitNormal) -> Point3 {
    let d = p - origin;
    p - normal.as_vec() * d.dot(normal.as_vec())
}

/// Component of `v` lying in the plane with normal `normal`.
#[inline]
pub fn tangential(v: &Vec3, normal: &UnitNormal) -> Vec3 {
    v - normal.as_vec() * v.dot(normal.as_vec())
}

/// The unit reference direction used for angles about `normal`: the global
/// axis least aligned with `normal`, projected into the tangent plane.
pub fn reference_direction(normal: &UnitNormal) -> Vec3 {
    let a = normal.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    tangential(&axis, normal).normalize()
}

/// An orthonormal frame `(e1, e2)` spanning the plane with normal `normal`,
/// oriented so that `e1 × e2 = normal`.
pub fn tangent_frame(normal: &UnitNormal) -> (Vec3, Vec3) {
    let e1 = reference_direction(normal);
    let e2 = normal.as_vec().cross(&e1);
    (e1, e2)
}

/// Counterclockwise angle about `normal` from `reference` to the projection
/// of `p - origin`, in `[0, 2π)`.
pub fn plane_angle(
    p: &Point3,
    origin: &Point3,
    normal: &UnitNormal,
    reference: &Vec3,
) -> Result<f64, GeomError> {
    let d = tangential(&(p - origin), normal);
    if d.norm_squared() < EPS * EPS {
        return Err(GeomError::DegenerateProjection);
    }
    angle_in_frame(&d, normal, reference)
}

/// Same as [`plane_angle`] for an already tangential direction `d`.
#[inline]
pub(crate) fn angle_in_frame(d: &Vec3, normal: &UnitNormal, reference: &Vec3) -> Result<f64, GeomError> {
    let y_axis = normal.as_vec().cross(reference);
    let a = d.dot(&y_axis).atan2(d.dot(reference));
    Ok(wrap_angle(a))
}

/// Maps any finite angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A projected mesh edge: two 2D endpoints tagged with their vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub ids: [usize; 2],
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(ids: [usize; 2], a: Point2, b: Point2) -> Self {
        Segment2 { ids, a, b }
    }

    #[inline]
    fn shares_vertex(&self, other: &Segment2) -> bool {
        self.ids.iter().any(|i| other.ids.contains(i))
    }
}

/// Sign of the orientation of `(a, b, c)` with a relative zero band.
#[inline]
fn orient(a: &Point2, b: &Point2, c: &Point2) -> i8 {
    let ab = b - a;
    let ac = c - a;
    let det = ab.x * ac.y - ab.y * ac.x;
    let scale = ab.norm_squared().max(ac.norm_squared());
    if det.abs() <= EPS * scale {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    }
}

/// `c` lies within the bounding box of the collinear segment `a b`.
#[inline]
fn on_segment(a: &Point2, b: &Point2, c: &Point2) -> bool {
    c.x <= a.x.max(b.x) && c.x >= a.x.min(b.x) && c.y <= a.y.max(b.y) && c.y >= a.y.min(b.y)
}

/// Closed-segment intersection of two points pairs, ignoring vertex identity.
pub fn closed_segments_intersect(a1: &Point2, a2: &Point2, b1: &Point2, b2: &Point2) -> bool {
    let o1 = orient(a1, a2, b1);
    let o2 = orient(a1, a2, b2);
    let o3 = orient(b1, b2, a1);
    let o4 = orient(b1, b2, a2);
    if o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 {
        // general position, or one endpoint touching the other segment
        if o1 != 0 || o2 != 0 {
            return true;
        }
    }
    (o1 == 0 && on_segment(a1, a2, b1))
        || (o2 == 0 && on_segment(a1, a2, b2))
        || (o3 == 0 && on_segment(b1, b2, a1))
        || (o4 == 0 && on_segment(b1, b2, a2))
}

/// True iff the closed segments share a point, except that two segments
/// sharing an endpoint *vertex index* never count as intersecting.
/// Collinear overlap counts as an intersection.
pub fn segments_intersect_2d(s: &Segment2, t: &Segment2) -> bool {
    if s.shares_vertex(t) {
        return false;
    }
    closed_segments_intersect(&s.a, &s.b, &t.a, &t.b)
}

/// Interior angles at `p0`, `p1`, `p2`.
pub fn triangle_angles(p0: &Point3, p1: &Point3, p2: &Point3) -> Result<(f64, f64, f64), GeomError> {
    let a = (p1 - p2).norm();
    let b = (p0 - p2).norm();
    let c = (p0 - p1).norm();
    if a < EPS || b < EPS || c < EPS {
        return Err(GeomError::DegenerateTriangle);
    }
    let at = |from: &Point3, x: &Point3, y: &Point3| {
        let u = x - from;
        let v = y - from;
        // atan2 form stays accurate for angles near 0 and π
        u.cross(&v).norm().atan2(u.dot(&v))
    };
    let a0 = at(p0, p1, p2);
    let a1 = at(p1, p2, p0);
    let a2 = std::f64::consts::PI - a0 - a1;
    Ok((a0, a1, a2))
}
