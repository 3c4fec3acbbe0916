//! Intersection tests between placed primitives.
//!
//! Cylinders are replaced by the capsule with the same radius and axis
//! segment, which contains the cylinder; tests therefore never miss a true
//! contact but may report one up to `radius` beyond a flat end cap.
//! Touching shapes count as intersecting.

use crate::geometry::{sqrt, Transform, Vec3};
use crate::module_model::Shape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
    /// Segment along local z from `-half_length` to `+half_length`, inflated by `radius`.
    Capsule { radius: f64, half_length: f64 },
}

impl Primitive {
    /// Collision stand-in for a geometry shape; meshes have none.
    pub fn from_shape(shape: &Shape) -> Option<Primitive> {
        match shape {
            Shape::Box { size } => Some(Primitive::Box { half_extents: *size * 0.5 }),
            Shape::Cylinder { radius, length } => Some(Primitive::Capsule { radius: *radius, half_length: length * 0.5 }),
            Shape::Sphere { radius } => Some(Primitive::Sphere { radius: *radius }),
            Shape::Mesh { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedPrimitive {
    pub primitive: Primitive,
    pub pose: Transform,
}

impl PlacedPrimitive {
    pub fn new(primitive: Primitive, pose: Transform) -> Self {
        PlacedPrimitive { primitive, pose }
    }

    /// The same primitive re-placed by `parent · self.pose`.
    pub fn placed_in(&self, parent: &Transform) -> PlacedPrimitive {
        PlacedPrimitive { primitive: self.primitive, pose: parent.compose(&self.pose) }
    }
}

pub fn intersects(a: &PlacedPrimitive, b: &PlacedPrimitive) -> bool {
    use Primitive::*;
    match (a.primitive, b.primitive) {
        (Sphere { radius: ra }, Sphere { radius: rb }) => {
            (a.pose.translation() - b.pose.translation()).norm() <= ra + rb
        }
        (Sphere { radius }, Box { half_extents }) => point_box_distance(a.pose.translation(), &b.pose, half_extents) <= radius,
        (Box { .. }, Sphere { .. }) => intersects(b, a),
        (Sphere { radius }, Capsule { radius: rc, half_length }) => {
            let (p, q) = capsule_segment(&b.pose, half_length);
            point_segment_distance(a.pose.translation(), p, q) <= radius + rc
        }
        (Capsule { .. }, Sphere { .. }) => intersects(b, a),
        (Capsule { radius: ra, half_length: ha }, Capsule { radius: rb, half_length: hb }) => {
            let (p1, q1) = capsule_segment(&a.pose, ha);
            let (p2, q2) = capsule_segment(&b.pose, hb);
            segment_segment_distance(p1, q1, p2, q2) <= ra + rb
        }
        (Box { half_extents: ha }, Box { half_extents: hb }) => boxes_overlap(&a.pose, ha, &b.pose, hb),
        (Capsule { radius, half_length }, Box { half_extents }) => {
            let (p, q) = capsule_segment(&a.pose, half_length);
            segment_box_distance(p, q, &b.pose, half_extents) <= radius
        }
        (Box { .. }, Capsule { .. }) => intersects(b, a),
    }
}

fn capsule_segment(pose: &Transform, half_length: f64) -> (Vec3, Vec3) {
    (pose.transform_point(Vec3::new(0.0, 0.0, -half_length)), pose.transform_point(Vec3::new(0.0, 0.0, half_length)))
}

/// Euclidean distance from `p` to a solid oriented box.
pub fn point_box_distance(p: Vec3, pose: &Transform, half: Vec3) -> f64 {
    let local = pose.inverse().transform_point(p);
    let d = Vec3::new(
        (local.x.abs() - half.x).max(0.0),
        (local.y.abs() - half.y).max(0.0),
        (local.z.abs() - half.z).max(0.0),
    );
    d.norm()
}

pub fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Closest distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let eps = 1e-18;
    let (s, t) = if a <= eps && e <= eps {
        (0.0, 0.0)
    } else if a <= eps {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(r);
        if e <= eps {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s = if denom > eps { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Distance from a segment to a solid box. The point-to-box distance is
/// convex along the segment, so a ternary search converges to the minimum.
pub fn segment_box_distance(p: Vec3, q: Vec3, pose: &Transform, half: Vec3) -> f64 {
    let inv = pose.inverse();
    let (lp, lq) = (inv.transform_point(p), inv.transform_point(q));
    let f = |t: f64| {
        let x = lp + (lq - lp) * t;
        let d = Vec3::new((x.x.abs() - half.x).max(0.0), (x.y.abs() - half.y).max(0.0), (x.z.abs() - half.z).max(0.0));
        d.dot(d)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let best = f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0));
    sqrt(best)
}

/// Separating-axis test for two oriented boxes.
pub fn boxes_overlap(pa: &Transform, ha: Vec3, pb: &Transform, hb: Vec3) -> bool {
    let ra = pa.rotation();
    let rb = pb.rotation();
    let axes_a = [ra.column(0), ra.column(1), ra.column(2)];
    let axes_b = [rb.column(0), rb.column(1), rb.column(2)];
    let d = pb.translation() - pa.translation();
    let project = |axis: Vec3, axes: &[Vec3; 3], h: Vec3| {
        h.x * axes[0].dot(axis).abs() + h.y * axes[1].dot(axis).abs() + h.z * axes[2].dot(axis).abs()
    };
    let separated = |axis: Vec3| {
        let n2 = axis.dot(axis);
        if n2 < 1e-20 {
            return false;
        }
        d.dot(axis).abs() > project(axis, &axes_a, ha) + project(axis, &axes_b, hb) + 1e-12 * sqrt(n2)
    };
    for i in 0..3 {
        if separated(axes_a[i]) || separated(axes_b[i]) {
            return false;
        }
    }
    for a in &axes_a {
        for b in &axes_b {
            if separated(a.cross(*b)) {
                return false;
            }
        }
    }
    true
}
