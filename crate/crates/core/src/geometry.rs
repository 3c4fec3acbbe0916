//! Homogeneous roto-translations.
//!
//! A [`Transform`] is stored as a 3x3 rotation plus a translation and stands
//! for the 4x4 matrix `[[R, p], [0, 1]]`. `T(F_i, F_j)` reads "pose of frame
//! `j` expressed in frame `i`", so path products compose left to right.

use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use thiserror::Error;

/// Rotation drift above which `compose` projects back onto SO(3).
pub const ORTHONORMAL_DRIFT: f64 = 1e-9;

/// Drift accepted when importing matrices from text before projecting.
pub const IMPORT_DRIFT: f64 = 1e-6;

// libm shims; the crate is no_std.
#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("bottom row of homogeneous matrix must be (0, 0, 0, 1)")]
    NotHomogeneous,
    #[error("rotation block is not orthonormal (drift {drift:e})")]
    NotOrthonormal { drift: f64 },
    #[error("rotation block is a reflection (det {det})")]
    Reflection { det: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        sqrt(self.dot(self))
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn from_diagonal(d: Vec3) -> Mat3 {
        Mat3([[d.x, 0.0, 0.0], [0.0, d.y, 0.0], [0.0, 0.0, d.z]])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(o.0.iter().flatten())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Inverse of a nonsingular matrix via the adjugate.
    pub fn inverse(&self) -> Option<Mat3> {
        let det = self.det();
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = Mat3([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj.scale(1.0 / det))
    }

    /// Largest entry of `|Mᵀ M − I|`.
    pub fn orthonormal_drift(&self) -> f64 {
        (self.transpose() * *self).max_abs_diff(&Mat3::IDENTITY)
    }

    /// Orthogonal polar factor by Newton iteration `X ← (X + X⁻ᵀ) / 2`.
    pub fn polar_orthonormalize(&self) -> Option<Mat3> {
        let mut x = *self;
        for _ in 0..32 {
            let inv_t = x.inverse()?.transpose();
            let next = (x + inv_t).scale(0.5);
            let delta = next.max_abs_diff(&x);
            x = next;
            if delta < 1e-15 {
                break;
            }
        }
        Some(x)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for (a, b) in out.0.iter_mut().flatten().zip(o.0.iter().flatten()) {
            *a += b;
        }
        out
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let a = &self.0;
        let b = &o.0;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3(out)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(v)
    }
}

/// Kind of single-axis joint motion. The axis is always local z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotionKind {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    rotation: Mat3,
    translation: Vec3,
}

/// A transform read as an absolute placement in world coordinates.
pub type Pose = Transform;

impl Default for Transform {
    fn default() -> Self {
        Transform::identity()
    }
}

impl Transform {
    pub const fn identity() -> Self {
        Transform { rotation: Mat3::IDENTITY, translation: Vec3::ZERO }
    }

    /// Builds a transform from parts the caller guarantees to be a proper rotation.
    pub const fn from_parts_unchecked(rotation: Mat3, translation: Vec3) -> Self {
        Transform { rotation, translation }
    }

    /// Validates the rotation block, projecting it onto SO(3) when it drifts
    /// by more than [`ORTHONORMAL_DRIFT`] but less than [`IMPORT_DRIFT`].
    pub fn from_parts(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        if rotation.0.iter().flatten().any(|x| !x.is_finite()) || !translation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let det = rotation.det();
        if det <= 0.0 {
            return Err(GeometryError::Reflection { det });
        }
        let drift = rotation.orthonormal_drift();
        if drift > IMPORT_DRIFT {
            return Err(GeometryError::NotOrthonormal { drift });
        }
        let rotation = if drift > ORTHONORMAL_DRIFT {
            rotation.polar_orthonormalize().ok_or(GeometryError::NotOrthonormal { drift })?
        } else {
            rotation
        };
        Ok(Transform { rotation, translation })
    }

    /// Parses a row-major 4x4 homogeneous matrix.
    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Result<Self, GeometryError> {
        let bottom = m[3];
        if bottom.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if bottom[0].abs() > ORTHONORMAL_DRIFT
            || bottom[1].abs() > ORTHONORMAL_DRIFT
            || bottom[2].abs() > ORTHONORMAL_DRIFT
            || (bottom[3] - 1.0).abs() > ORTHONORMAL_DRIFT
        {
            return Err(GeometryError::NotHomogeneous);
        }
        let rotation = Mat3([
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]);
        Transform::from_parts(rotation, Vec3::new(m[0][3], m[1][3], m[2][3]))
    }

    pub fn from_row_major(v: &[f64; 16]) -> Result<Self, GeometryError> {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row.copy_from_slice(&v[4 * i..4 * i + 4]);
        }
        Transform::from_matrix(&m)
    }

    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let r = &self.rotation.0;
        let p = self.translation;
        [
            [r[0][0], r[0][1], r[0][2], p.x],
            [r[1][0], r[1][1], r[1][2], p.y],
            [r[2][0], r[2][1], r[2][2], p.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let m = self.to_matrix();
        let mut out = [0.0; 16];
        for (i, row) in m.iter().enumerate() {
            out[4 * i..4 * i + 4].copy_from_slice(row);
        }
        out
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn from_translation(p: Vec3) -> Self {
        Transform { rotation: Mat3::IDENTITY, translation: p }
    }

    pub fn translate(x: f64, y: f64, z: f64) -> Self {
        Transform::from_translation(Vec3::new(x, y, z))
    }

    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        Transform::from_parts_unchecked(Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]), Vec3::ZERO)
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        Transform::from_parts_unchecked(Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]), Vec3::ZERO)
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = (sin(angle), cos(angle));
        Transform::from_parts_unchecked(Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]), Vec3::ZERO)
    }

    /// Rotation about a unit axis (Rodrigues).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n < 1e-300 {
            return Transform::identity();
        }
        let k = axis * (1.0 / n);
        let (s, c) = (sin(angle), cos(angle));
        let t = 1.0 - c;
        let rot = Mat3([
            [t * k.x * k.x + c, t * k.x * k.y - s * k.z, t * k.x * k.z + s * k.y],
            [t * k.x * k.y + s * k.z, t * k.y * k.y + c, t * k.y * k.z - s * k.x],
            [t * k.x * k.z - s * k.y, t * k.y * k.z + s * k.x, t * k.z * k.z + c],
        ]);
        Transform::from_parts_unchecked(rot, Vec3::ZERO)
    }

    /// Fixed-axis roll/pitch/yaw: `R = Rz(yaw) · Ry(pitch) · Rx(roll)`.
    pub fn from_rpy(roll: f64, pitch: f64, yaw: f64) -> Self {
        let (sr, cr) = (sin(roll), cos(roll));
        let (sp, cp) = (sin(pitch), cos(pitch));
        let (sy, cy) = (sin(yaw), cos(yaw));
        let rot = Mat3([
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]);
        Transform::from_parts_unchecked(rot, Vec3::ZERO)
    }

    /// Inverse of [`Transform::from_rpy`]. At the pitch singularity roll is pinned to 0.
    pub fn to_rpy(&self) -> [f64; 3] {
        let r = &self.rotation.0;
        let cp = sqrt(r[0][0] * r[0][0] + r[1][0] * r[1][0]);
        let pitch = atan2(-r[2][0], cp);
        if cp > 1e-10 {
            [atan2(r[2][1], r[2][2]), pitch, atan2(r[1][0], r[0][0])]
        } else {
            // R = Rz(yaw) Ry(±π/2) with roll folded into yaw.
            [0.0, pitch, atan2(-r[0][1], r[1][1])]
        }
    }

    pub fn with_translation(mut self, p: Vec3) -> Self {
        self.translation = p;
        self
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Transform) -> Transform {
        let rotation = self.rotation * other.rotation;
        let translation = self.rotation.mul_vec(other.translation) + self.translation;
        let rotation = if rotation.orthonormal_drift() > ORTHONORMAL_DRIFT {
            rotation.polar_orthonormalize().unwrap_or(rotation)
        } else {
            rotation
        };
        Transform { rotation, translation }
    }

    /// Analytic inverse `(Rᵀ, −Rᵀ p)`.
    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform { rotation: rt, translation: -(rt.mul_vec(self.translation)) }
    }

    /// `R_x(π)`: the transition between two mated connector frames.
    pub fn connection_flip() -> Transform {
        Transform::from_parts_unchecked(
            Mat3([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]),
            Vec3::ZERO,
        )
    }

    /// Displacement `q` of a joint acting along or about local z.
    pub fn joint_motion(kind: MotionKind, q: f64) -> Transform {
        match kind {
            MotionKind::Revolute => Transform::rot_z(q),
            MotionKind::Prismatic => Transform::translate(0.0, 0.0, q),
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.mul_vec(v)
    }

    /// Largest absolute entrywise difference of the 4x4 matrices.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        self.rotation
            .max_abs_diff(&other.rotation)
            .max((self.translation - other.translation).max_abs())
    }

    pub fn approx_eq(&self, other: &Transform, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Rotation vector (axis times angle) of the rotation block.
    pub fn rotation_vector(&self) -> Vec3 {
        rotation_log(&self.rotation)
    }

    /// Geodesic angle of `selfᵀ · other` in radians.
    pub fn rotation_angle_to(&self, other: &Transform) -> f64 {
        let rel = self.rotation.transpose() * other.rotation;
        rotation_angle(&rel)
    }
}

impl Mul for Transform {
    type Output = Transform;
    fn mul(self, o: Transform) -> Transform {
        self.compose(&o)
    }
}

impl Mul for &Transform {
    type Output = Transform;
    fn mul(self, o: &Transform) -> Transform {
        self.compose(o)
    }
}

fn skew_part(r: &Mat3) -> Vec3 {
    let m = &r.0;
    Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1])
}

pub(crate) fn rotation_angle(r: &Mat3) -> f64 {
    let s = skew_part(r).norm() * 0.5;
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    atan2(s, c)
}

pub(crate) fn rotation_log(r: &Mat3) -> Vec3 {
    let w = skew_part(r);
    let s = w.norm() * 0.5;
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = atan2(s, c);
    if s > 1e-7 || c > 0.0 {
        if s < 1e-12 {
            return w * 0.5;
        }
        return w * (angle / (2.0 * s));
    }
    // Near π the skew part vanishes; recover the axis from the symmetric part.
    let m = &r.0;
    let k = (0..3)
        .max_by(|&a, &b| m[a][a].partial_cmp(&m[b][b]).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    let denom = 1.0 - c;
    let ak = sqrt(((m[k][k] - c) / denom).max(0.0));
    let mut axis = [0.0; 3];
    for (j, a) in axis.iter_mut().enumerate() {
        *a = if j == k { ak } else { (m[k][j] + m[j][k]) / (2.0 * denom * ak) };
    }
    let mut axis = Vec3::from_array(axis);
    if axis.dot(w) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn arb_transform() -> impl Strategy<Value = Transform> {
        (
            -PI..PI,
            -PI..PI,
            -PI..PI,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
        )
            .prop_map(|(r, p, y, a, b, c)| Transform::from_rpy(r, p, y).with_translation(Vec3::new(a, b, c)))
    }

    /// Plain 4x4 product as an oracle.
    fn matmul4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    fn max_diff4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
        a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_and_laws() {
        let id = Transform::identity();
        assert_eq!(*id.rotation(), Mat3::IDENTITY);
        assert_eq!(id.translation(), Vec3::ZERO);
        let t = Transform::from_rpy(0.3, -0.2, 1.1).with_translation(Vec3::new(1.0, -2.0, 0.5));
        assert!(id.compose(&t).approx_eq(&t, 0.0));
        assert!(id.inverse().approx_eq(&id, 0.0));
    }

    #[test]
    fn compose_examples() {
        let full = Transform::rot_x(PI).compose(&Transform::rot_x(PI));
        assert!(full.approx_eq(&Transform::identity(), 1e-15));

        let t = Transform::translate(1.0, 0.0, 0.0).compose(&Transform::translate(0.0, 2.0, 0.0));
        assert_eq!(t.translation(), Vec3::new(1.0, 2.0, 0.0));

        // rot_x(π/2) · translate(0,1,0): by hand the rotated y axis is z.
        let t = Transform::rot_x(FRAC_PI_2).compose(&Transform::translate(0.0, 1.0, 0.0));
        let expected = matmul4(&Transform::rot_x(FRAC_PI_2).to_matrix(), &Transform::translate(0.0, 1.0, 0.0).to_matrix());
        assert!(max_diff4(&t.to_matrix(), &expected) < 1e-15);
        assert!((t.translation() - Vec3::new(0.0, 0.0, 1.0)).max_abs() < 1e-15);
        assert!(t.rotation().max_abs_diff(Transform::rot_x(FRAC_PI_2).rotation()) < 1e-15);
    }

    #[test]
    fn invert_examples() {
        let t = Transform::translate(1.0, 2.0, 3.0).inverse();
        assert_eq!(t.translation(), Vec3::new(-1.0, -2.0, -3.0));
        assert!(Transform::rot_x(PI).inverse().approx_eq(&Transform::rot_x(PI), 1e-15));
    }

    #[test]
    fn connection_flip_examples() {
        let f = Transform::connection_flip();
        assert_eq!(f.rotation().0, [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);
        assert_eq!(f.translation(), Vec3::ZERO);
        assert!(f.compose(&f).approx_eq(&Transform::identity(), 0.0));
        assert_eq!(f.transform_vector(Vec3::Z), Vec3::new(0.0, 0.0, -1.0));
        assert!(f.rotation().orthonormal_drift() == 0.0);
    }

    #[test]
    fn joint_motion_examples() {
        assert!(Transform::joint_motion(MotionKind::Revolute, 0.0).approx_eq(&Transform::identity(), 0.0));
        assert!(Transform::joint_motion(MotionKind::Prismatic, 0.0).approx_eq(&Transform::identity(), 0.0));
        assert_eq!(Transform::joint_motion(MotionKind::Prismatic, 0.5).translation(), Vec3::new(0.0, 0.0, 0.5));
        let r = Transform::joint_motion(MotionKind::Revolute, FRAC_PI_2);
        // Rz(π/2) = [[0,-1,0],[1,0,0],[0,0,1]]
        let oracle = Mat3([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(r.rotation().max_abs_diff(&oracle) < 1e-15);
        assert!((r.transform_vector(Vec3::X) - Vec3::Y).max_abs() < 1e-15);
    }

    #[test]
    fn approx_eq_examples() {
        let t = Transform::rot_z(0.4).with_translation(Vec3::new(0.1, 0.2, 0.3));
        assert!(t.approx_eq(&t, 1e-12));
        assert!(!Transform::identity().approx_eq(&Transform::translate(1e-6, 0.0, 0.0), 1e-9));
    }

    #[test]
    fn from_matrix_rejects_and_projects() {
        let mut m = Transform::identity().to_matrix();
        m[3][2] = 0.5;
        assert_eq!(Transform::from_matrix(&m), Err(GeometryError::NotHomogeneous));

        let mut m = Transform::identity().to_matrix();
        m[0][0] = -1.0;
        assert!(matches!(Transform::from_matrix(&m), Err(GeometryError::Reflection { .. })));

        let mut m = Transform::identity().to_matrix();
        m[0][1] = 0.1;
        assert!(matches!(Transform::from_matrix(&m), Err(GeometryError::NotOrthonormal { .. })));

        // Four-digit cos(30°) is rejected, seven digits are projected back onto SO(3).
        let rz30 = |c: f64| [[c, -0.5, 0.0, 0.0], [0.5, c, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert!(Transform::from_matrix(&rz30(0.8660)).is_err());
        let t = Transform::from_matrix(&rz30(0.866_025_4)).unwrap();
        assert!(t.rotation().orthonormal_drift() < 1e-14);
        assert!(t.approx_eq(&Transform::rot_z(PI / 6.0), 1e-8));
    }

    #[test]
    fn rpy_single_axis_and_singular() {
        let [r, p, y] = Transform::rot_x(PI).to_rpy();
        assert!((r.abs() - PI).abs() < 1e-15 && p == 0.0 && y.abs() < 1e-15);
        for pitch in [FRAC_PI_2, -FRAC_PI_2] {
            let t = Transform::rot_z(0.3).compose(&Transform::rot_y(pitch)).compose(&Transform::rot_x(0.2));
            let [r, p, y] = t.to_rpy();
            assert_eq!(r, 0.0);
            assert!(Transform::from_rpy(r, p, y).approx_eq(&t, 1e-10));
        }
    }

    #[test]
    fn rotation_log_near_pi() {
        for axis in [Vec3::X, Vec3::Y, Vec3::new(1.0, 2.0, -0.5)] {
            for angle in [PI, PI - 1e-9, PI - 1e-4, 1e-9, 0.5] {
                let t = Transform::from_axis_angle(axis, angle);
                let v = t.rotation_vector();
                let back = Transform::from_axis_angle(v, v.norm());
                assert!(back.approx_eq(&t, 1e-8), "axis {axis:?} angle {angle}");
                assert!((Transform::identity().rotation_angle_to(&t) - angle).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn anticommutativity(t in arb_transform()) {
            prop_assert!(t.compose(&t.inverse()).approx_eq(&Transform::identity(), 1e-12));
            prop_assert!(t.inverse().compose(&t).approx_eq(&Transform::identity(), 1e-12));
        }

        #[test]
        fn associativity(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!(l.approx_eq(&r, 1e-10));
        }

        #[test]
        fn inverse_of_product(a in arb_transform(), b in arb_transform()) {
            let lhs = a.compose(&b).inverse();
            let rhs = b.inverse().compose(&a.inverse());
            prop_assert!(lhs.approx_eq(&rhs, 1e-12));
        }

        #[test]
        fn compose_matches_plain_matrix_product(a in arb_transform(), b in arb_transform()) {
            let oracle = matmul4(&a.to_matrix(), &b.to_matrix());
            prop_assert!(max_diff4(&a.compose(&b).to_matrix(), &oracle) < 1e-12);
        }

        #[test]
        fn rpy_round_trip(t in arb_transform()) {
            let [r, p, y] = t.to_rpy();
            prop_assert!(Transform::from_rpy(r, p, y).rotation().max_abs_diff(t.rotation()) < 1e-10);
        }

        #[test]
        fn polar_projection_is_idempotent_on_rotations(t in arb_transform()) {
            let p = t.rotation().polar_orthonormalize().unwrap();
            prop_assert!(p.max_abs_diff(t.rotation()) < 1e-14);
        }
    }
}
