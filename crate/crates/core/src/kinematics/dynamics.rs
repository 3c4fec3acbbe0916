//! Recursive Newton-Euler inverse dynamics, evaluated in world coordinates.

use alloc::vec;
use alloc::vec::Vec;

use super::{KinematicsError, RobotModel};
use crate::geometry::{MotionKind, Transform, Vec3};

/// Standard gravity along world `-z`.
pub const DEFAULT_GRAVITY: Vec3 = Vec3 { x: 0.0, y: 0.0, z: -9.81 };

impl RobotModel {
    /// Joint forces/torques realising `qdd` at state (`q`, `qd`) under `gravity`.
    pub fn inverse_dynamics(&self, q: &[f64], qd: &[f64], qdd: &[f64], gravity: Vec3) -> Result<Vec<f64>, KinematicsError> {
        self.check_dim(q)?;
        self.check_dim(qd)?;
        self.check_dim(qdd)?;
        let n = self.segments.len();
        let mut pose = Vec::with_capacity(n);
        let mut omega = Vec::with_capacity(n);
        let mut omega_dot = Vec::with_capacity(n);
        let mut acc = Vec::with_capacity(n);
        // Joint axis and point in world coordinates, per segment.
        let mut axes: Vec<Option<(Vec3, Vec3)>> = Vec::with_capacity(n);
        let base_acc = -gravity;

        for s in &self.segments {
            let (p_pose, w_p, wd_p, a_p) = match s.parent {
                Some(p) => (pose[p], omega[p], omega_dot[p], acc[p]),
                None => (self.base_pose, Vec3::ZERO, Vec3::ZERO, base_acc),
            };
            let pre = p_pose.compose(&s.pre);
            let (t, w, wd, axis, rate, accel, kind) = match &s.joint {
                Some(j) => {
                    let sign = if j.reversed { -1.0 } else { 1.0 };
                    let t = pre.compose(&j.transform(q[j.index])).compose(&s.post);
                    let axis = pre.transform_vector(Vec3::Z) * sign;
                    let (rate, accel) = (qd[j.index], qdd[j.index]);
                    match j.motion {
                        MotionKind::Revolute => {
                            let w = w_p + axis * rate;
                            let wd = wd_p + axis * accel + w_p.cross(axis * rate);
                            (t, w, wd, Some(axis), rate, accel, Some(j.motion))
                        }
                        MotionKind::Prismatic => (t, w_p, wd_p, Some(axis), rate, accel, Some(j.motion)),
                    }
                }
                None => (pre.compose(&s.post), w_p, wd_p, None, 0.0, 0.0, None),
            };
            let o_p = p_pose.translation();
            let o = t.translation();
            let a = match kind {
                Some(MotionKind::Revolute) => {
                    let pj = pre.translation();
                    rigid(a_p, wd_p, w_p, pj - o_p) + rigid(Vec3::ZERO, wd, w, o - pj)
                }
                Some(MotionKind::Prismatic) => {
                    let axis = axis.expect("movable joint has an axis");
                    rigid(a_p, wd_p, w_p, o - o_p) + w_p.cross(axis * rate) * 2.0 + axis * accel
                }
                None => rigid(a_p, wd_p, w_p, o - o_p),
            };
            axes.push(axis.map(|ax| (ax, pre.translation())));
            pose.push(t);
            omega.push(w);
            omega_dot.push(wd);
            acc.push(a);
        }

        // Net force and moment about the world origin carried by each subtree.
        let mut force = vec![Vec3::ZERO; n];
        let mut moment = vec![Vec3::ZERO; n];
        let mut tau = vec![0.0; self.dof()];
        for i in (0..n).rev() {
            let s = &self.segments[i];
            let t: &Transform = &pose[i];
            let m = s.inertia.mass;
            let c = t.rotation().mul_vec(s.inertia.com);
            let a_c = rigid(acc[i], omega_dot[i], omega[i], c);
            let r = *t.rotation();
            let i_w = r * s.inertia.tensor * r.transpose();
            let f = a_c * m;
            let nc = i_w.mul_vec(omega_dot[i]) + omega[i].cross(i_w.mul_vec(omega[i]));
            force[i] += f;
            moment[i] = moment[i] + nc + (t.translation() + c).cross(f);
            if let (Some(j), Some((axis, point))) = (&s.joint, axes[i]) {
                tau[j.index] = match j.motion {
                    MotionKind::Revolute => axis.dot(moment[i] - point.cross(force[i])),
                    MotionKind::Prismatic => axis.dot(force[i]),
                };
            }
            if let Some(p) = s.parent {
                let (fi, mi) = (force[i], moment[i]);
                force[p] += fi;
                moment[p] += mi;
            }
        }
        Ok(tau)
    }
}

/// Acceleration of a point at offset `r` on a rigid body.
fn rigid(a: Vec3, wd: Vec3, w: Vec3, r: Vec3) -> Vec3 {
    a + wd.cross(r) + w.cross(w.cross(r))
}
