//! Damped least-squares inverse kinematics with seeded random restarts.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{KinematicsError, RobotModel};
use crate::assembly::NodeRef;
use crate::geometry::{rotation_log, Pose, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkOptions {
    pub position_tolerance: f64,
    pub orientation_tolerance: f64,
    pub max_iterations: usize,
    /// Random restarts after the seeded attempt.
    pub restarts: usize,
    pub damping: f64,
    /// Per-iteration bound on `max |Δq|`.
    pub max_step: f64,
    pub rng_seed: u64,
}

impl Default for IkOptions {
    fn default() -> Self {
        IkOptions {
            position_tolerance: 1e-4,
            orientation_tolerance: 1e-3,
            max_iterations: 500,
            restarts: 10,
            damping: 1e-2,
            max_step: 0.5,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkResult {
    pub success: bool,
    /// Best configuration found; within joint limits.
    pub q: Vec<f64>,
    pub position_error: f64,
    pub orientation_error: f64,
}

fn pose_error(current: &Pose, target: &Pose) -> [f64; 6] {
    let p = target.translation() - current.translation();
    let r = rotation_log(&(*target.rotation() * current.rotation().transpose()));
    [p.x, p.y, p.z, r.x, r.y, r.z]
}

fn norms(e: &[f64; 6]) -> (f64, f64) {
    (Vec3::new(e[0], e[1], e[2]).norm(), Vec3::new(e[3], e[4], e[5]).norm())
}

/// Solves `A x = b` for symmetric positive definite `A` in place.
pub(crate) fn cholesky_solve(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for j in 0..6 {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = crate::geometry::sqrt(d);
        a[j][j] = d;
        for i in j + 1..6 {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..6 {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..6).rev() {
        for k in i + 1..6 {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Some(b)
}

impl RobotModel {
    /// Joint values placing `frame` at `target`. The first attempt starts at
    /// `seed`, restarts sample uniformly inside the limits.
    pub fn ik(&self, target: &Pose, frame: &NodeRef, seed: &[f64], opts: &IkOptions) -> Result<IkResult, KinematicsError> {
        self.fk(seed, frame)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
        let mut best: Option<IkResult> = None;
        for attempt in 0..=opts.restarts {
            let start = if attempt == 0 { seed.to_vec() } else { self.sample_configuration(&mut rng) };
            let r = self.ik_attempt(target, frame, start, opts)?;
            if r.success {
                return Ok(r);
            }
            let better = best.as_ref().is_none_or(|b| {
                r.position_error + r.orientation_error < b.position_error + b.orientation_error
            });
            if better {
                best = Some(r);
            }
        }
        Ok(best.expect("at least one attempt"))
    }

    fn ik_attempt(&self, target: &Pose, frame: &NodeRef, mut q: Vec<f64>, opts: &IkOptions) -> Result<IkResult, KinematicsError> {
        self.clamp_to_limits(&mut q);
        let lambda2 = opts.damping * opts.damping;
        let mut e = pose_error(&self.fk(&q, frame)?, target);
        for _ in 0..opts.max_iterations {
            let (ep, er) = norms(&e);
            if ep <= opts.position_tolerance && er <= opts.orientation_tolerance {
                break;
            }
            let jac = self.jacobian(&q, frame)?;
            let mut jjt = [[0.0; 6]; 6];
            for col in &jac {
                for r in 0..6 {
                    for c in 0..6 {
                        jjt[r][c] += col[r] * col[c];
                    }
                }
            }
            for (i, row) in jjt.iter_mut().enumerate() {
                row[i] += lambda2;
            }
            let Some(y) = cholesky_solve(jjt, e) else { break };
            let mut dq: Vec<f64> = jac.iter().map(|col| (0..6).map(|r| col[r] * y[r]).sum()).collect();
            let m = dq.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if m > opts.max_step {
                let s = opts.max_step / m;
                dq.iter_mut().for_each(|x| *x *= s);
            }
            let before = q.clone();
            for (x, d) in q.iter_mut().zip(&dq) {
                *x += d;
            }
            self.clamp_to_limits(&mut q);
            e = pose_error(&self.fk(&q, frame)?, target);
            if q.iter().zip(&before).all(|(a, b)| (a - b).abs() < 1e-14) {
                break;
            }
        }
        let (position_error, orientation_error) = norms(&e);
        let success = position_error <= opts.position_tolerance && orientation_error <= opts.orientation_tolerance;
        Ok(IkResult { success, q, position_error, orientation_error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Transform;
    use crate::kinematics::tests::single;
    use crate::module_model::JointKind;
    use proptest::prelude::*;

    #[test]
    fn cholesky_matches_known_solution() {
        let mut a = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                a[i][j] = 1.0 / (1 + i + j) as f64;
            }
            a[i][i] += 1.0;
        }
        let x = [1.0, -2.0, 0.5, 3.0, 0.0, -1.0];
        let b: [f64; 6] = core::array::from_fn(|i| (0..6).map(|j| a[i][j] * x[j]).sum());
        let sol = cholesky_solve(a, b).unwrap();
        for i in 0..6 {
            assert!((sol[i] - x[i]).abs() < 1e-12);
        }
        assert!(cholesky_solve([[0.0; 6]; 6], b).is_none());
    }

    #[test]
    fn solves_single_joint_exactly() {
        let (_, m) = single(JointKind::Revolute);
        let tcp = NodeRef::connector(0, "tcp");
        let target = m.fk(&[1.1], &tcp).unwrap();
        let r = m.ik(&target, &tcp, &[0.0], &IkOptions::default()).unwrap();
        assert!(r.success, "{r:?}");
        assert!((r.q[0] - 1.1).abs() < 1e-3);
    }

    #[test]
    fn unreachable_target_fails_with_best_effort() {
        let (_, m) = single(JointKind::Revolute);
        let tcp = NodeRef::connector(0, "tcp");
        let target = Transform::translate(3.0, 0.0, 0.0);
        let r = m.ik(&target, &tcp, &[0.5], &IkOptions::default()).unwrap();
        assert!(!r.success);
        assert!((r.position_error - 2.0).abs() < 1e-3, "{r:?}");
        assert!(m.within_limits(&r.q));
    }

    #[test]
    fn deterministic_per_seed() {
        let (_, m) = single(JointKind::Revolute);
        let tcp = NodeRef::connector(0, "tcp");
        let target = Transform::translate(0.0, 0.0, 2.0);
        let o = IkOptions { rng_seed: 5, ..IkOptions::default() };
        assert_eq!(m.ik(&target, &tcp, &[0.3], &o).unwrap(), m.ik(&target, &tcp, &[0.3], &o).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn reachable_targets_are_recovered(q in -3.0f64..3.0, seed in -3.0f64..3.0) {
            let (_, m) = single(JointKind::Revolute);
            let tcp = NodeRef::connector(0, "tcp");
            let target = m.fk(&[q], &tcp).unwrap();
            let r = m.ik(&target, &tcp, &[seed], &IkOptions::default()).unwrap();
            prop_assert!(r.success);
            let reached = m.fk(&r.q, &tcp).unwrap();
            prop_assert!((reached.translation() - target.translation()).norm() <= 1e-4);
        }
    }
}
