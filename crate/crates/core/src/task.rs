//! Pick-and-place style tasks and per-assembly feasibility evaluation.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::assembly::Assembly;
use crate::geometry::Pose;
use crate::kinematics::{IkOptions, KinematicsError, PlacedPrimitive, Primitive, RobotModel, Trajectory};
use crate::module_model::Shape;
use crate::Configuration;

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: String,
    /// Box, cylinder or sphere.
    pub shape: Shape,
    /// World placement.
    pub pose: Pose,
}

impl Obstacle {
    pub fn primitive(&self) -> PlacedPrimitive {
        let p = Primitive::from_shape(&self.shape).expect("validated obstacle shape");
        PlacedPrimitive::new(p, self.pose)
    }
}

/// End-effector pose to reach.
#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub id: String,
    pub pose: Pose,
    pub position_tolerance: f64,
    pub orientation_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    pub base_pose: Pose,
    pub obstacles: Vec<Obstacle>,
    pub goals: Vec<Goal>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("{path}: duplicate goal id '{id}'")]
    DuplicateGoal { path: String, id: String },
    #[error("{path}: tolerance must be positive and finite")]
    InvalidTolerance { path: String },
    #[error("{path}: obstacle shape must be a box, cylinder or sphere with positive dimensions")]
    InvalidObstacle { path: String },
}

impl Task {
    pub fn new(id: impl Into<String>, base_pose: Pose, obstacles: Vec<Obstacle>, goals: Vec<Goal>) -> Result<Task, TaskError> {
        let t = Task { id: id.into(), base_pose, obstacles, goals };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        for (i, o) in self.obstacles.iter().enumerate() {
            if matches!(o.shape, Shape::Mesh { .. }) || !o.shape.is_valid() {
                return Err(TaskError::InvalidObstacle { path: alloc::format!("obstacles/{i}/shape") });
            }
        }
        let mut ids = BTreeSet::new();
        for (i, g) in self.goals.iter().enumerate() {
            for (name, tol) in [("posTol", g.position_tolerance), ("rotTol", g.orientation_tolerance)] {
                if !(tol > 0.0 && tol.is_finite()) {
                    return Err(TaskError::InvalidTolerance { path: alloc::format!("goals/{i}/{name}") });
                }
            }
            if !ids.insert(g.id.as_str()) {
                return Err(TaskError::DuplicateGoal { path: alloc::format!("goals/{i}/id"), id: g.id.clone() });
            }
        }
        Ok(())
    }

    pub fn obstacle_primitives(&self) -> Vec<PlacedPrimitive> {
        self.obstacles.iter().map(Obstacle::primitive).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Waypoints per straight segment between consecutive goal solutions.
    pub trajectory_steps: usize,
    pub dt: f64,
    pub rng_seed: u64,
    pub ik: IkOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { trajectory_steps: 100, dt: 0.1, rng_seed: 0, ik: IkOptions::default() }
    }
}

/// Stage at which an assembly was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// The model cannot be built or has no free end effector.
    Model,
    /// Inverse kinematics failed for the goal with this index.
    Unreachable(usize),
    /// A waypoint with this index collides.
    Collision(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOutcome {
    pub feasible: bool,
    pub failure: Option<Infeasibility>,
    /// One configuration per solved goal, in goal order.
    pub solutions: Vec<Configuration>,
    /// Present iff feasible.
    pub trajectory: Option<Trajectory>,
    pub module_count: usize,
    pub joint_count: usize,
}

impl EvaluationOutcome {
    pub fn trajectory_steps(&self) -> usize {
        self.trajectory.as_ref().map_or(0, Trajectory::len)
    }
}

/// Straight joint-space segments through `solutions`, shared endpoints kept once.
fn waypoints(solutions: &[Configuration], steps: usize, dt: f64) -> Result<Trajectory, KinematicsError> {
    let mut configurations = Vec::new();
    if let Some(first) = solutions.first() {
        configurations.push(first.clone());
    }
    for pair in solutions.windows(2) {
        let seg = crate::kinematics::linear_trajectory(&pair[0], &pair[1], steps, dt)?;
        configurations.extend(seg.configurations.into_iter().skip(1));
    }
    Ok(Trajectory { configurations, dt })
}

/// Solves every goal in order, then checks the connecting straight-line
/// trajectory for obstacle and self collisions.
pub fn evaluate_assembly(a: &Assembly, t: &Task, opts: &EvalOptions) -> EvaluationOutcome {
    let mut outcome = EvaluationOutcome {
        feasible: false,
        failure: None,
        solutions: vec![],
        trajectory: None,
        module_count: a.module_count(),
        joint_count: a.degrees_of_freedom(),
    };
    let Ok(mut model) = RobotModel::from_assembly(a) else {
        outcome.failure = Some(Infeasibility::Model);
        return outcome;
    };
    model.set_base_pose(t.base_pose);
    let Some(eef) = model.eef().cloned() else {
        outcome.failure = Some(Infeasibility::Model);
        return outcome;
    };

    let mut seed = vec![0.0; model.dof()];
    model.clamp_to_limits(&mut seed);
    for (k, goal) in t.goals.iter().enumerate() {
        let ik = IkOptions {
            position_tolerance: goal.position_tolerance,
            orientation_tolerance: goal.orientation_tolerance,
            rng_seed: opts.rng_seed.wrapping_add(k as u64),
            ..opts.ik
        };
        let r = model.ik(&goal.pose, &eef, &seed, &ik).expect("seed has model dimension");
        if !r.success {
            outcome.failure = Some(Infeasibility::Unreachable(k));
            return outcome;
        }
        seed = r.q.clone();
        outcome.solutions.push(r.q);
    }

    let trajectory = waypoints(&outcome.solutions, opts.trajectory_steps, opts.dt).expect("valid trajectory options");
    let obstacles = t.obstacle_primitives();
    for (i, q) in trajectory.configurations.iter().enumerate() {
        if !model.collision_free(q, &obstacles).expect("configuration has model dimension") {
            outcome.failure = Some(Infeasibility::Collision(i));
            return outcome;
        }
    }
    outcome.feasible = true;
    outcome.trajectory = Some(trajectory);
    outcome
}

/// Re-checks a feasible outcome: goal tolerances at every solution and
/// collision freedom of every stored waypoint.
pub fn verify_outcome(a: &Assembly, t: &Task, outcome: &EvaluationOutcome) -> bool {
    let Ok(mut model) = RobotModel::from_assembly(a) else { return false };
    model.set_base_pose(t.base_pose);
    let (Some(eef), Some(traj)) = (model.eef().cloned(), outcome.trajectory.as_ref()) else { return false };
    if outcome.solutions.len() != t.goals.len() {
        return false;
    }
    let goals_ok = t.goals.iter().zip(&outcome.solutions).all(|(g, q)| match model.fk(q, &eef) {
        Ok(p) => {
            (p.translation() - g.pose.translation()).norm() <= g.position_tolerance
                && p.rotation_angle_to(&g.pose) <= g.orientation_tolerance
        }
        Err(_) => false,
    });
    let obstacles = t.obstacle_primitives();
    goals_ok && traj.configurations.iter().all(|q| model.within_limits(q) && model.collision_free(q, &obstacles) == Ok(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Transform, Vec3};
    use crate::testkit::{primitives, upright};
    use crate::NodeRef;

    fn goal(id: &str, pose: Pose) -> Goal {
        Goal { id: id.into(), pose, position_tolerance: 1e-4, orientation_tolerance: 1e-3 }
    }

    fn desk() -> Obstacle {
        Obstacle { id: "desk".into(), shape: Shape::Box { size: Vec3::new(0.4, 0.8, 0.4) }, pose: Transform::translate(0.6, 0.0, 0.2) }
    }

    fn arm() -> Assembly {
        Assembly::from_serial_modules(primitives(), &["base", "R", "L", "P", "eef"]).unwrap()
    }

    /// Goals taken from the arm's own FK at two configurations.
    fn crafted_task(obstacles: Vec<Obstacle>) -> Task {
        let mut m = RobotModel::from_assembly(&arm()).unwrap();
        m.set_base_pose(upright());
        let tcp = m.eef().unwrap().clone();
        let g1 = m.fk(&[0.5, 0.05], &tcp).unwrap();
        let g2 = m.fk(&[-0.5, 0.25], &tcp).unwrap();
        Task::new("crafted", upright(), obstacles, vec![goal("pick", g1), goal("place", g2)]).unwrap()
    }

    #[test]
    fn validation_errors() {
        let g = goal("a", Transform::identity());
        assert!(Task::new("t", Transform::identity(), vec![], vec![g.clone()]).is_ok());
        let zero = Goal { position_tolerance: 0.0, ..g.clone() };
        assert_eq!(
            Task::new("t", Transform::identity(), vec![], vec![zero]),
            Err(TaskError::InvalidTolerance { path: "goals/0/posTol".into() })
        );
        assert!(matches!(Task::new("t", Transform::identity(), vec![], vec![g.clone(), g.clone()]), Err(TaskError::DuplicateGoal { .. })));
        let mesh = Obstacle { shape: Shape::Mesh { path: "a.stl".into() }, ..desk() };
        assert!(matches!(Task::new("t", Transform::identity(), vec![mesh], vec![g]), Err(TaskError::InvalidObstacle { .. })));
    }

    #[test]
    fn crafted_task_is_feasible_and_verifies() {
        let t = crafted_task(vec![desk()]);
        let out = evaluate_assembly(&arm(), &t, &EvalOptions::default());
        assert!(out.feasible, "{:?}", out.failure);
        assert_eq!((out.module_count, out.joint_count), (5, 2));
        assert_eq!(out.trajectory_steps(), 100);
        assert!(verify_outcome(&arm(), &t, &out));
        assert_eq!(out, evaluate_assembly(&arm(), &t, &EvalOptions::default()));
    }

    #[test]
    fn far_goal_is_unreachable() {
        let mut t = crafted_task(vec![]);
        t.goals[0].pose = Transform::translate(100.0, 0.0, 0.0);
        let out = evaluate_assembly(&arm(), &t, &EvalOptions::default());
        assert!(!out.feasible);
        assert_eq!(out.failure, Some(Infeasibility::Unreachable(0)));
    }

    #[test]
    fn static_assembly_matching_goal() {
        let a = Assembly::from_serial_modules(primitives(), &["base", "I", "eef"]).unwrap();
        let mut m = RobotModel::from_assembly(&a).unwrap();
        m.set_base_pose(upright());
        let pose = m.fk(&[], &NodeRef::connector(2, "tcp")).unwrap();
        let t = Task::new("s", upright(), vec![], vec![goal("g", pose)]).unwrap();
        let out = evaluate_assembly(&a, &t, &EvalOptions::default());
        assert!(out.feasible);
        assert_eq!(out.trajectory.unwrap().configurations, vec![Vec::<f64>::new()]);
    }

    #[test]
    fn obstacle_in_the_way_is_detected_and_monotone() {
        // A pillar between the two goal positions blocks the sweep.
        let pillar = Obstacle { id: "pillar".into(), shape: Shape::Box { size: Vec3::new(0.1, 0.1, 2.0) }, pose: Transform::translate(0.5, 0.0, 0.5) };
        let free = crafted_task(vec![]);
        let blocked = crafted_task(vec![pillar]);
        let a = arm();
        let out_free = evaluate_assembly(&a, &free, &EvalOptions::default());
        assert!(out_free.feasible);
        let out = evaluate_assembly(&a, &blocked, &EvalOptions::default());
        assert!(!out.feasible);
        assert!(matches!(out.failure, Some(Infeasibility::Collision(_))));
        // Replaying the free solution against the extended obstacle list fails too.
        assert!(!verify_outcome(&a, &blocked, &out_free));
    }
}
