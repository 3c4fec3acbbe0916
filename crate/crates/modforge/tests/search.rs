use std::sync::Arc;

use modforge::core::geometry::Transform;
use modforge::core::search::{brute_force_search, SearchOptions};
use modforge::core::task::{evaluate_assembly, verify_outcome, EvalOptions, Goal, Task};
use modforge::core::{NodeRef, RobotModel};
use modforge::samples;
use modforge::search::{parallel_search, ResultLine, Roles};

fn spec(max_dof: usize) -> modforge::core::search::EnumerationSpec {
    let set = samples::primitives();
    Roles::classify(&set, None, None).unwrap().spec(Arc::clone(&set), max_dof, false).unwrap()
}

#[test]
fn shipped_task_goals_are_poses_of_the_shipped_robot() {
    let a = samples::pick_and_place_robot();
    let model = RobotModel::from_assembly(&a).unwrap();
    let tcp = NodeRef::connector(4, "tcp");
    let t = samples::pick_and_place();
    for (goal, q) in t.goals.iter().zip([[0.5, 0.05], [-0.5, 0.25]]) {
        assert!(model.fk(&q, &tcp).unwrap().approx_eq(&goal.pose, 1e-12), "{}", goal.id);
    }
    let outcome = evaluate_assembly(&a, &t, &EvalOptions::default());
    assert!(outcome.feasible, "{:?}", outcome.failure);
    assert!(verify_outcome(&a, &t, &outcome));
    assert_eq!(outcome.trajectory_steps(), 100);
}

#[test]
fn early_stop_returns_the_smallest_feasible_chain() {
    let t = samples::pick_and_place();
    let r = parallel_search(&spec(3), &t, &SearchOptions { early_stop: true, ..Default::default() }, None).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].modules, ["base", "R1", "L30", "P1", "eef"]);
    assert_eq!((r[0].key.module_count, r[0].key.joint_count), (5, 2));
}

#[test]
fn serial_and_parallel_outputs_are_identical() {
    let t = samples::pick_and_place();
    let s = spec(2);
    let opts = SearchOptions { eval: EvalOptions { rng_seed: 3, ..Default::default() }, early_stop: false };
    let lines = |rs: &[modforge::core::search::RankedResult]| rs.iter().enumerate().map(|(i, r)| ResultLine::new(i, r).to_json()).collect::<Vec<_>>();
    let serial = brute_force_search(&s, &t, &opts);
    let parallel = parallel_search(&s, &t, &opts, Some(3)).unwrap();
    assert_eq!(lines(&serial), lines(&parallel));
    assert_eq!(lines(&parallel), lines(&parallel_search(&s, &t, &opts, Some(2)).unwrap()));
    assert!(serial.windows(2).all(|w| w[0].key <= w[1].key));
}

#[test]
fn far_goals_yield_nothing() {
    let mut t = samples::pick_and_place();
    t.goals = vec![Goal { id: "far".into(), pose: Transform::translate(100.0, 0.0, 0.5), position_tolerance: 1e-3, orientation_tolerance: 1e-2 }];
    let t = Task::new(t.id, t.base_pose, t.obstacles, t.goals).unwrap();
    assert!(parallel_search(&spec(2), &t, &SearchOptions::default(), None).unwrap().is_empty());
}
