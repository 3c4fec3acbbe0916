//! Independent forward kinematics over a parsed URDF document, used as an
//! oracle against the assembly-graph model.

#![allow(dead_code)]

use std::collections::HashMap;

use modforge::core::geometry::Transform;
use modforge::core::module_model::JointKind;
use modforge::core::urdf::UrdfDocument;
use modforge::core::{Assembly, NodeRef, RobotModel};

/// World pose of every link, with joint values looked up by joint name and
/// the root link placed at `root`.
pub fn urdf_link_poses(doc: &UrdfDocument, q: &HashMap<String, f64>, root: &Transform) -> HashMap<String, Transform> {
    let by_child: HashMap<&str, usize> = doc.joints.iter().enumerate().map(|(i, j)| (j.child.as_str(), i)).collect();
    let mut poses: HashMap<String, Transform> = HashMap::new();
    for link in &doc.links {
        // Walk up to the root, then compose back down.
        let mut chain = Vec::new();
        let mut cur = link.name.as_str();
        while let Some(&j) = by_child.get(cur) {
            chain.push(j);
            cur = doc.joints[j].parent.as_str();
        }
        let mut t = *root;
        for &j in chain.iter().rev() {
            let joint = &doc.joints[j];
            let v = q.get(&joint.name).copied().unwrap_or(0.0);
            let motion = match joint.kind {
                JointKind::Revolute => Transform::from_axis_angle(joint.axis, v),
                JointKind::Prismatic => Transform::from_translation(joint.axis * v),
                JointKind::Fixed => Transform::identity(),
            };
            t = t.compose(&joint.origin).compose(&motion);
        }
        poses.insert(link.name.clone(), t);
    }
    poses
}

/// Joint values keyed by URDF joint name.
pub fn named(model: &RobotModel, q: &[f64]) -> HashMap<String, f64> {
    model.joints().iter().map(|j| (format!("{}_{}", j.name.instance, j.name.id), q[j.index])).collect()
}

/// Largest entrywise difference between URDF and model placements of every
/// link's visual geometry and every terminal end-effector link.
pub fn fk_disagreement(a: &Assembly, model: &RobotModel, doc: &UrdfDocument, q: &[f64]) -> f64 {
    let poses = urdf_link_poses(doc, &named(model, q), model.base_pose());
    let mut worst = 0.0f64;
    let mut compared = 0;
    for inst in 0..a.module_count() {
        let module = a.module(inst);
        for body in &module.bodies {
            let name = format!("{inst}_{}", body.id);
            let Some(link) = doc.link(&name) else { continue };
            let Some(visual) = &link.visual else { continue };
            let via_urdf = poses[&name].compose(&visual.origin);
            let via_model = model.fk(q, &NodeRef::body(inst, body.id.clone())).unwrap().compose(&body.visual.pose);
            worst = worst.max(via_urdf.max_abs_diff(&via_model));
            compared += 1;
        }
    }
    for (inst, conn) in a.eef_connectors() {
        let name = format!("{inst}_{conn}");
        let via_model = model.fk(q, &NodeRef::connector(inst, conn)).unwrap();
        worst = worst.max(poses[&name].max_abs_diff(&via_model));
        compared += 1;
    }
    assert!(compared > 0, "nothing to compare");
    worst
}

