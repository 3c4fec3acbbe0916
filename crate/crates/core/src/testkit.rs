//! Small primitive module set for unit tests: a base, a revolute and a
//! prismatic joint module, straight and bent links and an end effector.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{Transform, Vec3};
use crate::module_model::{
    Body, Connector, Gender, Geometry, Inertia, Joint, JointKind, JointLimits, Module, ModuleSet, Shape, BASE_KIND, EEF_KIND,
};

const R: f64 = 0.03;

fn input(z: f64) -> Connector {
    Connector {
        id: "in".into(),
        body2connector: Transform::translate(0.0, 0.0, z).compose(&Transform::rot_x(PI)),
        gender: Gender::Female,
        kind: "flange".into(),
        size: 0.08,
    }
}

fn output(z: f64) -> Connector {
    Connector { id: "out".into(), body2connector: Transform::translate(0.0, 0.0, z), gender: Gender::Male, kind: "flange".into(), size: 0.08 }
}

fn rod(id: &str, length: f64, connectors: Vec<Connector>) -> Body {
    let g = Geometry::new(Shape::Cylinder { radius: R, length }, Transform::identity());
    Body { id: id.into(), inertia: Inertia::point_mass(0.5, Vec3::ZERO), collision: g.clone(), visual: g, connectors }
}

fn joint_module(id: &str, kind: JointKind, limits: JointLimits) -> Module {
    Module {
        id: id.into(),
        name: id.into(),
        bodies: vec![rod("lower", 0.1, vec![input(-0.05)]), rod("upper", 0.1, vec![output(0.05)])],
        joints: vec![Joint {
            id: "j".into(),
            kind,
            parent_body: "lower".into(),
            child_body: "upper".into(),
            parent2joint: Transform::translate(0.0, 0.0, 0.05),
            joint2child: Transform::translate(0.0, 0.0, 0.05),
            limits,
        }],
    }
}

pub(crate) fn revolute() -> Module {
    joint_module("R", JointKind::Revolute, JointLimits { lower: -PI, upper: PI, velocity: 1.0, effort: 10.0 })
}

pub(crate) fn prismatic() -> Module {
    joint_module("P", JointKind::Prismatic, JointLimits { lower: 0.0, upper: 0.3, velocity: 0.5, effort: 100.0 })
}

/// Straight link of the given length.
pub(crate) fn straight(id: &str, length: f64) -> Module {
    Module { id: id.into(), name: id.into(), bodies: vec![rod("b", length, vec![input(-length / 2.0), output(length / 2.0)])], joints: vec![] }
}

/// Vertical 0.1 m segment followed by a horizontal segment of `reach`.
pub(crate) fn bent(id: &str, reach: f64) -> Module {
    Module {
        id: id.into(),
        name: id.into(),
        bodies: vec![rod("v", 0.1, vec![input(-0.05)]), rod("h", reach, vec![output(reach / 2.0)])],
        joints: vec![Joint {
            id: "bend".into(),
            kind: JointKind::Fixed,
            parent_body: "v".into(),
            child_body: "h".into(),
            parent2joint: Transform::translate(0.0, 0.0, 0.05 + R).compose(&Transform::rot_y(FRAC_PI_2)),
            joint2child: Transform::translate(0.0, 0.0, reach / 2.0 + R),
            limits: JointLimits::NONE,
        }],
    }
}

pub(crate) fn base() -> Module {
    let g = Geometry::new(Shape::Box { size: Vec3::new(0.2, 0.2, 0.2) }, Transform::identity());
    let bottom = Connector {
        id: "base".into(),
        body2connector: Transform::translate(0.0, 0.0, -0.1).compose(&Transform::rot_x(PI)),
        gender: Gender::Male,
        kind: BASE_KIND.into(),
        size: 0.08,
    };
    Module {
        id: "base".into(),
        name: "base".into(),
        bodies: vec![Body { id: "b".into(), inertia: Inertia::point_mass(5.0, Vec3::ZERO), collision: g.clone(), visual: g, connectors: vec![bottom, output(0.1)] }],
        joints: vec![],
    }
}

pub(crate) fn eef() -> Module {
    let tcp = Connector { id: "tcp".into(), body2connector: Transform::translate(0.0, 0.0, 0.025), gender: Gender::Male, kind: EEF_KIND.into(), size: 0.08 };
    Module { id: "eef".into(), name: "eef".into(), bodies: vec![rod("b", 0.05, vec![input(-0.025), tcp])], joints: vec![] }
}

pub(crate) fn primitives() -> Arc<ModuleSet> {
    Arc::new(ModuleSet::new("kit", [base(), revolute(), prismatic(), straight("I", 0.2), bent("L", 0.3), eef()]).unwrap())
}

/// Upright pose for the base connector, whose z axis points into the floor.
pub(crate) fn upright() -> Transform {
    Transform::rot_x(PI)
}
