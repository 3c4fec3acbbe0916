//! The data files shipped with the crate, embedded at compile time.

use std::sync::Arc;

use modforge_core::{Assembly, ModuleSet, Task};

use crate::json::{parse_assembly, parse_module_set, parse_task};

/// Base, end effector, a revolute and a prismatic joint module, three
/// straight and three elbow links.
pub const PRIMITIVES: &str = include_str!("../data/primitives.json");
/// Two reach goals over a desk.
pub const PICK_AND_PLACE: &str = include_str!("../data/pick_and_place.json");
/// base, R1, L30, P1, eef; the pick-and-place goals are poses of this robot.
pub const PICK_AND_PLACE_ROBOT: &str = include_str!("../data/pick_and_place_robot.json");
/// Base, two-joint powerball module, tube link and gripper.
pub const POWERBALL: &str = include_str!("../data/powerball.json");
/// base, PB, link, PB, gripper.
pub const POWERBALL_ARM: &str = include_str!("../data/powerball_arm.json");

pub fn primitives() -> Arc<ModuleSet> {
    Arc::new(parse_module_set(PRIMITIVES, None).expect("shipped module set is valid"))
}

pub fn pick_and_place() -> Task {
    parse_task(PICK_AND_PLACE).expect("shipped task is valid")
}

pub fn pick_and_place_robot() -> Assembly {
    parse_assembly(PICK_AND_PLACE_ROBOT, primitives()).expect("shipped assembly is valid")
}

pub fn powerball() -> Arc<ModuleSet> {
    Arc::new(parse_module_set(POWERBALL, None).expect("shipped module set is valid"))
}

pub fn powerball_arm() -> Assembly {
    parse_assembly(POWERBALL_ARM, powerball()).expect("shipped assembly is valid")
}
