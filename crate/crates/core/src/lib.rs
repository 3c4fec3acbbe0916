//! Modelling of modular reconfigurable robots.
//!
//! Modules (bodies, joints and connectors with reference frames) are
//! collected into module sets, connected into assemblies and flattened into
//! kinematic trees that support forward/inverse kinematics, inverse
//! dynamics, primitive collision checks and URDF generation. On top of that
//! sits an exhaustive search over serial module compositions for a task.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the XML
//! writer/reader and the command-line tool live in the `modforge` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod assembly;
pub mod geometry;
pub mod kinematics;
pub mod module_model;
pub mod search;
pub mod task;
#[cfg(test)]
mod testkit;
pub mod urdf;

pub use assembly::{Assembly, AssemblyError, AssemblyGraph, BaseConnector, Connection, GraphOfModules, NodeRef};
pub use geometry::{Mat3, MotionKind, Pose, Transform, Vec3};
pub use kinematics::{Configuration, RobotModel, Trajectory};
pub use module_model::{Body, Connector, Gender, Geometry, Inertia, Joint, JointKind, JointLimits, Module, ModuleSet};
pub use task::{EvaluationOutcome, Goal, Obstacle, Task};
pub use urdf::{UrdfDocument, UrdfJoint, UrdfLink};
