//! JSON documents for module sets, assemblies and tasks.
//!
//! Errors carry a slash-separated path into the document, e.g.
//! `modules/2/joints/0/parent2joint`. Serialization goes through
//! [`serde_json::Value`], whose maps are ordered, so output keys are sorted
//! and repeated serialization is byte-identical.

use std::path::{Component, Path};
use std::sync::Arc;

use modforge_core::assembly::{AssemblyError, BaseConnector, Connection};
use modforge_core::geometry::{Mat3, Transform, Vec3};
use modforge_core::module_model::{
    Body, Connector, Gender, Geometry, Inertia, Joint, JointKind, JointLimits, Module, ModuleSet, ModuleSetError, Shape,
};
use modforge_core::task::{Goal, Obstacle, Task, TaskError};
use modforge_core::Assembly;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    ModuleSet(#[from] ModuleSetError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Task(#[from] TaskError),
}

impl FormatError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Schema { path: path.into(), message: message.into() }
    }
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let parts: Vec<String> = path
        .iter()
        .filter_map(|s| match s {
            Segment::Seq { index } => Some(index.to_string()),
            Segment::Map { key } => Some(key.clone()),
            Segment::Enum { variant } => Some(variant.clone()),
            Segment::Unknown => None,
        })
        .collect();
    if parts.is_empty() {
        "/".into()
    } else {
        parts.join("/")
    }
}

fn from_text<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = pointer(e.path());
        FormatError::Schema { path, message: e.into_inner().to_string() }
    })
}

fn to_text<T: Serialize>(dto: &T) -> String {
    let value = serde_json::to_value(dto).expect("DTOs serialize");
    let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
    s.push('\n');
    s
}

fn transform(m: &[f64; 16], path: &str) -> Result<Transform, FormatError> {
    Transform::from_row_major(m).map_err(|e| FormatError::at(path, e.to_string()))
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::from_array(v)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GenderDto {
    Male,
    Female,
    Hermaphroditic,
}

impl From<GenderDto> for Gender {
    fn from(g: GenderDto) -> Gender {
        match g {
            GenderDto::Male => Gender::Male,
            GenderDto::Female => Gender::Female,
            GenderDto::Hermaphroditic => Gender::Hermaphroditic,
        }
    }
}

impl From<Gender> for GenderDto {
    fn from(g: Gender) -> GenderDto {
        match g {
            Gender::Male => GenderDto::Male,
            Gender::Female => GenderDto::Female,
            Gender::Hermaphroditic => GenderDto::Hermaphroditic,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum JointKindDto {
    Revolute,
    Prismatic,
    Fixed,
}

impl From<JointKindDto> for JointKind {
    fn from(k: JointKindDto) -> JointKind {
        match k {
            JointKindDto::Revolute => JointKind::Revolute,
            JointKindDto::Prismatic => JointKind::Prismatic,
            JointKindDto::Fixed => JointKind::Fixed,
        }
    }
}

impl From<JointKind> for JointKindDto {
    fn from(k: JointKind) -> JointKindDto {
        match k {
            JointKind::Revolute => JointKindDto::Revolute,
            JointKind::Prismatic => JointKindDto::Prismatic,
            JointKind::Fixed => JointKindDto::Fixed,
        }
    }
}

/// Shape plus an optional placement; the pose defaults to the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
enum GeomDto {
    Box {
        size: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pose: Option<[f64; 16]>,
    },
    Cylinder {
        radius: f64,
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pose: Option<[f64; 16]>,
    },
    Sphere {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pose: Option<[f64; 16]>,
    },
    Mesh {
        path: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pose: Option<[f64; 16]>,
    },
}

impl GeomDto {
    fn into_geometry(self, path: &str, asset_root: Option<&Path>) -> Result<Geometry, FormatError> {
        let (shape, pose) = match self {
            GeomDto::Box { size, pose } => (Shape::Box { size: vec3(size) }, pose),
            GeomDto::Cylinder { radius, length, pose } => (Shape::Cylinder { radius, length }, pose),
            GeomDto::Sphere { radius, pose } => (Shape::Sphere { radius }, pose),
            GeomDto::Mesh { path: mesh, pose } => {
                check_mesh_path(&mesh, &format!("{path}/path"), asset_root)?;
                (Shape::Mesh { path: mesh }, pose)
            }
        };
        if !shape.is_valid() {
            return Err(FormatError::at(path, "dimensions must be positive and finite"));
        }
        let pose = match pose {
            Some(m) => transform(&m, &format!("{path}/pose"))?,
            None => Transform::identity(),
        };
        Ok(Geometry::new(shape, pose))
    }

    fn from_geometry(g: &Geometry) -> GeomDto {
        let pose = (g.pose != Transform::identity()).then(|| g.pose.to_row_major());
        match &g.shape {
            Shape::Box { size } => GeomDto::Box { size: size.to_array(), pose },
            Shape::Cylinder { radius, length } => GeomDto::Cylinder { radius: *radius, length: *length, pose },
            Shape::Sphere { radius } => GeomDto::Sphere { radius: *radius, pose },
            Shape::Mesh { path } => GeomDto::Mesh { path: path.clone(), pose },
        }
    }
}

/// Mesh paths are relative, forward-slash and stay inside the asset root.
fn check_mesh_path(mesh: &str, path: &str, asset_root: Option<&Path>) -> Result<(), FormatError> {
    if mesh.is_empty() || mesh.contains('\\') {
        return Err(FormatError::at(path, "mesh path must be a non-empty forward-slash path"));
    }
    let p = Path::new(mesh);
    if !p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)) {
        return Err(FormatError::at(path, format!("mesh path '{mesh}' must be relative to the asset root")));
    }
    if let Some(root) = asset_root {
        if !root.join(p).is_file() {
            return Err(FormatError::at(path, format!("mesh '{mesh}' not found under {}", root.display())));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ConnectorDto {
    id: String,
    pose: [f64; 16],
    gender: GenderDto,
    #[serde(rename = "type")]
    kind: String,
    size: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BodyDto {
    id: String,
    mass: f64,
    com: [f64; 3],
    /// Row-major 3×3.
    inertia: [f64; 9],
    collision: GeomDto,
    visual: GeomDto,
    connectors: Vec<ConnectorDto>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LimitsDto {
    pos: [f64; 2],
    vel: f64,
    effort: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JointDto {
    id: String,
    kind: JointKindDto,
    parent: String,
    child: String,
    parent2joint: [f64; 16],
    joint2child: [f64; 16],
    /// Optional for fixed joints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    limits: Option<LimitsDto>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModuleDto {
    id: String,
    name: String,
    bodies: Vec<BodyDto>,
    joints: Vec<JointDto>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModuleSetDto {
    id: String,
    modules: Vec<ModuleDto>,
}

fn module_from_dto(m: ModuleDto, path: &str, asset_root: Option<&Path>) -> Result<Module, FormatError> {
    let mut bodies = Vec::with_capacity(m.bodies.len());
    for (bi, b) in m.bodies.into_iter().enumerate() {
        let bp = format!("{path}/bodies/{bi}");
        let mut connectors = Vec::with_capacity(b.connectors.len());
        for (ci, c) in b.connectors.into_iter().enumerate() {
            connectors.push(Connector {
                id: c.id,
                body2connector: transform(&c.pose, &format!("{bp}/connectors/{ci}/pose"))?,
                gender: c.gender.into(),
                kind: c.kind,
                size: c.size,
            });
        }
        let i = b.inertia;
        bodies.push(Body {
            id: b.id,
            inertia: Inertia { mass: b.mass, com: vec3(b.com), tensor: Mat3([[i[0], i[1], i[2]], [i[3], i[4], i[5]], [i[6], i[7], i[8]]]) },
            collision: b.collision.into_geometry(&format!("{bp}/collision"), asset_root)?,
            visual: b.visual.into_geometry(&format!("{bp}/visual"), asset_root)?,
            connectors,
        });
    }
    let mut joints = Vec::with_capacity(m.joints.len());
    for (ji, j) in m.joints.into_iter().enumerate() {
        let jp = format!("{path}/joints/{ji}");
        let kind: JointKind = j.kind.into();
        let limits = match j.limits {
            Some(l) => JointLimits { lower: l.pos[0], upper: l.pos[1], velocity: l.vel, effort: l.effort },
            None if kind == JointKind::Fixed => JointLimits::NONE,
            None => return Err(FormatError::at(format!("{jp}/limits"), format!("{} joint '{}' needs limits", kind.as_str(), j.id))),
        };
        joints.push(Joint {
            kind,
            parent_body: j.parent,
            child_body: j.child,
            parent2joint: transform(&j.parent2joint, &format!("{jp}/parent2joint"))?,
            joint2child: transform(&j.joint2child, &format!("{jp}/joint2child"))?,
            limits,
            id: j.id,
        });
    }
    Ok(Module { id: m.id, name: m.name, bodies, joints })
}

fn module_to_dto(m: &Module) -> ModuleDto {
    ModuleDto {
        id: m.id.clone(),
        name: m.name.clone(),
        bodies: m
            .bodies
            .iter()
            .map(|b| BodyDto {
                id: b.id.clone(),
                mass: b.inertia.mass,
                com: b.inertia.com.to_array(),
                inertia: core::array::from_fn(|k| b.inertia.tensor.0[k / 3][k % 3]),
                collision: GeomDto::from_geometry(&b.collision),
                visual: GeomDto::from_geometry(&b.visual),
                connectors: b
                    .connectors
                    .iter()
                    .map(|c| ConnectorDto {
                        id: c.id.clone(),
                        pose: c.body2connector.to_row_major(),
                        gender: c.gender.into(),
                        kind: c.kind.clone(),
                        size: c.size,
                    })
                    .collect(),
            })
            .collect(),
        joints: m
            .joints
            .iter()
            .map(|j| JointDto {
                id: j.id.clone(),
                kind: j.kind.into(),
                parent: j.parent_body.clone(),
                child: j.child_body.clone(),
                parent2joint: j.parent2joint.to_row_major(),
                joint2child: j.joint2child.to_row_major(),
                limits: (j.kind != JointKind::Fixed || j.limits != JointLimits::NONE)
                    .then_some(LimitsDto { pos: [j.limits.lower, j.limits.upper], vel: j.limits.velocity, effort: j.limits.effort }),
            })
            .collect(),
    }
}

/// Parses and validates a module set. With an `asset_root`, mesh files must
/// exist under it.
pub fn parse_module_set(text: &str, asset_root: Option<&Path>) -> Result<ModuleSet, FormatError> {
    let dto: ModuleSetDto = from_text(text)?;
    let modules = dto
        .modules
        .into_iter()
        .enumerate()
        .map(|(i, m)| module_from_dto(m, &format!("modules/{i}"), asset_root))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ModuleSet::new(dto.id, modules)?)
}

/// Modules are written in id order.
pub fn serialize_module_set(set: &ModuleSet) -> String {
    to_text(&ModuleSetDto { id: set.id.clone(), modules: set.modules().map(module_to_dto).collect() })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct AssemblyDto {
    module_set: String,
    modules: Vec<String>,
    connections: Vec<(usize, String, usize, String)>,
    base: (usize, String),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_pose: Option<[f64; 16]>,
}

/// Parses an assembly over `set`, whose id must match `moduleSet`.
pub fn parse_assembly(text: &str, set: Arc<ModuleSet>) -> Result<Assembly, FormatError> {
    let dto: AssemblyDto = from_text(text)?;
    if dto.module_set != set.id {
        return Err(FormatError::at("moduleSet", format!("assembly refers to module set '{}', loaded set is '{}'", dto.module_set, set.id)));
    }
    let base_pose = match dto.base_pose {
        Some(m) => transform(&m, "basePose")?,
        None => Transform::identity(),
    };
    let connections = dto.connections.into_iter().map(|(u, cu, v, cv)| Connection::new(u, cu, v, cv)).collect();
    Ok(Assembly::new(set, dto.modules, connections, BaseConnector::new(dto.base.0, dto.base.1), base_pose)?)
}

pub fn serialize_assembly(a: &Assembly) -> String {
    to_text(&AssemblyDto {
        module_set: a.set().id.clone(),
        modules: a.instances().to_vec(),
        connections: a
            .connections()
            .iter()
            .map(|c| (c.module_a, c.connector_a.clone(), c.module_b, c.connector_b.clone()))
            .collect(),
        base: (a.base().instance, a.base().connector.clone()),
        base_pose: Some(a.base_pose().to_row_major()),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ObstacleDto {
    id: String,
    shape: GeomDto,
    pose: [f64; 16],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GoalKindDto {
    Reach,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct GoalDto {
    id: String,
    kind: GoalKindDto,
    pose: [f64; 16],
    pos_tol: f64,
    rot_tol: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TaskDto {
    id: String,
    base_pose: [f64; 16],
    obstacles: Vec<ObstacleDto>,
    goals: Vec<GoalDto>,
    #[serde(default, skip_serializing)]
    constraints: Option<serde_json::Value>,
}

/// Parses a task. A `constraints` entry is accepted and ignored with a
/// warning; an obstacle's world pose is `pose · shape.pose`.
pub fn parse_task(text: &str) -> Result<Task, FormatError> {
    let dto: TaskDto = from_text(text)?;
    if dto.constraints.is_some() {
        log::warn!("task '{}': constraints are not evaluated and are ignored", dto.id);
    }
    let mut obstacles = Vec::with_capacity(dto.obstacles.len());
    for (i, o) in dto.obstacles.into_iter().enumerate() {
        let path = format!("obstacles/{i}");
        let pose = transform(&o.pose, &format!("{path}/pose"))?;
        let geom = o.shape.into_geometry(&format!("{path}/shape"), None)?;
        if matches!(geom.shape, Shape::Mesh { .. }) {
            return Err(FormatError::at(format!("{path}/shape"), "obstacles must be primitives"));
        }
        obstacles.push(Obstacle { id: o.id, shape: geom.shape, pose: pose.compose(&geom.pose) });
    }
    let mut goals = Vec::with_capacity(dto.goals.len());
    for (i, g) in dto.goals.into_iter().enumerate() {
        let GoalKindDto::Reach = g.kind;
        goals.push(Goal {
            pose: transform(&g.pose, &format!("goals/{i}/pose"))?,
            position_tolerance: g.pos_tol,
            orientation_tolerance: g.rot_tol,
            id: g.id,
        });
    }
    Ok(Task::new(dto.id, transform(&dto.base_pose, "basePose")?, obstacles, goals)?)
}

pub fn serialize_task(t: &Task) -> String {
    to_text(&TaskDto {
        id: t.id.clone(),
        base_pose: t.base_pose.to_row_major(),
        obstacles: t
            .obstacles
            .iter()
            .map(|o| ObstacleDto {
                id: o.id.clone(),
                shape: GeomDto::from_geometry(&Geometry::new(o.shape.clone(), Transform::identity())),
                pose: o.pose.to_row_major(),
            })
            .collect(),
        goals: t
            .goals
            .iter()
            .map(|g| GoalDto {
                id: g.id.clone(),
                kind: GoalKindDto::Reach,
                pose: g.pose.to_row_major(),
                pos_tol: g.position_tolerance,
                rot_tol: g.orientation_tolerance,
            })
            .collect(),
        constraints: None,
    })
}
