//! Modules, module graphs, module sets and the connectivity graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::geometry::{Mat3, MotionKind, Transform, Vec3};

/// Connector kind attaching a module to the world.
pub const BASE_KIND: &str = "base";
/// Connector kind marking an end-effector frame.
pub const EEF_KIND: &str = "eef";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
    Hermaphroditic,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Hermaphroditic => "hermaphroditic",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "male" => Some(Gender::Male),
            "female" => Some(Gender::Female),
            "hermaphroditic" => Some(Gender::Hermaphroditic),
            _ => None,
        }
    }

    pub fn mates_with(self, other: Gender) -> bool {
        matches!(
            (self, other),
            (Gender::Male, Gender::Female) | (Gender::Female, Gender::Male) | (Gender::Hermaphroditic, Gender::Hermaphroditic)
        )
    }
}

/// Mating interface on a body. The z-axis of `body2connector` points away
/// from the module.
#[derive(Debug, Clone, PartialEq)]
pub struct Connector {
    pub id: String,
    pub body2connector: Transform,
    pub gender: Gender,
    pub kind: String,
    pub size: f64,
}

impl Connector {
    pub fn is_base(&self) -> bool {
        self.kind == BASE_KIND
    }

    pub fn is_eef(&self) -> bool {
        self.kind == EEF_KIND
    }

    pub fn is_reserved(&self) -> bool {
        self.is_base() || self.is_eef()
    }
}

/// Rigid-body inertia; `tensor` is taken about the center of mass in body axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inertia {
    pub mass: f64,
    pub com: Vec3,
    pub tensor: Mat3,
}

impl Inertia {
    pub const ZERO: Inertia = Inertia { mass: 0.0, com: Vec3::ZERO, tensor: Mat3::ZERO };

    pub fn point_mass(mass: f64, com: Vec3) -> Self {
        Inertia { mass, com, tensor: Mat3::ZERO }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Full edge lengths.
    Box { size: Vec3 },
    /// Axis along local z, centred on the origin.
    Cylinder { radius: f64, length: f64 },
    Sphere { radius: f64 },
    /// Relative, forward-slash path; carried through to URDF only.
    Mesh { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub shape: Shape,
    /// Placement relative to the owning body frame.
    pub pose: Transform,
}

impl Geometry {
    pub fn new(shape: Shape, pose: Transform) -> Self {
        Geometry { shape, pose }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub id: String,
    pub inertia: Inertia,
    pub collision: Geometry,
    pub visual: Geometry,
    pub connectors: Vec<Connector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointKind {
    Revolute,
    Prismatic,
    Fixed,
}

impl JointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Option<JointKind> {
        match s {
            "revolute" => Some(JointKind::Revolute),
            "prismatic" => Some(JointKind::Prismatic),
            "fixed" => Some(JointKind::Fixed),
            _ => None,
        }
    }

    pub fn motion(self) -> Option<MotionKind> {
        match self {
            JointKind::Revolute => Some(MotionKind::Revolute),
            JointKind::Prismatic => Some(MotionKind::Prismatic),
            JointKind::Fixed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
    pub velocity: f64,
    pub effort: f64,
}

impl JointLimits {
    pub const NONE: JointLimits = JointLimits { lower: 0.0, upper: 0.0, velocity: 0.0, effort: 0.0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub id: String,
    pub kind: JointKind,
    pub parent_body: String,
    pub child_body: String,
    pub parent2joint: Transform,
    pub joint2child: Transform,
    pub limits: JointLimits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub id: String,
    pub name: String,
    pub bodies: Vec<Body>,
    pub joints: Vec<Joint>,
}

impl Module {
    pub fn body(&self, id: &str) -> Option<&Body> {
        self.bodies.iter().find(|b| b.id == id)
    }

    pub fn joint(&self, id: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.id == id)
    }

    /// All connectors with their owning body, in body order.
    pub fn connectors(&self) -> impl Iterator<Item = (&Body, &Connector)> {
        self.bodies.iter().flat_map(|b| b.connectors.iter().map(move |c| (b, c)))
    }

    pub fn connector(&self, id: &str) -> Option<(&Body, &Connector)> {
        self.connectors().find(|(_, c)| c.id == id)
    }

    /// Number of non-fixed joints.
    pub fn dof(&self) -> usize {
        self.joints.iter().filter(|j| j.kind != JointKind::Fixed).count()
    }

    pub fn has_connector_kind(&self, kind: &str) -> bool {
        self.connectors().any(|(_, c)| c.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    EmptyModule,
    DuplicateId,
    SelfJoint,
    DanglingBodyReference,
    IntraModuleCycle,
    DisconnectedBodies,
    NoConnectors,
    InvalidLimits,
    InvalidConnectorSize,
    InvalidInertia,
    InvalidGeometry,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyModule => "empty module",
            ViolationCode::DuplicateId => "duplicate id",
            ViolationCode::SelfJoint => "self joint",
            ViolationCode::DanglingBodyReference => "dangling body reference",
            ViolationCode::IntraModuleCycle => "intra-module cycle",
            ViolationCode::DisconnectedBodies => "disconnected bodies",
            ViolationCode::NoConnectors => "no connectors",
            ViolationCode::InvalidLimits => "invalid limits",
            ViolationCode::InvalidConnectorSize => "invalid connector size",
            ViolationCode::InvalidInertia => "invalid inertia",
            ViolationCode::InvalidGeometry => "invalid geometry",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// Location inside the module, e.g. `joints/2/child`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code.as_str(), self.path, self.message)
    }
}

/// Checks the structural invariants of a module. Violations are data.
///
/// Body, joint and connector ids share one namespace per module so that
/// instance-prefixed names stay unique downstream.
pub fn validate_module(m: &Module) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, path: String, message: String| out.push(Violation { code, path, message });

    if m.bodies.is_empty() {
        push(ViolationCode::EmptyModule, String::from("bodies"), String::from("module has no bodies"));
    }

    let mut seen = BTreeSet::new();
    for (i, b) in m.bodies.iter().enumerate() {
        if !seen.insert(b.id.as_str()) {
            push(ViolationCode::DuplicateId, format!("bodies/{i}/id"), format!("id '{}' used twice", b.id));
        }
    }
    for (i, j) in m.joints.iter().enumerate() {
        if !seen.insert(j.id.as_str()) {
            push(ViolationCode::DuplicateId, format!("joints/{i}/id"), format!("id '{}' used twice", j.id));
        }
    }
    for (bi, b) in m.bodies.iter().enumerate() {
        for (ci, c) in b.connectors.iter().enumerate() {
            let path = format!("bodies/{bi}/connectors/{ci}");
            if !seen.insert(c.id.as_str()) {
                push(ViolationCode::DuplicateId, format!("{path}/id"), format!("id '{}' used twice", c.id));
            }
            if !(c.size > 0.0 && c.size.is_finite()) {
                push(
                    ViolationCode::InvalidConnectorSize,
                    format!("{path}/size"),
                    format!("connector '{}' has size {}", c.id, c.size),
                );
            }
        }
        check_inertia(&b.inertia, &format!("bodies/{bi}"), &b.id, &mut push);
        check_geometry(&b.collision, &format!("bodies/{bi}/collision"), &b.id, &mut push);
        check_geometry(&b.visual, &format!("bodies/{bi}/visual"), &b.id, &mut push);
    }

    let body_index: BTreeMap<&str, usize> = m.bodies.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let mut uf = UnionFind::new(m.bodies.len());
    let mut cycle_reported = false;
    for (i, j) in m.joints.iter().enumerate() {
        let parent = body_index.get(j.parent_body.as_str());
        let child = body_index.get(j.child_body.as_str());
        if parent.is_none() {
            push(
                ViolationCode::DanglingBodyReference,
                format!("joints/{i}/parent"),
                format!("joint '{}' references unknown parent body '{}'", j.id, j.parent_body),
            );
        }
        if child.is_none() {
            push(
                ViolationCode::DanglingBodyReference,
                format!("joints/{i}/child"),
                format!("joint '{}' references unknown child body '{}'", j.id, j.child_body),
            );
        }
        if j.parent_body == j.child_body {
            push(ViolationCode::SelfJoint, format!("joints/{i}"), format!("joint '{}' connects body '{}' to itself", j.id, j.parent_body));
        } else if let (Some(&p), Some(&c)) = (parent, child) {
            if !uf.union(p, c) && !cycle_reported {
                cycle_reported = true;
                push(
                    ViolationCode::IntraModuleCycle,
                    format!("joints/{i}"),
                    format!("joint '{}' closes a loop between bodies", j.id),
                );
            }
        }
        check_limits(j, &format!("joints/{i}/limits"), &mut push);
    }
    if !m.bodies.is_empty() {
        let root = uf.find(0);
        if (1..m.bodies.len()).any(|i| uf.find(i) != root) {
            push(
                ViolationCode::DisconnectedBodies,
                String::from("joints"),
                String::from("joints do not connect all bodies"),
            );
        }
    }

    if m.connectors().next().is_none() {
        push(ViolationCode::NoConnectors, String::from("bodies"), String::from("module has no connectors"));
    }
    out
}

fn check_limits(j: &Joint, path: &str, push: &mut impl FnMut(ViolationCode, String, String)) {
    let l = &j.limits;
    let finite = [l.lower, l.upper, l.velocity, l.effort].iter().all(|x| x.is_finite());
    if !finite || l.lower > l.upper {
        push(
            ViolationCode::InvalidLimits,
            String::from(path),
            format!("joint '{}' has position limits [{}, {}]", j.id, l.lower, l.upper),
        );
    }
    if j.kind != JointKind::Fixed && !(l.velocity > 0.0 && l.effort > 0.0) {
        push(
            ViolationCode::InvalidLimits,
            String::from(path),
            format!("joint '{}' needs positive velocity and effort limits", j.id),
        );
    }
}

fn check_inertia(inertia: &Inertia, path: &str, body: &str, push: &mut impl FnMut(ViolationCode, String, String)) {
    let t = &inertia.tensor.0;
    let finite = inertia.mass.is_finite() && inertia.com.is_finite() && t.iter().flatten().all(|x| x.is_finite());
    if !finite || inertia.mass < 0.0 {
        push(ViolationCode::InvalidInertia, format!("{path}/mass"), format!("body '{body}' has invalid mass or com"));
        return;
    }
    if inertia.tensor.max_abs_diff(&inertia.tensor.transpose()) > 1e-12 {
        push(ViolationCode::InvalidInertia, format!("{path}/inertia"), format!("body '{body}' has an asymmetric inertia tensor"));
        return;
    }
    // Positive semidefinite iff every principal minor is non-negative.
    let eps = 1e-12;
    let minors2 = [
        t[0][0] * t[1][1] - t[0][1] * t[1][0],
        t[0][0] * t[2][2] - t[0][2] * t[2][0],
        t[1][1] * t[2][2] - t[1][2] * t[2][1],
    ];
    let psd = t[0][0] >= -eps
        && t[1][1] >= -eps
        && t[2][2] >= -eps
        && minors2.iter().all(|&m| m >= -eps)
        && inertia.tensor.det() >= -eps;
    if !psd {
        push(
            ViolationCode::InvalidInertia,
            format!("{path}/inertia"),
            format!("body '{body}' has negative principal moments"),
        );
    }
}

impl Shape {
    /// Positive finite dimensions; mesh paths relative, forward-slash and without `..`.
    pub fn is_valid(&self) -> bool {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        match self {
            Shape::Box { size } => positive(size.x) && positive(size.y) && positive(size.z),
            Shape::Cylinder { radius, length } => positive(*radius) && positive(*length),
            Shape::Sphere { radius } => positive(*radius),
            Shape::Mesh { path } => !path.is_empty() && !path.starts_with('/') && !path.contains('\\') && !path.split('/').any(|seg| seg == ".."),
        }
    }
}

fn check_geometry(g: &Geometry, path: &str, body: &str, push: &mut impl FnMut(ViolationCode, String, String)) {
    if !g.shape.is_valid() {
        push(ViolationCode::InvalidGeometry, String::from(path), format!("body '{body}' has invalid geometry"));
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Body,
    Joint,
    Connector,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModuleNode {
    pub kind: NodeKind,
    pub id: String,
}

/// Directed edge `u → v` carrying `T(F_u, F_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleEdge {
    pub from: usize,
    pub to: usize,
    pub transition: Transform,
}

/// Directed graph over a module's bodies, joints and connectors. Every
/// parent/child relation contributes two antiparallel edges; edge `2k + 1`
/// is the reverse of edge `2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleGraph {
    pub nodes: Vec<ModuleNode>,
    pub edges: Vec<ModuleEdge>,
}

impl ModuleGraph {
    pub fn node_index(&self, kind: NodeKind, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == kind && n.id == id)
    }

    pub fn reverse_edge(&self, e: usize) -> usize {
        e ^ 1
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &ModuleEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.from == node || e.to == node).count()
    }
}

/// Builds `G_m`. Nodes are ordered bodies, joints, connectors.
///
/// Expects a module that passed [`validate_module`]; dangling references
/// are skipped.
pub fn build_module_graph(m: &Module) -> ModuleGraph {
    let mut nodes = Vec::with_capacity(m.bodies.len() + m.joints.len() + 2 * m.bodies.len());
    nodes.extend(m.bodies.iter().map(|b| ModuleNode { kind: NodeKind::Body, id: b.id.clone() }));
    nodes.extend(m.joints.iter().map(|j| ModuleNode { kind: NodeKind::Joint, id: j.id.clone() }));
    nodes.extend(m.connectors().map(|(_, c)| ModuleNode { kind: NodeKind::Connector, id: c.id.clone() }));

    let body_idx = |id: &str| m.bodies.iter().position(|b| b.id == id);
    let mut edges = Vec::with_capacity(4 * m.joints.len() + 2 * (nodes.len() - m.bodies.len() - m.joints.len()));
    let mut pair = |from: usize, to: usize, t: Transform| {
        edges.push(ModuleEdge { from, to, transition: t });
        edges.push(ModuleEdge { from: to, to: from, transition: t.inverse() });
    };
    for (ji, j) in m.joints.iter().enumerate() {
        let jn = m.bodies.len() + ji;
        if let (Some(p), Some(c)) = (body_idx(&j.parent_body), body_idx(&j.child_body)) {
            pair(p, jn, j.parent2joint);
            pair(jn, c, j.joint2child);
        }
    }
    let mut cn = m.bodies.len() + m.joints.len();
    for (bi, b) in m.bodies.iter().enumerate() {
        for c in &b.connectors {
            pair(bi, cn, c.body2connector);
            cn += 1;
        }
    }
    ModuleGraph { nodes, edges }
}

/// Whether two connectors can be mated. Reserved `base`/`eef` connectors
/// never mate with anything.
pub fn connectors_match(a: &Connector, b: &Connector) -> bool {
    !a.is_reserved() && !b.is_reserved() && a.size == b.size && a.kind == b.kind && a.gender.mates_with(b.gender)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleSetError {
    #[error("module id '{0}' appears more than once")]
    DuplicateModule(String),
    #[error("module '{module}' is invalid: {}", violations.first().map(ToString::to_string).unwrap_or_default())]
    InvalidModule { module: String, violations: Vec<Violation> },
}

/// A set of modules keyed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSet {
    pub id: String,
    modules: BTreeMap<String, Module>,
}

impl ModuleSet {
    /// Validates every module and rejects duplicate ids.
    pub fn new(id: impl Into<String>, modules: impl IntoIterator<Item = Module>) -> Result<Self, ModuleSetError> {
        let mut map = BTreeMap::new();
        for m in modules {
            let violations = validate_module(&m);
            if !violations.is_empty() {
                return Err(ModuleSetError::InvalidModule { module: m.id.clone(), violations });
            }
            if map.contains_key(&m.id) {
                return Err(ModuleSetError::DuplicateModule(m.id));
            }
            map.insert(m.id.clone(), m);
        }
        Ok(ModuleSet { id: id.into(), modules: map })
    }

    pub fn get(&self, id: &str) -> Option<&Module> {
        self.modules.get(id)
    }

    /// Modules in id order.
    pub fn modules(&self) -> impl Iterator<Item = &Module> {
        self.modules.values()
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }
}

/// A matching connector pair between two modules (`a` on the first, `b` on the second).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConnectorPair {
    pub a: String,
    pub b: String,
}

/// Undirected module-level graph of possible connections (`G_c`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConnectivityGraph {
    pub nodes: Vec<String>,
    /// Keyed by `(u, v)` with `u <= v`; self-loops allowed.
    pub edges: BTreeMap<(String, String), Vec<ConnectorPair>>,
}

impl ConnectivityGraph {
    pub fn are_connected(&self, u: &str, v: &str) -> bool {
        let key = if u <= v { (u.to_string(), v.to_string()) } else { (v.to_string(), u.to_string()) };
        self.edges.contains_key(&key)
    }
}

pub fn connectivity_graph(set: &ModuleSet) -> ConnectivityGraph {
    let modules: Vec<&Module> = set.modules().collect();
    let mut edges = BTreeMap::new();
    for (i, u) in modules.iter().enumerate() {
        for v in &modules[i..] {
            let pairs: Vec<ConnectorPair> = u
                .connectors()
                .flat_map(|(_, a)| {
                    v.connectors()
                        .filter(move |(_, b)| connectors_match(a, b))
                        .map(move |(_, b)| ConnectorPair { a: a.id.clone(), b: b.id.clone() })
                })
                .collect();
            if !pairs.is_empty() {
                edges.insert((u.id.clone(), v.id.clone()), pairs);
            }
        }
    }
    ConnectivityGraph { nodes: modules.iter().map(|m| m.id.clone()).collect(), edges }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn conn(id: &str, pose: Transform, gender: Gender, kind: &str, size: f64) -> Connector {
        Connector { id: id.into(), body2connector: pose, gender, kind: kind.into(), size }
    }

    pub(crate) fn body(id: &str, connectors: Vec<Connector>) -> Body {
        let g = Geometry::new(Shape::Sphere { radius: 0.01 }, Transform::identity());
        Body {
            id: id.into(),
            inertia: Inertia { mass: 1.0, com: Vec3::ZERO, tensor: Mat3::from_diagonal(Vec3::new(0.01, 0.01, 0.01)) },
            collision: g.clone(),
            visual: g,
            connectors,
        }
    }

    pub(crate) fn revolute(id: &str, parent: &str, child: &str) -> Joint {
        Joint {
            id: id.into(),
            kind: JointKind::Revolute,
            parent_body: parent.into(),
            child_body: child.into(),
            parent2joint: Transform::translate(0.0, 0.0, 0.05),
            joint2child: Transform::translate(0.0, 0.0, 0.05),
            limits: JointLimits { lower: -3.0, upper: 3.0, velocity: 1.0, effort: 10.0 },
        }
    }

    /// Three bodies, two revolute joints, an input and an output connector.
    pub(crate) fn powerball() -> Module {
        Module {
            id: "PB".into(),
            name: "powerball".into(),
            bodies: vec![
                body("B1", vec![conn("in", Transform::rot_x(core::f64::consts::PI), Gender::Female, "flange", 0.08)]),
                body("B2", vec![]),
                body("B3", vec![conn("out", Transform::translate(0.0, 0.0, 0.1), Gender::Male, "flange", 0.08)]),
            ],
            joints: vec![revolute("joint_1", "B1", "B2"), revolute("joint_2", "B2", "B3")],
        }
    }

    fn codes(m: &Module) -> Vec<ViolationCode> {
        validate_module(m).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn powerball_is_valid() {
        assert_eq!(validate_module(&powerball()), vec![]);
        assert_eq!(powerball().dof(), 2);
    }

    #[test]
    fn body_cycle_is_reported() {
        let mut m = powerball();
        m.joints.push(revolute("joint_3", "B3", "B1"));
        assert!(codes(&m).contains(&ViolationCode::IntraModuleCycle));
    }

    #[test]
    fn missing_connectors_reported() {
        let mut m = powerball();
        m.bodies.iter_mut().for_each(|b| b.connectors.clear());
        assert_eq!(codes(&m), vec![ViolationCode::NoConnectors]);
    }

    #[test]
    fn dangling_and_self_joints() {
        let mut m = powerball();
        m.joints[1].child_body = "B9".into();
        let v = validate_module(&m);
        assert!(v.iter().any(|v| v.code == ViolationCode::DanglingBodyReference && v.message.contains("joint_2")));
        assert!(v.iter().any(|v| v.code == ViolationCode::DisconnectedBodies));

        let mut m = powerball();
        m.joints[0].child_body = "B1".into();
        assert!(codes(&m).contains(&ViolationCode::SelfJoint));
    }

    #[test]
    fn field_level_violations() {
        let mut m = powerball();
        m.bodies[0].connectors[0].size = 0.0;
        m.bodies[1].inertia.tensor.0[0][1] = 0.5;
        m.joints[0].limits.lower = 4.0;
        m.bodies[2].collision.shape = Shape::Mesh { path: "../escape.stl".into() };
        m.bodies[1].id = "B1".into();
        let c = codes(&m);
        for expected in [
            ViolationCode::InvalidConnectorSize,
            ViolationCode::InvalidInertia,
            ViolationCode::InvalidLimits,
            ViolationCode::InvalidGeometry,
            ViolationCode::DuplicateId,
        ] {
            assert!(c.contains(&expected), "{expected:?} missing from {c:?}");
        }
        let mut m = powerball();
        m.bodies[1].inertia.tensor = Mat3::from_diagonal(Vec3::new(0.1, -0.1, 0.1));
        assert_eq!(codes(&m), vec![ViolationCode::InvalidInertia]);
    }

    #[test]
    fn powerball_module_graph() {
        let g = build_module_graph(&powerball());
        assert_eq!(g.nodes.len(), 7);
        assert_eq!(g.edges.len(), 12);
        for (i, e) in g.edges.iter().enumerate() {
            let r = &g.edges[g.reverse_edge(i)];
            assert_eq!((r.from, r.to), (e.to, e.from));
            assert!(e.transition.compose(&r.transition).approx_eq(&Transform::identity(), 1e-12));
            assert!(r.transition.approx_eq(&e.transition.inverse(), 0.0));
        }
        for n in 0..g.nodes.len() {
            if g.nodes[n].kind == NodeKind::Connector {
                assert_eq!(g.degree(n), 2);
            }
        }
    }

    #[test]
    fn minimal_module_graph() {
        let m = Module {
            id: "m".into(),
            name: "m".into(),
            bodies: vec![body("b", vec![conn("c", Transform::identity(), Gender::Male, "x", 1.0)])],
            joints: vec![],
        };
        let g = build_module_graph(&m);
        assert_eq!((g.nodes.len(), g.edges.len()), (2, 2));
    }

    #[test]
    fn matching_rules() {
        let id = Transform::identity();
        let m = conn("a", id, Gender::Male, "flange", 0.08);
        let f = conn("b", id, Gender::Female, "flange", 0.08);
        let h8 = conn("c", id, Gender::Hermaphroditic, "flange", 0.08);
        let h10 = conn("d", id, Gender::Hermaphroditic, "flange", 0.10);
        assert!(connectors_match(&m, &f) && connectors_match(&f, &m));
        assert!(!connectors_match(&m, &m));
        assert!(!connectors_match(&h8, &h10));
        assert!(connectors_match(&h8, &h8));
        assert!(!connectors_match(&m, &conn("e", id, Gender::Female, "clamp", 0.08)));
        let base = conn("base", id, Gender::Male, BASE_KIND, 0.08);
        let base_f = conn("base2", id, Gender::Female, BASE_KIND, 0.08);
        assert!(!connectors_match(&base, &base_f));
    }

    #[test]
    fn connectivity_examples() {
        let id = Transform::identity();
        let a = Module {
            id: "a".into(),
            name: "a".into(),
            bodies: vec![body("b", vec![conn("out", id, Gender::Male, "flange", 0.08)])],
            joints: vec![],
        };
        let b = Module {
            id: "b".into(),
            name: "b".into(),
            bodies: vec![body("b", vec![conn("in", id, Gender::Female, "flange", 0.08)])],
            joints: vec![],
        };
        let set = ModuleSet::new("s", [a.clone(), b]).unwrap();
        let g = connectivity_graph(&set);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert!(g.are_connected("b", "a"));

        let mut c = a.clone();
        c.id = "c".into();
        let g = connectivity_graph(&ModuleSet::new("s", [a, c]).unwrap());
        assert!(g.edges.is_empty());

        // A powerball can attach to another powerball instance.
        let g = connectivity_graph(&ModuleSet::new("s", [powerball()]).unwrap());
        assert_eq!(g.edges[&("PB".into(), "PB".into())].len(), 2);
    }

    #[test]
    fn set_rejects_duplicates_and_invalid_modules() {
        assert!(matches!(ModuleSet::new("s", [powerball(), powerball()]), Err(ModuleSetError::DuplicateModule(_))));
        let mut bad = powerball();
        bad.joints[0].child_body = "nope".into();
        let err = ModuleSet::new("s", [bad]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("PB") && msg.contains("joint_1"), "{msg}");
    }
}
