//! URDF document model and its generation from an assembly.
//!
//! Generation walks the assembly graph breadth-first from the base connector
//! and keeps, per visited node, the link it hangs from and its transform in
//! that link's frame. URDF joints reset the running transform.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::assembly::{Assembly, EdgeKind};
use crate::geometry::{Mat3, Transform, Vec3};
use crate::module_model::{JointKind, JointLimits, NodeKind, Shape};

/// Mass given to terminal end-effector links.
pub const TERMINAL_MASS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfInertial {
    pub origin: Transform,
    pub mass: f64,
    /// About the inertial origin, in its axes.
    pub tensor: Mat3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfGeometry {
    pub origin: Transform,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfLink {
    pub name: String,
    pub inertial: Option<UrdfInertial>,
    pub visual: Option<UrdfGeometry>,
    pub collision: Option<UrdfGeometry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfJoint {
    pub name: String,
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    pub origin: Transform,
    pub axis: Vec3,
    /// Present iff the joint is movable.
    pub limits: Option<JointLimits>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrdfDocument {
    pub name: String,
    pub links: Vec<UrdfLink>,
    pub joints: Vec<UrdfJoint>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UrdfError {
    #[error("closed-chain not supported")]
    ClosedChain,
    #[error("duplicate link name '{0}'")]
    DuplicateLink(String),
    #[error("duplicate joint name '{0}'")]
    DuplicateJoint(String),
    #[error("joint '{joint}' references unknown link '{link}'")]
    DanglingLink { joint: String, link: String },
    #[error("link '{0}' is the child of more than one joint")]
    MultipleParents(String),
    #[error("joint '{0}' connects a link to itself")]
    SelfLoop(String),
    #[error("link tree must have exactly one root, found {0}")]
    RootCount(usize),
    #[error("link graph contains a cycle")]
    Cycle,
}

impl UrdfDocument {
    pub fn link(&self, name: &str) -> Option<&UrdfLink> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&UrdfJoint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// Name of the only link that is nobody's child.
    pub fn root(&self) -> Option<&str> {
        let children: BTreeSet<&str> = self.joints.iter().map(|j| j.child.as_str()).collect();
        let mut roots = self.links.iter().filter(|l| !children.contains(l.name.as_str()));
        match (roots.next(), roots.next()) {
            (Some(r), None) => Some(&r.name),
            _ => None,
        }
    }

    /// Checks name uniqueness, references and the single-rooted tree shape.
    pub fn validate(&self) -> Result<(), UrdfError> {
        let mut links = BTreeSet::new();
        for l in &self.links {
            if !links.insert(l.name.as_str()) {
                return Err(UrdfError::DuplicateLink(l.name.clone()));
            }
        }
        let mut joints = BTreeSet::new();
        let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
        for j in &self.joints {
            if !joints.insert(j.name.as_str()) {
                return Err(UrdfError::DuplicateJoint(j.name.clone()));
            }
            for l in [&j.parent, &j.child] {
                if !links.contains(l.as_str()) {
                    return Err(UrdfError::DanglingLink { joint: j.name.clone(), link: l.clone() });
                }
            }
            if j.parent == j.child {
                return Err(UrdfError::SelfLoop(j.name.clone()));
            }
            if parent_of.insert(j.child.as_str(), j.parent.as_str()).is_some() {
                return Err(UrdfError::MultipleParents(j.child.clone()));
            }
        }
        let roots = self.links.len() - parent_of.len();
        if roots != 1 {
            return Err(UrdfError::RootCount(roots));
        }
        // One parent per link and a single root: acyclic iff every chain reaches the root.
        for l in &self.links {
            let mut cur = l.name.as_str();
            let mut steps = 0;
            while let Some(p) = parent_of.get(cur) {
                cur = p;
                steps += 1;
                if steps > self.links.len() {
                    return Err(UrdfError::Cycle);
                }
            }
        }
        Ok(())
    }

    /// Same structure and names with all numbers within `tol`.
    pub fn approx_eq(&self, other: &UrdfDocument, tol: f64) -> bool {
        fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
        }
        fn shape_eq(a: &Shape, b: &Shape, tol: f64) -> bool {
            match (a, b) {
                (Shape::Box { size: x }, Shape::Box { size: y }) => (*x - *y).max_abs() <= tol,
                (Shape::Cylinder { radius: r1, length: l1 }, Shape::Cylinder { radius: r2, length: l2 }) => {
                    close(*r1, *r2, tol) && close(*l1, *l2, tol)
                }
                (Shape::Sphere { radius: r1 }, Shape::Sphere { radius: r2 }) => close(*r1, *r2, tol),
                (Shape::Mesh { path: p1 }, Shape::Mesh { path: p2 }) => p1 == p2,
                _ => false,
            }
        }
        fn geom_eq(a: &Option<UrdfGeometry>, b: &Option<UrdfGeometry>, tol: f64) -> bool {
            match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => x.origin.approx_eq(&y.origin, tol) && shape_eq(&x.shape, &y.shape, tol),
                _ => false,
            }
        }
        fn limits_eq(a: &Option<JointLimits>, b: &Option<JointLimits>, tol: f64) -> bool {
            match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => {
                    close(x.lower, y.lower, tol)
                        && close(x.upper, y.upper, tol)
                        && close(x.velocity, y.velocity, tol)
                        && close(x.effort, y.effort, tol)
                }
                _ => false,
            }
        }
        self.name == other.name
            && self.links.len() == other.links.len()
            && self.joints.len() == other.joints.len()
            && self.links.iter().zip(&other.links).all(|(a, b)| {
                a.name == b.name
                    && geom_eq(&a.visual, &b.visual, tol)
                    && geom_eq(&a.collision, &b.collision, tol)
                    && match (&a.inertial, &b.inertial) {
                        (None, None) => true,
                        (Some(x), Some(y)) => {
                            x.origin.approx_eq(&y.origin, tol)
                                && close(x.mass, y.mass, tol)
                                && x.tensor.max_abs_diff(&y.tensor) <= tol * (1.0 + x.tensor.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
                        }
                        _ => false,
                    }
            })
            && self.joints.iter().zip(&other.joints).all(|(a, b)| {
                a.name == b.name
                    && a.kind == b.kind
                    && a.parent == b.parent
                    && a.child == b.child
                    && a.origin.approx_eq(&b.origin, tol)
                    && (a.axis - b.axis).max_abs() <= tol
                    && limits_eq(&a.limits, &b.limits, tol)
            })
    }
}

/// Where a visited node hangs in the URDF tree.
#[derive(Clone)]
struct Placement {
    /// Link whose frame `transform` is expressed in; `None` before the root link.
    link: Option<String>,
    transform: Transform,
}

fn link_name(instance: usize, id: &str) -> String {
    format!("{instance}_{id}")
}

/// Builds the URDF tree of a tree-shaped assembly.
///
/// Links are named `<instance>_<body>`, module joints `<instance>_<joint>`,
/// connection joints `<child instance>_<child connector>` and terminal
/// end-effector joints and links `<instance>_<connector>`.
pub fn generate_urdf(a: &Assembly, name: &str) -> Result<UrdfDocument, UrdfError> {
    let g = a.assembly_graph();
    if !g.is_tree() {
        return Err(UrdfError::ClosedChain);
    }
    let tree = g.bfs(g.base_node());
    let mut placed: Vec<Option<Placement>> = vec_of_none(g.nodes().len());
    placed[g.base_node()] = Some(Placement { link: None, transform: Transform::identity() });
    let mut links = Vec::new();
    let mut joints = Vec::new();

    for &s in &tree.order[1..] {
        let e = &g.edges()[tree.parent_edge[s].expect("visited node has parent edge")];
        let from = placed[e.from].clone().expect("BFS visits parents first");
        let node = g.node(s);
        let module = a.module(node.instance);
        let t_s = from.transform.compose(&e.transition);

        let placement = if e.kind == EdgeKind::Connection {
            // Mated frame differs by the flip; the new connector frame starts a link.
            let parent = from.link.clone().expect("connections follow a body");
            let (_, owner) = module.connector(&node.id).map(|(b, c)| (c, b)).expect("graph node from module");
            joints.push(UrdfJoint {
                name: link_name(node.instance, &node.id),
                kind: JointKind::Fixed,
                parent,
                child: link_name(node.instance, &owner.id),
                origin: t_s,
                axis: Vec3::Z,
                limits: None,
            });
            Placement { link: Some(link_name(node.instance, &owner.id)), transform: Transform::identity() }
        } else {
            match node.kind {
                NodeKind::Body => {
                    let body = module.body(&node.id).expect("graph node from module");
                    let geometry = |g: &crate::module_model::Geometry| UrdfGeometry { origin: t_s.compose(&g.pose), shape: g.shape.clone() };
                    let lname = link_name(node.instance, &node.id);
                    links.push(UrdfLink {
                        name: lname.clone(),
                        inertial: Some(UrdfInertial {
                            origin: t_s.compose(&Transform::from_translation(body.inertia.com)),
                            mass: body.inertia.mass,
                            tensor: body.inertia.tensor,
                        }),
                        visual: Some(geometry(&body.visual)),
                        collision: Some(geometry(&body.collision)),
                    });
                    Placement { link: Some(lname), transform: t_s }
                }
                NodeKind::Joint => {
                    let joint = module.joint(&node.id).expect("graph node from module");
                    let from_body = &g.node(e.from).id;
                    let reversed = *from_body == joint.child_body;
                    let other = if reversed { &joint.parent_body } else { &joint.child_body };
                    let movable = joint.kind != JointKind::Fixed;
                    joints.push(UrdfJoint {
                        name: link_name(node.instance, &node.id),
                        kind: joint.kind,
                        parent: from.link.clone().expect("joints follow a body"),
                        child: link_name(node.instance, other),
                        origin: t_s,
                        axis: if reversed && movable { -Vec3::Z } else { Vec3::Z },
                        limits: movable.then_some(joint.limits),
                    });
                    Placement { link: Some(link_name(node.instance, other)), transform: Transform::identity() }
                }
                NodeKind::Connector => {
                    let (_, c) = module.connector(&node.id).expect("graph node from module");
                    if c.is_eef() && !a.is_connector_used(node.instance, &node.id) {
                        let lname = link_name(node.instance, &node.id);
                        joints.push(UrdfJoint {
                            name: lname.clone(),
                            kind: JointKind::Fixed,
                            parent: from.link.clone().expect("connectors follow a body"),
                            child: lname.clone(),
                            origin: t_s,
                            axis: Vec3::Z,
                            limits: None,
                        });
                        links.push(UrdfLink {
                            name: lname,
                            inertial: Some(UrdfInertial { origin: Transform::identity(), mass: TERMINAL_MASS, tensor: Mat3::ZERO }),
                            visual: None,
                            collision: None,
                        });
                    }
                    Placement { link: from.link.clone(), transform: t_s }
                }
            }
        };
        placed[s] = Some(placement);
    }
    Ok(UrdfDocument { name: name.into(), links, joints })
}

fn vec_of_none<T>(n: usize) -> Vec<Option<T>> {
    (0..n).map(|_| None).collect()
}
