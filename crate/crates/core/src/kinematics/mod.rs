//! Flattened kinematic tree of an assembly.
//!
//! Every body becomes a [`Segment`] whose frame is the body frame. A segment
//! is placed relative to its parent by `pre · motion(q) · post`, where the
//! motion is present only when the two bodies are linked by a movable joint.
//! Segments are stored in BFS order from the base connector, so a parent
//! always precedes its children.

pub mod collision;
mod dynamics;
mod ik;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assembly::{Assembly, NodeRef};
use crate::geometry::{rotation_log, MotionKind, Pose, Transform};
use crate::module_model::{Inertia, JointLimits, NodeKind};

pub use collision::{intersects, PlacedPrimitive, Primitive};
pub use dynamics::DEFAULT_GRAVITY;
pub use ik::{IkOptions, IkResult};

/// Joint displacements, radians for revolute and meters for prismatic joints.
pub type Configuration = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KinematicsError {
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown frame {0:?}")]
    UnknownFrame(NodeRef),
    #[error("closed-chain not supported")]
    NotATree,
    #[error("trajectory needs at least 2 steps and a positive timestep")]
    InvalidTrajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentJoint {
    pub name: NodeRef,
    pub motion: MotionKind,
    /// Traversed from the child body towards the parent body; the motion sign flips.
    pub reversed: bool,
    /// Position in the configuration vector.
    pub index: usize,
    pub limits: JointLimits,
}

impl SegmentJoint {
    pub fn transform(&self, q: f64) -> Transform {
        Transform::joint_motion(self.motion, if self.reversed { -q } else { q })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub body: NodeRef,
    pub parent: Option<usize>,
    pub pre: Transform,
    pub joint: Option<SegmentJoint>,
    pub post: Transform,
    pub inertia: Inertia,
    pub collision: Option<PlacedPrimitive>,
}

impl Segment {
    /// Pose of this segment in its parent's frame.
    pub fn local(&self, q: &[f64]) -> Transform {
        match &self.joint {
            Some(j) => self.pre.compose(&j.transform(q[j.index])).compose(&self.post),
            None => self.pre.compose(&self.post),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    segments: Vec<Segment>,
    /// Frame of every assembly node as (segment, offset in segment frame).
    frames: BTreeMap<NodeRef, (usize, Transform)>,
    joints: Vec<SegmentJoint>,
    base_pose: Pose,
    eef: Option<NodeRef>,
    self_collision_pairs: Vec<(usize, usize)>,
}

/// Ordered configurations with a uniform timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub configurations: Vec<Configuration>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }
}

/// Uniform interpolation between `q0` and `q1`, endpoints included.
pub fn linear_trajectory(q0: &[f64], q1: &[f64], steps: usize, dt: f64) -> Result<Trajectory, KinematicsError> {
    if q0.len() != q1.len() {
        return Err(KinematicsError::DimensionMismatch { expected: q0.len(), got: q1.len() });
    }
    if steps < 2 || dt.is_nan() || dt <= 0.0 {
        return Err(KinematicsError::InvalidTrajectory);
    }
    let last = (steps - 1) as f64;
    let configurations = (0..steps)
        .map(|k| {
            if k == steps - 1 {
                return q1.to_vec();
            }
            let s = k as f64 / last;
            q0.iter().zip(q1).map(|(a, b)| a + (b - a) * s).collect()
        })
        .collect();
    Ok(Trajectory { configurations, dt })
}

struct Anchor {
    segment: Option<usize>,
    offset: Transform,
    /// Set on movable joint nodes: the joint frame in the anchor segment.
    pending: Option<(NodeRef, MotionKind, bool, JointLimits)>,
}

impl RobotModel {
    /// Direct conversion by breadth-first iteration over the assembly graph.
    pub fn from_assembly(a: &Assembly) -> Result<RobotModel, KinematicsError> {
        let g = a.assembly_graph();
        if !g.is_tree() {
            return Err(KinematicsError::NotATree);
        }
        let tree = g.bfs(g.base_node());
        let mut anchors: Vec<Option<Anchor>> = (0..g.nodes().len()).map(|_| None).collect();
        anchors[g.base_node()] = Some(Anchor { segment: None, offset: Transform::identity(), pending: None });
        let mut segments: Vec<Segment> = Vec::new();
        let mut joints = Vec::new();
        let mut frames = BTreeMap::new();

        for &s in &tree.order[1..] {
            let e = &g.edges()[tree.parent_edge[s].expect("visited node has parent edge")];
            let from = anchors[e.from].as_ref().expect("BFS visits parents first");
            let (parent_segment, parent_offset) = (from.segment, from.offset);
            let node = g.node(s).clone();
            let module = a.module(node.instance);
            let anchor = match node.kind {
                NodeKind::Body => {
                    let body = module.body(&node.id).expect("graph node from module");
                    let (pre, joint, post) = match &from.pending {
                        Some((name, motion, reversed, limits)) => {
                            let index = joints.len();
                            let j = SegmentJoint { name: name.clone(), motion: *motion, reversed: *reversed, index, limits: *limits };
                            joints.push(j.clone());
                            (parent_offset, Some(j), e.transition)
                        }
                        None => (parent_offset.compose(&e.transition), None, Transform::identity()),
                    };
                    let k = segments.len();
                    // The joint frame is rigid with the module's child body.
                    match &from.pending {
                        Some((name, _, false, _)) => {
                            frames.insert(name.clone(), (k, post.inverse()));
                        }
                        Some((name, _, true, _)) => {
                            frames.insert(name.clone(), (parent_segment.expect("joint follows a body"), parent_offset));
                        }
                        None => {}
                    }
                    let collision = Primitive::from_shape(&body.collision.shape).map(|p| PlacedPrimitive::new(p, body.collision.pose));
                    segments.push(Segment {
                        body: node.clone(),
                        parent: parent_segment,
                        pre,
                        joint,
                        post,
                        inertia: body.inertia,
                        collision,
                    });
                    Anchor { segment: Some(k), offset: Transform::identity(), pending: None }
                }
                NodeKind::Joint => {
                    let joint = module.joint(&node.id).expect("graph node from module");
                    let offset = parent_offset.compose(&e.transition);
                    match joint.kind.motion() {
                        Some(motion) => {
                            let from_body = &g.node(e.from).id;
                            let reversed = *from_body == joint.child_body;
                            Anchor { segment: parent_segment, offset, pending: Some((node.clone(), motion, reversed, joint.limits)) }
                        }
                        None => Anchor { segment: parent_segment, offset, pending: None },
                    }
                }
                NodeKind::Connector => {
                    Anchor { segment: parent_segment, offset: parent_offset.compose(&e.transition), pending: None }
                }
            };
            if anchor.pending.is_none() && node.kind != NodeKind::Body {
                if let Some(seg) = anchor.segment {
                    frames.insert(node.clone(), (seg, anchor.offset));
                }
            }
            if node.kind == NodeKind::Body {
                frames.insert(node.clone(), (segments.len() - 1, Transform::identity()));
            }
            anchors[s] = Some(anchor);
        }
        // Only the base connector precedes the root body.
        let root_pre = segments.first().map(|s| s.pre).unwrap_or_default();
        frames.insert(g.node(g.base_node()).clone(), (0, root_pre.inverse()));

        let self_collision_pairs = (0..segments.len())
            .flat_map(|i| (i + 1..segments.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                segments[i].collision.is_some()
                    && segments[j].collision.is_some()
                    && segments[j].parent != Some(i)
                    && segments[i].parent != Some(j)
            })
            .collect();

        let eef = a.eef_connectors().into_iter().next().map(|(i, c)| NodeRef::connector(i, c));
        Ok(RobotModel { segments, frames, joints, base_pose: *a.base_pose(), eef, self_collision_pairs })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Movable joints in configuration order.
    pub fn joints(&self) -> &[SegmentJoint] {
        &self.joints
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn base_pose(&self) -> &Pose {
        &self.base_pose
    }

    pub fn set_base_pose(&mut self, pose: Pose) {
        self.base_pose = pose;
    }

    /// First unconnected end-effector connector, if any.
    pub fn eef(&self) -> Option<&NodeRef> {
        self.eef.as_ref()
    }

    pub fn has_frame(&self, frame: &NodeRef) -> bool {
        self.frames.contains_key(frame)
    }

    pub fn frames(&self) -> impl Iterator<Item = &NodeRef> {
        self.frames.keys()
    }

    pub fn segment_of(&self, body: &NodeRef) -> Option<usize> {
        self.frames.get(body).filter(|_| body.kind == NodeKind::Body).map(|(s, _)| *s)
    }

    fn check_dim(&self, q: &[f64]) -> Result<(), KinematicsError> {
        if q.len() != self.dof() {
            return Err(KinematicsError::DimensionMismatch { expected: self.dof(), got: q.len() });
        }
        Ok(())
    }

    /// World poses of all segment frames.
    pub fn segment_poses(&self, q: &[f64]) -> Result<Vec<Transform>, KinematicsError> {
        self.check_dim(q)?;
        let mut out: Vec<Transform> = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            let parent = s.parent.map(|p| out[p]).unwrap_or(self.base_pose);
            out.push(parent.compose(&s.local(q)));
        }
        Ok(out)
    }

    /// World pose of an assembly frame.
    pub fn fk(&self, q: &[f64], frame: &NodeRef) -> Result<Transform, KinematicsError> {
        self.check_dim(q)?;
        let &(seg, offset) = self.frames.get(frame).ok_or_else(|| KinematicsError::UnknownFrame(frame.clone()))?;
        // Walk up the chain instead of evaluating every segment.
        let mut pose = offset;
        let mut cur = Some(seg);
        while let Some(i) = cur {
            let s = &self.segments[i];
            pose = s.local(q).compose(&pose);
            cur = s.parent;
        }
        Ok(self.base_pose.compose(&pose))
    }

    /// Geometric Jacobian of `frame` in world coordinates (rows: linear
    /// x, y, z then angular x, y, z) by central differences with step 1e-6.
    pub fn jacobian(&self, q: &[f64], frame: &NodeRef) -> Result<Vec<[f64; 6]>, KinematicsError> {
        self.fk(q, frame)?;
        let h = 1e-6;
        let mut cols = Vec::with_capacity(q.len());
        let mut qp = q.to_vec();
        for i in 0..q.len() {
            qp[i] = q[i] + h;
            let plus = self.fk(&qp, frame)?;
            qp[i] = q[i] - h;
            let minus = self.fk(&qp, frame)?;
            qp[i] = q[i];
            let lin = (plus.translation() - minus.translation()) * (0.5 / h);
            let ang = rotation_log(&(*plus.rotation() * minus.rotation().transpose())) * (0.5 / h);
            cols.push([lin.x, lin.y, lin.z, ang.x, ang.y, ang.z]);
        }
        Ok(cols)
    }

    /// Uniform sample inside the position limits; deterministic per seed.
    pub fn random_configuration(&self, rng_seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        self.sample_configuration(&mut rng)
    }

    pub(crate) fn sample_configuration<R: Rng>(&self, rng: &mut R) -> Configuration {
        self.joints
            .iter()
            .map(|j| {
                let (lo, hi) = (j.limits.lower, j.limits.upper);
                if hi > lo {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect()
    }

    pub fn clamp_to_limits(&self, q: &mut [f64]) {
        for (x, j) in q.iter_mut().zip(&self.joints) {
            *x = x.clamp(j.limits.lower, j.limits.upper);
        }
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.len() == self.dof() && q.iter().zip(&self.joints).all(|(x, j)| *x >= j.limits.lower && *x <= j.limits.upper)
    }

    /// Collision primitives of all segments placed in world coordinates.
    pub fn collision_geometry(&self, q: &[f64]) -> Result<Vec<Option<PlacedPrimitive>>, KinematicsError> {
        let poses = self.segment_poses(q)?;
        Ok(self.segments.iter().zip(&poses).map(|(s, p)| s.collision.map(|c| c.placed_in(p))).collect())
    }

    /// True iff no robot primitive touches an obstacle and no pair of
    /// non-adjacent segments touches. Meshes are ignored.
    pub fn collision_free(&self, q: &[f64], obstacles: &[PlacedPrimitive]) -> Result<bool, KinematicsError> {
        let placed = self.collision_geometry(q)?;
        for p in placed.iter().flatten() {
            if obstacles.iter().any(|o| intersects(p, o)) {
                return Ok(false);
            }
        }
        for &(i, j) in &self.self_collision_pairs {
            if let (Some(a), Some(b)) = (&placed[i], &placed[j]) {
                if intersects(a, b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Convenience wrapper for [`RobotModel::from_assembly`].
pub fn to_robot_model(a: &Assembly) -> Result<RobotModel, KinematicsError> {
    RobotModel::from_assembly(a)
}
