//! Assemblies of module instances, the graph of modules and the assembly graph.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{Pose, Transform};
use crate::module_model::{build_module_graph, connectors_match, Connector, Module, ModuleGraph, ModuleSet, NodeKind, BASE_KIND, EEF_KIND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("assembly has no modules")]
    Empty,
    #[error("unknown module id '{0}'")]
    UnknownModule(String),
    #[error("instance index {0} out of range")]
    InstanceOutOfRange(usize),
    #[error("instance {instance} has no connector '{connector}'")]
    UnknownConnector { instance: usize, connector: String },
    #[error("incompatible connectors in connection {0}")]
    IncompatibleConnectors(usize),
    #[error("connector '{connector}' of instance {instance} is used more than once")]
    ConnectorReused { instance: usize, connector: String },
    #[error("assembly not connected")]
    NotConnected,
    #[error("designated base connector '{connector}' of instance {instance} is not of kind \"base\"")]
    NotABaseConnector { instance: usize, connector: String },
    #[error("no connection between instances {0} and {1}")]
    NoConnection(usize, usize),
    #[error("ambiguous connection between instances {0} and {1} ({2} candidate pairs)")]
    AmbiguousConnection(usize, usize, usize),
    #[error("invalid chain endpoints: {0}")]
    InvalidChainEndpoints(&'static str),
    #[error("node is unreachable from the base connector")]
    Unreachable,
}

/// A mated connector pair `σ = (u, c_u, v, c_v)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Connection {
    pub module_a: usize,
    pub connector_a: String,
    pub module_b: usize,
    pub connector_b: String,
}

impl Connection {
    pub fn new(module_a: usize, connector_a: impl Into<String>, module_b: usize, connector_b: impl Into<String>) -> Self {
        Connection { module_a, connector_a: connector_a.into(), module_b, connector_b: connector_b.into() }
    }
}

/// The single connector attaching the assembly to the world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseConnector {
    pub instance: usize,
    pub connector: String,
}

impl BaseConnector {
    pub fn new(instance: usize, connector: impl Into<String>) -> Self {
        BaseConnector { instance, connector: connector.into() }
    }
}

/// Validated assembly: positional module instances plus connections.
#[derive(Debug, Clone)]
pub struct Assembly {
    set: Arc<ModuleSet>,
    instances: Vec<String>,
    connections: Vec<Connection>,
    base: BaseConnector,
    base_pose: Pose,
}

impl PartialEq for Assembly {
    fn eq(&self, o: &Self) -> bool {
        (Arc::ptr_eq(&self.set, &o.set) || self.set.id == o.set.id)
            && self.instances == o.instances
            && self.connections == o.connections
            && self.base == o.base
            && self.base_pose == o.base_pose
    }
}

fn connector<'m>(module: &'m Module, instance: usize, id: &str) -> Result<&'m Connector, AssemblyError> {
    module
        .connector(id)
        .map(|(_, c)| c)
        .ok_or_else(|| AssemblyError::UnknownConnector { instance, connector: id.into() })
}

impl Assembly {
    pub fn new(
        set: Arc<ModuleSet>,
        instances: Vec<String>,
        connections: Vec<Connection>,
        base: BaseConnector,
        base_pose: Pose,
    ) -> Result<Self, AssemblyError> {
        if instances.is_empty() {
            return Err(AssemblyError::Empty);
        }
        let modules = instances
            .iter()
            .map(|id| set.get(id).ok_or_else(|| AssemblyError::UnknownModule(id.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let module_at = |i: usize| modules.get(i).copied().ok_or(AssemblyError::InstanceOutOfRange(i));

        let base_conn = connector(module_at(base.instance)?, base.instance, &base.connector)?;
        if base_conn.kind != BASE_KIND {
            return Err(AssemblyError::NotABaseConnector { instance: base.instance, connector: base.connector.clone() });
        }

        let mut used = BTreeSet::new();
        used.insert((base.instance, base.connector.as_str()));
        for (k, c) in connections.iter().enumerate() {
            let a = connector(module_at(c.module_a)?, c.module_a, &c.connector_a)?;
            let b = connector(module_at(c.module_b)?, c.module_b, &c.connector_b)?;
            if !connectors_match(a, b) {
                return Err(AssemblyError::IncompatibleConnectors(k));
            }
            for (inst, id) in [(c.module_a, c.connector_a.as_str()), (c.module_b, c.connector_b.as_str())] {
                if !used.insert((inst, id)) {
                    return Err(AssemblyError::ConnectorReused { instance: inst, connector: id.into() });
                }
            }
        }

        let assembly = Assembly { set, instances, connections, base, base_pose };
        if !assembly.graph_of_modules().is_connected() {
            return Err(AssemblyError::NotConnected);
        }
        Ok(assembly)
    }

    /// Chains modules left to right using the unique matching connector pair
    /// between each pair of neighbours. The base pose is the identity.
    pub fn from_serial_modules<S: AsRef<str>>(set: Arc<ModuleSet>, modules: &[S]) -> Result<Self, AssemblyError> {
        let lookup = Arc::clone(&set);
        let resolved = modules
            .iter()
            .map(|id| lookup.get(id.as_ref()).ok_or_else(|| AssemblyError::UnknownModule(id.as_ref().into())))
            .collect::<Result<Vec<_>, _>>()?;
        let (first, last) = match (resolved.first(), resolved.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(AssemblyError::Empty),
        };
        let mut bases = first.connectors().filter(|(_, c)| c.kind == BASE_KIND);
        let base = match (bases.next(), bases.next()) {
            (Some((_, c)), None) => c.id.clone(),
            (None, _) => return Err(AssemblyError::InvalidChainEndpoints("first module has no base connector")),
            (Some(_), Some(_)) => return Err(AssemblyError::InvalidChainEndpoints("first module has several base connectors")),
        };
        if !last.has_connector_kind(EEF_KIND) {
            return Err(AssemblyError::InvalidChainEndpoints("last module has no eef connector"));
        }

        let mut connections = Vec::with_capacity(resolved.len().saturating_sub(1));
        let mut entry: Option<String> = None;
        for (i, pair) in resolved.windows(2).enumerate() {
            let (u, v) = (pair[0], pair[1]);
            let mut candidates = u
                .connectors()
                .filter(|(_, a)| entry.as_deref() != Some(a.id.as_str()))
                .flat_map(|(_, a)| v.connectors().filter(move |(_, b)| connectors_match(a, b)).map(move |(_, b)| (a, b)));
            let (a, b) = match (candidates.next(), candidates.next()) {
                (Some(p), None) => p,
                (None, _) => return Err(AssemblyError::NoConnection(i, i + 1)),
                (Some(_), Some(_)) => return Err(AssemblyError::AmbiguousConnection(i, i + 1, 2 + candidates.count())),
            };
            connections.push(Connection::new(i, a.id.clone(), i + 1, b.id.clone()));
            entry = Some(b.id.clone());
        }
        let instances = modules.iter().map(|m| String::from(m.as_ref())).collect();
        Assembly::new(set, instances, connections, BaseConnector { instance: 0, connector: base }, Transform::identity())
    }

    pub fn set(&self) -> &Arc<ModuleSet> {
        &self.set
    }

    pub fn instances(&self) -> &[String] {
        &self.instances
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn base(&self) -> &BaseConnector {
        &self.base
    }

    pub fn base_pose(&self) -> &Pose {
        &self.base_pose
    }

    pub fn with_base_pose(mut self, pose: Pose) -> Self {
        self.base_pose = pose;
        self
    }

    pub fn module(&self, instance: usize) -> &Module {
        // Instances were resolved against the set at construction.
        self.set.get(&self.instances[instance]).expect("validated instance")
    }

    pub fn module_count(&self) -> usize {
        self.instances.len()
    }

    /// Count of non-fixed joints over all instances.
    pub fn degrees_of_freedom(&self) -> usize {
        (0..self.instances.len()).map(|i| self.module(i).dof()).sum()
    }

    /// Whether `(instance, connector)` takes part in a connection or is the base.
    pub fn is_connector_used(&self, instance: usize, connector: &str) -> bool {
        (self.base.instance == instance && self.base.connector == connector)
            || self.connections.iter().any(|c| {
                (c.module_a == instance && c.connector_a == connector) || (c.module_b == instance && c.connector_b == connector)
            })
    }

    /// Unconnected `eef` connectors as `(instance, connector id)`, in instance then body order.
    pub fn eef_connectors(&self) -> Vec<(usize, String)> {
        (0..self.instances.len())
            .flat_map(|i| {
                self.module(i)
                    .connectors()
                    .filter(|(_, c)| c.is_eef())
                    .map(move |(_, c)| (i, c.id.clone()))
                    .collect::<Vec<_>>()
            })
            .filter(|(i, c)| !self.is_connector_used(*i, c))
            .collect()
    }

    pub fn graph_of_modules(&self) -> GraphOfModules {
        GraphOfModules { node_count: self.instances.len(), edges: self.connections.clone() }
    }

    pub fn assembly_graph(&self) -> AssemblyGraph {
        AssemblyGraph::build(self)
    }
}

/// Undirected graph with one node per instance and one edge per connection.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphOfModules {
    pub node_count: usize,
    pub edges: Vec<Connection>,
}

impl GraphOfModules {
    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |c| {
            if c.module_a == node {
                Some(c.module_b)
            } else if c.module_b == node {
                Some(c.module_a)
            } else {
                None
            }
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for m in self.neighbours(n) {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Node of the assembly graph, qualified by instance index. Ordering is
/// `(instance, id)`, which fixes BFS tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub instance: usize,
    pub id: String,
    pub kind: NodeKind,
}

impl NodeRef {
    pub fn new(instance: usize, kind: NodeKind, id: impl Into<String>) -> Self {
        NodeRef { instance, id: id.into(), kind }
    }

    pub fn body(instance: usize, id: impl Into<String>) -> Self {
        NodeRef::new(instance, NodeKind::Body, id)
    }

    pub fn joint(instance: usize, id: impl Into<String>) -> Self {
        NodeRef::new(instance, NodeKind::Joint, id)
    }

    pub fn connector(instance: usize, id: impl Into<String>) -> Self {
        NodeRef::new(instance, NodeKind::Connector, id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Edge inside one module graph.
    Module,
    /// Inserted between two mated connectors; carries `R_x(π)`.
    Connection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyEdge {
    pub from: usize,
    pub to: usize,
    pub transition: Transform,
    pub kind: EdgeKind,
}

/// Union of all instance module graphs plus two antiparallel connection
/// edges per mated connector pair (`G_a`).
#[derive(Debug, Clone)]
pub struct AssemblyGraph {
    nodes: Vec<NodeRef>,
    index: BTreeMap<NodeRef, usize>,
    edges: Vec<AssemblyEdge>,
    /// Outgoing edge ids per node, sorted by target node order.
    adjacency: Vec<Vec<usize>>,
    base: usize,
}

/// Result of a breadth-first traversal: nodes in visit order and, for each
/// visited node, the edge it was reached through.
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub order: Vec<usize>,
    pub parent_edge: Vec<Option<usize>>,
    pub visited: Vec<bool>,
}

impl AssemblyGraph {
    fn build(a: &Assembly) -> AssemblyGraph {
        let mut graphs: BTreeMap<&str, ModuleGraph> = BTreeMap::new();
        for id in &a.instances {
            if !graphs.contains_key(id.as_str()) {
                graphs.insert(id.as_str(), build_module_graph(a.set.get(id).expect("validated instance")));
            }
        }
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (inst, id) in a.instances.iter().enumerate() {
            let g = &graphs[id.as_str()];
            let offset = nodes.len();
            nodes.extend(g.nodes.iter().map(|n| NodeRef { instance: inst, id: n.id.clone(), kind: n.kind }));
            edges.extend(g.edges.iter().map(|e| AssemblyEdge {
                from: e.from + offset,
                to: e.to + offset,
                transition: e.transition,
                kind: EdgeKind::Module,
            }));
        }
        let index: BTreeMap<NodeRef, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let flip = Transform::connection_flip();
        for c in &a.connections {
            let u = index[&NodeRef::connector(c.module_a, c.connector_a.clone())];
            let v = index[&NodeRef::connector(c.module_b, c.connector_b.clone())];
            edges.push(AssemblyEdge { from: u, to: v, transition: flip, kind: EdgeKind::Connection });
            edges.push(AssemblyEdge { from: v, to: u, transition: flip, kind: EdgeKind::Connection });
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.from].push(i);
        }
        for adj in &mut adjacency {
            adj.sort_by(|&x, &y| nodes[edges[x].to].cmp(&nodes[edges[y].to]).then(x.cmp(&y)));
        }
        let base = index[&NodeRef::connector(a.base.instance, a.base.connector.clone())];
        AssemblyGraph { nodes, index, edges, adjacency, base }
    }

    pub fn nodes(&self) -> &[NodeRef] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeRef {
        &self.nodes[i]
    }

    pub fn edges(&self) -> &[AssemblyEdge] {
        &self.edges
    }

    pub fn index_of(&self, node: &NodeRef) -> Option<usize> {
        self.index.get(node).copied()
    }

    /// Node index of the designated base connector.
    pub fn base_node(&self) -> usize {
        self.base
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = (usize, &AssemblyEdge)> {
        self.adjacency[node].iter().map(move |&e| (e, &self.edges[e]))
    }

    pub fn connection_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Connection).count()
    }

    /// Breadth-first traversal from `root`, expanding neighbours in node order.
    pub fn bfs(&self, root: usize) -> BfsTree {
        let n = self.nodes.len();
        let mut visited = vec![false; n];
        let mut parent_edge = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &e in &self.adjacency[u] {
                let v = self.edges[e].to;
                if !visited[v] {
                    visited[v] = true;
                    parent_edge[v] = Some(e);
                    queue.push_back(v);
                }
            }
        }
        BfsTree { order, parent_edge, visited }
    }

    /// Product of edge transitions along the BFS shortest path `u → v`.
    pub fn relative_transform(&self, u: usize, v: usize) -> Result<Transform, AssemblyError> {
        let tree = self.bfs(u);
        self.path_product(&tree, v)
    }

    fn path_product(&self, tree: &BfsTree, v: usize) -> Result<Transform, AssemblyError> {
        if !tree.visited[v] {
            return Err(AssemblyError::Unreachable);
        }
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(e) = tree.parent_edge[cur] {
            path.push(e);
            cur = self.edges[e].from;
        }
        Ok(path.iter().rev().fold(Transform::identity(), |acc, &e| acc.compose(&self.edges[e].transition)))
    }

    /// Static placement of `target` relative to the base connector frame.
    pub fn frame_placement(&self, target: usize) -> Result<Transform, AssemblyError> {
        self.relative_transform(self.base, target)
    }

    /// Placements of every node relative to the base connector, accumulated
    /// in one BFS pass. Unreachable nodes get `None`.
    pub fn frame_placements(&self) -> Vec<Option<Transform>> {
        let tree = self.bfs(self.base);
        let mut out = vec![None; self.nodes.len()];
        out[self.base] = Some(Transform::identity());
        for &n in &tree.order[1..] {
            let e = &self.edges[tree.parent_edge[n].expect("non-root node has a parent edge")];
            out[n] = out[e.from].map(|t: Transform| t.compose(&e.transition));
        }
        out
    }

    /// True iff the undirected reduction is connected and acyclic.
    pub fn is_tree(&self) -> bool {
        let undirected = self.edges.len() / 2;
        self.nodes.len() == undirected + 1 && self.bfs(self.base).visited.iter().all(|&v| v)
    }
}
