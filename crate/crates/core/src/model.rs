//! Domain vocabulary: device types, control loops, problem instances and
//! placed architectures.
//!
//! Everything here is immutable once built. Architectures are assembled with
//! [`ArchitectureBuilder`] (or [`Architecture::from_parents`] for externally
//! authored designs) and frozen before they are shared.

use std::fmt;

use crate::error::ModelError;

/// Index into a [`ProblemInstance`]'s device catalog.
pub type TypeId = usize;
/// Index of a placed device inside an [`Architecture`].
pub type NodeId = usize;
/// Index of a control loop in the expanded loop list.
pub type LoopId = usize;

/// Role a device plays in the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Processor,
    Relay,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Processor => f.write_str("processor"),
            Role::Relay => f.write_str("relay"),
        }
    }
}

/// A commercially available device type.
///
/// Memory and instruction time only matter for processors; relays store 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceType {
    pub id: String,
    pub cost: f64,
    pub channels: u32,
    pub memory: f64,
    pub fail_prob: f64,
    pub instr_time: f64,
    pub is_processor: bool,
    pub max_children: u32,
    pub relay_delay: f64,
}

impl DeviceType {
    pub fn role(&self) -> Role {
        if self.is_processor {
            Role::Processor
        } else {
            Role::Relay
        }
    }

    /// Field signals can be wired to this type, so it may sit at leaf level.
    pub fn is_leaf_capable(&self) -> bool {
        self.channels > 0
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &str, reason: &str| {
            Err(ModelError::InvalidDevice {
                id: self.id.clone(),
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        if self.id.is_empty() {
            return bad("id", "must not be empty");
        }
        if !(self.cost.is_finite() && self.cost > 0.0) {
            return bad("cost", "must be finite and > 0");
        }
        if !(self.memory.is_finite() && self.memory >= 0.0) {
            return bad("memory", "must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.fail_prob) {
            return bad("fail_prob", "must lie in [0, 1]");
        }
        if !(self.instr_time.is_finite() && self.instr_time >= 0.0) {
            return bad("instr_time", "must be finite and >= 0");
        }
        if !(self.relay_delay.is_finite() && self.relay_delay >= 0.0) {
            return bad("relay_delay", "must be finite and >= 0");
        }
        if self.is_processor && self.relay_delay != 0.0 {
            return bad("relay_delay", "must be 0 for processing units");
        }
        Ok(())
    }
}

/// One control loop: signals to wire, memory to hold, instructions to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlLoop {
    pub signals: u32,
    pub memory: f64,
    pub instructions: u64,
}

impl ControlLoop {
    pub fn new(signals: u32, memory: f64, instructions: u64) -> Self {
        Self {
            signals,
            memory,
            instructions,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.signals == 0 {
            return Err(ModelError::InvalidLoop("signals must be >= 1".into()));
        }
        if !(self.memory.is_finite() && self.memory >= 0.0) {
            return Err(ModelError::InvalidLoop(
                "memory must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Expands `(count, loop)` groups into individual loops, preserving group order.
pub fn expand_loops(groups: &[(u64, ControlLoop)]) -> Result<Vec<ControlLoop>, ModelError> {
    let mut out = Vec::new();
    for (i, (count, lp)) in groups.iter().enumerate() {
        if *count == 0 {
            return Err(ModelError::InvalidLoop(format!(
                "loop group {i}: count must be >= 1"
            )));
        }
        out.extend(std::iter::repeat_n(lp, *count as usize).cloned());
    }
    Ok(out)
}

/// A synthesis problem: catalog, loops, tree height and the two limits.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub device_types: Vec<DeviceType>,
    pub loops: Vec<ControlLoop>,
    pub levels: u32,
    pub t_max: f64,
    pub p_max: f64,
    /// Free-form provenance note carried through serialization.
    pub note: Option<String>,
}

impl ProblemInstance {
    pub fn new(
        device_types: Vec<DeviceType>,
        loops: Vec<ControlLoop>,
        levels: u32,
        t_max: f64,
        p_max: f64,
    ) -> Result<Self, ModelError> {
        let inst = Self {
            device_types,
            loops,
            levels,
            t_max,
            p_max,
            note: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.device_types.is_empty() {
            return Err(ModelError::EmptyCatalog);
        }
        if self.loops.is_empty() {
            return Err(ModelError::InvalidLoop(
                "at least one control loop is required".into(),
            ));
        }
        if self.levels < 2 {
            return Err(ModelError::InvalidInstance(
                "levels must be >= 2".into(),
            ));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(ModelError::InvalidInstance(
                "t_max must be finite and >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(ModelError::InvalidInstance(
                "p_max must lie in [0, 1]".into(),
            ));
        }
        for d in &self.device_types {
            d.validate()?;
        }
        for (i, d) in self.device_types.iter().enumerate() {
            if self.device_types[..i].iter().any(|o| o.id == d.id) {
                return Err(ModelError::InvalidDevice {
                    id: d.id.clone(),
                    field: "id".into(),
                    reason: "duplicate device id".into(),
                });
            }
        }
        for l in &self.loops {
            l.validate()?;
        }
        Ok(())
    }

    pub fn device(&self, ty: TypeId) -> &DeviceType {
        &self.device_types[ty]
    }

    pub fn type_index(&self, id: &str) -> Option<TypeId> {
        self.device_types.iter().position(|d| d.id == id)
    }

    pub fn num_types(&self) -> usize {
        self.device_types.len()
    }

    pub fn num_loops(&self) -> usize {
        self.loops.len()
    }

    /// True when every loop carries the same signals, memory and instructions.
    pub fn has_identical_loops(&self) -> bool {
        self.loops.windows(2).all(|w| w[0] == w[1])
    }
}

/// A placed device.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub device: TypeId,
    /// 1 for a root, parent level + 1 otherwise.
    pub level: u32,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// A placed hierarchy plus its loop wiring.
///
/// `connections[a]` lists the nodes loop `a` is physically wired to and
/// `assignments[a]` the nodes that process it. A well-formed design has exactly
/// one of each; the lists exist so malformed external designs can still be
/// represented and diagnosed.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    nodes: Vec<Node>,
    connections: Vec<Vec<NodeId>>,
    assignments: Vec<Vec<NodeId>>,
}

impl Architecture {
    /// Builds an architecture from per-node types and parent links.
    ///
    /// Children are recorded in node-index order. Multiple roots are accepted
    /// (they are a constraint violation, not a structural error); cycles and
    /// dangling parents are rejected.
    pub fn from_parents(
        types: Vec<TypeId>,
        parents: Vec<Option<NodeId>>,
        connections: Vec<Vec<NodeId>>,
        assignments: Vec<Vec<NodeId>>,
    ) -> Result<Self, ModelError> {
        let n = types.len();
        if parents.len() != n {
            return Err(ModelError::InvalidArchitecture(
                "types and parents differ in length".into(),
            ));
        }
        if connections.len() != assignments.len() {
            return Err(ModelError::InvalidArchitecture(
                "connections and assignments cover different loop counts".into(),
            ));
        }
        if n == 0 {
            return Err(ModelError::InvalidArchitecture("no nodes".into()));
        }
        let mut nodes: Vec<Node> = types
            .iter()
            .zip(&parents)
            .map(|(&device, &parent)| Node {
                device,
                level: 0,
                parent,
                children: Vec::new(),
            })
            .collect();
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(ModelError::UnknownNode(p));
                }
                if p == i {
                    return Err(ModelError::InvalidArchitecture(format!(
                        "node {i} is its own parent"
                    )));
                }
                nodes[p].children.push(i);
            }
        }
        // Levels by breadth-first walk from the roots; unreached nodes sit on a cycle.
        let mut queue: std::collections::VecDeque<NodeId> =
            (0..n).filter(|&i| parents[i].is_none()).collect();
        for &r in &queue {
            nodes[r].level = 1;
        }
        let mut seen = queue.len();
        while let Some(v) = queue.pop_front() {
            let next = nodes[v].level + 1;
            for c in nodes[v].children.clone() {
                nodes[c].level = next;
                seen += 1;
                queue.push_back(c);
            }
        }
        if seen != n {
            return Err(ModelError::InvalidArchitecture(
                "parent links contain a cycle".into(),
            ));
        }
        for list in connections.iter().chain(&assignments) {
            if let Some(&bad) = list.iter().find(|&&v| v >= n) {
                return Err(ModelError::UnknownNode(bad));
            }
        }
        let norm = |mut v: Vec<NodeId>| {
            v.sort_unstable();
            v.dedup();
            v
        };
        Ok(Self {
            nodes,
            connections: connections.into_iter().map(norm).collect(),
            assignments: assignments.into_iter().map(norm).collect(),
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: NodeId) -> Result<&Node, ModelError> {
        self.nodes.get(v).ok_or(ModelError::UnknownNode(v))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_loops(&self) -> usize {
        self.connections.len()
    }

    pub fn roots(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&v| self.nodes[v].parent.is_none())
            .collect()
    }

    /// The root when exactly one exists.
    pub fn root(&self) -> Option<NodeId> {
        match self.roots().as_slice() {
            [r] => Some(*r),
            _ => None,
        }
    }

    pub fn connections(&self, lp: LoopId) -> &[NodeId] {
        &self.connections[lp]
    }

    pub fn assignments(&self, lp: LoopId) -> &[NodeId] {
        &self.assignments[lp]
    }

    /// The unique leaf a loop is wired to, if it is wired to exactly one node.
    pub fn leaf_of(&self, lp: LoopId) -> Option<NodeId> {
        match self.connections[lp].as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    /// The unique processor handling a loop, if exactly one is assigned.
    pub fn processor_of(&self, lp: LoopId) -> Option<NodeId> {
        match self.assignments[lp].as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    /// Loops wired to `v`, in loop order.
    pub fn loops_connected_to(&self, v: NodeId) -> Vec<LoopId> {
        (0..self.connections.len())
            .filter(|&a| self.connections[a].contains(&v))
            .collect()
    }

    /// Loops processed by `v`, in loop order.
    pub fn loops_assigned_to(&self, v: NodeId) -> Vec<LoopId> {
        (0..self.assignments.len())
            .filter(|&a| self.assignments[a].contains(&v))
            .collect()
    }

    /// The subtree rooted at `v`, including `v`, in ascending index order.
    pub fn subtree(&self, v: NodeId) -> Result<Vec<NodeId>, ModelError> {
        self.node(v)?;
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.nodes[out[i]].children);
            i += 1;
        }
        out.sort_unstable();
        Ok(out)
    }

    /// `v` first, its root last; the length equals `v`'s level.
    pub fn path_to_root(&self, v: NodeId) -> Result<Vec<NodeId>, ModelError> {
        self.node(v)?;
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        Ok(out)
    }

    /// True when `anc` lies on the path from `v` to its root (including `v`).
    pub fn is_ancestor_or_self(&self, anc: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(c) = cur {
            if c == anc {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    pub fn max_level(&self) -> u32 {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }
}

/// Single-owner builder; nodes can only hang below existing nodes, so the
/// result is acyclic by construction.
#[derive(Debug, Clone)]
pub struct ArchitectureBuilder {
    types: Vec<TypeId>,
    parents: Vec<Option<NodeId>>,
    connections: Vec<Vec<NodeId>>,
    assignments: Vec<Vec<NodeId>>,
}

impl ArchitectureBuilder {
    pub fn new(num_loops: usize) -> Self {
        Self {
            types: Vec::new(),
            parents: Vec::new(),
            connections: vec![Vec::new(); num_loops],
            assignments: vec![Vec::new(); num_loops],
        }
    }

    pub fn add_root(&mut self, ty: TypeId) -> NodeId {
        self.types.push(ty);
        self.parents.push(None);
        self.types.len() - 1
    }

    pub fn add_child(&mut self, parent: NodeId, ty: TypeId) -> Result<NodeId, ModelError> {
        if parent >= self.types.len() {
            return Err(ModelError::UnknownNode(parent));
        }
        self.types.push(ty);
        self.parents.push(Some(parent));
        Ok(self.types.len() - 1)
    }

    pub fn connect(&mut self, lp: LoopId, v: NodeId) -> &mut Self {
        self.connections[lp].push(v);
        self
    }

    pub fn assign(&mut self, lp: LoopId, v: NodeId) -> &mut Self {
        self.assignments[lp].push(v);
        self
    }

    pub fn build(self) -> Result<Architecture, ModelError> {
        Architecture::from_parents(self.types, self.parents, self.connections, self.assignments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> Architecture {
        let mut b = ArchitectureBuilder::new(1);
        let r = b.add_root(0);
        let m = b.add_child(r, 1).unwrap();
        let l = b.add_child(m, 0).unwrap();
        b.connect(0, l).assign(0, m);
        b.build().unwrap()
    }

    #[test]
    fn expand_preserves_group_order() {
        let x = ControlLoop::new(1, 1.0, 5);
        let y = ControlLoop::new(2, 3.0, 7);
        let out = expand_loops(&[(1, x.clone()), (2, y.clone())]).unwrap();
        assert_eq!(out, vec![x.clone(), y.clone(), y]);
        assert_eq!(expand_loops(&[(3, x.clone())]).unwrap().len(), 3);
        assert_eq!(expand_loops(&[(180, x.clone())]).unwrap().len(), 180);
        assert!(expand_loops(&[(0, x)]).is_err());
    }

    #[test]
    fn subtree_and_path_on_chain() {
        let a = chain3();
        assert_eq!(a.subtree(2).unwrap(), vec![2]);
        assert_eq!(a.subtree(0).unwrap(), vec![0, 1, 2]);
        assert_eq!(a.subtree(1).unwrap(), vec![1, 2]);
        assert_eq!(a.path_to_root(0).unwrap(), vec![0]);
        assert_eq!(a.path_to_root(2).unwrap(), vec![2, 1, 0]);
        assert_eq!(a.node(2).unwrap().level, 3);
        assert!(matches!(a.subtree(9), Err(ModelError::UnknownNode(9))));
        assert!(a.path_to_root(3).is_err());
    }

    #[test]
    fn cycles_and_dangling_parents_rejected() {
        let r = Architecture::from_parents(vec![0, 0], vec![Some(1), Some(0)], vec![], vec![]);
        assert!(r.is_err());
        let r = Architecture::from_parents(vec![0], vec![Some(4)], vec![], vec![]);
        assert!(matches!(r, Err(ModelError::UnknownNode(4))));
    }

    #[test]
    fn forest_is_representable() {
        let a = Architecture::from_parents(vec![0, 0], vec![None, None], vec![], vec![]).unwrap();
        assert_eq!(a.roots(), vec![0, 1]);
        assert_eq!(a.root(), None);
    }

    #[test]
    fn processor_with_delay_rejected() {
        let d = DeviceType {
            id: "p".into(),
            cost: 1.0,
            channels: 0,
            memory: 1.0,
            fail_prob: 0.0,
            instr_time: 0.0,
            is_processor: true,
            max_children: 1,
            relay_delay: 0.5,
        };
        assert!(d.validate().is_err());
    }
}
