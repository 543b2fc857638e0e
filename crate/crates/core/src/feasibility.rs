//! Constraint evaluation for complete architectures.
//!
//! [`validate`] checks every constraint family without short-circuiting, so a
//! single report lists all problems with a design. Timing and reliability
//! figures are filled in even when other families fail.

use std::fmt;

use crate::model::{Architecture, DeviceType, LoopId, NodeId, ProblemInstance};

/// One family of constraints on a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintFamily {
    /// Exactly one node without a parent.
    SingleRoot,
    /// Leaves sit at level S, have no children, and no branch ends early.
    LeafDepth,
    /// Non-leaf nodes respect their type's fan-out limit.
    FanOut,
    /// Every loop is wired to exactly one leaf.
    LoopConnection,
    /// Loops are never assigned to relays.
    RelayAssignment,
    /// Every loop is assigned to exactly one node.
    LoopAssignment,
    /// Assigned memory fits the processor.
    Memory,
    /// A processor only serves loops wired inside its own subtree.
    SubtreeService,
    /// Wired signals fit the node's channels.
    Channels,
    /// Loop response time within `t_max`.
    Timing,
    /// System failure probability within `p_max`.
    Reliability,
    /// No processor directly below another processor.
    ProcessorParent,
    /// No processor anywhere below another processor.
    ProcessorSubtree,
    /// Exactly one processor between each leaf and the root.
    ProcessorOnPath,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 14] = [
        ConstraintFamily::SingleRoot,
        ConstraintFamily::LeafDepth,
        ConstraintFamily::FanOut,
        ConstraintFamily::LoopConnection,
        ConstraintFamily::RelayAssignment,
        ConstraintFamily::LoopAssignment,
        ConstraintFamily::Memory,
        ConstraintFamily::SubtreeService,
        ConstraintFamily::Channels,
        ConstraintFamily::Timing,
        ConstraintFamily::Reliability,
        ConstraintFamily::ProcessorParent,
        ConstraintFamily::ProcessorSubtree,
        ConstraintFamily::ProcessorOnPath,
    ];

    /// Families the constructor guarantees without checking (all but reliability).
    pub fn guaranteed_by_construction(self) -> bool {
        self != ConstraintFamily::Reliability
    }
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub nodes: Vec<NodeId>,
    pub loops: Vec<LoopId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub worst_loop_time: f64,
    pub system_fail_prob: f64,
    pub total_cost: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, family: ConstraintFamily) -> bool {
        self.violations.iter().any(|v| v.family == family)
    }

    pub fn families(&self) -> Vec<ConstraintFamily> {
        let mut f: Vec<_> = self.violations.iter().map(|v| v.family).collect();
        f.sort();
        f.dedup();
        f
    }
}

/// Response time of a loop given its processor's total instruction load and
/// the relay delay between its leaf and that processor.
pub fn loop_time(total_instructions: f64, instr_time: f64, path_delay: f64) -> f64 {
    total_instructions * instr_time + 2.0 * path_delay
}

/// Sums relay delays along a path, walked from the leaf upward.
/// Processors contribute nothing.
pub fn accumulate_delay<'a>(path: impl IntoIterator<Item = &'a DeviceType>) -> f64 {
    let mut acc = 0.0;
    for d in path {
        if !d.is_processor {
            acc += d.relay_delay;
        }
    }
    acc
}

pub fn total_cost(arch: &Architecture, inst: &ProblemInstance) -> f64 {
    arch.nodes()
        .iter()
        .map(|n| inst.device(n.device).cost)
        .sum()
}

/// Probability that at least one device fails, assuming independent failures.
pub fn system_failure_probability(arch: &Architecture, inst: &ProblemInstance) -> f64 {
    let survival: f64 = arch
        .nodes()
        .iter()
        .map(|n| 1.0 - inst.device(n.device).fail_prob)
        .product();
    (1.0 - survival).clamp(0.0, 1.0)
}

/// Response time of one loop, or `None` if the loop is not wired to exactly
/// one leaf and handled by exactly one processor above (or at) that leaf.
pub fn loop_response_time(arch: &Architecture, inst: &ProblemInstance, lp: LoopId) -> Option<f64> {
    let leaf = arch.leaf_of(lp)?;
    let proc = arch.processor_of(lp)?;
    if !arch.is_ancestor_or_self(proc, leaf) {
        return None;
    }
    let work = processor_work(arch, inst, proc);
    let delay = path_delay(arch, inst, leaf, proc);
    Some(loop_time(work, inst.device(arch.nodes()[proc].device).instr_time, delay))
}

fn processor_work(arch: &Architecture, inst: &ProblemInstance, proc: NodeId) -> f64 {
    let mut work = 0.0;
    for a in 0..arch.num_loops() {
        if arch.assignments(a).contains(&proc) {
            work += inst.loops[a].instructions as f64;
        }
    }
    work
}

/// Relay delay from `leaf` up to and including `top` (which must be an ancestor-or-self).
fn path_delay(arch: &Architecture, inst: &ProblemInstance, leaf: NodeId, top: NodeId) -> f64 {
    let nodes = arch.nodes();
    let mut path = Vec::new();
    let mut cur = leaf;
    loop {
        path.push(inst.device(nodes[cur].device));
        if cur == top {
            break;
        }
        cur = nodes[cur].parent.expect("top is an ancestor of leaf");
    }
    accumulate_delay(path)
}

/// Checks every constraint family and computes the cost, timing and
/// reliability figures of a design.
pub fn validate(arch: &Architecture, inst: &ProblemInstance) -> FeasibilityReport {
    use ConstraintFamily::*;

    let nodes = arch.nodes();
    let depth = inst.levels;
    let dev = |v: NodeId| inst.device(nodes[v].device);
    let is_leaf = |v: NodeId| nodes[v].level == depth;
    let mut violations = Vec::new();
    let mut push = |family, nodes: Vec<NodeId>, loops: Vec<LoopId>| {
        violations.push(Violation {
            family,
            nodes,
            loops,
        })
    };

    let roots = arch.roots();
    if roots.len() != 1 {
        push(SingleRoot, roots, vec![]);
    }

    let bad_depth: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| {
            let n = &nodes[v];
            n.level > depth
                || (n.level == depth && !n.children.is_empty())
                || (n.level < depth && n.children.is_empty())
        })
        .collect();
    if !bad_depth.is_empty() {
        push(LeafDepth, bad_depth, vec![]);
    }

    let over_fanout: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| !is_leaf(v) && nodes[v].children.len() > dev(v).max_children as usize)
        .collect();
    if !over_fanout.is_empty() {
        push(FanOut, over_fanout, vec![]);
    }

    let num_loops = arch.num_loops();
    debug_assert_eq!(num_loops, inst.num_loops());
    let mut bad_conn_loops = Vec::new();
    let mut bad_conn_nodes = Vec::new();
    for a in 0..num_loops {
        let conns = arch.connections(a);
        let non_leaf: Vec<NodeId> = conns.iter().copied().filter(|&v| !is_leaf(v)).collect();
        if conns.len() != 1 || !non_leaf.is_empty() {
            bad_conn_loops.push(a);
            bad_conn_nodes.extend(non_leaf);
        }
    }
    if !bad_conn_loops.is_empty() {
        bad_conn_nodes.sort_unstable();
        bad_conn_nodes.dedup();
        push(LoopConnection, bad_conn_nodes, bad_conn_loops);
    }

    let mut relay_nodes = Vec::new();
    let mut relay_loops = Vec::new();
    let mut unassigned = Vec::new();
    let mut unserved_nodes = Vec::new();
    let mut unserved_loops = Vec::new();
    for a in 0..num_loops {
        let assigned = arch.assignments(a);
        if assigned.len() != 1 {
            unassigned.push(a);
        }
        for &v in assigned {
            if !dev(v).is_processor {
                relay_nodes.push(v);
                relay_loops.push(a);
            }
            let served = arch
                .connections(a)
                .iter()
                .any(|&leaf| is_leaf(leaf) && arch.is_ancestor_or_self(v, leaf));
            if !served {
                unserved_nodes.push(v);
                unserved_loops.push(a);
            }
        }
    }
    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v.dedup();
        v
    };
    if !relay_loops.is_empty() {
        push(RelayAssignment, sorted(relay_nodes), sorted(relay_loops));
    }
    if !unassigned.is_empty() {
        push(LoopAssignment, vec![], unassigned);
    }

    // Per-node loads, accumulated in loop order.
    let mut memory = vec![0.0f64; nodes.len()];
    let mut work = vec![0.0f64; nodes.len()];
    let mut signals = vec![0u64; nodes.len()];
    for (a, lp) in inst.loops.iter().enumerate().take(num_loops) {
        for &v in arch.assignments(a) {
            memory[v] += lp.memory;
            work[v] += lp.instructions as f64;
        }
        for &v in arch.connections(a) {
            signals[v] += lp.signals as u64;
        }
    }
    let over_memory: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| memory[v] > dev(v).memory)
        .collect();
    if !over_memory.is_empty() {
        push(Memory, over_memory, vec![]);
    }
    if !unserved_loops.is_empty() {
        push(SubtreeService, sorted(unserved_nodes), sorted(unserved_loops));
    }
    let over_channels: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| signals[v] > dev(v).channels as u64)
        .collect();
    if !over_channels.is_empty() {
        push(Channels, over_channels, vec![]);
    }

    let mut worst_loop_time: f64 = 0.0;
    let mut late_loops = Vec::new();
    for a in 0..num_loops {
        let (Some(leaf), Some(proc)) = (arch.leaf_of(a), arch.processor_of(a)) else {
            continue;
        };
        if !arch.is_ancestor_or_self(proc, leaf) {
            continue;
        }
        let t = loop_time(
            work[proc],
            dev(proc).instr_time,
            path_delay(arch, inst, leaf, proc),
        );
        worst_loop_time = worst_loop_time.max(t);
        if t > inst.t_max {
            late_loops.push(a);
        }
    }
    if !late_loops.is_empty() {
        push(Timing, vec![], late_loops);
    }

    let system_fail_prob = system_failure_probability(arch, inst);
    if system_fail_prob > inst.p_max {
        push(Reliability, vec![], vec![]);
    }

    let stacked: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| {
            nodes[v]
                .parent
                .is_some_and(|p| dev(v).is_processor && dev(p).is_processor)
        })
        .collect();
    if !stacked.is_empty() {
        push(ProcessorParent, stacked, vec![]);
    }

    let nested: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| {
            dev(v).is_processor
                && arch
                    .subtree(v)
                    .expect("node exists")
                    .into_iter()
                    .any(|u| u != v && dev(u).is_processor)
        })
        .collect();
    if !nested.is_empty() {
        push(ProcessorSubtree, nested, vec![]);
    }

    let uncovered: Vec<NodeId> = (0..nodes.len())
        .filter(|&v| is_leaf(v))
        .filter(|&v| {
            let count = arch
                .path_to_root(v)
                .expect("node exists")
                .into_iter()
                .filter(|&u| dev(u).is_processor)
                .count();
            count != 1
        })
        .collect();
    if !uncovered.is_empty() {
        push(ProcessorOnPath, uncovered, vec![]);
    }

    FeasibilityReport {
        violations,
        worst_loop_time,
        system_fail_prob,
        total_cost: total_cost(arch, inst),
    }
}

/// Sound lower bounds on the size of any feasible design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityBounds {
    Bounded { min_leaves: u64, min_devices: u64 },
    /// No type can host field signals, so no design exists.
    Unbounded,
}

pub fn capacity_lower_bounds(inst: &ProblemInstance) -> CapacityBounds {
    let max_channels = inst
        .device_types
        .iter()
        .map(|d| d.channels as u64)
        .max()
        .unwrap_or(0);
    if max_channels == 0 {
        return CapacityBounds::Unbounded;
    }
    let max_fanout = inst
        .device_types
        .iter()
        .map(|d| d.max_children as u64)
        .max()
        .unwrap_or(0)
        .max(1);
    let demand: u64 = inst.loops.iter().map(|l| l.signals as u64).sum();
    let min_leaves = demand.div_ceil(max_channels).max(1);
    let mut level_count = min_leaves;
    let mut min_devices = min_leaves;
    for _ in 2..inst.levels {
        level_count = level_count.div_ceil(max_fanout);
        min_devices += level_count;
    }
    CapacityBounds::Bounded {
        min_leaves,
        min_devices: min_devices + 1,
    }
}
