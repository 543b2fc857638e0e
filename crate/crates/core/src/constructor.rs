//! Builds one candidate architecture from the root down.
//!
//! Construction runs in four stages:
//!
//! 1. A backbone chain of `S` devices is placed. The first processor on the
//!    chain fixes the processor level for the whole tree.
//! 2. Loops are wired first-fit, in input order, to the newest leaf. Each loop
//!    is assigned to the processor above its leaf. A processor that runs out of
//!    memory is swapped for a larger type. When the leaf is full, or its
//!    processor cannot take the loop, the tree grows: the walk climbs from the
//!    leaf's parent toward the root, adds a device at the first node with spare
//!    fan-out and extends that branch down to leaf level, re-choosing device
//!    types when the new branch cannot host the loop.
//! 3. The finished tree is checked for reliability, the one constraint that
//!    construction does not enforce.
//! 4. The cost is computed.
//!
//! Every device-type choice goes through a [`DecisionPolicy`], so the same
//! procedure serves the ant colony and the random-search baseline.

use rand::Rng;

use crate::feasibility::{accumulate_delay, loop_time, validate, FeasibilityReport};
use crate::model::{Architecture, ControlLoop, DeviceType, LoopId, NodeId, ProblemInstance, TypeId};

/// Where in the procedure a device type is being chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionContext {
    BackbonePlacement,
    LeafExpansion,
    BranchExtension,
    ProcessorUpgrade,
}

/// A choice site: the level being filled and the types allowed there.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionPoint {
    pub level: u32,
    pub allowed: Vec<TypeId>,
    pub context: DecisionContext,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub point: DecisionPoint,
    pub chosen: TypeId,
}

/// Picks one of `point.allowed`.
pub trait DecisionPolicy {
    fn choose<R: Rng + ?Sized>(&self, point: &DecisionPoint, rng: &mut R) -> TypeId;
}

/// Every allowed type equally likely.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformPolicy;

impl DecisionPolicy for UniformPolicy {
    fn choose<R: Rng + ?Sized>(&self, point: &DecisionPoint, rng: &mut R) -> TypeId {
        let weights = vec![1.0; point.allowed.len()];
        point.allowed[sample_weighted(&weights, rng)]
    }
}

/// Roulette-wheel draw: index `i` with probability `weights[i] / sum`.
///
/// Consumes exactly one `f64` from `rng`. Degenerate weight vectors (zero or
/// non-finite sum) fall back to a uniform draw.
pub fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    assert!(!weights.is_empty(), "cannot sample from an empty set");
    let u: f64 = rng.gen();
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return ((u * weights.len() as f64) as usize).min(weights.len() - 1);
    }
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // Rounding left `target` at the very top of the wheel.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Why a construction attempt produced no architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionFailure {
    /// No root-to-leaf chain with exactly one processor exists in the catalog.
    NoBackbone,
    /// The loop could not be wired anywhere.
    LoopUnplaceable(LoopId),
    /// The per-candidate decision budget ran out.
    BudgetExhausted,
}

/// Result of one construction.
#[derive(Debug, Clone)]
pub struct Candidate {
    /// Present whenever all loops were placed, even if reliability failed.
    pub architecture: Option<Architecture>,
    pub report: Option<FeasibilityReport>,
    pub feasible: bool,
    /// One decision per placed node, in node order (the latest choice wins for
    /// upgraded processors).
    pub decisions: Vec<Decision>,
    pub failure: Option<ConstructionFailure>,
}

impl Candidate {
    /// Cost of the completed architecture.
    pub fn cost(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.total_cost)
    }

    /// Cost, only when the candidate is feasible.
    pub fn feasible_cost(&self) -> Option<f64> {
        if self.feasible {
            self.cost()
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default)]
struct ProcessorLoad {
    work: f64,
    memory: f64,
    max_delay: f64,
    loops: usize,
    closed: bool,
    tried: Vec<TypeId>,
}

/// Incremental construction state for one ant.
pub struct Constructor<'a, P> {
    inst: &'a ProblemInstance,
    policy: &'a P,
    types: Vec<TypeId>,
    levels: Vec<u32>,
    parents: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    used_channels: Vec<u64>,
    loads: Vec<ProcessorLoad>,
    decisions: Vec<Decision>,
    connections: Vec<Option<NodeId>>,
    assignments: Vec<Option<NodeId>>,
    processor_level: u32,
    budget: usize,
    /// `completable[s][placed]`: a valid chain can be finished from level `s`.
    completable: Vec<[bool; 2]>,
}

impl<'a, P: DecisionPolicy> Constructor<'a, P> {
    pub fn new(inst: &'a ProblemInstance, policy: &'a P) -> Self {
        let depth = inst.levels as usize;
        let budget = 10 * inst.num_loops().max(1) * depth;
        let mut ctor = Self {
            inst,
            policy,
            types: Vec::new(),
            levels: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
            used_channels: Vec::new(),
            loads: Vec::new(),
            decisions: Vec::new(),
            connections: vec![None; inst.num_loops()],
            assignments: vec![None; inst.num_loops()],
            processor_level: 0,
            budget,
            completable: vec![[false; 2]; depth + 2],
        };
        for s in (1..=inst.levels).rev() {
            for placed in [false, true] {
                let ok = (0..inst.num_types()).any(|t| ctor.backbone_fits(t, s, placed));
                ctor.completable[s as usize][placed as usize] = ok;
            }
        }
        ctor
    }

    fn dev(&self, ty: TypeId) -> &'a DeviceType {
        self.inst.device(ty)
    }

    fn node_dev(&self, v: NodeId) -> &'a DeviceType {
        self.inst.device(self.types[v])
    }

    fn depth(&self) -> u32 {
        self.inst.levels
    }

    pub fn processor_level(&self) -> Option<u32> {
        (self.processor_level > 0).then_some(self.processor_level)
    }

    fn backbone_fits(&self, ty: TypeId, level: u32, placed: bool) -> bool {
        let d = self.dev(ty);
        if level == self.depth() {
            d.channels > 0 && d.is_processor != placed
        } else {
            d.max_children >= 1
                && !(placed && d.is_processor)
                && self.completable[level as usize + 1][(placed || d.is_processor) as usize]
        }
    }

    fn spend(&mut self) -> Result<(), ConstructionFailure> {
        if self.budget == 0 {
            return Err(ConstructionFailure::BudgetExhausted);
        }
        self.budget -= 1;
        Ok(())
    }

    fn push_node(&mut self, decision: Decision, level: u32, parent: Option<NodeId>) -> NodeId {
        let v = self.types.len();
        self.types.push(decision.chosen);
        self.levels.push(level);
        self.parents.push(parent);
        self.children.push(Vec::new());
        self.used_channels.push(0);
        self.loads.push(ProcessorLoad::default());
        self.decisions.push(decision);
        if let Some(p) = parent {
            self.children[p].push(v);
        }
        v
    }

    fn decide<R: Rng + ?Sized>(&mut self, point: DecisionPoint, rng: &mut R) -> Decision {
        debug_assert!(!point.allowed.is_empty());
        let chosen = self.policy.choose(&point, rng);
        debug_assert!(point.allowed.contains(&chosen));
        Decision { point, chosen }
    }

    /// Places the root-to-leaf chain and returns the processor level.
    pub fn build_backbone<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<u32, ConstructionFailure> {
        assert!(self.types.is_empty(), "backbone already built");
        let mut parent = None;
        let mut placed = false;
        for level in 1..=self.depth() {
            let allowed: Vec<TypeId> = (0..self.inst.num_types())
                .filter(|&t| self.backbone_fits(t, level, placed))
                .collect();
            if allowed.is_empty() {
                return Err(ConstructionFailure::NoBackbone);
            }
            self.spend()?;
            let decision = self.decide(
                DecisionPoint {
                    level,
                    allowed,
                    context: DecisionContext::BackbonePlacement,
                },
                rng,
            );
            let is_proc = self.dev(decision.chosen).is_processor;
            let v = self.push_node(decision, level, parent);
            if is_proc {
                placed = true;
                self.processor_level = level;
            }
            parent = Some(v);
        }
        Ok(self.processor_level)
    }

    fn processor_above(&self, v: NodeId) -> NodeId {
        let mut cur = v;
        while self.levels[cur] > self.processor_level {
            cur = self.parents[cur].expect("processor level lies above every leaf");
        }
        debug_assert!(self.node_dev(cur).is_processor);
        cur
    }

    fn delay_to(&self, leaf: NodeId, proc: NodeId) -> f64 {
        let mut path = Vec::new();
        let mut cur = leaf;
        loop {
            path.push(self.node_dev(cur));
            if cur == proc {
                break;
            }
            cur = self.parents[cur].expect("processor is an ancestor");
        }
        accumulate_delay(path)
    }

    fn free_channels(&self, leaf: NodeId) -> u64 {
        (self.node_dev(leaf).channels as u64).saturating_sub(self.used_channels[leaf])
    }

    /// Memory and timing still hold on `proc` after adding `lp` with the given leaf delay.
    fn fits(&self, proc: NodeId, lp: &ControlLoop, delay: f64) -> bool {
        let load = &self.loads[proc];
        let d = self.node_dev(proc);
        load.memory + lp.memory <= d.memory
            && loop_time(
                load.work + lp.instructions as f64,
                d.instr_time,
                load.max_delay.max(delay),
            ) <= self.inst.t_max
    }

    fn commit(&mut self, a: LoopId, leaf: NodeId, proc: NodeId, delay: f64) {
        let lp = &self.inst.loops[a];
        self.connections[a] = Some(leaf);
        self.assignments[a] = Some(proc);
        self.used_channels[leaf] += lp.signals as u64;
        let load = &mut self.loads[proc];
        load.work += lp.instructions as f64;
        load.memory += lp.memory;
        load.max_delay = load.max_delay.max(delay);
        load.loops += 1;
    }

    /// Necessary conditions for a loop to be placeable at all under the
    /// current processor level.
    fn loop_placeable(&self, lp: &ControlLoop) -> bool {
        let depth = self.depth();
        let leaf_role_is_proc = self.processor_level == depth;
        let leaf_ok = self.inst.device_types.iter().any(|d| {
            d.is_processor == leaf_role_is_proc && d.channels as u64 >= lp.signals as u64
        });
        let proc_ok = self.inst.device_types.iter().any(|d| {
            d.is_processor
                && lp.memory <= d.memory
                && loop_time(lp.instructions as f64, d.instr_time, 0.0) <= self.inst.t_max
        });
        leaf_ok && proc_ok
    }

    /// Wires and assigns every loop, growing the tree as needed.
    pub fn attach_loops<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), ConstructionFailure> {
        assert!(self.processor_level > 0, "backbone must be built first");
        let mut leaf = self.types.len() - 1;
        for a in 0..self.inst.num_loops() {
            if !self.loop_placeable(&self.inst.loops[a]) {
                return Err(ConstructionFailure::LoopUnplaceable(a));
            }
            leaf = self.place_loop(a, leaf, rng)?;
        }
        Ok(())
    }

    fn place_loop<R: Rng + ?Sized>(
        &mut self,
        a: LoopId,
        leaf: NodeId,
        rng: &mut R,
    ) -> Result<NodeId, ConstructionFailure> {
        let lp = &self.inst.loops[a];
        let proc = self.processor_above(leaf);
        if !self.loads[proc].closed
            && self.loads[proc].memory + lp.memory > self.node_dev(proc).memory
            && !self.upgrade_processor(proc, lp, rng)?
        {
            self.loads[proc].closed = true;
        }
        if !self.loads[proc].closed && self.free_channels(leaf) >= lp.signals as u64 {
            let delay = self.delay_to(leaf, proc);
            if self.fits(proc, lp, delay) {
                self.commit(a, leaf, proc, delay);
                return Ok(leaf);
            }
            self.loads[proc].closed = true;
        }
        let start = if self.loads[proc].closed {
            self.parents[proc]
        } else {
            self.parents[leaf]
        };
        let mut anchor = start;
        while let Some(v) = anchor {
            if self.children[v].len() < self.node_dev(v).max_children as usize {
                if let Some(new_leaf) = self.extend_branch(v, a, rng)? {
                    return Ok(new_leaf);
                }
            }
            anchor = self.parents[v];
        }
        Err(ConstructionFailure::LoopUnplaceable(a))
    }

    /// Swaps `proc` for a type with more memory until `lp` fits or options run out.
    fn upgrade_processor<R: Rng + ?Sized>(
        &mut self,
        proc: NodeId,
        lp: &ControlLoop,
        rng: &mut R,
    ) -> Result<bool, ConstructionFailure> {
        let current = self.types[proc];
        if !self.loads[proc].tried.contains(&current) {
            self.loads[proc].tried.push(current);
        }
        let at_leaf = self.levels[proc] == self.depth();
        for _ in 0..self.inst.num_types() {
            let cur_mem = self.node_dev(proc).memory;
            let load = &self.loads[proc];
            let allowed: Vec<TypeId> = (0..self.inst.num_types())
                .filter(|&t| {
                    let d = self.dev(t);
                    d.is_processor
                        && d.memory > cur_mem
                        && !load.tried.contains(&t)
                        && if at_leaf {
                            d.channels as u64 >= self.used_channels[proc].max(1)
                        } else {
                            d.max_children as usize >= self.children[proc].len().max(1)
                        }
                        && (load.loops == 0
                            || loop_time(load.work, d.instr_time, load.max_delay)
                                <= self.inst.t_max)
                })
                .collect();
            if allowed.is_empty() {
                return Ok(false);
            }
            self.spend()?;
            let decision = self.decide(
                DecisionPoint {
                    level: self.levels[proc],
                    allowed,
                    context: DecisionContext::ProcessorUpgrade,
                },
                rng,
            );
            let chosen = decision.chosen;
            self.loads[proc].tried.push(chosen);
            self.types[proc] = chosen;
            self.decisions[proc] = decision;
            if self.loads[proc].memory + lp.memory <= self.dev(chosen).memory {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn branch_allowed(&self, level: u32, lp: &ControlLoop) -> Vec<TypeId> {
        let depth = self.depth();
        let pl = self.processor_level;
        (0..self.inst.num_types())
            .filter(|&t| {
                let d = self.dev(t);
                let shape_ok = if level < depth {
                    d.max_children >= 1
                } else {
                    d.channels as u64 >= lp.signals as u64
                };
                let role_ok = if level == pl {
                    d.is_processor && lp.memory <= d.memory
                } else {
                    !d.is_processor
                };
                shape_ok && role_ok
            })
            .collect()
    }

    /// Tries to hang a new branch under `anchor` that reaches leaf level and
    /// can host loop `a`. Returns the new leaf, with the loop committed.
    fn extend_branch<R: Rng + ?Sized>(
        &mut self,
        anchor: NodeId,
        a: LoopId,
        rng: &mut R,
    ) -> Result<Option<NodeId>, ConstructionFailure> {
        let lp = &self.inst.loops[a];
        let depth = self.depth();
        let top = self.levels[anchor] + 1;
        let positions = (depth - top + 1) as usize;
        let existing = (self.levels[anchor] >= self.processor_level).then(|| self.processor_above(anchor));
        if let Some(p) = existing {
            let load = &self.loads[p];
            if load.closed || load.memory + lp.memory > self.node_dev(p).memory {
                return Ok(None);
            }
        }
        let base: Vec<Vec<TypeId>> = (top..=depth).map(|s| self.branch_allowed(s, lp)).collect();
        if base.iter().any(Vec::is_empty) {
            return Ok(None);
        }
        let context = if positions == 1 {
            DecisionContext::LeafExpansion
        } else {
            DecisionContext::BranchExtension
        };
        let mut chain: Vec<Decision> = Vec::with_capacity(positions);
        let mut tried: Vec<Vec<TypeId>> = vec![Vec::new(); positions];
        loop {
            let pos = chain.len();
            let allowed: Vec<TypeId> = base[pos]
                .iter()
                .copied()
                .filter(|t| !tried[pos].contains(t))
                .collect();
            if allowed.is_empty() {
                if pos == 0 {
                    return Ok(None);
                }
                tried[pos].clear();
                let back = chain.pop().expect("pos > 0");
                tried[pos - 1].push(back.chosen);
                continue;
            }
            self.spend()?;
            let decision = self.decide(
                DecisionPoint {
                    level: top + pos as u32,
                    allowed,
                    context,
                },
                rng,
            );
            chain.push(decision);
            if chain.len() < positions {
                continue;
            }
            if self.branch_hosts(anchor, existing, &chain, lp) {
                return Ok(Some(self.commit_branch(anchor, chain, a)));
            }
            let back = chain.pop().expect("chain is full");
            tried[positions - 1].push(back.chosen);
        }
    }

    fn branch_hosts(
        &self,
        anchor: NodeId,
        existing: Option<NodeId>,
        chain: &[Decision],
        lp: &ControlLoop,
    ) -> bool {
        match existing {
            Some(p) => {
                let mut path: Vec<&DeviceType> =
                    chain.iter().rev().map(|d| self.dev(d.chosen)).collect();
                let mut cur = anchor;
                loop {
                    path.push(self.node_dev(cur));
                    if cur == p {
                        break;
                    }
                    cur = self.parents[cur].expect("processor is an ancestor");
                }
                self.fits(p, lp, accumulate_delay(path))
            }
            None => {
                let top = self.levels[anchor] + 1;
                let ppos = (self.processor_level - top) as usize;
                let proc = self.dev(chain[ppos].chosen);
                let delay = accumulate_delay(chain[ppos..].iter().rev().map(|d| self.dev(d.chosen)));
                0.0 + lp.memory <= proc.memory
                    && loop_time(0.0 + lp.instructions as f64, proc.instr_time, delay)
                        <= self.inst.t_max
            }
        }
    }

    fn commit_branch(&mut self, anchor: NodeId, chain: Vec<Decision>, a: LoopId) -> NodeId {
        let mut parent = anchor;
        for decision in chain {
            let level = self.levels[parent] + 1;
            parent = self.push_node(decision, level, Some(parent));
        }
        let leaf = parent;
        let proc = self.processor_above(leaf);
        let delay = self.delay_to(leaf, proc);
        debug_assert!(self.fits(proc, &self.inst.loops[a], delay));
        self.commit(a, leaf, proc, delay);
        leaf
    }

    /// The tree built so far, with whatever loops have been placed.
    pub fn architecture(&self) -> Architecture {
        let to_list = |v: &Option<NodeId>| v.iter().copied().collect::<Vec<_>>();
        Architecture::from_parents(
            self.types.clone(),
            self.parents.clone(),
            self.connections.iter().map(to_list).collect(),
            self.assignments.iter().map(to_list).collect(),
        )
        .expect("constructor only produces well-formed trees")
    }

    /// Stages 3 and 4: checks the complete tree and prices it.
    pub fn finish(self) -> Candidate {
        let arch = self.architecture();
        let report = validate(&arch, self.inst);
        debug_assert!(
            report
                .violations
                .iter()
                .all(|v| !v.family.guaranteed_by_construction()),
            "construction broke a guaranteed constraint: {:?}",
            report.violations
        );
        Candidate {
            feasible: report.is_feasible(),
            architecture: Some(arch),
            report: Some(report),
            decisions: self.decisions,
            failure: None,
        }
    }
}

/// Runs all four stages with the given policy.
pub fn construct_candidate<P: DecisionPolicy, R: Rng + ?Sized>(
    inst: &ProblemInstance,
    policy: &P,
    rng: &mut R,
) -> Candidate {
    let mut ctor = Constructor::new(inst, policy);
    let outcome = ctor
        .build_backbone(rng)
        .and_then(|_| ctor.attach_loops(rng));
    match outcome {
        Ok(()) => ctor.finish(),
        Err(failure) => Candidate {
            architecture: None,
            report: None,
            feasible: false,
            decisions: ctor.decisions,
            failure: Some(failure),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogs::table1_instance;
    use crate::feasibility::ConstraintFamily;
    use crate::model::ControlLoop;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Always takes the first allowed option.
    struct FirstPolicy;
    impl DecisionPolicy for FirstPolicy {
        fn choose<R: Rng + ?Sized>(&self, point: &DecisionPoint, _rng: &mut R) -> TypeId {
            point.allowed[0]
        }
    }

    /// Prefers a fixed ranking of type indices.
    struct Prefer(Vec<TypeId>);
    impl DecisionPolicy for Prefer {
        fn choose<R: Rng + ?Sized>(&self, point: &DecisionPoint, _rng: &mut R) -> TypeId {
            *self
                .0
                .iter()
                .find(|t| point.allowed.contains(t))
                .unwrap_or(&point.allowed[0])
        }
    }

    #[test]
    fn backbone_on_table1_has_one_processor_and_a_channel_leaf() {
        let inst = table1_instance(1, 3);
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ctor = Constructor::new(&inst, &UniformPolicy);
            ctor.build_backbone(&mut rng).unwrap();
            let arch = ctor.architecture();
            assert_eq!(arch.len(), 3);
            let procs = arch
                .nodes()
                .iter()
                .filter(|n| inst.device(n.device).is_processor)
                .count();
            assert_eq!(procs, 1);
            let leaf = inst.device(arch.nodes()[2].device);
            assert!(["u3", "u4", "u5"].contains(&leaf.id.as_str()));
        }
    }

    #[test]
    fn backbone_s2_with_minimal_catalog() {
        let mut inst = table1_instance(1, 2);
        inst.device_types = vec![inst.device_types[1].clone(), inst.device_types[2].clone()];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ctor = Constructor::new(&inst, &UniformPolicy);
        ctor.build_backbone(&mut rng).unwrap();
        let arch = ctor.architecture();
        // relay leaf with channels under a processor root is the only shape
        assert_eq!(arch.nodes()[0].device, 0);
        assert_eq!(arch.nodes()[1].device, 1);
    }

    #[test]
    fn backbone_on_ims_catalog_ends_in_io_module() {
        let inst = crate::catalogs::ims_instance();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ctor = Constructor::new(&inst, &UniformPolicy);
            ctor.build_backbone(&mut rng).unwrap();
            let arch = ctor.architecture();
            assert_eq!(arch.len(), 4);
            let leaf = inst.device(arch.nodes()[3].device);
            assert!(["u5", "u6", "u7"].contains(&leaf.id.as_str()));
        }
    }

    #[test]
    fn single_loop_lands_on_backbone_leaf() {
        let inst = table1_instance(1, 3);
        // root u5, mid u2, leaf u5
        let policy = Prefer(vec![4, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = construct_candidate(&inst, &policy, &mut rng);
        assert!(c.feasible);
        assert_eq!(c.cost(), Some(1120.0));
        let arch = c.architecture.unwrap();
        assert_eq!(arch.len(), 3);
        assert_eq!(arch.leaf_of(0), Some(2));
        assert_eq!(arch.processor_of(0), Some(1));
    }

    #[test]
    fn full_leaf_triggers_sibling_leaf() {
        let inst = table1_instance(10, 3);
        // backbone u5 -> u2 -> u3, then a u5 leaf for the remaining two loops
        struct Script;
        impl DecisionPolicy for Script {
            fn choose<R: Rng + ?Sized>(&self, p: &DecisionPoint, _: &mut R) -> TypeId {
                let want = match (p.context, p.level) {
                    (DecisionContext::BackbonePlacement, 1) => 4,
                    (DecisionContext::BackbonePlacement, 2) => 1,
                    (DecisionContext::BackbonePlacement, _) => 2,
                    _ => 4,
                };
                assert!(p.allowed.contains(&want));
                want
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = construct_candidate(&inst, &Script, &mut rng);
        assert!(c.feasible);
        let arch = c.architecture.as_ref().unwrap();
        let leaves: Vec<_> = arch.nodes().iter().filter(|n| n.level == 3).collect();
        assert_eq!(leaves.len(), 2);
        assert_eq!(c.cost(), Some(1200.0));
    }

    #[test]
    fn oversized_loop_fails_immediately() {
        let mut inst = table1_instance(1, 3);
        inst.loops = vec![ControlLoop::new(9, 1.0, 5)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = construct_candidate(&inst, &UniformPolicy, &mut rng);
        assert!(!c.feasible);
        assert!(c.architecture.is_none());
        assert_eq!(c.failure, Some(ConstructionFailure::LoopUnplaceable(0)));
    }

    #[test]
    fn catalog_without_processor_fails_at_backbone() {
        let mut inst = table1_instance(1, 3);
        inst.device_types.retain(|d| !d.is_processor);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = construct_candidate(&inst, &UniformPolicy, &mut rng);
        assert_eq!(c.failure, Some(ConstructionFailure::NoBackbone));
        assert!(!c.feasible);
    }

    #[test]
    fn memory_overflow_upgrades_processor() {
        let mut inst = table1_instance(2, 3);
        inst.loops = vec![ControlLoop::new(1, 200.0, 1); 2];
        // backbone picks u2 (256 memory); the second loop needs 400
        let policy = Prefer(vec![4, 1, 0, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = construct_candidate(&inst, &policy, &mut rng);
        assert!(c.feasible, "{:?}", c.failure);
        let arch = c.architecture.unwrap();
        assert_eq!(arch.nodes()[1].device, 0);
        assert_eq!(c.decisions[1].point.context, DecisionContext::ProcessorUpgrade);
        assert_eq!(arch.processor_of(1), Some(1));
    }

    #[test]
    fn timing_overflow_opens_new_processor_subtree() {
        // 20 instructions on u2 take 0.08 s; with two u3 hops a processor
        // fits 12 loops, well below its 32-channel fan-out
        let mut inst = table1_instance(30, 3);
        inst.loops = vec![ControlLoop::new(1, 1.0, 20); 30];
        let policy = Prefer(vec![2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = construct_candidate(&inst, &policy, &mut rng);
        let arch = c.architecture.expect("completes");
        let procs: Vec<_> = (0..arch.len())
            .filter(|&v| inst.device(arch.nodes()[v].device).is_processor)
            .collect();
        let per_proc: Vec<usize> = procs.iter().map(|&p| arch.loops_assigned_to(p).len()).collect();
        assert_eq!(per_proc, vec![12, 12, 6]);
        let rep = c.report.unwrap();
        assert!(rep.worst_loop_time <= 1.0);
        assert!(rep.families().iter().all(|f| *f == ConstraintFamily::Reliability));
    }

    #[test]
    fn first_policy_is_deterministic() {
        let inst = table1_instance(25, 3);
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let a = construct_candidate(&inst, &FirstPolicy, &mut r1);
        let b = construct_candidate(&inst, &FirstPolicy, &mut r2);
        assert_eq!(a.architecture, b.architecture);
        assert_eq!(a.decisions, b.decisions);
    }

    #[test]
    fn weighted_sampling_respects_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let i = sample_weighted(&[0.0, 1.0, 0.0], &mut rng);
            assert_eq!(i, 1);
        }
    }
}
