//! Exact minimum-cost search for small instances.
//!
//! The search runs bottom-up over tree levels. Every subtree is summarized by
//! a profile: how many loops of each kind it can absorb, the worst relay delay
//! to its used leaves, its cost, its survival probability and its size.
//! Two families of profiles are kept per level:
//!
//! * relay-only subtrees, which still need a processor above them;
//! * connector subtrees, where every leaf already has its processor.
//!
//! Only Pareto-optimal profiles survive, so sibling permutations and
//! interchangeable subtrees collapse. The cheapest root profile that absorbs
//! every loop is optimal; a witness tree is rebuilt from back-pointers and
//! checked against the full constraint set.

use std::time::{Duration, Instant};

use smallvec::SmallVec;

use crate::error::OracleError;
use crate::feasibility::{loop_time, validate};
use crate::model::{Architecture, ArchitectureBuilder, ControlLoop, LoopId, NodeId, ProblemInstance, TypeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLimits {
    pub max_nodes: u32,
    pub time_budget: Duration,
    /// Upper bound on profiles created before giving up.
    pub max_states: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_nodes: 64,
            time_budget: Duration::from_secs(60),
            max_states: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExactOutcome {
    Optimal { architecture: Architecture, cost: f64 },
    /// No feasible design with at most `max_nodes` devices.
    Infeasible,
    BudgetExceeded,
}

impl ExactOutcome {
    pub fn cost(&self) -> Option<f64> {
        match self {
            ExactOutcome::Optimal { cost, .. } => Some(*cost),
            _ => None,
        }
    }
}

/// Exact optimum over all designs with at most `limits.max_nodes` devices.
pub fn exact_solve(inst: &ProblemInstance, limits: &ExactLimits) -> ExactOutcome {
    Search::new(inst, limits).run()
}

/// Same answer as [`exact_solve`], restricted to instances whose loops are all
/// identical so that loads reduce to a single count.
pub fn exact_solve_identical_loops(
    inst: &ProblemInstance,
    limits: &ExactLimits,
) -> Result<ExactOutcome, OracleError> {
    if !inst.has_identical_loops() {
        return Err(OracleError::NonIdenticalLoops);
    }
    Ok(exact_solve(inst, limits))
}

type Counts = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, Copy)]
enum Origin {
    Leaf { ty: TypeId },
    Inner { ty: TypeId, combo: u32 },
}

#[derive(Debug, Clone)]
struct Profile {
    counts: Counts,
    /// Worst relay delay to a used leaf; `-inf` when nothing is wired.
    delay: f64,
    cost: f64,
    survival: f64,
    nodes: u32,
    origin: Origin,
}

/// A multiset of children, as a linked list into the child level.
#[derive(Debug, Clone, Copy)]
struct Combo {
    prev: Option<u32>,
    child: u32,
}

#[derive(Debug, Clone)]
struct Partial {
    counts: Counts,
    delay: f64,
    cost: f64,
    survival: f64,
    nodes: u32,
    combo: u32,
}

trait Dominance {
    fn key(&self) -> (&Counts, f64, f64, f64, u32);
}

impl Dominance for Profile {
    fn key(&self) -> (&Counts, f64, f64, f64, u32) {
        (&self.counts, self.delay, self.cost, self.survival, self.nodes)
    }
}

impl Dominance for Partial {
    fn key(&self) -> (&Counts, f64, f64, f64, u32) {
        (&self.counts, self.delay, self.cost, self.survival, self.nodes)
    }
}

struct Budget {
    start: Instant,
    limit: Duration,
    max_states: usize,
    states: usize,
}

#[derive(Debug)]
struct OutOfBudget;

impl Budget {
    fn charge(&mut self, n: usize) -> Result<(), OutOfBudget> {
        self.states += n;
        if self.states > self.max_states || self.start.elapsed() > self.limit {
            Err(OutOfBudget)
        } else {
            Ok(())
        }
    }
}

struct Search<'a> {
    inst: &'a ProblemInstance,
    limits: ExactLimits,
    /// Distinct loop kinds and the loop ids of each kind.
    classes: Vec<ControlLoop>,
    members: Vec<Vec<LoopId>>,
    demand: Counts,
    /// Single kind: memory and instruction totals of the first `k` loops.
    prefix_memory: Vec<f64>,
    prefix_work: Vec<f64>,
    use_survival: bool,
    combos: Vec<Combo>,
    budget: Budget,
}

impl<'a> Search<'a> {
    fn new(inst: &'a ProblemInstance, limits: &ExactLimits) -> Self {
        let mut classes: Vec<ControlLoop> = Vec::new();
        let mut members: Vec<Vec<LoopId>> = Vec::new();
        for (a, lp) in inst.loops.iter().enumerate() {
            match classes.iter().position(|c| c == lp) {
                Some(k) => members[k].push(a),
                None => {
                    classes.push(lp.clone());
                    members.push(vec![a]);
                }
            }
        }
        let demand: Counts = members.iter().map(|m| m.len() as u32).collect();
        let (mut prefix_memory, mut prefix_work) = (vec![0.0], vec![0.0]);
        if classes.len() == 1 {
            let (mut m, mut w) = (0.0f64, 0.0f64);
            for _ in 0..demand[0] {
                m += classes[0].memory;
                w += classes[0].instructions as f64;
                prefix_memory.push(m);
                prefix_work.push(w);
            }
        }
        // Reliability cannot bind if even the largest allowed tree of the
        // least reliable type stays within the limit.
        let worst = inst
            .device_types
            .iter()
            .map(|d| d.fail_prob)
            .fold(0.0f64, f64::max);
        let use_survival = 1.0 - (1.0 - worst).powi(limits.max_nodes as i32) > inst.p_max;
        Self {
            inst,
            limits: *limits,
            classes,
            members,
            demand,
            prefix_memory,
            prefix_work,
            use_survival,
            combos: Vec::new(),
            budget: Budget {
                start: Instant::now(),
                limit: limits.time_budget,
                max_states: limits.max_states,
                states: 0,
            },
        }
    }

    fn run(mut self) -> ExactOutcome {
        let depth = self.inst.levels;
        let mut relay_only: Vec<Vec<Profile>> = vec![Vec::new(); depth as usize + 1];
        let mut connector: Vec<Vec<Profile>> = vec![Vec::new(); depth as usize + 1];
        for s in (1..=depth).rev() {
            let step = if s == depth {
                self.leaf_level(s)
            } else {
                self.inner_level(s, &relay_only[s as usize + 1], &connector[s as usize + 1])
            };
            match step {
                Ok((r, c)) => {
                    relay_only[s as usize] = r;
                    connector[s as usize] = c;
                }
                Err(OutOfBudget) => return ExactOutcome::BudgetExceeded,
            }
        }
        let best = connector[1]
            .iter()
            .enumerate()
            .filter(|(_, p)| p.counts == self.demand)
            .min_by(|a, b| {
                a.1.cost
                    .total_cmp(&b.1.cost)
                    .then(a.1.nodes.cmp(&b.1.nodes))
                    .then(a.0.cmp(&b.0))
            })
            .map(|(i, _)| i);
        let Some(root) = best else {
            return ExactOutcome::Infeasible;
        };
        let architecture = self.rebuild(root, &relay_only, &connector);
        let report = validate(&architecture, self.inst);
        debug_assert!(report.is_feasible(), "witness fails: {:?}", report.violations);
        ExactOutcome::Optimal {
            cost: report.total_cost,
            architecture,
        }
    }

    fn room(&self, level: u32, nodes: u32) -> bool {
        nodes + (level - 1) <= self.limits.max_nodes
    }

    fn reliable(&self, survival: f64) -> bool {
        !self.use_survival || 1.0 - survival <= self.inst.p_max
    }

    fn dominates<D: Dominance>(&self, a: &D, b: &D) -> bool {
        let (ac, ad, acost, asurv, an) = a.key();
        let (bc, bd, bcost, bsurv, bn) = b.key();
        ac.iter().zip(bc.iter()).all(|(x, y)| x >= y)
            && ad <= bd
            && acost <= bcost
            && (!self.use_survival || asurv >= bsurv)
            && an <= bn
    }

    /// Keeps the non-dominated items; the earlier of two equal items wins.
    fn pareto<D: Dominance>(&self, mut items: Vec<D>) -> Vec<D> {
        items.sort_by(|a, b| {
            let (ac, ad, acost, asurv, an) = a.key();
            let (bc, bd, bcost, bsurv, bn) = b.key();
            acost
                .total_cmp(&bcost)
                .then(an.cmp(&bn))
                .then(bc.iter().sum::<u32>().cmp(&ac.iter().sum::<u32>()))
                .then(ad.total_cmp(&bd))
                .then(bsurv.total_cmp(&asurv))
        });
        let mut kept: Vec<D> = Vec::new();
        for it in items {
            if !kept.iter().any(|k| self.dominates(k, &it)) {
                kept.push(it);
            }
        }
        kept
    }

    /// Memory and instruction totals of a load, summed the way the
    /// constraint checker sums them.
    fn load(&self, c: &Counts) -> (f64, f64) {
        if self.classes.len() == 1 {
            let k = c[0] as usize;
            return (self.prefix_memory[k], self.prefix_work[k]);
        }
        let (mut m, mut w) = (0.0f64, 0.0f64);
        for (k, &n) in c.iter().enumerate() {
            for _ in 0..n {
                m += self.classes[k].memory;
                w += self.classes[k].instructions as f64;
            }
        }
        (m, w)
    }

    fn signals(&self, c: &Counts) -> u64 {
        c.iter()
            .zip(&self.classes)
            .map(|(&n, cl)| u64::from(n) * u64::from(cl.signals))
            .sum()
    }

    /// Maximal vectors `c <= bound` accepted by `ok` (which must be
    /// monotone: if it accepts `c` it accepts everything below `c`).
    fn maximal_vectors(&self, bound: &Counts, ok: impl Fn(&Counts) -> bool) -> Vec<Counts> {
        if bound.len() == 1 {
            // Binary search on a monotone predicate.
            let (mut lo, mut hi) = (0u32, bound[0]);
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if ok(&Counts::from_slice(&[mid])) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            return vec![Counts::from_slice(&[lo])];
        }
        let mut found: Vec<Counts> = Vec::new();
        let mut cur: Counts = bound.iter().map(|_| 0).collect();
        loop {
            if ok(&cur) {
                found.push(cur.clone());
            }
            let mut i = 0;
            loop {
                if i == cur.len() {
                    let maximal: Vec<Counts> = found
                        .iter()
                        .filter(|a| {
                            !found.iter().any(|b| {
                                b != *a && b.iter().zip(a.iter()).all(|(x, y)| x >= y)
                            })
                        })
                        .cloned()
                        .collect();
                    return maximal;
                }
                if cur[i] < bound[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    fn processor_fits(&self, ty: TypeId, c: &Counts, delay: f64) -> bool {
        if c.iter().all(|&n| n == 0) {
            return true;
        }
        let d = self.inst.device(ty);
        let (m, w) = self.load(c);
        m <= d.memory && loop_time(w, d.instr_time, delay) <= self.inst.t_max
    }

    fn leaf_level(&mut self, s: u32) -> Result<(Vec<Profile>, Vec<Profile>), OutOfBudget> {
        let mut relay = Vec::new();
        let mut conn = Vec::new();
        for (ty, d) in self.inst.device_types.iter().enumerate() {
            let survival = 1.0 - d.fail_prob;
            if !self.room(s, 1) || !self.reliable(survival) {
                continue;
            }
            let base = |counts: Counts, delay: f64| Profile {
                counts,
                delay,
                cost: d.cost,
                survival,
                nodes: 1,
                origin: Origin::Leaf { ty },
            };
            let channels_ok = |c: &Counts| self.signals(c) <= u64::from(d.channels);
            if d.is_processor {
                for c in self.maximal_vectors(&self.demand, |c| {
                    channels_ok(c) && self.processor_fits(ty, c, 0.0)
                }) {
                    conn.push(base(c, f64::NEG_INFINITY));
                }
            } else {
                relay.push(base(self.zero(), f64::NEG_INFINITY));
                for c in self.maximal_vectors(&self.demand, channels_ok) {
                    if c.iter().any(|&n| n > 0) {
                        relay.push(base(c, d.relay_delay));
                    }
                }
            }
        }
        self.budget.charge(relay.len() + conn.len())?;
        Ok((self.pareto(relay), self.pareto(conn)))
    }

    fn zero(&self) -> Counts {
        self.demand.iter().map(|_| 0).collect()
    }

    fn inner_level(
        &mut self,
        s: u32,
        below_relay: &[Profile],
        below_conn: &[Profile],
    ) -> Result<(Vec<Profile>, Vec<Profile>), OutOfBudget> {
        let types = &self.inst.device_types;
        let fan = |want_proc: bool| {
            types
                .iter()
                .filter(|d| d.is_processor == want_proc && d.max_children >= 1)
                .map(|d| d.max_children)
                .max()
                .unwrap_or(0)
        };
        let relay_layers = self.combine(s, below_relay, fan(true).max(fan(false)))?;
        let conn_layers = self.combine(s, below_conn, fan(false))?;

        let mut relay = Vec::new();
        let mut conn = Vec::new();
        for (ty, d) in types.iter().enumerate() {
            if d.max_children == 0 {
                continue;
            }
            let m = d.max_children as usize;
            let p = 1.0 - d.fail_prob;
            let wrap = |part: &Partial, counts: Counts, delay: f64| Profile {
                counts,
                delay,
                cost: d.cost + part.cost,
                survival: p * part.survival,
                nodes: part.nodes + 1,
                origin: Origin::Inner {
                    ty,
                    combo: part.combo,
                },
            };
            let usable = |part: &Partial| self.room(s, part.nodes + 1) && self.reliable(p * part.survival);
            if d.is_processor {
                for part in relay_layers.iter().take(m).flatten().filter(|x| usable(x)) {
                    for c in self.maximal_vectors(&part.counts, |c| self.processor_fits(ty, c, part.delay)) {
                        conn.push(wrap(part, c, f64::NEG_INFINITY));
                    }
                }
            } else {
                for part in relay_layers.iter().take(m).flatten().filter(|x| usable(x)) {
                    relay.push(wrap(part, part.counts.clone(), part.delay + d.relay_delay));
                }
                for part in conn_layers.iter().take(m).flatten().filter(|x| usable(x)) {
                    conn.push(wrap(part, part.counts.clone(), f64::NEG_INFINITY));
                }
            }
            self.budget.charge(0)?;
        }
        self.budget.charge(relay.len() + conn.len())?;
        Ok((self.pareto(relay), self.pareto(conn)))
    }

    /// Pareto sets of child multisets of size 1..=max_k, one set per size.
    /// A set never keeps an item that a smaller multiset dominates.
    fn combine(&mut self, s: u32, children: &[Profile], max_k: u32) -> Result<Vec<Vec<Partial>>, OutOfBudget> {
        let mut layers: Vec<Vec<Partial>> = Vec::new();
        if children.is_empty() || max_k == 0 {
            return Ok(layers);
        }
        let mut first = Vec::with_capacity(children.len());
        for (i, ch) in children.iter().enumerate() {
            let combo = self.push_combo(None, i as u32);
            first.push(Partial {
                counts: ch.counts.clone(),
                delay: ch.delay,
                cost: ch.cost,
                survival: ch.survival,
                nodes: ch.nodes,
                combo,
            });
        }
        layers.push(self.pareto(first));
        for _ in 1..max_k {
            let prev = layers.last().expect("non-empty");
            let mut next: Vec<(Partial, u32)> = Vec::new();
            for part in prev {
                for (i, ch) in children.iter().enumerate() {
                    let nodes = part.nodes + ch.nodes;
                    let survival = part.survival * ch.survival;
                    if !self.room(s, nodes + 1) || !self.reliable(survival) {
                        continue;
                    }
                    let counts: Counts = part
                        .counts
                        .iter()
                        .zip(&ch.counts)
                        .zip(&self.demand)
                        .map(|((a, b), d)| (a + b).min(*d))
                        .collect();
                    let item = Partial {
                        counts,
                        delay: part.delay.max(ch.delay),
                        cost: part.cost + ch.cost,
                        survival,
                        nodes,
                        combo: part.combo,
                    };
                    next.push((item, i as u32));
                }
            }
            self.budget.charge(next.len())?;
            let pruned = self.pareto_tagged(next, &layers);
            let mut layer = Vec::with_capacity(pruned.len());
            for (mut part, child) in pruned {
                part.combo = self.push_combo(Some(part.combo), child);
                layer.push(part);
            }
            if layer.is_empty() {
                break;
            }
            layers.push(layer);
        }
        Ok(layers)
    }

    fn pareto_tagged(&self, items: Vec<(Partial, u32)>, smaller: &[Vec<Partial>]) -> Vec<(Partial, u32)> {
        let mut items = items;
        items.sort_by(|(a, ai), (b, bi)| {
            a.cost
                .total_cmp(&b.cost)
                .then(a.nodes.cmp(&b.nodes))
                .then(b.counts.iter().sum::<u32>().cmp(&a.counts.iter().sum::<u32>()))
                .then(a.delay.total_cmp(&b.delay))
                .then(b.survival.total_cmp(&a.survival))
                .then(a.combo.cmp(&b.combo))
                .then(ai.cmp(bi))
        });
        let mut kept: Vec<(Partial, u32)> = Vec::new();
        for (it, tag) in items {
            if kept.iter().any(|(k, _)| self.dominates(k, &it)) {
                continue;
            }
            if smaller.iter().flatten().any(|k| self.dominates(k, &it)) {
                continue;
            }
            kept.push((it, tag));
        }
        kept
    }

    fn push_combo(&mut self, prev: Option<u32>, child: u32) -> u32 {
        self.combos.push(Combo { prev, child });
        (self.combos.len() - 1) as u32
    }

    fn combo_children(&self, combo: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cur = Some(combo);
        while let Some(c) = cur {
            out.push(self.combos[c as usize].child);
            cur = self.combos[c as usize].prev;
        }
        out.reverse();
        out
    }

    fn rebuild(&self, root: usize, relay_only: &[Vec<Profile>], connector: &[Vec<Profile>]) -> Architecture {
        let mut queues: Vec<std::collections::VecDeque<LoopId>> =
            self.members.iter().map(|m| m.iter().copied().collect()).collect();
        let mut b = ArchitectureBuilder::new(self.inst.num_loops());
        let mut ctx = Rebuild {
            search: self,
            relay_only,
            connector,
            builder: &mut b,
            queues: &mut queues,
        };
        ctx.connector_node(1, root, None, self.demand.clone());
        debug_assert!(queues.iter().all(|q| q.is_empty()));
        b.build().expect("witness is a well-formed tree")
    }
}

struct Rebuild<'s, 'a> {
    search: &'s Search<'a>,
    relay_only: &'s [Vec<Profile>],
    connector: &'s [Vec<Profile>],
    builder: &'s mut ArchitectureBuilder,
    queues: &'s mut Vec<std::collections::VecDeque<LoopId>>,
}

impl Rebuild<'_, '_> {
    fn place(&mut self, ty: TypeId, parent: Option<NodeId>) -> NodeId {
        match parent {
            None => self.builder.add_root(ty),
            Some(p) => self.builder.add_child(p, ty).expect("parent exists"),
        }
    }

    /// Splits `demand` greedily over the children's capacities.
    fn split(demand: &Counts, caps: &[&Counts]) -> Vec<Counts> {
        let mut left = demand.clone();
        caps.iter()
            .map(|cap| {
                let take: Counts = cap.iter().zip(left.iter()).map(|(c, l)| (*c).min(*l)).collect();
                for (l, t) in left.iter_mut().zip(&take) {
                    *l -= t;
                }
                take
            })
            .collect()
    }

    fn wire(&mut self, leaf: NodeId, proc: NodeId, demand: &Counts) {
        for (k, &n) in demand.iter().enumerate() {
            for _ in 0..n {
                let a = self.queues[k].pop_front().expect("demand within loop counts");
                self.builder.connect(a, leaf).assign(a, proc);
            }
        }
    }

    fn connector_node(&mut self, s: u32, idx: usize, parent: Option<NodeId>, demand: Counts) {
        let prof = &self.connector[s as usize][idx];
        match prof.origin {
            Origin::Leaf { ty } => {
                let v = self.place(ty, parent);
                self.wire(v, v, &demand);
            }
            Origin::Inner { ty, combo } => {
                let v = self.place(ty, parent);
                let kids = self.search.combo_children(combo);
                if self.search.inst.device(ty).is_processor {
                    let caps: Vec<&Counts> = kids
                        .iter()
                        .map(|&k| &self.relay_only[s as usize + 1][k as usize].counts)
                        .collect();
                    let parts = Self::split(&demand, &caps);
                    for (k, d) in kids.iter().zip(parts) {
                        self.relay_node(s + 1, *k as usize, v, v, d);
                    }
                } else {
                    let caps: Vec<&Counts> = kids
                        .iter()
                        .map(|&k| &self.connector[s as usize + 1][k as usize].counts)
                        .collect();
                    let parts = Self::split(&demand, &caps);
                    for (k, d) in kids.iter().zip(parts) {
                        self.connector_node(s + 1, *k as usize, Some(v), d);
                    }
                }
            }
        }
    }

    fn relay_node(&mut self, s: u32, idx: usize, parent: NodeId, proc: NodeId, demand: Counts) {
        let prof = &self.relay_only[s as usize][idx];
        match prof.origin {
            Origin::Leaf { ty } => {
                let v = self.place(ty, Some(parent));
                self.wire(v, proc, &demand);
            }
            Origin::Inner { ty, combo } => {
                let v = self.place(ty, Some(parent));
                let kids = self.search.combo_children(combo);
                let caps: Vec<&Counts> = kids
                    .iter()
                    .map(|&k| &self.relay_only[s as usize + 1][k as usize].counts)
                    .collect();
                let parts = Self::split(&demand, &caps);
                for (k, d) in kids.iter().zip(parts) {
                    self.relay_node(s + 1, *k as usize, v, proc, d);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogs::{table1_catalog, table1_instance};
    use crate::model::DeviceType;

    fn optimal(inst: &ProblemInstance) -> (Architecture, f64) {
        match exact_solve(inst, &ExactLimits::default()) {
            ExactOutcome::Optimal { architecture, cost } => (architecture, cost),
            other => panic!("expected an optimum, got {other:?}"),
        }
    }

    #[test]
    fn single_loop() {
        let inst = table1_instance(1, 3);
        let (arch, cost) = optimal(&inst);
        // u5 above the cheaper controller, one u5 leaf
        assert_eq!(cost, 65.0 + 990.0 + 65.0);
        assert!(validate(&arch, &inst).is_feasible());
        assert_eq!(arch.len(), 3);
    }

    #[test]
    fn witness_cost_matches_report() {
        for a in [5, 20, 40] {
            let inst = table1_instance(a, 3);
            let (arch, cost) = optimal(&inst);
            let report = validate(&arch, &inst);
            assert!(report.is_feasible(), "A={a}: {:?}", report.violations);
            assert_eq!(report.total_cost, cost);
        }
    }

    #[test]
    fn too_many_loops() {
        let inst = table1_instance(180, 3);
        assert_eq!(exact_solve(&inst, &ExactLimits::default()), ExactOutcome::Infeasible);
    }

    #[test]
    fn node_cap_can_make_it_infeasible() {
        let inst = table1_instance(20, 3);
        let limits = ExactLimits {
            max_nodes: 4,
            ..ExactLimits::default()
        };
        assert_eq!(exact_solve(&inst, &limits), ExactOutcome::Infeasible);
        let limits = ExactLimits {
            max_nodes: 5,
            ..ExactLimits::default()
        };
        assert_eq!(exact_solve(&inst, &limits).cost(), Some(1293.0));
    }

    #[test]
    fn state_budget() {
        let inst = table1_instance(45, 3);
        let limits = ExactLimits {
            max_states: 3,
            ..ExactLimits::default()
        };
        assert_eq!(exact_solve(&inst, &limits), ExactOutcome::BudgetExceeded);
    }

    #[test]
    fn identical_mode_rejects_mixed_loops() {
        let mut inst = table1_instance(2, 3);
        inst.loops[1] = ControlLoop::new(2, 1.0, 5);
        assert_eq!(
            exact_solve_identical_loops(&inst, &ExactLimits::default()),
            Err(OracleError::NonIdenticalLoops)
        );
        assert!(exact_solve(&inst, &ExactLimits::default()).cost().is_some());
    }

    #[test]
    fn reliability_binds() {
        // Only the unreliable controller is cheap; a tight limit forces u1.
        let mut cat: Vec<DeviceType> = table1_catalog();
        cat[1].fail_prob = 0.2;
        let inst = ProblemInstance::new(cat, vec![ControlLoop::new(1, 1.0, 5)], 3, 1.0, 0.1).unwrap();
        let (arch, cost) = optimal(&inst);
        assert_eq!(cost, 65.0 + 1000.0 + 65.0);
        assert!(validate(&arch, &inst).system_fail_prob <= 0.1);
    }
}
