#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use dcs_synth::feasibility::ConstraintFamily;
use dcs_synth::model::{Architecture, ControlLoop, DeviceType, ProblemInstance};
use rand::Rng;

/// Dyadic values keep every sum exact, so boundary comparisons agree.
fn dyadic<R: Rng>(rng: &mut R, max_eighths: u32) -> f64 {
    f64::from(rng.gen_range(0..=max_eighths)) / 8.0
}

pub fn random_device<R: Rng>(rng: &mut R, id: usize, processor: bool) -> DeviceType {
    DeviceType {
        id: format!("t{id}"),
        cost: f64::from(rng.gen_range(1..=40u32)) * 5.0,
        channels: if processor && rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..=4) },
        memory: if processor { dyadic(rng, 48) } else { 0.0 },
        fail_prob: f64::from(rng.gen_range(0..=20u32)) / 1000.0,
        instr_time: if processor { dyadic(rng, 4) / 4.0 } else { 0.0 },
        is_processor: processor,
        max_children: rng.gen_range(0..=4),
        relay_delay: if processor { 0.0 } else { dyadic(rng, 4) / 4.0 },
    }
}

/// A catalog with at least one processor and one relay, random loops and
/// limits that bind often enough to matter.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_types: usize,
    max_loops: usize,
    levels: std::ops::RangeInclusive<u32>,
) -> ProblemInstance {
    let k = rng.gen_range(2..=max_types.max(2));
    let mut cat = Vec::with_capacity(k);
    for i in 0..k {
        let processor = match i {
            0 => true,
            1 => false,
            _ => rng.gen_bool(0.4),
        };
        cat.push(random_device(rng, i, processor));
    }
    let a = rng.gen_range(1..=max_loops);
    let loops = (0..a)
        .map(|_| ControlLoop::new(rng.gen_range(1..=2), dyadic(rng, 16), rng.gen_range(1..=4)))
        .collect();
    let t_max = if rng.gen_bool(0.3) { 1e9 } else { dyadic(rng, 32) };
    let p_max = if rng.gen_bool(0.5) { 1.0 } else { f64::from(rng.gen_range(0..=100u32)) / 1000.0 };
    ProblemInstance::new(cat, loops, rng.gen_range(levels), t_max, p_max).expect("generated instance is valid")
}

/// A random parent-linked forest with random wiring. Half of the loops are
/// wired plausibly (one leaf-level node, one processor above it) so that
/// both satisfied and violated families show up.
pub fn random_architecture<R: Rng>(rng: &mut R, inst: &ProblemInstance, max_nodes: usize) -> Architecture {
    let n = rng.gen_range(1..=max_nodes);
    let types: Vec<usize> = (0..n).map(|_| rng.gen_range(0..inst.num_types())).collect();
    let mut parents: Vec<Option<usize>> = vec![None];
    for i in 1..n {
        parents.push(if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0..i)) });
    }
    let level = |v: usize| {
        let mut l = 1;
        let mut cur = v;
        while let Some(p) = parents[cur] {
            l += 1;
            cur = p;
        }
        l
    };
    let mut conns = Vec::new();
    let mut assigns = Vec::new();
    for _ in 0..inst.num_loops() {
        if rng.gen_bool(0.5) {
            let deepest: Vec<usize> = (0..n).filter(|&v| level(v) == inst.levels).collect();
            let leaf = if deepest.is_empty() { rng.gen_range(0..n) } else { deepest[rng.gen_range(0..deepest.len())] };
            let mut path = vec![leaf];
            while let Some(p) = parents[*path.last().unwrap()] {
                path.push(p);
            }
            let procs: Vec<usize> = path.iter().copied().filter(|&v| inst.device(types[v]).is_processor).collect();
            let proc = if procs.is_empty() { path[rng.gen_range(0..path.len())] } else { procs[rng.gen_range(0..procs.len())] };
            conns.push(vec![leaf]);
            assigns.push(vec![proc]);
        } else {
            let pick = |rng: &mut R| -> Vec<usize> {
                let k = rng.gen_range(0..=2);
                (0..k).map(|_| rng.gen_range(0..n)).collect()
            };
            conns.push(pick(rng));
            assigns.push(pick(rng));
        }
    }
    Architecture::from_parents(types, parents, conns, assigns).expect("acyclic by construction")
}

/// Constraint families violated by `arch`, evaluated directly on the x/z/y
/// indicator matrices of the mathematical model.
pub fn literal_violations(arch: &Architecture, inst: &ProblemInstance) -> BTreeSet<ConstraintFamily> {
    use ConstraintFamily::*;
    let n = arch.len();
    let a_count = inst.num_loops();
    let s = inst.levels as usize;
    let parent: Vec<Option<usize>> = arch.nodes().iter().map(|nd| nd.parent).collect();
    let dev: Vec<&DeviceType> = arch.nodes().iter().map(|nd| inst.device(nd.device)).collect();
    let y: Vec<u32> = dev.iter().map(|d| u32::from(d.is_processor)).collect();

    let mut x = vec![vec![0u32; a_count]; n];
    let mut z = vec![vec![0u32; a_count]; n];
    for a in 0..a_count {
        for &v in arch.connections(a) {
            x[v][a] = 1;
        }
        for &v in arch.assignments(a) {
            z[v][a] = 1;
        }
    }
    // anc[u][v]: u lies on the path from v to the root, v included.
    let mut anc = vec![vec![false; n]; n];
    let mut level = vec![0usize; n];
    for v in 0..n {
        let mut cur = Some(v);
        while let Some(c) = cur {
            anc[c][v] = true;
            level[v] += 1;
            cur = parent[c];
        }
    }
    let children = |v: usize| (0..n).filter(|&u| parent[u] == Some(v)).count();
    let is_leaf: Vec<bool> = (0..n).map(|v| level[v] == s).collect();

    let mut out = BTreeSet::new();
    // one root
    if (0..n).filter(|&v| parent[v].is_none()).count() != 1 {
        out.insert(SingleRoot);
    }
    // leaves childless, all at depth S
    if (0..n).any(|v| (is_leaf[v] && children(v) != 0) || (children(v) == 0 && level[v] != s)) {
        out.insert(LeafDepth);
    }
    // fan-out
    if (0..n).any(|v| !is_leaf[v] && children(v) > dev[v].max_children as usize) {
        out.insert(FanOut);
    }
    // one leaf per loop; x is only defined on leaves
    for a in 0..a_count {
        let on_leaves: u32 = (0..n).filter(|&v| is_leaf[v]).map(|v| x[v][a]).sum();
        let off_leaves: u32 = (0..n).filter(|&v| !is_leaf[v]).map(|v| x[v][a]).sum();
        if on_leaves != 1 || off_leaves != 0 {
            out.insert(LoopConnection);
        }
    }
    // z <= y
    if (0..n).any(|v| (0..a_count).any(|a| z[v][a] > y[v])) {
        out.insert(RelayAssignment);
    }
    // one processor per loop
    if (0..a_count).any(|a| (0..n).map(|v| z[v][a]).sum::<u32>() != 1) {
        out.insert(LoopAssignment);
    }
    // memory
    for v in 0..n {
        let mut used = 0.0;
        for a in 0..a_count {
            used += f64::from(z[v][a]) * inst.loops[a].memory;
        }
        if used > dev[v].memory {
            out.insert(Memory);
        }
    }
    // served from own subtree
    for v in 0..n {
        for a in 0..a_count {
            let below: u32 = (0..n).filter(|&u| is_leaf[u] && anc[v][u]).map(|u| x[u][a]).sum();
            if z[v][a] > below {
                out.insert(SubtreeService);
            }
        }
    }
    // channels
    for v in 0..n {
        let sig: u64 = (0..a_count).map(|a| u64::from(x[v][a]) * u64::from(inst.loops[a].signals)).sum();
        if sig > u64::from(dev[v].channels) {
            out.insert(Channels);
        }
    }
    // response time, for loops whose connection and processor are both unique and linked
    for a in 0..a_count {
        let wired: Vec<usize> = (0..n).filter(|&v| x[v][a] == 1).collect();
        let proc: Vec<usize> = (0..n).filter(|&v| z[v][a] == 1).collect();
        if wired.len() != 1 || proc.len() != 1 || !anc[proc[0]][wired[0]] {
            continue;
        }
        let (leaf, pv) = (wired[0], proc[0]);
        let mut exec = 0.0;
        for a2 in 0..a_count {
            exec += f64::from(z[pv][a2]) * inst.loops[a2].instructions as f64;
        }
        exec *= dev[pv].instr_time;
        let mut delay = 0.0;
        for v in 0..n {
            if anc[v][leaf] && anc[pv][v] {
                delay += f64::from(1 - y[v]) * dev[v].relay_delay;
            }
        }
        if exec + 2.0 * delay > inst.t_max {
            out.insert(Timing);
        }
    }
    // series reliability
    let mut survive = 1.0;
    for d in &dev {
        survive *= 1.0 - d.fail_prob;
    }
    if 1.0 - survive > inst.p_max {
        out.insert(Reliability);
    }
    // processor parent
    if (0..n).any(|v| parent[v].is_some_and(|p| y[v] + y[p] > 1)) {
        out.insert(ProcessorParent);
    }
    // processor subtree
    for v in (0..n).filter(|&v| y[v] == 1) {
        let below: u32 = (0..n).filter(|&u| u != v && anc[v][u]).map(|u| y[u]).sum();
        if y[v] + below != 1 {
            out.insert(ProcessorSubtree);
        }
    }
    // one processor per leaf path
    for v in (0..n).filter(|&v| is_leaf[v]) {
        let on_path: u32 = (0..n).filter(|&u| anc[u][v]).map(|u| y[u]).sum();
        if on_path != 1 {
            out.insert(ProcessorOnPath);
        }
    }
    out
}

/// Minimum feasible cost over every labeled tree with at most `max_nodes`
/// nodes and every wiring of the loops, by brute force.
pub fn naive_optimum(inst: &ProblemInstance, max_nodes: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut types = Vec::new();
    let mut parents = Vec::new();
    grow(inst, max_nodes, &mut types, &mut parents, 0.0, &mut best);
    best
}

fn grow(
    inst: &ProblemInstance,
    max_nodes: usize,
    types: &mut Vec<usize>,
    parents: &mut Vec<Option<usize>>,
    cost: f64,
    best: &mut Option<f64>,
) {
    if best.is_some_and(|b| cost >= b) {
        return;
    }
    if !types.is_empty() {
        try_wirings(inst, types, parents, cost, best);
    }
    if types.len() == max_nodes {
        return;
    }
    // Every rooted tree has a labeling with parent index below the child's,
    // so these parent choices reach every shape.
    let parent_choices: Vec<Option<usize>> = if types.is_empty() {
        vec![None]
    } else {
        (0..types.len()).map(Some).collect()
    };
    for p in parent_choices {
        let depth = p.map_or(1, |p| depth_of(parents, p) + 1);
        if depth > inst.levels as usize {
            continue;
        }
        for t in 0..inst.num_types() {
            types.push(t);
            parents.push(p);
            grow(inst, max_nodes, types, parents, cost + inst.device(t).cost, best);
            types.pop();
            parents.pop();
        }
    }
}

fn depth_of(parents: &[Option<usize>], v: usize) -> usize {
    let mut d = 1;
    let mut cur = v;
    while let Some(p) = parents[cur] {
        d += 1;
        cur = p;
    }
    d
}

fn try_wirings(inst: &ProblemInstance, types: &[usize], parents: &[Option<usize>], cost: f64, best: &mut Option<f64>) {
    let n = types.len();
    let a = inst.num_loops();
    let empty = Architecture::from_parents(types.to_vec(), parents.to_vec(), vec![vec![]; a], vec![vec![]; a])
        .expect("tree");
    // Skip wiring when the bare tree already breaks a loop-independent family.
    let structural = [
        ConstraintFamily::SingleRoot,
        ConstraintFamily::LeafDepth,
        ConstraintFamily::FanOut,
        ConstraintFamily::Reliability,
        ConstraintFamily::ProcessorParent,
        ConstraintFamily::ProcessorSubtree,
        ConstraintFamily::ProcessorOnPath,
    ];
    let bare = literal_violations(&empty, inst);
    if structural.iter().any(|f| bare.contains(f)) {
        return;
    }
    let leaves: Vec<usize> = (0..n).filter(|&v| depth_of(parents, v) == inst.levels as usize).collect();
    let procs: Vec<usize> = (0..n).filter(|&v| inst.device(types[v]).is_processor).collect();
    if leaves.is_empty() || procs.is_empty() {
        return;
    }
    let combos = (leaves.len() * procs.len()).pow(a as u32);
    for mut code in 0..combos {
        let mut conns = Vec::with_capacity(a);
        let mut assigns = Vec::with_capacity(a);
        for _ in 0..a {
            conns.push(vec![leaves[code % leaves.len()]]);
            code /= leaves.len();
            assigns.push(vec![procs[code % procs.len()]]);
            code /= procs.len();
        }
        let arch = Architecture::from_parents(types.to_vec(), parents.to_vec(), conns, assigns).expect("tree");
        if literal_violations(&arch, inst).is_empty() {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
    }
}
