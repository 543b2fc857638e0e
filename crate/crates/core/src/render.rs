//! Human-readable and Graphviz renderings of an architecture.
//!
//! Siblings are printed in a canonical order (by their rendered subtree), so
//! two isomorphic designs render identically whatever their node numbering.

use std::fmt::Write;

use crate::model::{Architecture, NodeId, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Text,
    Dot,
}

pub fn render_tree(arch: &Architecture, inst: &ProblemInstance, format: TreeFormat) -> String {
    let order = canonical_children(arch, inst);
    match format {
        TreeFormat::Text => text(arch, inst, &order),
        TreeFormat::Dot => dot(arch, inst, &order),
    }
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn line(arch: &Architecture, inst: &ProblemInstance, v: NodeId) -> String {
    let node = &arch.nodes()[v];
    let dev = inst.device(node.device);
    let mut s = format!("{} ({})", dev.id, dev.role());
    let mut notes = Vec::new();
    if dev.is_processor {
        notes.push(format!("{} assigned", arch.loops_assigned_to(v).len()));
    }
    if node.children.is_empty() {
        notes.push(plural(arch.loops_connected_to(v).len(), "loop"));
    }
    if !notes.is_empty() {
        s.push(' ');
        s.push_str(&notes.join(", "));
    }
    s
}

/// Children of every node, sorted by the text of their subtrees.
fn canonical_children(arch: &Architecture, inst: &ProblemInstance) -> Vec<Vec<NodeId>> {
    let n = arch.len();
    let mut key: Vec<String> = vec![String::new(); n];
    let mut order: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    // Deepest nodes first so children are keyed before their parents.
    let mut by_level: Vec<NodeId> = (0..n).collect();
    by_level.sort_by_key(|&v| std::cmp::Reverse(arch.nodes()[v].level));
    for v in by_level {
        let mut kids = arch.nodes()[v].children.clone();
        kids.sort_by(|&a, &b| key[a].cmp(&key[b]).then(a.cmp(&b)));
        let mut k = line(arch, inst, v);
        k.push('[');
        for &c in &kids {
            k.push_str(&key[c]);
            k.push(';');
        }
        k.push(']');
        key[v] = k;
        order[v] = kids;
    }
    order
}

fn dfs(arch: &Architecture, order: &[Vec<NodeId>]) -> Vec<(NodeId, usize)> {
    let mut out = Vec::new();
    let mut roots = arch.roots();
    roots.sort_unstable();
    let mut stack: Vec<(NodeId, usize)> = roots.into_iter().rev().map(|r| (r, 0)).collect();
    while let Some((v, depth)) = stack.pop() {
        out.push((v, depth));
        for &c in order[v].iter().rev() {
            stack.push((c, depth + 1));
        }
    }
    out
}

fn text(arch: &Architecture, inst: &ProblemInstance, order: &[Vec<NodeId>]) -> String {
    let mut out = String::new();
    for (v, depth) in dfs(arch, order) {
        let _ = writeln!(out, "{}{}", "  ".repeat(depth), line(arch, inst, v));
    }
    out
}

fn dot(arch: &Architecture, inst: &ProblemInstance, order: &[Vec<NodeId>]) -> String {
    let walk = dfs(arch, order);
    let mut number = vec![0usize; arch.len()];
    for (i, (v, _)) in walk.iter().enumerate() {
        number[*v] = i;
    }
    let mut out = String::from("digraph architecture {\n  node [shape=box];\n");
    for (v, _) in &walk {
        let dev = inst.device(arch.nodes()[*v].device);
        let count = if dev.is_processor {
            arch.loops_assigned_to(*v).len()
        } else {
            arch.subtree(*v)
                .expect("node exists")
                .into_iter()
                .map(|u| arch.loops_connected_to(u).len())
                .sum()
        };
        let _ = writeln!(
            out,
            "  n{} [label=\"{}({}) {}\"];",
            number[*v],
            dev.id.replace('"', "\\\""),
            dev.role(),
            count
        );
    }
    for (v, _) in &walk {
        for &c in &order[*v] {
            let _ = writeln!(out, "  n{} -> n{};", number[*v], number[c]);
        }
    }
    out.push_str("}\n");
    out
}
