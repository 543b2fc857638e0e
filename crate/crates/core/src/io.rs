//! Reading and writing instances, architectures and convergence traces.

use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::aco::{AcoParams, ConvergenceTrace, HeuristicMode, IterationRecord};
use crate::error::{ModelError, ParseError};
use crate::model::{Architecture, ControlLoop, DeviceType, NodeId, ProblemInstance};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    levels: Number,
    t_max: f64,
    p_max: f64,
    device_types: Vec<DeviceDoc>,
    loops: Vec<LoopDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aco: Option<AcoDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceDoc {
    id: String,
    cost: f64,
    channels: Number,
    #[serde(default)]
    memory: Option<f64>,
    fail_prob: f64,
    #[serde(default)]
    instr_time: Option<f64>,
    is_processor: bool,
    max_children: Number,
    relay_delay: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopDoc {
    count: Number,
    signals: Number,
    memory: f64,
    instructions: Number,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcoDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ants: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    iterations: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heuristic: Option<HeuristicMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<Number>,
}

fn uint(field: &str, n: &Number, max: u64) -> Result<u64, ParseError> {
    match n.as_u64() {
        Some(v) if v <= max => Ok(v),
        Some(_) => Err(ParseError::field(field, format!("must be at most {max}"))),
        None => Err(ParseError::field(field, "must be a non-negative integer")),
    }
}

fn check(field: &str, ok: bool, reason: &str) -> Result<(), ParseError> {
    if ok {
        Ok(())
    } else {
        Err(ParseError::field(field, reason))
    }
}

fn finite_nonneg(field: &str, x: f64) -> Result<f64, ParseError> {
    check(field, x.is_finite() && x >= 0.0, "must be a finite number >= 0")?;
    Ok(x)
}

/// Parses an instance document. The optional `aco` block fills in solver
/// parameters; omitted entries keep their defaults.
pub fn parse_instance(text: &str) -> Result<(ProblemInstance, AcoParams), ParseError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let levels = uint("levels", &doc.levels, u64::from(u32::MAX))? as u32;
    check("levels", levels >= 2, "must be at least 2")?;
    finite_nonneg("t_max", doc.t_max)?;
    check("p_max", (0.0..=1.0).contains(&doc.p_max), "must lie in [0, 1]")?;
    check("device_types", !doc.device_types.is_empty(), "must not be empty")?;
    check("loops", !doc.loops.is_empty(), "must not be empty")?;

    let mut device_types = Vec::with_capacity(doc.device_types.len());
    for (i, d) in doc.device_types.iter().enumerate() {
        let f = |name: &str| format!("device_types[{i}].{name}");
        check(&f("cost"), d.cost.is_finite() && d.cost > 0.0, "must be > 0")?;
        check(
            &f("fail_prob"),
            (0.0..=1.0).contains(&d.fail_prob),
            "must lie in [0, 1]",
        )?;
        let dt = DeviceType {
            id: d.id.clone(),
            cost: d.cost,
            channels: uint(&f("channels"), &d.channels, u64::from(u32::MAX))? as u32,
            memory: finite_nonneg(&f("memory"), d.memory.unwrap_or(0.0))?,
            fail_prob: d.fail_prob,
            instr_time: finite_nonneg(&f("instr_time"), d.instr_time.unwrap_or(0.0))?,
            is_processor: d.is_processor,
            max_children: uint(&f("max_children"), &d.max_children, u64::from(u32::MAX))? as u32,
            relay_delay: finite_nonneg(&f("relay_delay"), d.relay_delay)?,
        };
        check(
            &f("relay_delay"),
            !(dt.is_processor && dt.relay_delay != 0.0),
            "must be 0 for processors",
        )?;
        device_types.push(dt);
    }

    let mut loops = Vec::new();
    for (i, l) in doc.loops.iter().enumerate() {
        let f = |name: &str| format!("loops[{i}].{name}");
        let count = uint(&f("count"), &l.count, 10_000_000)?;
        check(&f("count"), count >= 1, "must be at least 1")?;
        let signals = uint(&f("signals"), &l.signals, u64::from(u32::MAX))? as u32;
        check(&f("signals"), signals >= 1, "must be at least 1")?;
        let lp = ControlLoop::new(
            signals,
            finite_nonneg(&f("memory"), l.memory)?,
            uint(&f("instructions"), &l.instructions, u64::MAX)?,
        );
        loops.extend(std::iter::repeat_n(lp, count as usize));
    }

    let mut inst = ProblemInstance::new(device_types, loops, levels, doc.t_max, doc.p_max)?;
    inst.note = doc.note;

    let mut params = AcoParams::default();
    if let Some(a) = doc.aco {
        params.alpha = a.alpha.unwrap_or(params.alpha);
        params.beta = a.beta.unwrap_or(params.beta);
        params.rho = a.rho.unwrap_or(params.rho);
        params.tau0 = a.tau0.unwrap_or(params.tau0);
        params.tau_min = a.tau_min.unwrap_or(params.tau_min);
        params.q = a.q.unwrap_or(params.q);
        params.heuristic = a.heuristic.unwrap_or(params.heuristic);
        if let Some(n) = &a.ants {
            params.ants = uint("aco.ants", n, u64::from(u32::MAX))? as u32;
        }
        if let Some(n) = &a.iterations {
            params.iterations = uint("aco.iterations", n, u64::from(u32::MAX))? as u32;
        }
        if let Some(n) = &a.seed {
            params.seed = uint("aco.seed", n, u64::MAX)?;
        }
    }
    params.validate().map_err(|e| match e {
        ModelError::InvalidParameter { field, reason } => ParseError::field(format!("aco.{field}"), reason),
        other => ParseError::Model(other),
    })?;
    Ok((inst, params))
}

/// Renders an instance, regrouping runs of identical loops. Parameters equal
/// to the defaults are left out of the `aco` block.
pub fn render_instance(inst: &ProblemInstance, params: &AcoParams) -> String {
    let mut loops: Vec<LoopDoc> = Vec::new();
    let mut last: Option<&ControlLoop> = None;
    for lp in &inst.loops {
        if last == Some(lp) {
            let doc = loops.last_mut().expect("group exists");
            doc.count = Number::from(doc.count.as_u64().expect("count") + 1);
        } else {
            loops.push(LoopDoc {
                count: Number::from(1u64),
                signals: Number::from(lp.signals),
                memory: lp.memory,
                instructions: Number::from(lp.instructions),
            });
            last = Some(lp);
        }
    }
    let d = AcoParams::default();
    let diff = |x: f64, y: f64| (x.to_bits() != y.to_bits()).then_some(x);
    let aco = AcoDoc {
        alpha: diff(params.alpha, d.alpha),
        beta: diff(params.beta, d.beta),
        rho: diff(params.rho, d.rho),
        ants: (params.ants != d.ants).then(|| Number::from(params.ants)),
        iterations: (params.iterations != d.iterations).then(|| Number::from(params.iterations)),
        tau0: diff(params.tau0, d.tau0),
        tau_min: diff(params.tau_min, d.tau_min),
        q: diff(params.q, d.q),
        heuristic: (params.heuristic != d.heuristic).then_some(params.heuristic),
        seed: (params.seed != d.seed).then(|| Number::from(params.seed)),
    };
    let has_aco = params != &d;
    let doc = InstanceDoc {
        levels: Number::from(inst.levels),
        t_max: inst.t_max,
        p_max: inst.p_max,
        device_types: inst
            .device_types
            .iter()
            .map(|d| DeviceDoc {
                id: d.id.clone(),
                cost: d.cost,
                channels: Number::from(d.channels),
                memory: Some(d.memory),
                fail_prob: d.fail_prob,
                instr_time: Some(d.instr_time),
                is_processor: d.is_processor,
                max_children: Number::from(d.max_children),
                relay_delay: d.relay_delay,
            })
            .collect(),
        loops,
        aco: has_aco.then_some(aco),
        note: inst.note.clone(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("instance serializes");
    out.push('\n');
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchitectureDoc {
    nodes: Vec<NodeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u64,
    #[serde(rename = "type")]
    ty: String,
    parent: Option<u64>,
    #[serde(default)]
    connected_loops: Vec<u64>,
    #[serde(default)]
    assigned_loops: Vec<u64>,
}

/// Reads a flat node list. Node ids are arbitrary but unique; loop indices
/// refer to the instance's expanded loop list.
pub fn parse_architecture(text: &str, inst: &ProblemInstance) -> Result<Architecture, ParseError> {
    let doc: ArchitectureDoc = serde_json::from_str(text)?;
    let index_of = |id: u64| doc.nodes.iter().position(|n| n.id == id);
    let num_loops = inst.num_loops();
    let mut types = Vec::with_capacity(doc.nodes.len());
    let mut parents = Vec::with_capacity(doc.nodes.len());
    let mut connections: Vec<Vec<NodeId>> = vec![Vec::new(); num_loops];
    let mut assignments: Vec<Vec<NodeId>> = vec![Vec::new(); num_loops];
    for (v, n) in doc.nodes.iter().enumerate() {
        let f = |name: &str| format!("nodes[{v}].{name}");
        check(&f("id"), index_of(n.id) == Some(v), "duplicate node id")?;
        let ty = inst
            .type_index(&n.ty)
            .ok_or_else(|| ParseError::field(f("type"), format!("unknown device type `{}`", n.ty)))?;
        types.push(ty);
        let parent = match n.parent {
            None => None,
            Some(p) => Some(
                index_of(p).ok_or_else(|| ParseError::field(f("parent"), format!("unknown node id {p}")))?,
            ),
        };
        parents.push(parent);
        for (list, name, target) in [
            (&n.connected_loops, "connected_loops", &mut connections),
            (&n.assigned_loops, "assigned_loops", &mut assignments),
        ] {
            for &a in list {
                check(&f(name), (a as usize) < num_loops, "loop index out of range")?;
                target[a as usize].push(v);
            }
        }
    }
    Ok(Architecture::from_parents(types, parents, connections, assignments)?)
}

pub fn render_architecture(arch: &Architecture, inst: &ProblemInstance) -> String {
    let doc = ArchitectureDoc {
        nodes: arch
            .nodes()
            .iter()
            .enumerate()
            .map(|(v, n)| NodeDoc {
                id: v as u64,
                ty: inst.device(n.device).id.clone(),
                parent: n.parent.map(|p| p as u64),
                connected_loops: arch.loops_connected_to(v).into_iter().map(|a| a as u64).collect(),
                assigned_loops: arch.loops_assigned_to(v).into_iter().map(|a| a as u64).collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("architecture serializes");
    out.push('\n');
    out
}

const TRACE_HEADER: [&str; 4] = ["iteration", "best_cost", "iter_best_cost", "feasible_ants"];

fn opt_num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per iteration; costs use the shortest text that reads back to the
/// same `f64`.
pub fn export_convergence(trace: &ConvergenceTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            opt_num(r.best_cost),
            opt_num(r.iteration_best_cost),
            r.feasible_ants.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

pub fn parse_convergence(text: &str) -> Result<ConvergenceTrace, ParseError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| ParseError::Csv { line: 1, reason: e.to_string() })?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(ParseError::Csv {
            line: 1,
            reason: format!("expected header `{}`", TRACE_HEADER.join(",")),
        });
    }
    let mut trace = ConvergenceTrace::default();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |reason: String| ParseError::Csv { line, reason };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let opt = |s: &str| -> Result<Option<f64>, ParseError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(format!("not a number: `{s}`")))
            }
        };
        trace.records.push(IterationRecord {
            iteration: rec[0].parse().map_err(|_| bad("bad iteration".into()))?,
            best_cost: opt(&rec[1])?,
            iteration_best_cost: opt(&rec[2])?,
            feasible_ants: rec[3].parse().map_err(|_| bad("bad feasible_ants".into()))?,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogs::{ims_instance, table1_instance};
    use crate::model::ArchitectureBuilder;

    #[test]
    fn round_trip_reference_instances() {
        for inst in [table1_instance(20, 3), ims_instance()] {
            let text = render_instance(&inst, &AcoParams::default());
            let (back, params) = parse_instance(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(params, AcoParams::default());
        }
    }

    #[test]
    fn round_trip_mixed_loops_and_params() {
        let mut inst = table1_instance(1, 3);
        inst.loops = vec![
            ControlLoop::new(1, 1.0, 5),
            ControlLoop::new(2, 0.5, 7),
            ControlLoop::new(2, 0.5, 7),
            ControlLoop::new(1, 1.0, 5),
        ];
        let params = AcoParams {
            rho: 0.1,
            seed: u64::MAX,
            heuristic: HeuristicMode::ChannelsPerCost,
            ..AcoParams::default()
        };
        let text = render_instance(&inst, &params);
        assert_eq!(text.matches("\"count\"").count(), 3);
        assert_eq!(parse_instance(&text).unwrap(), (inst, params));
    }

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"levels": 2, "t_max": 1, "p_max": 0.5,
               "device_types": [
                 {{"id": "p", "cost": 10, "channels": 0, "memory": 4, "fail_prob": 0.01,
                   "instr_time": 0.001, "is_processor": true, "max_children": 2, "relay_delay": 0}},
                 {{"id": "r", "cost": 1, "channels": 4, "memory": null, "fail_prob": 0.0,
                   "is_processor": false, "max_children": 0, "relay_delay": 0.01}}],
               "loops": [{{"count": 3, "signals": 1, "memory": 1, "instructions": 2}}]{extra}}}"#
        )
    }

    #[test]
    fn nulls_and_absent_fields_become_zero() {
        let (inst, params) = parse_instance(&minimal("")).unwrap();
        assert_eq!(inst.device_types[1].memory, 0.0);
        assert_eq!(inst.device_types[1].instr_time, 0.0);
        assert_eq!(inst.num_loops(), 3);
        assert_eq!(params, AcoParams::default());
    }

    fn field_of(text: &str) -> String {
        match parse_instance(text) {
            Err(ParseError::Field { field, .. }) => field,
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(&minimal(r#", "aco": {"rho": 1.5}"#)), "aco.rho");
        assert_eq!(field_of(&minimal(r#", "aco": {"ants": -3}"#)), "aco.ants");
        assert_eq!(field_of(&minimal("").replace("\"levels\": 2", "\"levels\": 1")), "levels");
        assert_eq!(
            field_of(&minimal("").replace("\"fail_prob\": 0.01", "\"fail_prob\": 2")),
            "device_types[0].fail_prob"
        );
        assert_eq!(
            field_of(&minimal("").replace("\"count\": 3", "\"count\": 0")),
            "loops[0].count"
        );
        let empty = r#"{"levels": 3, "t_max": 1, "p_max": 0.1, "device_types": [],
            "loops": [{"count": 1, "signals": 1, "memory": 1, "instructions": 5}]}"#;
        assert_eq!(field_of(empty), "device_types");
    }

    #[test]
    fn unknown_and_missing_fields_rejected() {
        let err = parse_instance(&minimal(r#", "colour": 1"#)).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        let err = parse_instance(&minimal("").replace("\"t_max\": 1,", "")).unwrap_err().to_string();
        assert!(err.contains("t_max"), "{err}");
    }

    #[test]
    fn architecture_round_trip() {
        let inst = table1_instance(2, 3);
        let mut b = ArchitectureBuilder::new(2);
        let r = b.add_root(4);
        let p = b.add_child(r, 1).unwrap();
        let l = b.add_child(p, 4).unwrap();
        b.connect(0, l).assign(0, p).connect(1, l).assign(1, p);
        let arch = b.build().unwrap();
        let text = render_architecture(&arch, &inst);
        assert_eq!(parse_architecture(&text, &inst).unwrap(), arch);
    }

    #[test]
    fn architecture_ids_may_be_arbitrary() {
        let inst = table1_instance(1, 3);
        let text = r#"{"nodes": [
            {"id": 7, "type": "u5", "parent": 3, "connected_loops": [0]},
            {"id": 3, "type": "u2", "parent": 9, "assigned_loops": [0]},
            {"id": 9, "type": "u5", "parent": null}]}"#;
        let arch = parse_architecture(text, &inst).unwrap();
        assert_eq!(arch.root(), Some(2));
        assert_eq!(arch.leaf_of(0), Some(0));
        assert!(crate::feasibility::validate(&arch, &inst).is_feasible());
    }

    #[test]
    fn architecture_errors() {
        let inst = table1_instance(1, 3);
        let bad_type = r#"{"nodes": [{"id": 0, "type": "zz", "parent": null}]}"#;
        assert!(matches!(
            parse_architecture(bad_type, &inst),
            Err(ParseError::Field { field, .. }) if field == "nodes[0].type"
        ));
        let bad_loop = r#"{"nodes": [{"id": 0, "type": "u1", "parent": null, "assigned_loops": [4]}]}"#;
        assert!(parse_architecture(bad_loop, &inst).is_err());
    }

    #[test]
    fn convergence_csv_round_trip() {
        let trace = ConvergenceTrace {
            records: vec![
                IterationRecord {
                    iteration: 1,
                    best_cost: None,
                    iteration_best_cost: None,
                    feasible_ants: 0,
                },
                IterationRecord {
                    iteration: 2,
                    best_cost: Some(1120.0),
                    iteration_best_cost: Some(1120.0),
                    feasible_ants: 7,
                },
                IterationRecord {
                    iteration: 3,
                    best_cost: Some(0.1 + 0.2),
                    iteration_best_cost: Some(1e-300),
                    feasible_ants: 20,
                },
            ],
        };
        let text = export_convergence(&trace);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,best_cost,iter_best_cost,feasible_ants");
        assert_eq!(lines[1], "1,,,0");
        assert_eq!(lines[2], "2,1120,1120,7");
        assert_eq!(parse_convergence(&text).unwrap(), trace);
    }

    #[test]
    fn convergence_csv_rejects_garbage() {
        assert!(parse_convergence("a,b\n1,2\n").is_err());
        let err = parse_convergence("iteration,best_cost,iter_best_cost,feasible_ants\n1,x,,0\n").unwrap_err();
        assert!(matches!(err, ParseError::Csv { line: 2, .. }));
    }
}
