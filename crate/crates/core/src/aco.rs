//! Ant colony driver: pheromone table, selection rule, update rule and the
//! iteration loop.

use std::time::Instant;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructor::{
    construct_candidate, sample_weighted, Candidate, DecisionPoint, DecisionPolicy, UniformPolicy,
};
use crate::error::ModelError;
use crate::model::{Architecture, DeviceType, ProblemInstance, TypeId};

/// Static desirability of a device type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicMode {
    /// `1 / C`
    #[default]
    InverseCost,
    /// `max(N, 1) / C`
    ChannelsPerCost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcoParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub ants: u32,
    pub iterations: u32,
    pub tau0: f64,
    pub tau_min: f64,
    pub q: f64,
    pub heuristic: HeuristicMode,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 1.0,
            rho: 0.25,
            ants: 20,
            iterations: 20,
            tau0: 1.0,
            tau_min: 1e-6,
            q: 1000.0,
            heuristic: HeuristicMode::InverseCost,
            seed: 0,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &str, reason: &str| {
            Err(ModelError::InvalidParameter {
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha", "must be a finite number >= 0");
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad("beta", "must be a finite number >= 0");
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad("rho", "must lie in [0, 1]");
        }
        if self.ants == 0 {
            return bad("ants", "must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations", "must be at least 1");
        }
        if !(self.tau_min.is_finite() && self.tau_min > 0.0) {
            return bad("tau_min", "must be > 0");
        }
        if !(self.tau0.is_finite() && self.tau0 >= self.tau_min) {
            return bad("tau0", "must be >= tau_min");
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return bad("q", "must be a finite number >= 0");
        }
        Ok(())
    }
}

pub fn heuristic_value(dt: &DeviceType, mode: HeuristicMode) -> f64 {
    assert!(dt.cost > 0.0, "device `{}` has non-positive cost", dt.id);
    match mode {
        HeuristicMode::InverseCost => 1.0 / dt.cost,
        HeuristicMode::ChannelsPerCost => f64::from(dt.channels.max(1)) / dt.cost,
    }
}

/// Pheromone levels indexed by (level, device type).
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable {
    levels: u32,
    types: usize,
    tau: Vec<f64>,
}

impl PheromoneTable {
    pub fn new(levels: u32, types: usize, tau0: f64) -> Self {
        Self {
            levels,
            types,
            tau: vec![tau0; levels as usize * types],
        }
    }

    fn index(&self, level: u32, ty: TypeId) -> usize {
        assert!(
            (1..=self.levels).contains(&level) && ty < self.types,
            "pheromone key ({level}, {ty}) out of range"
        );
        (level as usize - 1) * self.types + ty
    }

    pub fn get(&self, level: u32, ty: TypeId) -> f64 {
        self.tau[self.index(level, ty)]
    }

    pub fn set(&mut self, level: u32, ty: TypeId, value: f64) {
        let i = self.index(level, ty);
        self.tau[i] = value;
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn num_types(&self) -> usize {
        self.types
    }

    pub fn values(&self) -> &[f64] {
        &self.tau
    }
}

/// Unnormalized selection weights, scaled so the largest is 1.
///
/// Computed in log space; when both exponents are zero every weight is
/// exactly 1.
fn selection_weights(
    point: &DecisionPoint,
    table: &PheromoneTable,
    heuristics: &[f64],
    alpha: f64,
    beta: f64,
) -> Vec<f64> {
    let logs: Vec<f64> = point
        .allowed
        .iter()
        .map(|&t| {
            let a = if alpha == 0.0 { 0.0 } else { alpha * table.get(point.level, t).ln() };
            let b = if beta == 0.0 { 0.0 } else { beta * heuristics[t].ln() };
            a + b
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|l| (l - top).exp()).collect()
}

/// Selection distribution over `point.allowed`.
pub fn selection_probabilities(
    point: &DecisionPoint,
    table: &PheromoneTable,
    heuristics: &[f64],
    alpha: f64,
    beta: f64,
) -> Vec<f64> {
    let w = selection_weights(point, table, heuristics, alpha, beta);
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Pheromone-and-heuristic policy over a fixed table snapshot.
pub struct AcoPolicy<'a> {
    pub table: &'a PheromoneTable,
    pub heuristics: &'a [f64],
    pub alpha: f64,
    pub beta: f64,
}

impl DecisionPolicy for AcoPolicy<'_> {
    fn choose<R: Rng + ?Sized>(&self, point: &DecisionPoint, rng: &mut R) -> TypeId {
        let w = selection_weights(point, self.table, self.heuristics, self.alpha, self.beta);
        point.allowed[sample_weighted(&w, rng)]
    }
}

pub fn select<R: Rng + ?Sized>(
    point: &DecisionPoint,
    table: &PheromoneTable,
    heuristics: &[f64],
    params: &AcoParams,
    rng: &mut R,
) -> TypeId {
    AcoPolicy {
        table,
        heuristics,
        alpha: params.alpha,
        beta: params.beta,
    }
    .choose(point, rng)
}

/// Evaporates, deposits `q / cost` per recorded decision of a feasible
/// iteration-best, then clamps to `tau_min`.
pub fn update_pheromones(table: &mut PheromoneTable, iteration_best: Option<&Candidate>, params: &AcoParams) {
    for t in &mut table.tau {
        *t *= 1.0 - params.rho;
    }
    if let Some(best) = iteration_best {
        if let Some(cost) = best.feasible_cost() {
            let delta = params.q / cost;
            for d in &best.decisions {
                let i = table.index(d.point.level, d.chosen);
                table.tau[i] += delta;
            }
        }
    }
    for t in &mut table.tau {
        if *t < params.tau_min {
            *t = params.tau_min;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: u32,
    pub best_cost: Option<f64>,
    pub iteration_best_cost: Option<f64>,
    pub feasible_ants: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best_architecture: Option<Architecture>,
    pub best_cost: Option<f64>,
    pub feasible: bool,
    pub trace: ConvergenceTrace,
    /// Seconds spent in the iteration loop.
    pub wall_time: f64,
}

/// RNG for ant `ant` of iteration `iteration`; independent of scheduling.
pub fn ant_rng(seed: u64, iteration: u32, ant: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(iteration) << 32) | u64::from(ant));
    rng
}

#[derive(Clone, Copy)]
enum Mode {
    Colony,
    Uniform,
}

pub fn solve(inst: &ProblemInstance, params: &AcoParams) -> SolveResult {
    run(inst, params, Mode::Colony)
}

/// Same loop with every allowed option equally likely.
pub fn solve_random_baseline(inst: &ProblemInstance, params: &AcoParams) -> SolveResult {
    run(inst, params, Mode::Uniform)
}

fn run(inst: &ProblemInstance, params: &AcoParams, mode: Mode) -> SolveResult {
    params.validate().expect("invalid ACO parameters");
    let heuristics: Vec<f64> = inst
        .device_types
        .iter()
        .map(|d| heuristic_value(d, params.heuristic))
        .collect();
    let mut table = PheromoneTable::new(inst.levels, inst.num_types(), params.tau0);
    let mut best: Option<(f64, Architecture)> = None;
    let mut trace = ConvergenceTrace::default();

    let start = Instant::now();
    for it in 0..params.iterations {
        let snapshot = &table;
        let heuristics = &heuristics;
        let candidates: Vec<Candidate> = (0..params.ants)
            .into_par_iter()
            .map(|k| {
                let mut rng = ant_rng(params.seed, it, k);
                match mode {
                    Mode::Colony => {
                        let policy = AcoPolicy {
                            table: snapshot,
                            heuristics,
                            alpha: params.alpha,
                            beta: params.beta,
                        };
                        construct_candidate(inst, &policy, &mut rng)
                    }
                    Mode::Uniform => construct_candidate(inst, &UniformPolicy, &mut rng),
                }
            })
            .collect();

        let feasible_ants = candidates.iter().filter(|c| c.feasible).count() as u32;
        let iter_best = candidates
            .iter()
            .enumerate()
            .filter_map(|(k, c)| c.feasible_cost().map(|cost| (cost, k)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, k)| &candidates[k]);

        if let Some(c) = iter_best {
            let cost = c.feasible_cost().expect("feasible");
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, c.architecture.clone().expect("feasible has architecture")));
            }
        }
        update_pheromones(&mut table, iter_best, params);
        trace.records.push(IterationRecord {
            iteration: it + 1,
            best_cost: best.as_ref().map(|(c, _)| *c),
            iteration_best_cost: iter_best.and_then(Candidate::feasible_cost),
            feasible_ants,
        });
    }
    let wall_time = start.elapsed().as_secs_f64();

    let (best_cost, best_architecture) = match best {
        Some((c, a)) => (Some(c), Some(a)),
        None => (None, None),
    };
    SolveResult {
        feasible: best_architecture.is_some(),
        best_architecture,
        best_cost,
        trace,
        wall_time,
    }
}
