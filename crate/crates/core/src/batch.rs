//! Repeated seeded runs and their summary statistics.

use rayon::prelude::*;

use crate::aco::{solve, AcoParams};
use crate::model::ProblemInstance;

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: u32,
    pub seed: u64,
    /// Best feasible cost, absent when the run found nothing feasible.
    pub cost: Option<f64>,
    pub wall_time: f64,
}

/// Summary over a batch. Cost statistics use successful runs only and are
/// absent when there are none; the spread uses the population deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub runs: u32,
    pub successes: u32,
    pub c_min: Option<f64>,
    pub c_avg: Option<f64>,
    pub cv_percent: Option<f64>,
    pub w_percent: f64,
    pub t_avg: f64,
}

impl RunStats {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let runs = records.len() as u32;
        let costs: Vec<f64> = records.iter().filter_map(|r| r.cost).collect();
        let successes = costs.len() as u32;
        let (c_min, c_avg, cv_percent) = if costs.is_empty() {
            (None, None, None)
        } else {
            let n = costs.len() as f64;
            let mean = costs.iter().sum::<f64>() / n;
            let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
            let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
            let cv = if mean == 0.0 { 0.0 } else { 100.0 * var.sqrt() / mean };
            (Some(min), Some(mean), Some(cv))
        };
        let t_avg = if runs == 0 {
            0.0
        } else {
            records.iter().map(|r| r.wall_time).sum::<f64>() / f64::from(runs)
        };
        Self {
            runs,
            successes,
            c_min,
            c_avg,
            cv_percent,
            w_percent: if runs == 0 {
                0.0
            } else {
                100.0 * f64::from(successes) / f64::from(runs)
            },
            t_avg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub stats: RunStats,
    pub records: Vec<RunRecord>,
}

/// Runs the colony `repetitions` times; run `r` uses seed `params.seed + r`.
pub fn run_batch(inst: &ProblemInstance, params: &AcoParams, repetitions: u32) -> BatchResult {
    assert!(repetitions >= 1, "at least one run is required");
    let records: Vec<RunRecord> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = params.seed.wrapping_add(u64::from(r));
            let res = solve(inst, &AcoParams { seed, ..params.clone() });
            RunRecord {
                run: r,
                seed,
                cost: res.best_cost,
                wall_time: res.wall_time,
            }
        })
        .collect();
    BatchResult {
        stats: RunStats::from_records(&records),
        records,
    }
}

fn cell(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.decimals$}"))
}

pub const STATS_HEADER: [&str; 7] = ["runs", "successes", "c_min", "c_avg", "cv_percent", "w_percent", "t_avg"];

/// Header plus one row; absent statistics render as `-`.
pub fn stats_csv(stats: &RunStats) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(STATS_HEADER).expect("in-memory write");
    w.write_record([
        stats.runs.to_string(),
        stats.successes.to_string(),
        cell(stats.c_min, 2),
        cell(stats.c_avg, 2),
        cell(stats.cv_percent, 2),
        format!("{:.2}", stats.w_percent),
        format!("{:.3}", stats.t_avg),
    ])
    .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

/// Per-run audit rows: `run,seed,cost,wall_time`, cost `-` on failure.
pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["run", "seed", "cost", "wall_time"]).expect("in-memory write");
    for r in records {
        w.write_record([
            r.run.to_string(),
            r.seed.to_string(),
            r.cost.map_or_else(|| "-".to_string(), |c| c.to_string()),
            format!("{:.3}", r.wall_time),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogs::table1_instance;

    fn rec(run: u32, cost: Option<f64>) -> RunRecord {
        RunRecord {
            run,
            seed: u64::from(run),
            cost,
            wall_time: 0.5,
        }
    }

    #[test]
    fn two_costs() {
        let s = RunStats::from_records(&[rec(0, Some(10.0)), rec(1, Some(20.0))]);
        assert_eq!(s.c_min, Some(10.0));
        assert_eq!(s.c_avg, Some(15.0));
        // population sigma 5 over mean 15
        assert!((s.cv_percent.unwrap() - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.w_percent, 100.0);
    }

    #[test]
    fn no_successes_render_dashes() {
        let s = RunStats::from_records(&[rec(0, None), rec(1, None)]);
        assert_eq!(s.successes, 0);
        assert_eq!(s.w_percent, 0.0);
        assert!(s.c_min.is_none() && s.c_avg.is_none() && s.cv_percent.is_none());
        let csv = stats_csv(&s);
        assert_eq!(csv.lines().nth(1).unwrap(), "2,0,-,-,-,0.00,0.500");
    }

    #[test]
    fn partial_success() {
        let s = RunStats::from_records(&[rec(0, Some(7.0)), rec(1, None), rec(2, Some(7.0)), rec(3, None)]);
        assert_eq!(s.w_percent, 50.0);
        assert_eq!(s.cv_percent, Some(0.0));
    }

    #[test]
    fn single_loop_batch() {
        let inst = table1_instance(1, 3);
        let b = run_batch(&inst, &AcoParams::default(), 4);
        assert_eq!(b.stats.c_min, Some(1120.0));
        assert_eq!(b.stats.c_avg, Some(1120.0));
        assert_eq!(b.stats.cv_percent, Some(0.0));
        assert_eq!(b.stats.w_percent, 100.0);
        assert_eq!(b.records.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(RunStats::from_records(&b.records), b.stats);
    }
}
