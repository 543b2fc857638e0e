//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible or no solution found, 2 usage or
//! parse error, 3 exact search budget exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};

use crate::aco::{solve, solve_random_baseline, AcoParams, HeuristicMode, SolveResult};
use crate::batch::{run_batch, runs_csv, stats_csv};
use crate::bundled;
use crate::feasibility::{validate, FeasibilityReport};
use crate::io::{export_convergence, parse_architecture, parse_instance, render_architecture};
use crate::model::{Architecture, ProblemInstance};
use crate::oracle::{exact_solve, ExactLimits, ExactOutcome};
use crate::render::{render_tree, TreeFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dcs-synth", version, about = "Minimum-cost control-system hardware synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Heuristic {
    InverseCost,
    ChannelsPerCost,
}

impl From<Heuristic> for HeuristicMode {
    fn from(h: Heuristic) -> Self {
        match h {
            Heuristic::InverseCost => HeuristicMode::InverseCost,
            Heuristic::ChannelsPerCost => HeuristicMode::ChannelsPerCost,
        }
    }
}

#[derive(Debug, clap::Args)]
struct SearchArgs {
    /// Instance JSON; bundled instance names are accepted too.
    instance: PathBuf,
    /// Overrides the seed from the instance file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    heuristic: Option<Heuristic>,
}

#[derive(Debug, clap::Args)]
struct Outputs {
    /// Write the text tree here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a Graphviz rendering here.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the architecture as JSON (readable by `verify`).
    #[arg(long)]
    arch: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the ant colony once.
    Solve {
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        outputs: Outputs,
        /// Write the per-iteration convergence CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Repeat the colony with seeds base, base+1, ... and summarise.
    ///
    /// CV uses the population standard deviation over successful runs.
    Batch {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        runs: u32,
        /// Write the summary CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write one CSV row per run here.
        #[arg(long)]
        runs_csv: Option<PathBuf>,
    },
    /// Solve to optimality.
    Exact {
        /// Instance JSON; bundled instance names are accepted too.
        instance: PathBuf,
        #[arg(long, default_value_t = ExactLimits::default().max_nodes)]
        max_nodes: u32,
        /// Seconds.
        #[arg(long, default_value_t = 60.0)]
        time_budget: f64,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Check an architecture against every constraint.
    Verify {
        instance: PathBuf,
        architecture: PathBuf,
    },
    /// Random search with the colony's budget and no learning.
    Baseline {
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        outputs: Outputs,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    match std::fs::read_to_string(path) {
        Ok(t) => Ok(t),
        Err(e) => {
            let name = path.file_name().and_then(|n| n.to_str());
            match name.and_then(bundled::lookup) {
                Some(t) if !path.exists() => Ok(t.to_string()),
                _ => Err(Failure::usage(format!("{}: {e}", path.display()))),
            }
        }
    }
}

fn load_instance(path: &Path) -> Result<(ProblemInstance, AcoParams), Failure> {
    let text = read_text(path)?;
    parse_instance(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn params_for(search: &SearchArgs, mut params: AcoParams) -> AcoParams {
    if let Some(s) = search.seed {
        params.seed = s;
    }
    if let Some(h) = search.heuristic {
        params.heuristic = h.into();
    }
    params
}

fn emit_architecture(
    arch: &Architecture,
    inst: &ProblemInstance,
    outputs: &Outputs,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let text = render_tree(arch, inst, TreeFormat::Text);
    let _ = write!(out, "{text}");
    if let Some(p) = &outputs.out {
        write_file(p, &text)?;
    }
    if let Some(p) = &outputs.dot {
        write_file(p, &render_tree(arch, inst, TreeFormat::Dot))?;
    }
    if let Some(p) = &outputs.arch {
        write_file(p, &render_architecture(arch, inst))?;
    }
    Ok(())
}

fn report_search(
    res: &SolveResult,
    inst: &ProblemInstance,
    outputs: &Outputs,
    trace: Option<&PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if let Some(p) = trace {
        write_file(p, &export_convergence(&res.trace))?;
    }
    let code = match (&res.best_architecture, res.best_cost) {
        (Some(arch), Some(cost)) => {
            let _ = writeln!(out, "cost {cost}");
            emit_architecture(arch, inst, outputs, out)?;
            EXIT_OK
        }
        _ => {
            let _ = writeln!(out, "no feasible solution");
            EXIT_INFEASIBLE
        }
    };
    let _ = writeln!(out, "wall_time {:.3}", res.wall_time);
    Ok(code)
}

fn print_report(report: &FeasibilityReport, out: &mut dyn Write) {
    let _ = writeln!(out, "feasible {}", report.is_feasible());
    let _ = writeln!(out, "cost {}", report.total_cost);
    let _ = writeln!(out, "worst_loop_time {}", report.worst_loop_time);
    let _ = writeln!(out, "system_fail_prob {}", report.system_fail_prob);
    for v in &report.violations {
        let _ = writeln!(out, "violation {} nodes {:?} loops {:?}", v.family, v.nodes, v.loops);
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Solve { search, outputs, trace } => {
            let (inst, params) = load_instance(&search.instance)?;
            let res = solve(&inst, &params_for(&search, params));
            report_search(&res, &inst, &outputs, trace.as_ref(), out)
        }
        Command::Baseline { search, outputs, trace } => {
            let (inst, params) = load_instance(&search.instance)?;
            let res = solve_random_baseline(&inst, &params_for(&search, params));
            report_search(&res, &inst, &outputs, trace.as_ref(), out)
        }
        Command::Batch {
            search,
            runs,
            csv,
            runs_csv: per_run,
        } => {
            let (inst, params) = load_instance(&search.instance)?;
            let params = params_for(&search, params);
            let b = run_batch(&inst, &params, runs);
            let summary = stats_csv(&b.stats);
            let _ = write!(out, "{summary}");
            if let Some(p) = &csv {
                write_file(p, &summary)?;
            }
            if let Some(p) = &per_run {
                write_file(p, &runs_csv(&b.records))?;
            }
            Ok(if b.stats.successes > 0 { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Exact {
            instance,
            max_nodes,
            time_budget,
            outputs,
        } => {
            if !(time_budget.is_finite() && time_budget >= 0.0) {
                return Err(Failure::usage("--time-budget must be a non-negative number of seconds"));
            }
            let (inst, _) = load_instance(&instance)?;
            let limits = ExactLimits {
                max_nodes,
                time_budget: Duration::from_secs_f64(time_budget),
                ..ExactLimits::default()
            };
            let start = Instant::now();
            let outcome = exact_solve(&inst, &limits);
            let code = match &outcome {
                ExactOutcome::Optimal { architecture, cost } => {
                    let _ = writeln!(out, "cost {cost}");
                    emit_architecture(architecture, &inst, &outputs, out)?;
                    EXIT_OK
                }
                ExactOutcome::Infeasible => {
                    let _ = writeln!(out, "infeasible");
                    EXIT_INFEASIBLE
                }
                ExactOutcome::BudgetExceeded => {
                    let _ = writeln!(out, "budget exceeded");
                    EXIT_BUDGET
                }
            };
            let _ = writeln!(out, "wall_time {:.3}", start.elapsed().as_secs_f64());
            Ok(code)
        }
        Command::Verify { instance, architecture } => {
            let (inst, _) = load_instance(&instance)?;
            let text = read_text(&architecture)?;
            let arch = parse_architecture(&text, &inst)
                .map_err(|e| Failure::usage(format!("{}: {e}", architecture.display())))?;
            let report = validate(&arch, &inst);
            print_report(&report, out);
            Ok(if report.is_feasible() { EXIT_OK } else { EXIT_INFEASIBLE })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
