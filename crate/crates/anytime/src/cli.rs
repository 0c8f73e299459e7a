//! Command-line front end.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use anytime_core::optimizer::{
    brute_force_order, evaluate_order, greedy_perf, greedy_time, optimal_order, plan_from_exit_path, select_exits, Method,
};
use anytime_core::simulator::simulate;
use anytime_core::{
    ExecutionGraph, ExitGraph, InterruptDistribution, LayerId, Mode, NetworkProfile, SchedulePlan, SimulationSpec,
    SubExitId, WeightedDag, Weighting,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::document::load_profile;
use crate::fixtures;
use crate::render::{self, curve_csv, histogram_csv, metrics_csv, to_json, PlanView, SimulationView};
use crate::report::{build_report, ReportOptions};
use crate::svg::render_curve_svg;
use crate::weighting::{parse_weighting, read_samples};

#[derive(Debug, Parser)]
#[command(name = "anytime", version, about = "Anytime-inference scheduling for early-exit networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Soft,
    Hard,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Soft => Mode::Soft,
            ModeArg::Hard => Mode::Hard,
        }
    }
}

#[derive(Debug, Args)]
struct Shared {
    /// `uniform`, `piecewise:<csv>` or `samples:<csv>`.
    #[arg(long, default_value = "uniform")]
    weighting: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Soft)]
    mode: ModeArg,
    /// Report Q divided by the horizon (default).
    #[arg(long, overrides_with = "no_normalize")]
    normalize: bool,
    #[arg(long)]
    no_normalize: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
    /// Count the gaps before the first and after the last exit in max delta.
    #[arg(long)]
    include_initial_gap: bool,
}

impl Shared {
    fn normalized(&self) -> bool {
        !self.no_normalize
    }

    fn weighting(&self) -> Result<Weighting> {
        parse_weighting(&self.weighting)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GreedyMethod {
    Time,
    Perf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderMethod {
    Optimal,
    BruteForce,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a profile and print a summary.
    Validate {
        /// Profile file, or `builtin:<name>` for a bundled fixture.
        profile: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Sizes of the execution-state and exit graphs.
    GraphStats {
        profile: String,
        /// Also dump every execution state.
        #[arg(long)]
        verbose: bool,
        #[command(flatten)]
        shared: Shared,
    },
    /// Quality curve of one execution order.
    Curve {
        profile: String,
        /// Comma-separated layer ids; defaults to the profile's topological order.
        #[arg(long)]
        order: Option<String>,
        /// Deployed exits as `a,b,c;d,e,f` sub-exit tuples; defaults to all.
        #[arg(long)]
        exits: Option<String>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Best execution order with every exit deployed.
    Optimize {
        profile: String,
        #[arg(long, value_enum, default_value_t = OrderMethod::Optimal)]
        method: OrderMethod,
        /// Order-count limit for brute force.
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
        #[command(flatten)]
        shared: Shared,
    },
    /// Best subset of at most k exits (final exit included).
    SelectExits {
        profile: String,
        /// Defaults to every distinct exit.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Greedy baseline exit path.
    Greedy {
        profile: String,
        #[arg(long, value_enum)]
        method: GreedyMethod,
        #[command(flatten)]
        shared: Shared,
    },
    /// Monte Carlo interrupt simulation.
    Simulate {
        profile: String,
        /// Plan JSON from `optimize`, `select-exits` or `greedy`.
        #[arg(long, conflicts_with = "exits")]
        plan: Option<PathBuf>,
        /// Deploy these exits (`a,b,c;d,e,f`) along their dependency order.
        #[arg(long)]
        exits: Option<String>,
        /// `uniform`, `exponential:<rate per ms>` or `samples:<csv>`.
        #[arg(long, default_value = "uniform")]
        interrupt: String,
        /// Per-chunk synchronization overhead in ms.
        #[arg(long, default_value_t = 0.0)]
        overhead: f64,
        /// Output transfer delay in ms.
        #[arg(long, default_value_t = 0.0)]
        transfer: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        shared: Shared,
    },
    /// Optimal and greedy plans with a metrics table for several profiles.
    Report {
        #[arg(required = true)]
        profiles: Vec<String>,
        #[command(flatten)]
        shared: Shared,
    },
}

fn load(arg: &str) -> Result<NetworkProfile> {
    match arg.strip_prefix("builtin:") {
        Some(name) => fixtures::load(name),
        None => load_profile(Path::new(arg)),
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout.
fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = out else {
        std::io::stdout().write_all(contents.as_bytes())?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn parse_exits(profile: &NetworkProfile, spec: &str) -> Result<Vec<usize>> {
    spec.split(';')
        .map(|tuple| {
            let ids = tuple
                .split(',')
                .map(|s| s.trim().parse::<u32>().map(SubExitId))
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("bad exit tuple {tuple:?}"))?;
            profile
                .find_exit(&ids)
                .ok_or_else(|| anyhow!("profile {} has no exit ({tuple})", profile.name()))
        })
        .collect()
}

fn parse_order(spec: &str) -> Result<Vec<LayerId>> {
    spec.split(',')
        .map(|s| s.trim().parse::<u32>().map(LayerId).with_context(|| format!("bad layer id {s:?}")))
        .collect()
}

fn parse_interrupt(arg: &str) -> Result<InterruptDistribution> {
    if arg == "uniform" {
        return Ok(InterruptDistribution::Uniform);
    }
    if let Some(rate) = arg.strip_prefix("exponential:") {
        let rate = rate.parse::<f64>().with_context(|| format!("bad rate {rate:?}"))?;
        return Ok(InterruptDistribution::Exponential { rate });
    }
    if let Some(file) = arg.strip_prefix("samples:") {
        return Ok(InterruptDistribution::Empirical(read_samples(Path::new(file))?));
    }
    bail!("unknown interrupt distribution {arg:?}; expected uniform, exponential:<rate> or samples:<csv>")
}

fn require_soft(shared: &Shared, what: &str) -> Result<()> {
    if Mode::from(shared.mode) == Mode::Hard {
        bail!("{what} is defined on the soft-timing exit graph; drop --mode hard");
    }
    Ok(())
}

fn emit_plan(profile: &NetworkProfile, plan: &SchedulePlan, shared: &Shared) -> Result<()> {
    let body = match shared.format {
        Format::Json => to_json(&PlanView::new(profile, plan, shared.normalized(), shared.include_initial_gap)),
        Format::Csv => curve_csv(&plan.curve),
        Format::Svg => render_curve_svg(&[(format!("{}/{}", profile.name(), plan.method), plan.curve.clone())])?,
    };
    emit(shared.out.as_deref(), &body)
}

#[derive(Serialize)]
struct GraphStats {
    profile: String,
    mode: String,
    layers: usize,
    horizon_ms: f64,
    execution_graph: ExecutionStats,
    exit_graph: Option<ExitStats>,
    exit_graph_error: Option<String>,
}

#[derive(Serialize)]
struct ExecutionStats {
    nodes: usize,
    arcs: usize,
    source: usize,
    sink: usize,
    widest_level: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<Vec<StateView>>,
}

#[derive(Serialize)]
struct StateView {
    id: usize,
    executed: Vec<u32>,
    elapsed_ms: f64,
    reached_quality: f64,
}

#[derive(Serialize)]
struct ExitStats {
    nodes: usize,
    arcs: usize,
    immediate_arcs: usize,
}

fn graph_stats(profile: &NetworkProfile, shared: &Shared, verbose: bool) -> Result<String> {
    let w = shared.weighting()?;
    let mode = shared.mode.into();
    let g = ExecutionGraph::build(profile, &w, mode, shared.node_limit)?;
    let mut levels = vec![0usize; profile.layer_count() + 1];
    for s in g.states() {
        levels[s.executed.len()] += 1;
    }
    let (exit_graph, exit_graph_error) = match ExitGraph::build(profile, &w) {
        Ok(x) => {
            let immediate_arcs = (0..x.node_count()).map(|v| x.immediate_successors(v).count()).sum();
            (
                Some(ExitStats {
                    nodes: x.node_count(),
                    arcs: x.arcs().len(),
                    immediate_arcs,
                }),
                None,
            )
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let stats = GraphStats {
        profile: profile.name().to_string(),
        mode: mode.to_string(),
        layers: profile.layer_count(),
        horizon_ms: g.horizon(),
        execution_graph: ExecutionStats {
            nodes: g.node_count(),
            arcs: g.arcs().len(),
            source: g.source(),
            sink: g.sink(),
            widest_level: levels.into_iter().max().unwrap_or(0),
            states: verbose.then(|| {
                g.states()
                    .iter()
                    .enumerate()
                    .map(|(id, s)| StateView {
                        id,
                        executed: s.executed.iter().map(|l| profile.layer_id(l).0).collect(),
                        elapsed_ms: s.elapsed,
                        reached_quality: s.reached_quality,
                    })
                    .collect()
            }),
        },
        exit_graph,
        exit_graph_error,
    };
    Ok(to_json(&stats))
}

fn validate_summary(profile: &NetworkProfile) -> String {
    let trained = profile.exits().iter().filter(|e| e.trained).count();
    format!(
        "{}: {} layers, {} sub-exits, {} exits ({} trained), final exit {}, total latency {:.2} ms\n",
        profile.name(),
        profile.layer_count(),
        profile.sub_exits().len(),
        profile.exits().len(),
        trained,
        profile.exit_label(profile.final_exit()),
        profile.latency_sum(&profile.full_set()),
    )
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Validate { profile, shared } => {
            let p = load(&profile)?;
            emit(shared.out.as_deref(), &validate_summary(&p))
        }
        Command::GraphStats {
            profile,
            verbose,
            shared,
        } => {
            let p = load(&profile)?;
            emit(shared.out.as_deref(), &graph_stats(&p, &shared, verbose)?)
        }
        Command::Curve {
            profile,
            order,
            exits,
            shared,
        } => {
            let p = load(&profile)?;
            let w = shared.weighting()?;
            let order = match order {
                Some(o) => parse_order(&o)?,
                None => p.topological_order().iter().map(|&l| p.layer_id(l)).collect(),
            };
            let exits = match exits {
                Some(e) => parse_exits(&p, &e)?,
                None => (0..p.exits().len()).collect(),
            };
            let plan = evaluate_order(&p, &order, &exits, shared.mode.into(), &w, Method::Optimal)?;
            let body = match shared.format {
                Format::Json => to_json(&render::CurveView::new(&plan.curve)),
                Format::Csv => curve_csv(&plan.curve),
                Format::Svg => render_curve_svg(&[(p.name().to_string(), plan.curve.clone())])?,
            };
            emit(shared.out.as_deref(), &body)
        }
        Command::Optimize {
            profile,
            method,
            limit,
            shared,
        } => {
            let p = load(&profile)?;
            let w = shared.weighting()?;
            let plan = match method {
                OrderMethod::Optimal => {
                    let g = ExecutionGraph::build(&p, &w, shared.mode.into(), shared.node_limit)?;
                    optimal_order(&g)?
                }
                OrderMethod::BruteForce => brute_force_order(&p, &w, shared.mode.into(), limit)?,
            };
            emit_plan(&p, &plan, &shared)
        }
        Command::SelectExits { profile, k, shared } => {
            require_soft(&shared, "exit selection")?;
            let p = load(&profile)?;
            let w = shared.weighting()?;
            let g = ExitGraph::build(&p, &w)?;
            emit_plan(&p, &select_exits(&g, k.unwrap_or(g.exit_count()))?, &shared)
        }
        Command::Greedy {
            profile,
            method,
            shared,
        } => {
            require_soft(&shared, "the greedy baseline")?;
            let p = load(&profile)?;
            let w = shared.weighting()?;
            let g = ExitGraph::build(&p, &w)?;
            let plan = match method {
                GreedyMethod::Time => greedy_time(&g)?,
                GreedyMethod::Perf => greedy_perf(&g)?,
            };
            emit_plan(&p, &plan, &shared)
        }
        Command::Simulate {
            profile,
            plan,
            exits,
            interrupt,
            overhead,
            transfer,
            trials,
            shared,
        } => {
            let p = load(&profile)?;
            let w = shared.weighting()?;
            let mode: Mode = shared.mode.into();
            let plan = if let Some(path) = plan {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                render::parse_plan(&text)?.to_plan(&p, &w)?
            } else if let Some(spec) = exits {
                let exits = parse_exits(&p, &spec)?;
                let realized = plan_from_exit_path(&p, &exits, &w, Method::Optimal, 0.0)?;
                evaluate_order(&p, &realized.order, &exits, Mode::Soft, &w, Method::Optimal)?
            } else {
                let g = ExecutionGraph::build(&p, &w, mode, shared.node_limit)?;
                optimal_order(&g)?
            };
            let spec = SimulationSpec {
                plan,
                mode,
                interrupt: parse_interrupt(&interrupt)?,
                per_chunk_overhead: overhead,
                transfer_delay: transfer,
                trials,
                seed: shared.seed,
            };
            let result = simulate(&p, &spec)?;
            let body = match shared.format {
                Format::Json => to_json(&SimulationView::new(&p, mode, trials, shared.seed, &result)),
                Format::Csv => histogram_csv(&result),
                Format::Svg => bail!("simulate renders json or csv"),
            };
            emit(shared.out.as_deref(), &body)
        }
        Command::Report { profiles, shared } => {
            let loaded = profiles.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            let opts = ReportOptions {
                weighting: shared.weighting()?,
                mode: shared.mode.into(),
                node_limit: shared.node_limit,
                normalized: shared.normalized(),
                include_initial_gap: shared.include_initial_gap,
                seed: shared.seed,
            };
            let bundle = build_report(&loaded, &opts)?;
            let body = match shared.format {
                Format::Json => to_json(&bundle),
                Format::Csv => metrics_csv(&bundle.metrics),
                Format::Svg => render_curve_svg(&bundle.curves)?,
            };
            emit(shared.out.as_deref(), &body)
        }
    }
}

/// Runs the CLI on `argv` (program name first). Returns the process exit
/// status: 0 on success, 1 on validation or I/O errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
