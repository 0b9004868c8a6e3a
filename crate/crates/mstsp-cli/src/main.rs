//! Command-line operator surface: instance generation, solving,
//! verification, exact reference solving, ILP export, benchmarking, and
//! route rendering.
//!
//! Every subcommand is non-interactive and deterministic under a fixed
//! `--seed`. Failures are communicated through nonzero exit codes and a
//! single machine-readable `error: ...` line on stderr.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mstsp::gen::{
    parse_pylon_csv, sample_instance, synthetic_pylons, EndpointRule, PylonField, SyntheticConfig,
};
use mstsp::geometry::{CostMatrix, Instance, KinematicLimits, Point};
use mstsp::grasp::{self, GraspConfig, SolveReport};
use mstsp::ilp::{build_model, export_lp};
use mstsp::model::{check_feasible, pdb, PenaltyConfig, Solution};
use mstsp::oracle::{exact_min_tours, exact_solve, OracleLimits};

#[derive(Parser)]
#[command(
    name = "mstsp",
    version,
    about = "Multi-tour set TSP inspection route planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from pylon data or a synthetic topology.
    Gen(GenArgs),
    /// Solve an instance with the GRASP heuristic.
    Solve(SolveArgs),
    /// Solve a small instance exactly by exhaustive search.
    Exact(ExactArgs),
    /// Check a solution file against an instance.
    Verify(VerifyArgs),
    /// Export the ILP model in LP text format.
    ExportIlp(ExportIlpArgs),
    /// Render a solution as SVG and GeoJSON.
    Render(RenderArgs),
    /// Solve a batch of instances and emit a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Pylon CSV (`id,x,y[,z]`; consecutive ids are chained). Omit to use
    /// the synthetic generator.
    #[arg(long)]
    pylons: Option<PathBuf>,
    /// Depot position as `x,y`.
    #[arg(long, default_value = "0,0", value_parser = parse_point)]
    depot: Point,
    /// Termination depot if different from the depot.
    #[arg(long, value_parser = parse_point)]
    depot_end: Option<Point>,
    /// Sampling radius in meters.
    #[arg(long)]
    d_max: f64,
    /// Keep a segment only when both endpoints are within the radius.
    #[arg(long)]
    both_endpoints: bool,
    /// Per-tour flight budget in seconds.
    #[arg(long)]
    c_max: f64,
    #[arg(long, default_value_t = 5.0)]
    v_max: f64,
    #[arg(long, default_value_t = 1.0)]
    v_insp: f64,
    #[arg(long, default_value_t = 2.5)]
    a_max: f64,
    /// Synthetic topology: number of lines radiating from the depot.
    #[arg(long, default_value_t = 6)]
    lines: usize,
    /// Synthetic topology: pylons per line.
    #[arg(long, default_value_t = 30)]
    pylons_per_line: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Solution JSON output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Starting tour count; defaults to the workload bound.
    #[arg(long)]
    n_t: Option<usize>,
    /// Solver config JSON block; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reference solution JSON for %PDB/%PDM.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    rcl: Option<f64>,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    reset: Option<usize>,
    #[arg(long)]
    tabu: Option<usize>,
    #[arg(long)]
    neighborhood: Option<usize>,
    #[arg(long)]
    stop: Option<usize>,
    #[arg(long)]
    k_c: Option<f64>,
}

#[derive(Args)]
struct ExactArgs {
    instance: PathBuf,
    /// Exact tour count; omit to search for the smallest feasible one.
    #[arg(long)]
    n_t: Option<usize>,
    #[arg(long, default_value_t = 8)]
    max_segments: usize,
    #[arg(long, default_value_t = 3)]
    max_tours: usize,
    #[arg(long, default_value_t = 50_000_000)]
    node_budget: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
}

#[derive(Args)]
struct ExportIlpArgs {
    instance: PathBuf,
    #[arg(long)]
    n_t: usize,
    /// Add a zero-cost depot-to-depot arc so unused tours stay feasible.
    #[arg(long)]
    allow_empty_tours: bool,
    /// Output path; defaults to `<instance>_nt<k>.lp`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    geojson: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    instances: Vec<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Compute reference costs with the exact solver where it fits.
    #[arg(long)]
    exact_ref: bool,
    /// Directory of reference solution JSONs named `<instance stem>.json`.
    #[arg(long)]
    reference_dir: Option<PathBuf>,
    /// CSV output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_point(text: &str) -> Result<Point, String> {
    let coords: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("cannot parse coordinate {p:?}"))
        })
        .collect::<Result<_, _>>()?;
    match coords.as_slice() {
        [x, y] => Ok(Point::new(*x, *y)),
        [x, y, z] => Ok(Point::new3(*x, *y, *z)),
        _ => Err("expected x,y or x,y,z".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Verify(args) => cmd_verify(args),
        Command::ExportIlp(args) => cmd_export_ilp(args),
        Command::Render(args) => cmd_render(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Resolves `--seed`, deriving one from entropy (and announcing it) when the
/// flag is absent.
fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(seed) => seed,
        None => {
            let nanos = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            let derived = nanos ^ ((std::process::id() as u64) << 32);
            eprintln!("seed: {derived}");
            derived
        }
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<(Instance, CostMatrix)> {
    let instance = Instance::from_json_file(path)
        .with_context(|| format!("cannot load instance {}", path.display()))?;
    let matrix = CostMatrix::build(&instance)?;
    instance.ensure_coverable(&matrix)?;
    Ok((instance, matrix))
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let limits = KinematicLimits {
        v_max: args.v_max,
        v_insp: args.v_insp,
        a_max: args.a_max,
    };
    let rule = if args.both_endpoints {
        EndpointRule::BothEndpoints
    } else {
        EndpointRule::AnyEndpoint
    };
    let field = match &args.pylons {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read pylon csv {}", path.display()))?;
            PylonField::from_consecutive_ids(parse_pylon_csv(&text)?)
        }
        None => {
            let config = SyntheticConfig {
                lines: args.lines,
                pylons_per_line: args.pylons_per_line,
                seed: resolve_seed(args.seed),
                ..SyntheticConfig::default()
            };
            synthetic_pylons(&config)?
        }
    };
    let instance = sample_instance(
        args.depot,
        args.depot_end,
        &field,
        args.d_max,
        rule,
        limits,
        args.c_max,
    )?;
    write_output(&args.output, &instance.to_json_string())?;
    eprintln!(
        "generated {} segments within d_max = {} m",
        instance.n_s(),
        args.d_max
    );
    Ok(ExitCode::SUCCESS)
}

/// Builds the solver config from an optional JSON block plus explicit flags.
fn merge_config(args: &SolveArgs) -> Result<GraspConfig> {
    let mut config_has_seed = false;
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            config_has_seed = serde_json::from_str::<serde_json::Value>(&text)
                .is_ok_and(|v| v.get("seed").is_some());
            serde_json::from_str(&text)
                .with_context(|| format!("cannot parse config {}", path.display()))?
        }
        None => GraspConfig::default(),
    };
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.jobs {
        config.jobs = v;
    }
    if let Some(v) = args.rcl {
        config.rcl_fraction = v;
    }
    if let Some(v) = args.w0 {
        config.w0 = v;
    }
    if let Some(v) = args.p1 {
        config.p1 = v;
    }
    if let Some(v) = args.p2 {
        config.p2 = v;
    }
    if let Some(v) = args.reset {
        config.reset_period = v;
    }
    if let Some(v) = args.tabu {
        config.tabu_capacity = Some(v);
    }
    if let Some(v) = args.neighborhood {
        config.neighborhood_size = Some(v);
    }
    if let Some(v) = args.stop {
        config.stop_after = v;
    }
    if let Some(v) = args.k_c {
        config.k_c = v;
    }
    // Entropy (announced) only when neither the flag nor the config block
    // pinned a seed.
    config.seed = match args.seed {
        Some(seed) => seed,
        None if config_has_seed => config.seed,
        None => resolve_seed(None),
    };
    config.validate()?;
    Ok(config)
}

fn reference_cost(path: &Path) -> Result<f64> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read reference {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    value
        .get("cost")
        .and_then(|c| c.as_f64())
        .ok_or_else(|| anyhow!("reference {} has no numeric `cost` field", path.display()))
}

const BENCH_HEADER: &str = "instance,n_s,c_max,n_t,best,mean,pdb,pdm,t_mean,t_total";

fn bench_row(
    name: &str,
    instance: &Instance,
    report: &SolveReport,
    reference: Option<f64>,
) -> String {
    let (pdb_text, pdm_text) = match reference {
        Some(r) if r > 0.0 => (
            format!("{:.2}", pdb(report.best_cost, r).unwrap()),
            format!("{:.2}", pdb(report.mean_cost, r).unwrap()),
        ),
        _ => ("-".to_string(), "-".to_string()),
    };
    format!(
        "{name},{},{},{},{:.3},{:.3},{pdb_text},{pdm_text},{:.3},{:.3}",
        instance.n_s(),
        instance.c_max,
        report.reported_tours,
        report.best_cost,
        report.mean_cost,
        report.mean_trial_seconds,
        report.total_seconds,
    )
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "?".into())
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let (instance, matrix) = load_instance(&args.instance)?;
    let config = merge_config(&args)?;
    let reference = args.reference.as_deref().map(reference_cost).transpose()?;
    let (solution, report) = grasp::solve(&instance, &matrix, &config, args.n_t)?;
    write_output(&args.output, &solution.to_json(&instance))?;
    println!("{BENCH_HEADER}");
    println!(
        "{}",
        bench_row(&stem(&args.instance), &instance, &report, reference)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_exact(args: ExactArgs) -> Result<ExitCode> {
    let (instance, matrix) = load_instance(&args.instance)?;
    let limits = OracleLimits {
        max_segments: args.max_segments,
        max_tours: args.max_tours,
        node_budget: args.node_budget,
    };
    let started = Instant::now();
    let found = match args.n_t {
        Some(n_t) => exact_solve(&instance, &matrix, n_t, &limits)?.map(|s| (n_t, s)),
        None => exact_min_tours(&instance, &matrix, &limits)?,
    };
    match found {
        Some((n_t, solution)) => {
            write_output(&args.output, &solution.to_json(&instance))?;
            println!(
                "exact: n_t={} cost={:.3} elapsed={:.3}s",
                n_t,
                solution.total_cost,
                started.elapsed().as_secs_f64()
            );
            Ok(ExitCode::SUCCESS)
        }
        None => bail!(
            "no feasible solution within {} tours at c_max = {}",
            args.n_t.unwrap_or(args.max_tours),
            instance.c_max
        ),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let (instance, matrix) = load_instance(&args.instance)?;
    let text = std::fs::read_to_string(&args.solution)
        .with_context(|| format!("cannot read solution {}", args.solution.display()))?;
    let solution = Solution::from_json_str(&text, &instance, &matrix, PenaltyConfig::default())?;

    // Warn when the stated cost drifts from the recomputed one.
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(stated) = value.get("cost").and_then(|c| c.as_f64()) {
            if (stated - solution.total_cost).abs() > 1e-6 {
                eprintln!(
                    "note: stated cost {stated} differs from recomputed {}",
                    solution.total_cost
                );
            }
        }
    }

    let report = check_feasible(&solution, &instance, &matrix);
    for violation in &report.violations {
        println!("violation: {violation}");
    }
    if report.is_feasible() {
        println!(
            "feasible: cost={:.3} tours={}",
            solution.total_cost,
            solution.tour_count()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!("infeasible: {} violations", report.violations.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_export_ilp(args: ExportIlpArgs) -> Result<ExitCode> {
    let (instance, matrix) = load_instance(&args.instance)?;
    let model = build_model(&instance, &matrix, args.n_t, args.allow_empty_tours)?;
    let text = export_lp(&model);
    let path = args.output.unwrap_or_else(|| {
        let mut base = args.instance.clone();
        base.set_extension("");
        PathBuf::from(format!("{}_nt{}.lp", base.display(), args.n_t))
    });
    std::fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    println!(
        "wrote {} ({} binaries, {} integers, {} rows)",
        path.display(),
        model.binary_count(),
        model.integer_count(),
        model.groups.iter().map(|g| g.rows.len()).sum::<usize>()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode> {
    if args.svg.is_none() && args.geojson.is_none() {
        bail!("render needs --svg and/or --geojson");
    }
    let (instance, matrix) = load_instance(&args.instance)?;
    let text = std::fs::read_to_string(&args.solution)
        .with_context(|| format!("cannot read solution {}", args.solution.display()))?;
    let solution = Solution::from_json_str(&text, &instance, &matrix, PenaltyConfig::default())?;
    let coverage = check_feasible(&solution, &instance, &matrix);
    let mismatched = coverage.violations.iter().any(|v| {
        matches!(
            v,
            mstsp::model::Violation::MissingSegment(_)
                | mstsp::model::Violation::DuplicatedSegment(_)
        )
    });
    if mismatched {
        bail!("solution does not cover the instance; run `mstsp verify` for details");
    }
    if let Some(path) = &args.svg {
        std::fs::write(path, render::solution_to_svg(&instance, &solution))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.geojson {
        std::fs::write(path, render::solution_to_geojson(&instance, &solution))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.instances.is_empty() {
        bail!("bench needs at least one instance");
    }
    let mut config = GraspConfig::default();
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.jobs {
        config.jobs = v;
    }
    config.seed = resolve_seed(args.seed);

    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for path in &args.instances {
        let (instance, matrix) = load_instance(path)?;
        let (_, report) = grasp::solve(&instance, &matrix, &config, None)?;
        let reference = if let Some(dir) = &args.reference_dir {
            let candidate = dir.join(format!("{}.json", stem(path)));
            candidate
                .exists()
                .then(|| reference_cost(&candidate))
                .transpose()?
        } else if args.exact_ref {
            match exact_min_tours(&instance, &matrix, &OracleLimits::default()) {
                Ok(found) => found.map(|(_, s)| s.total_cost),
                Err(err) => {
                    eprintln!("note: no exact reference for {}: {err}", path.display());
                    None
                }
            }
        } else {
            None
        };
        out.push_str(&bench_row(&stem(path), &instance, &report, reference));
        out.push('\n');
    }
    write_output(&args.output, &out)?;
    Ok(ExitCode::SUCCESS)
}
