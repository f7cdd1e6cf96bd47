use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bima::bounds::{figure1_table, optimal_b};
use bima::generate::{
    corpus_entries, load_corpus, load_instance, random_instance, standard_cost_floors,
    write_corpus, InstanceParams,
};
use bima::graph::{write_candidate_list, write_edge_list};
use bima::runner::{
    run_files, sweep, verify, Algorithm, EvaluatorKind, OutputFormat, RunConfig, SweepInstance,
    SweepSpec, Threshold, Tolerances, VerifyInstance,
};
use bima::{Graph, Money};

#[derive(Parser)]
#[command(name = "bima", version, about = "Budgeted influence maximization with edge augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance
    Run(RunArgs),
    /// Run every algorithm x budget combination over a set of instances (CSV)
    Sweep(SweepArgs),
    /// Check every solver against the brute-force optimum on a corpus
    Verify(VerifyArgs),
    /// Generate a random instance or a whole corpus
    Gen(GenArgs),
    /// Write the approximation-factor curves as CSV
    Bounds(BoundsArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Prefix size for partial enumeration
    #[arg(long = "M", default_value_t = 4)]
    prefix: usize,
    /// Cheap-edge threshold for the general algorithm, or `auto`
    #[arg(long, default_value = "auto")]
    b: Threshold,
    #[arg(long, value_enum, default_value = "exact")]
    evaluator: EvaluatorKind,
    /// Monte Carlo replications
    #[arg(long)]
    replications: Option<u64>,
    /// Size Monte Carlo replications for this absolute error at 95% confidence
    #[arg(long)]
    abs_err: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lazy (CELF) gain re-evaluation
    #[arg(long)]
    lazy: bool,
    /// Maximum uncertain edges for exact evaluation
    #[arg(long, default_value_t = bima::icm::DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
    /// Also run the brute-force oracle and report the ratio
    #[arg(long)]
    oracle: bool,
}

impl SolverArgs {
    fn config(&self, algorithm: Algorithm, budget: Money) -> RunConfig {
        RunConfig {
            algorithm,
            budget,
            prefix_size: self.prefix,
            b: self.b,
            evaluator: self.evaluator,
            replications: self.replications,
            abs_err: self.abs_err,
            master_seed: self.seed,
            lazy: self.lazy,
            exact_limit: self.exact_limit,
            with_oracle: self.oracle,
            timing: false,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Existing-edge list
    #[arg(long)]
    graph: PathBuf,
    /// Candidate-edge list, or an inline JSON generator config
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long, value_enum, default_value = "greedy-lb")]
    algorithm: Algorithm,
    #[arg(long)]
    budget: Money,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Include wall time in the report
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Instance edge lists (repeatable)
    #[arg(long)]
    graph: Vec<PathBuf>,
    /// Candidate lists, matched to --graph by position
    #[arg(long)]
    candidates: Vec<String>,
    /// Corpus directory (adds every instance in its manifest)
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Algorithms (repeatable; default: all but brute)
    #[arg(long, value_enum)]
    algorithm: Vec<Algorithm>,
    /// Budgets (repeatable)
    #[arg(long, required = true)]
    budget: Vec<Money>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute slack on ratio checks
    #[arg(long, default_value_t = Tolerances::default().ratio)]
    ratio_tolerance: f64,
    /// Absolute tolerance on the live-edge identity
    #[arg(long, default_value_t = Tolerances::default().live_edge)]
    live_edge_tolerance: f64,
    /// Absolute tolerance between Monte Carlo and exact spread
    #[arg(long, default_value_t = Tolerances::default().mc)]
    mc_tolerance: f64,
    #[arg(long, default_value_t = Tolerances::default().mc_replications)]
    replications: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Write a corpus (instances plus manifest) into this directory
    #[arg(long, conflicts_with = "out")]
    corpus: Option<PathBuf>,
    /// Corpus size
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Candidate cost floors cycled through the corpus (default 0.2, 0.5, 1)
    #[arg(long)]
    cost_floor: Vec<Money>,
    #[arg(long, default_value_t = 5)]
    nodes: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 0.1)]
    p_min: f64,
    #[arg(long, default_value_t = 0.9)]
    p_max: f64,
    #[arg(long = "candidate-count", default_value_t = 6)]
    candidate_count: usize,
    #[arg(long, default_value_t = 0.1)]
    candidate_p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    candidate_p_max: f64,
    #[arg(long, default_value = "0.2")]
    cost_min: Money,
    #[arg(long, default_value = "1")]
    cost_max: Money,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix for a single instance: writes PREFIX.edges and PREFIX.cand
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value = "figure1.csv")]
    out: PathBuf,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let mut config = args.solver.config(args.algorithm, args.budget);
    config.timing = args.timing;
    let report = run_files(&config, &args.graph, args.candidates.as_deref())?;
    let text = match args.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Failure> {
    let mut instances: Vec<SweepInstance> = args
        .graph
        .iter()
        .enumerate()
        .map(|(i, path)| SweepInstance {
            name: stem(path),
            graph: load_instance(path, args.candidates.get(i).map(String::as_str)),
        })
        .collect();
    if let Some(dir) = &args.corpus {
        instances.extend(load_corpus::<f64>(dir)?.into_iter().map(|inst| SweepInstance {
            name: inst.entry.name,
            graph: inst.graph,
        }));
    }
    if instances.is_empty() {
        return Err(Failure("no instances: pass --graph or --corpus".into()));
    }
    let algorithms = if args.algorithm.is_empty() {
        Algorithm::ALL
            .into_iter()
            .filter(|&a| a != Algorithm::Brute)
            .collect()
    } else {
        args.algorithm
    };
    let spec = SweepSpec {
        algorithms,
        budgets: args.budget,
        base: args.solver.config(Algorithm::GreedyLb, Money::ONE),
    };
    emit(args.out.as_deref(), &sweep(&spec, &instances))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let instances: Vec<VerifyInstance> = load_corpus::<f64>(&args.corpus)?
        .into_iter()
        .map(|inst| VerifyInstance {
            name: inst.entry.name,
            budget: inst.entry.budget,
            graph: inst.graph,
        })
        .collect();
    let tol = Tolerances {
        ratio: args.ratio_tolerance,
        live_edge: args.live_edge_tolerance,
        mc: args.mc_tolerance,
        mc_replications: args.replications,
    };
    let summary = verify(&instances, &tol, args.seed);
    emit(args.out.as_deref(), &summary.to_json())?;
    eprintln!(
        "{}/{} checks passed on {} instances",
        summary.passed, summary.checks, summary.instances
    );
    for f in &summary.failures {
        eprintln!("FAIL {} {}: {}", f.instance, f.check, f.detail);
    }
    Ok(if summary.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, Failure> {
    if let Some(dir) = &args.corpus {
        let floors = if args.cost_floor.is_empty() {
            standard_cost_floors()
        } else {
            args.cost_floor.clone()
        };
        let entries = corpus_entries(
            args.count,
            args.seed,
            &floors,
            (args.candidate_p_min, args.candidate_p_max),
        );
        write_corpus(dir, &entries)?;
        eprintln!("wrote {} instances to {}", entries.len(), dir.display());
        return Ok(ExitCode::SUCCESS);
    }
    let params = InstanceParams {
        nodes: args.nodes,
        edge_density: args.density,
        p_min: args.p_min,
        p_max: args.p_max,
        candidates: args.candidate_count,
        candidate_p_min: args.candidate_p_min,
        candidate_p_max: args.candidate_p_max,
        cost_min: args.cost_min,
        cost_max: args.cost_max,
        seed: args.seed,
    };
    let graph: Graph = random_instance(&params)?;
    match &args.out {
        Some(prefix) => {
            let with_ext = |ext: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            emit(Some(&with_ext(".edges")), &write_edge_list(&graph))?;
            emit(Some(&with_ext(".cand")), &write_candidate_list(&graph))?;
        }
        None => {
            print!("{}", write_edge_list(&graph));
            print!("{}", write_candidate_list(&graph));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(args: BoundsArgs) -> Result<ExitCode, Failure> {
    let fig = figure1_table::<f64>(args.step)?;
    emit(Some(&args.out), &fig.to_csv())?;
    let (b, factor) = optimal_b::<f64>();
    println!("b* = {b:.6}  factor = {factor:.6}");
    println!("general constant meets lb_greedy at c_min = {:.6}", fig.general_meets_lb);
    println!("seed_only meets lb_greedy at c_min = {:.6}", fig.seed_only_meets_lb);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
