use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use kkboundary::accel::DistanceMode;
use kkboundary::graph::{read_topology, write_topology};
use kkboundary::layout::{read_layout, write_layout, NoHook};
use kkboundary::metrics::{detect_boundary, score, DEFAULT_DETECT_ALPHA_FACTOR};
use kkboundary::topogen::{generate_small_suite, generate_topology, suite_average_degree, GenConfig, SuiteConfig};
use kkboundary::{BoundaryLabeling, Budget};
use kkboundary_bench::config::{apply, read_config};
use kkboundary_bench::experiment::{run_experiment, ExperimentConfig, SCORE_HEADER};
use kkboundary_bench::labels::{read_labels, write_labels};
use kkboundary_bench::{energy_race, run_algorithm, Algorithm, RunSettings};

#[derive(Parser)]
#[command(name = "kkb", about = "Force-directed boundary detection for ad hoc networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate one random topology.
    Gen(GenArgs),
    /// Generate one topology per node count in a range.
    Suite(SuiteArgs),
    /// Lay out a topology with one algorithm.
    Layout(LayoutArgs),
    /// Detect boundary nodes on a layout.
    Detect(DetectArgs),
    /// Score predicted labels against a topology's ground truth.
    Eval(EvalArgs),
    /// Run an experiment sweep.
    Bench(BenchArgs),
    /// Time two algorithms to a common energy.
    Race(RaceArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "gamma")]
    degree: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    e: f64,
    #[arg(long = "gamma-b", default_value_t = 0.7)]
    gamma_b: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Ground-truth alpha in meters; defaults to 1.5 × the radius.
    #[arg(long)]
    alpha: Option<f64>,
    /// Also label the perimeters of holes as boundary.
    #[arg(long)]
    holes: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 10)]
    from: usize,
    #[arg(long, default_value_t = 1000)]
    to: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LayoutArgs {
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    topo: PathBuf,
    #[arg(long = "budget-secs", default_value_t = 60.0)]
    budget_secs: f64,
    #[arg(long = "max-iterations")]
    max_iterations: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "k-percent", default_value_t = 5.0)]
    k_percent: f64,
    #[arg(long = "epsilon-r", default_value_t = 0.1)]
    epsilon_r: f64,
    #[arg(long = "ds-mode", default_value = "signal", value_parser = parse_mode)]
    ds_mode: DistanceMode,
    #[arg(long = "out-layout")]
    out_layout: PathBuf,
    #[arg(long = "out-trace")]
    out_trace: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    layout: PathBuf,
    #[arg(long)]
    topo: PathBuf,
    #[arg(long = "alpha-factor", default_value_t = DEFAULT_DETECT_ALPHA_FACTOR)]
    alpha_factor: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "truth-from-topo")]
    truth_from_topo: PathBuf,
    #[arg(long, default_value = "-")]
    algo: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Use the full grid of node counts.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct RaceArgs {
    #[arg(long)]
    topo: PathBuf,
    #[arg(long)]
    a: Algorithm,
    #[arg(long)]
    b: Algorithm,
    #[arg(long = "target-energy")]
    target_energy: Option<f64>,
    #[arg(long = "budget-secs", default_value_t = 60.0)]
    budget_secs: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Measure both runs' energy under the hop-count model.
    #[arg(long = "hop-energy")]
    hop_energy: bool,
    #[arg(long = "ds-mode", default_value = "signal", value_parser = parse_mode)]
    ds_mode: DistanceMode,
}

fn parse_mode(s: &str) -> Result<DistanceMode, String> {
    match s {
        "hops" => Ok(DistanceMode::Hops),
        "signal" => Ok(DistanceMode::SignalStrength),
        _ => Err(format!("unknown distance mode {s:?}; expected hops or signal")),
    }
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let mut c = GenConfig::new(a.n, a.seed);
    c.target_degree = a.degree;
    if let Some(g) = a.gamma {
        c.gamma = g;
    }
    if let Some(d) = a.delta {
        c.delta = d;
    }
    c.e = a.e;
    c.gamma_b = a.gamma_b;
    c.alpha = a.alpha;
    c.holes = a.holes;
    let t = generate_topology(&c)?;
    write_topology(&t, &a.out)?;
    eprintln!(
        "{} nodes, {} edges, average degree {:.3}",
        t.node_count(),
        t.edge_count(),
        t.average_degree()
    );
    Ok(())
}

fn suite(a: SuiteArgs) -> anyhow::Result<()> {
    let suite = generate_small_suite(&SuiteConfig::new(a.from, a.to, a.seed))?;
    fs::create_dir_all(&a.out_dir)?;
    for t in &suite {
        write_topology(t, a.out_dir.join(format!("n{:04}.topo", t.node_count())))?;
    }
    println!(
        "{} topologies, average degree {:.6}",
        suite.len(),
        suite_average_degree(&suite)
    );
    Ok(())
}

fn layout(a: LayoutArgs) -> anyhow::Result<()> {
    let t = read_topology(&a.topo)?;
    let mut budget = Budget::secs(a.budget_secs);
    if let Some(m) = a.max_iterations {
        budget = budget.iterations(m);
    }
    let s = RunSettings {
        budget,
        seed: a.seed,
        k_percent: a.k_percent,
        epsilon_r: a.epsilon_r,
        ds_mode: a.ds_mode,
        ..RunSettings::default()
    };
    let (l, trace) = run_algorithm(&t, a.algo, &s, &mut NoHook)?;
    write_layout(&l, &a.out_layout)?;
    if let Some(p) = a.out_trace {
        trace.write_csv(p)?;
    }
    eprintln!(
        "{}: {} iterations, energy {:.6}, stopped by {}",
        a.algo,
        trace.iterations,
        trace.final_energy(),
        trace.terminated_by
    );
    Ok(())
}

fn detect(a: DetectArgs) -> anyhow::Result<()> {
    let t = read_topology(&a.topo)?;
    let l = read_layout(&a.layout)?;
    if l.len() != t.node_count() {
        bail!("layout has {} nodes, topology {}", l.len(), t.node_count());
    }
    write_labels(&detect_boundary(&l, &t, a.alpha_factor), &a.out)?;
    Ok(())
}

fn eval(a: EvalArgs) -> anyhow::Result<()> {
    let t = read_topology(&a.truth_from_topo)?;
    let truth = t
        .boundary_truth()
        .map(|f| BoundaryLabeling::new(f.to_vec()))
        .context("topology file has no BOUND lines")?;
    let pred = read_labels(&a.pred)?;
    let s = score(&pred, &truth)?;
    let id = a
        .truth_from_topo
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let c = s.counts;
    let text = format!(
        "{SCORE_HEADER}\n{id},{},{},,{},{},{},{},{},{}\n",
        a.algo, a.seed, s.sensitivity, s.specificity, c.tp, c.fp, c.tn, c.fn_
    );
    match a.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let mut c = match &a.config {
        Some(p) => read_config(p)?,
        None => ExperimentConfig::default(),
    };
    if a.full {
        c = c.full_grid();
    }
    for kv in &a.set {
        let (k, v) = kv.split_once('=').context("--set expects KEY=VALUE")?;
        apply(&mut c, k.trim(), v.trim()).map_err(anyhow::Error::msg)?;
    }
    if let Some(w) = a.workers {
        c.workers = w;
    }
    if let Some(d) = a.out_dir {
        c.output_dir = d;
    }
    let table = run_experiment(&c)?;
    for (label, _, _) in c.variants() {
        if let Some((sens, spec)) = table.mean_scores(&label) {
            println!("{label}: sensitivity {sens:.4}, specificity {spec:.4}");
        }
    }
    let failed = table.failures().count();
    if failed > 0 {
        eprintln!("{failed} runs failed; see failures.csv");
    }
    Ok(())
}

fn race(a: RaceArgs) -> anyhow::Result<()> {
    let t = read_topology(&a.topo)?;
    let s = RunSettings {
        budget: Budget::secs(a.budget_secs),
        seed: a.seed,
        report_hops: a.hop_energy,
        ds_mode: a.ds_mode,
        ..RunSettings::default()
    };
    let r = energy_race(&t, a.a, a.b, a.target_energy, &s)?;
    println!("target_energy,time_a_ms,time_b_ms,ratio,censored_a,censored_b,iterations_a,iterations_b");
    println!(
        "{},{:.3},{:.3},{},{},{},{},{}",
        r.target_energy,
        r.time_a_ms,
        r.time_b_ms,
        r.ratio,
        r.censored_a,
        r.censored_b,
        r.iterations_a,
        r.iterations_b
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Suite(a) => suite(a),
        Cmd::Layout(a) => layout(a),
        Cmd::Detect(a) => detect(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Race(a) => race(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
