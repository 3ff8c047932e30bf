//! Experiment sweeps over topologies, algorithms and seeds.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use kkboundary::layout::NoHook;
use kkboundary::metrics::{detect_boundary, score, DEFAULT_DETECT_ALPHA_FACTOR};
use kkboundary::rng::derive;
use kkboundary::topogen::{generate_topology, GenConfig, EXPERIMENT_E};
use kkboundary::{BoundaryLabeling, Budget, Topology};

use crate::algo::{run_algorithm, Algorithm, RunSettings};
use crate::config::ConfigError;

pub const SCORE_HEADER: &str = "topo_id,algo,seed,elapsed_ms,sensitivity,specificity,tp,fp,tn,fn";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub node_counts: Vec<usize>,
    pub degrees: Vec<f64>,
    pub seeds_per_topology: usize,
    pub budget_secs: f64,
    /// Optional cap on engine iterations, for hardware-independent sweeps.
    pub max_iterations: Option<u64>,
    pub algorithms: Vec<Algorithm>,
    /// Queue shares tried for kk-ms, percent.
    pub k_percent: Vec<f64>,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    /// Node distribution rate of generated topologies.
    pub e: f64,
    pub alpha_factor: f64,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            node_counts: vec![100, 500, 1000, 2000],
            degrees: vec![6.0, 8.0, 10.0, 12.0, 15.0],
            seeds_per_topology: 5,
            budget_secs: 60.0,
            max_iterations: None,
            algorithms: Algorithm::ALL.to_vec(),
            k_percent: vec![1.0, 3.0, 5.0, 10.0, 15.0],
            output_dir: PathBuf::from("results"),
            master_seed: 1,
            e: EXPERIMENT_E,
            alpha_factor: DEFAULT_DETECT_ALPHA_FACTOR,
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    /// The full grid of node counts.
    pub fn full_grid(mut self) -> Self {
        self.node_counts = vec![500, 1000, 2000, 3000, 4000, 5000, 10_000];
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.node_counts.is_empty() || self.degrees.is_empty() || self.algorithms.is_empty() {
            return bad("node_counts, degrees and algorithms must be nonempty");
        }
        if self.seeds_per_topology == 0 {
            return bad("seeds_per_topology must be positive");
        }
        if !(self.budget_secs > 0.0) {
            return bad("budget_secs must be positive");
        }
        if self.algorithms.contains(&Algorithm::KkMs) && self.k_percent.is_empty() {
            return bad("k_percent must be nonempty when kk-ms is selected");
        }
        if self.workers == 0 {
            return bad("workers must be positive");
        }
        Ok(())
    }

    /// Algorithm variants run on each topology: kk-ms once per k share.
    pub fn variants(&self) -> Vec<(String, Algorithm, f64)> {
        let mut out = Vec::new();
        for &a in &self.algorithms {
            if a == Algorithm::KkMs {
                for &k in &self.k_percent {
                    out.push((format!("kk-ms-{k}"), a, k));
                }
            } else {
                out.push((a.name().to_string(), a, 5.0));
            }
        }
        out
    }

    fn budget(&self) -> Budget {
        let b = Budget::secs(self.budget_secs);
        match self.max_iterations {
            Some(m) => b.iterations(m),
            None => b,
        }
    }
}

/// A topology with its identifier and the seed its runs derive from.
#[derive(Clone, Debug)]
pub struct NamedTopology {
    pub id: String,
    pub seed: u64,
    pub topology: Topology,
}

/// Generates one topology per (node count, degree) pair.
pub fn generate_grid(config: &ExperimentConfig) -> kkboundary::Result<Vec<NamedTopology>> {
    let mut out = Vec::new();
    for &n in &config.node_counts {
        for &d in &config.degrees {
            let seed = derive(config.master_seed, out.len() as u64);
            let mut g = GenConfig::new(n, seed);
            g.target_degree = Some(d);
            g.e = config.e;
            out.push(NamedTopology {
                id: format!("n{n}-d{d}"),
                seed,
                topology: generate_topology(&g)?,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub topo_id: String,
    pub algo: String,
    pub seed: u64,
    pub elapsed_ms: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub trace_path: Option<PathBuf>,
    pub error: Option<String>,
}

impl Row {
    fn key(&self) -> (&str, &str, u64) {
        (&self.topo_id, &self.algo, self.seed)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SCORE_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.3},{},{},{},{},{},{}",
                r.topo_id, r.algo, r.seed, r.elapsed_ms, r.sensitivity, r.specificity, r.tp, r.fp, r.tn, r.fn_
            );
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    /// Mean sensitivity and specificity of the successful rows of `algo`.
    pub fn mean_scores(&self, algo: &str) -> Option<(f64, f64)> {
        let rows: Vec<&Row> = self
            .rows
            .iter()
            .filter(|r| r.algo == algo && r.error.is_none())
            .collect();
        if rows.is_empty() {
            return None;
        }
        let k = rows.len() as f64;
        Some((
            rows.iter().map(|r| r.sensitivity).sum::<f64>() / k,
            rows.iter().map(|r| r.specificity).sum::<f64>() / k,
        ))
    }
}

/// Seed of the `index`-th run on a topology; the same for every algorithm.
pub fn run_seed(topology_seed: u64, index: usize) -> u64 {
    derive(topology_seed, 0x5eed_0000 + index as u64)
}

/// Runs, detects and scores one job.
pub fn run_one(
    t: &NamedTopology,
    label: &str,
    algo: Algorithm,
    settings: &RunSettings,
    alpha_factor: f64,
    trace_dir: Option<&Path>,
) -> Row {
    let mut row = Row {
        topo_id: t.id.clone(),
        algo: label.to_string(),
        seed: settings.seed,
        elapsed_ms: f64::NAN,
        sensitivity: f64::NAN,
        specificity: f64::NAN,
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
        trace_path: None,
        error: None,
    };
    let result = (|| -> Result<(), String> {
        let truth = t
            .topology
            .boundary_truth()
            .map(|f| BoundaryLabeling::new(f.to_vec()))
            .ok_or("topology has no ground-truth boundary")?;
        let (layout, trace) =
            run_algorithm(&t.topology, algo, settings, &mut NoHook).map_err(|e| e.to_string())?;
        let pred = detect_boundary(&layout, &t.topology, alpha_factor);
        let s = score(&pred, &truth).map_err(|e| e.to_string())?;
        row.elapsed_ms = trace.elapsed_ms();
        row.sensitivity = s.sensitivity;
        row.specificity = s.specificity;
        row.tp = s.counts.tp;
        row.fp = s.counts.fp;
        row.tn = s.counts.tn;
        row.fn_ = s.counts.fn_;
        if let Some(dir) = trace_dir {
            let p = dir.join(format!("{}_{}_{}.csv", t.id, label, settings.seed));
            trace.write_csv(&p).map_err(|e| e.to_string())?;
            row.trace_path = Some(p);
        }
        Ok(())
    })();
    row.error = result.err();
    row
}

/// Runs every (topology, variant, seed) job on `config.workers` threads.
/// Rows come back sorted by key, whatever the schedule.
pub fn run_on(
    topologies: &[NamedTopology],
    config: &ExperimentConfig,
    trace_dir: Option<&Path>,
) -> ResultTable {
    let variants = config.variants();
    let mut jobs = Vec::new();
    for t in topologies {
        for (label, algo, k) in &variants {
            for i in 0..config.seeds_per_topology {
                jobs.push((t, label.as_str(), *algo, *k, run_seed(t.seed, i)));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|s| {
        for _ in 0..config.workers.min(jobs.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(t, label, algo, k, seed)) = jobs.get(i) else {
                    break;
                };
                let settings = RunSettings {
                    budget: config.budget(),
                    seed,
                    k_percent: k,
                    ..RunSettings::default()
                };
                let row = run_one(t, label, algo, &settings, config.alpha_factor, trace_dir);
                rows.lock().expect("row lock").push(row);
            });
        }
    });
    let mut rows = rows.into_inner().expect("row lock");
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    ResultTable { rows }
}

/// Generates the grid, runs it and writes `scores.csv` plus one trace per
/// run under `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<ResultTable> {
    config.validate()?;
    let topologies = generate_grid(config)?;
    let trace_dir = config.output_dir.join("traces");
    fs::create_dir_all(&trace_dir)?;
    let table = run_on(&topologies, config, Some(&trace_dir));
    fs::write(config.output_dir.join("scores.csv"), table.to_csv())?;
    let mut failures = String::from("topo_id,algo,seed,error\n");
    for r in table.failures() {
        let _ = writeln!(
            failures,
            "{},{},{},{:?}",
            r.topo_id,
            r.algo,
            r.seed,
            r.error.as_deref().unwrap_or("")
        );
    }
    fs::write(config.output_dir.join("failures.csv"), failures)?;
    Ok(table)
}
