//! Subcommands behind the `dribble` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dribble::ball_dynamics::{classify_stability, eigenvalues};
use dribble::report::{aggregate, run_batch, BatchReport, RunSummary};
use dribble::sim::{filter_bench, run_scenario, BenchReport, BenchSource, ControllerKind, ScenarioConfig};

pub const SEED_OVERRIDE: &str = "SEED_OVERRIDE";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] dribble::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input, 1 for anything that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Sim(dribble::Error::Config { .. }) | Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "dribble", version, about = "Planar ball-dribbling simulator and evaluation tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario, write trajectory.csv and metrics.json.
    Simulate(Common),
    /// Run seeds 0..n, write batch_report.json and runs.csv.
    Batch {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        seeds: u64,
    },
    /// Score raw measurement slots against the fused filter estimate.
    FilterBench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = Source::ModelNoise)]
        source: Source,
    },
    /// Classify a drag coefficient.
    Stability {
        #[arg(allow_negative_numbers = true)]
        c_d: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML scenario file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config's controller. A batch without it runs both.
    #[arg(long, value_enum)]
    pub controller: Option<Controller>,
    /// Fixed drag coefficient; also switches off terrain randomization.
    #[arg(long, allow_negative_numbers = true)]
    pub drag: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Controller {
    Feedback,
    Naive,
}

impl From<Controller> for ControllerKind {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Feedback => ControllerKind::FeedbackGuided,
            Controller::Naive => ControllerKind::NaivePursuit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    ModelNoise,
    Cameras,
}

impl From<Source> for BenchSource {
    fn from(s: Source) -> Self {
        match s {
            Source::ModelNoise => BenchSource::ModelNoise,
            Source::Cameras => BenchSource::Cameras,
        }
    }
}

/// Value of `SEED_OVERRIDE` as passed in, `None` when unset.
pub fn seed_override(raw: Option<String>) -> Result<Option<u64>> {
    raw.map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_OVERRIDE} must be an unsigned integer, got `{s}`"))))
        .transpose()
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_toml(&read(path)?)?,
            None => ScenarioConfig::default(),
        };
        if let Some(c) = self.controller {
            cfg.controller = c.into();
        }
        if let Some(d) = self.drag {
            cfg.terrain.drag_coefficient = d;
            cfg.randomization.terrain = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write(path, text.as_bytes())
}

/// One-line stability verdict.
pub fn stability_line(c_d: f64) -> Result<String> {
    if !c_d.is_finite() {
        return Err(CliError::Usage(format!("drag coefficient must be finite, got {c_d}")));
    }
    // adding zero turns -0 into 0
    let [a, b] = eigenvalues(c_d).map(|e| e + 0.0);
    Ok(format!("{}, eigenvalues {a}, {b}", classify_stability(c_d)))
}

pub fn simulate(common: &Common, seed: Option<u64>) -> Result<String> {
    let mut cfg = common.load()?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = run_scenario(&cfg)?;
    let mut csv = Vec::new();
    out.record.write_csv(&mut csv).map_err(|source| CliError::Io { path: "trajectory.csv".into(), source })?;
    write(&common.out.join("trajectory.csv"), &csv)?;
    write_json(&common.out.join("metrics.json"), &out.metrics)?;
    let m = out.metrics;
    Ok(format!("seed {} ate {:.4} success {} max_ball_dist {:.3}", m.seed, m.ate, m.success, m.max_ball_dist))
}

pub fn batch(common: &Common, seeds: u64, seed: Option<u64>) -> Result<(BatchReport, String)> {
    if seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let cfg = common.load()?;
    let kinds: Vec<ControllerKind> = match common.controller {
        Some(c) => vec![c.into()],
        None => vec![ControllerKind::FeedbackGuided, ControllerKind::NaivePursuit],
    };
    let range: Vec<u64> = match seed {
        Some(s) => vec![s],
        None => (0..seeds).collect(),
    };
    let mut runs: Vec<RunSummary> = Vec::new();
    for kind in kinds {
        runs.extend(run_batch(&ScenarioConfig { controller: kind, ..cfg.clone() }, range.iter().copied())?);
    }
    let report = aggregate(&runs)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &runs {
        w.serialize(r).map_err(|e| CliError::Io { path: "runs.csv".into(), source: e.into() })?;
    }
    let index = w.into_inner().map_err(|e| CliError::Io { path: "runs.csv".into(), source: e.into_error() })?;
    write(&common.out.join("runs.csv"), &index)?;
    write_json(&common.out.join("batch_report.json"), &report)?;

    let mut lines = Vec::new();
    for c in &report.controllers {
        for b in &c.buckets {
            let rate = b.success_rate.map_or("-".into(), |r| format!("{r:.3}"));
            let ate = b.ate.map_or("-".into(), |q| format!("{:.4}", q.median));
            lines.push(format!("{:?} {:?}: runs {} success {rate} median ate {ate}", c.controller, b.bucket, b.runs));
        }
    }
    Ok((report, lines.join("\n")))
}

#[derive(Debug, Serialize)]
pub struct FilterBenchSummary {
    pub source: BenchSource,
    pub seeds: usize,
    /// Seeds where the fused RMSE beat every raw position slot.
    pub fused_wins: usize,
    pub win_rate: f64,
    pub max_trace_p: f64,
    pub runs: Vec<BenchReport>,
}

pub fn filter_bench_cmd(common: &Common, seeds: u64, source: Source, seed: Option<u64>) -> Result<FilterBenchSummary> {
    if seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let cfg = common.load()?;
    let range: Vec<u64> = match seed {
        Some(s) => vec![s],
        None => (0..seeds).collect(),
    };
    let runs = range
        .iter()
        .map(|&s| filter_bench(&ScenarioConfig { seed: s, ..cfg.clone() }, source.into()))
        .collect::<dribble::Result<Vec<_>>>()?;
    let fused_wins = runs.iter().filter(|r| r.best_slot_rmse().is_some_and(|b| r.fused_rmse < b)).count();
    let summary = FilterBenchSummary {
        source: source.into(),
        seeds: runs.len(),
        fused_wins,
        win_rate: fused_wins as f64 / runs.len() as f64,
        max_trace_p: runs.iter().map(|r| r.max_trace_p).fold(0.0, f64::max),
        runs,
    };
    write_json(&common.out.join("filter_bench.json"), &summary)?;
    Ok(summary)
}

/// Runs a parsed command line; returns what goes to stdout.
pub fn run(cli: Cli, seed: Option<u64>) -> Result<String> {
    match cli.command {
        Command::Simulate(common) => simulate(&common, seed),
        Command::Batch { common, seeds } => Ok(batch(&common, seeds, seed)?.1),
        Command::FilterBench { common, seeds, source } => {
            let s = filter_bench_cmd(&common, seeds, source, seed)?;
            let median_fused = {
                let mut v: Vec<f64> = s.runs.iter().map(|r| r.fused_rmse).collect();
                v.sort_by(f64::total_cmp);
                v[v.len() / 2]
            };
            Ok(format!(
                "fused beat every raw slot in {}/{} seeds; median fused rmse {median_fused:.5} m; max trace(P) {:.4}",
                s.fused_wins, s.seeds, s.max_trace_p
            ))
        }
        Command::Stability { c_d } => stability_line(c_d),
    }
}
