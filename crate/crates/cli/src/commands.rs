//! The subcommands, as library functions returning their results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use holograph::graphprep::PrepParams;
use holograph::network::{load_checkpoint, save_checkpoint, Network, NetworkConfig, SkipSetup};
use holograph::training::{
    evaluate, fit, grad_check, init_masks, metrics_csv, EpochMetrics, FitOutcome, GradCheckConfig, GradCheckReport,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::{
    build_store, build_store_from, load_graph, load_or_build_store, store_path, write_store, DatasetSummary,
    EncodedSamples, SampleStore,
};
use crate::output::{confusion_csv, trajectory_csv, write_atomic, write_json};
use crate::synth::{self, SynthSpec};

pub const CHECKPOINT_FILE: &str = "checkpoint.hgr";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";

/// Final and best test accuracy of one training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub epochs: usize,
    pub final_test_acc: f64,
    pub best_test_acc: f64,
    pub best_epoch: usize,
}

impl RunSummary {
    pub fn of(label: impl Into<String>, history: &[EpochMetrics]) -> Self {
        let mut best = (f64::NAN, 0);
        for m in history {
            if best.0.is_nan() || m.test_acc > best.0 {
                best = (m.test_acc, m.epoch);
            }
        }
        RunSummary {
            label: label.into(),
            epochs: history.len(),
            final_test_acc: history.last().map_or(f64::NAN, |m| m.test_acc),
            best_test_acc: best.0,
            best_epoch: best.1,
        }
    }
}

fn summary_csv(runs: &[RunSummary]) -> String {
    let mut out = String::from("run,epochs,final_test_acc,best_test_acc,best_epoch\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.label, r.epochs, r.final_test_acc, r.best_test_acc, r.best_epoch
        );
    }
    out
}

/// Untrained network for `cfg` with seeded random masks.
pub fn network_config(cfg: &RunConfig, classes: usize) -> Result<NetworkConfig> {
    let grid = cfg.grid()?;
    let masks = init_masks(grid, cfg.num_layers, cfg.seed);
    let mut net = NetworkConfig::new(grid, masks, cfg.skips()?, cfg.detector(classes)?)?;
    net.feature_layers = cfg.feature_layers;
    net.padding = cfg.padding;
    net.validate()?;
    Ok(net)
}

/// Trains a fresh network on a prepared store.
pub fn train_on(cfg: &RunConfig, store: &SampleStore, on_epoch: impl FnMut(&EpochMetrics)) -> Result<FitOutcome> {
    let data = EncodedSamples {
        samples: &store.samples,
        grid: cfg.grid()?,
        score_on_phase: cfg.encode_score_on_phase,
    };
    let net = network_config(cfg, store.num_classes())?;
    Ok(fit(
        net,
        &data,
        &store.train,
        &store.test,
        cfg.hyper(),
        cfg.seed,
        on_epoch,
    )?)
}

/// Preprocesses the dataset and writes `samples.json` to the output
/// directory.
pub fn cmd_prep(cfg: &RunConfig) -> Result<SampleStore> {
    cfg.validate()?;
    let store = build_store(cfg)?;
    write_store(&store_path(cfg), &store)?;
    Ok(store)
}

#[derive(Debug, Clone, Serialize)]
struct RunRecord<'a> {
    config: &'a RunConfig,
    dataset: DatasetSummary,
    train_nodes: usize,
    test_nodes: usize,
    summary: &'a RunSummary,
}

#[derive(Debug, Clone, Serialize)]
struct Timing {
    elapsed_seconds: f64,
    seconds_per_epoch: f64,
    threads: usize,
    grid: usize,
    pitch: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub outcome: FitOutcome,
    pub summary: RunSummary,
    pub elapsed_seconds: f64,
}

/// Trains with `cfg` and writes `checkpoint.hgr`, `metrics.csv`, `run.json`
/// and `timing.json`. Every file but `timing.json` is a deterministic
/// function of the inputs when `deterministic` is set.
pub fn cmd_train(cfg: &RunConfig, on_epoch: impl FnMut(&EpochMetrics)) -> Result<TrainReport> {
    cfg.validate()?;
    let started = Instant::now();
    let store = load_or_build_store(cfg)?;
    let outcome = train_on(cfg, &store, on_epoch)?;
    let elapsed = started.elapsed().as_secs_f64();
    let summary = RunSummary::of("train", &outcome.history);

    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    save_checkpoint(
        &outcome.config,
        Some(&outcome.state.moments),
        &cfg.out_dir.join(CHECKPOINT_FILE),
    )?;
    write_atomic(
        &cfg.out_dir.join(METRICS_FILE),
        metrics_csv(&outcome.history).as_bytes(),
    )?;
    write_json(
        &cfg.out_dir.join("run.json"),
        &RunRecord {
            config: cfg,
            dataset: store.dataset,
            train_nodes: store.train.len(),
            test_nodes: store.test.len(),
            summary: &summary,
        },
    )?;
    write_json(
        &cfg.out_dir.join("timing.json"),
        &Timing {
            elapsed_seconds: elapsed,
            seconds_per_epoch: elapsed / cfg.epochs as f64,
            threads: rayon_threads(),
            grid: cfg.n,
            pitch: cfg.pitch,
        },
    )?;
    Ok(TrainReport {
        outcome,
        summary,
        elapsed_seconds: elapsed,
    })
}

fn rayon_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub test_nodes: usize,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Evaluates a checkpoint on the test split and writes `confusion.csv` and
/// `eval.json`.
pub fn cmd_eval(cfg: &RunConfig, checkpoint: &Path) -> Result<EvalReport> {
    cfg.validate()?;
    let ckpt = load_checkpoint(checkpoint).with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let store = load_or_build_store(cfg)?;
    ensure!(!store.test.is_empty(), "the test set is empty; set test_size > 0");
    let mut net_cfg = ckpt.config;
    ensure!(
        net_cfg.grid.n == cfg.n,
        "checkpoint grid is {0}x{0} but the config asks for {1}x{1}",
        net_cfg.grid.n,
        cfg.n
    );
    let classes = net_cfg.num_classes();
    ensure!(
        classes == store.num_classes(),
        "checkpoint has {classes} detector regions but the dataset has {} classes",
        store.num_classes()
    );
    net_cfg.padding = cfg.padding;
    let data = EncodedSamples {
        samples: &store.samples,
        grid: net_cfg.grid,
        score_on_phase: cfg.encode_score_on_phase,
    };
    let net = Network::new(net_cfg)?;
    let (accuracy, preds) = evaluate(&net, &data, &store.test)?;
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&node, &p) in store.test.iter().zip(&preds) {
        confusion[store.samples[node].label][p] += 1;
    }
    let report = EvalReport {
        accuracy,
        test_nodes: store.test.len(),
        confusion,
    };
    write_atomic(
        &cfg.out_dir.join(CONFUSION_FILE),
        confusion_csv(&report.confusion).as_bytes(),
    )?;
    write_json(&cfg.out_dir.join("eval.json"), &report)?;
    Ok(report)
}

/// Parses a comma-separated list of skip setups such as `none,2,6`.
pub fn parse_setups(list: &str) -> Result<Vec<SkipSetup>> {
    list.split(',').map(|t| Ok(SkipSetup::from_str(t.trim())?)).collect()
}

/// Per-epoch test accuracy of each run, one column per label.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub labels: Vec<String>,
    pub histories: Vec<Vec<EpochMetrics>>,
    pub summaries: Vec<RunSummary>,
}

impl Sweep {
    fn new() -> Self {
        Sweep {
            labels: Vec::new(),
            histories: Vec::new(),
            summaries: Vec::new(),
        }
    }

    fn push(&mut self, label: String, history: Vec<EpochMetrics>) {
        self.summaries.push(RunSummary::of(label.clone(), &history));
        self.labels.push(label);
        self.histories.push(history);
    }

    fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let columns: Vec<Vec<f64>> = self
            .histories
            .iter()
            .map(|h| h.iter().map(|m| m.test_acc).collect())
            .collect();
        write_atomic(
            &dir.join(format!("{stem}.csv")),
            trajectory_csv(&self.labels, &columns).as_bytes(),
        )?;
        write_atomic(
            &dir.join(format!("{stem}_summary.csv")),
            summary_csv(&self.summaries).as_bytes(),
        )
    }
}

/// Trains one network per skip setup on a shared sample store and writes
/// `explore.csv` (test accuracy per epoch) and `explore_summary.csv`.
pub fn cmd_explore(
    cfg: &RunConfig,
    setups: &[SkipSetup],
    mut progress: impl FnMut(&str, &EpochMetrics),
) -> Result<Sweep> {
    ensure!(!setups.is_empty(), "no skip setups requested");
    let runs: Vec<RunConfig> = setups
        .iter()
        .map(|s| {
            let run = RunConfig {
                skip_setup: s.clone(),
                ..cfg.clone()
            };
            run.validate().map(|_| run)
        })
        .collect::<Result<_>>()?;
    let store = load_or_build_store(cfg)?;
    let mut sweep = Sweep::new();
    for run in &runs {
        let label = run.skip_setup.label();
        let outcome = train_on(run, &store, |m| progress(&label, m))?;
        sweep.push(label, outcome.history);
    }
    sweep.write(&cfg.out_dir, "explore")?;
    Ok(sweep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationAxis {
    K,
    D,
    Score,
}

impl FromStr for AblationAxis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(AblationAxis::K),
            "d" => Ok(AblationAxis::D),
            "score" => Ok(AblationAxis::Score),
            other => bail!("unknown ablation axis '{other}'; expected k, d or score"),
        }
    }
}

impl AblationAxis {
    pub fn name(self) -> &'static str {
        match self {
            AblationAxis::K => "k",
            AblationAxis::D => "d",
            AblationAxis::Score => "score",
        }
    }

    pub fn default_values(self) -> Vec<usize> {
        match self {
            AblationAxis::K => vec![3, 5, 10, 20, 50, 100],
            AblationAxis::D => vec![40, 60, 80, 100, 120, 140],
            AblationAxis::Score => vec![0, 1],
        }
    }
}

/// Sweeps one preprocessing axis with everything else fixed and writes
/// `ablate_<axis>.csv` and `ablate_<axis>_summary.csv`.
pub fn cmd_ablate(
    cfg: &RunConfig,
    axis: AblationAxis,
    values: Option<&[usize]>,
    mut progress: impl FnMut(&str, &EpochMetrics),
) -> Result<Sweep> {
    let values = values.map_or_else(|| axis.default_values(), <[usize]>::to_vec);
    ensure!(!values.is_empty(), "no ablation values given");
    let runs: Vec<(String, RunConfig)> = values
        .iter()
        .map(|&v| {
            let (label, run) = match axis {
                AblationAxis::K => (format!("k={v}"), RunConfig { k: v, ..cfg.clone() }),
                AblationAxis::D => (format!("d={v}"), RunConfig { d: v, ..cfg.clone() }),
                AblationAxis::Score => {
                    let on = v != 0;
                    let label = if on { "score_on" } else { "score_off" };
                    (
                        label.to_string(),
                        RunConfig {
                            encode_score_on_phase: on,
                            ..cfg.clone()
                        },
                    )
                }
            };
            run.validate().with_context(|| format!("ablation run {label}"))?;
            Ok((label, run))
        })
        .collect::<Result<_>>()?;
    let graph = load_graph(cfg)?;
    let mut shared: Option<(PrepParams, SampleStore)> = None;
    let mut sweep = Sweep::new();
    for (label, run) in &runs {
        let params = run.prep_params();
        if shared.as_ref().is_none_or(|(p, _)| *p != params) {
            shared = Some((params.clone(), build_store_from(&graph, run, &params)?));
        }
        let store = &shared.as_ref().expect("store was just built").1;
        let outcome = train_on(run, store, |m| progress(label, m))?;
        sweep.push(label.clone(), outcome.history);
    }
    sweep.write(&cfg.out_dir, &format!("ablate_{}", axis.name()))?;
    Ok(sweep)
}

/// Runs the finite-difference gradient check and, if `out_dir` is given,
/// writes `gradcheck.csv` there.
pub fn cmd_gradcheck(check: &GradCheckConfig, out_dir: Option<&Path>) -> Result<GradCheckReport> {
    let report = grad_check(check)?;
    if let Some(dir) = out_dir {
        let mut csv = String::from("layer,pixel,analytic,numeric,rel_err\n");
        for e in &report.entries {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                e.layer, e.pixel, e.analytic, e.numeric, e.rel_err
            );
        }
        write_atomic(&dir.join("gradcheck.csv"), csv.as_bytes())?;
    }
    Ok(report)
}

/// Writes the synthetic two-clique dataset to `out_dir` together with a
/// `config.toml` that trains on it.
pub fn cmd_synth(out_dir: &Path, seed: u64) -> Result<PathBuf> {
    let files = synth::generate(&SynthSpec::default(), seed);
    synth::write(out_dir, &files)?;
    let cfg = RunConfig {
        dataset: out_dir.to_path_buf(),
        out_dir: out_dir.join("run"),
        seed,
        ..RunConfig::preset("synthetic")?
    };
    let path = out_dir.join("config.toml");
    write_atomic(&path, cfg.dump().as_bytes())?;
    Ok(path)
}
