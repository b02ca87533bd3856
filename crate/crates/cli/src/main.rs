use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use holograph::network::SkipChannel;
use holograph::training::{EpochMetrics, GradCheckConfig};
use holograph_cli::commands::{
    cmd_ablate, cmd_eval, cmd_explore, cmd_gradcheck, cmd_prep, cmd_synth, cmd_train, parse_setups, AblationAxis,
    CHECKPOINT_FILE,
};
use holograph_cli::{error_category, RunConfig};

#[derive(Parser)]
#[command(
    name = "holograph",
    version,
    about = "Diffractive optical graph classifier: preprocessing, training and sweeps"
)]
struct Cli {
    /// TOML run configuration; missing keys take the preset's values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base preset when no config file is given (cora_ml, citeseer, amazon_photo, synthetic).
    #[arg(long, global = true, default_value = "cora_ml")]
    preset: String,
    /// Overrides the run seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sum per-sample gradients in a fixed order so reruns are bit-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Overrides the epoch count.
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Print nothing but the final summary.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the per-node sample store (samples.json).
    Prep,
    /// Train and write checkpoint.hgr, metrics.csv, run.json and timing.json.
    Train,
    /// Evaluate a checkpoint on the test split and write confusion.csv.
    Eval {
        /// Defaults to checkpoint.hgr in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Compare skip setups, e.g. `--setups none,1,2`.
    Explore {
        #[arg(long, default_value = "none,1,2,3,4,5,6")]
        setups: String,
    },
    /// Sweep k, d, or the score-on-phase flag.
    Ablate {
        #[arg(long)]
        axis: String,
        /// Comma-separated values replacing the default sweep.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
    },
    /// Compare analytic gradients with central finite differences on a small net.
    Gradcheck {
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        /// Skip channels such as `0-2`; `none` for a plain chain.
        #[arg(long, default_value = "0-2")]
        skips: String,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Start from all-zero phase masks.
        #[arg(long)]
        zero_masks: bool,
    },
    /// Write the synthetic two-clique dataset and a matching config.toml.
    Synth,
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let base = RunConfig::preset(&cli.preset)?;
            let overlay: toml::Table =
                toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
            let mut merged: toml::Table = toml::from_str(&base.dump())?;
            merged.extend(overlay);
            RunConfig::parse(&toml::to_string(&merged)?)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => RunConfig::preset(&cli.preset)?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(epochs) = cli.epochs {
        cfg.epochs = epochs;
    }
    if cli.deterministic {
        cfg.deterministic = true;
    }
    Ok(cfg)
}

fn progress(quiet: bool) -> impl FnMut(&str, &EpochMetrics) {
    move |label: &str, m: &EpochMetrics| {
        if !quiet {
            eprintln!(
                "[{label}] epoch {:>4}  loss {:.6}  train {:.4}  test {:.4}",
                m.epoch, m.train_loss, m.train_acc, m.test_acc
            );
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Synth => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("data/synthetic"));
            let config = cmd_synth(&out, cli.seed.unwrap_or(0))?;
            println!(
                "wrote synthetic dataset to {} (config: {})",
                out.display(),
                config.display()
            );
        }
        Command::Gradcheck {
            grid,
            layers,
            skips,
            classes,
            samples,
            zero_masks,
        } => {
            let skips: Vec<SkipChannel> = skips.parse::<holograph::network::SkipSetup>()?.channels()?;
            let check = GradCheckConfig {
                grid: holograph::field::GridSpec {
                    n: *grid,
                    ..GradCheckConfig::default().grid
                },
                layers: *layers,
                skips,
                classes: *classes,
                samples: *samples,
                zero_masks: *zero_masks,
                seed: cli.seed.unwrap_or(0),
                ..GradCheckConfig::default()
            };
            let report = cmd_gradcheck(&check, cli.out.as_deref())?;
            println!(
                "gradcheck: {} parameters, max rel err {:.3e}, median {:.3e} (floor {:.1e})",
                report.entries.len(),
                report.max_rel_err,
                report.median_rel_err,
                report.floor
            );
            anyhow::ensure!(
                report.max_rel_err <= 1e-5,
                "gradient check failed: max relative error above 1e-5"
            );
        }
        command => {
            let cfg = run_config(&cli)?;
            let mut log = progress(cli.quiet);
            match command {
                Command::Prep => {
                    let store = cmd_prep(&cfg)?;
                    println!(
                        "prepared {} samples ({} train / {} test), {} classes -> {}",
                        store.samples.len(),
                        store.train.len(),
                        store.test.len(),
                        store.num_classes(),
                        cfg.out_dir.display()
                    );
                }
                Command::Train => {
                    let report = cmd_train(&cfg, |m| log("train", m))?;
                    let s = &report.summary;
                    println!(
                        "final test acc {:.4}, best {:.4} at epoch {} ({:.1} s) -> {}",
                        s.final_test_acc,
                        s.best_test_acc,
                        s.best_epoch,
                        report.elapsed_seconds,
                        cfg.out_dir.display()
                    );
                }
                Command::Eval { checkpoint } => {
                    let path = checkpoint.clone().unwrap_or_else(|| cfg.out_dir.join(CHECKPOINT_FILE));
                    let report = cmd_eval(&cfg, &path)?;
                    println!("test accuracy {:.4} on {} nodes", report.accuracy, report.test_nodes);
                }
                Command::Explore { setups } => {
                    let sweep = cmd_explore(&cfg, &parse_setups(setups)?, log)?;
                    for s in &sweep.summaries {
                        println!(
                            "{:>10}: final {:.4}, best {:.4} at epoch {}",
                            s.label, s.final_test_acc, s.best_test_acc, s.best_epoch
                        );
                    }
                }
                Command::Ablate { axis, values } => {
                    let axis: AblationAxis = axis.parse()?;
                    let sweep = cmd_ablate(&cfg, axis, values.as_deref(), log)?;
                    for s in &sweep.summaries {
                        println!(
                            "{:>10}: final {:.4}, best {:.4} at epoch {}",
                            s.label, s.final_test_acc, s.best_test_acc, s.best_epoch
                        );
                    }
                }
                Command::Synth | Command::Gradcheck { .. } => unreachable!(),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (category, code) = error_category(&err);
            eprintln!("holograph: {category}: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
