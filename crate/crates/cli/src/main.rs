use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pseudolabel_cli::ablate::{format_table, run_ablation, Grid};
use pseudolabel_cli::batch::{run_generate, Dataset, OutputOptions};
use pseudolabel_cli::config::{Method, RunConfig};
use pseudolabel_cli::corpus::{generate_corpus, write_corpus, CorpusSpec};
use pseudolabel_cli::evaluate::{evaluate_dirs, read_masks, Mode};

/// Pseudo segmentation labels for quadrilateral-annotated text.
#[derive(Parser)]
#[command(name = "pseudolabel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic corpus with per-instance ground-truth masks.
    Synth {
        /// Output directory; masks go to `<out>/gt`.
        #[arg(long)]
        out: PathBuf,
        /// Corpus spec (TOML); defaults apply to missing keys.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        images: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write one image-resolution mask per legible instance plus a report.
    Generate {
        #[arg(long, value_enum)]
        method: Method,
        /// Directory of images and annotation files.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run config (TOML key-value); defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `workers` from the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write masks tinted over the source image.
        #[arg(long)]
        overlays: bool,
        /// Also write the averaged saliency of each crop.
        #[arg(long)]
        spm: bool,
    },
    /// Score predictions against ground truth.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_enum, default_value = "pixel")]
        mode: Mode,
        /// Report path; defaults to `<pred>/metrics_<mode>.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep samples × models × steps and tabulate mean pixel F1.
    Ablate {
        /// Grid file with `samples`, `models` and `steps` lists.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Ground-truth mask directory; defaults to `<data>/gt`.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// JSON table path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default run config.
    Defaults,
}

fn load_config(path: Option<&Path>, workers: Option<usize>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    fs::write(path, body + "\n").with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { out, spec, images, seed } => {
            let mut s = match spec {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => CorpusSpec::default(),
            };
            if let Some(n) = images {
                s.images = n;
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let corpus = generate_corpus(&s)?;
            write_corpus(&out, &corpus, &s)?;
            println!("{} images, {} instances -> {}", corpus.images.len(), corpus.instances.len(), out.display());
        }
        Command::Generate {
            method,
            data,
            out,
            config,
            workers,
            overlays,
            spm,
        } => {
            let cfg = load_config(config.as_deref(), workers)?;
            let dataset = Dataset::load(&data)?;
            let report = run_generate(&dataset, &out, method, &cfg, OutputOptions { overlays, spm })?;
            println!(
                "{}: {} masks, {} flagged, {} illegible skipped -> {}",
                method.name(),
                report.instances.len(),
                report.flagged,
                report.skipped_illegible,
                out.display()
            );
        }
        Command::Evaluate { pred, gt, mode, report } => {
            let r = evaluate_dirs(&pred, &gt, mode)?;
            let name = match mode {
                Mode::Pixel => "metrics_pixel.json",
                Mode::Detect => "metrics_detect.json",
            };
            let path = report.unwrap_or_else(|| pred.join(name));
            write_json(&path, &r)?;
            let a = &r.aggregate;
            println!(
                "{} records: mean P {:.4} R {:.4} F1 {:.4}; pooled P {:.4} R {:.4} F1 {:.4}",
                a.count, a.mean_precision, a.mean_recall, a.mean_f1, a.pooled.precision, a.pooled.recall, a.pooled.f1
            );
        }
        Command::Ablate {
            grid,
            data,
            gt,
            config,
            workers,
            out,
        } => {
            let g = Grid::load(&grid)?;
            let cfg = load_config(config.as_deref(), workers)?;
            let dataset = Dataset::load(&data)?;
            let gt_dir = gt.unwrap_or_else(|| data.join("gt"));
            let masks = read_masks(&gt_dir)?;
            let cells = run_ablation(&dataset, &masks, &g, &cfg)?;
            print!("{}", format_table(&cells));
            if let Some(p) = out {
                write_json(&p, &cells)?;
            }
        }
        Command::Defaults => print!("{}", RunConfig::default().to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
