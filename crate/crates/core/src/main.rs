use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use ecoscope::config::{ConfigFile, RunConfig};
use ecoscope::inference;
use ecoscope::memory::{export_object_features, ObjectMemory};
use ecoscope::metrics::{self, EvalMode};
use ecoscope::scene::io::{generate_dataset, DatasetFamily, GenerateOptions};
use ecoscope::segment::{felzenszwalb_segment, SegmentationParams};
use ecoscope::ImageGrid;

#[derive(Parser)]
#[command(
    name = "ecoscope",
    version,
    about = "Graph-based multi-part object discovery on synthetic scenes"
)]
struct Cli {
    /// TOML configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker thread cap (also via ECOSCOPE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with ground-truth masks.
    Generate {
        /// tetromino | multipart | occluded | ood
        #[arg(long)]
        family: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Visibility floor for the occluded family.
        #[arg(long)]
        min_visibility: Option<f64>,
        /// Fixed texture id (0..15) for the ood family; sampled per scene
        /// when omitted.
        #[arg(long)]
        texture: Option<u8>,
        #[arg(long)]
        num_objects: Option<usize>,
    },
    /// Segment one image and write the part labeling as a 16-bit index PNG.
    Segment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        min_size: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train: run co-part discovery over dataset batches and save the
    /// resulting object memory.
    Discover {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-batch cluster dumps and counters as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Discover objects in every dataset image using a trained memory.
    Infer {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also keep amodal completions (always written; flag kept for
        /// script compatibility).
        #[arg(long, default_value_t = false)]
        amodal: bool,
    },
    /// Score predictions against ground truth and write a report.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// modal | amodal
        #[arg(long, default_value = "modal")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export per-object feature rows for external regression tooling.
    ExportFeatures {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print memory entries sorted by occurrence count.
    InspectMemory {
        #[arg(long)]
        memory: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_millis()
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli_config: &Option<PathBuf>) -> anyhow::Result<RunConfig> {
    match cli_config {
        Some(path) => Ok(ConfigFile::load(path)
            .with_context(|| format!("loading config {}", path.display()))?
            .resolve()),
        None => Ok(RunConfig::default()),
    }
}

fn init_threads(flag: Option<usize>, config: &RunConfig) {
    let threads = flag
        .or_else(|| {
            std::env::var("ECOSCOPE_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .or(config.threads);
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            log::warn!("thread pool already initialized: {e}");
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = load_config(&cli.config)?;
    init_threads(cli.threads, &config);

    match cli.command {
        Command::Generate {
            family,
            count,
            seed,
            out,
            min_visibility,
            texture,
            num_objects,
        } => {
            let family = DatasetFamily::parse(&family)?;
            let opts = GenerateOptions {
                num_objects,
                min_visibility,
                texture,
                ..Default::default()
            };
            let manifest = generate_dataset(family, count, seed, &out, &opts)?;
            log::info!(
                "stage=generate family={} count={} out={}",
                family.name(),
                manifest.samples.len(),
                out.display()
            );
        }
        Command::Segment {
            input,
            tau,
            min_size,
            sigma,
            out,
        } => {
            let params = SegmentationParams {
                threshold: tau.unwrap_or(config.segmentation.threshold),
                min_size: min_size.unwrap_or(config.segmentation.min_size),
                smoothing_sigma: sigma.unwrap_or(config.segmentation.smoothing_sigma),
            };
            let image = ImageGrid::load_png(&input)?;
            let labeling = felzenszwalb_segment(&image, &params);
            let buf: Vec<u16> = labeling
                .labels
                .iter()
                .map(|&l| u16::try_from(l).unwrap_or(u16::MAX))
                .collect();
            let img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(
                labeling.width,
                labeling.height,
                buf,
            )
            .expect("buffer matches dimensions");
            img.save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            log::info!(
                "stage=segment parts={} in={} out={}",
                labeling.num_parts,
                input.display(),
                out.display()
            );
        }
        Command::Discover {
            dataset,
            memory,
            batch_size,
            epsilon,
            seed,
            stats,
        } => {
            if let Some(b) = batch_size {
                config.batch_size = b;
            }
            if let Some(e) = epsilon {
                config.discovery.epsilon = e;
                config.descriptor.epsilon = e;
            }
            if let Some(s) = seed {
                config.discovery.rng_seed = s;
            }
            let options = config.train_options();
            let (mem, report) = inference::train_memory(&dataset, &options)?;
            mem.save(&memory)?;
            log::info!(
                "stage=discover batches={} clusters={} comparisons={} entries={} memory={}",
                report.batches.len(),
                report.clusters_integrated,
                report.total_comparisons,
                mem.entries.len(),
                memory.display()
            );
            if let Some(path) = stats {
                let json = serde_json::json!({
                    "version": 1,
                    "total_comparisons": report.total_comparisons,
                    "total_merges": report.total_merges,
                    "clusters_integrated": report.clusters_integrated,
                    "max_comparison_ratio": report.max_comparison_ratio,
                    "batches": report.batches,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&json)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Infer {
            dataset,
            memory,
            out,
            amodal: _,
        } => {
            let mem = ObjectMemory::load(&memory)?;
            let predictions = inference::infer_dataset(&dataset, &mem, &config.inference, Some(&out))?;
            let objects: usize = predictions.iter().map(|(_, p)| p.objects.len()).sum();
            log::info!(
                "stage=infer samples={} objects={} out={}",
                predictions.len(),
                objects,
                out.display()
            );
        }
        Command::Evaluate { pred, gt, mode, out } => {
            let mode = EvalMode::parse(&mode)?;
            let report = metrics::evaluate_dataset(&pred, &gt, mode)?;
            metrics::write_report(&report, &out)?;
            log::info!(
                "stage=evaluate samples={} mdice={:.2} miou={:.2} ari={} out={}",
                report.rows.len(),
                100.0 * report.mdice_mean,
                100.0 * report.miou_mean,
                report
                    .ari_mean
                    .map(|a| format!("{:.2}", 100.0 * a))
                    .unwrap_or_else(|| "-".into()),
                out.display()
            );
        }
        Command::ExportFeatures { dataset, memory, out } => {
            let mem = ObjectMemory::load(&memory)?;
            let rows = inference::export_features(&dataset, &mem, &config.inference)?;
            export_object_features(&rows, config.descriptor.k, &out)?;
            log::info!("stage=export-features rows={} out={}", rows.len(), out.display());
        }
        Command::InspectMemory { memory } => {
            use std::io::Write;
            let mem = ObjectMemory::load(&memory)?;
            // write through a handle so a closed pipe (e.g. `| head`) ends
            // the listing instead of panicking
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let mut emit = |line: String| -> bool { writeln!(out, "{line}").is_ok() };
            if !emit(format!(
                "memory: {} entries, {} total occurrences, finalized={}",
                mem.entries.len(),
                mem.total_occurrences(),
                mem.finalized
            )) {
                return Ok(());
            }
            for e in &mem.entries {
                if !emit(format!(
                    "entry {:>4}  count {:>6}  views {}  parts {}  mask_px {}",
                    e.entry_id,
                    e.occurrence_count,
                    e.views.len(),
                    e.templates.len(),
                    e.views.first().map(|v| v.mask_size).unwrap_or(0)
                )) {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}
