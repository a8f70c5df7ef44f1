//! Command-line surface binding the library into reproducible runs.
//!
//! Every command is driven by a run configuration file plus a master seed
//! (`--seed` overrides the file), and every random decision derives from
//! that seed — re-running a command reproduces its outputs byte for byte.
//! Outputs are written atomically, so an interrupted run never leaves a
//! half-written artifact behind.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use v3s_core::error::{Error, Result};
use v3s_core::evalkit::{accuracy, confusion_matrix, recall_at_k, topk_retrieval, FeatureVector};
use v3s_core::io::manifest::provenance_string;
use v3s_core::io::{
    atomic_write, child_rng, read_checkpoint, read_clip, read_corpus_manifest,
    read_dataset_manifest, write_checkpoint, write_clip, write_corpus_manifest,
    write_dataset_manifest, Checkpoint, CorpusRecord, DatasetRecord, RunConfig,
};
use v3s_core::pretext::{build_dataset, SourceVideo};
use v3s_core::probe::{
    finite_difference_check, pool_clip, train, PoolConfig, ProbeModel, TrainSample,
};
use v3s_core::synthgen::{random_scene, render};
use v3s_core::temporal::scale_indices_literal;
use v3s_core::warp::{
    apply_spatial, center_crop_rect, crop, preprocess, resize_bilinear, CropRect, HeadEnd,
};
use v3s_core::{SpatialSpec, TemporalSpec};

#[derive(Parser)]
#[command(
    name = "v3s",
    version,
    about = "Self-supervised video transformation pipeline",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scene corpus: clip files plus a corpus manifest
    Synth(SynthArgs),
    /// Apply one spatial and one temporal class to a clip (inspection path)
    Transform(TransformArgs),
    /// Build a labeled dataset from a corpus via random transformations
    MakeDataset(MakeDatasetArgs),
    /// Train the two-head probe on a dataset; write checkpoint and history
    TrainProbe(TrainProbeArgs),
    /// Compare analytic gradients against central finite differences
    Gradcheck(GradcheckArgs),
    /// Rank a gallery by feature similarity; report recall at fixed depths
    EvalRetrieval(EvalRetrievalArgs),
    /// Confusion matrices and per-head accuracy on a labeled dataset
    Report(ReportArgs),
}

/// Configuration and seeding shared by the generating commands.
#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file (defaults apply when omitted)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config file's value
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for clip files and corpus.tsv
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Source clip file
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Destination clip file
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
    /// Spatial class: identity, scale:A:B, or proj:C:SIDE
    #[arg(long, value_parser = parse_spatial)]
    spatial: SpatialSpec,
    /// Temporal class: speed:S[:L] or pattern:S1:S2[:L1:L2]
    #[arg(long, value_parser = parse_temporal)]
    temporal: TemporalSpec,
    /// First source frame of the sampling window
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Sample speed classes with stride s-1 instead of s
    #[arg(long)]
    stride_literal: bool,
}

#[derive(Args)]
struct MakeDatasetArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Corpus manifest written by `synth`
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    /// Directory for sample clips and dataset.tsv
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Number of samples to draw
    #[arg(long, default_value_t = 2000)]
    count: usize,
}

#[derive(Args)]
struct TrainProbeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Dataset manifest written by `make-dataset`
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Destination checkpoint file
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    /// Optional per-epoch history table (TSV)
    #[arg(long, value_name = "FILE")]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of random model/batch configurations to test
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args)]
struct EvalRetrievalArgs {
    /// Probe checkpoint providing the feature map
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    /// Dataset manifest of gallery clips (typically the training set)
    #[arg(long, value_name = "FILE")]
    gallery: PathBuf,
    /// Dataset manifest of query clips (held out from the gallery)
    #[arg(long, value_name = "FILE")]
    queries: PathBuf,
    /// Also write the table to a file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Probe checkpoint to evaluate
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    /// Labeled dataset manifest to score
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Also write the report to a file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn parse_spatial(s: &str) -> std::result::Result<SpatialSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_temporal(s: &str) -> std::result::Result<TemporalSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors; everything else is
            // a usage failure.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.category().exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Transform(args) => cmd_transform(args),
        Command::MakeDataset(args) => cmd_make_dataset(args),
        Command::TrainProbe(args) => cmd_train_probe(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::EvalRetrieval(args) => cmd_eval_retrieval(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = args.config.load()?;
    create_dir(&args.out_dir)?;
    let scene_cfg = cfg.scene_config();
    let mut records = Vec::with_capacity(cfg.n_videos);
    for i in 0..cfg.n_videos {
        let (scene_seed, mut rng) = child_rng(cfg.master_seed, "scene", i as u64);
        let scene = random_scene(&mut rng, &scene_cfg, scene_seed)?;
        let id = format!("v{i:04}");
        let file = format!("{id}.v3sc");
        write_clip(&args.out_dir.join(&file), &render(&scene)?)?;
        records.push(CorpusRecord { id, path: file, descriptor: scene.descriptor() });
    }
    write_corpus_manifest(&args.out_dir.join("corpus.tsv"), &records)?;
    atomic_write(&args.out_dir.join("run-config.txt"), cfg.to_string().as_bytes())?;
    println!(
        "wrote {} videos ({} frames of {}x{}) to {}",
        cfg.n_videos,
        cfg.video_frames,
        cfg.frame_size,
        cfg.frame_size,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let input = read_clip(&args.input)?;

    let literal = args.stride_literal || cfg.stride_literal;
    let indices = match (literal, args.temporal) {
        (true, TemporalSpec::Scale { s, l }) => scale_indices_literal(input.len(), s, args.start, l)?,
        _ => args.temporal.indices(input.len(), args.start)?,
    };
    let selected = input.select(&indices)?;

    let resized =
        selected.map_frames(|f| resize_bilinear(f, cfg.resize_to, cfg.resize_to))?;
    let (cw, ch) = args.spatial.canvas(cfg.resize_to, cfg.resize_to)?;
    let warped = apply_spatial(&resized, &args.spatial, cw, ch)?;

    // Same output window the dataset builder uses, with the one random
    // choice (crop placement) replaced by the center for inspectability.
    let out = match args.spatial {
        SpatialSpec::Projection { c, side } => {
            let len = ((c * cfg.resize_to as f64).round() as usize).max(1);
            let head = HeadEnd { len, side };
            let rect = CropRect::new(0, 0, cfg.crop_size, cfg.crop_size);
            warped.map_frames(|f| preprocess(f, cfg.resize_to, rect, Some(head)))?
        }
        _ => {
            let rect = center_crop_rect(cw, ch, cfg.crop_size, cfg.crop_size)?;
            warped.map_frames(|f| crop(f, rect))?
        }
    };
    write_clip(&args.output, &out)?;
    println!(
        "wrote {} frames of {}x{} to {}",
        out.len(),
        out.width(),
        out.height(),
        args.output.display()
    );
    Ok(())
}

fn cmd_make_dataset(args: MakeDatasetArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let catalog = cfg.catalog()?;
    let corpus = read_corpus_manifest(&args.corpus)?;
    let base = args.corpus.parent().unwrap_or(Path::new(""));
    let mut videos = Vec::with_capacity(corpus.len());
    for r in &corpus {
        videos.push(SourceVideo { id: r.id.clone(), video: read_clip(&base.join(&r.path))? });
    }

    let samples = build_dataset(
        &videos,
        args.count,
        |i| child_rng(cfg.master_seed, "sample", i),
        &catalog,
        &cfg.geometry(),
    )?;

    create_dir(&args.out_dir)?;
    let hash = catalog.hash();
    let mut records = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let id = format!("s{i:05}");
        let file = format!("{id}.v3sc");
        write_clip(&args.out_dir.join(&file), &s.clip)?;
        records.push(DatasetRecord {
            id,
            path: file,
            spatial_class: s.labels.spatial_class,
            temporal_class: s.labels.temporal_class,
            provenance: provenance_string(&s.provenance),
            catalog_hash: hash.clone(),
        });
    }
    write_dataset_manifest(&args.out_dir.join("dataset.tsv"), &records)?;
    atomic_write(&args.out_dir.join("run-config.txt"), cfg.to_string().as_bytes())?;
    println!(
        "wrote {} samples ({}x{} catalog, hash {}) to {}",
        samples.len(),
        catalog.n_spatial(),
        catalog.n_temporal(),
        &hash[..12],
        args.out_dir.display()
    );
    Ok(())
}

/// Pools every clip of a manifest into a training sample, checking class
/// ids against the head sizes before anything expensive runs.
fn load_samples(
    manifest_path: &Path,
    records: &[DatasetRecord],
    pool: &PoolConfig,
    n_spatial: usize,
    n_temporal: usize,
) -> Result<Vec<TrainSample>> {
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    let mut samples = Vec::with_capacity(records.len());
    for r in records {
        if r.spatial_class >= n_spatial || r.temporal_class >= n_temporal {
            return Err(Error::Manifest(format!(
                "sample {} has class ids ({}, {}) outside a {}x{} catalog",
                r.id, r.spatial_class, r.temporal_class, n_spatial, n_temporal
            )));
        }
        let clip = read_clip(&base.join(&r.path))?;
        samples.push(TrainSample {
            x: pool_clip(&clip, pool)?,
            spatial_class: r.spatial_class,
            temporal_class: r.temporal_class,
        });
    }
    Ok(samples)
}

fn require_manifest_catalog(name: &str, records: &[DatasetRecord], hash: &str) -> Result<()> {
    match records.first() {
        None => Err(Error::Manifest(format!("{name} manifest lists no samples"))),
        Some(first) if first.catalog_hash != hash => Err(Error::Checkpoint(format!(
            "{name} was built with catalog {} but this run uses {}",
            first.catalog_hash, hash
        ))),
        Some(_) => Ok(()),
    }
}

fn cmd_train_probe(args: TrainProbeArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let catalog = cfg.catalog()?;
    let hash = catalog.hash();
    let records = read_dataset_manifest(&args.manifest)?;
    require_manifest_catalog("dataset", &records, &hash)?;

    let pool = PoolConfig::default();
    let samples =
        load_samples(&args.manifest, &records, &pool, catalog.n_spatial(), catalog.n_temporal())?;

    // Child 0 of the train tag initializes parameters; child 1 seeds the
    // shuffle order inside the training loop.
    let (_, mut init_rng) = child_rng(cfg.master_seed, "train", 0);
    let mut model = ProbeModel::init(
        samples[0].x.len(),
        cfg.hidden_dim,
        catalog.n_spatial(),
        catalog.n_temporal(),
        &mut init_rng,
    )?;
    let (shuffle_seed, _) = child_rng(cfg.master_seed, "train", 1);
    let stats = train(&mut model, &samples, &cfg.train_config(shuffle_seed))?;

    write_checkpoint(&args.checkpoint, &Checkpoint { model, pool, catalog_hash: hash })?;
    if let Some(history) = &args.history {
        let mut table = String::from("# epoch\tmean_loss\tspatial_accuracy\ttemporal_accuracy\n");
        for s in &stats {
            writeln!(
                table,
                "{}\t{}\t{}\t{}",
                s.epoch, s.mean_loss, s.spatial_accuracy, s.temporal_accuracy
            )
            .expect("writing to a String cannot fail");
        }
        atomic_write(history, table.as_bytes())?;
    }
    let last = stats.last().expect("training always runs at least one epoch");
    println!(
        "trained {} epochs on {} samples: loss {:.4}, spatial acc {:.3}, temporal acc {:.3}",
        stats.len(),
        samples.len(),
        last.mean_loss,
        last.spatial_accuracy,
        last.temporal_accuracy
    );
    println!("checkpoint written to {}", args.checkpoint.display());
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<()> {
    let cfg = args.config.load()?;
    if args.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let mut max_rel = 0.0f64;
    for t in 0..args.trials {
        let (_, mut rng) = child_rng(cfg.master_seed, "gradcheck", t as u64);
        let input_dim = rng.gen_range(4..16);
        let hidden_dim = rng.gen_range(3..10);
        let n_spatial = rng.gen_range(2..8);
        let n_temporal = rng.gen_range(2..8);
        let batch_len = rng.gen_range(1..6);
        // Alternate decay so both loss shapes are exercised.
        let weight_decay = if t % 2 == 0 { 0.0 } else { 0.01 };

        let model = ProbeModel::init(input_dim, hidden_dim, n_spatial, n_temporal, &mut rng)?;
        let batch: Vec<TrainSample> = (0..batch_len)
            .map(|_| TrainSample {
                x: (0..input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                spatial_class: rng.gen_range(0..n_spatial),
                temporal_class: rng.gen_range(0..n_temporal),
            })
            .collect();
        let rel = finite_difference_check(&model, &batch, weight_decay, 1e-5)?;
        max_rel = max_rel.max(rel);
    }
    println!("max relative error {max_rel:.3e} over {} configurations", args.trials);
    if max_rel >= 1e-4 {
        return Err(Error::GradCheckFailed { max_rel_error: max_rel, threshold: 1e-4 });
    }
    println!("gradient check passed (threshold 1e-4)");
    Ok(())
}

/// Retrieval depths reported by `eval-retrieval`.
const RETRIEVAL_KS: [usize; 5] = [1, 5, 10, 20, 50];

fn cmd_eval_retrieval(args: EvalRetrievalArgs) -> Result<()> {
    let ck = read_checkpoint(&args.checkpoint)?;
    let gallery_records = read_dataset_manifest(&args.gallery)?;
    let query_records = read_dataset_manifest(&args.queries)?;
    require_manifest_catalog("gallery", &gallery_records, &ck.catalog_hash)?;
    require_manifest_catalog("queries", &query_records, &ck.catalog_hash)?;

    let features = |path: &Path, records: &[DatasetRecord]| -> Result<Vec<FeatureVector>> {
        load_samples(path, records, &ck.pool, ck.model.n_spatial, ck.model.n_temporal)?
            .iter()
            .map(|s| Ok(FeatureVector::new(ck.model.features(&s.x)?, 0)))
            .collect()
    };
    let gallery = features(&args.gallery, &gallery_records)?;
    let queries = features(&args.queries, &query_records)?;

    let ks: Vec<usize> =
        RETRIEVAL_KS.into_iter().filter(|&k| k <= gallery.len()).collect();
    let k_max = *ks.last().ok_or(Error::EmptyGallery)?;
    // Rankings are label-independent: retrieve once at the deepest k and
    // score every (head, k) pair on prefixes of the same lists.
    let retrievals = topk_retrieval(&queries, &gallery, k_max, false)?;

    let mut table = String::from("head\tchance");
    for k in &ks {
        write!(table, "\ttop{k}").expect("writing to a String cannot fail");
    }
    table.push('\n');
    let heads: [(&str, fn(&DatasetRecord) -> usize, usize); 2] = [
        ("spatial", |r| r.spatial_class, ck.model.n_spatial),
        ("temporal", |r| r.temporal_class, ck.model.n_temporal),
    ];
    for (name, label_of, n_classes) in heads {
        let query_labels: Vec<usize> = query_records.iter().map(label_of).collect();
        let gallery_labels: Vec<usize> = gallery_records.iter().map(label_of).collect();
        write!(table, "{name}\t{:.4}", 1.0 / n_classes as f64)
            .expect("writing to a String cannot fail");
        for &k in &ks {
            let recall = recall_at_k(&retrievals, &query_labels, &gallery_labels, k)?;
            write!(table, "\t{recall:.4}").expect("writing to a String cannot fail");
        }
        table.push('\n');
    }

    print!(
        "# retrieval: {} queries against {} gallery clips\n{table}",
        queries.len(),
        gallery.len()
    );
    if let Some(out) = &args.out {
        atomic_write(out, table.as_bytes())?;
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let ck = read_checkpoint(&args.checkpoint)?;
    let records = read_dataset_manifest(&args.manifest)?;
    require_manifest_catalog("dataset", &records, &ck.catalog_hash)?;
    let samples =
        load_samples(&args.manifest, &records, &ck.pool, ck.model.n_spatial, ck.model.n_temporal)?;

    let mut spatial_pred = Vec::with_capacity(samples.len());
    let mut temporal_pred = Vec::with_capacity(samples.len());
    for s in &samples {
        let (ps, pt) = v3s_core::probe::predict(&ck.model, &s.x)?;
        spatial_pred.push(ps);
        temporal_pred.push(pt);
    }
    let spatial_true: Vec<usize> = samples.iter().map(|s| s.spatial_class).collect();
    let temporal_true: Vec<usize> = samples.iter().map(|s| s.temporal_class).collect();

    let mut report = String::new();
    for (name, preds, truth, n_classes) in [
        ("spatial", &spatial_pred, &spatial_true, ck.model.n_spatial),
        ("temporal", &temporal_pred, &temporal_true, ck.model.n_temporal),
    ] {
        let matrix = confusion_matrix(preds, truth, n_classes)?;
        writeln!(
            report,
            "{name} head: accuracy {:.4} over {} samples (chance {:.4})",
            accuracy(&matrix),
            matrix.total(),
            1.0 / n_classes as f64
        )
        .expect("writing to a String cannot fail");
        report.push_str("rows true class, columns predicted:\n");
        let width = matrix.counts.iter().max().copied().unwrap_or(0).to_string().len().max(2);
        for y in 0..n_classes {
            for p in 0..n_classes {
                write!(report, " {:>width$}", matrix.get(y, p))
                    .expect("writing to a String cannot fail");
            }
            report.push('\n');
        }
        report.push('\n');
    }

    print!("{report}");
    if let Some(out) = &args.out {
        atomic_write(out, report.as_bytes())?;
    }
    Ok(())
}
