use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use mapdr_core::baseline::infer_correspondence;
use mapdr_core::geometry::ProjectionConfig;
use mapdr_core::io::{
    list_clip_dirs, read_clip_dir, write_clip_dir, write_prediction, ClipBundle, DirError,
    Severity, ValidationIssue, PREDICTION_FILE,
};
use mapdr_core::metrics::{aggregate, evaluate_clip};
use mapdr_core::overlay::render_overlay;
use mapdr_core::synth::{
    corrupt, generate_clip, CorruptionSpec, Manifest, ManifestEntry, SceneConfig,
};
use mapdr_core::{EvalConfig, MetricReport, PredictionSet, Rule};

const CONVENTIONS_ENV: &str = "MAPDR_CONVENTIONS";

#[derive(Parser)]
#[command(
    name = "mapdr",
    version,
    about = "Validate, score and generate lane-rule benchmark clips"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check clip directories and list every issue as "severity path message".
    Validate(ValidateArgs),
    /// Score predictions against ground truth and write a JSON report.
    Eval(EvalArgs),
    /// Render an SVG overlay of the map vectors seen from one pose.
    Project(ProjectArgs),
    /// Generate synthetic clips, optionally with corrupted predictions.
    Synth(SynthArgs),
    /// Write geometric baseline predictions for labeled clips.
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// A clip directory or a directory of clip directories.
    dir: PathBuf,
    /// Downgrade dangling label references to warnings.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth clip directory or directory of clips.
    #[arg(long)]
    gt: PathBuf,
    /// Directory holding prediction.json files laid out like --gt.
    #[arg(long)]
    pred: PathBuf,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of evenly spaced confidence thresholds on [0, 1].
    #[arg(long, default_value_t = mapdr_core::metrics::DEFAULT_THRESHOLD_COUNT)]
    thresholds: usize,
    /// Threshold at which P_all / R_all are reported.
    #[arg(long, default_value_t = mapdr_core::metrics::DEFAULT_OPERATING_THRESHOLD)]
    operating_threshold: f64,
    #[arg(long)]
    lenient: bool,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct ProjectArgs {
    clip_dir: PathBuf,
    /// Pose timestamp; the earliest pose when omitted.
    #[arg(long)]
    timestamp: Option<String>,
    /// SVG file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Projection overrides, e.g. "quat=wxyz,pose=world_to_camera,near=0.2,size=1920x1080".
    /// Applied after the MAPDR_CONVENTIONS environment variable.
    #[arg(long)]
    conventions: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output root; one sub-directory per clip plus manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// First seed; clip i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Lanes per clip; drawn from the seed when omitted.
    #[arg(long)]
    lanes: Option<usize>,
    /// Rules per clip; drawn from the seed when omitted (requires lanes unset).
    #[arg(long)]
    rules: Option<usize>,
    /// Also write prediction.json corrupted with this preset
    /// (clean, drop, perturb, noisy).
    #[arg(long)]
    corrupt: Option<String>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Labeled clip directory or directory of clips.
    dir: PathBuf,
    /// Output root for prediction.json files; defaults to writing next to
    /// each clip's labels.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lenient: bool,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

/// An error paired with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn domain(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }

    fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 2,
            error: error.into(),
        }
    }
}

impl From<DirError> for Failure {
    fn from(e: DirError) -> Self {
        if e.is_io() {
            Failure::io(e)
        } else {
            Failure::domain(e)
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Validate(a) => validate(a),
        Command::Eval(a) => eval(a),
        Command::Project(a) => project(a),
        Command::Synth(a) => synth(a),
        Command::Baseline(a) => baseline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mapdr: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(Failure::io)
}

fn clip_dirs(root: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !root.is_dir() {
        return Err(Failure::io(anyhow!("{}: not a directory", root.display())));
    }
    let dirs = list_clip_dirs(root)?;
    if dirs.is_empty() {
        return Err(Failure::io(anyhow!(
            "{}: no clip directories found",
            root.display()
        )));
    }
    Ok(dirs)
}

fn issue_line(file: &Path, issue: &ValidationIssue) -> String {
    let pointer = if issue.path.is_empty() {
        "/"
    } else {
        &issue.path
    };
    format!(
        "{} {}#{} {}",
        issue.severity,
        file.display(),
        pointer,
        issue.message
    )
}

fn validate(args: ValidateArgs) -> Outcome {
    let dirs = clip_dirs(&args.dir)?;
    let mut errors = 0usize;
    let mut io_failure = false;
    let mut out = std::io::stdout().lock();
    for dir in dirs {
        match read_clip_dir(&dir, !args.lenient) {
            Ok(bundle) => {
                for (file, w) in &bundle.warnings {
                    let _ = writeln!(out, "{}", issue_line(file, w));
                }
                if let Some(pred) = &bundle.prediction {
                    if let Err(e) = pred.validate_against(&bundle.clip) {
                        errors += 1;
                        let _ =
                            writeln!(out, "error {}#/ {e}", dir.join(PREDICTION_FILE).display());
                    }
                }
            }
            Err(DirError::Invalid { path, error }) => {
                for issue in &error.issues {
                    if issue.severity == Severity::Error {
                        errors += 1;
                    }
                    let _ = writeln!(out, "{}", issue_line(&path, issue));
                }
            }
            Err(e @ DirError::Io { .. }) => {
                io_failure = true;
                let _ = writeln!(out, "error {e}");
            }
        }
    }
    if io_failure {
        Err(Failure::io(anyhow!("some files could not be read")))
    } else if errors > 0 {
        Err(Failure::domain(anyhow!("{errors} error(s)")))
    } else {
        Ok(())
    }
}

/// Where the prediction for `gt_dir` lives under `pred_root`.
fn prediction_dir(gt_root: &Path, gt_dir: &Path, pred_root: &Path) -> PathBuf {
    match gt_dir.strip_prefix(gt_root) {
        Ok(rel) => pred_root.join(rel),
        Err(_) => pred_root.to_owned(),
    }
}

struct ClipScore {
    id: String,
    report: MetricReport,
    warnings: Vec<String>,
}

fn score_clip(
    gt_root: &Path,
    pred_root: &Path,
    dir: &Path,
    strict: bool,
    cfg: &EvalConfig,
) -> Result<ClipScore, Failure> {
    let bundle: ClipBundle = read_clip_dir(dir, strict)?;
    let mut warnings: Vec<String> = bundle
        .warnings
        .iter()
        .filter(|(file, _)| !file.ends_with(PREDICTION_FILE))
        .map(|(file, w)| issue_line(file, w))
        .collect();
    let labels = bundle.labels.ok_or_else(|| {
        Failure::domain(anyhow!("{}: ground truth has no label file", dir.display()))
    })?;

    let pred_path = prediction_dir(gt_root, dir, pred_root).join(PREDICTION_FILE);
    let prediction = if pred_path.is_file() {
        let bytes = fs::read(&pred_path)
            .with_context(|| pred_path.display().to_string())
            .map_err(Failure::io)?;
        let parsed = mapdr_core::io::parse_prediction(&bytes).map_err(|e| {
            Failure::from(DirError::Invalid {
                path: pred_path.clone(),
                error: e,
            })
        })?;
        warnings.extend(parsed.warnings.iter().map(|w| issue_line(&pred_path, w)));
        parsed.value
    } else {
        warnings.push(format!(
            "warning {}#/ missing prediction, scored as empty",
            pred_path.display()
        ));
        PredictionSet::default()
    };

    let report = evaluate_clip(
        &labels.rules,
        &labels.graph,
        &prediction,
        Some(&bundle.clip),
        cfg,
    )
    .with_context(|| pred_path.display().to_string())
    .map_err(Failure::domain)?;
    Ok(ClipScore {
        id: bundle.id,
        report,
        warnings,
    })
}

fn eval(args: EvalArgs) -> Outcome {
    let cfg = EvalConfig {
        threshold_count: args.thresholds,
        operating_threshold: args.operating_threshold,
    };
    if !args.pred.is_dir() {
        return Err(Failure::io(anyhow!(
            "{}: not a directory",
            args.pred.display()
        )));
    }
    let dirs = clip_dirs(&args.gt)?;
    let strict = !args.lenient;
    let scores: Vec<Result<ClipScore, Failure>> = pool(args.workers)?.install(|| {
        dirs.par_iter()
            .map(|d| score_clip(&args.gt, &args.pred, d, strict, &cfg))
            .collect()
    });
    let mut ok = Vec::with_capacity(scores.len());
    for s in scores {
        ok.push(s?);
    }
    for s in &ok {
        for w in &s.warnings {
            eprintln!("{w}");
        }
    }

    let total = aggregate(ok.iter().map(|s| &s.report)).map_err(Failure::domain)?;
    let clips: Vec<Value> = ok
        .iter()
        .map(|s| {
            let mut v = serde_json::to_value(&s.report).expect("reports serialize");
            v["clip_id"] = json!(s.id);
            v
        })
        .collect();
    let report = json!({
        "config": {
            "threshold_count": cfg.threshold_count,
            "threshold_grid": "i / (threshold_count - 1)",
            "operating_threshold": cfg.operating_threshold,
            "strict": strict,
        },
        "clips": clips,
        "aggregate": total,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match &args.out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            eprintln!(
                "P_RE {:.4}  R_RE {:.4}  P_CR {:.4}  R_CR {:.4}  P_all {:.4}  R_all {:.4}  AP {:.4}  ({} clips)",
                total.p_re, total.r_re, total.p_cr, total.r_cr, total.p_all, total.r_all, total.ap,
                ok.len()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| parent.display().to_string())
            .map_err(Failure::io)?;
    }
    fs::write(path, bytes)
        .with_context(|| path.display().to_string())
        .map_err(Failure::io)
}

fn projection_config(cli: Option<&str>) -> Result<ProjectionConfig, Failure> {
    let mut cfg = ProjectionConfig::default();
    if let Ok(env) = std::env::var(CONVENTIONS_ENV) {
        cfg = cfg
            .with_overrides(&env)
            .with_context(|| format!("{CONVENTIONS_ENV}={env}"))
            .map_err(Failure::io)?;
    }
    if let Some(spec) = cli {
        cfg = cfg
            .with_overrides(spec)
            .context("--conventions")
            .map_err(Failure::io)?;
    }
    Ok(cfg)
}

fn project(args: ProjectArgs) -> Outcome {
    let cfg = projection_config(args.conventions.as_deref())?;
    if !args.clip_dir.is_dir() {
        return Err(Failure::io(anyhow!(
            "{}: not a directory",
            args.clip_dir.display()
        )));
    }
    let bundle = read_clip_dir(&args.clip_dir, false)?;
    let timestamp = match args.timestamp {
        Some(t) => t,
        None => bundle
            .clip
            .poses
            .keys()
            .next()
            .cloned()
            .ok_or_else(|| Failure::domain(anyhow!("clip has no poses")))?,
    };
    let labels = bundle.labels.map(|l| l.rules).unwrap_or_default();
    let overlay =
        render_overlay(&bundle.clip, &labels, &timestamp, &cfg).map_err(Failure::domain)?;
    match &args.out {
        Some(path) => write_file(path, overlay.svg.as_bytes()),
        None => {
            print!("{}", overlay.svg);
            Ok(())
        }
    }
}

fn synth(args: SynthArgs) -> Outcome {
    let spec = match &args.corrupt {
        Some(name) => Some(CorruptionSpec::preset(name).ok_or_else(|| {
            let names: Vec<&str> = CorruptionSpec::PRESETS.iter().map(|(n, _)| *n).collect();
            Failure::io(anyhow!(
                "unknown corruption preset {name:?}; expected one of {names:?}"
            ))
        })?),
        None => None,
    };
    if args.rules.is_some() && args.lanes.is_none() {
        return Err(Failure::io(anyhow!("--rules requires --lanes")));
    }
    let mut manifest = Manifest::default();
    for seed in args.seed..args.seed.saturating_add(args.count) {
        let scene_cfg = match args.lanes {
            Some(k) => SceneConfig::new(k, args.rules.unwrap_or(k)),
            None => SceneConfig::sampled(seed),
        };
        let scene = generate_clip(&scene_cfg, seed).map_err(Failure::domain)?;
        let clip_id = format!("clip_{seed:06}");
        let (prediction, expected) = match &spec {
            Some(spec) => {
                let (p, c) =
                    corrupt(&scene.labels, &scene.clip, spec, seed).map_err(Failure::domain)?;
                (Some(p), Some(c))
            }
            None => (None, None),
        };
        write_clip_dir(
            &args.out.join(&clip_id),
            &scene.clip,
            Some(&scene.labels),
            prediction.as_ref(),
        )?;
        manifest.clips.push(ManifestEntry {
            clip_id,
            seed,
            scene: scene_cfg,
            corruption: spec,
            separating_threshold: spec.and_then(|s| s.separating_threshold()),
            expected,
        });
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&args.out.join("manifest.json"), text.as_bytes())
}

fn baseline(args: BaselineArgs) -> Outcome {
    let dirs = clip_dirs(&args.dir)?;
    let strict = !args.lenient;
    let results: Vec<Outcome> = pool(args.workers)?.install(|| {
        dirs.par_iter()
            .map(|dir| {
                let bundle = read_clip_dir(dir, strict)?;
                let rules: Vec<Rule> = bundle
                    .labels
                    .map(|l| l.rules.into_iter().map(|r| r.rule).collect())
                    .ok_or_else(|| Failure::domain(anyhow!("{}: no label file", dir.display())))?;
                let pred = infer_correspondence(&rules, &bundle.clip)
                    .with_context(|| dir.display().to_string())
                    .map_err(Failure::domain)?;
                let target = match &args.out {
                    Some(out) => prediction_dir(&args.dir, dir, out),
                    None => dir.clone(),
                };
                write_file(&target.join(PREDICTION_FILE), &write_prediction(&pred))
            })
            .collect()
    });
    results.into_iter().collect()
}
