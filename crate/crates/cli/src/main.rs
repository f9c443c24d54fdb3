//! recon-eval command line: render consistent views, run the benchmark
//! pipeline over a dataset, color reconstructions by error, and re-aggregate
//! record files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use recon_eval::harness::{
    aggregate, discover_dataset, emit_report, parse_records_csv, run_eval, write_records_csv,
    EvalReport, HarnessError, ReportFormat, RunConfig,
};
use recon_eval::heatmap::colorize_error;
use recon_eval::io::{load_mesh, write_ply};
use recon_eval::metrics3d::align_pair;
use recon_eval::render::{encode_png, fit_distance, orbit_poses, render, RenderConfig};
use recon_eval::{Mesh, SeededRng};

const EXIT_PARSE: u8 = 2;
const EXIT_RENDER_CONFIG: u8 = 3;
const EXIT_EMPTY_DATASET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "recon-eval",
    version,
    about = "Evaluation toolkit for single-view 3D reconstruction: consistent views, 2D/3D metrics, error heatmaps, benchmark tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render deterministic orbit views of a mesh to PNG files
    Views(ViewsArgs),
    /// Evaluate every reconstruction in a dataset against its ground truth
    Eval(EvalArgs),
    /// Write a reconstruction colored by distance to the ground-truth surface
    Colorize(ColorizeArgs),
    /// Re-aggregate an existing records CSV into summary tables
    Report(ReportArgs),
}

#[derive(Args)]
struct ViewsArgs {
    /// Mesh file (OBJ, PLY, or GLB; format detected from content)
    model_path: PathBuf,
    /// Output directory for `<stem>_view<k>.png`
    #[arg(long, default_value = "views")]
    out_dir: PathBuf,
    /// Azimuth count per elevation
    #[arg(long, default_value_t = 8)]
    views: usize,
    /// Comma-separated elevations in degrees
    #[arg(long, value_delimiter = ',', default_value = "20,-20")]
    elevations: Vec<f64>,
    /// Square output resolution in pixels
    #[arg(long, default_value_t = 512)]
    resolution: u32,
    /// Vertical field of view in degrees
    #[arg(long, default_value_t = 45.0)]
    fov: f64,
    /// Framing margin (>= 1)
    #[arg(long, default_value_t = 1.2)]
    margin: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset root: gt/<id>.<ext> and recon/<model>/<id>.<ext>
    dataset_root: PathBuf,
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Summary CSV output path; the markdown report and records CSV are
    /// written next to it
    #[arg(long, default_value = "eval_summary.csv")]
    out_csv: PathBuf,
    /// Seed override (flag > config > RECON_EVAL_SEED > 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Also dump every rendered view as PNG under <out>/views/
    #[arg(long)]
    dump_views: bool,
}

#[derive(Args)]
struct ColorizeArgs {
    gt_path: PathBuf,
    recon_path: PathBuf,
    /// Output PLY path (binary little-endian with vertex colors)
    #[arg(long, default_value = "colorized.ply")]
    out_ply: PathBuf,
    /// Ground-truth surface sample count
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Records CSV produced by `eval` (object_id,model,metric,value)
    records_csv: PathBuf,
    /// Output format
    #[arg(long, value_parser = ["csv", "markdown"], default_value = "markdown")]
    format: String,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Views(args) => cmd_views(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Colorize(args) => cmd_colorize(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// Seed precedence: explicit flag, then RECON_EVAL_SEED, then 0.
fn seed_fallback(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("RECON_EVAL_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn read_mesh(path: &Path) -> Result<Mesh> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mesh = load_mesh(&bytes, None)
        .with_context(|| format!("cannot parse mesh {}", path.display()))?;
    Ok(mesh)
}

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(code)
}

fn cmd_views(args: ViewsArgs) -> ExitCode {
    let mesh = match read_mesh(&args.model_path) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    if args.views == 0 || args.elevations.is_empty() || args.resolution == 0 {
        return fail(
            EXIT_RENDER_CONFIG,
            "need views >= 1, at least one elevation, resolution >= 1",
        );
    }
    if !(args.fov > 0.0 && args.fov < 180.0) || args.margin < 1.0 {
        return fail(EXIT_RENDER_CONFIG, "fov must be in (0, 180), margin >= 1");
    }

    let (mesh, _) = match recon_eval::geometry::normalize_mesh(&mesh) {
        Ok(pair) => pair,
        Err(e) => return fail(EXIT_PARSE, format!("cannot normalize mesh: {e}")),
    };
    let fov = args.fov.to_radians();
    let distance = match fit_distance(&mesh, fov, args.margin) {
        Ok(d) => d,
        Err(e) => return fail(EXIT_RENDER_CONFIG, format!("cannot frame mesh: {e}")),
    };
    let elevations: Vec<f64> = args.elevations.iter().map(|e| e.to_radians()).collect();
    let mut cams = orbit_poses(args.views, &elevations, distance);
    for cam in &mut cams {
        cam.vertical_fov = fov;
    }
    let cfg = RenderConfig {
        width: args.resolution,
        height: args.resolution,
        ..RenderConfig::default()
    };

    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        return fail(EXIT_RENDER_CONFIG, e);
    }
    let stem = args
        .model_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model");
    let _ = seed_fallback(args.seed); // views are seed-free today; accepted for interface stability
    for (k, cam) in cams.iter().enumerate() {
        let img = render(&mesh, cam, &cfg);
        let path = args.out_dir.join(format!("{stem}_view{k}.png"));
        if let Err(e) = std::fs::write(&path, encode_png(&img)) {
            return fail(EXIT_RENDER_CONFIG, e);
        }
        println!(
            "view {k}: azimuth {:.1} deg written to {}",
            (k % args.views) as f64 * 360.0 / args.views as f64,
            path.display()
        );
    }
    ExitCode::SUCCESS
}

fn cmd_eval(args: EvalArgs) -> ExitCode {
    let (mut cfg, config_sets_seed) = match &args.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            let cfg = match RunConfig::from_json(&text) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_PARSE, e),
            };
            let has_seed = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .and_then(|v| v.get("seed").cloned())
                .is_some();
            (cfg, has_seed)
        }
        None => (RunConfig::default(), false),
    };
    // precedence: flag, then explicit config seed, then RECON_EVAL_SEED, then 0
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    } else if !config_sets_seed {
        cfg.seed = seed_fallback(None);
    }

    let manifest = match discover_dataset(&args.dataset_root) {
        Ok(m) => m,
        Err(e @ HarnessError::EmptyDataset(_)) => return fail(EXIT_EMPTY_DATASET, e),
        Err(e) => return fail(EXIT_PARSE, e),
    };
    for (model, path) in &manifest.orphans {
        eprintln!(
            "warning: {} has no matching ground truth (model {model})",
            path.display()
        );
    }
    for (object, model) in manifest.missing() {
        eprintln!("warning: object {object} has no reconstruction from model {model}");
    }

    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let dump_dir = args
        .out_csv
        .parent()
        .map(|p| p.join("views"))
        .filter(|_| args.dump_views);

    let report = match run_eval(&manifest, &cfg, jobs, dump_dir.as_deref()) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_PARSE, e),
    };

    let n_pairs: usize = manifest
        .entries
        .iter()
        .map(|e| e.recon_paths.len())
        .sum();
    if n_pairs > 0 && report.records.is_empty() {
        print_failures(&report);
        eprintln!("error: every object failed to evaluate");
        return ExitCode::FAILURE;
    }

    if let Err(e) = write_outputs(&args.out_csv, &report) {
        return fail(EXIT_PARSE, e);
    }
    print_failures(&report);
    println!(
        "evaluated {} pairs ({} errors); summary written to {}",
        n_pairs - report.failures.len(),
        report.failures.len(),
        args.out_csv.display()
    );
    ExitCode::SUCCESS
}

fn print_failures(report: &EvalReport) {
    for f in &report.failures {
        match &f.model {
            Some(model) => eprintln!("error entry: {} / {model}: {}", f.object_id, f.message),
            None => eprintln!("error entry: {} (ground truth): {}", f.object_id, f.message),
        }
    }
}

fn write_outputs(out_csv: &Path, report: &EvalReport) -> Result<()> {
    if let Some(parent) = out_csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let table = aggregate(&report.records);
    std::fs::write(out_csv, emit_report(&table, ReportFormat::Csv))?;

    let md_path = out_csv.with_extension("md");
    let mut md = emit_report(&table, ReportFormat::Markdown);
    md.push_str(&format!("\nErrors: {}\n", report.failures.len()));
    for f in &report.failures {
        let model = f.model.as_deref().unwrap_or("(ground truth)");
        md.push_str(&format!("- {} / {}: {}\n", f.object_id, model, f.message));
    }
    std::fs::write(&md_path, md)?;

    let records_path = records_path_for(out_csv);
    std::fs::write(&records_path, write_records_csv(&report.records))?;
    Ok(())
}

fn records_path_for(out_csv: &Path) -> PathBuf {
    let stem = out_csv
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("eval");
    out_csv.with_file_name(format!("{stem}_records.csv"))
}

fn cmd_colorize(args: ColorizeArgs) -> ExitCode {
    let gt = match read_mesh(&args.gt_path) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let recon = match read_mesh(&args.recon_path) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let (gt_n, recon_n) = match align_pair(&gt, &recon) {
        Ok(pair) => pair,
        Err(e) => return fail(EXIT_PARSE, format!("cannot align pair: {e}")),
    };
    let mut rng = SeededRng::new(seed_fallback(args.seed));
    let colored = match colorize_error(&recon_n, &gt_n, args.samples, &mut rng) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_PARSE, format!("cannot colorize: {e}")),
    };
    let bytes = match write_ply(&colored, true) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_PARSE, format!("cannot serialize PLY: {e}")),
    };
    if let Some(parent) = args.out_ply.parent().filter(|p| !p.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(parent) {
            return fail(EXIT_PARSE, e);
        }
    }
    if let Err(e) = std::fs::write(&args.out_ply, bytes) {
        return fail(EXIT_PARSE, e);
    }
    println!(
        "colorized {} vertices against {} surface samples -> {}",
        colored.vertex_count(),
        args.samples,
        args.out_ply.display()
    );
    ExitCode::SUCCESS
}

fn cmd_report(args: ReportArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.records_csv) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let records = match parse_records_csv(&text) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let format = if args.format == "csv" {
        ReportFormat::Csv
    } else {
        ReportFormat::Markdown
    };
    let rendered = emit_report(&aggregate(&records), format);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                return fail(EXIT_PARSE, e);
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::SUCCESS
}
