//! Benchmark orchestration: dataset discovery, per-pair evaluation with
//! identical cameras and seeds, and aggregation into mean/max/min summary
//! tables.

mod config;
mod report;

pub use config::{MetricsConfig, RunConfig, ViewConfig};
pub use report::{
    emit_report, parse_records_csv, write_records_csv, ReportFormat, SummaryRow, SummaryTable,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::io::load_mesh;
use crate::metrics2d::{lpips, psnr, ssim, ConvExtractor, FeatureExtractor, PyramidExtractor, SsimParams};
use crate::metrics3d::{evaluate_geometry, Metric3dConfig};
use crate::mesh::TriangleMesh;
use crate::render::{encode_png, envelope_distance, orbit_poses, render, Camera, Image, RenderConfig};
use crate::rng::SeededRng;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("dataset at {0} contains no ground-truth objects")]
    EmptyDataset(PathBuf),
    #[error("duplicate object id {0:?} in ground-truth directory")]
    DuplicateId(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// The six benchmark metrics, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricKind {
    Psnr,
    Ssim,
    Lpips,
    Iou,
    Cd,
    Hd,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Psnr,
        MetricKind::Ssim,
        MetricKind::Lpips,
        MetricKind::Iou,
        MetricKind::Cd,
        MetricKind::Hd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Psnr => "PSNR",
            MetricKind::Ssim => "SSIM",
            MetricKind::Lpips => "LPIPS",
            MetricKind::Iou => "IoU",
            MetricKind::Cd => "CD",
            MetricKind::Hd => "HD",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        MetricKind::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricKind::Psnr | MetricKind::Ssim | MetricKind::Iou)
    }

    /// Direction arrow used in the markdown tables.
    pub fn arrow(self) -> char {
        if self.higher_is_better() {
            '\u{2191}'
        } else {
            '\u{2193}'
        }
    }
}

/// One metric value for one (object, model) pair. PSNR may carry the
/// +infinity sentinel for identical images.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub object_id: String,
    pub model: String,
    pub metric: MetricKind,
    pub value: f64,
}

impl MetricRecord {
    /// Metric-specific range check: SSIM in [-1, 1], IoU in [0, 1],
    /// LPIPS/CD/HD >= 0; only PSNR may be the +infinity sentinel.
    pub fn in_range(&self) -> bool {
        let tol = 1e-9;
        match self.metric {
            MetricKind::Psnr => !self.value.is_nan() && self.value != f64::NEG_INFINITY,
            MetricKind::Ssim => self.value.is_finite() && self.value.abs() <= 1.0 + tol,
            MetricKind::Iou => {
                self.value.is_finite() && (-tol..=1.0 + tol).contains(&self.value)
            }
            MetricKind::Lpips | MetricKind::Cd | MetricKind::Hd => {
                self.value.is_finite() && self.value >= 0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalFailure {
    pub object_id: String,
    /// None when loading the ground truth itself failed.
    pub model: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub object_id: String,
    pub gt_path: PathBuf,
    pub recon_paths: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Every model directory found under recon/, sorted.
    pub models: Vec<String>,
    /// Reconstruction files whose stem matches no ground-truth object.
    pub orphans: Vec<(String, PathBuf)>,
}

impl DatasetManifest {
    /// (object, model) combinations with no reconstruction on disk.
    pub fn missing(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for entry in &self.entries {
            for model in &self.models {
                if !entry.recon_paths.contains_key(model) {
                    out.push((entry.object_id.clone(), model.clone()));
                }
            }
        }
        out
    }
}

const MESH_EXTENSIONS: [&str; 3] = ["obj", "ply", "glb"];

fn is_mesh_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| MESH_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

fn stem_of(path: &Path) -> Option<String> {
    path.file_stem().and_then(|s| s.to_str()).map(String::from)
}

/// Discover a dataset laid out as `root/gt/<id>.<ext>` and
/// `root/recon/<model>/<id>.<ext>`.
pub fn discover_dataset(root: &Path) -> Result<DatasetManifest, HarnessError> {
    let gt_dir = root.join("gt");
    let mut entries: BTreeMap<String, ManifestEntry> = BTreeMap::new();

    let read_dir = std::fs::read_dir(&gt_dir).map_err(|e| io_err(&gt_dir, e))?;
    let mut gt_files: Vec<PathBuf> = read_dir
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_mesh_file(p))
        .collect();
    gt_files.sort();
    for path in gt_files {
        let Some(id) = stem_of(&path) else { continue };
        if id.contains(',') || id.contains('"') {
            return Err(HarnessError::Config(format!(
                "object id {id:?} contains CSV-hostile characters"
            )));
        }
        if entries
            .insert(
                id.clone(),
                ManifestEntry {
                    object_id: id.clone(),
                    gt_path: path,
                    recon_paths: BTreeMap::new(),
                },
            )
            .is_some()
        {
            return Err(HarnessError::DuplicateId(id));
        }
    }
    if entries.is_empty() {
        return Err(HarnessError::EmptyDataset(root.to_path_buf()));
    }

    let mut models = Vec::new();
    let mut orphans = Vec::new();
    let recon_dir = root.join("recon");
    if let Ok(read_dir) = std::fs::read_dir(&recon_dir) {
        let mut model_dirs: Vec<PathBuf> = read_dir
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        model_dirs.sort();
        for model_dir in model_dirs {
            let Some(model) = stem_of(&model_dir) else { continue };
            if model.contains(',') || model.contains('"') {
                return Err(HarnessError::Config(format!(
                    "model name {model:?} contains CSV-hostile characters"
                )));
            }
            models.push(model.clone());
            let read_dir = std::fs::read_dir(&model_dir).map_err(|e| io_err(&model_dir, e))?;
            let mut files: Vec<PathBuf> = read_dir
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_mesh_file(p))
                .collect();
            files.sort();
            for path in files {
                let Some(id) = stem_of(&path) else { continue };
                match entries.get_mut(&id) {
                    Some(entry) => {
                        entry.recon_paths.insert(model.clone(), path);
                    }
                    None => orphans.push((model.clone(), path)),
                }
            }
        }
    }

    Ok(DatasetManifest {
        entries: entries.into_values().collect(),
        models,
        orphans,
    })
}

/// Deterministic per-pair seed so evaluation order and worker count never
/// change any result.
pub fn pair_seed(run_seed: u64, object_id: &str, model: &str) -> u64 {
    SeededRng::derive(run_seed, &format!("{object_id}/{model}")).next_u64()
}

fn cameras_for(cfg: &RunConfig) -> Vec<Camera<f64>> {
    let fov = cfg.views.fov_deg.to_radians();
    let distance = envelope_distance(fov, cfg.views.margin);
    let elevations: Vec<f64> = cfg
        .views
        .elevations_deg
        .iter()
        .map(|e| e.to_radians())
        .collect();
    let mut cams = orbit_poses(cfg.views.n_azimuth, &elevations, distance);
    for cam in &mut cams {
        cam.vertical_fov = fov;
    }
    cams
}

fn render_config(cfg: &RunConfig) -> RenderConfig<f64> {
    RenderConfig {
        width: cfg.views.resolution,
        height: cfg.views.resolution,
        background: cfg.views.background,
        ..RenderConfig::default()
    }
}

/// Evaluate one ground-truth/reconstruction pair: identical cameras for both,
/// per-view PSNR/SSIM/LPIPS averaged into one record each, then volumetric
/// IoU, Chamfer, and Hausdorff from the aligned pair.
pub fn evaluate_pair(
    object_id: &str,
    model: &str,
    gt: &TriangleMesh<f64>,
    recon: &TriangleMesh<f64>,
    cfg: &RunConfig,
    extractor: &(dyn FeatureExtractor<f64> + Sync),
) -> Result<Vec<MetricRecord>, String> {
    evaluate_pair_impl(object_id, model, gt, recon, cfg, extractor, None)
}

fn evaluate_pair_impl(
    object_id: &str,
    model: &str,
    gt: &TriangleMesh<f64>,
    recon: &TriangleMesh<f64>,
    cfg: &RunConfig,
    extractor: &(dyn FeatureExtractor<f64> + Sync),
    dump_views: Option<&Path>,
) -> Result<Vec<MetricRecord>, String> {
    let (gt_n, recon_n) =
        crate::metrics3d::align_pair(gt, recon).map_err(|e| format!("align: {e:?}"))?;

    // the view-consistency contract: both meshes must see the same cameras
    let cams_gt = cameras_for(cfg);
    let cams_recon = cameras_for(cfg);
    assert_eq!(cams_gt, cams_recon, "camera lists must be identical");
    let render_cfg = render_config(cfg);

    let views = cams_gt.len() as f64;
    let mut psnr_acc = 0.0f64;
    let mut ssim_acc = 0.0f64;
    let mut lpips_acc = 0.0f64;
    let ssim_params = SsimParams::default();

    for (k, cam) in cams_gt.iter().enumerate() {
        let img_gt = render(&gt_n, cam, &render_cfg);
        let img_recon = render(&recon_n, cam, &render_cfg);
        psnr_acc += psnr(&img_gt, &img_recon, 1.0).map_err(|e| format!("psnr: {e:?}"))?;
        ssim_acc +=
            ssim(&img_gt, &img_recon, &ssim_params).map_err(|e| format!("ssim: {e:?}"))?;
        lpips_acc +=
            lpips(&img_gt, &img_recon, extractor, None).map_err(|e| format!("lpips: {e:?}"))?;
        if let Some(dir) = dump_views {
            dump_view(dir, "gt", object_id, k, &img_gt)?;
            dump_view(dir, model, object_id, k, &img_recon)?;
        }
    }

    let geo_cfg = Metric3dConfig {
        iou_samples: cfg.metrics.iou_samples,
        cd_hd_samples: cfg.metrics.cd_hd_samples,
        seed: pair_seed(cfg.seed, object_id, model),
        align: true,
    };
    let scores = evaluate_geometry(gt, recon, &geo_cfg).map_err(|e| format!("geometry: {e:?}"))?;

    let rec = |metric: MetricKind, value: f64| MetricRecord {
        object_id: object_id.to_string(),
        model: model.to_string(),
        metric,
        value,
    };
    let records = vec![
        rec(MetricKind::Psnr, psnr_acc / views),
        rec(MetricKind::Ssim, ssim_acc / views),
        rec(MetricKind::Lpips, lpips_acc / views),
        rec(MetricKind::Iou, scores.iou),
        rec(MetricKind::Cd, scores.chamfer),
        rec(MetricKind::Hd, scores.hausdorff),
    ];
    if let Some(bad) = records.iter().find(|r| !r.in_range()) {
        return Err(format!(
            "metric {} value {} out of range",
            bad.metric.name(),
            bad.value
        ));
    }
    Ok(records)
}

fn dump_view(
    dir: &Path,
    subdir: &str,
    object_id: &str,
    view: usize,
    img: &Image<f64>,
) -> Result<(), String> {
    let out_dir = dir.join(subdir);
    std::fs::create_dir_all(&out_dir).map_err(|e| format!("dump views: {e}"))?;
    let path = out_dir.join(format!("{object_id}_view{view}.png"));
    std::fs::write(&path, encode_png(img)).map_err(|e| format!("dump views: {e}"))?;
    Ok(())
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct EvalReport {
    pub records: Vec<MetricRecord>,
    pub failures: Vec<EvalFailure>,
}

impl EvalReport {
    pub fn sort(&mut self) {
        self.records.sort_by(|a, b| {
            (&a.model, a.metric, &a.object_id).cmp(&(&b.model, b.metric, &b.object_id))
        });
        self.failures
            .sort_by(|a, b| (&a.object_id, &a.model).cmp(&(&b.object_id, &b.model)));
    }
}

/// Evaluate every (object, model) pair in the manifest with up to `jobs`
/// workers. Any single object's failure becomes an error entry, never a
/// crash; output ordering is independent of scheduling.
pub fn run_eval(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    jobs: usize,
    dump_views: Option<&Path>,
) -> Result<EvalReport, HarnessError> {
    cfg.validate()?;
    let extractor: Box<dyn FeatureExtractor<f64> + Sync> =
        match &cfg.metrics.lpips_extractor_path {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
                Box::new(
                    ConvExtractor::from_bytes(&bytes)
                        .map_err(|e| HarnessError::Config(format!("lpips extractor: {e}")))?,
                )
            }
            None => Box::new(PyramidExtractor::default()),
        };

    type Outcome = (Vec<MetricRecord>, Vec<EvalFailure>);
    let jobs = jobs.max(1);
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<Option<Outcome>>> = Mutex::new(vec![None; manifest.entries.len()]);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(manifest.entries.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = manifest.entries.get(i) else {
                    break;
                };
                let outcome = evaluate_entry(entry, cfg, extractor.as_ref(), dump_views);
                if let Some(slot) = outcomes.lock().expect("poisoned").get_mut(i) {
                    *slot = Some(outcome);
                }
            });
        }
    });

    let mut report = EvalReport::default();
    for outcome in outcomes.into_inner().expect("poisoned").into_iter().flatten() {
        report.records.extend(outcome.0);
        report.failures.extend(outcome.1);
    }
    report.sort();
    Ok(report)
}

fn evaluate_entry(
    entry: &ManifestEntry,
    cfg: &RunConfig,
    extractor: &(dyn FeatureExtractor<f64> + Sync),
    dump_views: Option<&Path>,
) -> (Vec<MetricRecord>, Vec<EvalFailure>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();

    let gt = match std::fs::read(&entry.gt_path)
        .map_err(|e| format!("read gt: {e}"))
        .and_then(|bytes| load_mesh::<f64>(&bytes, None).map_err(|e| format!("parse gt: {e:?}")))
    {
        Ok(mesh) => mesh,
        Err(message) => {
            failures.push(EvalFailure {
                object_id: entry.object_id.clone(),
                model: None,
                message,
            });
            return (records, failures);
        }
    };

    for (model, path) in &entry.recon_paths {
        let result = std::fs::read(path)
            .map_err(|e| format!("read recon: {e}"))
            .and_then(|bytes| {
                load_mesh::<f64>(&bytes, None).map_err(|e| format!("parse recon: {e:?}"))
            })
            .and_then(|recon| {
                evaluate_pair_impl(
                    &entry.object_id,
                    model,
                    &gt,
                    &recon,
                    cfg,
                    extractor,
                    dump_views,
                )
            });
        match result {
            Ok(mut recs) => records.append(&mut recs),
            Err(message) => failures.push(EvalFailure {
                object_id: entry.object_id.clone(),
                model: Some(model.clone()),
                message,
            }),
        }
    }
    (records, failures)
}

/// Group records by (model, metric) and compute mean/max/min. PSNR +infinity
/// sentinels are excluded from the mean but surface in the max with a flag.
pub fn aggregate(records: &[MetricRecord]) -> SummaryTable {
    let mut groups: BTreeMap<(String, MetricKind), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.model.clone(), r.metric))
            .or_default()
            .push(r.value);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((model, metric), values) in groups {
        let n = values.len();
        let infinite_count = values.iter().filter(|v| v.is_infinite()).count();
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let mean = if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(SummaryRow {
            model,
            metric,
            mean,
            max,
            min,
            n,
            infinite_count,
        });
    }
    rows.sort_by(|a, b| (&a.model, a.metric).cmp(&(&b.model, b.metric)));
    SummaryTable { rows }
}
