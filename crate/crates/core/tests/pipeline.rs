//! Harness-level integration: dataset discovery rules, pair evaluation
//! (identity, mirror ordering, failure tagging), failure isolation across a
//! batch, and view dumping.

mod common;

use std::path::Path;

use recon_eval::harness::{
    aggregate, discover_dataset, evaluate_pair, run_eval, HarnessError, MetricKind, RunConfig,
};
use recon_eval::heatmap::colorize_error;
use recon_eval::io::{parse_ply, write_ply};
use recon_eval::metrics2d::PyramidExtractor;
use recon_eval::metrics3d::{align_pair, evaluate_geometry, Metric3dConfig};
use recon_eval::rng::SeededRng;
use recon_eval::{shapes, Mesh};

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    dir
}

fn write_mesh(path: &Path, mesh: &Mesh) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, write_ply(mesh, true).unwrap()).unwrap();
}

fn bumpy_sphere() -> Mesh {
    let mut m = shapes::icosphere::<f64>(1, 0.5);
    for (i, v) in m.vertices.iter_mut().enumerate() {
        let bump = 1.0 + 0.1 * ((i % 7) as f64 - 3.0) / 3.0;
        for c in v.iter_mut() {
            *c *= bump;
        }
    }
    m
}

fn small_config() -> RunConfig {
    RunConfig::from_json(
        r#"{
            "seed": 3,
            "views": {"n_azimuth": 2, "elevations_deg": [15.0], "resolution": 64},
            "metrics": {"iou_samples": 2000, "cd_hd_samples": 600}
        }"#,
    )
    .unwrap()
}

// --- discovery -------------------------------------------------------------

#[test]
fn discovery_pairs_objects_with_models() {
    let root = tmp("disc_basic");
    let cube = shapes::unit_cube::<f64>();
    write_mesh(&root.join("gt/a.ply"), &cube);
    write_mesh(&root.join("gt/b.ply"), &cube);
    write_mesh(&root.join("recon/model1/a.ply"), &cube);
    write_mesh(&root.join("recon/model1/b.ply"), &cube);

    let manifest = discover_dataset(&root).unwrap();
    assert_eq!(manifest.entries.len(), 2);
    assert_eq!(manifest.models, vec!["model1"]);
    for entry in &manifest.entries {
        assert_eq!(entry.recon_paths.len(), 1);
    }
    assert!(manifest.orphans.is_empty());
    assert!(manifest.missing().is_empty());
}

#[test]
fn discovery_reports_orphans_and_missing() {
    let root = tmp("disc_orphan");
    let cube = shapes::unit_cube::<f64>();
    write_mesh(&root.join("gt/a.ply"), &cube);
    write_mesh(&root.join("recon/model1/a.ply"), &cube);
    write_mesh(&root.join("recon/model1/ghost.ply"), &cube);
    write_mesh(&root.join("recon/model2/other.ply"), &cube);

    let manifest = discover_dataset(&root).unwrap();
    assert_eq!(manifest.entries.len(), 1);
    assert_eq!(manifest.models, vec!["model1", "model2"]);
    let orphan_names: Vec<&str> = manifest
        .orphans
        .iter()
        .map(|(m, _)| m.as_str())
        .collect();
    assert_eq!(orphan_names, vec!["model1", "model2"]);
    assert_eq!(
        manifest.missing(),
        vec![("a".to_string(), "model2".to_string())]
    );
}

#[test]
fn discovery_rejects_duplicate_stems() {
    let root = tmp("disc_dup");
    let cube = shapes::unit_cube::<f64>();
    write_mesh(&root.join("gt/a.ply"), &cube);
    let obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    std::fs::write(root.join("gt/a.obj"), obj).unwrap();
    assert!(matches!(
        discover_dataset(&root),
        Err(HarnessError::DuplicateId(id)) if id == "a"
    ));
}

#[test]
fn discovery_rejects_empty_dataset() {
    let root = tmp("disc_empty");
    std::fs::create_dir_all(root.join("gt")).unwrap();
    assert!(matches!(
        discover_dataset(&root),
        Err(HarnessError::EmptyDataset(_))
    ));
}

// --- pair evaluation -------------------------------------------------------

#[test]
fn identity_pair_scores_perfectly() {
    let mesh = bumpy_sphere();
    let cfg = small_config();
    let records =
        evaluate_pair("obj", "m", &mesh, &mesh.clone(), &cfg, &PyramidExtractor::default())
            .unwrap();
    let value = |kind: MetricKind| {
        records
            .iter()
            .find(|r| r.metric == kind)
            .map(|r| r.value)
            .unwrap()
    };
    assert!(value(MetricKind::Psnr).is_infinite());
    assert!((value(MetricKind::Ssim) - 1.0).abs() < 1e-12);
    assert_eq!(value(MetricKind::Lpips), 0.0);
    assert_eq!(value(MetricKind::Iou), 1.0);
    // noise floor for the 600-sample test config; the 10k-sample floor is
    // pinned in sphere_self_comparison_noise_floor below
    assert!(value(MetricKind::Cd) <= 0.01, "cd {}", value(MetricKind::Cd));
    assert!(value(MetricKind::Hd) <= 0.12, "hd {}", value(MetricKind::Hd));
}

#[test]
fn mirrored_recon_scores_strictly_below_identity() {
    let gt = bumpy_sphere();
    let mut mirrored = gt.clone();
    for v in &mut mirrored.vertices {
        for c in v.iter_mut() {
            *c = -*c;
        }
    }
    let cfg = small_config();
    let ex = PyramidExtractor::default();
    let identity = evaluate_pair("obj", "m", &gt, &gt.clone(), &cfg, &ex).unwrap();
    let mirror = evaluate_pair("obj", "m", &gt, &mirrored, &cfg, &ex).unwrap();
    let value = |rs: &[recon_eval::harness::MetricRecord], kind: MetricKind| {
        rs.iter().find(|r| r.metric == kind).map(|r| r.value).unwrap()
    };
    assert!(value(&mirror, MetricKind::Psnr) < value(&identity, MetricKind::Psnr));
    assert!(value(&mirror, MetricKind::Ssim) < value(&identity, MetricKind::Ssim));
    assert!(value(&mirror, MetricKind::Lpips) > value(&identity, MetricKind::Lpips));
}

#[test]
fn sphere_self_comparison_noise_floor() {
    let sphere = shapes::icosphere::<f64>(3, 1.0);
    let cfg = Metric3dConfig {
        iou_samples: 5_000,
        cd_hd_samples: 10_000,
        seed: 5,
        align: true,
    };
    let scores = evaluate_geometry(&sphere, &sphere.clone(), &cfg).unwrap();
    assert_eq!(scores.iou, 1.0);
    assert!(scores.chamfer <= 1e-3, "cd {}", scores.chamfer);
    assert!(scores.hausdorff <= 0.05, "hd {}", scores.hausdorff);
}

#[test]
fn scaled_disjoint_copies_collapse_after_alignment() {
    // dyadic-grid coordinates make the scale-and-shift exact in f64, so
    // alignment collapses it without a single differing bit
    let mut gt = bumpy_sphere();
    common::quantize_mesh(&mut gt);
    let moved = common::scale_translate(&gt, 2.0, [100.0, -40.0, 7.0]);
    let cfg = Metric3dConfig {
        iou_samples: 2_000,
        cd_hd_samples: 500,
        seed: 6,
        align: true,
    };
    let self_scores = evaluate_geometry(&gt, &gt.clone(), &cfg).unwrap();
    let moved_scores = evaluate_geometry(&gt, &moved, &cfg).unwrap();
    assert_eq!(self_scores.iou.to_bits(), moved_scores.iou.to_bits());
    assert_eq!(self_scores.chamfer.to_bits(), moved_scores.chamfer.to_bits());
    assert_eq!(
        self_scores.hausdorff.to_bits(),
        moved_scores.hausdorff.to_bits()
    );
}

// --- failure isolation -----------------------------------------------------

#[test]
fn corrupt_and_empty_objects_become_error_entries() {
    let root = tmp("isolation");
    let cube = shapes::unit_cube::<f64>();
    write_mesh(&root.join("gt/good.ply"), &cube);
    write_mesh(&root.join("gt/faceless.ply"), &cube);
    write_mesh(&root.join("gt/broken.ply"), &cube);
    write_mesh(&root.join("recon/m/good.ply"), &cube);
    // faceless reconstruction: vertices only, no surface to sample
    let faceless = Mesh::new(cube.vertices.clone(), vec![]);
    write_mesh(&root.join("recon/m/faceless.ply"), &faceless);
    // broken reconstruction: truncated binary payload
    let mut bytes = write_ply(&cube, true).unwrap();
    bytes.truncate(bytes.len() - 11);
    std::fs::create_dir_all(root.join("recon/m")).unwrap();
    std::fs::write(root.join("recon/m/broken.ply"), &bytes).unwrap();

    let manifest = discover_dataset(&root).unwrap();
    let report = run_eval(&manifest, &small_config(), 2, None).unwrap();

    // the good object fully evaluated
    assert_eq!(
        report
            .records
            .iter()
            .filter(|r| r.object_id == "good")
            .count(),
        6
    );
    // the other two carry typed error entries, and the batch survived
    assert_eq!(report.failures.len(), 2);
    let failure_for = |id: &str| {
        report
            .failures
            .iter()
            .find(|f| f.object_id == id)
            .unwrap_or_else(|| panic!("no failure entry for {id}"))
    };
    assert!(failure_for("faceless").message.contains("NoSurface"));
    assert!(failure_for("broken").message.contains("parse recon"));

    // aggregation only sees the good records
    let table = aggregate(&report.records);
    assert!(table.rows.iter().all(|r| r.n == 1));
}

// --- view dumping ----------------------------------------------------------

#[test]
fn dump_views_writes_decodable_pngs() {
    let root = tmp("dump_views");
    let cube = shapes::unit_cube::<f64>();
    write_mesh(&root.join("gt/cube.ply"), &cube);
    write_mesh(&root.join("recon/m/cube.ply"), &cube);
    let manifest = discover_dataset(&root).unwrap();

    let views_dir = root.join("view_dump");
    let report = run_eval(&manifest, &small_config(), 1, Some(&views_dir)).unwrap();
    assert!(report.failures.is_empty());

    // 2 azimuths x 1 elevation = views 0 and 1, for gt and the model
    for sub in ["gt", "m"] {
        for k in 0..2 {
            let path = views_dir.join(sub).join(format!("cube_view{k}.png"));
            let bytes = std::fs::read(&path).unwrap();
            let decoder = png::Decoder::new(std::io::Cursor::new(&bytes));
            let mut reader = decoder.read_info().unwrap();
            let mut buf = vec![0u8; reader.output_buffer_size()];
            let info = reader.next_frame(&mut buf).unwrap();
            assert_eq!((info.width, info.height), (64, 64));
        }
    }
}

// --- heatmap to PLY --------------------------------------------------------

#[test]
fn colorized_mesh_round_trips_through_ply() {
    let gt = shapes::icosphere::<f64>(2, 1.0);
    let recon = bumpy_sphere();
    let (gt_n, recon_n) = align_pair(&gt, &recon).unwrap();
    let mut rng = SeededRng::new(8);
    let colored = colorize_error(&recon_n, &gt_n, 5_000, &mut rng).unwrap();

    let bytes = write_ply(&colored, true).unwrap();
    let back: Mesh = parse_ply(&bytes).unwrap();
    let colors = back.colors.as_ref().expect("colors must survive the round trip");
    assert_eq!(colors.len(), back.vertex_count());
    // quantization to uchar: channels still on the u8 grid, green still zero
    for c in colors {
        assert_eq!(c[1], 0.0);
        for v in [c[0], c[2]] {
            let scaled = v * 255.0;
            assert!((scaled - scaled.round()).abs() < 1e-9);
        }
    }
}
