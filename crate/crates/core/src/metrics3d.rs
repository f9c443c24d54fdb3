//! Geometric comparison metrics: volumetric IoU via the rescale/align/sample
//! procedure, Chamfer distance, and Hausdorff distance.

use crate::geometry::{normalize_mesh, sample_surface, GeometryError, KdIndex, RayCaster};
use crate::mesh::{PointCloud, TriangleMesh};
use crate::rng::SeededRng;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Metric3dError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no sampled point fell inside either mesh; IoU is undefined")]
    UndefinedIoU,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric3dConfig {
    /// Points thrown into the union AABB for the IoU estimate.
    pub iou_samples: usize,
    /// Surface samples per mesh for Chamfer/Hausdorff.
    pub cd_hd_samples: usize,
    pub seed: u64,
    /// Normalize both meshes before comparing (AABB center to origin,
    /// longest edge to 1).
    pub align: bool,
}

impl Default for Metric3dConfig {
    fn default() -> Self {
        Metric3dConfig {
            iou_samples: 100_000,
            cd_hd_samples: 10_000,
            seed: 0,
            align: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryScores<S> {
    pub iou: S,
    pub chamfer: S,
    pub hausdorff: S,
}

/// Independently normalize both meshes so they are "rescaled to the same
/// size, aligned, and overlaid".
pub fn align_pair<S: Real>(
    gt: &TriangleMesh<S>,
    recon: &TriangleMesh<S>,
) -> Result<(TriangleMesh<S>, TriangleMesh<S>), GeometryError> {
    let (gt_n, _) = normalize_mesh(gt)?;
    let (recon_n, _) = normalize_mesh(recon)?;
    Ok((gt_n, recon_n))
}

/// Monte-Carlo volumetric IoU: sample points uniformly in the union AABB of
/// the (optionally aligned) pair and return |inside both| / |inside either|.
/// Both meshes see identical sample points and identical ray directions, so
/// IoU(m, m) is exactly 1.
pub fn volumetric_iou<S: Real>(
    gt: &TriangleMesh<S>,
    recon: &TriangleMesh<S>,
    cfg: &Metric3dConfig,
) -> Result<S, Metric3dError> {
    let (gt_m, recon_m);
    let (gt_ref, recon_ref) = if cfg.align {
        let pair = align_pair(gt, recon)?;
        gt_m = pair.0;
        recon_m = pair.1;
        (&gt_m, &recon_m)
    } else {
        (gt, recon)
    };

    let gt_box = gt_ref.aabb().ok_or(GeometryError::DegenerateExtent)?;
    let recon_box = recon_ref.aabb().ok_or(GeometryError::DegenerateExtent)?;
    let domain = gt_box.union(&recon_box);

    let gt_caster = RayCaster::build(gt_ref);
    let recon_caster = RayCaster::build(recon_ref);
    let mut rng = SeededRng::new(cfg.seed);

    let mut both = 0u64;
    let mut either = 0u64;
    for _ in 0..cfg.iou_samples {
        let p = [
            rng.range(domain.min[0], domain.max[0]),
            rng.range(domain.min[1], domain.max[1]),
            rng.range(domain.min[2], domain.max[2]),
        ];
        let dirs = [rng.unit_vector(), rng.unit_vector(), rng.unit_vector()];
        let in_gt = gt_caster.is_inside_with_dirs(p, &dirs);
        let in_recon = recon_caster.is_inside_with_dirs(p, &dirs);
        if in_gt && in_recon {
            both += 1;
        }
        if in_gt || in_recon {
            either += 1;
        }
    }
    if either == 0 {
        return Err(Metric3dError::UndefinedIoU);
    }
    Ok(S::of(both as f64 / either as f64))
}

/// Directional mean squared nearest-neighbor distance from `from` into `to`.
fn mean_sq_nn<S: Real>(from: &PointCloud<S>, to: &KdIndex<S>) -> Result<S, GeometryError> {
    let mut acc = S::zero();
    for p in &from.points {
        let (_, d) = to.nearest(*p)?;
        acc += d * d;
    }
    Ok(acc / S::of_usize(from.len()))
}

/// Directional max-min (worst nearest-neighbor) distance.
fn max_nn<S: Real>(from: &PointCloud<S>, to: &KdIndex<S>) -> Result<S, GeometryError> {
    let mut worst = S::zero();
    for p in &from.points {
        let (_, d) = to.nearest(*p)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Chamfer distance: the SUM of the two directional mean squared
/// nearest-neighbor terms.
pub fn chamfer_distance<S: Real>(
    a: &PointCloud<S>,
    b: &PointCloud<S>,
) -> Result<S, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let ka = KdIndex::build(a);
    let kb = KdIndex::build(b);
    Ok(mean_sq_nn(a, &kb)? + mean_sq_nn(b, &ka)?)
}

/// Hausdorff distance: worst-case nearest-neighbor distance, maximized over
/// both directions, plain Euclidean (not squared).
pub fn hausdorff_distance<S: Real>(
    a: &PointCloud<S>,
    b: &PointCloud<S>,
) -> Result<S, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let ka = KdIndex::build(a);
    let kb = KdIndex::build(b);
    Ok(max_nn(a, &kb)?.max(max_nn(b, &ka)?))
}

/// Full geometric comparison: align, sample surfaces, and compute IoU,
/// Chamfer, and Hausdorff in normalized-mesh units.
pub fn evaluate_geometry<S: Real>(
    gt: &TriangleMesh<S>,
    recon: &TriangleMesh<S>,
    cfg: &Metric3dConfig,
) -> Result<GeometryScores<S>, Metric3dError> {
    let (gt_n, recon_n) = if cfg.align {
        align_pair(gt, recon)?
    } else {
        (gt.clone(), recon.clone())
    };

    let mut gt_rng = SeededRng::new(cfg.seed ^ 0x6774_5f73_616d_706c); // gt sample stream
    let mut recon_rng = SeededRng::new(cfg.seed ^ 0x7263_5f73_616d_706c); // recon sample stream
    let gt_cloud = sample_surface(&gt_n, cfg.cd_hd_samples, &mut gt_rng)?;
    let recon_cloud = sample_surface(&recon_n, cfg.cd_hd_samples, &mut recon_rng)?;

    let chamfer = chamfer_distance(&gt_cloud, &recon_cloud)?;
    let hausdorff = hausdorff_distance(&gt_cloud, &recon_cloud)?;

    let iou_cfg = Metric3dConfig {
        align: false, // pair is already aligned above
        ..cfg.clone()
    };
    let iou = volumetric_iou(&gt_n, &recon_n, &iou_cfg)?;

    Ok(GeometryScores {
        iou,
        chamfer,
        hausdorff,
    })
}
