//! Error-colored reconstructions: each vertex of the reconstruction is
//! colored by its nearest-neighbor distance to a dense sample of the
//! ground-truth surface, normalized per object, on a blue (low) to red
//! (high) ramp.

use crate::geometry::{sample_surface, GeometryError, KdIndex};
use crate::mesh::TriangleMesh;
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Color `recon`'s vertices by distance to the ground-truth surface. The pair
/// is expected to be pre-aligned (see `metrics3d::align_pair`); geometry is
/// passed through untouched, only colors are added.
pub fn colorize_error<S: Real>(
    recon: &TriangleMesh<S>,
    gt: &TriangleMesh<S>,
    gt_samples: usize,
    rng: &mut SeededRng,
) -> Result<TriangleMesh<S>, GeometryError> {
    if recon.vertices.is_empty() {
        return Err(GeometryError::DegenerateExtent);
    }
    let cloud = sample_surface(gt, gt_samples.max(1), rng)?;
    let index = KdIndex::build(&cloud);

    let mut distances = Vec::with_capacity(recon.vertex_count());
    for v in &recon.vertices {
        let (_, d) = index.nearest(*v)?;
        distances.push(d);
    }
    let d_min = distances.iter().fold(S::infinity(), |a, d| a.min(*d));
    let d_max = distances.iter().fold(S::zero(), |a, d| a.max(*d));
    let span = d_max - d_min;

    let mut out = recon.clone();
    out.colors = Some(
        distances
            .iter()
            .map(|d| {
                // degenerate range maps everything to blue
                let t = if span > S::zero() {
                    (*d - d_min) / span
                } else {
                    S::zero()
                };
                [t, S::zero(), S::one() - t]
            })
            .collect(),
    );
    Ok(out)
}
