//! Shared geometric kernel: canonical mesh normalization, area-weighted
//! surface sampling, spatial indexing, and point-in-mesh classification.

mod inside;
mod kdtree;

pub use inside::{point_in_mesh, RayCaster};
pub use kdtree::KdIndex;

use crate::math::{add3, cross3, dist_sq3, scale3, sub3, triangle_area, Vec3};
use crate::mesh::{PointCloud, TriangleMesh};
use crate::rng::SeededRng;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("mesh has zero extent along every axis")]
    DegenerateExtent,
    #[error("mesh has no sampleable surface area")]
    NoSurface,
    #[error("operation requires a non-empty point cloud")]
    EmptyCloud,
}

/// Uniform scale followed by translation: `p' = scale * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform<S> {
    pub scale: S,
    pub translation: Vec3<S>,
}

impl<S: Real> SimilarityTransform<S> {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: S::one(),
            translation: [S::zero(); 3],
        }
    }

    pub fn apply(&self, p: Vec3<S>) -> Vec3<S> {
        add3(scale3(p, self.scale), self.translation)
    }

    pub fn inverse(&self) -> Self {
        let inv = S::one() / self.scale;
        SimilarityTransform {
            scale: inv,
            translation: scale3(self.translation, -inv),
        }
    }
}

/// Rescale and recenter so the axis-aligned bounding box is centered at the
/// origin with its longest edge equal to 1. Vertices are computed as
/// `(v - center) / extent`, which keeps the result invariant under exact
/// similarity transforms of the input.
pub fn normalize_mesh<S: Real>(
    mesh: &TriangleMesh<S>,
) -> Result<(TriangleMesh<S>, SimilarityTransform<S>), GeometryError> {
    let aabb = mesh.aabb().ok_or(GeometryError::DegenerateExtent)?;
    let extent = aabb.longest_edge();
    if extent <= S::zero() {
        return Err(GeometryError::DegenerateExtent);
    }
    let center = aabb.center();

    let mut out = mesh.clone();
    for v in &mut out.vertices {
        *v = [
            (v[0] - center[0]) / extent,
            (v[1] - center[1]) / extent,
            (v[2] - center[2]) / extent,
        ];
    }

    let scale = S::one() / extent;
    let transform = SimilarityTransform {
        scale,
        translation: [
            -(center[0] / extent),
            -(center[1] / extent),
            -(center[2] / extent),
        ],
    };
    Ok((out, transform))
}

/// Cumulative area table for area-proportional triangle selection.
/// Triangles with area below 1e-12 of the total are excluded.
fn cumulative_areas<S: Real>(mesh: &TriangleMesh<S>) -> Result<Vec<S>, GeometryError> {
    let mut areas: Vec<S> = Vec::with_capacity(mesh.face_count());
    let mut total = S::zero();
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.triangle(f);
        let area = triangle_area(a, b, c);
        areas.push(area);
        total += area;
    }
    if !(total > S::zero()) || !total.is_finite() {
        return Err(GeometryError::NoSurface);
    }
    let floor = total * S::of(1e-12);
    let mut cumsum = Vec::with_capacity(areas.len());
    let mut acc = S::zero();
    for area in &areas {
        if *area >= floor {
            acc += *area;
        }
        cumsum.push(acc);
    }
    if !(acc > S::zero()) {
        return Err(GeometryError::NoSurface);
    }
    Ok(cumsum)
}

/// Draw `n` points on the surface, triangles chosen with probability
/// proportional to area and positions uniform-barycentric within each.
pub fn sample_surface<S: Real>(
    mesh: &TriangleMesh<S>,
    n: usize,
    rng: &mut SeededRng,
) -> Result<PointCloud<S>, GeometryError> {
    let cumsum = cumulative_areas(mesh)?;
    let total = *cumsum.last().expect("non-empty by construction");

    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.uniform::<S>() * total;
        let tri = match cumsum.binary_search_by(|probe| {
            probe.partial_cmp(&target).expect("finite areas")
        }) {
            Ok(i) => i,
            Err(i) => i,
        }
        .min(cumsum.len() - 1);

        let [a, b, c] = mesh.triangle(tri);
        let mut r1 = rng.uniform::<S>();
        let mut r2 = rng.uniform::<S>();
        if r1 + r2 > S::one() {
            r1 = S::one() - r1;
            r2 = S::one() - r2;
        }
        let p = add3(
            a,
            add3(scale3(sub3(b, a), r1), scale3(sub3(c, a), r2)),
        );
        points.push(p);
    }
    Ok(PointCloud::new(points))
}

/// Exhaustive nearest-neighbor scan; the oracle twin of [`KdIndex::nearest`].
pub fn nearest_linear<S: Real>(
    points: &[Vec3<S>],
    query: Vec3<S>,
) -> Result<(usize, S), GeometryError> {
    let mut best: Option<(usize, S)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = dist_sq3(*p, query);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, d)| (i, d.sqrt())).ok_or(GeometryError::EmptyCloud)
}

/// Face normal (unnormalized) oriented by winding.
pub fn face_normal<S: Real>(a: Vec3<S>, b: Vec3<S>, c: Vec3<S>) -> Vec3<S> {
    cross3(sub3(b, a), sub3(c, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn normalize_cube_spanning_0_2() {
        let mesh = shapes::cuboid::<f64>([0.0, 0.0, 0.0], [2.0, 2.0, 2.0]);
        let (norm, t) = normalize_mesh(&mesh).unwrap();
        let aabb = norm.aabb().unwrap();
        assert_eq!(aabb.min, [-0.5, -0.5, -0.5]);
        assert_eq!(aabb.max, [0.5, 0.5, 0.5]);
        assert_eq!(t.scale, 0.5);
        assert_eq!(t.translation, [-0.5, -0.5, -0.5]);
    }

    #[test]
    fn normalize_is_a_fixpoint() {
        let mesh = shapes::unit_cube::<f64>();
        let (norm, t) = normalize_mesh(&mesh).unwrap();
        assert!((t.scale - 1.0).abs() < 1e-12);
        for k in 0..3 {
            assert!(t.translation[k].abs() < 1e-12);
        }
        for (a, b) in norm.vertices.iter().zip(mesh.vertices.iter()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_flat_mesh_keeps_zero_axis() {
        let mesh = TriangleMesh::<f64>::new(
            vec![[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [4.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        );
        let (norm, _) = normalize_mesh(&mesh).unwrap();
        let aabb = norm.aabb().unwrap();
        assert_eq!(aabb.longest_edge(), 1.0);
        assert_eq!(aabb.extents()[2], 0.0);
        assert!((aabb.extents()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalize_single_point_degenerate() {
        let mesh = TriangleMesh::<f64>::new(vec![[3.0, 3.0, 3.0]], vec![]);
        assert_eq!(normalize_mesh(&mesh), Err(GeometryError::DegenerateExtent));
    }

    #[test]
    fn transform_roundtrips_to_identity() {
        let mesh = shapes::cuboid::<f64>([-1.0, 2.0, 0.5], [5.0, 3.0, 9.0]);
        let (_, t) = normalize_mesh(&mesh).unwrap();
        let inv = t.inverse();
        for &p in &mesh.vertices {
            let q = inv.apply(t.apply(p));
            for k in 0..3 {
                let scale = p[k].abs().max(1.0);
                assert!((q[k] - p[k]).abs() / scale < 1e-9);
            }
        }
    }

    #[test]
    fn sample_zero_points_is_empty() {
        let mesh = shapes::unit_cube::<f64>();
        let mut rng = SeededRng::new(1);
        let cloud = sample_surface(&mesh, 0, &mut rng).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn samples_lie_on_single_triangle() {
        let mesh = TriangleMesh::<f64>::new(
            vec![[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [0.0, 2.0, 1.0]],
            vec![[0, 1, 2]],
        );
        let mut rng = SeededRng::new(3);
        let cloud = sample_surface(&mesh, 500, &mut rng).unwrap();
        for p in &cloud.points {
            assert!((p[2] - 1.0).abs() < 1e-9); // on the plane
            // inside: barycentric coords of this right triangle
            let u = p[0] / 2.0;
            let v = p[1] / 2.0;
            assert!(u >= -1e-9 && v >= -1e-9 && u + v <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let mesh = shapes::unit_cube::<f64>();
        let a = sample_surface(&mesh, 100, &mut SeededRng::new(9)).unwrap();
        let b = sample_surface(&mesh, 100, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_only_mesh_has_no_surface() {
        let mesh = TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 2]],
        );
        let mut rng = SeededRng::new(1);
        assert_eq!(
            sample_surface::<f64>(&mesh, 10, &mut rng),
            Err(GeometryError::NoSurface)
        );
    }
}
