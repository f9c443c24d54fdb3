//! The canonical in-memory mesh and point-cloud types shared by parsers,
//! renderer, and metrics.

use crate::math::{norm3, Aabb, Vec3};
use crate::scalar::Real;

/// Indexed triangle geometry. Immutable by convention once constructed;
/// shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<S> {
    pub vertices: Vec<Vec3<S>>,
    pub faces: Vec<[u32; 3]>,
    /// Per-vertex unit normals, when the source file carried them.
    pub normals: Option<Vec<Vec3<S>>>,
    /// Per-vertex RGB in [0, 1].
    pub colors: Option<Vec<Vec3<S>>>,
}

/// A reason a `TriangleMesh` violates its invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeshInvariantError {
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: u32,
        vertex_count: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteCoordinate(usize),
    #[error("normal count {normals} does not match vertex count {vertices}")]
    NormalCountMismatch { normals: usize, vertices: usize },
    #[error("normal {0} is not unit length")]
    NonUnitNormal(usize),
    #[error("color count {colors} does not match vertex count {vertices}")]
    ColorCountMismatch { colors: usize, vertices: usize },
    #[error("color {0} is outside [0, 1]")]
    ColorOutOfRange(usize),
}

impl<S: Real> TriangleMesh<S> {
    pub fn new(vertices: Vec<Vec3<S>>, faces: Vec<[u32; 3]>) -> Self {
        TriangleMesh {
            vertices,
            faces,
            normals: None,
            colors: None,
        }
    }

    pub fn empty() -> Self {
        TriangleMesh::new(Vec::new(), Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Positions of the three corners of face `f`.
    pub fn triangle(&self, f: usize) -> [Vec3<S>; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn aabb(&self) -> Option<Aabb<S>> {
        Aabb::from_points(self.vertices.iter())
    }

    /// Check every type invariant; parsers call this before handing a mesh out.
    pub fn validate(&self) -> Result<(), MeshInvariantError> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(MeshInvariantError::NonFiniteCoordinate(i));
            }
        }
        let n = self.vertices.len();
        for (f, face) in self.faces.iter().enumerate() {
            for &idx in face {
                if idx as usize >= n {
                    return Err(MeshInvariantError::IndexOutOfRange {
                        face: f,
                        index: idx,
                        vertex_count: n,
                    });
                }
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(MeshInvariantError::NormalCountMismatch {
                    normals: normals.len(),
                    vertices: n,
                });
            }
            let tol = S::of(1e-4);
            for (i, nv) in normals.iter().enumerate() {
                if !nv.iter().all(|c| c.is_finite())
                    || (norm3(*nv) - S::one()).abs() > tol
                {
                    return Err(MeshInvariantError::NonUnitNormal(i));
                }
            }
        }
        if let Some(colors) = &self.colors {
            if colors.len() != n {
                return Err(MeshInvariantError::ColorCountMismatch {
                    colors: colors.len(),
                    vertices: n,
                });
            }
            for (i, c) in colors.iter().enumerate() {
                if !c
                    .iter()
                    .all(|v| v.is_finite() && *v >= S::zero() && *v <= S::one())
                {
                    return Err(MeshInvariantError::ColorOutOfRange(i));
                }
            }
        }
        Ok(())
    }
}

/// Sampled surface points used by Chamfer/Hausdorff and heatmap distances.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<S> {
    pub points: Vec<Vec3<S>>,
}

impl<S: Real> PointCloud<S> {
    pub fn new(points: Vec<Vec3<S>>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
