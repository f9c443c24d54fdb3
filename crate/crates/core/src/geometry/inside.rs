//! Point-in-mesh classification by ray-crossing parity. Three rays are cast
//! in independent random directions; each counts its surface crossings with
//! the Möller-Trumbore test, and the majority parity wins. A small AABB
//! hierarchy over the triangles accelerates the crossing counts without
//! changing them.

use crate::math::{cross3, dot3, sub3, Aabb, Vec3};
use crate::mesh::TriangleMesh;
use crate::rng::SeededRng;
use crate::scalar::Real;

const LEAF_SIZE: usize = 8;

struct BvhNode<S> {
    aabb: Aabb<S>,
    /// Leaf: index of the first triangle in `tri_order`. Internal: index of
    /// the left child (right child is `first + 1` positions later is not
    /// guaranteed, so both are stored).
    first: u32,
    count: u32,
    left: i32,
    right: i32,
}

/// A triangle soup plus its ray-acceleration structure.
pub struct RayCaster<S> {
    tris: Vec<[Vec3<S>; 3]>,
    tri_order: Vec<u32>,
    nodes: Vec<BvhNode<S>>,
    root: i32,
}

impl<S: Real> RayCaster<S> {
    pub fn build(mesh: &TriangleMesh<S>) -> Self {
        let tris: Vec<[Vec3<S>; 3]> = (0..mesh.face_count()).map(|f| mesh.triangle(f)).collect();
        let mut tri_order: Vec<u32> = (0..tris.len() as u32).collect();
        let centroids: Vec<Vec3<S>> = tris
            .iter()
            .map(|t| {
                let third = S::one() / S::of(3.0);
                [
                    (t[0][0] + t[1][0] + t[2][0]) * third,
                    (t[0][1] + t[1][1] + t[2][1]) * third,
                    (t[0][2] + t[1][2] + t[2][2]) * third,
                ]
            })
            .collect();
        let mut nodes = Vec::new();
        let len = tri_order.len();
        let root = if len == 0 {
            -1
        } else {
            build_rec(&tris, &centroids, &mut tri_order, 0, len, &mut nodes)
        };
        RayCaster {
            tris,
            tri_order,
            nodes,
            root,
        }
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len()
    }

    /// Count ray-surface crossings with t > 0.
    pub fn count_crossings(&self, origin: Vec3<S>, dir: Vec3<S>) -> usize {
        if self.root < 0 {
            return 0;
        }
        let inv_dir = [
            S::one() / dir[0],
            S::one() / dir[1],
            S::one() / dir[2],
        ];
        let mut count = 0usize;
        // median splits keep the tree balanced, so 64 levels is far beyond reach
        let mut stack = [0i32; 64];
        let mut top = 0usize;
        stack[top] = self.root;
        top += 1;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top] as usize];
            if !slab_hit(&node.aabb, origin, inv_dir) {
                continue;
            }
            if node.count > 0 {
                let first = node.first as usize;
                for &t in &self.tri_order[first..first + node.count as usize] {
                    let tri = &self.tris[t as usize];
                    if ray_crosses_triangle(origin, dir, tri) {
                        count += 1;
                    }
                }
            } else {
                stack[top] = node.left;
                stack[top + 1] = node.right;
                top += 2;
            }
        }
        count
    }

    /// Parity classification along one ray direction.
    pub fn inside_along(&self, p: Vec3<S>, dir: Vec3<S>) -> bool {
        self.count_crossings(p, dir) % 2 == 1
    }

    /// Majority parity over three random ray directions.
    pub fn is_inside(&self, p: Vec3<S>, rng: &mut SeededRng) -> bool {
        let dirs: [Vec3<S>; 3] = [rng.unit_vector(), rng.unit_vector(), rng.unit_vector()];
        self.is_inside_with_dirs(p, &dirs)
    }

    /// Majority parity with caller-supplied directions. Pair comparisons use
    /// this so both meshes see identical rays for the same sample point.
    pub fn is_inside_with_dirs(&self, p: Vec3<S>, dirs: &[Vec3<S>; 3]) -> bool {
        let votes = dirs
            .iter()
            .filter(|d| self.inside_along(p, **d))
            .count();
        votes >= 2
    }
}

/// Classify a point against a mesh's surface via 3-ray majority parity.
pub fn point_in_mesh<S: Real>(caster: &RayCaster<S>, p: Vec3<S>, rng: &mut SeededRng) -> bool {
    caster.is_inside(p, rng)
}

fn build_rec<S: Real>(
    tris: &[[Vec3<S>; 3]],
    centroids: &[Vec3<S>],
    order: &mut [u32],
    start: usize,
    len: usize,
    nodes: &mut Vec<BvhNode<S>>,
) -> i32 {
    let slice = &mut order[..];
    let aabb = {
        let mut it = slice.iter().flat_map(|&t| tris[t as usize].iter());
        let first = *it.next().expect("non-empty");
        let mut aabb = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            aabb.grow(*p);
        }
        // widen slightly so boundary-exact rays never skip a box a triangle touches
        let pad = aabb.longest_edge().abs() * S::of(1e-9) + S::of(1e-12);
        aabb.inflate(pad)
    };

    if len <= LEAF_SIZE {
        nodes.push(BvhNode {
            aabb,
            first: start as u32,
            count: len as u32,
            left: -1,
            right: -1,
        });
        return (nodes.len() - 1) as i32;
    }

    // split on the longest axis of the centroid bounds at the median
    let cbounds = Aabb::from_points(slice.iter().map(|&t| &centroids[t as usize]))
        .expect("non-empty");
    let ext = cbounds.extents();
    let mut axis = 0usize;
    if ext[1] > ext[axis] {
        axis = 1;
    }
    if ext[2] > ext[axis] {
        axis = 2;
    }
    let mid = len / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis]
            .partial_cmp(&centroids[b as usize][axis])
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });

    let (lo, hi) = slice.split_at_mut(mid);
    let left = build_rec(tris, centroids, lo, start, mid, nodes);
    let right = build_rec(tris, centroids, hi, start + mid, len - mid, nodes);
    nodes.push(BvhNode {
        aabb,
        first: 0,
        count: 0,
        left,
        right,
    });
    (nodes.len() - 1) as i32
}

fn slab_hit<S: Real>(aabb: &Aabb<S>, origin: Vec3<S>, inv_dir: Vec3<S>) -> bool {
    let mut tmin = S::zero();
    let mut tmax = S::infinity();
    for k in 0..3 {
        let t0 = (aabb.min[k] - origin[k]) * inv_dir[k];
        let t1 = (aabb.max[k] - origin[k]) * inv_dir[k];
        // Float::min/max ignore NaN from 0 * inf, keeping the test conservative
        let lo = t0.min(t1);
        let hi = t0.max(t1);
        tmin = tmin.max(lo);
        tmax = tmax.min(hi);
    }
    tmin <= tmax
}

/// Möller-Trumbore, counting strictly-positive-t crossings.
fn ray_crosses_triangle<S: Real>(origin: Vec3<S>, dir: Vec3<S>, tri: &[Vec3<S>; 3]) -> bool {
    let e1 = sub3(tri[1], tri[0]);
    let e2 = sub3(tri[2], tri[0]);
    let pvec = cross3(dir, e2);
    let det = dot3(e1, pvec);
    if det.abs() < S::of(1e-14) {
        return false; // parallel ray or degenerate triangle
    }
    let inv_det = S::one() / det;
    let tvec = sub3(origin, tri[0]);
    let u = dot3(tvec, pvec) * inv_det;
    if u < S::zero() || u > S::one() {
        return false;
    }
    let qvec = cross3(tvec, e1);
    let v = dot3(dir, qvec) * inv_det;
    if v < S::zero() || u + v > S::one() {
        return false;
    }
    let t = dot3(e2, qvec) * inv_det;
    t > S::zero()
}
