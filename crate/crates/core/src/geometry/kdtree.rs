//! Balanced kd-tree over a point cloud for nearest-neighbor queries.
//! Query results match an exhaustive linear scan in distance, bit for bit
//! (ties in distance may resolve to a different point index).

use super::GeometryError;
use crate::math::{dist_sq3, Vec3};
use crate::mesh::PointCloud;
use crate::scalar::Real;

struct Node {
    /// Index into the original cloud.
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

pub struct KdIndex<S> {
    points: Vec<Vec3<S>>,
    nodes: Vec<Node>,
    root: i32,
}

impl<S: Real> KdIndex<S> {
    pub fn build(cloud: &PointCloud<S>) -> Self {
        let points = cloud.points.clone();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_rec(&points, &mut order, 0, &mut nodes);
        KdIndex {
            points,
            nodes,
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec3<S> {
        self.points[i]
    }

    /// Index and Euclidean distance of the nearest indexed point.
    pub fn nearest(&self, query: Vec3<S>) -> Result<(usize, S), GeometryError> {
        if self.points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        let mut best_idx = 0usize;
        let mut best_d2 = S::infinity();
        self.search(self.root, query, &mut best_idx, &mut best_d2);
        Ok((best_idx, best_d2.sqrt()))
    }

    fn search(&self, node: i32, query: Vec3<S>, best_idx: &mut usize, best_d2: &mut S) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.points[n.point as usize];
        let d2 = dist_sq3(p, query);
        if d2 < *best_d2 {
            *best_d2 = d2;
            *best_idx = n.point as usize;
        }
        let axis = n.axis as usize;
        let delta = query[axis] - p[axis];
        let (near, far) = if delta < S::zero() {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, query, best_idx, best_d2);
        if delta * delta < *best_d2 {
            self.search(far, query, best_idx, best_d2);
        }
    }
}

fn build_rec<S: Real>(
    points: &[Vec3<S>],
    order: &mut [u32],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> i32 {
    if order.is_empty() {
        return -1;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });
    let pivot = order[mid];
    let (lo, rest) = order.split_at_mut(mid);
    let hi = &mut rest[1..];
    let left = build_rec(points, lo, depth + 1, nodes);
    let right = build_rec(points, hi, depth + 1, nodes);
    nodes.push(Node {
        point: pivot,
        axis: axis as u8,
        left,
        right,
    });
    (nodes.len() - 1) as i32
}
