//! Procedural test shapes: cuboids and icospheres. Handy for demos and used
//! heavily by the test suites as analytically-known geometry.

use std::collections::HashMap;

use crate::math::{normalize3, scale3, Vec3};
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

/// Axis-aligned box between `min` and `max`, 12 triangles wound outward.
pub fn cuboid<S: Real>(min: Vec3<S>, max: Vec3<S>) -> TriangleMesh<S> {
    let [x0, y0, z0] = min;
    let [x1, y1, z1] = max;
    let vertices = vec![
        [x0, y0, z0],
        [x1, y0, z0],
        [x1, y1, z0],
        [x0, y1, z0],
        [x0, y0, z1],
        [x1, y0, z1],
        [x1, y1, z1],
        [x0, y1, z1],
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2], // z = z0
        [4, 5, 6],
        [4, 6, 7], // z = z1
        [0, 1, 5],
        [0, 5, 4], // y = y0
        [2, 3, 7],
        [2, 7, 6], // y = y1
        [1, 2, 6],
        [1, 6, 5], // x = x1
        [3, 0, 4],
        [3, 4, 7], // x = x0
    ];
    TriangleMesh::new(vertices, faces)
}

/// Unit cube centered at the origin (side length 1).
pub fn unit_cube<S: Real>() -> TriangleMesh<S> {
    let h = S::of(0.5);
    cuboid([-h, -h, -h], [h, h, h])
}

/// Icosphere: an icosahedron subdivided `subdivisions` times, vertices
/// projected onto the sphere of the given radius.
pub fn icosphere<S: Real>(subdivisions: u32, radius: S) -> TriangleMesh<S> {
    // golden-ratio icosahedron
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut vertices: Vec<Vec3<S>> = raw
        .iter()
        .map(|p| normalize3([S::of(p[0]), S::of(p[1]), S::of(p[2])]))
        .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint_index(a, b, &mut vertices, &mut midpoint);
            let bc = midpoint_index(b, c, &mut vertices, &mut midpoint);
            let ca = midpoint_index(c, a, &mut vertices, &mut midpoint);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    for v in &mut vertices {
        *v = scale3(normalize3(*v), radius);
    }
    TriangleMesh::new(vertices, faces)
}

fn midpoint_index<S: Real>(
    a: u32,
    b: u32,
    vertices: &mut Vec<Vec3<S>>,
    cache: &mut HashMap<(u32, u32), u32>,
) -> u32 {
    let key = if a < b { (a, b) } else { (b, a) };
    if let Some(&idx) = cache.get(&key) {
        return idx;
    }
    let pa = vertices[a as usize];
    let pb = vertices[b as usize];
    let mid = normalize3([
        (pa[0] + pb[0]) * S::of(0.5),
        (pa[1] + pb[1]) * S::of(0.5),
        (pa[2] + pb[2]) * S::of(0.5),
    ]);
    let idx = vertices.len() as u32;
    vertices.push(mid);
    cache.insert(key, idx);
    idx
}
