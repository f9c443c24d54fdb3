//! Shared fixtures for the integration suites: a reference GLB assembled
//! byte-by-byte from the published container layout (independent of the
//! parser under test), plus mesh helpers.

#![allow(dead_code)]

use recon_eval::mesh::TriangleMesh;

/// Authored positions of the reference single-triangle GLB.
pub const GLB_TRIANGLE_POSITIONS: [[f32; 3]; 3] =
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

/// Assemble a minimal single-triangle GLB: 12-byte header, JSON chunk
/// (0x4E4F534A) padded with spaces, BIN chunk (0x004E4942) padded with zeros.
/// Positions float32 VEC3, indices uint16.
pub fn reference_triangle_glb() -> Vec<u8> {
    let json = concat!(
        r#"{"asset":{"version":"2.0"},"scene":0,"scenes":[{"nodes":[0]}],"#,
        r#""nodes":[{"mesh":0}],"#,
        r#""meshes":[{"primitives":[{"attributes":{"POSITION":0},"indices":1,"mode":4}]}],"#,
        r#""accessors":[{"bufferView":0,"componentType":5126,"count":3,"type":"VEC3"},"#,
        r#"{"bufferView":1,"componentType":5123,"count":3,"type":"SCALAR"}],"#,
        r#""bufferViews":[{"buffer":0,"byteOffset":0,"byteLength":36},"#,
        r#"{"buffer":0,"byteOffset":36,"byteLength":6}],"#,
        r#""buffers":[{"byteLength":44}]}"#
    );

    let mut json_bytes = json.as_bytes().to_vec();
    while json_bytes.len() % 4 != 0 {
        json_bytes.push(b' ');
    }

    let mut bin = Vec::new();
    for p in &GLB_TRIANGLE_POSITIONS {
        for c in p {
            bin.extend_from_slice(&c.to_le_bytes());
        }
    }
    for idx in [0u16, 1, 2] {
        bin.extend_from_slice(&idx.to_le_bytes());
    }
    while bin.len() % 4 != 0 {
        bin.push(0);
    }

    let total = 12 + 8 + json_bytes.len() + 8 + bin.len();
    let mut glb = Vec::with_capacity(total);
    glb.extend_from_slice(b"glTF");
    glb.extend_from_slice(&2u32.to_le_bytes());
    glb.extend_from_slice(&(total as u32).to_le_bytes());
    glb.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    glb.extend_from_slice(&0x4E4F_534Au32.to_le_bytes());
    glb.extend_from_slice(&json_bytes);
    glb.extend_from_slice(&(bin.len() as u32).to_le_bytes());
    glb.extend_from_slice(&0x004E_4942u32.to_le_bytes());
    glb.extend_from_slice(&bin);
    glb
}

/// Wrap arbitrary JSON + BIN payloads in a well-formed GLB container.
pub fn build_glb(json: &str, bin: &[u8]) -> Vec<u8> {
    let mut json_bytes = json.as_bytes().to_vec();
    while json_bytes.len() % 4 != 0 {
        json_bytes.push(b' ');
    }
    let mut bin_bytes = bin.to_vec();
    while bin_bytes.len() % 4 != 0 {
        bin_bytes.push(0);
    }
    let total = 12 + 8 + json_bytes.len() + if bin.is_empty() { 0 } else { 8 + bin_bytes.len() };
    let mut glb = Vec::with_capacity(total);
    glb.extend_from_slice(b"glTF");
    glb.extend_from_slice(&2u32.to_le_bytes());
    glb.extend_from_slice(&(total as u32).to_le_bytes());
    glb.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    glb.extend_from_slice(&0x4E4F_534Au32.to_le_bytes());
    glb.extend_from_slice(&json_bytes);
    if !bin.is_empty() {
        glb.extend_from_slice(&(bin_bytes.len() as u32).to_le_bytes());
        glb.extend_from_slice(&0x004E_4942u32.to_le_bytes());
        glb.extend_from_slice(&bin_bytes);
    }
    glb
}

/// Snap coordinates to a dyadic grid (2^-16) so scaling by small integers and
/// shifting by coarse dyadics stays exact in f64.
pub fn quantize_mesh(mesh: &mut TriangleMesh<f64>) {
    let grid = (1u64 << 16) as f64;
    for v in &mut mesh.vertices {
        for c in v.iter_mut() {
            *c = (*c * grid).round() / grid;
        }
    }
}

/// Apply `p -> s * p + t` to every vertex.
pub fn scale_translate(mesh: &TriangleMesh<f64>, s: f64, t: [f64; 3]) -> TriangleMesh<f64> {
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        for k in 0..3 {
            v[k] = v[k] * s + t[k];
        }
    }
    out
}
