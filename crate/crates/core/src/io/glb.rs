//! Binary glTF (GLB) parser. Reads the 12-byte container header, the JSON
//! chunk, and the BIN chunk, then concatenates every TRIANGLES-mode primitive
//! reachable from the scene graph with node transforms baked into vertex
//! positions. Materials, textures, animations, and extensions are ignored.

use serde::Deserialize;

use super::{malformed, IoError, GLB_MAGIC};
use crate::math::{mat4_from_trs, mat4_identity, mat4_mul, mat4_transform_point, Mat4};
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

const CHUNK_JSON: u32 = 0x4E4F_534A; // "JSON"
const CHUNK_BIN: u32 = 0x004E_4942; // "BIN\0"

const COMPONENT_U8: u32 = 5121;
const COMPONENT_U16: u32 = 5123;
const COMPONENT_U32: u32 = 5125;
const COMPONENT_F32: u32 = 5126;
const MODE_TRIANGLES: u32 = 4;

#[derive(Debug, Deserialize, Default)]
struct Gltf {
    #[serde(default)]
    scene: Option<usize>,
    #[serde(default)]
    scenes: Vec<Scene>,
    #[serde(default)]
    nodes: Vec<Node>,
    #[serde(default)]
    meshes: Vec<GltfMesh>,
    #[serde(default)]
    accessors: Vec<Accessor>,
    #[serde(default, rename = "bufferViews")]
    buffer_views: Vec<BufferView>,
    #[serde(default)]
    buffers: Vec<Buffer>,
}

#[derive(Debug, Deserialize, Default)]
struct Scene {
    #[serde(default)]
    nodes: Vec<usize>,
}

#[derive(Debug, Deserialize, Default)]
struct Node {
    #[serde(default)]
    mesh: Option<usize>,
    #[serde(default)]
    children: Vec<usize>,
    #[serde(default)]
    matrix: Option<[f64; 16]>,
    #[serde(default)]
    translation: Option<[f64; 3]>,
    #[serde(default)]
    rotation: Option<[f64; 4]>,
    #[serde(default)]
    scale: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize, Default)]
struct GltfMesh {
    #[serde(default)]
    primitives: Vec<Primitive>,
}

#[derive(Debug, Deserialize, Default)]
struct Primitive {
    #[serde(default)]
    attributes: std::collections::BTreeMap<String, usize>,
    #[serde(default)]
    indices: Option<usize>,
    #[serde(default)]
    mode: Option<u32>,
}

#[derive(Debug, Deserialize, Default)]
struct Accessor {
    #[serde(default, rename = "bufferView")]
    buffer_view: Option<usize>,
    #[serde(default, rename = "byteOffset")]
    byte_offset: usize,
    #[serde(rename = "componentType")]
    component_type: u32,
    count: usize,
    #[serde(rename = "type")]
    ty: String,
    #[serde(default)]
    sparse: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize, Default)]
struct BufferView {
    buffer: usize,
    #[serde(default, rename = "byteOffset")]
    byte_offset: usize,
    #[serde(rename = "byteLength")]
    byte_length: usize,
    #[serde(default, rename = "byteStride")]
    byte_stride: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
struct Buffer {
    #[serde(default)]
    uri: Option<String>,
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, IoError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| IoError::TruncatedChunk(format!("need 4 bytes at offset {at}")))
}

struct Chunks<'a> {
    json: &'a [u8],
    bin: Option<&'a [u8]>,
}

fn split_chunks(bytes: &[u8]) -> Result<Chunks<'_>, IoError> {
    if bytes.len() < 12 {
        return Err(IoError::TruncatedChunk(
            "container shorter than 12-byte header".into(),
        ));
    }
    if read_u32(bytes, 0)? != GLB_MAGIC {
        return Err(IoError::BadMagic);
    }
    let version = read_u32(bytes, 4)?;
    if version != 2 {
        return Err(IoError::UnsupportedVersion(version));
    }
    let declared = read_u32(bytes, 8)? as usize;
    if declared != bytes.len() {
        return Err(IoError::TruncatedChunk(format!(
            "header declares {declared} bytes but input has {}",
            bytes.len()
        )));
    }

    let mut offset = 12usize;
    let mut json = None;
    let mut bin = None;
    while offset < bytes.len() {
        let len = read_u32(bytes, offset)? as usize;
        let ty = read_u32(bytes, offset + 4)?;
        let start = offset + 8;
        let end = start
            .checked_add(len)
            .ok_or_else(|| IoError::TruncatedChunk("chunk length overflow".into()))?;
        let payload = bytes
            .get(start..end)
            .ok_or_else(|| IoError::TruncatedChunk(format!("chunk at {offset} overruns input")))?;
        match ty {
            CHUNK_JSON if json.is_none() => json = Some(payload),
            CHUNK_BIN if bin.is_none() => bin = Some(payload),
            _ => {} // unknown chunks are skipped per the container spec
        }
        offset = end;
    }
    let json = json.ok_or_else(|| malformed("GLB", "missing JSON chunk"))?;
    Ok(Chunks { json, bin })
}

fn node_local_matrix(node: &Node) -> Mat4<f64> {
    if let Some(m) = node.matrix {
        m
    } else {
        mat4_from_trs(
            node.translation.unwrap_or([0.0; 3]),
            node.rotation.unwrap_or([0.0, 0.0, 0.0, 1.0]),
            node.scale.unwrap_or([1.0; 3]),
        )
    }
}

struct AccessorData<'a> {
    bytes: &'a [u8],
    stride: usize,
    count: usize,
    component_type: u32,
    component_width: usize,
    components: usize,
}

fn component_width(component_type: u32) -> Result<usize, IoError> {
    Ok(match component_type {
        COMPONENT_U8 => 1,
        COMPONENT_U16 => 2,
        COMPONENT_U32 | COMPONENT_F32 => 4,
        other => return Err(malformed("GLB", format!("unsupported componentType {other}"))),
    })
}

fn component_count(ty: &str) -> Result<usize, IoError> {
    Ok(match ty {
        "SCALAR" => 1,
        "VEC2" => 2,
        "VEC3" => 3,
        "VEC4" => 4,
        other => return Err(malformed("GLB", format!("unsupported accessor type {other:?}"))),
    })
}

fn resolve_accessor<'a>(
    gltf: &Gltf,
    bin: Option<&'a [u8]>,
    index: usize,
) -> Result<AccessorData<'a>, IoError> {
    let acc = gltf
        .accessors
        .get(index)
        .ok_or_else(|| malformed("GLB", format!("accessor {index} out of range")))?;
    if acc.sparse.is_some() {
        return Err(malformed("GLB", "sparse accessors are unsupported"));
    }
    let view_idx = acc
        .buffer_view
        .ok_or_else(|| malformed("GLB", "accessor without bufferView"))?;
    let view = gltf
        .buffer_views
        .get(view_idx)
        .ok_or_else(|| malformed("GLB", format!("bufferView {view_idx} out of range")))?;
    let buffer = gltf
        .buffers
        .get(view.buffer)
        .ok_or_else(|| malformed("GLB", format!("buffer {} out of range", view.buffer)))?;
    if buffer.uri.is_some() {
        return Err(malformed("GLB", "external buffer URIs are unsupported"));
    }
    let bin = bin.ok_or_else(|| {
        IoError::TruncatedChunk("accessor references BIN chunk but none is present".into())
    })?;

    let width = component_width(acc.component_type)?;
    let components = component_count(&acc.ty)?;
    let elem_size = width * components;
    let stride = view.byte_stride.unwrap_or(elem_size);
    if stride < elem_size {
        return Err(malformed("GLB", "byteStride smaller than element size"));
    }

    let view_end = view
        .byte_offset
        .checked_add(view.byte_length)
        .ok_or_else(|| IoError::TruncatedChunk("bufferView range overflow".into()))?;
    let view_bytes = bin
        .get(view.byte_offset..view_end)
        .ok_or_else(|| IoError::TruncatedChunk("bufferView overruns BIN chunk".into()))?;

    let needed = if acc.count == 0 {
        0
    } else {
        (acc.count - 1)
            .checked_mul(stride)
            .and_then(|v| v.checked_add(elem_size))
            .and_then(|v| v.checked_add(acc.byte_offset))
            .ok_or_else(|| IoError::TruncatedChunk("accessor range overflow".into()))?
    };
    if needed > view_bytes.len() || acc.byte_offset > view_bytes.len() {
        return Err(IoError::TruncatedChunk(
            "accessor overruns its bufferView".into(),
        ));
    }

    Ok(AccessorData {
        bytes: &view_bytes[acc.byte_offset..],
        stride,
        count: acc.count,
        component_type: acc.component_type,
        component_width: width,
        components,
    })
}

fn read_positions(data: &AccessorData<'_>) -> Result<Vec<[f32; 3]>, IoError> {
    if data.component_type != COMPONENT_F32 || data.components != 3 {
        return Err(malformed("GLB", "POSITION accessor must be float VEC3"));
    }
    let mut out = Vec::with_capacity(data.count.min(1 << 20));
    for i in 0..data.count {
        let base = i * data.stride;
        let mut p = [0f32; 3];
        for (k, slot) in p.iter_mut().enumerate() {
            let at = base + k * 4;
            let raw = &data.bytes[at..at + 4];
            *slot = f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]);
        }
        out.push(p);
    }
    Ok(out)
}

fn read_indices(data: &AccessorData<'_>) -> Result<Vec<u32>, IoError> {
    if data.components != 1 {
        return Err(malformed("GLB", "index accessor must be SCALAR"));
    }
    let mut out = Vec::with_capacity(data.count.min(1 << 20));
    for i in 0..data.count {
        let at = i * data.stride;
        let raw = &data.bytes[at..at + data.component_width];
        let v = match data.component_type {
            COMPONENT_U8 => u32::from(raw[0]),
            COMPONENT_U16 => u32::from(u16::from_le_bytes([raw[0], raw[1]])),
            COMPONENT_U32 => u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]),
            other => {
                return Err(malformed(
                    "GLB",
                    format!("unsupported index componentType {other}"),
                ))
            }
        };
        out.push(v);
    }
    Ok(out)
}

fn append_primitive<S: Real>(
    gltf: &Gltf,
    bin: Option<&[u8]>,
    prim: &Primitive,
    transform: &Mat4<f64>,
    mesh: &mut TriangleMesh<S>,
) -> Result<(), IoError> {
    let mode = prim.mode.unwrap_or(MODE_TRIANGLES);
    if mode != MODE_TRIANGLES {
        return Err(IoError::NonTriangleMode(mode));
    }
    let pos_accessor = *prim
        .attributes
        .get("POSITION")
        .ok_or(IoError::MissingPositions)?;
    let positions = read_positions(&resolve_accessor(gltf, bin, pos_accessor)?)?;

    let indices: Vec<u32> = match prim.indices {
        Some(idx) => read_indices(&resolve_accessor(gltf, bin, idx)?)?,
        None => (0..positions.len() as u32).collect(),
    };
    if !indices.len().is_multiple_of(3) {
        return Err(malformed("GLB", "triangle index count is not a multiple of 3"));
    }

    let base = mesh.vertices.len() as u64;
    for p in &positions {
        let h = mat4_transform_point(transform, [f64::from(p[0]), f64::from(p[1]), f64::from(p[2])]);
        mesh.vertices.push([S::of(h[0]), S::of(h[1]), S::of(h[2])]);
    }
    for tri in indices.chunks_exact(3) {
        let mut face = [0u32; 3];
        for (k, &idx) in tri.iter().enumerate() {
            if idx as usize >= positions.len() {
                return Err(IoError::IndexOutOfRange {
                    index: i64::from(idx),
                    vertex_count: positions.len(),
                });
            }
            let global = base + u64::from(idx);
            if global > u64::from(u32::MAX) {
                return Err(malformed("GLB", "combined mesh exceeds u32 index space"));
            }
            face[k] = global as u32;
        }
        mesh.faces.push(face);
    }
    Ok(())
}

fn walk_node<S: Real>(
    gltf: &Gltf,
    bin: Option<&[u8]>,
    node_idx: usize,
    parent: &Mat4<f64>,
    mesh: &mut TriangleMesh<S>,
    depth: usize,
) -> Result<(), IoError> {
    if depth > 256 {
        return Err(malformed("GLB", "node graph too deep (cycle?)"));
    }
    let node = gltf
        .nodes
        .get(node_idx)
        .ok_or_else(|| malformed("GLB", format!("node {node_idx} out of range")))?;
    let global = mat4_mul(parent, &node_local_matrix(node));
    if let Some(mesh_idx) = node.mesh {
        let gmesh = gltf
            .meshes
            .get(mesh_idx)
            .ok_or_else(|| malformed("GLB", format!("mesh {mesh_idx} out of range")))?;
        for prim in &gmesh.primitives {
            append_primitive(gltf, bin, prim, &global, mesh)?;
        }
    }
    for &child in &node.children {
        walk_node(gltf, bin, child, &global, mesh, depth + 1)?;
    }
    Ok(())
}

pub fn parse_glb<S: Real>(bytes: &[u8]) -> Result<TriangleMesh<S>, IoError> {
    let chunks = split_chunks(bytes)?;
    let gltf: Gltf = serde_json::from_slice(chunks.json)
        .map_err(|e| malformed("GLB", format!("JSON chunk: {e}")))?;

    let mut mesh = TriangleMesh::empty();
    let identity = mat4_identity::<f64>();

    let scene_roots: Vec<usize> = if !gltf.scenes.is_empty() {
        let idx = gltf.scene.unwrap_or(0);
        gltf.scenes
            .get(idx)
            .ok_or_else(|| malformed("GLB", format!("scene {idx} out of range")))?
            .nodes
            .clone()
    } else if !gltf.nodes.is_empty() {
        // no scene: treat nodes that are nobody's child as roots
        let mut is_child = vec![false; gltf.nodes.len()];
        for n in &gltf.nodes {
            for &c in &n.children {
                if let Some(flag) = is_child.get_mut(c) {
                    *flag = true;
                }
            }
        }
        (0..gltf.nodes.len()).filter(|&i| !is_child[i]).collect()
    } else {
        Vec::new()
    };

    if scene_roots.is_empty() && gltf.nodes.is_empty() {
        // no scene graph at all: concatenate all meshes with identity transform
        for gmesh in &gltf.meshes {
            for prim in &gmesh.primitives {
                append_primitive(&gltf, chunks.bin, prim, &identity, &mut mesh)?;
            }
        }
    } else {
        for root in scene_roots {
            walk_node(&gltf, chunks.bin, root, &identity, &mut mesh, 0)?;
        }
    }

    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic() {
        let mut bytes = vec![0u8; 16];
        bytes[..4].copy_from_slice(b"NOPE");
        assert!(matches!(parse_glb::<f64>(&bytes), Err(IoError::BadMagic)));
    }

    #[test]
    fn version_one_rejected() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"glTF");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&12u32.to_le_bytes());
        assert!(matches!(
            parse_glb::<f64>(&bytes),
            Err(IoError::UnsupportedVersion(1))
        ));
    }

    #[test]
    fn short_input_is_truncated() {
        assert!(matches!(
            parse_glb::<f64>(b"glTF"),
            Err(IoError::TruncatedChunk(_))
        ));
    }

    #[test]
    fn declared_length_must_match() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"glTF");
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&999u32.to_le_bytes());
        assert!(matches!(
            parse_glb::<f64>(&bytes),
            Err(IoError::TruncatedChunk(_))
        ));
    }
}
