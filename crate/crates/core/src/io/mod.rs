//! Mesh file parsing and serialization: OBJ, PLY (ascii + binary
//! little-endian), and binary glTF (GLB). All parsers are pure functions of
//! their input bytes, validate the result before returning it, and never
//! panic on malformed input.

mod glb;
mod obj;
mod ply;

pub use glb::parse_glb;
pub use obj::parse_obj;
pub use ply::{parse_ply, write_ply};

use crate::mesh::{MeshInvariantError, TriangleMesh};
use crate::scalar::Real;

pub const GLB_MAGIC: u32 = 0x4654_6C67; // "glTF"

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
    PlyBinaryLe,
    Glb,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("input bytes match no supported mesh format")]
    UnknownFormat,
    #[error("not a GLB container (bad magic)")]
    BadMagic,
    #[error("unsupported GLB container version {0} (expected 2)")]
    UnsupportedVersion(u32),
    #[error("truncated or length-inconsistent chunk: {0}")]
    TruncatedChunk(String),
    #[error("mesh primitive has no POSITION attribute")]
    MissingPositions,
    #[error("mesh primitive uses non-triangle mode {0}")]
    NonTriangleMode(u32),
    #[error("malformed PLY header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PLY encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("face index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { index: i64, vertex_count: usize },
    #[error("malformed {format} payload: {detail}")]
    Malformed {
        format: &'static str,
        detail: String,
    },
    #[error("parsed mesh violates an invariant: {0}")]
    InvalidMesh(#[from] MeshInvariantError),
}

fn malformed(format: &'static str, detail: impl Into<String>) -> IoError {
    IoError::Malformed {
        format,
        detail: detail.into(),
    }
}

/// Detect the container format from the bytes alone (magic/header), never
/// from a filename.
pub fn detect_format(bytes: &[u8]) -> Option<MeshFormat> {
    if bytes.len() >= 4 && bytes[..4] == GLB_MAGIC.to_le_bytes() {
        return Some(MeshFormat::Glb);
    }
    if let Some(fmt) = ply::sniff_ply(bytes) {
        return Some(fmt);
    }
    None
}

/// Parse a mesh, dispatching on magic bytes when `hint` is absent. Bytes that
/// match no magic are attempted as OBJ text; if that fails too the input is
/// rejected as `UnknownFormat`.
pub fn load_mesh<S: Real>(bytes: &[u8], hint: Option<MeshFormat>) -> Result<TriangleMesh<S>, IoError> {
    if bytes.is_empty() {
        return Err(IoError::UnknownFormat);
    }
    let mesh = match hint.or_else(|| detect_format(bytes)) {
        Some(MeshFormat::Glb) => parse_glb(bytes)?,
        Some(MeshFormat::PlyAscii) | Some(MeshFormat::PlyBinaryLe) => parse_ply(bytes)?,
        Some(MeshFormat::Obj) => parse_obj(bytes)?,
        None => parse_obj(bytes).map_err(|_| IoError::UnknownFormat)?,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Fan-triangulate a polygon's vertex indices; an n-gon yields n-2 triangles
/// sharing the first vertex.
pub(crate) fn fan_triangulate(indices: &[u32], out: &mut Vec<[u32; 3]>) {
    for i in 1..indices.len().saturating_sub(1) {
        out.push([indices[0], indices[i], indices[i + 1]]);
    }
}
