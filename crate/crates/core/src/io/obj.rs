//! Wavefront OBJ text parser. Only `v`, `vn`, and `f` records are honored;
//! materials, texture coordinates, and groups are silently skipped.

use super::{fan_triangulate, malformed, IoError};
use crate::math::normalize3;
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

fn parse_scalar<S: Real>(tok: &str, line_no: usize) -> Result<S, IoError> {
    tok.parse::<S>()
        .map_err(|_| malformed("OBJ", format!("bad number {tok:?} on line {line_no}")))
}

/// Resolve an OBJ index (1-based, negative = relative to current count).
fn resolve_index(raw: i64, count: usize) -> Result<u32, IoError> {
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        -1
    };
    if idx < 0 || idx as usize >= count {
        return Err(IoError::IndexOutOfRange {
            index: raw,
            vertex_count: count,
        });
    }
    Ok(idx as u32)
}

pub fn parse_obj<S: Real>(bytes: &[u8]) -> Result<TriangleMesh<S>, IoError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| malformed("OBJ", "input is not valid UTF-8 text"))?;

    let mut vertices: Vec<[S; 3]> = Vec::new();
    let mut normals: Vec<[S; 3]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut poly: Vec<u32> = Vec::new();

    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = match raw_line.split_once('#') {
            Some((head, _)) => head,
            None => raw_line,
        };
        let mut tokens = line.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        match keyword {
            "v" => {
                let mut p = [S::zero(); 3];
                for c in &mut p {
                    let tok = tokens.next().ok_or_else(|| {
                        malformed("OBJ", format!("vertex on line {line_no} has fewer than 3 coordinates"))
                    })?;
                    *c = parse_scalar(tok, line_no)?;
                }
                // trailing w or color components are ignored
                vertices.push(p);
            }
            "vn" => {
                let mut n = [S::zero(); 3];
                for c in &mut n {
                    let tok = tokens.next().ok_or_else(|| {
                        malformed("OBJ", format!("normal on line {line_no} has fewer than 3 components"))
                    })?;
                    *c = parse_scalar(tok, line_no)?;
                }
                normals.push(n);
            }
            "f" => {
                poly.clear();
                for tok in tokens {
                    let vert_field = tok.split('/').next().unwrap_or(tok);
                    let raw: i64 = vert_field.parse().map_err(|_| {
                        malformed("OBJ", format!("bad face index {tok:?} on line {line_no}"))
                    })?;
                    poly.push(resolve_index(raw, vertices.len())?);
                }
                if poly.len() < 3 {
                    return Err(malformed(
                        "OBJ",
                        format!("face on line {line_no} has fewer than 3 vertices"),
                    ));
                }
                fan_triangulate(&poly, &mut faces);
            }
            _ => {} // mtllib/usemtl/vt/g/o/s and anything else
        }
    }

    if vertices.is_empty() {
        return Err(malformed("OBJ", "no vertex records found"));
    }

    let mut mesh = TriangleMesh::new(vertices, faces);
    // Attach normals only when they map 1:1 onto vertices and are all nonzero;
    // OBJ ties normals to face corners, so anything else is dropped.
    if !normals.is_empty() && normals.len() == mesh.vertices.len() {
        let unit: Vec<[S; 3]> = normals.iter().map(|n| normalize3(*n)).collect();
        if unit
            .iter()
            .all(|n| n.iter().any(|c| *c != S::zero()) && n.iter().all(|c| c.is_finite()))
        {
            mesh.normals = Some(unit);
        }
    }
    Ok(mesh)
}
