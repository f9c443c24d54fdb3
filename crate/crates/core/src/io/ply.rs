//! PLY reader/writer. Reads ascii and binary_little_endian payloads with
//! float or double vertex positions, optional uchar red/green/blue colors,
//! and list-typed face indices (fan-triangulated). The writer emits a header
//! this parser accepts; positions round-trip bit-exactly in both encodings.

use super::{fan_triangulate, malformed, IoError, MeshFormat};
use crate::mesh::TriangleMesh;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PropType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PropType {
    fn parse(tok: &str) -> Option<Self> {
        Some(match tok {
            "char" | "int8" => PropType::I8,
            "uchar" | "uint8" => PropType::U8,
            "short" | "int16" => PropType::I16,
            "ushort" | "uint16" => PropType::U16,
            "int" | "int32" => PropType::I32,
            "uint" | "uint32" => PropType::U32,
            "float" | "float32" => PropType::F32,
            "double" | "float64" => PropType::F64,
            _ => return None,
        })
    }

    fn width(self) -> usize {
        match self {
            PropType::I8 | PropType::U8 => 1,
            PropType::I16 | PropType::U16 => 2,
            PropType::I32 | PropType::U32 | PropType::F32 => 4,
            PropType::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { ty: PropType, name: String },
    List { count: PropType, item: PropType, name: String },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    ascii: bool,
    elements: Vec<Element>,
    body_offset: usize,
}

/// Byte-level sniff: binary payloads are not UTF-8, so only the magic and
/// format lines are inspected. Comment lines may precede the format line.
pub(super) fn sniff_ply(bytes: &[u8]) -> Option<MeshFormat> {
    let mut rest = bytes
        .strip_prefix(b"ply\n")
        .or_else(|| bytes.strip_prefix(b"ply\r\n"))?;
    for _ in 0..64 {
        let nl = rest.iter().take(4096).position(|&b| b == b'\n')?;
        let mut line = &rest[..nl];
        if let [head @ .., b'\r'] = line {
            line = head;
        }
        rest = &rest[nl + 1..];
        if line.starts_with(b"comment") || line.starts_with(b"obj_info") {
            continue;
        }
        return if line.starts_with(b"format ascii") {
            Some(MeshFormat::PlyAscii)
        } else if line.starts_with(b"format binary_little_endian")
            || line.starts_with(b"format binary_big_endian")
        {
            // big-endian is recognized as PLY so the parser can reject it
            // with a typed error instead of falling through to OBJ
            Some(MeshFormat::PlyBinaryLe)
        } else {
            None
        };
    }
    None
}

fn parse_header(bytes: &[u8]) -> Result<Header, IoError> {
    let mut offset = 0usize;
    let mut lines: Vec<String> = Vec::new();
    // The header is newline-delimited text terminated by end_header.
    loop {
        let rest = &bytes[offset..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| IoError::MalformedHeader("missing end_header".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| IoError::MalformedHeader("non-UTF-8 header line".into()))?
            .trim_end_matches('\r')
            .to_string();
        offset += nl + 1;
        let is_end = line.trim() == "end_header";
        lines.push(line);
        if is_end {
            break;
        }
        if offset >= bytes.len() {
            return Err(IoError::MalformedHeader("missing end_header".into()));
        }
    }

    let mut it = lines.iter();
    if it.next().map(|s| s.trim()) != Some("ply") {
        return Err(IoError::MalformedHeader("first line is not 'ply'".into()));
    }

    let mut ascii = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in it {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                let kind = tok.next().unwrap_or("");
                ascii = Some(match kind {
                    "ascii" => true,
                    "binary_little_endian" => false,
                    "binary_big_endian" => {
                        return Err(IoError::UnsupportedEncoding(
                            "binary_big_endian".into(),
                        ))
                    }
                    other => {
                        return Err(IoError::MalformedHeader(format!(
                            "unknown format {other:?}"
                        )))
                    }
                });
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = tok
                    .next()
                    .ok_or_else(|| IoError::MalformedHeader("element without name".into()))?;
                let count: usize = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| IoError::MalformedHeader("element without count".into()))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let elem = elements.last_mut().ok_or_else(|| {
                    IoError::MalformedHeader("property before any element".into())
                })?;
                let first = tok
                    .next()
                    .ok_or_else(|| IoError::MalformedHeader("property without type".into()))?;
                if first == "list" {
                    let count = tok.next().and_then(PropType::parse).ok_or_else(|| {
                        IoError::MalformedHeader("bad list count type".into())
                    })?;
                    let item = tok.next().and_then(PropType::parse).ok_or_else(|| {
                        IoError::MalformedHeader("bad list item type".into())
                    })?;
                    let name = tok
                        .next()
                        .ok_or_else(|| IoError::MalformedHeader("list without name".into()))?;
                    elem.properties.push(Property::List {
                        count,
                        item,
                        name: name.to_string(),
                    });
                } else {
                    let ty = PropType::parse(first).ok_or_else(|| {
                        IoError::MalformedHeader(format!("unknown property type {first:?}"))
                    })?;
                    let name = tok.next().ok_or_else(|| {
                        IoError::MalformedHeader("property without name".into())
                    })?;
                    elem.properties.push(Property::Scalar {
                        ty,
                        name: name.to_string(),
                    });
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(IoError::MalformedHeader(format!(
                    "unexpected keyword {other:?}"
                )))
            }
            None => {}
        }
    }

    let ascii =
        ascii.ok_or_else(|| IoError::MalformedHeader("missing format line".into()))?;
    Ok(Header {
        ascii,
        elements,
        body_offset: offset,
    })
}

/// Cursor over either whitespace tokens (ascii) or raw bytes (binary LE).
enum Body<'a> {
    Ascii(std::str::SplitWhitespace<'a>),
    Binary { bytes: &'a [u8], pos: usize },
}

impl<'a> Body<'a> {
    fn read_value(&mut self, ty: PropType) -> Result<f64, IoError> {
        match self {
            Body::Ascii(tok) => {
                let t = tok
                    .next()
                    .ok_or_else(|| malformed("PLY", "body ended early"))?;
                t.parse::<f64>()
                    .map_err(|_| malformed("PLY", format!("bad ascii value {t:?}")))
            }
            Body::Binary { bytes, pos } => {
                let w = ty.width();
                let end = pos
                    .checked_add(w)
                    .ok_or_else(|| malformed("PLY", "offset overflow"))?;
                let raw = bytes
                    .get(*pos..end)
                    .ok_or_else(|| malformed("PLY", "body ended early"))?;
                *pos = end;
                Ok(match ty {
                    PropType::I8 => raw[0] as i8 as f64,
                    PropType::U8 => raw[0] as f64,
                    PropType::I16 => i16::from_le_bytes([raw[0], raw[1]]) as f64,
                    PropType::U16 => u16::from_le_bytes([raw[0], raw[1]]) as f64,
                    PropType::I32 => {
                        i32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64
                    }
                    PropType::U32 => {
                        u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64
                    }
                    PropType::F32 => {
                        f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64
                    }
                    PropType::F64 => f64::from_le_bytes(raw.try_into().unwrap()),
                })
            }
        }
    }

    /// Read a position coordinate directly into S so text parses losslessly.
    fn read_coord<S: Real>(&mut self, ty: PropType) -> Result<S, IoError> {
        match self {
            Body::Ascii(tok) => {
                let t = tok
                    .next()
                    .ok_or_else(|| malformed("PLY", "body ended early"))?;
                t.parse::<S>()
                    .map_err(|_| malformed("PLY", format!("bad ascii value {t:?}")))
            }
            Body::Binary { .. } => match ty {
                PropType::F32 => {
                    let v = self.read_value(ty)?;
                    Ok(S::of(v)) // f32 widened exactly through f64
                }
                PropType::F64 => Ok(S::of(self.read_value(ty)?)),
                _ => Ok(S::of(self.read_value(ty)?)),
            },
        }
    }

    fn skip_value(&mut self, ty: PropType) -> Result<(), IoError> {
        self.read_value(ty).map(|_| ())
    }
}

pub fn parse_ply<S: Real>(bytes: &[u8]) -> Result<TriangleMesh<S>, IoError> {
    if !bytes.starts_with(b"ply\n") && !bytes.starts_with(b"ply\r\n") {
        return Err(IoError::MalformedHeader("missing 'ply' magic".into()));
    }
    let header = parse_header(bytes)?;

    let body_bytes = &bytes[header.body_offset..];
    let ascii_text;
    let mut body = if header.ascii {
        ascii_text = std::str::from_utf8(body_bytes)
            .map_err(|_| malformed("PLY", "ascii body is not UTF-8"))?;
        Body::Ascii(ascii_text.split_whitespace())
    } else {
        Body::Binary {
            bytes: body_bytes,
            pos: 0,
        }
    };

    let mut vertices: Vec<[S; 3]> = Vec::new();
    let mut colors: Vec<[S; 3]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut has_colors = false;

    for elem in &header.elements {
        if elem.name == "vertex" {
            let mut x_slot = None;
            let mut y_slot = None;
            let mut z_slot = None;
            let mut rgb_slots = [None; 3];
            for (i, p) in elem.properties.iter().enumerate() {
                if let Property::Scalar { ty, name } = p {
                    match name.as_str() {
                        "x" => x_slot = Some((i, *ty)),
                        "y" => y_slot = Some((i, *ty)),
                        "z" => z_slot = Some((i, *ty)),
                        "red" => rgb_slots[0] = Some((i, *ty)),
                        "green" => rgb_slots[1] = Some((i, *ty)),
                        "blue" => rgb_slots[2] = Some((i, *ty)),
                        _ => {}
                    }
                }
            }
            let (xs, ys, zs) = match (x_slot, y_slot, z_slot) {
                (Some(x), Some(y), Some(z)) => (x, y, z),
                _ => {
                    return Err(IoError::MalformedHeader(
                        "vertex element lacks x/y/z properties".into(),
                    ))
                }
            };
            // only uchar colors are supported; anything else is skipped
            has_colors = rgb_slots
                .iter()
                .all(|s| matches!(s, Some((_, PropType::U8))));
            vertices.reserve(elem.count.min(1 << 20));
            for _ in 0..elem.count {
                let mut pos = [S::zero(); 3];
                let mut rgb = [S::zero(); 3];
                for (i, p) in elem.properties.iter().enumerate() {
                    match p {
                        Property::Scalar { ty, .. } => {
                            if i == xs.0 {
                                pos[0] = body.read_coord(*ty)?;
                            } else if i == ys.0 {
                                pos[1] = body.read_coord(*ty)?;
                            } else if i == zs.0 {
                                pos[2] = body.read_coord(*ty)?;
                            } else if has_colors && Some((i, *ty)) == rgb_slots[0] {
                                rgb[0] = S::of(body.read_value(*ty)? / 255.0);
                            } else if has_colors && Some((i, *ty)) == rgb_slots[1] {
                                rgb[1] = S::of(body.read_value(*ty)? / 255.0);
                            } else if has_colors && Some((i, *ty)) == rgb_slots[2] {
                                rgb[2] = S::of(body.read_value(*ty)? / 255.0);
                            } else {
                                body.skip_value(*ty)?;
                            }
                        }
                        Property::List { count, item, .. } => {
                            let n = body.read_value(*count)? as i64;
                            if n < 0 {
                                return Err(malformed("PLY", "negative list count"));
                            }
                            for _ in 0..n {
                                body.skip_value(*item)?;
                            }
                        }
                    }
                }
                vertices.push(pos);
                if has_colors {
                    colors.push(rgb);
                }
            }
        } else if elem.name == "face" {
            let mut poly: Vec<u32> = Vec::new();
            for _ in 0..elem.count {
                for p in &elem.properties {
                    match p {
                        Property::List { count, item, name }
                            if name == "vertex_indices" || name == "vertex_index" =>
                        {
                            let n = body.read_value(*count)? as i64;
                            if n < 0 {
                                return Err(malformed("PLY", "negative face list count"));
                            }
                            poly.clear();
                            for _ in 0..n {
                                let raw = body.read_value(*item)?;
                                let idx = raw as i64;
                                if idx < 0 || idx as usize >= vertices.len() {
                                    return Err(IoError::IndexOutOfRange {
                                        index: idx,
                                        vertex_count: vertices.len(),
                                    });
                                }
                                poly.push(idx as u32);
                            }
                            fan_triangulate(&poly, &mut faces);
                        }
                        Property::List { count, item, .. } => {
                            let n = body.read_value(*count)? as i64;
                            if n < 0 {
                                return Err(malformed("PLY", "negative list count"));
                            }
                            for _ in 0..n {
                                body.skip_value(*item)?;
                            }
                        }
                        Property::Scalar { ty, .. } => body.skip_value(*ty)?,
                    }
                }
            }
        } else {
            // unknown element: consume its payload so later elements stay aligned
            for _ in 0..elem.count {
                for p in &elem.properties {
                    match p {
                        Property::Scalar { ty, .. } => body.skip_value(*ty)?,
                        Property::List { count, item, .. } => {
                            let n = body.read_value(*count)? as i64;
                            if n < 0 {
                                return Err(malformed("PLY", "negative list count"));
                            }
                            for _ in 0..n {
                                body.skip_value(*item)?;
                            }
                        }
                    }
                }
            }
        }
    }

    let mut mesh = TriangleMesh::new(vertices, faces);
    if has_colors && !colors.is_empty() {
        mesh.colors = Some(colors);
    }
    Ok(mesh)
}

/// Serialize a mesh as PLY. Positions use this scalar's native property type
/// so `parse_ply(write_ply(m))` reproduces them bit-exactly; colors, when
/// present, are quantized to uchar.
pub fn write_ply<S: Real>(mesh: &TriangleMesh<S>, binary: bool) -> Result<Vec<u8>, IoError> {
    mesh.validate()?;
    let mut out = Vec::new();
    let colors = mesh.colors.as_ref();

    out.extend_from_slice(b"ply\n");
    if binary {
        out.extend_from_slice(b"format binary_little_endian 1.0\n");
    } else {
        out.extend_from_slice(b"format ascii 1.0\n");
    }
    out.extend_from_slice(format!("element vertex {}\n", mesh.vertices.len()).as_bytes());
    for axis in ["x", "y", "z"] {
        out.extend_from_slice(format!("property {} {}\n", S::PLY_TYPE, axis).as_bytes());
    }
    if colors.is_some() {
        for chan in ["red", "green", "blue"] {
            out.extend_from_slice(format!("property uchar {chan}\n").as_bytes());
        }
    }
    out.extend_from_slice(format!("element face {}\n", mesh.faces.len()).as_bytes());
    out.extend_from_slice(b"property list uchar uint vertex_indices\n");
    out.extend_from_slice(b"end_header\n");

    let quantize = |c: S| -> u8 {
        let v = (c.to_f64() * 255.0).round();
        v.clamp(0.0, 255.0) as u8
    };

    if binary {
        for (i, v) in mesh.vertices.iter().enumerate() {
            for c in v {
                c.write_le(&mut out);
            }
            if let Some(cols) = colors {
                for ch in &cols[i] {
                    out.push(quantize(*ch));
                }
            }
        }
        for f in &mesh.faces {
            out.push(3u8);
            for idx in f {
                out.extend_from_slice(&idx.to_le_bytes());
            }
        }
    } else {
        for (i, v) in mesh.vertices.iter().enumerate() {
            let mut line = format!("{} {} {}", v[0], v[1], v[2]);
            if let Some(cols) = colors {
                let c = cols[i];
                line.push_str(&format!(
                    " {} {} {}",
                    quantize(c[0]),
                    quantize(c[1]),
                    quantize(c[2])
                ));
            }
            line.push('\n');
            out.extend_from_slice(line.as_bytes());
        }
        for f in &mesh.faces {
            out.extend_from_slice(format!("3 {} {} {}\n", f[0], f[1], f[2]).as_bytes());
        }
    }
    Ok(out)
}
