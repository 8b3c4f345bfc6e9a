//! PLY reader (ASCII and binary little-endian).
//!
//! Handles the subset produced by common scan tooling: a `vertex` element
//! with `x y z` (float or double) plus optional `red green blue` (uchar or
//! float), and a `face` element with a `vertex_indices` list. Other
//! properties are skipped.

use crate::error::{Error, Result};
use crate::mesh::{FaceMesh, Vertex3};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(word: &str) -> Option<Self> {
        Some(match word {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read_binary(self, bytes: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => bytes[0] as i8 as f64,
            ScalarType::U8 => bytes[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            ScalarType::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            ScalarType::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            ScalarType::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { name: String, count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone)]
struct ElementSpec {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyFormat {
    Ascii,
    BinaryLe,
}

pub fn load_ply(path: &Path) -> Result<FaceMesh> {
    let bytes = fs::read(path).map_err(crate::error::io_err(path))?;
    parse_ply(&bytes, path)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_ply(bytes: &[u8], path: &Path) -> Result<FaceMesh> {
    // The header is always ASCII lines terminated by '\n'.
    let mut pos = 0;
    let mut lineno = 0;
    let next_line = |pos: &mut usize, lineno: &mut usize| -> Result<String> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos] != b'\n' {
            *pos += 1;
        }
        if *pos >= bytes.len() {
            return Err(parse_err(path, *lineno, "unexpected end of header"));
        }
        let line = String::from_utf8_lossy(&bytes[start..*pos]).trim().to_string();
        *pos += 1;
        *lineno += 1;
        Ok(line)
    };

    if next_line(&mut pos, &mut lineno)? != "ply" {
        return Err(parse_err(path, 1, "missing `ply` magic"));
    }

    let mut format = None;
    let mut elements: Vec<ElementSpec> = Vec::new();
    loop {
        let line = next_line(&mut pos, &mut lineno)?;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                format = Some(match words.next() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLe,
                    other => {
                        return Err(parse_err(
                            path,
                            lineno,
                            format!("unsupported format {other:?}"),
                        ))
                    }
                });
            }
            Some("element") => {
                let name = words
                    .next()
                    .ok_or_else(|| parse_err(path, lineno, "element without name"))?
                    .to_string();
                let count: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| parse_err(path, lineno, "element without count"))?;
                elements.push(ElementSpec {
                    name,
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, lineno, "property before element"))?;
                let first = words
                    .next()
                    .ok_or_else(|| parse_err(path, lineno, "property without type"))?;
                if first == "list" {
                    let count = words
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| parse_err(path, lineno, "bad list count type"))?;
                    let item = words
                        .next()
                        .and_then(ScalarType::parse)
                        .ok_or_else(|| parse_err(path, lineno, "bad list item type"))?;
                    let name = words
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "list property without name"))?
                        .to_string();
                    elem.properties.push(Property::List { name, count, item });
                } else {
                    let ty = ScalarType::parse(first)
                        .ok_or_else(|| parse_err(path, lineno, format!("bad type `{first}`")))?;
                    let name = words
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "property without name"))?
                        .to_string();
                    elem.properties.push(Property::Scalar { name, ty });
                }
            }
            Some("comment") | Some("obj_info") => {}
            Some("end_header") => break,
            other => return Err(parse_err(path, lineno, format!("unexpected `{other:?}`"))),
        }
    }
    let format = format.ok_or_else(|| parse_err(path, lineno, "missing format line"))?;

    let mut vertices = Vec::new();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    let mut has_color = false;
    let mut faces = Vec::new();

    // ASCII body tokens, consumed sequentially.
    let mut ascii_words: Vec<&str> = Vec::new();
    let mut ascii_at = 0;
    let body_text;
    if format == PlyFormat::Ascii {
        body_text = String::from_utf8_lossy(&bytes[pos..]).into_owned();
        ascii_words = body_text.split_whitespace().collect();
    }

    let take_word = |at: &mut usize| -> Result<f64> {
        let w = ascii_words
            .get(*at)
            .ok_or_else(|| parse_err(path, lineno, "unexpected end of ascii body"))?;
        *at += 1;
        w.parse::<f64>()
            .map_err(|_| parse_err(path, lineno, format!("bad number `{w}`")))
    };

    for elem in &elements {
        let is_vertex = elem.name == "vertex";
        let is_face = elem.name == "face";
        for _ in 0..elem.count {
            let mut x = 0.0;
            let mut y = 0.0;
            let mut z = 0.0;
            let mut rgb = [0.0f64; 3];
            let mut saw_rgb = [false; 3];
            let mut poly: Vec<usize> = Vec::new();

            for prop in &elem.properties {
                match prop {
                    Property::Scalar { name, ty } => {
                        let value = match format {
                            PlyFormat::Ascii => take_word(&mut ascii_at)?,
                            PlyFormat::BinaryLe => {
                                let size = ty.size();
                                if pos + size > bytes.len() {
                                    return Err(parse_err(path, lineno, "truncated binary body"));
                                }
                                let v = ty.read_binary(&bytes[pos..]);
                                pos += size;
                                v
                            }
                        };
                        if is_vertex {
                            let color_scale = if *ty == ScalarType::U8 { 255.0 } else { 1.0 };
                            match name.as_str() {
                                "x" => x = value,
                                "y" => y = value,
                                "z" => z = value,
                                "red" | "r" => {
                                    rgb[0] = value / color_scale;
                                    saw_rgb[0] = true;
                                }
                                "green" | "g" => {
                                    rgb[1] = value / color_scale;
                                    saw_rgb[1] = true;
                                }
                                "blue" | "b" => {
                                    rgb[2] = value / color_scale;
                                    saw_rgb[2] = true;
                                }
                                _ => {}
                            }
                        }
                    }
                    Property::List { name, count, item } => {
                        let n = match format {
                            PlyFormat::Ascii => take_word(&mut ascii_at)? as usize,
                            PlyFormat::BinaryLe => {
                                let size = count.size();
                                if pos + size > bytes.len() {
                                    return Err(parse_err(path, lineno, "truncated binary body"));
                                }
                                let v = count.read_binary(&bytes[pos..]) as usize;
                                pos += size;
                                v
                            }
                        };
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            let value = match format {
                                PlyFormat::Ascii => take_word(&mut ascii_at)?,
                                PlyFormat::BinaryLe => {
                                    let size = item.size();
                                    if pos + size > bytes.len() {
                                        return Err(parse_err(path, lineno, "truncated binary body"));
                                    }
                                    let v = item.read_binary(&bytes[pos..]);
                                    pos += size;
                                    v
                                }
                            };
                            items.push(value);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            poly = items.iter().map(|&v| v as usize).collect();
                        }
                    }
                }
            }

            if is_vertex {
                vertices.push(Vertex3::new(x, y, z));
                if saw_rgb.iter().any(|&s| s) {
                    has_color = true;
                }
                colors.push(rgb);
            }
            if is_face {
                if poly.len() < 3 {
                    return Err(parse_err(path, lineno, "face with fewer than 3 vertices"));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
        }
    }

    FaceMesh::new(vertices, faces, has_color.then_some(colors))
}
