//! Wavefront OBJ reader/writer.
//!
//! Only the records the pipeline needs: `v x y z [r g b]` (the common
//! per-vertex color extension) and triangle `f` records. Faces may use the
//! `v/vt/vn` syntax; only the position index is kept. Polygons with more
//! than three vertices are fan-triangulated.

use crate::error::{Error, Result};
use crate::mesh::{FaceMesh, Vertex3};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn load_obj(path: &Path) -> Result<FaceMesh> {
    let text = fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    parse_obj(&text, path)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_obj(text: &str, path: &Path) -> Result<FaceMesh> {
    let mut vertices = Vec::new();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    let mut any_color = false;
    let mut faces = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("v") => {
                let nums: Vec<f64> = words
                    .map(|w| {
                        w.parse::<f64>()
                            .map_err(|_| parse_err(path, lineno, format!("bad number `{w}`")))
                    })
                    .collect::<Result<_>>()?;
                match nums.len() {
                    3 => {
                        vertices.push(Vertex3::new(nums[0], nums[1], nums[2]));
                        colors.push([0.0; 3]);
                    }
                    6 => {
                        vertices.push(Vertex3::new(nums[0], nums[1], nums[2]));
                        colors.push([nums[3], nums[4], nums[5]]);
                        any_color = true;
                    }
                    n => {
                        return Err(parse_err(
                            path,
                            lineno,
                            format!("vertex record has {n} values, expected 3 or 6"),
                        ))
                    }
                }
            }
            Some("f") => {
                let mut idxs = Vec::new();
                for w in words {
                    let first = w.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| parse_err(path, lineno, format!("bad face index `{w}`")))?;
                    let resolved = if i < 0 {
                        let n = vertices.len() as i64 + i;
                        if n < 0 {
                            return Err(parse_err(path, lineno, format!("face index {i} out of range")));
                        }
                        n as usize
                    } else if i == 0 {
                        return Err(parse_err(path, lineno, "face index 0 (OBJ is 1-based)"));
                    } else {
                        (i - 1) as usize
                    };
                    idxs.push(resolved);
                }
                if idxs.len() < 3 {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("face has {} vertices, expected at least 3", idxs.len()),
                    ));
                }
                for k in 1..idxs.len() - 1 {
                    faces.push([idxs[0], idxs[k], idxs[k + 1]]);
                }
            }
            // Normals, texcoords, groups, materials: irrelevant here.
            _ => {}
        }
    }

    for (fi, f) in faces.iter().enumerate() {
        for &i in f {
            if i >= vertices.len() {
                return Err(parse_err(
                    path,
                    0,
                    format!(
                        "face {} references vertex {} but only {} vertices were declared",
                        fi + 1,
                        i + 1,
                        vertices.len()
                    ),
                ));
            }
        }
    }

    FaceMesh::new(vertices, faces, any_color.then_some(colors))
}

/// Writes a mesh as ASCII OBJ, emitting the color extension when colors are
/// present. Full `{:?}` float formatting keeps read-back lossless.
pub fn write_obj(mesh: &FaceMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (i, v) in mesh.vertices.iter().enumerate() {
        match &mesh.colors {
            Some(c) => out.push_str(&format!(
                "v {:?} {:?} {:?} {:?} {:?} {:?}\n",
                v.x, v.y, v.z, c[i][0], c[i][1], c[i][2]
            )),
            None => out.push_str(&format!("v {:?} {:?} {:?}\n", v.x, v.y, v.z)),
        }
    }
    for f in &mesh.faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    let mut file = fs::File::create(path).map_err(crate::error::io_err(path))?;
    file.write_all(out.as_bytes())
        .map_err(crate::error::io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FaceMesh> {
        parse_obj(text, Path::new("test.obj"))
    }

    #[test]
    fn minimal_obj() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(mesh.vertex_count(), 3);
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
        assert!(mesh.colors.is_none());
    }

    #[test]
    fn out_of_range_face_index_reports_line() {
        let err = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n").unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains('7'), "{message}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn vertex_colors_parsed() {
        let mesh = parse("v 0 0 0 0.5 0.25 1.0\nv 1 0 0 0 0 0\nv 0 1 0 1 1 1\nf 1 2 3\n").unwrap();
        let colors = mesh.colors.unwrap();
        assert_eq!(colors[0], [0.5, 0.25, 1.0]);
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn slash_indices_use_position() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n").unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let mesh = FaceMesh::new(
            vec![
                Vertex3::new(0.125, -3.5, 2.0 / 3.0),
                Vertex3::new(1.0, 0.0, 0.0),
                Vertex3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            Some(vec![[0.1, 0.2, 0.3]; 3]),
        )
        .unwrap();
        write_obj(&mesh, &path).unwrap();
        let back = load_obj(&path).unwrap();
        assert_eq!(mesh, back);
    }
}
