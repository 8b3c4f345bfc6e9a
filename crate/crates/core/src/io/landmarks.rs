//! Landmark file format: one text file per sequence, a `frame <t>` header
//! followed by the six named anchors, repeated per frame.

use crate::error::{Error, Result};
use crate::mesh::{LandmarkSet, Vertex3};
use std::fs;
use std::io::Write;
use std::path::Path;

const ANCHOR_NAMES: [&str; 6] = [
    "left_face_bound",
    "right_face_bound",
    "chin",
    "nose_tip",
    "left_eyebrow",
    "right_eyebrow",
];

/// Reads the per-frame landmark sets, in frame order.
pub fn read_landmarks(path: &Path) -> Result<Vec<LandmarkSet>> {
    let text = fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    let mut frames: Vec<Vec<Option<Vertex3>>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        if head == "frame" {
            frames.push(vec![None; 6]);
            continue;
        }
        let slot = ANCHOR_NAMES.iter().position(|&n| n == head).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: format!("unknown anchor `{head}`"),
        })?;
        let coord = |w: Option<&str>| -> Result<f64> {
            w.and_then(|w| w.parse().ok()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: "expected three coordinates".into(),
            })
        };
        let v = Vertex3::new(
            coord(words.next())?,
            coord(words.next())?,
            coord(words.next())?,
        );
        let frame = frames.last_mut().ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: "anchor before any `frame` header".into(),
        })?;
        frame[slot] = Some(v);
    }

    frames
        .into_iter()
        .enumerate()
        .map(|(t, anchors)| {
            let mut resolved = [Vertex3::new(0.0, 0.0, 0.0); 6];
            for (i, a) in anchors.into_iter().enumerate() {
                resolved[i] = a.ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("frame {t} is missing anchor {}", ANCHOR_NAMES[i]),
                })?;
            }
            let lm = LandmarkSet {
                left_face_bound: resolved[0],
                right_face_bound: resolved[1],
                chin: resolved[2],
                nose_tip: resolved[3],
                left_eyebrow: resolved[4],
                right_eyebrow: resolved[5],
            };
            lm.validate()?;
            Ok(lm)
        })
        .collect()
}

/// Writes per-frame landmark sets in the format `read_landmarks` consumes.
pub fn write_landmarks(frames: &[LandmarkSet], path: &Path) -> Result<()> {
    let mut out = String::new();
    for (t, lm) in frames.iter().enumerate() {
        out.push_str(&format!("frame {t}\n"));
        let anchors = [
            lm.left_face_bound,
            lm.right_face_bound,
            lm.chin,
            lm.nose_tip,
            lm.left_eyebrow,
            lm.right_eyebrow,
        ];
        for (name, a) in ANCHOR_NAMES.iter().zip(anchors) {
            out.push_str(&format!("{name} {:?} {:?} {:?}\n", a.x, a.y, a.z));
        }
    }
    let mut file = fs::File::create(path).map_err(crate::error::io_err(path))?;
    file.write_all(out.as_bytes())
        .map_err(crate::error::io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("landmarks.txt");
        let lm = LandmarkSet {
            left_face_bound: Vertex3::new(-1.5, 0.0, 0.25),
            right_face_bound: Vertex3::new(1.5, 0.0, 0.25),
            chin: Vertex3::new(0.0, -2.0, 0.5),
            nose_tip: Vertex3::new(0.0, 0.0, 1.0),
            left_eyebrow: Vertex3::new(-0.5, 1.0, 0.75),
            right_eyebrow: Vertex3::new(0.5, 1.0, 0.75),
        };
        write_landmarks(&[lm, lm], &path).unwrap();
        let back = read_landmarks(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], lm);
    }

    #[test]
    fn missing_anchor_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("landmarks.txt");
        fs::write(&path, "frame 0\nchin 0 0 0\n").unwrap();
        assert!(matches!(
            read_landmarks(&path).unwrap_err(),
            Error::Parse { .. }
        ));
    }
}
