//! Dataset directory layout: `<root>/<subject>/<expression>/frame_NNNN.obj`
//! plus a `landmarks.txt` per sequence.

use crate::error::{Error, Result};
use crate::mesh::{expression_label, expression_name, Dataset, ScanFrame, ScanSequence};
use std::fs;
use std::path::Path;

use super::landmarks::{read_landmarks, write_landmarks};
use super::obj::{load_obj, write_obj};

/// Loads every sequence under `root`, sorted by subject id then label for a
/// deterministic ordering.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let mut subjects: Vec<_> = fs::read_dir(root)
        .map_err(crate::error::io_err(root))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    subjects.sort();

    let mut sequences = Vec::new();
    for subject_dir in subjects {
        let subject_id = subject_dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        for label in 1u8..=6 {
            let expr_dir = subject_dir.join(expression_name(label).unwrap());
            if !expr_dir.is_dir() {
                continue;
            }
            sequences.push(load_sequence(&expr_dir, &subject_id, label)?);
        }
    }
    if sequences.is_empty() {
        return Err(Error::Config(format!(
            "no sequences found under {root:?}"
        )));
    }
    Ok(Dataset::new(sequences))
}

fn load_sequence(dir: &Path, subject_id: &str, label: u8) -> Result<ScanSequence> {
    let mut frame_files: Vec<_> = fs::read_dir(dir)
        .map_err(crate::error::io_err(dir))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|e| e == "obj").unwrap_or(false))
        .collect();
    frame_files.sort();

    let landmarks = read_landmarks(&dir.join("landmarks.txt"))?;
    if landmarks.len() != frame_files.len() {
        return Err(Error::Shape(format!(
            "{dir:?}: {} landmark frames for {} mesh frames",
            landmarks.len(),
            frame_files.len()
        )));
    }

    let frames = frame_files
        .iter()
        .zip(landmarks)
        .map(|(path, lm)| {
            Ok(ScanFrame {
                mesh: load_obj(path)?,
                landmarks: lm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScanSequence::new(frames, subject_id.to_string(), label)
}

/// Persists a dataset in the layout `load_dataset` reads.
pub fn save_dataset(dataset: &Dataset, root: &Path) -> Result<()> {
    for seq in &dataset.sequences {
        let dir = root
            .join(&seq.subject_id)
            .join(expression_name(seq.expression_label).ok_or_else(|| {
                Error::Domain(format!("bad label {}", seq.expression_label))
            })?);
        fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
        for (t, frame) in seq.frames.iter().enumerate() {
            write_obj(&frame.mesh, &dir.join(format!("frame_{t:04}.obj")))?;
        }
        let lms: Vec<_> = seq.frames.iter().map(|f| f.landmarks).collect();
        write_landmarks(&lms, &dir.join("landmarks.txt"))?;
    }
    Ok(())
}

// Referenced so the label<->name mapping stays exercised from this module.
#[allow(dead_code)]
fn label_names_consistent() -> bool {
    (1u8..=6).all(|l| expression_label(expression_name(l).unwrap()) == Some(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{FaceMesh, LandmarkSet, Vertex3};

    fn tiny_sequence(subject: &str, label: u8) -> ScanSequence {
        let mesh = FaceMesh::new(
            vec![
                Vertex3::new(0.0, 0.0, 1.0),
                Vertex3::new(1.0, 0.0, 1.0),
                Vertex3::new(0.0, 1.0, 1.0),
            ],
            vec![[0, 1, 2]],
            Some(vec![[0.5, 0.5, 0.5]; 3]),
        )
        .unwrap();
        let lm = LandmarkSet {
            left_face_bound: Vertex3::new(-1.0, 0.0, 0.0),
            right_face_bound: Vertex3::new(2.0, 0.0, 0.0),
            chin: Vertex3::new(0.0, -1.0, 0.5),
            nose_tip: Vertex3::new(0.3, 0.3, 1.0),
            left_eyebrow: Vertex3::new(0.0, 0.8, 0.9),
            right_eyebrow: Vertex3::new(0.6, 0.8, 0.9),
        };
        ScanSequence::new(
            vec![
                ScanFrame {
                    mesh: mesh.clone(),
                    landmarks: lm,
                },
                ScanFrame {
                    mesh,
                    landmarks: lm,
                },
            ],
            subject.into(),
            label,
        )
        .unwrap()
    }

    #[test]
    fn save_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset::new(vec![
            tiny_sequence("s01", 1),
            tiny_sequence("s01", 4),
            tiny_sequence("s02", 1),
        ]);
        save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back.sequences.len(), 3);
        assert_eq!(back.sequences[0].subject_id, "s01");
        assert_eq!(back.sequences[0].expression_label, 1);
        assert_eq!(back.sequences[1].expression_label, 4);
        assert_eq!(back.sequences[2].subject_id, "s02");
        assert_eq!(back.sequences[0].frames, ds.sequences[0].frames);
    }
}
