//! 3D face scans and the per-frame geometry preprocessing applied to them:
//! landmark-guided cropping, yaw rotation about the mesh centroid, and
//! multi-view generation.
//!
//! The preprocessing order is rotate-then-crop: the crop box is axis-aligned
//! in the *rotated* frame, derived from the (equally rotated) landmarks.

use crate::error::{Error, Result};

/// Multiple of the eyebrow-to-nose-tip distance kept behind the nose tip
/// before vertices are discarded as back-of-head geometry.
pub const DEPTH_MARGIN_FACTOR: f64 = 1.2;

/// Default forehead cut: one eyebrow-to-nose-tip distance above the eyebrow
/// midline.
pub const DEFAULT_FOREHEAD_FRACTION: f64 = 1.0;

/// The six prototypic expressions, indexed by label 1..=6.
pub const EXPRESSION_NAMES: [&str; 6] = [
    "anger",
    "disgust",
    "fear",
    "happiness",
    "sadness",
    "surprise",
];

/// Number of expression classes.
pub const NUM_CLASSES: usize = 6;

/// Returns the expression name for a 1-based label.
pub fn expression_name(label: u8) -> Option<&'static str> {
    if (1..=6).contains(&label) {
        Some(EXPRESSION_NAMES[label as usize - 1])
    } else {
        None
    }
}

/// Returns the 1-based label for an expression name.
pub fn expression_label(name: &str) -> Option<u8> {
    EXPRESSION_NAMES
        .iter()
        .position(|&n| n == name)
        .map(|i| i as u8 + 1)
}

/// A point in face-centered Cartesian coordinates (millimeter scale).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Vertex3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vertex3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Vertex3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// A triangle mesh with optional per-vertex RGB colors in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMesh {
    pub vertices: Vec<Vertex3>,
    pub faces: Vec<[usize; 3]>,
    pub colors: Option<Vec<[f64; 3]>>,
}

impl FaceMesh {
    /// Builds a mesh, validating that every face index is in range, every
    /// vertex is finite, and the color list (when present) matches the
    /// vertex count.
    pub fn new(
        vertices: Vec<Vertex3>,
        faces: Vec<[usize; 3]>,
        colors: Option<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        let m = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("vertex {i} is not finite")));
            }
        }
        for (i, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx >= m {
                    return Err(Error::Shape(format!(
                        "face {i} references vertex {idx} but the mesh has {m} vertices"
                    )));
                }
            }
        }
        if let Some(ref c) = colors {
            if c.len() != m {
                return Err(Error::Shape(format!(
                    "{} colors for {m} vertices",
                    c.len()
                )));
            }
        }
        Ok(Self {
            vertices,
            faces,
            colors,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Mean of all vertex positions. Zero for an empty mesh.
    pub fn centroid(&self) -> Vertex3 {
        let m = self.vertices.len();
        if m == 0 {
            return Vertex3::new(0.0, 0.0, 0.0);
        }
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for v in &self.vertices {
            sx += v.x;
            sy += v.y;
            sz += v.z;
        }
        let inv = 1.0 / m as f64;
        Vertex3::new(sx * inv, sy * inv, sz * inv)
    }

    /// Grayscale luminance (Rec. 601) of vertex `j`, if colors are present.
    pub fn luminance(&self, j: usize) -> Option<f64> {
        self.colors
            .as_ref()
            .map(|c| 0.299 * c[j][0] + 0.587 * c[j][1] + 0.114 * c[j][2])
    }
}

/// The six named anchor points used to drive cropping.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LandmarkSet {
    pub left_face_bound: Vertex3,
    pub right_face_bound: Vertex3,
    pub chin: Vertex3,
    pub nose_tip: Vertex3,
    pub left_eyebrow: Vertex3,
    pub right_eyebrow: Vertex3,
}

impl LandmarkSet {
    pub fn validate(&self) -> Result<()> {
        let anchors = [
            ("left_face_bound", self.left_face_bound),
            ("right_face_bound", self.right_face_bound),
            ("chin", self.chin),
            ("nose_tip", self.nose_tip),
            ("left_eyebrow", self.left_eyebrow),
            ("right_eyebrow", self.right_eyebrow),
        ];
        for (name, a) in anchors {
            if !a.is_finite() {
                return Err(Error::Domain(format!("landmark {name} is not finite")));
            }
        }
        Ok(())
    }

    /// Midpoint of the two eyebrow anchors.
    pub fn eyebrow_mid(&self) -> Vertex3 {
        Vertex3::new(
            0.5 * (self.left_eyebrow.x + self.right_eyebrow.x),
            0.5 * (self.left_eyebrow.y + self.right_eyebrow.y),
            0.5 * (self.left_eyebrow.z + self.right_eyebrow.z),
        )
    }

    /// Euclidean distance from the eyebrow midline to the nose tip.
    pub fn brow_nose_distance(&self) -> f64 {
        self.eyebrow_mid().distance(&self.nose_tip)
    }
}

/// One 3D frame of a scan sequence: the mesh plus its landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanFrame {
    pub mesh: FaceMesh,
    pub landmarks: LandmarkSet,
}

/// An ordered sequence of 3D face frames of one subject acting one expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSequence {
    pub frames: Vec<ScanFrame>,
    pub subject_id: String,
    pub expression_label: u8,
}

impl ScanSequence {
    pub fn new(frames: Vec<ScanFrame>, subject_id: String, expression_label: u8) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::TooShort("scan sequence has no frames".into()));
        }
        if !(1..=6).contains(&expression_label) {
            return Err(Error::Domain(format!(
                "expression label {expression_label} not in 1..=6"
            )));
        }
        Ok(Self {
            frames,
            subject_id,
            expression_label,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// A labeled collection of scan sequences.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub sequences: Vec<ScanSequence>,
}

impl Dataset {
    pub fn new(sequences: Vec<ScanSequence>) -> Self {
        Self { sequences }
    }

    /// Distinct subject ids in sorted order.
    pub fn subject_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sequences
            .iter()
            .map(|s| s.subject_id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

fn rotate_point(p: Vertex3, center: Vertex3, yaw_rad: f64) -> Vertex3 {
    let (s, c) = yaw_rad.sin_cos();
    let x = p.x - center.x;
    let z = p.z - center.z;
    Vertex3::new(c * x + s * z + center.x, p.y, -s * x + c * z + center.z)
}

/// Rigid rotation about the vertical axis through the mesh centroid.
///
/// Faces and colors are untouched. A yaw of exactly zero returns the input
/// unchanged, so identity views are bit-for-bit stable.
pub fn rotate_mesh(mesh: &FaceMesh, yaw_deg: f64) -> FaceMesh {
    if yaw_deg == 0.0 {
        return mesh.clone();
    }
    let center = mesh.centroid();
    let yaw = yaw_deg.to_radians();
    let vertices = mesh
        .vertices
        .iter()
        .map(|&v| rotate_point(v, center, yaw))
        .collect();
    FaceMesh {
        vertices,
        faces: mesh.faces.clone(),
        colors: mesh.colors.clone(),
    }
}

fn rotate_landmarks(lm: &LandmarkSet, center: Vertex3, yaw_deg: f64) -> LandmarkSet {
    if yaw_deg == 0.0 {
        return *lm;
    }
    let yaw = yaw_deg.to_radians();
    LandmarkSet {
        left_face_bound: rotate_point(lm.left_face_bound, center, yaw),
        right_face_bound: rotate_point(lm.right_face_bound, center, yaw),
        chin: rotate_point(lm.chin, center, yaw),
        nose_tip: rotate_point(lm.nose_tip, center, yaw),
        left_eyebrow: rotate_point(lm.left_eyebrow, center, yaw),
        right_eyebrow: rotate_point(lm.right_eyebrow, center, yaw),
    }
}

/// The closed axis-aligned region a cropped face must lie in.
#[derive(Debug, Clone, Copy)]
struct CropBox {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    z_min: f64,
}

impl CropBox {
    fn from_landmarks(lm: &LandmarkSet, forehead_fraction: f64) -> Self {
        let brow_nose = lm.brow_nose_distance();
        let mid = lm.eyebrow_mid();
        CropBox {
            x_min: lm.left_face_bound.x.min(lm.right_face_bound.x),
            x_max: lm.left_face_bound.x.max(lm.right_face_bound.x),
            y_min: lm.chin.y,
            y_max: mid.y + forehead_fraction * brow_nose,
            z_min: lm.nose_tip.z - DEPTH_MARGIN_FACTOR * brow_nose,
        }
    }

    /// Boundary points are kept (closed box).
    fn contains(&self, v: &Vertex3) -> bool {
        v.x >= self.x_min
            && v.x <= self.x_max
            && v.y >= self.y_min
            && v.y <= self.y_max
            && v.z >= self.z_min
    }
}

/// Removes everything outside the landmark-derived face region: beyond the
/// left/right face bounds, below the chin, above the forehead cut, and behind
/// the nose tip by more than the depth margin.
///
/// The surviving vertex set is a subset of the input set; faces that
/// reference a removed vertex are dropped and indices are remapped.
pub fn crop_face(mesh: &FaceMesh, lm: &LandmarkSet, forehead_fraction: f64) -> Result<FaceMesh> {
    if !(forehead_fraction > 0.0 && forehead_fraction <= 2.0) {
        return Err(Error::Config(format!(
            "forehead_fraction {forehead_fraction} not in (0, 2]"
        )));
    }
    let bbox = CropBox::from_landmarks(lm, forehead_fraction);

    let mut remap = vec![usize::MAX; mesh.vertices.len()];
    let mut vertices = Vec::new();
    let mut colors = mesh.colors.as_ref().map(|_| Vec::new());
    for (i, v) in mesh.vertices.iter().enumerate() {
        if bbox.contains(v) {
            remap[i] = vertices.len();
            vertices.push(*v);
            if let (Some(out), Some(src)) = (colors.as_mut(), mesh.colors.as_ref()) {
                out.push(src[i]);
            }
        }
    }
    if vertices.is_empty() {
        return Err(Error::DegenerateCrop);
    }
    let faces = mesh
        .faces
        .iter()
        .filter(|f| f.iter().all(|&i| remap[i] != usize::MAX))
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    Ok(FaceMesh {
        vertices,
        faces,
        colors,
    })
}

/// Applies rotation then cropping to every frame of a sequence. Landmarks are
/// rotated with the same transform as their mesh so the crop box follows the
/// face.
pub fn preprocess_scan(
    seq: &ScanSequence,
    yaw_deg: f64,
    forehead_fraction: f64,
) -> Result<ScanSequence> {
    let mut frames = Vec::with_capacity(seq.frames.len());
    for (t, frame) in seq.frames.iter().enumerate() {
        let center = frame.mesh.centroid();
        let mesh = rotate_mesh(&frame.mesh, yaw_deg);
        let landmarks = rotate_landmarks(&frame.landmarks, center, yaw_deg);
        let mesh = crop_face(&mesh, &landmarks, forehead_fraction)
            .map_err(|e| e.in_stage("preprocess", format!("frame t={}", t + 1)))?;
        frames.push(ScanFrame { mesh, landmarks });
    }
    ScanSequence::new(frames, seq.subject_id.clone(), seq.expression_label)
}

/// Preprocesses a sequence at every requested yaw angle, yielding one view
/// sequence per angle in the input order.
pub fn generate_views(
    seq: &ScanSequence,
    angles: &[f64],
    forehead_fraction: f64,
) -> Result<Vec<(f64, ScanSequence)>> {
    if angles.is_empty() {
        return Err(Error::Config("view angle set is empty".into()));
    }
    for (i, a) in angles.iter().enumerate() {
        if angles[..i].contains(a) {
            return Err(Error::Config(format!("duplicate view angle {a}")));
        }
    }
    angles
        .iter()
        .map(|&theta| Ok((theta, preprocess_scan(seq, theta, forehead_fraction)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tetra() -> FaceMesh {
        FaceMesh::new(
            vec![
                Vertex3::new(0.0, 0.0, 0.0),
                Vertex3::new(1.0, 0.0, 0.0),
                Vertex3::new(0.0, 1.0, 0.0),
                Vertex3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
            None,
        )
        .unwrap()
    }

    fn wide_landmarks() -> LandmarkSet {
        // Box comfortably containing the unit tetrahedron.
        LandmarkSet {
            left_face_bound: Vertex3::new(-10.0, 0.0, 0.0),
            right_face_bound: Vertex3::new(10.0, 0.0, 0.0),
            chin: Vertex3::new(0.0, -10.0, 0.0),
            nose_tip: Vertex3::new(0.0, 0.0, 10.0),
            left_eyebrow: Vertex3::new(-1.0, 8.0, 2.0),
            right_eyebrow: Vertex3::new(1.0, 8.0, 2.0),
        }
    }

    #[test]
    fn face_index_out_of_range_rejected() {
        let err = FaceMesh::new(
            vec![Vertex3::new(0.0, 0.0, 0.0)],
            vec![[0, 0, 7]],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn rotate_zero_is_identity_bit_for_bit() {
        let mesh = tetra();
        assert_eq!(rotate_mesh(&mesh, 0.0), mesh);
    }

    #[test]
    fn rotate_unit_x_by_90_degrees() {
        // Single vertex at (1,0,0): centroid coincides with the vertex, so
        // rotate about an explicit origin-centered mesh instead.
        let mesh = FaceMesh::new(
            vec![Vertex3::new(1.0, 0.0, 0.0), Vertex3::new(-1.0, 0.0, 0.0)],
            vec![],
            None,
        )
        .unwrap();
        let rotated = rotate_mesh(&mesh, 90.0);
        assert_relative_eq!(rotated.vertices[0].x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rotated.vertices[0].y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rotated.vertices[0].z, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn crop_keeps_mesh_inside_box() {
        let mesh = tetra();
        let cropped = crop_face(&mesh, &wide_landmarks(), 1.0).unwrap();
        assert_eq!(cropped, mesh);
    }

    #[test]
    fn crop_drops_vertex_below_chin() {
        // Five vertices, exactly one below chin.y = -10.
        let mesh = FaceMesh::new(
            vec![
                Vertex3::new(0.0, 0.0, 1.0),
                Vertex3::new(1.0, 0.0, 1.0),
                Vertex3::new(0.0, 1.0, 1.0),
                Vertex3::new(0.5, 0.5, 1.0),
                Vertex3::new(0.0, -11.0, 1.0),
            ],
            vec![[0, 1, 2], [1, 2, 4]],
            None,
        )
        .unwrap();
        let cropped = crop_face(&mesh, &wide_landmarks(), 1.0).unwrap();
        assert_eq!(cropped.vertex_count(), 4);
        assert!(cropped
            .vertices
            .iter()
            .all(|v| (v.y - -11.0).abs() > 1e-12));
        // The face touching the removed vertex is gone; the other survives.
        assert_eq!(cropped.face_count(), 1);
        assert_eq!(cropped.faces[0], [0, 1, 2]);
    }

    #[test]
    fn crop_boundary_vertex_kept() {
        let lm = wide_landmarks();
        let mesh = FaceMesh::new(vec![Vertex3::new(10.0, 0.0, 1.0)], vec![], None).unwrap();
        let cropped = crop_face(&mesh, &lm, 1.0).unwrap();
        assert_eq!(cropped.vertex_count(), 1);
    }

    #[test]
    fn crop_everything_is_error() {
        let mesh = FaceMesh::new(vec![Vertex3::new(100.0, 0.0, 0.0)], vec![], None).unwrap();
        let err = crop_face(&mesh, &wide_landmarks(), 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateCrop));
    }

    #[test]
    fn rotate_then_crop_differs_from_crop_then_rotate() {
        // A vertex that enters the crop box only after a 30-degree yaw.
        // Box: x in [-10, 10]. Vertex at x=11.5, z=0 is outside before
        // rotation; after 30 degrees about the origin-centroid:
        //   x' = 11.5*cos30 = 9.959  (inside).
        // The nose tip sits deep so the depth cut never interferes.
        let v = Vertex3::new(11.5, 0.0, 0.0);
        let mirror = Vertex3::new(-11.5, 0.0, 0.0); // keeps centroid at origin
        let mesh = FaceMesh::new(vec![v, mirror], vec![], None).unwrap();
        let mut lm = wide_landmarks();
        lm.nose_tip = Vertex3::new(0.0, 0.0, -50.0);

        let rotated_first = crop_face(&rotate_mesh(&mesh, 30.0), &lm, 1.0).unwrap();
        assert_eq!(rotated_first.vertex_count(), 2);

        // Crop first: the vertex is dropped before it can rotate in.
        let cropped_first = crop_face(&mesh, &lm, 1.0);
        assert!(cropped_first.is_err() || cropped_first.unwrap().vertex_count() < 2);

        // Oracle: hand-applied rotation matrix agrees with the implementation.
        let c = 30f64.to_radians().cos();
        let s = 30f64.to_radians().sin();
        let expected_x = c * 11.5 + s * 0.0;
        let got = rotate_mesh(&mesh, 30.0).vertices[0];
        assert_relative_eq!(got.x, expected_x, epsilon = 1e-12);
    }

    #[test]
    fn preprocess_preserves_frame_count_and_label() {
        let frame = ScanFrame {
            mesh: tetra(),
            landmarks: wide_landmarks(),
        };
        let seq = ScanSequence::new(vec![frame.clone(), frame], "s1".into(), 3).unwrap();
        let out = preprocess_scan(&seq, 15.0, 1.0).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out.expression_label, 3);
        assert_eq!(out.subject_id, "s1");
    }

    #[test]
    fn generate_views_cardinality_and_duplicates() {
        let frame = ScanFrame {
            mesh: tetra(),
            landmarks: wide_landmarks(),
        };
        let seq = ScanSequence::new(vec![frame], "s1".into(), 1).unwrap();
        let views = generate_views(&seq, &[-30.0, -15.0, 0.0, 15.0, 30.0], 1.0).unwrap();
        assert_eq!(views.len(), 5);
        assert_eq!(views[2].0, 0.0);
        assert!(generate_views(&seq, &[0.0, 0.0], 1.0).is_err());
        assert!(generate_views(&seq, &[], 1.0).is_err());
    }

    #[test]
    fn mirrored_views_of_symmetric_mesh() {
        // Mesh symmetric about x=0, with symmetric landmarks. The view at
        // +theta must be the x-mirror of the view at -theta.
        let mut vertices = Vec::new();
        for &(x, y, z) in &[
            (2.0, 0.0, 1.0),
            (1.0, 1.0, 2.0),
            (0.0, -1.0, 3.0),
            (0.0, 2.0, 1.5),
        ] {
            vertices.push(Vertex3::new(x, y, z));
            if x != 0.0 {
                vertices.push(Vertex3::new(-x, y, z));
            }
        }
        let mesh = FaceMesh::new(vertices, vec![], None).unwrap();
        let lm = LandmarkSet {
            left_face_bound: Vertex3::new(-3.0, 0.0, 0.0),
            right_face_bound: Vertex3::new(3.0, 0.0, 0.0),
            chin: Vertex3::new(0.0, -5.0, 0.0),
            nose_tip: Vertex3::new(0.0, 0.0, 4.0),
            left_eyebrow: Vertex3::new(-1.0, 3.0, 1.0),
            right_eyebrow: Vertex3::new(1.0, 3.0, 1.0),
        };
        let seq = ScanSequence::new(
            vec![ScanFrame {
                mesh,
                landmarks: lm,
            }],
            "sym".into(),
            1,
        )
        .unwrap();
        let views = generate_views(&seq, &[20.0, -20.0], 1.0).unwrap();
        let plus = &views[0].1.frames[0].mesh;
        let minus = &views[1].1.frames[0].mesh;
        assert_eq!(plus.vertex_count(), minus.vertex_count());

        // Oracle: reflect the -theta view in x about the centroid plane
        // (x=0 for this mesh) and compare vertex sets.
        let mut reflected: Vec<_> = minus
            .vertices
            .iter()
            .map(|v| (-v.x, v.y, v.z))
            .collect();
        let mut got: Vec<_> = plus.vertices.iter().map(|v| (v.x, v.y, v.z)).collect();
        let key = |p: &(f64, f64, f64)| (p.0 * 1e9, p.1 * 1e9, p.2 * 1e9);
        reflected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in reflected.iter().zip(&got) {
            assert_relative_eq!(a.0, b.0, epsilon = 1e-9);
            assert_relative_eq!(a.1, b.1, epsilon = 1e-9);
            assert_relative_eq!(a.2, b.2, epsilon = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn rotation_preserves_pairwise_distances(
            yaw in -180.0f64..180.0,
            pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 2..20)
        ) {
            let vertices: Vec<_> = pts.iter().map(|&(x, y, z)| Vertex3::new(x, y, z)).collect();
            let mesh = FaceMesh::new(vertices, vec![], None).unwrap();
            let rotated = rotate_mesh(&mesh, yaw);
            for i in 0..mesh.vertex_count() {
                for j in (i + 1)..mesh.vertex_count() {
                    let before = mesh.vertices[i].distance(&mesh.vertices[j]);
                    let after = rotated.vertices[i].distance(&rotated.vertices[j]);
                    prop_assert!((before - after).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn crop_is_subset_and_idempotent(
            pts in proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0, -20.0f64..20.0), 1..30)
        ) {
            let vertices: Vec<_> = pts.iter().map(|&(x, y, z)| Vertex3::new(x, y, z)).collect();
            let mesh = FaceMesh::new(vertices, vec![], None).unwrap();
            let lm = wide_landmarks();
            if let Ok(once) = crop_face(&mesh, &lm, 1.0) {
                prop_assert!(once.vertex_count() <= mesh.vertex_count());
                for v in &once.vertices {
                    prop_assert!(mesh.vertices.contains(v));
                }
                let twice = crop_face(&once, &lm, 1.0).unwrap();
                prop_assert_eq!(once, twice);
            }
        }
    }
}
