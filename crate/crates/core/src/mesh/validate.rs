use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{TriMesh, DEGENERACY_TOL};

/// One violated mesh invariant with the offending simplices.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    IndexOutOfRange { face: usize },
    RepeatedIndex { face: usize },
    /// More than two faces on one edge.
    NonManifoldEdge { edge: [usize; 2], faces: Vec<usize> },
    /// Two faces traverse a shared edge in the same direction.
    Orientation { edge: [usize; 2], faces: [usize; 2] },
    DegenerateFace { face: usize, area: f64 },
    IsolatedVertex { vertex: usize },
    /// Boundary edges that are not covered by a simple boundary loop.
    BoundaryLoop { vertices: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexOutOfRange { face } => write!(f, "face {face} has an out-of-range index"),
            Violation::RepeatedIndex { face } => write!(f, "face {face} repeats a vertex"),
            Violation::NonManifoldEdge { edge, faces } => {
                write!(f, "edge {:?} shared by {} faces {:?}", edge, faces.len(), faces)
            }
            Violation::Orientation { edge, faces } => {
                write!(f, "faces {:?} traverse edge {:?} in the same direction", faces, edge)
            }
            Violation::DegenerateFace { face, area } => write!(f, "face {face} is degenerate (area {area:e})"),
            Violation::IsolatedVertex { vertex } => write!(f, "vertex {vertex} has no incident face"),
            Violation::BoundaryLoop { vertices } => {
                write!(f, "boundary is not a union of simple loops near vertices {:?}", vertices)
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Faces that take part in an orientation violation.
    pub fn orientation_faces(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::Orientation { faces, .. } => Some(faces.to_vec()),
                _ => None,
            })
            .flatten()
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn summary(&self) -> String {
        let mut s: Vec<String> = self.violations.iter().take(5).map(|v| v.to_string()).collect();
        if self.violations.len() > 5 {
            s.push(format!("... {} more", self.violations.len() - 5));
        }
        s.join("; ")
    }
}

/// Check every mesh invariant. Never fails; an empty report means valid.
pub fn validate(mesh: &TriMesh) -> ValidationReport {
    let mut violations = Vec::new();
    let nv = mesh.n_vertices();
    let mut ok_faces = Vec::with_capacity(mesh.n_faces());
    for (f, tri) in mesh.faces().iter().enumerate() {
        if tri.iter().any(|&i| i >= nv) {
            violations.push(Violation::IndexOutOfRange { face: f });
        } else if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            violations.push(Violation::RepeatedIndex { face: f });
        } else {
            ok_faces.push(f);
        }
    }

    // undirected edge -> list of (face, forward?)
    let mut edges: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for &f in &ok_faces {
        let tri = mesh.faces()[f];
        for c in 0..3 {
            let (a, b) = (tri[c], tri[(c + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push((f, a < b));
        }
    }
    let mut keys: Vec<_> = edges.keys().copied().collect();
    keys.sort_unstable();
    let mut boundary_count: HashMap<usize, usize> = HashMap::new();
    for key in keys {
        let inc = &edges[&key];
        match inc.len() {
            1 => {
                *boundary_count.entry(key.0).or_default() += 1;
                *boundary_count.entry(key.1).or_default() += 1;
            }
            2 => {
                if inc[0].1 == inc[1].1 {
                    violations.push(Violation::Orientation {
                        edge: [key.0, key.1],
                        faces: [inc[0].0, inc[1].0],
                    });
                }
            }
            _ => violations.push(Violation::NonManifoldEdge {
                edge: [key.0, key.1],
                faces: inc.iter().map(|x| x.0).collect(),
            }),
        }
    }

    let diag = mesh.bbox_diagonal();
    let tol = DEGENERACY_TOL * diag * diag;
    for &f in &ok_faces {
        let area = mesh.face_area(f);
        if !(area > tol) {
            violations.push(Violation::DegenerateFace { face: f, area });
        }
    }

    for v in 0..nv {
        if mesh.topology().vertex_faces[v].is_empty() {
            violations.push(Violation::IsolatedVertex { vertex: v });
        }
    }

    // every boundary vertex must carry exactly two boundary edges, and the
    // derived loops must cover all boundary edges
    let mut bad: Vec<usize> = boundary_count.iter().filter(|&(_, &c)| c != 2).map(|(&v, _)| v).collect();
    let covered: usize = mesh.boundary_loops().iter().map(|l| l.len()).sum();
    let total: usize = boundary_count.values().sum::<usize>() / 2;
    if bad.is_empty() && covered != total {
        bad = mesh.boundary_loops().iter().flatten().copied().take(8).collect();
    }
    if !bad.is_empty() {
        bad.sort_unstable();
        violations.push(Violation::BoundaryLoop { vertices: bad });
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, Point, PrimitiveSpec};

    #[test]
    fn icosphere_is_valid() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 2 }).unwrap();
        assert!(validate(&m).is_valid());
    }

    #[test]
    fn flipped_face_is_reported() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 1 }).unwrap();
        let mut faces = m.faces().to_vec();
        faces[7] = [faces[7][0], faces[7][2], faces[7][1]];
        let bad = TriMesh::from_raw(m.vertices().to_vec(), faces);
        let report = validate(&bad);
        assert!(!report.is_valid());
        let of = report.orientation_faces();
        assert!(of.contains(&7));
        // the flipped face disagrees with all three neighbours
        let hits = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::Orientation { faces, .. } if faces.contains(&7)))
            .count();
        assert_eq!(hits, 3);
    }

    #[test]
    fn zero_area_face_is_reported() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.5, 0.0, 0.0),
        ];
        // face 1 is collinear
        let m = TriMesh::from_raw(v, vec![[0, 1, 2], [0, 3, 1]]);
        let r = validate(&m);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::DegenerateFace { face: 1, .. })));
    }
}
