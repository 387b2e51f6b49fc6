//! Oriented manifold triangle meshes with boundary.
//!
//! A [`TriMesh`] stores positions and consistently wound index triples. The
//! adjacency needed by curvature loops (incident faces per vertex, boundary
//! loops, boundary successor/predecessor) is derived once at construction and
//! never mutated; new geometry means a new mesh.

mod io;
mod primitive;
mod validate;

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use io::{load, read_json, read_obj, read_off, save, write_json, write_obj, write_off, MeshFormat};
pub use primitive::{generate_primitive, AnalyticSurface, PrimitiveSpec};
pub use validate::{validate, ValidationReport, Violation};

pub type Point = Vector3<f64>;

/// Relative degeneracy threshold: a face is degenerate when its area is
/// below this times the squared bounding-box diagonal.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    topo: Topology,
    surface: Option<AnalyticSurface>,
}

/// Derived adjacency. Built best-effort even for invalid input so that
/// [`validate`] can report on anything.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    /// Incident (face, corner) pairs per vertex, in face order.
    pub vertex_faces: Vec<Vec<(usize, usize)>>,
    /// Closed boundary cycles; consecutive entries are joined by a boundary
    /// edge traversed with the surface on the left.
    pub boundary_loops: Vec<Vec<usize>>,
    pub is_boundary: Vec<bool>,
    /// For boundary vertices: (loop index, position within loop).
    pub boundary_slot: Vec<Option<(usize, usize)>>,
    pub edge_count: usize,
    pub boundary_edge_count: usize,
    /// For boundary vertices: the sorted interior vertices of their one-ring.
    /// Empty for interior vertices.
    pub boundary_stencil: Vec<Vec<usize>>,
}

impl Topology {
    fn build(n_vertices: usize, faces: &[[usize; 3]]) -> Topology {
        let mut vertex_faces = vec![Vec::new(); n_vertices];
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
        for (f, tri) in faces.iter().enumerate() {
            for c in 0..3 {
                if tri[c] < n_vertices {
                    vertex_faces[tri[c]].push((f, c));
                }
                directed.insert((tri[c], tri[(c + 1) % 3]), f);
            }
        }
        let mut undirected = std::collections::HashSet::with_capacity(directed.len());
        for &(a, b) in directed.keys() {
            undirected.insert((a.min(b), a.max(b)));
        }
        // boundary half-edges: a -> b present, b -> a absent
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut starts: Vec<usize> = Vec::new();
        for tri in faces {
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                if !directed.contains_key(&(b, a)) && !next.contains_key(&a) {
                    next.insert(a, b);
                    starts.push(a);
                }
            }
        }
        let boundary_edge_count = next.len();
        let mut is_boundary = vec![false; n_vertices];
        let mut boundary_slot = vec![None; n_vertices];
        let mut boundary_loops = Vec::new();
        let mut visited = std::collections::HashSet::new();
        for &s in &starts {
            if visited.contains(&s) {
                continue;
            }
            let mut lp = vec![s];
            visited.insert(s);
            let mut cur = s;
            loop {
                let Some(&n) = next.get(&cur) else { break };
                if n == s {
                    break;
                }
                if !visited.insert(n) {
                    break;
                }
                lp.push(n);
                cur = n;
            }
            let li = boundary_loops.len();
            for (i, &v) in lp.iter().enumerate() {
                if v < n_vertices {
                    is_boundary[v] = true;
                    boundary_slot[v] = Some((li, i));
                }
            }
            boundary_loops.push(lp);
        }
        let mut boundary_stencil = vec![Vec::new(); n_vertices];
        for v in 0..n_vertices {
            if !is_boundary[v] {
                continue;
            }
            let mut st: Vec<usize> = vertex_faces[v]
                .iter()
                .flat_map(|&(f, _)| faces[f])
                .filter(|&w| w < n_vertices && !is_boundary[w])
                .collect();
            st.sort_unstable();
            st.dedup();
            boundary_stencil[v] = st;
        }
        Topology {
            vertex_faces,
            boundary_stencil,
            boundary_loops,
            is_boundary,
            boundary_slot,
            edge_count: undirected.len(),
            boundary_edge_count,
        }
    }
}

impl TriMesh {
    /// Build a mesh and check every invariant; the error message carries the
    /// first violations of the validation report.
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<TriMesh> {
        let mesh = TriMesh::from_raw(vertices, faces);
        let report = validate(&mesh);
        if !report.is_valid() {
            return Err(Error::invalid(format!("invalid mesh: {}", report.summary())));
        }
        Ok(mesh)
    }

    /// Build without validation. Used for I/O and for constructing defective
    /// meshes that the validator should report on.
    pub fn from_raw(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> TriMesh {
        let topo = Topology::build(vertices.len(), &faces);
        TriMesh { vertices, faces, topo, surface: None }
    }

    pub(crate) fn with_surface(mut self, surface: Option<AnalyticSurface>) -> TriMesh {
        self.surface = surface;
        self
    }

    /// Same connectivity, new positions. Any analytic surface tag is dropped.
    pub fn with_vertices(&self, vertices: Vec<Point>) -> TriMesh {
        assert_eq!(vertices.len(), self.vertices.len(), "vertex count must not change");
        TriMesh { vertices, faces: self.faces.clone(), topo: self.topo.clone(), surface: None }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn surface(&self) -> Option<&AnalyticSurface> {
        self.surface.as_ref()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.topo.edge_count
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.topo.boundary_loops
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.topo.is_boundary[v]
    }

    pub fn is_closed(&self) -> bool {
        self.topo.boundary_loops.is_empty()
    }

    /// Predecessor and successor of a boundary vertex along its loop.
    pub fn boundary_neighbors(&self, v: usize) -> Option<(usize, usize)> {
        let (l, i) = self.topo.boundary_slot[v]?;
        let lp = &self.topo.boundary_loops[l];
        let n = lp.len();
        Some((lp[(i + n - 1) % n], lp[(i + 1) % n]))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    pub fn face_points(&self, f: usize) -> [&Point; 3] {
        let [a, b, c] = self.faces[f];
        [&self.vertices[a], &self.vertices[b], &self.vertices[c]]
    }

    /// Unnormalized face normal with length twice the face area.
    pub fn face_cross(&self, f: usize) -> Point {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Point {
        self.face_cross(f).normalize()
    }

    pub fn barycenter(&self, f: usize) -> Point {
        let [a, b, c] = self.face_points(f);
        (a + b + c) / 3.0
    }

    pub fn area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for p in &self.vertices {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Longest edge length.
    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for f in 0..self.n_faces() {
            let [a, b, c] = self.face_points(f);
            m = m.max((b - a).norm()).max((c - b).norm()).max((a - c).norm());
        }
        m
    }

    /// Sorted one-ring neighbors of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n_vertices()];
        for tri in &self.faces {
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for n in nb.iter_mut() {
            n.sort_unstable();
            n.dedup();
        }
        nb
    }

    /// Reverse the winding of every face.
    pub fn flipped(&self) -> TriMesh {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        TriMesh::from_raw(self.vertices.clone(), faces)
    }

    /// Disjoint union; indices of `other` are shifted.
    pub fn disjoint_union(&self, other: &TriMesh) -> TriMesh {
        let off = self.n_vertices();
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices);
        let mut f = self.faces.clone();
        f.extend(other.faces.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        TriMesh::from_raw(v, f)
    }

    pub fn transformed(&self, map: impl Fn(&Point) -> Point) -> TriMesh {
        self.with_vertices(self.vertices.iter().map(map).collect())
    }

    /// Smooth low-frequency radial perturbation about the bounding-box
    /// centre: `x ↦ c + (x − c)(1 + amplitude·p(u))` with `u` the unit
    /// direction and `p` a seeded combination of degree ≤ 2 harmonics scaled
    /// so that `max |p| = 1` over the vertices. Boundary vertices stay put.
    pub fn perturbed_radially(&self, amplitude: f64, seed: u64) -> TriMesh {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coef: [f64; 8] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let (lo, hi) = self.bbox();
        let c = (lo + hi) * 0.5;
        let field = |p: &Point| -> f64 {
            let d = p - c;
            let n = d.norm();
            if n == 0.0 {
                return 0.0;
            }
            let u = d / n;
            let basis = [
                u.x,
                u.y,
                u.z,
                u.x * u.y,
                u.y * u.z,
                u.z * u.x,
                u.x * u.x - u.y * u.y,
                3.0 * u.z * u.z - 1.0,
            ];
            basis.iter().zip(&coef).map(|(b, k)| b * k).sum()
        };
        let peak = self.vertices.iter().map(|p| field(p).abs()).fold(0.0, f64::max);
        let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
        let v = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, p)| if self.topo.is_boundary[i] { *p } else { c + (p - c) * (1.0 + scale * field(p)) })
            .collect();
        self.with_vertices(v)
    }

    /// Midpoint 1-to-4 subdivision. Parent vertices keep their indices; edge
    /// midpoints follow in order of first appearance. Meshes generated from a
    /// primitive re-project new vertices onto the analytic surface (interior)
    /// or boundary curve (boundary edges).
    pub fn refine(&self) -> TriMesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        let boundary_edge = |a: usize, b: usize| {
            self.topo.is_boundary[a]
                && self.topo.is_boundary[b]
                && self
                    .boundary_neighbors(a)
                    .map(|(p, n)| p == b || n == b)
                    .unwrap_or(false)
                && self.is_single_sided(a, b)
        };
        for tri in &self.faces {
            let mut m = [0usize; 3];
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[c] = *mid.entry(key).or_insert_with(|| {
                    let mut p = (vertices[a] + vertices[b]) * 0.5;
                    if let Some(s) = &self.surface {
                        p = if boundary_edge(a, b) {
                            s.project_boundary(&p)
                        } else {
                            s.project(&p)
                        };
                    }
                    vertices.push(p);
                    vertices.len() - 1
                });
            }
            let [a, b, c] = *tri;
            faces.push([a, m[0], m[2]]);
            faces.push([m[0], b, m[1]]);
            faces.push([m[2], m[1], c]);
            faces.push([m[0], m[1], m[2]]);
        }
        TriMesh::from_raw(vertices, faces).with_surface(self.surface.clone())
    }

    fn is_single_sided(&self, a: usize, b: usize) -> bool {
        let count = self.topo.vertex_faces[a]
            .iter()
            .filter(|&&(f, _)| self.faces[f].contains(&b))
            .count();
        count == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TriMesh {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn boundary_loop_follows_winding() {
        let m = square();
        assert_eq!(m.boundary_loops().len(), 1);
        let lp = &m.boundary_loops()[0];
        assert_eq!(lp.len(), 4);
        // counter-clockwise seen from +z: 0 -> 1 -> 2 -> 3
        let i0 = lp.iter().position(|&v| v == 0).unwrap();
        assert_eq!(lp[(i0 + 1) % 4], 1);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn refine_quadruples_faces_and_keeps_parents() {
        let m = square();
        let r = m.refine();
        assert_eq!(r.n_faces(), 8);
        assert_eq!(r.n_vertices(), 9);
        assert_eq!(&r.vertices()[..4], m.vertices());
        assert_eq!(r.boundary_loops()[0].len(), 8);
        assert!(validate(&r).is_valid());
    }

    #[test]
    fn radial_perturbation_is_bounded_and_seeded() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 2 }).unwrap();
        let a = m.perturbed_radially(0.1, 7);
        let b = m.perturbed_radially(0.1, 7);
        assert_eq!(a.vertices(), b.vertices());
        let radii: Vec<f64> = a.vertices().iter().map(|p| p.norm()).collect();
        let max_dev = radii.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        assert!((max_dev - 0.1).abs() < 1e-12, "{max_dev}");
        assert!(validate(&a).is_valid());
    }
}
