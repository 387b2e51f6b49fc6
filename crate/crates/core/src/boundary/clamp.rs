//! Binding mesh boundary loops to curves, clamping, and the discrete inner
//! conormal.

use nalgebra::Vector3;
use serde::Serialize;

use super::{BoundaryData, Curve};
use crate::diffgeo::vertex_sums;
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClampEntry {
    pub vertex: usize,
    pub curve: usize,
    /// Normalized arc-length parameter on the curve.
    pub u: f64,
    pub target: Point,
    pub tangent: Vector3<f64>,
    /// Prescribed inner conormal.
    pub conormal: Vector3<f64>,
}

/// Boundary vertex targets and the conormal penalty weight.
#[derive(Clone, Debug, PartialEq)]
pub struct ClampSet {
    pub entries: Vec<ClampEntry>,
    slot: Vec<Option<usize>>,
    pub w_co: f64,
}

impl ClampSet {
    /// Clamp set of a closed mesh.
    pub fn empty(mesh: &TriMesh) -> Result<ClampSet> {
        if !mesh.is_closed() {
            return Err(Error::invalid("unbound boundary loop"));
        }
        Ok(ClampSet { entries: Vec::new(), slot: vec![None; mesh.n_vertices()], w_co: 0.0 })
    }

    /// Pin every boundary vertex where it currently is. The prescribed
    /// conormal is the mesh's own discrete conormal, so the penalty starts at
    /// zero.
    pub fn pinned(mesh: &TriMesh) -> ClampSet {
        let sums = vertex_sums(mesh);
        let mut entries = Vec::new();
        let mut slot = vec![None; mesh.n_vertices()];
        for (li, lp) in mesh.boundary_loops().iter().enumerate() {
            for (k, &v) in lp.iter().enumerate() {
                let (c, t, _) = discrete_conormal(mesh, &sums.normal_area[v], v);
                slot[v] = Some(entries.len());
                entries.push(ClampEntry {
                    vertex: v,
                    curve: li,
                    u: k as f64 / lp.len() as f64,
                    target: mesh.vertices()[v],
                    tangent: t.normalize(),
                    conormal: c.normalize(),
                });
            }
        }
        ClampSet { entries, slot, w_co: 0.0 }
    }

    pub fn with_weight(mut self, w_co: f64) -> ClampSet {
        self.w_co = w_co;
        self
    }

    pub fn entry(&self, v: usize) -> Option<&ClampEntry> {
        self.slot.get(v).copied().flatten().map(|i| &self.entries[i])
    }

    pub fn is_clamped(&self, v: usize) -> bool {
        self.entry(v).is_some()
    }

    /// Check that the set covers exactly the boundary of `mesh`.
    pub fn check(&self, mesh: &TriMesh) -> Result<()> {
        if self.slot.len() != mesh.n_vertices() {
            return Err(Error::invalid("clamp set belongs to a different mesh"));
        }
        for v in 0..mesh.n_vertices() {
            if mesh.is_boundary(v) != self.is_clamped(v) {
                return Err(Error::invalid("unbound boundary loop"));
            }
        }
        Ok(())
    }

    /// Move every clamped vertex onto its target.
    pub fn apply(&self, mesh: &TriMesh) -> TriMesh {
        let mut v = mesh.vertices().to_vec();
        for e in &self.entries {
            v[e.vertex] = e.target;
        }
        mesh.with_vertices(v)
    }
}

fn winding(points: &[Point], center: &Point, up: &Vector3<f64>) -> f64 {
    let n = points.len();
    (0..n).map(|k| up.dot(&(points[k] - center).cross(&(points[(k + 1) % n] - center)))).sum()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn bind_loop(mesh: &TriMesh, lp: &[usize], curve: &Curve) -> Vec<(usize, f64)> {
    let pts: Vec<Point> = lp.iter().map(|&v| mesh.vertices()[v]).collect();
    let n = pts.len();
    let mut s = vec![0.0];
    for k in 0..n - 1 {
        s.push(s[k] + (pts[k + 1] - pts[k]).norm());
    }
    let total = s[n - 1] + (pts[0] - pts[n - 1]).norm();
    let s: Vec<f64> = s.iter().map(|x| x / total).collect();

    let up = curve.up();
    let c = curve.centroid();
    let curve_pts: Vec<Point> = (0..64).map(|k| curve.point(k as f64 / 64.0).0).collect();
    let dir = if winding(&pts, &c, &up) * winding(&curve_pts, &c, &up) < 0.0 { -1.0 } else { 1.0 };

    let cost = |offset: f64| -> f64 { (0..n).map(|k| (pts[k] - curve.point(offset + dir * s[k]).0).norm_squared()).sum() };
    let m = (4 * n).max(256);
    let best = (0..m).map(|k| k as f64 / m as f64).fold((0.0, f64::INFINITY), |acc, o| {
        let c = cost(o);
        if c < acc.1 {
            (o, c)
        } else {
            acc
        }
    });
    let h = 1.0 / m as f64;
    let offset = golden_min(cost, best.0 - h, best.0 + h);
    lp.iter().zip(&s).map(|(&v, sk)| (v, (offset + dir * sk).rem_euclid(1.0))).collect()
}

/// Assign every boundary vertex a point of Γ by normalized arc length,
/// preserving cyclic order, with the cyclic offset fitted by least squares.
pub fn bind(mesh: &TriMesh, bd: &BoundaryData) -> Result<ClampSet> {
    let loops = mesh.boundary_loops();
    if loops.len() != bd.curves.len() {
        return Err(Error::invalid(format!(
            "mesh has {} boundary loops but the boundary data has {} curves",
            loops.len(),
            bd.curves.len()
        )));
    }
    let centroid = |lp: &Vec<usize>| lp.iter().map(|&v| mesh.vertices()[v]).sum::<Point>() / lp.len() as f64;
    let loop_centroids: Vec<Point> = loops.iter().map(centroid).collect();
    // greedy nearest-centroid pairing
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, lc) in loop_centroids.iter().enumerate() {
        for (j, sc) in bd.curves.iter().enumerate() {
            pairs.push(((lc - sc.curve.centroid()).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut loop_to_curve = vec![None; loops.len()];
    let mut used = vec![false; bd.curves.len()];
    for (_, i, j) in pairs {
        if loop_to_curve[i].is_none() && !used[j] {
            loop_to_curve[i] = Some(j);
            used[j] = true;
        }
    }

    let mut entries = Vec::new();
    let mut slot = vec![None; mesh.n_vertices()];
    for (li, lp) in loops.iter().enumerate() {
        let ci = loop_to_curve[li].expect("every loop is paired");
        let curve = &bd.curves[ci].curve;
        for (v, u) in bind_loop(mesh, lp, curve) {
            let (target, tangent) = curve.point(u);
            slot[v] = Some(entries.len());
            entries.push(ClampEntry { vertex: v, curve: ci, u, target, tangent, conormal: curve.normal_at(&target, &tangent) });
        }
    }
    Ok(ClampSet { entries, slot, w_co: 0.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConormalResidual {
    pub vertices: Vec<usize>,
    /// Angle between the discrete inner conormal and the target, radians.
    pub angles: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

/// Discrete inner conormal at boundary vertex `v`: `ν_v × (x_next − x_prev)`
/// normalized, which lies in the vertex tangent plane, is orthogonal to the
/// boundary direction and points into the surface because loops keep the
/// surface on their left.
pub(crate) fn discrete_conormal(mesh: &TriMesh, normal_area: &Vector3<f64>, v: usize) -> (Vector3<f64>, Vector3<f64>, f64) {
    let (prev, next) = mesh.boundary_neighbors(v).expect("boundary vertex");
    let x = mesh.vertices();
    let t = x[next] - x[prev];
    let c = normal_area.cross(&t);
    let weight = 0.5 * ((x[next] - x[v]).norm() + (x[v] - x[prev]).norm());
    (c, t, weight)
}

pub fn conormal_residual(mesh: &TriMesh, clamp: &ClampSet) -> Result<ConormalResidual> {
    clamp.check(mesh)?;
    let sums = vertex_sums(mesh);
    let mut vertices = Vec::with_capacity(clamp.entries.len());
    let mut angles = Vec::with_capacity(clamp.entries.len());
    for e in &clamp.entries {
        let (c, _, _) = discrete_conormal(mesh, &sums.normal_area[e.vertex], e.vertex);
        let co = c.normalize();
        vertices.push(e.vertex);
        angles.push(co.cross(&e.conormal).norm().atan2(co.dot(&e.conormal)));
    }
    let max = angles.iter().cloned().fold(0.0, f64::max);
    let mean = if angles.is_empty() { 0.0 } else { angles.iter().sum::<f64>() / angles.len() as f64 };
    Ok(ConormalResidual { vertices, angles, max, mean })
}

#[derive(Clone, Debug, Serialize)]
pub struct Penalty {
    /// `w_co Σ ℓ_b (1 − co_b·n_b)` with `ℓ_b` half the adjacent boundary
    /// edge lengths.
    pub value: f64,
}

/// Penalty value and its derivative with respect to each boundary vertex's
/// summed face area vector.
pub(crate) fn penalty_with_adjoint(
    mesh: &TriMesh,
    clamp: &ClampSet,
    normal_area: &[Vector3<f64>],
    weight: f64,
) -> (f64, Vec<(usize, Vector3<f64>)>) {
    let mut value = 0.0;
    let mut adj = Vec::with_capacity(clamp.entries.len());
    for e in &clamp.entries {
        let (c, t, l) = discrete_conormal(mesh, &normal_area[e.vertex], e.vertex);
        let len = c.norm();
        let co = c / len;
        let dot = co.dot(&e.conormal);
        value += weight * l * (1.0 - dot);
        let perp = (e.conormal - co * dot) / len;
        adj.push((e.vertex, -t.cross(&perp) * (weight * l)));
    }
    (value, adj)
}

pub fn penalty(mesh: &TriMesh, clamp: &ClampSet) -> Result<Penalty> {
    clamp.check(mesh)?;
    let sums = vertex_sums(mesh);
    Ok(Penalty { value: penalty_with_adjoint(mesh, clamp, &sums.normal_area, clamp.w_co).0 })
}
