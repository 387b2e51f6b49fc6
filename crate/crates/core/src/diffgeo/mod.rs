//! Discrete curvature operators and the integral identities built on them.
//!
//! Conventions: the vertex normal `ν` is the normalized sum of incident face
//! area vectors (so it follows the face winding), the mean-curvature vector
//! is the area gradient divided by the vertex area, and `H̄ = H·ν`. With
//! these choices the outward-oriented unit sphere has `H̄ = +2`.

pub mod kernel;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use kernel::{corner_angles, face_geom_f64, FaceGeom};

/// Per-vertex sums of face quantities: area gradient, area-weighted normal
/// and mixed vertex area.
#[derive(Clone, Debug)]
pub struct VertexSums {
    pub grad_area: Vec<Vector3<f64>>,
    pub normal_area: Vec<Vector3<f64>>,
    pub area: Vec<f64>,
}

pub(crate) fn face_geoms(mesh: &TriMesh) -> Vec<FaceGeom<f64>> {
    (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            face_geom_f64(mesh.face_points(f))
        })
        .collect()
}

/// Accumulate face quantities in face order; the result does not depend on
/// the number of worker threads.
pub fn vertex_sums(mesh: &TriMesh) -> VertexSums {
    let geoms = face_geoms(mesh);
    let n = mesh.n_vertices();
    let mut out = VertexSums {
        grad_area: vec![Vector3::zeros(); n],
        normal_area: vec![Vector3::zeros(); n],
        area: vec![0.0; n],
    };
    for (tri, g) in mesh.faces().iter().zip(&geoms) {
        let na = g.normal_area.value();
        for c in 0..3 {
            let v = tri[c];
            out.grad_area[v] += g.grad_area[c].value();
            out.normal_area[v] += na;
            out.area[v] += g.corner_area[c];
        }
    }
    out
}

/// Per-vertex curvature quantities.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    /// Mean-curvature vector `H` (area gradient per unit vertex area).
    pub mean_vector: Vec<Vector3<f64>>,
    /// Scalar mean curvature `H̄ = H·ν` (sum of principal curvatures).
    pub mean: Vec<f64>,
    /// Gauss curvature from the angle defect.
    pub gauss: Vec<f64>,
    /// `|A|² = H̄² − 2K`, clamped at zero.
    pub a2: Vec<f64>,
    /// Unclamped `H̄² − 2K`.
    pub a2_raw: Vec<f64>,
    pub area: Vec<f64>,
    pub normal: Vec<Vector3<f64>>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Vertices where the discrete `H̄² − 2K` went negative before clamping.
    pub fn clamped_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.a2_raw[v] < 0.0).collect()
    }

    /// CSV with columns vertex_id, x, y, z, Hx, Hy, Hz, Hbar, K, A2, area.
    pub fn write_csv<W: Write>(&self, mesh: &TriMesh, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vertex_id", "x", "y", "z", "Hx", "Hy", "Hz", "Hbar", "K", "A2", "area"])?;
        for v in 0..self.len() {
            let p = mesh.vertices()[v];
            let h = self.mean_vector[v];
            w.write_record(&[
                v.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
                h.x.to_string(),
                h.y.to_string(),
                h.z.to_string(),
                self.mean[v].to_string(),
                self.gauss[v].to_string(),
                self.a2[v].to_string(),
                self.area[v].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sum of incident corner angles per vertex.
pub fn angle_sums(mesh: &TriMesh) -> Vec<f64> {
    let angles: Vec<[f64; 3]> = (0..mesh.n_faces()).into_par_iter().map(|f| corner_angles(mesh.face_points(f))).collect();
    let mut sums = vec![0.0; mesh.n_vertices()];
    for (tri, a) in mesh.faces().iter().zip(&angles) {
        for c in 0..3 {
            sums[tri[c]] += a[c];
        }
    }
    sums
}

/// Angle defect per vertex: `2π − Σθ` inside, `π − Σθ` on the boundary.
pub fn angle_defects(mesh: &TriMesh) -> Vec<f64> {
    angle_sums(mesh)
        .into_iter()
        .enumerate()
        .map(|(v, s)| if mesh.is_boundary(v) { PI - s } else { 2.0 * PI - s })
        .collect()
}

pub fn curvature(mesh: &TriMesh) -> Result<CurvatureField> {
    if let Some(v) = (0..mesh.n_vertices()).find(|&v| mesh.topology().vertex_faces[v].is_empty()) {
        return Err(Error::invalid(format!("vertex {v} is isolated")));
    }
    let sums = vertex_sums(mesh);
    let defects = angle_defects(mesh);
    let n = mesh.n_vertices();
    let mut field = CurvatureField {
        mean_vector: Vec::with_capacity(n),
        mean: Vec::with_capacity(n),
        gauss: Vec::with_capacity(n),
        a2: Vec::with_capacity(n),
        a2_raw: Vec::with_capacity(n),
        area: sums.area.clone(),
        normal: Vec::with_capacity(n),
    };
    for v in 0..n {
        let a = sums.area[v];
        let nu = sums.normal_area[v].normalize();
        let h = sums.grad_area[v] / a;
        let hbar = h.dot(&nu);
        let k = defects[v] / a;
        let raw = hbar * hbar - 2.0 * k;
        field.mean_vector.push(h);
        field.mean.push(hbar);
        field.gauss.push(k);
        field.a2_raw.push(raw);
        field.a2.push(raw.max(0.0));
        field.normal.push(nu);
    }
    let clamped = field.clamped_vertices();
    if !clamped.is_empty() {
        log::debug!("|A|^2 clamped at {} vertices", clamped.len());
    }
    Ok(field)
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct GaussBonnet {
    /// Sum of interior angle defects.
    pub total_k: f64,
    /// Sum of boundary turning angles (discrete geodesic curvature).
    pub boundary_geodesic: f64,
    pub euler_char: i64,
}

impl GaussBonnet {
    pub fn total(&self) -> f64 {
        self.total_k + self.boundary_geodesic
    }

    /// Relative mismatch against `2πχ` (absolute when `χ = 0`).
    pub fn closure_error(&self) -> f64 {
        let target = 2.0 * PI * self.euler_char as f64;
        (self.total() - target).abs() / target.abs().max(1.0)
    }
}

pub fn gauss_bonnet(mesh: &TriMesh) -> GaussBonnet {
    let defects = angle_defects(mesh);
    let mut total_k = 0.0;
    let mut boundary_geodesic = 0.0;
    for (v, d) in defects.iter().enumerate() {
        if mesh.is_boundary(v) {
            boundary_geodesic += d;
        } else {
            total_k += d;
        }
    }
    GaussBonnet { total_k, boundary_geodesic, euler_char: mesh.euler_characteristic() }
}

/// Both sides of the first-variation identity for a vertex field `X`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FirstVariation {
    /// `∫ div_T X dμ` with the per-face tangential divergence of the
    /// piecewise-linear interpolant.
    pub divergence: f64,
    /// `∫ H̄ ν·X dμ` with the vertex-area measure.
    pub curvature: f64,
    pub residual: f64,
}

/// Compare `∫ div_T X` against `∫ H·X`. `H` points outward on an outward
/// sphere here, so the identity reads `∫ div_T X = ∫ H·X`; the classical
/// form `δV(X) = −∫ H·X` uses the opposite sign of `H`. The curvature side
/// uses the normal part `H̄ν` of the mean-curvature vector; the full discrete
/// vector would reproduce the divergence side exactly by construction.
pub fn first_variation_residual(mesh: &TriMesh, field: &[Vector3<f64>]) -> Result<FirstVariation> {
    if field.len() != mesh.n_vertices() {
        return Err(Error::invalid("vector field length must match the vertex count"));
    }
    if field.iter().any(|x| !x.iter().all(|c| c.is_finite())) {
        return Err(Error::invalid("vector field must be finite"));
    }
    let curv = curvature(mesh)?;
    let per_face: Vec<f64> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            let tri = mesh.faces()[f];
            let g = face_geom_f64(mesh.face_points(f));
            (0..3).map(|k| g.grad_area[k].value().dot(&field[tri[k]])).sum()
        })
        .collect();
    let divergence: f64 = per_face.iter().sum();
    let curvature: f64 = (0..mesh.n_vertices())
        .map(|v| curv.mean[v] * curv.normal[v].dot(&field[v]) * curv.area[v])
        .sum();
    let residual = (divergence - curvature).abs() / (1.0 + curvature.abs());
    Ok(FirstVariation { divergence, curvature, residual })
}

/// Orthonormal oriented tangent pair of a plane.
#[derive(Clone, Copy, Debug)]
pub struct TangentFrame {
    pub tau1: Vector3<f64>,
    pub tau2: Vector3<f64>,
}

impl TangentFrame {
    pub fn new(tau1: Vector3<f64>, tau2: Vector3<f64>) -> Result<TangentFrame> {
        let tol = 1e-10;
        if (tau1.norm() - 1.0).abs() > tol || (tau2.norm() - 1.0).abs() > tol || tau1.dot(&tau2).abs() > tol {
            return Err(Error::invalid("tangent frame must be orthonormal"));
        }
        Ok(TangentFrame { tau1, tau2 })
    }

    pub fn normal(&self) -> Vector3<f64> {
        hodge_orientation(self)
    }
}

/// Per-face frames: `τ₁` along the first edge, `τ₂ = ν × τ₁`.
pub fn tangent_frames(mesh: &TriMesh) -> Vec<TangentFrame> {
    (0..mesh.n_faces())
        .map(|f| {
            let [a, b, _] = mesh.face_points(f);
            let nu = mesh.face_normal(f);
            let tau1 = (b - a).normalize();
            TangentFrame { tau1, tau2: nu.cross(&tau1) }
        })
        .collect()
}

/// Hodge star of `τ₁ ∧ τ₂` in R³: the cross product.
pub fn hodge_orientation(frame: &TangentFrame) -> Vector3<f64> {
    frame.tau1.cross(&frame.tau2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, PrimitiveSpec};

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    #[test]
    fn unit_sphere_curvatures() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 3 }).unwrap();
        let c = curvature(&m).unwrap();
        let h = median(c.mean.clone());
        let k = median(c.gauss.clone());
        assert!((h - 2.0).abs() < 0.04, "H = {h}");
        assert!((k - 1.0).abs() < 0.03, "K = {k}");
        let total: f64 = c.area.iter().sum();
        assert!((total - m.area()).abs() < 1e-12 * total);
        assert!(c.normal.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn flat_patch_interior_is_flat() {
        let m = generate_primitive(&PrimitiveSpec::PlanePatch { extent: 2.0, level: 3 }).unwrap();
        let c = curvature(&m).unwrap();
        for v in (0..m.n_vertices()).filter(|&v| !m.is_boundary(v)) {
            assert!(c.mean[v].abs() < 1e-12);
            assert!(c.gauss[v].abs() < 1e-12);
        }
    }

    #[test]
    fn cylinder_curvatures_on_symmetric_grid() {
        let mut errs = Vec::new();
        for level in 2..5 {
            let m = generate_primitive(&PrimitiveSpec::Cylinder { radius: 1.0, height: 1.0, level }).unwrap();
            let c = curvature(&m).unwrap();
            let interior: Vec<usize> = (0..m.n_vertices()).filter(|&v| !m.is_boundary(v)).collect();
            let e = interior.iter().map(|&v| (c.mean[v] - 1.0).abs().max(c.gauss[v].abs())).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs.iter().all(|&e| e < 1e-10), "{errs:?}");
    }

    #[test]
    fn gauss_bonnet_on_primitives() {
        let s = gauss_bonnet(&generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 2 }).unwrap());
        assert!((s.total_k - 4.0 * PI).abs() < 1e-10);
        assert_eq!(s.euler_char, 2);
        let t = gauss_bonnet(
            &generate_primitive(&PrimitiveSpec::Torus { major_radius: 2.0, minor_radius: 0.7, level: 2 }).unwrap(),
        );
        assert!(t.total_k.abs() < 1e-10);
        assert_eq!(t.euler_char, 0);
        let d = gauss_bonnet(&generate_primitive(&PrimitiveSpec::Disk { radius: 1.0, level: 3 }).unwrap());
        assert!(d.total_k.abs() < 1e-10);
        assert!((d.boundary_geodesic - 2.0 * PI).abs() < 1e-10);
        assert_eq!(d.euler_char, 1);
    }

    #[test]
    fn hodge_of_canonical_frames() {
        let e1 = Vector3::x();
        let e2 = Vector3::y();
        assert_eq!(hodge_orientation(&TangentFrame::new(e1, e2).unwrap()), Vector3::z());
        assert_eq!(hodge_orientation(&TangentFrame::new(e2, e1).unwrap()), -Vector3::z());
        assert!(TangentFrame::new(e1, e1).is_err());
    }

    #[test]
    fn frames_agree_with_face_normals() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 1 }).unwrap();
        for (f, fr) in tangent_frames(&m).iter().enumerate() {
            assert!((fr.normal() - m.face_normal(f)).norm() < 1e-12);
        }
    }

    #[test]
    fn first_variation_constant_field_vanishes() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 3 }).unwrap();
        let x = vec![Vector3::z(); m.n_vertices()];
        let fv = first_variation_residual(&m, &x).unwrap();
        assert!(fv.residual < 1e-3, "{fv:?}");
    }

    #[test]
    fn isolated_vertex_is_rejected() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 0 }).unwrap();
        let mut v = m.vertices().to_vec();
        v.push(Vector3::new(5.0, 0.0, 0.0));
        let bad = TriMesh::from_raw(v, m.faces().to_vec());
        assert!(curvature(&bad).is_err());
    }
}
