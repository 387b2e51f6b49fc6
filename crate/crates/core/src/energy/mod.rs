//! The Helfrich functional `∫(H̄ − H₀)² + λ dμ`, its exact discrete
//! gradient, Euler–Lagrange residuals, the coercivity constant and the dual
//! (supremum) form of the bending term.
//!
//! The discrete energy is `Σ_v [(H̄_v − H₀)² + λ] a_v` with `H̄_v = g_v·ν_v / a_v`
//! where `g_v` is the area gradient at `v`, `ν_v` the normalized sum of
//! incident face area vectors and `a_v` the mixed Voronoi area. Every
//! ingredient is a sum of per-face terms, so the gradient is obtained by
//! reverse accumulation: vertex adjoints are formed first, then each face is
//! differentiated once in forward mode with nine dual directions.

mod dual;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffgeo::kernel::{face_geom, FaceGeom};
use crate::diffgeo::{curvature, vertex_sums, VertexSums};
use crate::error::{Error, Result};
use crate::mesh::{validate, TriMesh};
use crate::scalar::{lift_triangle, Dual, V3};
use crate::varifold::OrientedVarifold;

pub use dual::{dual_energy, optimal_probe, sample_probe, DualEnergy};

/// Spontaneous curvature and area weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    #[serde(rename = "H0")]
    pub h0: f64,
    pub lambda: f64,
    /// Must be set to evaluate with `λ = 0` (Willmore diagnostics).
    #[serde(default)]
    pub diagnostic: bool,
}

impl EnergyParams {
    pub fn new(h0: f64, lambda: f64) -> Result<EnergyParams> {
        let p = EnergyParams { h0, lambda, diagnostic: lambda == 0.0 };
        if lambda == 0.0 {
            return Err(Error::invalid("lambda must be positive; use EnergyParams::diagnostic for lambda = 0"));
        }
        p.check()?;
        Ok(p)
    }

    /// Parameters that may have `λ = 0`.
    pub fn diagnostic(h0: f64, lambda: f64) -> Result<EnergyParams> {
        let p = EnergyParams { h0, lambda, diagnostic: true };
        p.check()?;
        Ok(p)
    }

    /// The Willmore functional `∫H̄² dμ`.
    pub fn willmore() -> EnergyParams {
        EnergyParams { h0: 0.0, lambda: 0.0, diagnostic: true }
    }

    pub fn check(&self) -> Result<()> {
        if !self.h0.is_finite() || !self.lambda.is_finite() {
            return Err(Error::invalid("energy parameters must be finite"));
        }
        if self.lambda < 0.0 {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        if self.lambda == 0.0 && !self.diagnostic {
            return Err(Error::invalid("lambda = 0 is only allowed with the diagnostic flag"));
        }
        Ok(())
    }
}

/// Which parts of the integrand to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnergyTerms {
    pub bending: bool,
    pub area: bool,
}

impl EnergyTerms {
    pub const ALL: EnergyTerms = EnergyTerms { bending: true, area: true };
    pub const BENDING: EnergyTerms = EnergyTerms { bending: true, area: false };
    pub const AREA: EnergyTerms = EnergyTerms { bending: false, area: true };
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyBreakdown {
    pub bending: f64,
    pub area_term: f64,
    pub total: f64,
    pub params: EnergyParams,
    #[serde(skip)]
    pub per_vertex: Vec<f64>,
}

impl EnergyBreakdown {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("breakdown serialization cannot fail")
    }
}

/// Per-vertex adjoints of the energy with respect to the assembled vertex
/// sums: `∂E/∂g_v`, `∂E/∂N_v`, `∂E/∂a_v`.
#[derive(Clone, Debug)]
pub(crate) struct Adjoints {
    pub g: Vec<Vector3<f64>>,
    pub n: Vec<Vector3<f64>>,
    pub a: Vec<f64>,
}

impl Adjoints {
    pub fn zeros(n: usize) -> Adjoints {
        Adjoints { g: vec![Vector3::zeros(); n], n: vec![Vector3::zeros(); n], a: vec![0.0; n] }
    }
}

/// Energy terms and their adjoints from precomputed vertex sums.
///
/// Interior vertices use `H̄_v = g_v·ν_v / a_v`. At a boundary vertex the
/// one-sided area gradient is dominated by the conormal and its normal part
/// is no curvature estimate, so `H̄_b` is the mean of `H̄` over the interior
/// vertices of its one-ring (its own quotient when there are none).
pub(crate) fn evaluate(
    sums: &VertexSums,
    stencil: &[Vec<usize>],
    params: &EnergyParams,
    terms: EnergyTerms,
) -> (EnergyBreakdown, Adjoints) {
    let n = sums.area.len();
    let mut adj = Adjoints::zeros(n);
    let h0 = params.h0;
    let nu: Vec<Vector3<f64>> = sums.normal_area.iter().map(|v| v.normalize()).collect();
    let s: Vec<f64> = (0..n).map(|v| sums.grad_area[v].dot(&nu[v])).collect();
    let mut per_vertex = vec![0.0; n];
    let (mut bending, mut area) = (0.0, 0.0);
    // adjoint of H̄_w = s_w / a_w
    let pull = |adj: &mut Adjoints, w: usize, c: f64| {
        let a = sums.area[w];
        let len = sums.normal_area[w].norm();
        adj.g[w] += nu[w] * (c / a);
        adj.n[w] += (sums.grad_area[w] - nu[w] * s[w]) * (c / (a * len));
        adj.a[w] -= c * s[w] / (a * a);
    };
    for v in 0..n {
        let a = sums.area[v];
        if terms.bending {
            let st = stencil.get(v).map(|x| x.as_slice()).unwrap_or(&[]);
            if st.is_empty() {
                let b = s[v] * s[v] / a - 2.0 * h0 * s[v] + h0 * h0 * a;
                bending += b;
                per_vertex[v] += b;
                pull(&mut adj, v, 2.0 * (s[v] / a - h0) * a);
                adj.a[v] += (s[v] / a - h0).powi(2);
            } else {
                let k = st.len() as f64;
                let hb = st.iter().map(|&w| s[w] / sums.area[w]).sum::<f64>() / k;
                let b = (hb - h0).powi(2) * a;
                bending += b;
                per_vertex[v] += b;
                adj.a[v] += (hb - h0).powi(2);
                let c = 2.0 * (hb - h0) * a / k;
                for &w in st {
                    pull(&mut adj, w, c);
                }
            }
        }
        if terms.area {
            let t = params.lambda * a;
            area += t;
            per_vertex[v] += t;
            adj.a[v] += params.lambda;
        }
    }
    let br = EnergyBreakdown { bending, area_term: area, total: bending + area, params: *params, per_vertex };
    (br, adj)
}

/// Pull vertex adjoints back to vertex positions, face by face.
pub(crate) fn backprop(mesh: &TriMesh, adj: &Adjoints) -> Vec<Vector3<f64>> {
    let per_face: Vec<[Vector3<f64>; 3]> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            let tri = mesh.faces()[f];
            let g: FaceGeom<Dual<9>> = face_geom(lift_triangle(mesh.face_points(f)));
            let mut phi = Dual::<9>::constant(0.0);
            for c in 0..3 {
                let v = tri[c];
                phi = phi + g.grad_area[c].dot(V3::constant(adj.g[v].into()));
                phi = phi + g.normal_area.dot(V3::constant(adj.n[v].into()));
                phi = phi + g.corner_area[c] * adj.a[v];
            }
            std::array::from_fn(|c| Vector3::new(phi.d[3 * c], phi.d[3 * c + 1], phi.d[3 * c + 2]))
        })
        .collect();
    let mut grad = vec![Vector3::zeros(); mesh.n_vertices()];
    for (tri, fg) in mesh.faces().iter().zip(&per_face) {
        for c in 0..3 {
            grad[tri[c]] += fg[c];
        }
    }
    grad
}

fn check_mesh(mesh: &TriMesh) -> Result<()> {
    let report = validate(mesh);
    if !report.is_valid() {
        return Err(Error::invalid(format!("invalid mesh: {}", report.summary())));
    }
    Ok(())
}

pub fn helfrich_energy(mesh: &TriMesh, params: &EnergyParams) -> Result<EnergyBreakdown> {
    params.check()?;
    check_mesh(mesh)?;
    Ok(evaluate(&vertex_sums(mesh), &mesh.topology().boundary_stencil, params, EnergyTerms::ALL).0)
}

/// Exact gradient of [`helfrich_energy`] with respect to every vertex
/// position (reverse accumulation over per-face forward-mode duals).
pub fn energy_gradient(mesh: &TriMesh, params: &EnergyParams) -> Result<Vec<Vector3<f64>>> {
    energy_gradient_terms(mesh, params, EnergyTerms::ALL)
}

pub fn energy_gradient_terms(mesh: &TriMesh, params: &EnergyParams, terms: EnergyTerms) -> Result<Vec<Vector3<f64>>> {
    params.check()?;
    check_mesh(mesh)?;
    let (_, adj) = evaluate(&vertex_sums(mesh), &mesh.topology().boundary_stencil, params, terms);
    Ok(backprop(mesh, &adj))
}

/// Varifold form of the energy:
/// `Σ w [(H − *ξ H₀)² θ₊ + (H + *ξ H₀)² θ₋ + λ(θ₊ + θ₋)]`.
pub fn helfrich_energy_varifold(
    var: &OrientedVarifold,
    params: &EnergyParams,
    mean_curvature: &[Vector3<f64>],
) -> Result<f64> {
    params.check()?;
    if mean_curvature.len() != var.atoms.len() {
        return Err(Error::invalid(format!(
            "mean-curvature field has {} entries for {} atoms",
            mean_curvature.len(),
            var.atoms.len()
        )));
    }
    let total = var
        .atoms
        .iter()
        .zip(mean_curvature)
        .map(|(atom, h)| {
            let plus = (h - atom.normal * params.h0).norm_squared();
            let minus = (h + atom.normal * params.h0).norm_squared();
            let tp = atom.theta_plus as f64;
            let tm = atom.theta_minus as f64;
            atom.weight * (plus * tp + minus * tm + params.lambda * (tp + tm))
        })
        .sum();
    Ok(total)
}

/// Euler–Lagrange residuals.
#[derive(Clone, Debug, Serialize)]
pub struct ElResidual {
    /// `|∇E|_v / a_v` at interior vertices, 0 on the boundary.
    pub per_vertex: Vec<f64>,
    /// `(Σ_interior r_v² a_v)^{1/2}`.
    pub interior_l2: f64,
    /// The printed strong form evaluated with `H̄` = sum of principal
    /// curvatures.
    pub strong_sum: Vec<f64>,
    pub strong_sum_l2: f64,
    /// The same expression with `H̄` replaced by the mean of the principal
    /// curvatures.
    pub strong_half: Vec<f64>,
    pub strong_half_l2: f64,
}

pub fn el_residual(mesh: &TriMesh, params: &EnergyParams) -> Result<ElResidual> {
    params.check()?;
    check_mesh(mesh)?;
    let interior: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| !mesh.is_boundary(v)).collect();
    if interior.is_empty() {
        return Err(Error::invalid("mesh has no interior vertices"));
    }
    let sums = vertex_sums(mesh);
    let (_, adj) = evaluate(&sums, &mesh.topology().boundary_stencil, params, EnergyTerms::ALL);
    let grad = backprop(mesh, &adj);
    let curv = curvature(mesh)?;
    let n = mesh.n_vertices();
    let mut per_vertex = vec![0.0; n];
    let mut l2 = 0.0;
    for &v in &interior {
        let r = grad[v].norm() / sums.area[v];
        per_vertex[v] = r;
        l2 += r * r * sums.area[v];
    }
    let lap_sum = cot_laplacian(mesh, &curv.mean, &curv.area);
    let strong = |scale: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; n];
        let mut norm = 0.0;
        for &v in &interior {
            let h = scale * curv.mean[v];
            let k = curv.gauss[v];
            let r = 2.0 * scale * lap_sum[v] + 4.0 * h * (0.25 * h * h - k)
                - 2.0 * params.h0 * k
                - params.h0 * params.h0 * h
                - params.lambda * h;
            out[v] = r;
            norm += r * r * curv.area[v];
        }
        (out, norm.sqrt())
    };
    let (strong_sum, strong_sum_l2) = strong(1.0);
    let (strong_half, strong_half_l2) = strong(0.5);
    Ok(ElResidual { per_vertex, interior_l2: l2.sqrt(), strong_sum, strong_sum_l2, strong_half, strong_half_l2 })
}

/// Cotangent Laplace–Beltrami of a vertex function, divided by vertex area.
pub fn cot_laplacian(mesh: &TriMesh, u: &[f64], area: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let p = mesh.face_points(f);
        for c in 0..3 {
            let i = (c + 1) % 3;
            let j = (c + 2) % 3;
            let a = p[i] - p[c];
            let b = p[j] - p[c];
            let cot = a.dot(&b) / a.cross(&b).norm();
            let w = 0.5 * cot;
            let (vi, vj) = (tri[i], tri[j]);
            out[vi] += w * (u[vj] - u[vi]);
            out[vj] += w * (u[vi] - u[vj]);
        }
    }
    for (o, a) in out.iter_mut().zip(area) {
        *o /= a;
    }
    out
}

/// Constant of the coercivity estimate `W ≥ C ∫(H̄² + 1) dμ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub c: f64,
    pub epsilon: f64,
}

/// `ε` solves `λ + (1 − 1/ε)H₀² = λ/2`; then `C = min(1 − ε, λ/2)`.
pub fn lower_bound_constant(params: &EnergyParams) -> Result<LowerBound> {
    if !(params.lambda > 0.0) || !params.h0.is_finite() || !params.lambda.is_finite() {
        return Err(Error::invalid("the coercivity estimate needs lambda > 0"));
    }
    let h2 = params.h0 * params.h0;
    let epsilon = if h2 == 0.0 { 0.0 } else { 2.0 * h2 / (2.0 * h2 + params.lambda) };
    Ok(LowerBound { c: (1.0 - epsilon).min(params.lambda / 2.0), epsilon })
}

/// `∫(H̄² + 1) dμ`, the right-hand side of the coercivity estimate.
pub fn coercivity_rhs(mesh: &TriMesh) -> Result<f64> {
    let c = curvature(mesh)?;
    Ok((0..c.len()).map(|v| (c.mean[v] * c.mean[v] + 1.0) * c.area[v]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, PrimitiveSpec};
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sphere(r: f64, level: u32) -> TriMesh {
        generate_primitive(&PrimitiveSpec::Icosphere { radius: r, level }).unwrap()
    }

    fn central(mesh: &TriMesh, params: &EnergyParams, v: usize, h: f64) -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for k in 0..3 {
            let mut plus = mesh.vertices().to_vec();
            let mut minus = plus.clone();
            plus[v][k] += h;
            minus[v][k] -= h;
            let ep = helfrich_energy(&mesh.with_vertices(plus), params).unwrap().total;
            let em = helfrich_energy(&mesh.with_vertices(minus), params).unwrap().total;
            out[k] = (ep - em) / (2.0 * h);
        }
        out
    }

    /// Central differences at `h` and `h/2` combined to cancel the `h²` term.
    fn fd_gradient(mesh: &TriMesh, params: &EnergyParams, v: usize, h: f64) -> Vector3<f64> {
        (central(mesh, params, v, 0.5 * h) * 4.0 - central(mesh, params, v, h)) / 3.0
    }

    #[test]
    fn willmore_of_sphere() {
        let e = helfrich_energy(&sphere(1.0, 3), &EnergyParams::willmore()).unwrap();
        assert!((e.total / (16.0 * PI) - 1.0).abs() < 0.02, "{}", e.total);
        let s: f64 = e.per_vertex.iter().sum();
        assert!((s - e.total).abs() < 1e-9 * e.total);
    }

    #[test]
    fn sphere_with_matching_spontaneous_curvature() {
        let e = helfrich_energy(&sphere(1.0, 3), &EnergyParams::diagnostic(2.0, 0.0).unwrap()).unwrap();
        assert!(e.total < 0.05, "{}", e.total);
    }

    #[test]
    fn flat_disk_energy() {
        let m = generate_primitive(&PrimitiveSpec::Disk { radius: 1.0, level: 4 }).unwrap();
        let e = helfrich_energy(&m, &EnergyParams::new(2.0, 1.0).unwrap()).unwrap();
        assert!((e.total / (5.0 * PI) - 1.0).abs() < 0.01, "{}", e.total);
    }

    #[test]
    fn sphere_energy_as_function_of_radius() {
        let params = EnergyParams::new(1.0, 1.0).unwrap();
        for r in [0.5, 1.0, 2.0] {
            let e = helfrich_energy(&sphere(r, 3), &params).unwrap().total;
            let exact = 4.0 * PI * ((2.0 - r).powi(2) + r * r);
            assert!((e / exact - 1.0).abs() < 0.02, "r={r}: {e} vs {exact}");
        }
    }

    #[test]
    fn lambda_zero_needs_diagnostic_flag() {
        assert!(EnergyParams::new(1.0, 0.0).is_err());
        assert!(EnergyParams::new(1.0, -1.0).is_err());
        let p = EnergyParams { h0: 0.0, lambda: 0.0, diagnostic: false };
        assert!(helfrich_energy(&sphere(1.0, 1), &p).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let m = sphere(1.0, 2).perturbed_radially(0.1, 3);
        let params = EnergyParams::new(1.0, 0.5).unwrap();
        let g = energy_gradient(&m, &params).unwrap();
        let h = 1e-5 * m.bbox_diagonal();
        for v in [0, 17, 101] {
            let fd = fd_gradient(&m, &params, v, h);
            assert!((g[v] - fd).norm() < 1e-6 * g[v].norm().max(1e-3), "{v}: {} vs {}", g[v], fd);
        }
    }

    #[test]
    fn willmore_is_scale_invariant_to_first_order() {
        let m = sphere(1.0, 2).perturbed_radially(0.15, 11);
        let g = energy_gradient(&m, &EnergyParams::willmore()).unwrap();
        let d: f64 = g.iter().zip(m.vertices()).map(|(g, x)| g.dot(x)).sum();
        assert!(d.abs() < 1e-8, "{d}");
    }

    #[test]
    fn area_gradient_is_mean_curvature_vector() {
        let m = sphere(1.0, 2).perturbed_radially(0.1, 5);
        let g = energy_gradient_terms(&m, &EnergyParams::new(0.0, 1.0).unwrap(), EnergyTerms::AREA).unwrap();
        let c = curvature(&m).unwrap();
        for v in 0..m.n_vertices() {
            assert!((g[v] - c.mean_vector[v] * c.area[v]).norm() < 1e-9);
        }
    }

    #[test]
    fn coercivity_constants() {
        let c = lower_bound_constant(&EnergyParams::new(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(c, LowerBound { c: 0.5, epsilon: 0.5 });
        let c = lower_bound_constant(&EnergyParams::new(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(c.c, 1.0);
        assert!(lower_bound_constant(&EnergyParams::willmore()).is_err());
    }

    #[test]
    fn el_residual_on_flat_patch_and_critical_sphere() {
        let flat = generate_primitive(&PrimitiveSpec::PlanePatch { extent: 1.0, level: 3 }).unwrap();
        let r = el_residual(&flat, &EnergyParams::willmore()).unwrap();
        assert!(r.interior_l2 < 1e-10);
        let params = EnergyParams::new(1.0, 1.0).unwrap();
        let norms: Vec<f64> = (2..5).map(|l| el_residual(&sphere(1.0, l), &params).unwrap().interior_l2).collect();
        assert!(norms[2] < norms[0], "{norms:?}");
        let closed = sphere(1.0, 1);
        assert!(el_residual(&closed, &params).is_ok());
    }

    #[test]
    fn varifold_energy_of_plane_sheets() {
        use crate::varifold::{from_mesh, ReferenceOrientation};
        let sq = generate_primitive(&PrimitiveSpec::PlanePatch { extent: 1.0, level: 2 }).unwrap();
        let p = EnergyParams::diagnostic(1.0, 0.0).unwrap();
        let up = ReferenceOrientation::Along(Vector3::z());
        let double = from_mesh(&sq.disjoint_union(&sq), up);
        let zero = vec![Vector3::zeros(); double.atoms.len()];
        assert!((helfrich_energy_varifold(&double, &p, &zero).unwrap() - 2.0).abs() < 1e-12);
        let opposite = from_mesh(&sq.disjoint_union(&sq.flipped()), up);
        assert!((helfrich_energy_varifold(&opposite, &p, &zero).unwrap() - 2.0).abs() < 1e-12);
        assert!(helfrich_energy_varifold(&opposite, &p, &zero[1..]).is_err());
    }

    #[test]
    fn vertex_cell_varifold_reproduces_mesh_energy() {
        use crate::varifold::from_vertex_cells;
        let m = sphere(1.0, 3);
        let p = EnergyParams::new(1.0, 0.5).unwrap();
        let c = curvature(&m).unwrap();
        let h: Vec<Vector3<f64>> = (0..c.len()).map(|v| c.normal[v] * c.mean[v]).collect();
        let ev = helfrich_energy_varifold(&from_vertex_cells(&m), &p, &h).unwrap();
        let em = helfrich_energy(&m, &p).unwrap().total;
        assert!((ev - em).abs() < 1e-9 * em);
    }

    #[test]
    fn breakdown_json_has_param_names() {
        let e = helfrich_energy(&sphere(1.0, 1), &EnergyParams::new(1.0, 2.0).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["params"]["H0"], 1.0);
        assert_eq!(v["params"]["lambda"], 2.0);
        assert!(v.get("per_vertex").is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn willmore_is_invariant_under_similarities(
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.1..1.0f64,
            angle in 0.0..6.28f64, t in -2.0..2.0f64, s in 0.3..3.0f64, seed in any::<u64>()
        ) {
            let m = sphere(1.0, 2).perturbed_radially(0.1, seed);
            let p = EnergyParams::willmore();
            let e0 = helfrich_energy(&m, &p).unwrap().total;
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(ax, ay, az)), angle);
            let shift = Vector3::new(t, -t, 0.5 * t);
            let moved = m.transformed(|x| rot * x + shift);
            let e1 = helfrich_energy(&moved, &p).unwrap().total;
            prop_assert!((e1 - e0).abs() < 1e-10 * e0.max(1.0));
            let scaled = m.transformed(|x| x * s);
            let e2 = helfrich_energy(&scaled, &p).unwrap().total;
            prop_assert!((e2 - e0).abs() < 1e-8 * e0.max(1.0));
        }

        #[test]
        fn coercivity_holds_on_random_closed_meshes(seed in any::<u64>(), amp in 0.0..0.3f64) {
            let m = sphere(1.0, 2).perturbed_radially(amp, seed);
            let rhs = coercivity_rhs(&m).unwrap();
            for (h0, lambda) in [(1.0, 2.0), (2.0, 1.0), (0.0, 2.0)] {
                let p = EnergyParams::new(h0, lambda).unwrap();
                let c = lower_bound_constant(&p).unwrap().c;
                let w = helfrich_energy(&m, &p).unwrap().total;
                prop_assert!(w >= c * rhs);
            }
        }
    }
}
