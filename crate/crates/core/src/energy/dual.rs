//! Supremum form of the bending term over a dictionary of probe fields:
//! `sup_φ ∫ (H − H₀ *ξ)·φ dμ` with `‖φ‖_{L²(μ)} = 1`.

use nalgebra::Vector3;
use serde::Serialize;

use super::EnergyParams;
use crate::diffgeo::curvature;
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

#[derive(Clone, Debug, Serialize)]
pub struct DualEnergy {
    pub value: f64,
    /// Index of the maximizing probe.
    pub best_probe: usize,
    /// Square root of the bending energy, the supremum over all probes.
    pub bending_sqrt: f64,
}

/// Sample a continuous vector field at the mesh vertices.
pub fn sample_probe(mesh: &TriMesh, field: impl Fn(&Point) -> Vector3<f64>) -> Vec<Vector3<f64>> {
    mesh.vertices().iter().map(field).collect()
}

/// The probe attaining the supremum: `(H̄ − H₀)ν`, unnormalized.
pub fn optimal_probe(mesh: &TriMesh, params: &EnergyParams) -> Result<Vec<Vector3<f64>>> {
    let c = curvature(mesh)?;
    Ok((0..c.len()).map(|v| c.normal[v] * (c.mean[v] - params.h0)).collect())
}

fn check_graph(mesh: &TriMesh) -> Result<()> {
    let signs: Vec<f64> = (0..mesh.n_faces()).map(|f| mesh.face_normal(f).z).collect();
    let up = signs.iter().all(|&z| z > 0.0);
    let down = signs.iter().all(|&z| z < 0.0);
    if !(up || down) {
        return Err(Error::invalid("patch is not a graph over the xy-plane"));
    }
    Ok(())
}

/// Probes are sampled at vertices and normalized against the vertex-area
/// measure before pairing, so any nonzero scaling of a probe is allowed.
pub fn dual_energy(mesh: &TriMesh, params: &EnergyParams, probes: &[Vec<Vector3<f64>>]) -> Result<DualEnergy> {
    params.check()?;
    check_graph(mesh)?;
    if probes.is_empty() {
        return Err(Error::invalid("probe dictionary is empty"));
    }
    let c = curvature(mesh)?;
    let n = mesh.n_vertices();
    let bending: f64 = (0..n).map(|v| (c.mean[v] - params.h0).powi(2) * c.area[v]).sum();
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, phi) in probes.iter().enumerate() {
        if phi.len() != n {
            return Err(Error::invalid(format!("probe {i} has {} samples for {n} vertices", phi.len())));
        }
        let norm2: f64 = (0..n).map(|v| phi[v].norm_squared() * c.area[v]).sum();
        let pairing: f64 = (0..n).map(|v| (c.mean[v] - params.h0) * c.normal[v].dot(&phi[v]) * c.area[v]).sum();
        let value = if norm2 > 0.0 { pairing / norm2.sqrt() } else { 0.0 };
        if value > best.0 {
            best = (value, i);
        }
    }
    Ok(DualEnergy { value: best.0, best_probe: best.1, bending_sqrt: bending.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, PrimitiveSpec};
    use rand::{Rng, SeedableRng};

    #[test]
    fn flat_patch_pairs_to_zero() {
        let m = generate_primitive(&PrimitiveSpec::PlanePatch { extent: 1.0, level: 3 }).unwrap();
        let probes = vec![sample_probe(&m, |p| Vector3::new(p.y, 1.0, p.x * p.x))];
        let d = dual_energy(&m, &EnergyParams::willmore(), &probes).unwrap();
        assert!(d.value.abs() < 1e-12);
    }

    #[test]
    fn optimal_probe_attains_the_bending_root() {
        let m = generate_primitive(&PrimitiveSpec::SphericalCap { radius: 1.0, cap_angle_deg: 40.0, level: 3 }).unwrap();
        let p = EnergyParams::new(0.5, 1.0).unwrap();
        let d = dual_energy(&m, &p, &[optimal_probe(&m, &p).unwrap()]).unwrap();
        assert!((d.value - d.bending_sqrt).abs() < 1e-9 * d.bending_sqrt);
    }

    #[test]
    fn random_dictionary_stays_below_and_gap_closes() {
        let m = generate_primitive(&PrimitiveSpec::SphericalCap { radius: 1.0, cap_angle_deg: 40.0, level: 3 }).unwrap();
        let p = EnergyParams::new(0.5, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut probes: Vec<Vec<Vector3<f64>>> = (0..10)
            .map(|_| {
                let k: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                sample_probe(&m, |x| Vector3::new(k[0] + k[1] * x.x, k[2] + k[3] * x.y, k[4] + k[5] * x.z))
            })
            .collect();
        let d = dual_energy(&m, &p, &probes).unwrap();
        assert!(d.value <= d.bending_sqrt * (1.0 + 1e-12));
        probes.push(optimal_probe(&m, &p).unwrap());
        let d2 = dual_energy(&m, &p, &probes).unwrap();
        assert!(d2.value >= d.value);
        assert!((d2.value - d2.bending_sqrt).abs() < 1e-9 * d2.bending_sqrt);
    }

    #[test]
    fn closed_sphere_is_not_a_graph() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 1 }).unwrap();
        let probes = vec![sample_probe(&m, |_| Vector3::z())];
        assert!(dual_energy(&m, &EnergyParams::willmore(), &probes).is_err());
    }
}
