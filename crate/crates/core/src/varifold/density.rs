//! Density ratios with exact triangle/ball clipping, curvature concentration
//! in small balls, and the diameter estimate for closed surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;

use super::require_positive;
use crate::diffgeo::curvature;
use crate::energy::{helfrich_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of the disk of radius `r` about the origin intersected with
/// the triangle `(0, a, b)`.
fn wedge_area(a: Vector2<f64>, b: Vector2<f64>, r: f64) -> f64 {
    let d = b - a;
    let qa = d.norm_squared();
    if qa == 0.0 {
        return 0.0;
    }
    let qb = a.dot(&d);
    let qc = a.norm_squared() - r * r;
    let mut cuts = vec![0.0, 1.0];
    let disc = qb * qb - qa * qc;
    if disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / qa, (-qb + s) / qa] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let p = a + d * w[0];
        let q = a + d * w[1];
        let mid = a + d * (0.5 * (w[0] + w[1]));
        if mid.norm_squared() <= r * r {
            area += 0.5 * cross2(p, q);
        } else {
            area += 0.5 * r * r * cross2(p, q).atan2(p.dot(&q));
        }
    }
    area
}

/// Area of a planar triangle intersected with a disk centred at the origin.
pub(crate) fn triangle_disk_area(t: [Vector2<f64>; 3], r: f64) -> f64 {
    (wedge_area(t[0], t[1], r) + wedge_area(t[1], t[2], r) + wedge_area(t[2], t[0], r)).abs()
}

/// Area of a 3-D triangle inside the closed ball `B_σ(c)`.
pub(crate) fn triangle_ball_area(p: [&Point; 3], c: &Point, sigma: f64) -> f64 {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let n = e1.cross(&e2);
    let nn = n.norm();
    if nn == 0.0 {
        return 0.0;
    }
    let n = n / nn;
    let dist = (c - p[0]).dot(&n);
    if dist.abs() >= sigma {
        return 0.0;
    }
    let r = (sigma * sigma - dist * dist).sqrt();
    let foot = c - n * dist;
    let u = e1.normalize();
    let v = n.cross(&u);
    let to2 = |x: &Point| {
        let d = x - foot;
        Vector2::new(d.dot(&u), d.dot(&v))
    };
    triangle_disk_area([to2(p[0]), to2(p[1]), to2(p[2])], r)
}

/// Mesh area inside `B_σ(center)` divided by `πσ²`.
pub fn density_ratio(mesh: &TriMesh, center: &Point, sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let parts: Vec<f64> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| triangle_ball_area(mesh.face_points(f), center, sigma))
        .collect();
    Ok(parts.iter().sum::<f64>() / (PI * sigma * sigma))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    /// Concentration at scale `ρ`: `c(v, ρ) = Σ_{|x_w − x_v| ≤ ρ} |A|²_w a_w`.
    pub concentration: Vec<f64>,
    pub epsilon0: f64,
    pub rho: f64,
    pub bad_points: Vec<usize>,
    /// Connected components of the flagged vertices.
    pub clusters: Vec<Vec<usize>>,
}

fn neighbours_within(points: &[Point], rho: f64) -> Vec<Vec<usize>> {
    let key = |p: &Point| [(p.x / rho).floor() as i64, (p.y / rho).floor() as i64, (p.z / rho).floor() as i64];
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    points
        .par_iter()
        .map(|p| {
            let k = key(p);
            let mut out = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            out.extend(list.iter().copied().filter(|&j| (points[j] - p).norm() <= rho));
                        }
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}

pub fn bad_points(mesh: &TriMesh, epsilon0: f64, rho: f64) -> Result<ConcentrationReport> {
    require_positive("epsilon0", epsilon0)?;
    require_positive("rho", rho)?;
    let c = curvature(mesh)?;
    let mass: Vec<f64> = (0..c.len()).map(|v| c.a2[v] * c.area[v]).collect();
    let balls = neighbours_within(mesh.vertices(), rho);
    let concentration: Vec<f64> = balls.iter().map(|b| b.iter().map(|&w| mass[w]).sum()).collect();
    let threshold = epsilon0 * epsilon0;
    let bad: Vec<usize> = (0..c.len()).filter(|&v| concentration[v] >= threshold).collect();

    let adjacency = mesh.vertex_neighbors();
    let mut flagged = vec![false; c.len()];
    for &v in &bad {
        flagged[v] = true;
    }
    let mut seen = vec![false; c.len()];
    let mut clusters = Vec::new();
    for &s in &bad {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adjacency[v] {
                if flagged[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        clusters.push(comp);
    }
    Ok(ConcentrationReport { concentration, epsilon0, rho, bad_points: bad, clusters })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiameterReport {
    /// `2 √(area / W₀,₀)`.
    pub lower: f64,
    pub diam: f64,
    /// `diam / √(area · W₀,₀)`, an empirical constant for the upper bound.
    pub upper_ratio: f64,
    pub area: f64,
    pub willmore: f64,
}

impl DiameterReport {
    pub fn lower_bound_holds(&self) -> bool {
        self.lower <= self.diam
    }
}

fn is_connected(mesh: &TriMesh) -> bool {
    let nb = mesh.vertex_neighbors();
    let mut seen = vec![false; mesh.n_vertices()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &nb[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == mesh.n_vertices()
}

pub fn diameter_check(mesh: &TriMesh) -> Result<DiameterReport> {
    if mesh.n_vertices() == 0 {
        return Err(Error::invalid("empty mesh"));
    }
    if !mesh.is_closed() {
        return Err(Error::invalid("diameter estimate needs a closed surface"));
    }
    if !is_connected(mesh) {
        return Err(Error::invalid("diameter estimate needs a connected surface"));
    }
    let e = helfrich_energy(mesh, &EnergyParams::willmore())?;
    let willmore = e.total;
    if !(willmore > 0.0) {
        return Err(Error::numerical("Willmore energy vanishes"));
    }
    let area = mesh.area();
    let pts = mesh.vertices();
    let diam = (0..pts.len())
        .into_par_iter()
        .map(|i| pts[i + 1..].iter().map(|q| (q - pts[i]).norm()).fold(0.0, f64::max))
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DiameterReport {
        lower: 2.0 * (area / willmore).sqrt(),
        diam,
        upper_ratio: diam / (area * willmore).sqrt(),
        area,
        willmore,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, PrimitiveSpec};
    use proptest::prelude::*;

    fn sphere(r: f64, level: u32) -> TriMesh {
        generate_primitive(&PrimitiveSpec::Icosphere { radius: r, level }).unwrap()
    }

    #[test]
    fn clipped_triangle_matches_sampling() {
        let t = [Vector2::new(-0.3, -0.8), Vector2::new(1.4, 0.1), Vector2::new(-0.2, 0.9)];
        let r = 0.7;
        let n = 1000;
        let mut hits = 0usize;
        let (lo, hi) = (Vector2::new(-0.3, -0.8), Vector2::new(1.4, 0.9));
        for i in 0..n {
            for j in 0..n {
                let p = Vector2::new(
                    lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / n as f64,
                    lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / n as f64,
                );
                let inside_disk = p.norm() <= r;
                let s0 = cross2(t[1] - t[0], p - t[0]);
                let s1 = cross2(t[2] - t[1], p - t[1]);
                let s2 = cross2(t[0] - t[2], p - t[2]);
                if inside_disk && s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0 {
                    hits += 1;
                }
            }
        }
        let sampled = hits as f64 * (hi.x - lo.x) * (hi.y - lo.y) / (n * n) as f64;
        assert!((triangle_disk_area(t, r) - sampled).abs() < 2e-3);
    }

    #[test]
    fn flat_and_double_planes() {
        let m = generate_primitive(&PrimitiveSpec::PlanePatch { extent: 2.0, level: 3 }).unwrap();
        let c = Point::new(0.1, -0.05, 0.0);
        assert!((density_ratio(&m, &c, 0.5).unwrap() - 1.0).abs() < 1e-9);
        let double = m.disjoint_union(&m.flipped());
        assert!((density_ratio(&double, &c, 0.5).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(density_ratio(&m, &Point::new(0.0, 0.0, 5.0), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn sphere_density_converges_to_one() {
        let exact_on_sphere = |level: u32| {
            let m = sphere(1.0, level);
            let c = m.vertices()[0];
            density_ratio(&m, &c, 0.5).unwrap()
        };
        let r5 = exact_on_sphere(5);
        assert!((r5 - 1.0).abs() < 2e-3, "{r5}");
    }

    #[test]
    fn smooth_sphere_has_no_bad_points() {
        let m = sphere(1.0, 3);
        let r = bad_points(&m, 1.0, 0.2).unwrap();
        assert!(r.bad_points.is_empty());
        let max = r.concentration.iter().cloned().fold(0.0, f64::max);
        assert!(max < 0.5, "{max}");
    }

    #[test]
    fn flat_disk_has_no_bad_points() {
        let m = generate_primitive(&PrimitiveSpec::Disk { radius: 1.0, level: 3 }).unwrap();
        let r = bad_points(&m, 1e-6, 0.3).unwrap();
        assert!(r.bad_points.is_empty());
    }

    #[test]
    fn cone_apex_is_flagged() {
        // cone over a circle of radius 1/2 with slant 1: total apex angle π
        let n = 48;
        let mut v = vec![Point::new(0.0, 0.0, 0.75f64.sqrt())];
        let mut faces = Vec::new();
        for ring in 1..=8 {
            let s = ring as f64 / 8.0;
            for k in 0..n {
                let t = 2.0 * PI * k as f64 / n as f64;
                v.push(Point::new(0.5 * s * t.cos(), 0.5 * s * t.sin(), 0.75f64.sqrt() * (1.0 - s)));
            }
        }
        for k in 0..n {
            faces.push([0, 1 + k, 1 + (k + 1) % n]);
        }
        for ring in 1..8 {
            let a = 1 + (ring - 1) * n;
            let b = 1 + ring * n;
            for k in 0..n {
                let k1 = (k + 1) % n;
                faces.push([a + k, b + k, b + k1]);
                faces.push([a + k, b + k1, a + k1]);
            }
        }
        let m = TriMesh::new(v, faces).unwrap();
        let r = bad_points(&m, 1.5, 0.3).unwrap();
        assert!(r.bad_points.contains(&0), "{:?}", &r.concentration[..3]);
        assert_eq!(r.clusters.len(), 1);
        let far = r.concentration[1 + 6 * n];
        assert!(far < 2.25, "{far}");
    }

    #[test]
    fn sphere_diameter() {
        for radius in [1.0, 3.0] {
            let d = diameter_check(&sphere(radius, 3)).unwrap();
            assert!(d.lower_bound_holds());
            assert!((d.lower / radius - 1.0).abs() < 0.01, "{}", d.lower);
            assert!((d.diam / radius - 2.0).abs() < 1e-12);
        }
        let open = generate_primitive(&PrimitiveSpec::Disk { radius: 1.0, level: 1 }).unwrap();
        assert!(diameter_check(&open).is_err());
    }

    #[test]
    fn elongated_ellipsoid_satisfies_the_bound() {
        let m = sphere(1.0, 3).transformed(|p| Point::new(3.0 * p.x, p.y, p.z));
        let d = diameter_check(&m).unwrap();
        assert!(d.lower_bound_holds());
        assert!(d.upper_ratio.is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn diameter_lower_bound_on_perturbed_spheres(seed in any::<u64>(), amp in 0.0..0.2f64) {
            let d = diameter_check(&sphere(1.0, 2).perturbed_radially(amp, seed)).unwrap();
            prop_assert!(d.lower_bound_holds());
        }
    }
}
