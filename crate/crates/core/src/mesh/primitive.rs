use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Point, TriMesh};
use crate::error::{Error, Result};

pub const MAX_LEVEL: u32 = 8;

/// Analytic primitive descriptions. Every kind is refined `level` times from
/// a coarse base mesh, re-projecting new vertices onto the exact surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PrimitiveSpec {
    Icosphere { radius: f64, level: u32 },
    /// Flat disk in the z = 0 plane centred at the origin.
    Disk { radius: f64, level: u32 },
    /// Open cylinder around the z axis from z = 0 to z = height.
    Cylinder { radius: f64, height: f64, level: u32 },
    Torus { major_radius: f64, minor_radius: f64, level: u32 },
    /// Square [-extent/2, extent/2]^2 in the z = 0 plane.
    PlanePatch { extent: f64, level: u32 },
    /// Spherical cap of the given polar angle whose rim circle lies in z = 0
    /// and whose apex points to +z.
    SphericalCap { radius: f64, cap_angle_deg: f64, level: u32 },
}

impl PrimitiveSpec {
    pub fn level(&self) -> u32 {
        match *self {
            PrimitiveSpec::Icosphere { level, .. }
            | PrimitiveSpec::Disk { level, .. }
            | PrimitiveSpec::Cylinder { level, .. }
            | PrimitiveSpec::Torus { level, .. }
            | PrimitiveSpec::PlanePatch { level, .. }
            | PrimitiveSpec::SphericalCap { level, .. } => level,
        }
    }

    fn check(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
            }
        };
        if self.level() > MAX_LEVEL {
            return Err(Error::invalid(format!("level {} exceeds the limit {MAX_LEVEL}", self.level())));
        }
        match *self {
            PrimitiveSpec::Icosphere { radius, .. } | PrimitiveSpec::Disk { radius, .. } => positive("radius", radius),
            PrimitiveSpec::Cylinder { radius, height, .. } => {
                positive("radius", radius)?;
                positive("height", height)
            }
            PrimitiveSpec::Torus { major_radius, minor_radius, .. } => {
                positive("major_radius", major_radius)?;
                positive("minor_radius", minor_radius)?;
                if minor_radius >= major_radius {
                    return Err(Error::invalid("torus minor radius must be below the major radius"));
                }
                Ok(())
            }
            PrimitiveSpec::PlanePatch { extent, .. } => positive("extent", extent),
            PrimitiveSpec::SphericalCap { radius, cap_angle_deg, .. } => {
                positive("radius", radius)?;
                if !(cap_angle_deg > 0.0 && cap_angle_deg < 180.0) {
                    return Err(Error::invalid("cap angle must lie in (0, 180) degrees"));
                }
                Ok(())
            }
        }
    }
}

/// Exact surfaces that primitives carry for re-projection during refinement.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticSurface {
    Sphere { center: Point, radius: f64 },
    Disk { center: Point, radius: f64 },
    Plane,
    /// Cylinder around the z axis; rims are circles of the same radius.
    Cylinder { radius: f64 },
    Torus { major: f64, minor: f64 },
    /// Sphere piece whose boundary is the circle of the sphere at height `rim_z`.
    Cap { center: Point, radius: f64, rim_z: f64 },
}

impl AnalyticSurface {
    pub fn project(&self, p: &Point) -> Point {
        match self {
            AnalyticSurface::Sphere { center, radius } | AnalyticSurface::Cap { center, radius, .. } => {
                center + (p - center).normalize() * *radius
            }
            AnalyticSurface::Disk { center, .. } => Point::new(p.x, p.y, center.z),
            AnalyticSurface::Plane => *p,
            AnalyticSurface::Cylinder { radius } => {
                let r = (p.x * p.x + p.y * p.y).sqrt();
                Point::new(p.x * radius / r, p.y * radius / r, p.z)
            }
            AnalyticSurface::Torus { major, minor } => {
                let phi = p.y.atan2(p.x);
                let c = Point::new(major * phi.cos(), major * phi.sin(), 0.0);
                c + (p - c).normalize() * *minor
            }
        }
    }

    pub fn project_boundary(&self, p: &Point) -> Point {
        match self {
            AnalyticSurface::Disk { center, radius } => {
                let d = Point::new(p.x - center.x, p.y - center.y, 0.0);
                center + d.normalize() * *radius
            }
            AnalyticSurface::Cap { center, radius, rim_z } => {
                let h = rim_z - center.z;
                let rho = (radius * radius - h * h).max(0.0).sqrt();
                let phi = (p.y - center.y).atan2(p.x - center.x);
                Point::new(center.x + rho * phi.cos(), center.y + rho * phi.sin(), *rim_z)
            }
            _ => self.project(p),
        }
    }

    /// Outward unit normal at a point near the surface.
    fn normal(&self, p: &Point) -> Point {
        match self {
            AnalyticSurface::Sphere { center, .. } | AnalyticSurface::Cap { center, .. } => (p - center).normalize(),
            AnalyticSurface::Disk { .. } | AnalyticSurface::Plane => Point::z(),
            AnalyticSurface::Cylinder { .. } => Point::new(p.x, p.y, 0.0).normalize(),
            AnalyticSurface::Torus { major, .. } => {
                let phi = p.y.atan2(p.x);
                let c = Point::new(major * phi.cos(), major * phi.sin(), 0.0);
                (p - c).normalize()
            }
        }
    }
}

/// Build the mesh described by `spec`.
pub fn generate_primitive(spec: &PrimitiveSpec) -> Result<TriMesh> {
    spec.check()?;
    let (vertices, faces, surface) = match *spec {
        PrimitiveSpec::Icosphere { radius, .. } => {
            let (v, f) = icosahedron(radius);
            (v, f, AnalyticSurface::Sphere { center: Point::zeros(), radius })
        }
        PrimitiveSpec::Disk { radius, .. } => {
            let mut v = vec![Point::zeros()];
            for k in 0..6 {
                let t = k as f64 * PI / 3.0;
                v.push(Point::new(radius * t.cos(), radius * t.sin(), 0.0));
            }
            let f = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
            (v, f, AnalyticSurface::Disk { center: Point::zeros(), radius })
        }
        PrimitiveSpec::Cylinder { radius, height, .. } => {
            let n = 6;
            let mut v = Vec::new();
            for z in [0.0, height] {
                for k in 0..n {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    v.push(Point::new(radius * t.cos(), radius * t.sin(), z));
                }
            }
            let mut f = Vec::new();
            for k in 0..n {
                let k1 = (k + 1) % n;
                f.push([k, k1, n + k1]);
                f.push([k, n + k1, n + k]);
            }
            (v, f, AnalyticSurface::Cylinder { radius })
        }
        PrimitiveSpec::Torus { major_radius, minor_radius, .. } => {
            let (nu, nv) = (8, 6);
            let mut v = Vec::new();
            for i in 0..nu {
                let u = 2.0 * PI * i as f64 / nu as f64;
                for j in 0..nv {
                    let w = 2.0 * PI * j as f64 / nv as f64;
                    let rr = major_radius + minor_radius * w.cos();
                    v.push(Point::new(rr * u.cos(), rr * u.sin(), minor_radius * w.sin()));
                }
            }
            let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
            let mut f = Vec::new();
            for i in 0..nu {
                for j in 0..nv {
                    f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            (v, f, AnalyticSurface::Torus { major: major_radius, minor: minor_radius })
        }
        PrimitiveSpec::PlanePatch { extent, .. } => {
            let h = extent / 2.0;
            let mut v = Vec::new();
            for j in 0..3 {
                for i in 0..3 {
                    v.push(Point::new(-h + h * i as f64, -h + h * j as f64, 0.0));
                }
            }
            let mut f = Vec::new();
            for j in 0..2 {
                for i in 0..2 {
                    let a = j * 3 + i;
                    let (b, c, d) = (a + 1, a + 4, a + 3);
                    if (i + j) % 2 == 0 {
                        f.push([a, b, c]);
                        f.push([a, c, d]);
                    } else {
                        f.push([a, b, d]);
                        f.push([b, c, d]);
                    }
                }
            }
            (v, f, AnalyticSurface::Plane)
        }
        PrimitiveSpec::SphericalCap { radius, cap_angle_deg, .. } => {
            let alpha = cap_angle_deg.to_radians();
            let center = Point::new(0.0, 0.0, -radius * alpha.cos());
            let at = |polar: f64, phi: f64| {
                center + radius * Point::new(polar.sin() * phi.cos(), polar.sin() * phi.sin(), polar.cos())
            };
            let mut v = vec![at(0.0, 0.0)];
            for k in 0..6 {
                v.push(at(alpha / 2.0, k as f64 * PI / 3.0));
            }
            for k in 0..12 {
                let mut p = at(alpha, k as f64 * PI / 6.0);
                p.z = 0.0;
                v.push(p);
            }
            let mid = |k: usize| 1 + k % 6;
            let rim = |k: usize| 7 + k % 12;
            let mut f = Vec::new();
            for k in 0..6 {
                f.push([0, mid(k), mid(k + 1)]);
                f.push([mid(k), rim(2 * k), rim(2 * k + 1)]);
                f.push([mid(k), rim(2 * k + 1), mid(k + 1)]);
                f.push([mid(k + 1), rim(2 * k + 1), rim(2 * k + 2)]);
            }
            (v, f, AnalyticSurface::Cap { center, radius, rim_z: 0.0 })
        }
    };
    let faces = orient_outward(&vertices, faces, &surface);
    let mut mesh = TriMesh::from_raw(vertices, faces).with_surface(Some(surface));
    for _ in 0..spec.level() {
        mesh = mesh.refine();
    }
    Ok(mesh)
}

fn orient_outward(v: &[Point], faces: Vec<[usize; 3]>, s: &AnalyticSurface) -> Vec<[usize; 3]> {
    faces
        .into_iter()
        .map(|[a, b, c]| {
            let n = (v[b] - v[a]).cross(&(v[c] - v[a]));
            let centroid = (v[a] + v[b] + v[c]) / 3.0;
            if n.dot(&s.normal(&centroid)) < 0.0 {
                [a, c, b]
            } else {
                [a, b, c]
            }
        })
        .collect()
}

fn icosahedron(radius: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let v = raw.iter().map(|&(x, y, z)| Point::new(x, y, z).normalize() * radius).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}
