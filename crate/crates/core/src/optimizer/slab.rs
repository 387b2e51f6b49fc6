//! Slab confinement: two sheets joined by an array of catenoidal necks,
//! squeezed into `|z| ≤ h/2` and minimized with H₀ = 1. As `h` shrinks the
//! oriented varifolds approach the doubly covered unit square while the
//! energy stays well below that of the double plane.

use std::collections::HashMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{minimize_in, OptOptions, Slab, Termination};
use crate::boundary::ClampSet;
use crate::energy::{helfrich_energy_varifold, EnergyBreakdown, EnergyParams};
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};
use crate::varifold::{from_mesh, varifold_distance, OrientedVarifold, ProbeDictionary, ReferenceOrientation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabSpec {
    /// Slab thickness.
    pub h: f64,
    pub params: EnergyParams,
}

/// Geometry of the neck-array mesh over the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeckArray {
    /// Cells per side; one neck per cell.
    pub cells: usize,
    /// Sheet heights ±z0.
    pub z0: f64,
    /// Catenoid waist radius.
    pub waist: f64,
    /// Vertices per cell side.
    pub side: usize,
    pub sheet_rings: usize,
    pub neck_rings: usize,
}

impl NeckArray {
    /// Mesh family used for thickness `h`: sheets at ±h/4, waist h/8, and
    /// `⌊0.4/h⌋` cells per side (at least one).
    pub fn for_thickness(h: f64) -> NeckArray {
        NeckArray {
            cells: (0.4 / h).floor().max(1.0) as usize,
            z0: h / 4.0,
            waist: h / 8.0,
            side: 6,
            sheet_rings: 6,
            neck_rings: 6,
        }
    }

    fn check(&self) -> Result<()> {
        if self.cells < 1 || self.side < 1 || self.sheet_rings < 1 || self.neck_rings < 2 {
            return Err(Error::invalid("neck array resolution too small"));
        }
        if !(self.z0 > 0.0 && self.waist > 0.0) {
            return Err(Error::invalid("neck height and waist must be positive"));
        }
        let flare = self.waist * (self.z0 / self.waist).cosh();
        if flare >= 0.45 / self.cells as f64 {
            return Err(Error::invalid("necks do not fit in their cells"));
        }
        Ok(())
    }
}

struct Welder {
    index: HashMap<[u64; 3], usize>,
    points: Vec<Point>,
}

impl Welder {
    fn id(&mut self, p: Point) -> usize {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        let points = &mut self.points;
        *self.index.entry(key).or_insert_with(|| {
            points.push(p);
            points.len() - 1
        })
    }
}

fn orient_up(vertices: Vec<Point>, mut faces: Vec<[usize; 3]>, probe: usize) -> Result<TriMesh> {
    let m = TriMesh::from_raw(vertices.clone(), faces.clone());
    if m.face_cross(probe).z < 0.0 {
        for f in faces.iter_mut() {
            f.swap(1, 2);
        }
    }
    TriMesh::new(vertices, faces)
}

/// Two sheets over the unit square at `z = ±z0`, oriented away from each
/// other, joined by one catenoid neck at the center of every cell.
pub fn neck_array(spec: &NeckArray) -> Result<TriMesh> {
    spec.check()?;
    let n = spec.cells;
    let k = spec.side;
    let g = (n * k) as f64;
    let m = 4 * k;
    let a = spec.waist;
    let t_end = spec.z0 / a;
    let flare = a * t_end.cosh();
    let mut w = Welder { index: HashMap::new(), points: Vec::new() };
    let mut faces = Vec::new();
    let mut top_face = None;
    for i in 0..n {
        for j in 0..n {
            let (ik, jk) = (i * k, j * k);
            let square: Vec<(f64, f64)> = (0..m)
                .map(|p| {
                    let (s, r) = (p / k, p % k);
                    let (x, y) = match s {
                        0 => (ik + r, jk),
                        1 => (ik + k, jk + r),
                        2 => (ik + k - r, jk + k),
                        _ => (ik, jk + k - r),
                    };
                    (x as f64 / g, y as f64 / g)
                })
                .collect();
            let c = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            let dirs: Vec<(f64, f64)> = square
                .iter()
                .map(|&(x, y)| {
                    let th = (y - c.1).atan2(x - c.0);
                    (th.cos(), th.sin())
                })
                .collect();
            let sheet_ring = |t: f64, z: f64| -> Vec<Point> {
                square
                    .iter()
                    .zip(&dirs)
                    .map(|(&(sx, sy), &(dx, dy))| {
                        let (cx, cy) = (c.0 + flare * dx, c.1 + flare * dy);
                        Point::new((1.0 - t) * cx + t * sx, (1.0 - t) * cy + t * sy, z)
                    })
                    .collect()
            };
            let mut rings: Vec<Vec<Point>> = Vec::new();
            let ns = spec.sheet_rings;
            for q in (0..=ns).rev() {
                rings.push(sheet_ring(q as f64 / ns as f64, -spec.z0));
            }
            let nc = spec.neck_rings;
            for jn in 1..nc {
                let tau = -t_end + 2.0 * t_end * jn as f64 / nc as f64;
                let r = a * tau.cosh();
                rings.push(dirs.iter().map(|&(dx, dy)| Point::new(c.0 + r * dx, c.1 + r * dy, a * tau)).collect());
            }
            let top_start = rings.len();
            for q in 0..=ns {
                rings.push(sheet_ring(q as f64 / ns as f64, spec.z0));
            }
            let ids: Vec<Vec<usize>> = rings.into_iter().map(|r| r.into_iter().map(|p| w.id(p)).collect()).collect();
            for s in 0..ids.len() - 1 {
                for p in 0..m {
                    let q = (p + 1) % m;
                    let (v00, v01, v11, v10) = (ids[s][p], ids[s][q], ids[s + 1][q], ids[s + 1][p]);
                    if s == top_start && top_face.is_none() {
                        top_face = Some(faces.len());
                    }
                    faces.push([v00, v01, v11]);
                    faces.push([v00, v11, v10]);
                }
            }
        }
    }
    orient_up(w.points, faces, top_face.expect("at least one cell"))
}

/// Two flat copies of the unit square at `z = 0`, the upper facing +z and
/// the lower facing −z.
pub fn double_plane(per_side: usize) -> Result<TriMesh> {
    let n = per_side.max(1);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for sheet in 0..2 {
        let base = vertices.len();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
            }
        }
        let id = |i: usize, j: usize| base + j * (n + 1) + i;
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if sheet == 0 {
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                } else {
                    faces.push([a, c, b]);
                    faces.push([a, d, c]);
                }
            }
        }
    }
    TriMesh::new(vertices, faces)
}

#[derive(Clone, Debug, Serialize)]
pub struct SlabRow {
    pub h: f64,
    pub cells: usize,
    pub energy: EnergyBreakdown,
    /// Probe distance to the double-plane varifold.
    pub distance: f64,
    pub termination: Termination,
    pub iterations: usize,
    #[serde(skip)]
    pub varifold: OrientedVarifold,
    #[serde(skip)]
    pub mesh: TriMesh,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlabReport {
    pub rows: Vec<SlabRow>,
    /// Energy of the doubly covered unit square.
    pub limit_energy: f64,
    pub strictly_decreasing: bool,
    pub distance_decreasing: bool,
    /// Some minimized energy lies below 0.9 times the limit energy.
    pub lsc_failure: bool,
}

pub fn slab_experiment(specs: &[SlabSpec], opts: &OptOptions) -> Result<SlabReport> {
    slab_experiment_with(specs, opts, NeckArray::for_thickness)
}

/// [`slab_experiment`] with a caller-chosen mesh family.
pub fn slab_experiment_with(
    specs: &[SlabSpec],
    opts: &OptOptions,
    geometry: impl Fn(f64) -> NeckArray,
) -> Result<SlabReport> {
    if specs.len() < 3 {
        return Err(Error::invalid("slab experiment needs at least three thicknesses"));
    }
    if specs.iter().any(|s| !(s.h > 0.0)) {
        return Err(Error::invalid("slab thickness must be positive"));
    }
    if specs.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(Error::invalid("slab thicknesses must be strictly decreasing"));
    }
    let limit_mesh = double_plane(16)?;
    let limit = from_mesh(&limit_mesh, ReferenceOrientation::Along(Vector3::z()));
    let dict = ProbeDictionary::standard(Point::new(0.0, 0.0, -0.5), Point::new(1.0, 1.0, 0.5));
    let params = specs[0].params;
    let limit_energy = helfrich_energy_varifold(&limit, &params, &vec![Vector3::zeros(); limit.atoms.len()])?;

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let geom = geometry(spec.h);
        let mesh = neck_array(&geom)?;
        let clamp = ClampSet::pinned(&mesh);
        let run_opts = OptOptions { penalty_schedule: Vec::new(), ..opts.clone() };
        let slab = Slab { half: spec.h / 2.0, weight: 1e4 * spec.params.lambda };
        let r = minimize_in(&mesh, &spec.params, &clamp, &run_opts, Some(slab))?;
        let var = from_mesh(&r.mesh, ReferenceOrientation::Along(Vector3::z()));
        let distance = varifold_distance(&var, &limit, &dict)?;
        log::info!("slab h = {}: energy {} distance {}", spec.h, r.energy.total, distance);
        rows.push(SlabRow {
            h: spec.h,
            cells: geom.cells,
            energy: r.energy,
            distance,
            termination: r.termination,
            iterations: r.iterations,
            varifold: var,
            mesh: r.mesh,
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].energy.total < w[0].energy.total);
    let distance_decreasing = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    let lsc_failure = rows.iter().any(|r| r.energy.total < 0.9 * limit_energy);
    Ok(SlabReport { rows, limit_energy, strictly_decreasing, distance_decreasing, lsc_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn neck_array_is_a_valid_two_rim_surface() {
        for cells in [1, 2] {
            let spec = NeckArray { cells, ..NeckArray::for_thickness(0.25) };
            let m = neck_array(&spec).unwrap();
            assert!(validate(&m).is_valid());
            assert_eq!(m.boundary_loops().len(), 2);
            // two squares with cells² holes each, glued along annuli
            assert_eq!(m.euler_characteristic(), 2 - 2 * (cells * cells) as i64);
            assert!(m.vertices().iter().all(|p| p.z.abs() <= spec.z0 + 1e-15));
            let top = m.faces().iter().enumerate().find(|(f, _)| m.barycenter(*f).z == spec.z0).unwrap().0;
            assert!(m.face_normal(top).z > 0.99);
        }
    }

    #[test]
    fn double_plane_limit_energy() {
        let m = double_plane(8).unwrap();
        let v = from_mesh(&m, ReferenceOrientation::Along(Vector3::z()));
        assert!(v.atoms.iter().all(|a| a.theta_plus == 1 && a.theta_minus == 1));
        let p = EnergyParams::new(1.0, 0.01).unwrap();
        let e = helfrich_energy_varifold(&v, &p, &vec![Vector3::zeros(); v.atoms.len()]).unwrap();
        assert!((e - 2.02).abs() < 1e-12);
    }

    #[test]
    fn thickness_list_is_validated() {
        let p = EnergyParams::new(1.0, 0.01).unwrap();
        let s = |h| SlabSpec { h, params: p };
        let o = OptOptions::default();
        assert!(slab_experiment(&[s(0.5), s(0.25)], &o).is_err());
        assert!(slab_experiment(&[s(0.5), s(0.5), s(0.25)], &o).is_err());
        assert!(slab_experiment(&[s(0.25), s(0.5), s(0.125)], &o).is_err());
    }
}
