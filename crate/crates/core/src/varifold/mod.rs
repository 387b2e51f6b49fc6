//! Discrete oriented varifolds and the measure-theoretic diagnostics built
//! on them: test-function pairings, a probe-dictionary distance, exact
//! density ratios, curvature concentration and the diameter estimate.
//!
//! An oriented plane is stored through its Hodge dual, the unit normal
//! `*ξ = τ₁ × τ₂`, so reversing orientation is negation.

mod density;
mod probe;

use std::collections::HashMap;
use std::io::Write;

use nalgebra::Vector3;
use serde::Serialize;

use crate::diffgeo::vertex_sums;
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

pub use density::{bad_points, density_ratio, diameter_check, ConcentrationReport, DiameterReport};
pub use probe::{varifold_distance, ProbeDictionary};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub position: Point,
    /// Reference orientation `*ξ`, a unit vector.
    pub normal: Vector3<f64>,
    pub theta_plus: u32,
    pub theta_minus: u32,
    /// Area carried by one sheet at this atom.
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OrientedVarifold {
    pub atoms: Vec<Atom>,
}

/// How the reference orientation of a merged atom is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceOrientation {
    /// The first face (in face order) at a location defines `ξ`.
    FirstSheet,
    /// `ξ` is the one of `±face normal` with non-negative component along
    /// the given direction.
    Along(Vector3<f64>),
}

/// Tolerances deciding when two face atoms are the same location and plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeTolerance {
    /// Relative to the bounding-box diagonal.
    pub position: f64,
    /// Radians between the (unsigned) planes.
    pub angle: f64,
}

impl Default for MergeTolerance {
    fn default() -> Self {
        MergeTolerance { position: 1e-9, angle: 1e-6 }
    }
}

/// One atom per face barycenter, coincident sheets merged into `θ±`.
pub fn from_mesh(mesh: &TriMesh, rule: ReferenceOrientation) -> OrientedVarifold {
    from_mesh_with(mesh, rule, MergeTolerance::default())
}

pub fn from_mesh_with(mesh: &TriMesh, rule: ReferenceOrientation, tol: MergeTolerance) -> OrientedVarifold {
    let eps = (tol.position * mesh.bbox_diagonal()).max(f64::MIN_POSITIVE);
    let cos_tol = tol.angle.cos();
    let key = |p: &Point| -> [i64; 3] { [(p.x / eps).floor() as i64, (p.y / eps).floor() as i64, (p.z / eps).floor() as i64] };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut sheets: Vec<u32> = Vec::new();
    for f in 0..mesh.n_faces() {
        let x = mesh.barycenter(f);
        let n = mesh.face_normal(f);
        let area = mesh.face_area(f);
        let k = key(&x);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &a in list {
                            let atom = &atoms[a];
                            if (atom.position - x).norm() <= eps && atom.normal.dot(&n).abs() >= cos_tol {
                                found = Some(a);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        match found {
            Some(a) => {
                let atom = &mut atoms[a];
                if atom.normal.dot(&n) > 0.0 {
                    atom.theta_plus += 1;
                } else {
                    atom.theta_minus += 1;
                }
                let s = sheets[a] as f64;
                atom.weight = (atom.weight * s + area) / (s + 1.0);
                sheets[a] += 1;
            }
            None => {
                let reference = match rule {
                    ReferenceOrientation::FirstSheet => n,
                    ReferenceOrientation::Along(d) => {
                        if n.dot(&d) >= 0.0 {
                            n
                        } else {
                            -n
                        }
                    }
                };
                let plus = reference.dot(&n) > 0.0;
                atoms.push(Atom {
                    position: x,
                    normal: reference,
                    theta_plus: plus as u32,
                    theta_minus: (!plus) as u32,
                    weight: area,
                });
                sheets.push(1);
                grid.entry(k).or_default().push(atoms.len() - 1);
            }
        }
    }
    OrientedVarifold { atoms }
}

/// Atoms at vertices carrying the vertex area and vertex normal; pairs with
/// per-vertex curvature fields such as `H̄_v ν_v`.
pub fn from_vertex_cells(mesh: &TriMesh) -> OrientedVarifold {
    let sums = vertex_sums(mesh);
    let atoms = (0..mesh.n_vertices())
        .map(|v| Atom {
            position: mesh.vertices()[v],
            normal: sums.normal_area[v].normalize(),
            theta_plus: 1,
            theta_minus: 0,
            weight: sums.area[v],
        })
        .collect();
    OrientedVarifold { atoms }
}

impl OrientedVarifold {
    /// `Σ w (θ₊ + θ₋)`.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * (a.theta_plus + a.theta_minus) as f64).sum()
    }

    /// Union of two varifolds (atoms are not re-merged).
    pub fn union(&self, other: &OrientedVarifold) -> OrientedVarifold {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        OrientedVarifold { atoms }
    }

    pub fn bbox(&self) -> Option<(Point, Point)> {
        let first = self.atoms.first()?.position;
        Some(self.atoms.iter().fold((first, first), |(lo, hi), a| (lo.inf(&a.position), hi.sup(&a.position))))
    }

    /// CSV with columns x, y, z, nx, ny, nz, theta_plus, theta_minus, weight.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "z", "nx", "ny", "nz", "theta_plus", "theta_minus", "weight"])?;
        for a in &self.atoms {
            w.write_record(&[
                a.position.x.to_string(),
                a.position.y.to_string(),
                a.position.z.to_string(),
                a.normal.x.to_string(),
                a.normal.y.to_string(),
                a.normal.z.to_string(),
                a.theta_plus.to_string(),
                a.theta_minus.to_string(),
                a.weight.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `∫ Φ dV = Σ w [θ₊ Φ(x, *ξ) + θ₋ Φ(x, −*ξ)]`.
pub fn test_integral(var: &OrientedVarifold, phi: impl Fn(&Point, &Vector3<f64>) -> f64) -> f64 {
    var.atoms
        .iter()
        .map(|a| {
            let mut s = 0.0;
            if a.theta_plus > 0 {
                s += a.theta_plus as f64 * phi(&a.position, &a.normal);
            }
            if a.theta_minus > 0 {
                s += a.theta_minus as f64 * phi(&a.position, &-a.normal);
            }
            a.weight * s
        })
        .sum()
}

pub(crate) fn require_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive and finite")));
    }
    Ok(())
}
