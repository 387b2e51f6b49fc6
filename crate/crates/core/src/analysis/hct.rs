//! Hsieh-Clough-Tocher macro elements on a polar disk grid.
//!
//! Each triangle is split at its centroid into three cubic pieces joined
//! with C¹ continuity. The twelve degrees of freedom are the value and
//! gradient at the corners and the normal derivative at edge midpoints, so
//! the global space is C¹ and contains every cubic polynomial.

use std::collections::HashMap;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LltRef, SymmetricOrdering};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Par, Side};
use nalgebra::{DMatrix, SMatrix};

use crate::error::{Error, Result};

pub(crate) type Cubic = [f64; 10];

pub(crate) fn monomials(x: f64, y: f64) -> Cubic {
    [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y]
}

pub(crate) fn d_dx(x: f64, y: f64) -> Cubic {
    [0.0, 1.0, 0.0, 2.0 * x, y, 0.0, 3.0 * x * x, 2.0 * x * y, y * y, 0.0]
}

pub(crate) fn d_dy(x: f64, y: f64) -> Cubic {
    [0.0, 0.0, 1.0, 0.0, x, 2.0 * y, 0.0, x * x, 2.0 * x * y, 3.0 * y * y]
}

/// Second derivatives `(xx, xy, yy)` of the monomial basis.
pub(crate) fn d2(x: f64, y: f64) -> [Cubic; 3] {
    [
        [0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 6.0 * x, 2.0 * y, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0 * x, 2.0 * y, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 2.0 * x, 6.0 * y],
    ]
}

fn dot(a: &Cubic, c: &[f64]) -> f64 {
    a.iter().zip(c).map(|(a, c)| a * c).sum()
}

/// Polar disk grid: a centre node and rings `k = 1..=n` of `6k` nodes at
/// radius `ρk/n`; the outer ring lies exactly on the circle.
#[derive(Clone, Debug)]
pub(crate) struct DiskGrid {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    /// Edge indices of each triangle, edge `s` joining corners `s` and `s+1`.
    pub tri_edges: Vec<[usize; 3]>,
    pub rim: Vec<usize>,
    pub rim_edges: Vec<usize>,
}

fn ring_start(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        1 + 3 * k * (k - 1)
    }
}

impl DiskGrid {
    pub fn new(rho: f64, n: usize) -> DiskGrid {
        let mut nodes = vec![[0.0, 0.0]];
        for k in 1..=n {
            let r = rho * k as f64 / n as f64;
            for j in 0..6 * k {
                let t = std::f64::consts::TAU * j as f64 / (6 * k) as f64;
                nodes.push([r * t.cos(), r * t.sin()]);
            }
        }
        let mut triangles = Vec::with_capacity(6 * n * n);
        for j in 0..6 {
            triangles.push([0, 1 + j, 1 + (j + 1) % 6]);
        }
        for k in 2..=n {
            let (m, big) = (6 * (k - 1), 6 * k);
            let (a, b) = (ring_start(k - 1), ring_start(k));
            let (mut i, mut j) = (0, 0);
            while i < m || j < big {
                // compare (j+1)/big against (i+1)/m without rounding
                let outer_first = i == m || (j < big && (j + 1) * m <= (i + 1) * big);
                if outer_first {
                    triangles.push([a + i % m, b + j, b + (j + 1) % big]);
                    j += 1;
                } else {
                    triangles.push([a + i, b + j % big, a + (i + 1) % m]);
                    i += 1;
                }
            }
        }
        let mut index = HashMap::new();
        let mut edges = Vec::new();
        let tri_edges = triangles
            .iter()
            .map(|t| {
                let mut out = [0; 3];
                for s in 0..3 {
                    let (p, q) = (t[s].min(t[(s + 1) % 3]), t[s].max(t[(s + 1) % 3]));
                    out[s] = *index.entry((p, q)).or_insert_with(|| {
                        edges.push([p, q]);
                        edges.len() - 1
                    });
                }
                out
            })
            .collect();
        let first_rim = ring_start(n);
        let rim: Vec<usize> = (first_rim..nodes.len()).collect();
        let rim_edges = (0..edges.len()).filter(|&e| edges[e][0] >= first_rim && edges[e][1] >= first_rim).collect();
        DiskGrid { nodes, triangles, edges, tri_edges, rim, rim_edges }
    }

    /// Unit normal of an edge, the tangent from its lower to its higher
    /// node turned clockwise.
    pub fn edge_normal(&self, e: usize) -> [f64; 2] {
        let [p, q] = self.edges[e];
        let (a, b) = (self.nodes[p], self.nodes[q]);
        let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
        let l = tx.hypot(ty);
        [ty / l, -tx / l]
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.nodes.len() + self.edges.len()
    }

    /// Global degrees of freedom of a triangle in local order: value and
    /// gradient at each corner, then the three edge normal derivatives.
    pub fn element_dofs(&self, t: usize) -> [usize; 12] {
        let mut out = [0; 12];
        for (c, &v) in self.triangles[t].iter().enumerate() {
            out[3 * c] = 3 * v;
            out[3 * c + 1] = 3 * v + 1;
            out[3 * c + 2] = 3 * v + 2;
        }
        for s in 0..3 {
            out[9 + s] = 3 * self.nodes.len() + self.tri_edges[t][s];
        }
        out
    }
}

/// One macro element: the map from its twelve degrees of freedom to the
/// monomial coefficients of its three pieces in scaled local coordinates
/// `(p − centre)/scale`.
#[derive(Clone, Debug)]
pub(crate) struct Element {
    pub scale: f64,
    /// Corners in local coordinates.
    pub corners: [[f64; 2]; 3],
    /// Rows `10s..10s+10` give the coefficients of piece `s`, the triangle
    /// `(centre, corner s, corner s+1)`.
    pub map: SMatrix<f64, 30, 12>,
}

fn sub_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl Element {
    pub fn new(p: [[f64; 2]; 3], normals: [[f64; 2]; 3]) -> Result<Element> {
        let centre = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let scale = (0..3).map(|s| (p[(s + 1) % 3][0] - p[s][0]).hypot(p[(s + 1) % 3][1] - p[s][1])).fold(0.0, f64::max);
        let corners = p.map(|q| [(q[0] - centre[0]) / scale, (q[1] - centre[1]) / scale]);
        let area = sub_area(corners[0], corners[1], corners[2]);
        if !(area > 1e-8) {
            return Err(Error::numerical(format!(
                "degenerate grid triangle at ({:.6}, {:.6}): scaled area {area:.3e}, diameter {scale:.3e}",
                centre[0], centre[1]
            )));
        }

        let mut rows: Vec<([f64; 30], [f64; 12])> = Vec::with_capacity(54);
        let piece_row = |s: usize, basis: Cubic| {
            let mut r = [0.0; 30];
            r[10 * s..10 * s + 10].copy_from_slice(&basis);
            r
        };
        let jump_row = |s: usize, t: usize, basis: Cubic| {
            let mut r = [0.0; 30];
            for i in 0..10 {
                r[10 * s + i] += basis[i];
                r[10 * t + i] -= basis[i];
            }
            r
        };
        for s in 0..3 {
            for c in [s, (s + 1) % 3] {
                let [x, y] = corners[c];
                let mut b = [0.0; 12];
                b[3 * c] = 1.0;
                rows.push((piece_row(s, monomials(x, y)), b));
                let mut b = [0.0; 12];
                b[3 * c + 1] = scale;
                rows.push((piece_row(s, d_dx(x, y)), b));
                let mut b = [0.0; 12];
                b[3 * c + 2] = scale;
                rows.push((piece_row(s, d_dy(x, y)), b));
            }
        }
        for s in 0..2 {
            for basis in [monomials(0.0, 0.0), d_dx(0.0, 0.0), d_dy(0.0, 0.0)] {
                rows.push((jump_row(s, s + 1, basis), [0.0; 12]));
            }
        }
        for s in 0..3 {
            let prev = (s + 2) % 3;
            for t in [0.25, 0.5, 0.75] {
                let (x, y) = (t * corners[s][0], t * corners[s][1]);
                for basis in [monomials(x, y), d_dx(x, y), d_dy(x, y)] {
                    rows.push((jump_row(s, prev, basis), [0.0; 12]));
                }
            }
        }
        for s in 0..3 {
            let (a, b) = (corners[s], corners[(s + 1) % 3]);
            let (x, y) = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
            let (gx, gy) = (d_dx(x, y), d_dy(x, y));
            let nu = normals[s];
            let mut basis = [0.0; 10];
            for i in 0..10 {
                basis[i] = nu[0] * gx[i] + nu[1] * gy[i];
            }
            let mut rhs = [0.0; 12];
            rhs[9 + s] = scale;
            rows.push((piece_row(s, basis), rhs));
        }

        let a = DMatrix::from_fn(rows.len(), 30, |i, j| rows[i].0[j]);
        let b = DMatrix::from_fn(rows.len(), 12, |i, j| rows[i].1[j]);
        let svd = a.svd(true, true);
        let (hi, lo) = svd.singular_values.iter().fold((0.0f64, f64::INFINITY), |(h, l), &s| (h.max(s), l.min(s)));
        if !(lo > 1e-10 * hi) {
            return Err(Error::numerical(format!(
                "singular element system at ({:.6}, {:.6}): singular values {lo:.3e}..{hi:.3e}",
                centre[0], centre[1]
            )));
        }
        let x = svd.solve(&b, 0.0).map_err(Error::numerical)?;
        let map = SMatrix::<f64, 30, 12>::from_fn(|i, j| x[(i, j)]);
        Ok(Element { scale, corners, map })
    }

    /// Piece `s` as a sub-triangle in local coordinates.
    pub fn piece(&self, s: usize) -> [[f64; 2]; 3] {
        [[0.0, 0.0], self.corners[s], self.corners[(s + 1) % 3]]
    }

    /// `∫ |D²v|²` as a quadratic form in the element degrees of freedom.
    pub fn stiffness(&self) -> SMatrix<f64, 12, 12> {
        let mut block = SMatrix::<f64, 30, 30>::zeros();
        for s in 0..3 {
            let [a, b, c] = self.piece(s);
            let w = sub_area(a, b, c) / 3.0 / (self.scale * self.scale);
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let h = d2(0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]));
                for (row, k) in h.iter().zip([1.0, 2.0, 1.0]) {
                    for i in 0..10 {
                        for j in 0..10 {
                            block[(10 * s + i, 10 * s + j)] += w * k * row[i] * row[j];
                        }
                    }
                }
            }
        }
        self.map.transpose() * block * self.map
    }

    /// Coefficients of the three pieces for given element values.
    pub fn coefficients(&self, dofs: &[f64; 12]) -> [Cubic; 3] {
        let c = self.map * SMatrix::<f64, 12, 1>::from_column_slice(dofs);
        std::array::from_fn(|s| std::array::from_fn(|i| c[10 * s + i]))
    }
}

/// Physical Hessian `(xx, xy, yy)` of a piece at local point `(x, y)`.
pub(crate) fn hessian(c: &Cubic, scale: f64, x: f64, y: f64) -> [f64; 3] {
    let h = d2(x, y);
    let k = 1.0 / (scale * scale);
    [k * dot(&h[0], c), k * dot(&h[1], c), k * dot(&h[2], c)]
}

/// Symmetric positive definite solve of `K x = rhs` given the lower
/// triangle of `K` as triplets (duplicates are summed). Single-threaded.
pub(crate) fn spd_solve(n: usize, lower: &[Triplet<usize, usize, f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let k = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, lower).map_err(|e| Error::numerical(format!("{e:?}")))?;
    let symbolic = factorize_symbolic_cholesky(k.symbolic(), Side::Lower, SymmetricOrdering::Amd, Default::default())
        .map_err(|e| Error::numerical(format!("{e:?}")))?;
    let par = Par::Seq;
    let mut values = vec![0.0; symbolic.len_val()];
    symbolic
        .factorize_numeric_llt::<f64>(
            &mut values,
            k.as_ref(),
            Side::Lower,
            Default::default(),
            par,
            MemStack::new(&mut MemBuffer::new(symbolic.factorize_numeric_llt_scratch::<f64>(par, Default::default()))),
            Default::default(),
        )
        .map_err(|e| Error::numerical(format!("plate system is not positive definite: {e:?}")))?;
    let mut x = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    LltRef::new(&symbolic, &values).solve_in_place_with_conj(
        Conj::No,
        x.as_mut(),
        par,
        MemStack::new(&mut MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, par))),
    );
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_orientation() {
        let g = DiskGrid::new(1.0, 5);
        assert_eq!(g.nodes.len(), 1 + 3 * 5 * 6);
        assert_eq!(g.triangles.len(), 6 * 25);
        assert_eq!(g.rim.len(), 30);
        assert_eq!(g.rim_edges.len(), 30);
        assert_eq!(g.nodes.len() + g.triangles.len() - g.edges.len(), 1);
        let total: f64 = g.triangles.iter().map(|t| sub_area(g.nodes[t[0]], g.nodes[t[1]], g.nodes[t[2]])).sum();
        assert!(g.triangles.iter().all(|t| sub_area(g.nodes[t[0]], g.nodes[t[1]], g.nodes[t[2]]) > 0.0));
        let polygon = 0.5 * 30.0 * (std::f64::consts::TAU / 30.0).sin();
        assert!((total - polygon).abs() < 1e-12);
        for &v in &g.rim {
            assert!((g.nodes[v][0].hypot(g.nodes[v][1]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn element_is_c1_and_interpolates() {
        let p = [[0.1, 0.0], [1.0, 0.2], [0.3, 0.9]];
        let normals = [[0.3, -0.8], [0.9, 0.4], [-1.0, 0.0]].map(|n: [f64; 2]| {
            let l = n[0].hypot(n[1]);
            [n[0] / l, n[1] / l]
        });
        let e = Element::new(p, normals).unwrap();
        let dofs = [0.3, -1.0, 0.5, 1.2, 0.1, 0.7, -0.4, 2.0, -0.3, 0.9, -0.6, 0.25];
        let c = e.coefficients(&dofs);
        for s in 0..3 {
            let prev = (s + 2) % 3;
            for t in [0.1, 0.37, 0.8] {
                let (x, y) = (t * e.corners[s][0], t * e.corners[s][1]);
                for basis in [monomials(x, y), d_dx(x, y), d_dy(x, y)] {
                    assert!((dot(&basis, &c[s]) - dot(&basis, &c[prev])).abs() < 1e-10);
                }
            }
            let [x, y] = e.corners[s];
            assert!((dot(&monomials(x, y), &c[s]) - dofs[3 * s]).abs() < 1e-10);
            assert!((dot(&d_dx(x, y), &c[s]) / e.scale - dofs[3 * s + 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn cubic_has_matching_stiffness() {
        let p = [[0.0, 0.0], [1.0, 0.0], [0.2, 0.8]];
        let normals = [[0.0, -1.0], [0.8, 0.6], [-0.97, 0.243]].map(|n: [f64; 2]| {
            let l = n[0].hypot(n[1]);
            [n[0] / l, n[1] / l]
        });
        let e = Element::new(p, normals).unwrap();
        // u = x³ + x y, Hessian (6x, 1, 0)
        let u = |x: f64, y: f64| (x.powi(3) + x * y, [3.0 * x * x + y, x]);
        let mut dofs = [0.0; 12];
        for c in 0..3 {
            let (v, g) = u(p[c][0], p[c][1]);
            dofs[3 * c] = v;
            dofs[3 * c + 1] = g[0];
            dofs[3 * c + 2] = g[1];
        }
        for s in 0..3 {
            let (a, b) = (p[s], p[(s + 1) % 3]);
            let (_, g) = u(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
            dofs[9 + s] = g[0] * normals[s][0] + g[1] * normals[s][1];
        }
        let d = SMatrix::<f64, 12, 1>::from_column_slice(&dofs);
        let energy = (d.transpose() * e.stiffness() * d)[(0, 0)];
        // ∫ 36x² + 2 over the triangle
        let area = 0.4;
        let xx = area / 6.0 * (0.0 + 1.0 + 0.04 + 0.0 * 1.0 + 1.0 * 0.2 + 0.2 * 0.0);
        assert!((energy - (36.0 * xx + 2.0 * area)).abs() < 1e-10, "{energy}");
    }
}
