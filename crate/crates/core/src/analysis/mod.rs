//! Clamped-plate extensions on a disk and the two estimates built on them:
//! the bending comparison `∫|D²w|² ≲ ρ ∫_γ |A|²` and the gradient scaling
//! law `sup |∇w_ρ| ≲ ρ⁻¹`.
//!
//! The plate problem `Δ²w = 0`, `w = u`, `∇w = ∇u` on the rim is solved with
//! C¹-conforming Hsieh-Clough-Tocher elements on a polar grid whose rim
//! nodes lie exactly on the circle.

mod hct;

use std::io::Write;

use faer::sparse::Triplet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use hct::{hessian, Cubic, DiskGrid, Element};

/// Name of the discretization, recorded with every patch.
pub const METHOD: &str = "hct-c1-macro-element";

/// Smooth functions on the plane used as trace sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TraceField {
    /// Coefficients of `1, x, y, x², xy, y², x³, x²y, xy², y³`; shorter
    /// lists are padded with zeros.
    Polynomial { coeffs: Vec<f64> },
    /// Lower cap `R − √(R² − |p − c|²)` of a sphere of radius `R` touching
    /// the plane at `c`.
    SphereCap { radius: f64, center: [f64; 2] },
    /// Sum of `modes` plane waves `a sin(k·p + φ)` with `|k_i| ≤ 2`.
    Random { seed: u64, modes: usize },
}

/// Value, gradient and Hessian `(xx, xy, yy)` at a point.
pub type Jet = (f64, [f64; 2], [f64; 3]);

impl TraceField {
    pub fn x2_minus_y2() -> TraceField {
        TraceField::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 1.0, 0.0, -1.0] }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            TraceField::Polynomial { coeffs } => {
                if coeffs.len() > 10 || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("polynomial traces take at most 10 finite coefficients"));
                }
            }
            TraceField::SphereCap { radius, center } => {
                if !(*radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("sphere cap needs a positive radius and a finite centre"));
                }
            }
            TraceField::Random { modes, .. } => {
                if *modes == 0 {
                    return Err(Error::invalid("random traces need at least one mode"));
                }
            }
        }
        Ok(())
    }

    fn waves(seed: u64, modes: usize) -> Vec<([f64; 2], f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..modes)
            .map(|_| {
                let k = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let a = rng.random_range(-1.0..1.0) / modes as f64;
                (k, a, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect()
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet {
        match self {
            TraceField::Polynomial { coeffs } => {
                let mut c = [0.0; 10];
                c[..coeffs.len()].copy_from_slice(coeffs);
                let [h0, h1, h2] = hct::d2(x, y);
                let d = |b: Cubic| b.iter().zip(&c).map(|(b, c)| b * c).sum::<f64>();
                (d(hct::monomials(x, y)), [d(hct::d_dx(x, y)), d(hct::d_dy(x, y))], [d(h0), d(h1), d(h2)])
            }
            TraceField::SphereCap { radius, center } => {
                let (u, v) = (x - center[0], y - center[1]);
                let s = (radius * radius - u * u - v * v).sqrt();
                let s3 = s * s * s;
                (
                    radius - s,
                    [u / s, v / s],
                    [1.0 / s + u * u / s3, u * v / s3, 1.0 / s + v * v / s3],
                )
            }
            TraceField::Random { seed, modes } => {
                let mut out = (0.0, [0.0; 2], [0.0; 3]);
                for (k, a, phi) in Self::waves(*seed, *modes) {
                    let t = k[0] * x + k[1] * y + phi;
                    let (s, c) = t.sin_cos();
                    out.0 += a * s;
                    out.1[0] += a * c * k[0];
                    out.1[1] += a * c * k[1];
                    out.2[0] -= a * s * k[0] * k[0];
                    out.2[1] -= a * s * k[0] * k[1];
                    out.2[2] -= a * s * k[1] * k[1];
                }
                out
            }
        }
    }
}

/// Rim data sampled at the angles `2πj/K` of a circle of radius `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RimTrace {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

impl RimTrace {
    pub fn sample(field: &TraceField, rho: f64, k: usize) -> Result<RimTrace> {
        field.check()?;
        let (mut values, mut gradients) = (Vec::with_capacity(k), Vec::with_capacity(k));
        for j in 0..k {
            let t = std::f64::consts::TAU * j as f64 / k as f64;
            let (u, g, _) = field.jet(rho * t.cos(), rho * t.sin());
            values.push(u);
            gradients.push(g);
        }
        let trace = RimTrace { values, gradients };
        trace.check()?;
        Ok(trace)
    }

    pub fn check(&self) -> Result<()> {
        if self.values.len() < 16 {
            return Err(Error::invalid(format!("rim trace has {} samples; at least 16 are required", self.values.len())));
        }
        if self.gradients.len() != self.values.len() {
            return Err(Error::invalid("rim trace values and gradients differ in length"));
        }
        if self.values.iter().chain(self.gradients.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("rim trace is not finite"));
        }
        Ok(())
    }
}

/// Trigonometric interpolant of equispaced periodic samples.
struct Trig {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Trig {
    fn new(f: &[f64]) -> Trig {
        let k = f.len();
        let (mut cos, mut sin) = (Vec::new(), Vec::new());
        for m in 0..=k / 2 {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in f.iter().enumerate() {
                let t = std::f64::consts::TAU * ((m * j) % k) as f64 / k as f64;
                a += v * t.cos();
                b += v * t.sin();
            }
            let w = if m == 0 || 2 * m == k { 1.0 } else { 2.0 } / k as f64;
            cos.push(w * a);
            sin.push(if 2 * m == k { 0.0 } else { w * b });
        }
        Trig { cos, sin }
    }

    fn eval(&self, t: f64) -> f64 {
        self.cos.iter().zip(&self.sin).enumerate().map(|(m, (a, b))| {
            let (s, c) = (m as f64 * t).sin_cos();
            a * c + b * s
        }).sum()
    }
}

/// Solved clamped plate on a disk.
#[derive(Clone, Debug)]
pub struct BiharmonicPatch {
    pub rho: f64,
    pub n: usize,
    pub method: &'static str,
    /// Largest deviation of `w` and `∇w` from the trace at rim nodes,
    /// relative to the trace size.
    pub rim_error: f64,
    /// `‖K w‖` over interior unknowns relative to the boundary load.
    pub residual: f64,
    grid: DiskGrid,
    dofs: Vec<f64>,
    pieces: Vec<(Element, [Cubic; 3])>,
}

fn assemble(grid: &DiskGrid) -> Result<(Vec<Element>, Vec<(usize, usize, f64)>)> {
    let elements = grid
        .triangles
        .iter()
        .zip(&grid.tri_edges)
        .map(|(t, e)| Element::new(t.map(|v| grid.nodes[v]), e.map(|e| grid.edge_normal(e))))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(elements.len() * 144);
    for (t, el) in elements.iter().enumerate() {
        let k = el.stiffness();
        let dofs = grid.element_dofs(t);
        for i in 0..12 {
            for j in 0..12 {
                entries.push((dofs[i], dofs[j], k[(i, j)]));
            }
        }
    }
    Ok((elements, entries))
}

/// Clamped-plate extension of rim data into the disk of radius `rho`,
/// on a grid with `n` rings.
pub fn biharmonic_extension(trace: &RimTrace, rho: f64, n: usize) -> Result<BiharmonicPatch> {
    trace.check()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid("disk radius must be positive"));
    }
    if n < 2 {
        return Err(Error::invalid("grid needs at least 2 rings"));
    }
    let grid = DiskGrid::new(rho, n);
    let n_dofs = grid.n_dofs();
    let (elements, entries) = assemble(&grid)?;

    let interp = [
        Trig::new(&trace.values),
        Trig::new(&trace.gradients.iter().map(|g| g[0]).collect::<Vec<_>>()),
        Trig::new(&trace.gradients.iter().map(|g| g[1]).collect::<Vec<_>>()),
    ];
    let mut fixed = vec![None; n_dofs];
    let mut rim_grad = std::collections::HashMap::new();
    for &v in &grid.rim {
        let [x, y] = grid.nodes[v];
        let t = y.atan2(x);
        let g = [interp[1].eval(t), interp[2].eval(t)];
        fixed[3 * v] = Some(interp[0].eval(t));
        fixed[3 * v + 1] = Some(g[0]);
        fixed[3 * v + 2] = Some(g[1]);
        rim_grad.insert(v, g);
    }
    for &e in &grid.rim_edges {
        let [p, q] = grid.edges[e];
        let (a, b) = (rim_grad[&p], rim_grad[&q]);
        let nu = grid.edge_normal(e);
        fixed[3 * grid.nodes.len() + e] = Some(0.5 * ((a[0] + b[0]) * nu[0] + (a[1] + b[1]) * nu[1]));
    }

    let mut slot = vec![usize::MAX; n_dofs];
    let mut free = 0;
    for (i, f) in fixed.iter().enumerate() {
        if f.is_none() {
            slot[i] = free;
            free += 1;
        }
    }
    let mut lower = Vec::new();
    let mut load = vec![0.0; free];
    for &(i, j, k) in &entries {
        match (fixed[i], fixed[j]) {
            (None, None) if slot[i] >= slot[j] => lower.push(Triplet::new(slot[i], slot[j], k)),
            (None, Some(w)) => load[slot[i]] -= k * w,
            _ => {}
        }
    }
    let solution = hct::spd_solve(free, &lower, &load)?;
    let dofs: Vec<f64> = (0..n_dofs).map(|i| fixed[i].unwrap_or_else(|| solution[slot[i]])).collect();

    let mut kw = vec![0.0; free];
    for &(i, j, k) in &entries {
        if fixed[i].is_none() {
            kw[slot[i]] += k * dofs[j];
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let load_norm = norm(&load);
    let residual = if load_norm > 0.0 { norm(&kw) / load_norm } else { norm(&kw) };

    let scale = trace.values.iter().chain(trace.gradients.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
    let rim_error = grid
        .rim
        .iter()
        .flat_map(|&v| {
            let [x, y] = grid.nodes[v];
            let t = y.atan2(x);
            (0..3).map(move |c| (3 * v + c, t, c))
        })
        .map(|(i, t, c)| (dofs[i] - interp[c].eval(t)).abs())
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE);

    let pieces = elements
        .into_iter()
        .enumerate()
        .map(|(t, el)| {
            let local = grid.element_dofs(t).map(|i| dofs[i]);
            let c = el.coefficients(&local);
            (el, c)
        })
        .collect();
    Ok(BiharmonicPatch { rho, n, method: METHOD, rim_error, residual, grid, dofs, pieces })
}

/// 7-point rule on the reference triangle, exact for degree 5.
const DUNAVANT5: [(f64, f64, f64); 7] = [
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506),
    (0.470_142_064_105_115, 0.059_715_871_789_770, 0.132_394_152_788_506),
    (0.470_142_064_105_115, 0.470_142_064_105_115, 0.132_394_152_788_506),
    (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827),
    (0.101_286_507_323_456, 0.797_426_985_353_087, 0.125_939_180_544_827),
    (0.101_286_507_323_456, 0.101_286_507_323_456, 0.125_939_180_544_827),
];

impl BiharmonicPatch {
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.grid.nodes
    }

    pub fn rim_nodes(&self) -> &[usize] {
        &self.grid.rim
    }

    pub fn value(&self, node: usize) -> f64 {
        self.dofs[3 * node]
    }

    pub fn gradient(&self, node: usize) -> [f64; 2] {
        [self.dofs[3 * node + 1], self.dofs[3 * node + 2]]
    }

    /// Largest nodal `|∇w|`.
    pub fn sup_gradient(&self) -> f64 {
        (0..self.grid.nodes.len()).map(|v| {
            let g = self.gradient(v);
            g[0].hypot(g[1])
        }).fold(0.0, f64::max)
    }

    /// `(∫|D²w|², ∫|D²w|)` with the Frobenius norm.
    pub fn hessian_integrals(&self) -> (f64, f64) {
        let (mut l2, mut l1) = (0.0, 0.0);
        for (el, coeffs) in &self.pieces {
            for (s, c) in coeffs.iter().enumerate() {
                let [a, b, d] = el.piece(s);
                let area = 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0])) * el.scale * el.scale;
                for &(l1w, l2w, w) in &DUNAVANT5 {
                    let x = a[0] + l1w * (b[0] - a[0]) + l2w * (d[0] - a[0]);
                    let y = a[1] + l1w * (b[1] - a[1]) + l2w * (d[1] - a[1]);
                    let [hxx, hxy, hyy] = hessian(c, el.scale, x, y);
                    let sq = hxx * hxx + 2.0 * hxy * hxy + hyy * hyy;
                    l2 += w * area * sq;
                    l1 += w * area * sq.sqrt();
                }
            }
        }
        (l2, l1)
    }

    /// Grid dump with columns `x, y, w, wx, wy`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "w", "wx", "wy"])?;
        for (v, p) in self.grid.nodes.iter().enumerate() {
            let g = self.gradient(v);
            w.serialize((p[0], p[1], self.value(v), g[0], g[1]))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BendingComparison {
    /// `∫|D²w|²`.
    pub lhs: f64,
    /// `∫|D²w|²/(ρ ∫_γ |A|²)`; `None` when the comparison is vacuous.
    pub ratio: Option<f64>,
    /// `∫|D²w|`, the first-power quantity.
    pub lhs_l1: f64,
    pub ratio_l1: Option<f64>,
    /// The rim integral vanishes while `w` bends.
    pub vacuous: bool,
}

/// Compare the plate bending energy with the rim curvature integral.
pub fn bending_comparison(patch: &BiharmonicPatch, rim_curvature_integral: f64) -> Result<BendingComparison> {
    if !(rim_curvature_integral >= 0.0 && rim_curvature_integral.is_finite()) {
        return Err(Error::invalid("rim curvature integral must be finite and non-negative"));
    }
    let (lhs, lhs_l1) = patch.hessian_integrals();
    let denom = patch.rho * rim_curvature_integral;
    let flat = lhs <= 1e-20;
    let vacuous = denom == 0.0 && !flat;
    let ratio = |q: f64| match (denom > 0.0, flat) {
        (true, _) => Some(q / denom),
        (false, true) => Some(0.0),
        (false, false) => None,
    };
    Ok(BendingComparison { lhs, ratio: ratio(lhs), lhs_l1, ratio_l1: ratio(lhs_l1), vacuous })
}

/// `∫_γ |A|² dH¹` along the rim curve `θ ↦ (ρ cos θ, ρ sin θ, u)` of the
/// graph of `field`, by the periodic trapezoid rule.
pub fn rim_curvature_integral(field: &TraceField, rho: f64, samples: usize) -> Result<f64> {
    field.check()?;
    if samples < 16 {
        return Err(Error::invalid("at least 16 rim samples are required"));
    }
    let dt = std::f64::consts::TAU / samples as f64;
    let mut total = 0.0;
    for j in 0..samples {
        let t = j as f64 * dt;
        let (x, y) = (rho * t.cos(), rho * t.sin());
        let (_, p, [hxx, hxy, hyy]) = field.jet(x, y);
        let w2 = 1.0 + p[0] * p[0] + p[1] * p[1];
        // g⁻¹ = I − p pᵀ/W², A = D²u/W
        let gi = [[1.0 - p[0] * p[0] / w2, -p[0] * p[1] / w2], [-p[0] * p[1] / w2, 1.0 - p[1] * p[1] / w2]];
        let a = [[hxx, hxy], [hxy, hyy]];
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = (0..2).map(|k| gi[i][k] * a[k][j]).sum();
            }
        }
        let a2 = (m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1]) / w2;
        let du = -y * p[0] + x * p[1];
        let speed = (rho * rho + du * du).sqrt();
        if !(a2.is_finite() && speed.is_finite()) {
            return Err(Error::invalid("graph is not smooth along the rim"));
        }
        total += a2 * speed * dt;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub rho: f64,
    pub sup_grad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgmonReport {
    pub points: Vec<ScalingPoint>,
    /// `s(ρ/2)/s(ρ)` for consecutive radii.
    pub ratios: Vec<f64>,
    /// Every ratio is at most `2.2`.
    pub holds: bool,
}

/// Sup-gradient of the plate extension of `field` restricted to circles of
/// the given radii, each half the previous one.
pub fn agmon_scaling(field: &TraceField, rhos: &[f64], n: usize, samples: usize) -> Result<AgmonReport> {
    if rhos.len() < 2 {
        return Err(Error::invalid("scaling study needs at least two radii"));
    }
    if rhos.windows(2).any(|w| !(w[0] > 0.0) || (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0]) {
        return Err(Error::invalid("radii must be positive and halve at each step"));
    }
    let sups = rhos
        .par_iter()
        .map(|&rho| {
            let trace = RimTrace::sample(field, rho, samples)?;
            Ok(biharmonic_extension(&trace, rho, n)?.sup_gradient())
        })
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = sups.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let holds = ratios.iter().all(|&r| r <= 2.2);
    let points = rhos.iter().zip(sups).map(|(&rho, sup_grad)| ScalingPoint { rho, sup_grad }).collect();
    Ok(AgmonReport { points, ratios, holds })
}
