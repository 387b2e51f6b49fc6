//! Descent of the Helfrich energy over free vertex positions with clamped
//! boundary data, plus the two lower-semicontinuity experiments.

mod lsc;
mod slab;

use std::io::Write;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::boundary::clamp::{discrete_conormal, penalty_with_adjoint};
use crate::boundary::{conormal_residual, ClampSet, ConormalResidual};
use crate::diffgeo::{gauss_bonnet, vertex_sums};
use crate::energy::{backprop, el_residual, evaluate, EnergyBreakdown, EnergyParams, EnergyTerms};
use crate::error::{Error, Result};
use crate::mesh::{validate, TriMesh};

pub use lsc::{graph_lsc_experiment, graph_mesh, GraphBase, LscReport};
pub use slab::{double_plane, neck_array, slab_experiment, slab_experiment_with, NeckArray, SlabReport, SlabRow, SlabSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptOptions {
    /// Iteration budget of each penalty stage.
    pub max_iters: usize,
    /// Converged once `max |∇E| · bbox diagonal` over free vertices drops
    /// below this.
    pub grad_tol: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// L-BFGS memory.
    pub history: usize,
    /// Tangential relaxation period in iterations; 0 disables it.
    pub tangential_relax_every: usize,
    /// Descend along the vertex-normal component of the gradient only and
    /// test convergence on it. Tangential motion is left to relaxation.
    pub normal_descent: bool,
    /// Conormal penalty weights in units of λ (of 1 when λ = 0), run as
    /// successive stages. Empty means a single stage at the clamp set's own
    /// weight.
    pub penalty_schedule: Vec<f64>,
    /// Recorded with the result; the descent itself draws no random numbers.
    pub seed: u64,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            max_iters: 2000,
            grad_tol: 1e-6,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            history: 10,
            tangential_relax_every: 50,
            normal_descent: true,
            penalty_schedule: vec![10.0, 100.0, 1000.0],
            seed: 0,
        }
    }
}

impl OptOptions {
    pub fn check(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol must be positive"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid("shrink must lie in (0, 1)"));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::invalid("sufficient_decrease must lie in (0, 1)"));
        }
        if self.history < 1 {
            return Err(Error::invalid("history must be at least 1"));
        }
        if self.penalty_schedule.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::invalid("penalty weights must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    LineSearchFailed,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub stage: usize,
    pub bending: f64,
    pub area_term: f64,
    pub total: f64,
    /// Total plus conormal penalty plus slab barrier: the descended function.
    pub objective: f64,
    pub grad_norm: f64,
    pub conormal_max: f64,
    /// Interior angle defects plus boundary turning.
    pub gauss_bonnet: f64,
    pub step: f64,
    /// The row follows a tangential relaxation rather than a line search.
    pub relaxed: bool,
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub mesh: TriMesh,
    pub trace: Vec<TraceRow>,
    pub energy: EnergyBreakdown,
    pub conormal: Option<ConormalResidual>,
    pub termination: Termination,
    pub el_residual: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Serialize)]
struct ResultSummary<'a> {
    termination: Termination,
    iterations: usize,
    energy: &'a EnergyBreakdown,
    el_residual: f64,
    conormal_max: Option<f64>,
    conormal_mean: Option<f64>,
    seed: u64,
}

impl OptResult {
    pub fn to_json(&self) -> String {
        let s = ResultSummary {
            termination: self.termination,
            iterations: self.iterations,
            energy: &self.energy,
            el_residual: self.el_residual,
            conormal_max: self.conormal.as_ref().map(|c| c.max),
            conormal_mean: self.conormal.as_ref().map(|c| c.mean),
            seed: self.seed,
        };
        serde_json::to_string_pretty(&s).expect("summary serialization cannot fail")
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iter",
            "bending",
            "area_term",
            "total",
            "grad_norm",
            "conormal_max",
            "objective",
            "stage",
            "relaxed",
        ])
        .map_err(csv_err)?;
        for r in &self.trace {
            w.write_record([
                r.iter.to_string(),
                r.bending.to_string(),
                r.area_term.to_string(),
                r.total.to_string(),
                r.grad_norm.to_string(),
                r.conormal_max.to_string(),
                r.objective.to_string(),
                r.stage.to_string(),
                u8::from(r.relaxed).to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Quadratic barrier keeping every vertex inside `|z| ≤ half`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Slab {
    pub half: f64,
    pub weight: f64,
}

struct Objective<'a> {
    params: EnergyParams,
    clamp: &'a ClampSet,
    w_co: f64,
    slab: Option<Slab>,
    normal_only: bool,
}

struct Eval {
    energy: EnergyBreakdown,
    value: f64,
    grad: Vec<Vector3<f64>>,
    /// Descent gradient: the normal part of `grad` when tangential motion is
    /// left to relaxation, `grad` itself otherwise.
    dgrad: Vec<Vector3<f64>>,
    area: Vec<f64>,
}

impl Objective<'_> {
    fn barrier(&self, mesh: &TriMesh) -> f64 {
        match self.slab {
            None => 0.0,
            Some(s) => {
                s.weight
                    * mesh.vertices().iter().map(|p| (p.z.abs() - s.half).max(0.0).powi(2)).sum::<f64>()
            }
        }
    }

    fn value(&self, mesh: &TriMesh) -> (f64, EnergyBreakdown) {
        let sums = vertex_sums(mesh);
        let (energy, _) = evaluate(&sums, &mesh.topology().boundary_stencil, &self.params, EnergyTerms::ALL);
        let mut value = energy.total + self.barrier(mesh);
        if self.w_co > 0.0 {
            value += penalty_with_adjoint(mesh, self.clamp, &sums.normal_area, self.w_co).0;
        }
        (value, energy)
    }

    fn eval(&self, mesh: &TriMesh) -> Eval {
        let sums = vertex_sums(mesh);
        let (energy, mut adj) = evaluate(&sums, &mesh.topology().boundary_stencil, &self.params, EnergyTerms::ALL);
        let mut value = energy.total + self.barrier(mesh);
        if self.w_co > 0.0 {
            let (p, pa) = penalty_with_adjoint(mesh, self.clamp, &sums.normal_area, self.w_co);
            value += p;
            for (v, d) in pa {
                adj.n[v] += d;
            }
        }
        let mut grad = backprop(mesh, &adj);
        if let Some(s) = self.slab {
            for (g, p) in grad.iter_mut().zip(mesh.vertices()) {
                let e = p.z.abs() - s.half;
                if e > 0.0 {
                    g.z += 2.0 * s.weight * e * p.z.signum();
                }
            }
        }
        for e in &self.clamp.entries {
            grad[e.vertex] = Vector3::zeros();
        }
        let dgrad = if self.normal_only {
            grad.iter()
                .zip(&sums.normal_area)
                .map(|(g, n)| {
                    let nu = n.normalize();
                    nu * g.dot(&nu)
                })
                .collect()
        } else {
            grad.clone()
        };
        Eval { energy, value, grad, dgrad, area: sums.area }
    }
}

fn dot(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn sup(a: &[Vector3<f64>]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// A trial configuration is admissible when no face flips relative to the
/// previous configuration or shrinks below a thousandth of its initial area.
fn admissible(reference: &[Vector3<f64>], initial: &[f64], mesh: &TriMesh) -> bool {
    (0..mesh.n_faces()).all(|f| {
        let c = mesh.face_cross(f);
        c.dot(&reference[f]) > 0.0 && c.norm() > 1e-3 * initial[f]
    })
}

fn face_crosses(mesh: &TriMesh) -> Vec<Vector3<f64>> {
    (0..mesh.n_faces()).map(|f| mesh.face_cross(f)).collect()
}

fn conormal_max(mesh: &TriMesh, clamp: &ClampSet) -> f64 {
    if clamp.entries.is_empty() {
        return 0.0;
    }
    let sums = vertex_sums(mesh);
    clamp
        .entries
        .iter()
        .map(|e| {
            let co = discrete_conormal(mesh, &sums.normal_area[e.vertex], e.vertex).0.normalize();
            co.cross(&e.conormal).norm().atan2(co.dot(&e.conormal))
        })
        .fold(0.0, f64::max)
}

fn mean_edge(mesh: &TriMesh) -> f64 {
    let mut total = 0.0;
    for t in mesh.faces() {
        for c in 0..3 {
            total += (mesh.vertices()[t[c]] - mesh.vertices()[t[(c + 1) % 3]]).norm();
        }
    }
    total / (3 * mesh.n_faces()).max(1) as f64
}

fn relax(mesh: &TriMesh, clamp: &ClampSet, neighbors: &[Vec<usize>]) -> TriMesh {
    let sums = vertex_sums(mesh);
    let x = mesh.vertices();
    let moved: Vec<_> = (0..x.len())
        .map(|v| {
            if clamp.is_clamped(v) || neighbors[v].is_empty() {
                return x[v];
            }
            let c = neighbors[v].iter().map(|&w| x[w]).sum::<Vector3<f64>>() / neighbors[v].len() as f64;
            let nu = sums.normal_area[v].normalize();
            let d = (c - x[v]) * 0.5;
            x[v] + d - nu * d.dot(&nu)
        })
        .collect();
    mesh.with_vertices(moved)
}

/// Energy-guarded tangential relaxation: accepted when the objective grows
/// by at most 0.1 %.
fn try_relax(
    obj: &Objective,
    mesh: &TriMesh,
    ev: &Eval,
    clamp: &ClampSet,
    neighbors: &[Vec<usize>],
    initial: &[f64],
) -> Option<(TriMesh, Eval)> {
    let relaxed = relax(mesh, clamp, neighbors);
    if !admissible(&face_crosses(mesh), initial, &relaxed) {
        return None;
    }
    let (f, _) = obj.value(&relaxed);
    if f > ev.value + 1e-3 * ev.value.abs() {
        return None;
    }
    let e = obj.eval(&relaxed);
    Some((relaxed, e))
}

struct Lbfgs {
    s: Vec<Vec<Vector3<f64>>>,
    y: Vec<Vec<Vector3<f64>>>,
    m: usize,
}

impl Lbfgs {
    fn new(m: usize) -> Lbfgs {
        Lbfgs { s: Vec::new(), y: Vec::new(), m }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    fn push(&mut self, s: Vec<Vector3<f64>>, y: Vec<Vector3<f64>>) {
        let sy = dot(&s, &y);
        if sy <= 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            return;
        }
        if self.s.len() == self.m {
            self.s.remove(0);
            self.y.remove(0);
        }
        self.s.push(s);
        self.y.push(y);
    }

    fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `−H g` by the two-loop recursion, with the initial inverse Hessian a
    /// multiple of the vertex areas: bending stiffness at a vertex scales
    /// like the inverse of its area, so this equilibrates fine and coarse
    /// regions of a graded mesh.
    fn direction(&self, g: &[Vector3<f64>], precond: &[f64]) -> Vec<Vector3<f64>> {
        let mut q = g.to_vec();
        let k = self.s.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dot(&self.y[i], &self.s[i]);
            alpha[i] = rho * dot(&self.s[i], &q);
            for (qj, yj) in q.iter_mut().zip(&self.y[i]) {
                *qj -= yj * alpha[i];
            }
        }
        if let (Some(s), Some(y)) = (self.s.last(), self.y.last()) {
            let yay: f64 = y.iter().zip(precond).map(|(v, p)| v.norm_squared() * p).sum();
            let gamma = dot(s, y) / yay;
            for (qj, p) in q.iter_mut().zip(precond) {
                *qj *= gamma * p;
            }
        }
        for i in 0..k {
            let rho = 1.0 / dot(&self.y[i], &self.s[i]);
            let beta = rho * dot(&self.y[i], &q);
            for (qj, sj) in q.iter_mut().zip(&self.s[i]) {
                *qj += sj * (alpha[i] - beta);
            }
        }
        q.iter().map(|v| -v).collect()
    }
}

/// Minimize the Helfrich energy over the unclamped vertices.
pub fn minimize(mesh: &TriMesh, params: &EnergyParams, clamp: &ClampSet, opts: &OptOptions) -> Result<OptResult> {
    minimize_in(mesh, params, clamp, opts, None)
}

pub(crate) fn minimize_in(
    mesh: &TriMesh,
    params: &EnergyParams,
    clamp: &ClampSet,
    opts: &OptOptions,
    slab: Option<Slab>,
) -> Result<OptResult> {
    params.check()?;
    opts.check()?;
    let report = validate(mesh);
    if !report.is_valid() {
        return Err(Error::invalid(format!("invalid mesh: {}", report.summary())));
    }
    clamp.check(mesh)?;
    if clamp.entries.len() == mesh.n_vertices() {
        return Err(Error::invalid("no free vertices"));
    }
    let mut mesh = clamp.apply(mesh);
    let unit = if params.lambda > 0.0 { params.lambda } else { 1.0 };
    let weights: Vec<f64> = if clamp.entries.is_empty() || opts.penalty_schedule.is_empty() {
        vec![clamp.w_co]
    } else {
        opts.penalty_schedule.iter().map(|w| w * unit).collect()
    };
    let neighbors = mesh.vertex_neighbors();
    let initial: Vec<f64> = face_crosses(&mesh).iter().map(|c| c.norm()).collect();
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;

    for (stage, &w_co) in weights.iter().enumerate() {
        let obj = Objective { params: *params, clamp, w_co, slab, normal_only: opts.normal_descent };
        let mut lbfgs = Lbfgs::new(opts.history);
        let mut ev = obj.eval(&mesh);
        let mut record = |mesh: &TriMesh, ev: &Eval, iter: usize, step: f64, relaxed: bool| {
            trace.push(TraceRow {
                iter,
                stage,
                bending: ev.energy.bending,
                area_term: ev.energy.area_term,
                total: ev.energy.total,
                objective: ev.value,
                grad_norm: sup(&ev.grad),
                conormal_max: conormal_max(mesh, clamp),
                gauss_bonnet: gauss_bonnet(mesh).total(),
                step,
                relaxed,
            });
        };
        record(&mesh, &ev, iterations, 0.0, false);
        termination = Termination::MaxIters;
        let mut rescue_used = false;
        for it in 0..opts.max_iters {
            let scale = mesh.bbox_diagonal();
            if sup(&ev.dgrad) * scale < opts.grad_tol {
                termination = Termination::Converged;
                break;
            }
            let mut d = lbfgs.direction(&ev.dgrad, &ev.area);
            let mut slope = dot(&ev.grad, &d);
            if lbfgs.is_empty() || !(slope < 0.0) {
                lbfgs.clear();
                d = ev.dgrad.iter().zip(&ev.area).map(|(v, a)| -v * *a).collect();
                let dm = sup(&d);
                for dv in d.iter_mut() {
                    *dv *= 0.01 * scale / dm;
                }
                slope = dot(&ev.grad, &d);
            }
            let cap = 0.5 * mean_edge(&mesh);
            let dmax = sup(&d);
            let mut alpha = if dmax > cap { cap / dmax } else { 1.0 };
            let reference = face_crosses(&mesh);
            let x0 = mesh.vertices().to_vec();
            let mut accepted = None;
            while alpha * dmax >= 1e-14 * scale {
                let trial = mesh.with_vertices(x0.iter().zip(&d).map(|(x, dv)| x + dv * alpha).collect());
                if admissible(&reference, &initial, &trial) {
                    let (f, _) = obj.value(&trial);
                    if f <= ev.value + opts.sufficient_decrease * alpha * slope {
                        accepted = Some(trial);
                        break;
                    }
                }
                alpha *= opts.shrink;
            }
            let Some(next) = accepted else {
                if lbfgs.is_empty() {
                    // blocked even along preconditioned steepest descent:
                    // a relaxation may unblock it once
                    let rescued = !rescue_used && {
                        let r = try_relax(&obj, &mesh, &ev, clamp, &neighbors, &initial);
                        r.map(|(m, e)| {
                            mesh = m;
                            ev = e;
                            record(&mesh, &ev, iterations, 0.0, true);
                        })
                        .is_some()
                    };
                    if !rescued {
                        termination = Termination::LineSearchFailed;
                        break;
                    }
                    rescue_used = true;
                }
                lbfgs.clear();
                continue;
            };
            rescue_used = false;
            let nev = obj.eval(&next);
            let s: Vec<_> = next.vertices().iter().zip(&x0).map(|(a, b)| a - b).collect();
            let y: Vec<_> = nev.dgrad.iter().zip(&ev.dgrad).map(|(a, b)| a - b).collect();
            lbfgs.push(s, y);
            mesh = next;
            ev = nev;
            iterations += 1;
            record(&mesh, &ev, iterations, alpha, false);

            if opts.tangential_relax_every > 0 && (it + 1) % opts.tangential_relax_every == 0 {
                if let Some((m, e)) = try_relax(&obj, &mesh, &ev, clamp, &neighbors, &initial) {
                    mesh = m;
                    ev = e;
                    lbfgs.clear();
                    record(&mesh, &ev, iterations, 0.0, true);
                }
            }
        }
    }

    let energy = evaluate(&vertex_sums(&mesh), &mesh.topology().boundary_stencil, params, EnergyTerms::ALL).0;
    let conormal = if clamp.entries.is_empty() { None } else { Some(conormal_residual(&mesh, clamp)?) };
    let el = el_residual(&mesh, params)?.interior_l2;
    Ok(OptResult {
        mesh,
        trace,
        energy,
        conormal,
        termination,
        el_residual: el,
        iterations,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{bind, sample_curve, CurveSpec, NormalRule};
    use crate::mesh::{generate_primitive, PrimitiveSpec};
    use std::f64::consts::PI;

    fn monotone_within_stages(trace: &[TraceRow]) -> bool {
        trace.windows(2).all(|w| w[1].stage != w[0].stage || w[1].relaxed || w[1].objective <= w[0].objective)
    }

    #[test]
    fn flat_disk_is_stationary() {
        let m = generate_primitive(&PrimitiveSpec::Disk { radius: 1.0, level: 3 }).unwrap();
        let bd = sample_curve(&CurveSpec::Circle { radius: 1.0, center: [0.0; 3], axis: None }, 256, NormalRule::InPlane)
            .unwrap();
        let clamp = bind(&m, &bd).unwrap();
        let params = EnergyParams::new(0.0, 0.1).unwrap();
        let r = minimize(&m, &params, &clamp, &OptOptions { max_iters: 50, ..Default::default() }).unwrap();
        assert!((r.energy.total - 0.1 * PI).abs() < 0.03 * 0.1 * PI, "{}", r.energy.total);
        assert!(r.mesh.vertices().iter().all(|p| p.z.abs() < 1e-3));
        assert!(monotone_within_stages(&r.trace));
        for e in &clamp.entries {
            assert_eq!(r.mesh.vertices()[e.vertex], e.target);
        }
    }

    #[test]
    fn perturbed_sphere_relaxes_to_the_critical_radius() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 3 }).unwrap().perturbed_radially(0.1, 3);
        let params = EnergyParams::new(1.0, 1.0).unwrap();
        let clamp = ClampSet::empty(&m).unwrap();
        let r = minimize(&m, &params, &clamp, &OptOptions::default()).unwrap();
        let mean_r = r.mesh.vertices().iter().map(|p| p.norm()).sum::<f64>() / r.mesh.n_vertices() as f64;
        assert!((mean_r - 1.0).abs() < 0.03, "{mean_r}");
        assert!((r.energy.total - 8.0 * PI).abs() < 0.03 * 8.0 * PI, "{}", r.energy.total);
        assert!(monotone_within_stages(&r.trace));
    }

    #[test]
    fn rejects_bad_options_and_fully_clamped_meshes() {
        let m = generate_primitive(&PrimitiveSpec::Disk { radius: 1.0, level: 0 }).unwrap();
        let params = EnergyParams::new(0.0, 0.1).unwrap();
        let clamp = ClampSet::pinned(&m);
        let bad = OptOptions { max_iters: 0, ..Default::default() };
        assert!(minimize(&m, &params, &clamp, &bad).is_err());
        let open = ClampSet::empty(&m);
        assert!(open.is_err());
    }

    #[test]
    fn relaxation_rows_are_marked() {
        let m = generate_primitive(&PrimitiveSpec::Icosphere { radius: 1.0, level: 1 }).unwrap().perturbed_radially(0.1, 1);
        let params = EnergyParams::new(1.0, 1.0).unwrap();
        let clamp = ClampSet::empty(&m).unwrap();
        let opts = OptOptions { max_iters: 30, tangential_relax_every: 5, ..Default::default() };
        let r = minimize(&m, &params, &clamp, &opts).unwrap();
        assert!(monotone_within_stages(&r.trace));
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,bending,area_term,total,grad_norm,conormal_max"));
        assert_eq!(text.lines().count(), r.trace.len() + 1);
    }
}
