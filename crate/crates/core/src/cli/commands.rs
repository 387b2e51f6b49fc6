use std::path::PathBuf;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Artifacts;
use crate::analysis::{
    agmon_scaling, bending_comparison, biharmonic_extension, rim_curvature_integral, RimTrace, TraceField, METHOD,
};
use crate::axisym::{axisym_energy, axisym_minimize, AxisymProblem};
use crate::boundary::{bind, BoundarySpec, ClampSet};
use crate::diffgeo::{curvature, gauss_bonnet};
use crate::energy::{coercivity_rhs, el_residual, helfrich_energy, lower_bound_constant, EnergyParams};
use crate::error::{Error, Result};
use crate::mesh::{generate_primitive, load, validate, write_obj, write_off, Point, PrimitiveSpec, TriMesh};
use crate::optimizer::{graph_lsc_experiment, minimize as run_minimize, slab_experiment, GraphBase, OptOptions, SlabSpec};
use crate::varifold::{
    bad_points, density_ratio, diameter_check, from_mesh, varifold_distance, ProbeDictionary, ReferenceOrientation,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    Primitive(PrimitiveSpec),
    /// OBJ, OFF or JSON file.
    Path(PathBuf),
}

impl MeshSource {
    pub fn load(&self) -> Result<TriMesh> {
        match self {
            MeshSource::Primitive(spec) => generate_primitive(spec),
            MeshSource::Path(p) => load(p),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Obj,
    Off,
}

fn write_mesh(art: &mut Artifacts, stem: &str, mesh: &TriMesh, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Obj => art.write(&format!("{stem}.obj"), write_obj(mesh).as_bytes()),
        OutputFormat::Off => art.write(&format!("{stem}.off"), write_off(mesh).as_bytes()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveConfig {
    pub mesh: PrimitiveSpec,
    #[serde(default)]
    pub format: OutputFormat,
}

pub(super) fn primitive(cfg: &PrimitiveConfig, art: &mut Artifacts) -> Result<()> {
    let mesh = generate_primitive(&cfg.mesh)?;
    write_mesh(art, "mesh", &mesh, cfg.format)?;
    art.write_json("validation.json", &validate(&mesh))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub mesh: MeshSource,
    pub params: EnergyParams,
}

#[derive(Serialize)]
struct EnergyReport {
    bending: f64,
    area_term: f64,
    total: f64,
    params: EnergyParams,
    area: f64,
    n_vertices: usize,
    n_faces: usize,
    coercivity_constant: Option<f64>,
    coercivity_rhs: f64,
    el_residual_l2: f64,
}

pub(super) fn energy(cfg: &EnergyConfig, art: &mut Artifacts) -> Result<()> {
    cfg.params.check()?;
    let mesh = cfg.mesh.load()?;
    let e = helfrich_energy(&mesh, &cfg.params)?;
    let report = EnergyReport {
        bending: e.bending,
        area_term: e.area_term,
        total: e.total,
        params: cfg.params,
        area: mesh.area(),
        n_vertices: mesh.n_vertices(),
        n_faces: mesh.n_faces(),
        coercivity_constant: lower_bound_constant(&cfg.params).ok().map(|l| l.c),
        coercivity_rhs: coercivity_rhs(&mesh)?,
        el_residual_l2: el_residual(&mesh, &cfg.params)?.interior_l2,
    };
    art.write_json("energy.json", &report)?;
    let field = curvature(&mesh)?;
    art.write_with("curvature.csv", |b| field.write_csv(&mesh, b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    pub mesh: MeshSource,
    pub params: EnergyParams,
    /// Required whenever the mesh has a boundary.
    #[serde(default)]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub options: OptOptions,
    /// Relative amplitude of a seeded radial perturbation of the start mesh.
    #[serde(default)]
    pub perturb: Option<f64>,
    #[serde(default)]
    pub format: OutputFormat,
}

pub(super) fn minimize(cfg: &MinimizeConfig, seed: u64, art: &mut Artifacts) -> Result<()> {
    cfg.params.check()?;
    let mut mesh = cfg.mesh.load()?;
    if let Some(a) = cfg.perturb {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::invalid("perturbation amplitude must be finite and non-negative"));
        }
        mesh = mesh.perturbed_radially(a, seed);
    }
    let clamp = match &cfg.boundary {
        Some(spec) => bind(&mesh, &spec.sample()?)?,
        None => ClampSet::empty(&mesh)?,
    };
    let opts = OptOptions { seed, ..cfg.options.clone() };
    let result = run_minimize(&mesh, &cfg.params, &clamp, &opts)?;
    art.write_with("trace.csv", |b| result.write_trace_csv(b))?;
    write_mesh(art, "final", &result.mesh, cfg.format)?;
    let mut text = result.to_json();
    text.push('\n');
    art.write("result.json", text.as_bytes())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Reference {
    #[default]
    FirstSheet,
    Along([f64; 3]),
}

impl Reference {
    fn rule(self) -> Result<ReferenceOrientation> {
        match self {
            Reference::FirstSheet => Ok(ReferenceOrientation::FirstSheet),
            Reference::Along(d) => {
                let v = Vector3::from(d);
                if !(v.norm() > 0.0 && v.iter().all(|c| c.is_finite())) {
                    return Err(Error::invalid("reference direction must be a finite non-zero vector"));
                }
                Ok(ReferenceOrientation::Along(v.normalize()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallProbe {
    pub center: [f64; 3],
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarifoldConfig {
    pub mesh: MeshSource,
    #[serde(default)]
    pub reference: Reference,
    /// Second surface whose probe distance to the first is reported.
    #[serde(default)]
    pub compare: Option<MeshSource>,
    #[serde(default)]
    pub density: Vec<BallProbe>,
}

#[derive(Serialize)]
struct DensityRow {
    center: [f64; 3],
    sigma: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct VarifoldReport {
    atoms: usize,
    mass: f64,
    multiplicity_max: u32,
    distance: Option<f64>,
    density: Vec<DensityRow>,
}

pub(super) fn varifold(cfg: &VarifoldConfig, art: &mut Artifacts) -> Result<()> {
    let rule = cfg.reference.rule()?;
    let mesh = cfg.mesh.load()?;
    let var = from_mesh(&mesh, rule);
    let distance = match &cfg.compare {
        Some(src) => {
            let other = from_mesh(&src.load()?, rule);
            let dict = ProbeDictionary::standard_for(&[&var, &other]);
            Some(varifold_distance(&var, &other, &dict)?)
        }
        None => None,
    };
    let density = cfg
        .density
        .iter()
        .map(|b| {
            Ok(DensityRow { center: b.center, sigma: b.sigma, ratio: density_ratio(&mesh, &Point::from(b.center), b.sigma)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = VarifoldReport {
        atoms: var.atoms.len(),
        mass: var.mass(),
        multiplicity_max: var.atoms.iter().map(|a| a.theta_plus + a.theta_minus).max().unwrap_or(0),
        distance,
        density,
    };
    art.write_json("varifold.json", &report)?;
    art.write_with("atoms.csv", |b| var.write_csv(b))
}

fn default_epsilon0() -> f64 {
    1.0
}

fn default_rho() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub mesh: MeshSource,
    /// Concentration threshold is `epsilon0²`.
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

#[derive(Serialize)]
struct DiagnoseReport {
    valid: bool,
    validation: String,
    euler_characteristic: i64,
    boundary_loops: usize,
    gauss_bonnet_total: f64,
    gauss_bonnet_target: f64,
    gauss_bonnet_closure_error: f64,
    epsilon0: f64,
    rho: f64,
    max_concentration: f64,
    bad_points: Vec<usize>,
    clusters: usize,
    clamped_a2_vertices: usize,
    diameter_lower: Option<f64>,
    diameter: Option<f64>,
}

pub(super) fn diagnose(cfg: &DiagnoseConfig, art: &mut Artifacts) -> Result<()> {
    let mesh = cfg.mesh.load()?;
    let v = validate(&mesh);
    let gb = gauss_bonnet(&mesh);
    let conc = bad_points(&mesh, cfg.epsilon0, cfg.rho)?;
    let field = curvature(&mesh)?;
    let diam = if mesh.is_closed() { diameter_check(&mesh).ok() } else { None };
    let report = DiagnoseReport {
        valid: v.is_valid(),
        validation: v.summary(),
        euler_characteristic: mesh.euler_characteristic(),
        boundary_loops: mesh.boundary_loops().len(),
        gauss_bonnet_total: gb.total(),
        gauss_bonnet_target: std::f64::consts::TAU * gb.euler_char as f64,
        gauss_bonnet_closure_error: gb.closure_error(),
        epsilon0: cfg.epsilon0,
        rho: cfg.rho,
        max_concentration: conc.concentration.iter().copied().fold(0.0, f64::max),
        bad_points: conc.bad_points.clone(),
        clusters: conc.clusters.len(),
        clamped_a2_vertices: field.clamped_vertices().len(),
        diameter_lower: diam.map(|d| d.lower),
        diameter: diam.map(|d| d.diam),
    };
    art.write_json("diagnose.json", &report)?;
    art.write_with("curvature.csv", |b| field.write_csv(&mesh, b))
}

fn default_thicknesses() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabConfig {
    pub params: EnergyParams,
    #[serde(default = "default_thicknesses")]
    pub thicknesses: Vec<f64>,
    /// Defaults to 6000 iterations per run.
    #[serde(default = "default_slab_options")]
    pub options: OptOptions,
}

fn default_slab_options() -> OptOptions {
    OptOptions { max_iters: 6000, ..Default::default() }
}

pub(super) fn slab(cfg: &SlabConfig, seed: u64, art: &mut Artifacts) -> Result<()> {
    cfg.params.check()?;
    let specs: Vec<SlabSpec> = cfg.thicknesses.iter().map(|&h| SlabSpec { h, params: cfg.params }).collect();
    let opts = OptOptions { seed, ..cfg.options.clone() };
    let report = slab_experiment(&specs, &opts)?;
    art.write_json("slab.json", &report)?;
    art.write_with("slab.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["h", "cells", "total", "distance", "iterations"])?;
        for r in &report.rows {
            w.write_record([
                r.h.to_string(),
                r.cells.to_string(),
                r.energy.total.to_string(),
                r.distance.to_string(),
                r.iterations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    if let Some(last) = report.rows.last() {
        write_mesh(art, "thinnest", &last.mesh, OutputFormat::Obj)?;
    }
    Ok(())
}

fn default_ms() -> Vec<u32> {
    vec![8, 16, 32]
}

fn default_graph_n() -> usize {
    128
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LscConfig {
    pub params: EnergyParams,
    pub bases: Vec<GraphBase>,
    #[serde(default = "default_ms")]
    pub ms: Vec<u32>,
    /// Grid vertices per side.
    #[serde(default = "default_graph_n")]
    pub n: usize,
}

pub(super) fn lsc_graph(cfg: &LscConfig, art: &mut Artifacts) -> Result<()> {
    cfg.params.check()?;
    if cfg.bases.is_empty() {
        return Err(Error::invalid("at least one base graph is required"));
    }
    let reports = cfg
        .bases
        .iter()
        .map(|b| graph_lsc_experiment(b, &cfg.params, &cfg.ms, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    art.write_json("lsc.json", &reports)?;
    art.write_with("lsc.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["base", "m", "energy", "limit"])?;
        for (i, r) in reports.iter().enumerate() {
            for (m, e) in r.ms.iter().zip(&r.energies) {
                w.write_record([i.to_string(), m.to_string(), e.to_string(), r.limit.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    })
}

fn default_patch_n() -> usize {
    32
}

fn default_samples() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiharmonicConfig {
    pub field: TraceField,
    pub rho: f64,
    /// Rings of the disk grid.
    #[serde(default = "default_patch_n")]
    pub n: usize,
    /// Rim samples of the trace.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Radii of a scaling study, each half the previous.
    #[serde(default)]
    pub scaling: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct BiharmonicReport {
    method: &'static str,
    rho: f64,
    n: usize,
    rim_error: f64,
    residual: f64,
    sup_gradient: f64,
    rim_curvature_integral: f64,
    comparison: crate::analysis::BendingComparison,
    scaling: Option<crate::analysis::AgmonReport>,
}

pub(super) fn biharmonic(cfg: &BiharmonicConfig, art: &mut Artifacts) -> Result<()> {
    let trace = RimTrace::sample(&cfg.field, cfg.rho, cfg.samples)?;
    let patch = biharmonic_extension(&trace, cfg.rho, cfg.n)?;
    let rim = rim_curvature_integral(&cfg.field, cfg.rho, cfg.samples)?;
    let report = BiharmonicReport {
        method: METHOD,
        rho: cfg.rho,
        n: cfg.n,
        rim_error: patch.rim_error,
        residual: patch.residual,
        sup_gradient: patch.sup_gradient(),
        rim_curvature_integral: rim,
        comparison: bending_comparison(&patch, rim)?,
        scaling: match &cfg.scaling {
            Some(rhos) => Some(agmon_scaling(&cfg.field, rhos, cfg.n, cfg.samples)?),
            None => None,
        },
    };
    art.write_json("biharmonic.json", &report)?;
    art.write_with("patch.csv", |b| patch.write_csv(b))
}

fn default_axisym_n() -> usize {
    128
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisymConfig {
    pub problem: AxisymProblem,
    pub params: EnergyParams,
    /// Profile segments.
    #[serde(default = "default_axisym_n")]
    pub n: usize,
    /// Also export the surface of revolution with this many segments.
    #[serde(default)]
    pub revolve: Option<usize>,
}

#[derive(Serialize)]
struct AxisymReport<'a> {
    #[serde(flatten)]
    result: &'a crate::axisym::AxisymResult,
    /// Simpson quadrature of the same profile.
    quadrature_energy: f64,
}

pub(super) fn axisym(cfg: &AxisymConfig, art: &mut Artifacts) -> Result<()> {
    cfg.params.check()?;
    let result = axisym_minimize(&cfg.problem, &cfg.params, cfg.n)?;
    let quadrature_energy = axisym_energy(&result.profile, &cfg.params)?;
    art.write_json("axisym.json", &AxisymReport { result: &result, quadrature_energy })?;
    art.write_with("profile.csv", |b| result.profile.write_csv(b))?;
    if let Some(segments) = cfg.revolve {
        write_mesh(art, "surface", &result.profile.revolve(segments)?, OutputFormat::Obj)?;
    }
    Ok(())
}
