//! Dirichlet boundary data: closed curves with a prescribed unit normal
//! field, binding of mesh boundary loops to them, and the inner-conormal
//! residual and penalty.

pub(crate) mod clamp;

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point;

pub use clamp::{bind, conormal_residual, penalty, ClampEntry, ClampSet, ConormalResidual, Penalty};

/// Rule producing the prescribed normal `n ⊥ t` along a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NormalRule {
    /// In the curve plane, pointing to the enclosed region.
    InPlane,
    /// `cos α · inward + sin α · up`.
    ConstantAngle { alpha_deg: f64 },
    /// Along the curve's `up` direction.
    Vertical,
}

/// Analytic closed curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    /// Circle in the plane through `center` orthogonal to `axis` (default
    /// `e₃`), traversed counterclockwise about `axis`.
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default)]
        axis: Option<[f64; 3]>,
    },
    /// Axis-aligned ellipse in a plane `z = center.z`.
    Ellipse {
        semi_x: f64,
        semi_y: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    /// Two coaxial horizontal circles at `center.z ∓ separation/2`; `up`
    /// points from each circle toward the other.
    CirclePair {
        radius: f64,
        #[serde(default)]
        radius_top: Option<f64>,
        separation: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    /// Closed planar polygon through the given points.
    Polyline { points: Vec<[f64; 3]> },
}

/// Boundary description used by configurations: curve, rule and sample
/// count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Map<String, serde_json::Value>")]
pub struct BoundarySpec {
    #[serde(flatten)]
    pub curve: CurveSpec,
    pub normal_rule: NormalRule,
    pub count: usize,
}

impl TryFrom<serde_json::Map<String, serde_json::Value>> for BoundarySpec {
    type Error = String;

    fn try_from(mut map: serde_json::Map<String, serde_json::Value>) -> std::result::Result<Self, String> {
        let rule = map.remove("normal_rule").ok_or("missing field `normal_rule`")?;
        let normal_rule: NormalRule = serde_json::from_value(rule).map_err(|e| e.to_string())?;
        let count = match map.remove("count") {
            Some(c) => serde_json::from_value(c).map_err(|e| e.to_string())?,
            None => 128,
        };
        let curve: CurveSpec = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| e.to_string())?;
        Ok(BoundarySpec { curve, normal_rule, count })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub position: Point,
    pub tangent: Vector3<f64>,
    pub normal: Vector3<f64>,
}

#[derive(Clone, Debug)]
enum Shape {
    Circle { center: Point, radius: f64, e1: Vector3<f64>, e2: Vector3<f64> },
    Ellipse { center: Point, a: f64, b: f64, table: Vec<f64> },
    Polyline { points: Vec<Point>, cumulative: Vec<f64> },
}

/// One closed curve with its normal rule, evaluable at any normalized
/// arc-length parameter.
#[derive(Clone, Debug)]
pub struct Curve {
    shape: Shape,
    up: Vector3<f64>,
    centroid: Point,
    rule: NormalRule,
    length: f64,
}

const ELLIPSE_TABLE: usize = 8192;

impl Curve {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn up(&self) -> Vector3<f64> {
        self.up
    }

    pub fn centroid(&self) -> Point {
        self.centroid
    }

    /// Position and unit tangent at normalized arc length `u` (taken mod 1).
    pub fn point(&self, u: f64) -> (Point, Vector3<f64>) {
        let u = u.rem_euclid(1.0);
        match &self.shape {
            Shape::Circle { center, radius, e1, e2 } => {
                let t = 2.0 * PI * u;
                let (s, c) = t.sin_cos();
                (center + (e1 * c + e2 * s) * *radius, e2 * c - e1 * s)
            }
            Shape::Ellipse { center, a, b, table } => {
                let target = u * table[ELLIPSE_TABLE];
                let k = table.partition_point(|&s| s <= target).clamp(1, ELLIPSE_TABLE) - 1;
                let frac = (target - table[k]) / (table[k + 1] - table[k]);
                let t = 2.0 * PI * (k as f64 + frac) / ELLIPSE_TABLE as f64;
                let (s, c) = t.sin_cos();
                let p = center + Vector3::new(a * c, b * s, 0.0);
                (p, Vector3::new(-a * s, b * c, 0.0).normalize())
            }
            Shape::Polyline { points, cumulative } => {
                let n = points.len();
                let target = u * cumulative[n];
                let k = cumulative.partition_point(|&s| s <= target).clamp(1, n) - 1;
                let a = points[k];
                let b = points[(k + 1) % n];
                let frac = (target - cumulative[k]) / (cumulative[k + 1] - cumulative[k]);
                (a + (b - a) * frac, (b - a).normalize())
            }
        }
    }

    /// Prescribed unit normal at a point with tangent `t`.
    pub fn normal_at(&self, p: &Point, t: &Vector3<f64>) -> Vector3<f64> {
        let mut inward = self.up.cross(t).normalize();
        if inward.dot(&(self.centroid - p)) < 0.0 {
            inward = -inward;
        }
        match self.rule {
            NormalRule::InPlane => inward,
            NormalRule::Vertical => self.up,
            NormalRule::ConstantAngle { alpha_deg } => {
                let a = alpha_deg.to_radians();
                inward * a.cos() + self.up * a.sin()
            }
        }
    }

    pub fn sample(&self, u: f64) -> CurveSample {
        let (position, tangent) = self.point(u);
        CurveSample { position, tangent, normal: self.normal_at(&position, &tangent) }
    }
}

#[derive(Clone, Debug)]
pub struct SampledCurve {
    pub curve: Curve,
    /// Uniform in arc length, starting at parameter 0.
    pub samples: Vec<CurveSample>,
}

#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub curves: Vec<SampledCurve>,
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive and finite")));
    }
    Ok(())
}

fn circle(center: Point, radius: f64, axis: Vector3<f64>, rule: NormalRule, up: Vector3<f64>) -> Curve {
    let axis = axis.normalize();
    let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - axis * helper.dot(&axis)).normalize();
    let e2 = axis.cross(&e1);
    Curve { shape: Shape::Circle { center, radius, e1, e2 }, up, centroid: center, rule, length: 2.0 * PI * radius }
}

fn segments_cross(a: &Point, b: &Point, c: &Point, d: &Point, tol: f64) -> bool {
    // closest distance between two segments
    let u = b - a;
    let v = d - c;
    let w = a - c;
    let (aa, bb, cc, dd, ee) = (u.dot(&u), u.dot(&v), v.dot(&v), u.dot(&w), v.dot(&w));
    let den = aa * cc - bb * bb;
    let mut s = if den > 1e-300 { ((bb * ee - cc * dd) / den).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = if cc > 0.0 { ((bb * s + ee) / cc).clamp(0.0, 1.0) } else { 0.0 };
    if aa > 0.0 {
        s = ((bb * t - dd) / aa).clamp(0.0, 1.0);
    }
    if cc > 0.0 {
        t = ((bb * s + ee) / cc).clamp(0.0, 1.0);
    }
    (a + u * s - (c + v * t)).norm() <= tol
}

fn build_curves(spec: &CurveSpec, rule: NormalRule) -> Result<Vec<Curve>> {
    if let NormalRule::ConstantAngle { alpha_deg } = rule {
        if !alpha_deg.is_finite() {
            return Err(Error::invalid("alpha_deg must be finite"));
        }
    }
    match spec {
        CurveSpec::Circle { radius, center, axis } => {
            positive("radius", *radius)?;
            let axis = axis.map(v3).unwrap_or(Vector3::z());
            if axis.norm() == 0.0 {
                return Err(Error::invalid("circle axis must be nonzero"));
            }
            Ok(vec![circle(v3(*center), *radius, axis, rule, axis.normalize())])
        }
        CurveSpec::Ellipse { semi_x, semi_y, center } => {
            positive("semi_x", *semi_x)?;
            positive("semi_y", *semi_y)?;
            let (a, b) = (*semi_x, *semi_y);
            let mut table = Vec::with_capacity(ELLIPSE_TABLE + 1);
            table.push(0.0);
            let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
            let h = 2.0 * PI / ELLIPSE_TABLE as f64;
            for k in 0..ELLIPSE_TABLE {
                let t0 = k as f64 * h;
                // Simpson on each table interval
                let seg = h / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * h) + speed(t0 + h));
                table.push(table[k] + seg);
            }
            let length = table[ELLIPSE_TABLE];
            let c = v3(*center);
            Ok(vec![Curve { shape: Shape::Ellipse { center: c, a, b, table }, up: Vector3::z(), centroid: c, rule, length }])
        }
        CurveSpec::CirclePair { radius, radius_top, separation, center } => {
            positive("radius", *radius)?;
            positive("separation", *separation)?;
            let top = radius_top.unwrap_or(*radius);
            positive("radius_top", top)?;
            let c = v3(*center);
            let dz = Vector3::new(0.0, 0.0, 0.5 * separation);
            Ok(vec![
                circle(c - dz, *radius, Vector3::z(), rule, Vector3::z()),
                circle(c + dz, top, Vector3::z(), rule, -Vector3::z()),
            ])
        }
        CurveSpec::Polyline { points } => {
            if points.len() < 3 {
                return Err(Error::invalid("polyline needs at least three points"));
            }
            let pts: Vec<Point> = points.iter().map(|p| v3(*p)).collect();
            let n = pts.len();
            let mut cumulative = vec![0.0];
            for k in 0..n {
                let l = (pts[(k + 1) % n] - pts[k]).norm();
                if l == 0.0 {
                    return Err(Error::invalid("polyline has repeated consecutive points"));
                }
                cumulative.push(cumulative[k] + l);
            }
            let length = cumulative[n];
            let tol = 1e-9 * length;
            for i in 0..n {
                for j in i + 2..n {
                    if i == 0 && j == n - 1 {
                        continue;
                    }
                    if segments_cross(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n], tol) {
                        return Err(Error::invalid("polyline is not simple"));
                    }
                }
            }
            let centroid = pts.iter().sum::<Point>() / n as f64;
            // Newell normal
            let mut up = Vector3::zeros();
            for k in 0..n {
                up += (pts[k] - centroid).cross(&(pts[(k + 1) % n] - centroid));
            }
            if up.norm() <= 1e-12 * length * length {
                return Err(Error::invalid("polyline encloses no area"));
            }
            let up = up.normalize();
            Ok(vec![Curve { shape: Shape::Polyline { points: pts, cumulative }, up, centroid, rule, length }])
        }
    }
}

/// Sample every curve of a spec uniformly in arc length.
pub fn sample_curve(spec: &CurveSpec, count: usize, rule: NormalRule) -> Result<BoundaryData> {
    if count < 8 {
        return Err(Error::invalid("sample count must be at least 8"));
    }
    let curves = build_curves(spec, rule)?
        .into_iter()
        .map(|curve| {
            let samples = (0..count).map(|k| curve.sample(k as f64 / count as f64)).collect();
            SampledCurve { curve, samples }
        })
        .collect();
    Ok(BoundaryData { curves })
}

impl BoundarySpec {
    pub fn sample(&self) -> Result<BoundaryData> {
        sample_curve(&self.curve, self.count, self.normal_rule)
    }
}

impl BoundaryData {
    /// Apply a rigid motion to curves and samples alike.
    pub fn transformed(&self, rot: &nalgebra::Rotation3<f64>, shift: &Vector3<f64>) -> BoundaryData {
        let curves = self
            .curves
            .iter()
            .map(|sc| {
                let mut curve = sc.curve.clone();
                curve.up = rot * curve.up;
                curve.centroid = rot * curve.centroid + shift;
                curve.shape = match &curve.shape {
                    Shape::Circle { center, radius, e1, e2 } => {
                        Shape::Circle { center: rot * center + shift, radius: *radius, e1: rot * e1, e2: rot * e2 }
                    }
                    Shape::Polyline { points, cumulative } => Shape::Polyline {
                        points: points.iter().map(|p| rot * p + shift).collect(),
                        cumulative: cumulative.clone(),
                    },
                    Shape::Ellipse { .. } => {
                        let pts: Vec<Point> = (0..512).map(|k| rot * sc.curve.point(k as f64 / 512.0).0 + shift).collect();
                        let mut cumulative = vec![0.0];
                        for k in 0..pts.len() {
                            cumulative.push(cumulative[k] + (pts[(k + 1) % pts.len()] - pts[k]).norm());
                        }
                        Shape::Polyline { points: pts, cumulative }
                    }
                };
                let samples = sc
                    .samples
                    .iter()
                    .map(|s| CurveSample {
                        position: rot * s.position + shift,
                        tangent: rot * s.tangent,
                        normal: rot * s.normal,
                    })
                    .collect();
                SampledCurve { curve, samples }
            })
            .collect();
        BoundaryData { curves }
    }
}
