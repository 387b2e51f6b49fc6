//! Surfaces of revolution: closed-form Helfrich energies of meridian
//! profiles and a constrained Newton minimizer for circle boundary data.
//!
//! A profile is parametrized by arc length with tangent
//! `(r', z') = (cos ψ, sin ψ)` and normal `(z', −r')`. With that normal the
//! principal curvatures are `ψ'` along the meridian and `sin ψ / r` along
//! the parallels, and the unit sphere traversed from its south pole has
//! `H̄ = 2`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    /// Tangent angle ψ.
    pub psi: Vec<f64>,
    /// Meridian curvature `dψ/ds`.
    pub dpsi: Vec<f64>,
}

impl Profile {
    /// Sample `f(s) = (r, z, ψ, ψ')` at `n + 1` equally spaced arc lengths
    /// in `[s0, s1]`.
    pub fn from_fn(s0: f64, s1: f64, n: usize, f: impl Fn(f64) -> (f64, f64, f64, f64)) -> Profile {
        let mut p = Profile { s: vec![], r: vec![], z: vec![], psi: vec![], dpsi: vec![] };
        for i in 0..=n {
            let s = s0 + (s1 - s0) * i as f64 / n as f64;
            let (r, z, psi, dpsi) = f(s);
            p.s.push(s);
            p.r.push(r);
            p.z.push(z);
            p.psi.push(psi);
            p.dpsi.push(dpsi);
        }
        p
    }

    /// Open cylinder of radius `radius` from `z = 0` to `z = height`.
    pub fn cylinder(radius: f64, height: f64, n: usize) -> Profile {
        Profile::from_fn(0.0, height, n, |s| (radius, s, PI / 2.0, 0.0))
    }

    /// Sphere of radius `radius` centred at the origin, pole to pole.
    pub fn sphere(radius: f64, n: usize) -> Profile {
        Profile::from_fn(0.0, PI * radius, n, |s| {
            let t = s / radius;
            let r = radius * t.sin();
            (if r < 1e-14 * radius { 0.0 } else { r }, -radius * t.cos(), t, 1.0 / radius)
        })
    }

    /// Catenoid `r = a cosh(z/a)` between heights `z0 < z1`.
    pub fn catenoid(a: f64, z0: f64, z1: f64, n: usize) -> Profile {
        Profile::from_fn(a * (z0 / a).sinh(), a * (z1 / a).sinh(), n, |s| {
            let q = a * a + s * s;
            (q.sqrt(), a * (s / a).asinh(), a.atan2(s), -a / q)
        })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.s.last().unwrap_or(&0.0) - self.s.first().unwrap_or(&0.0)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.s.len();
        if n < 3 {
            return Err(Error::invalid("profile needs at least 3 samples"));
        }
        if [self.r.len(), self.z.len(), self.psi.len(), self.dpsi.len()].iter().any(|&m| m != n) {
            return Err(Error::invalid("profile columns differ in length"));
        }
        let all = self.s.iter().chain(&self.r).chain(&self.z).chain(&self.psi).chain(&self.dpsi);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("profile is not finite"));
        }
        let ds = (self.s[n - 1] - self.s[0]) / (n - 1) as f64;
        if !(ds > 0.0) || self.s.windows(2).any(|w| ((w[1] - w[0]) - ds).abs() > 1e-9 * ds) {
            return Err(Error::invalid("profile samples must be equally spaced in arc length"));
        }
        if self.r.iter().any(|&r| r < 0.0) {
            return Err(Error::invalid("profile has negative radius"));
        }
        if self.r[1..n - 1].iter().any(|&r| r == 0.0) {
            return Err(Error::invalid("profile crosses the axis"));
        }
        for i in [0, n - 1] {
            if self.r[i] == 0.0 && self.psi[i].sin().abs() > 1e-9 {
                return Err(Error::invalid("profile meets the axis at an angle"));
            }
        }
        for i in 0..n - 1 {
            let chord = (self.r[i + 1] - self.r[i]).hypot(self.z[i + 1] - self.z[i]);
            if chord > ds * (1.0 + 1e-8) {
                return Err(Error::invalid("profile is not parametrized by arc length"));
            }
        }
        Ok(())
    }

    /// `(H̄ − H0)² + λ` times `r` at each sample.
    fn integrand(&self, params: &EnergyParams) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let r = self.r[i];
                let parallel = if r > 0.0 { self.psi[i].sin() / r } else { self.dpsi[i] };
                let e = self.dpsi[i] + parallel - params.h0;
                (e * e + params.lambda) * r
            })
            .collect()
    }

    /// The same curve traversed backwards; its normal and `H̄` change sign.
    pub fn reversed(&self) -> Profile {
        let end = *self.s.last().unwrap_or(&0.0);
        let start = *self.s.first().unwrap_or(&0.0);
        Profile {
            s: self.s.iter().rev().map(|s| start + end - s).collect(),
            r: self.r.iter().rev().copied().collect(),
            z: self.z.iter().rev().copied().collect(),
            psi: self.psi.iter().rev().map(|p| p + PI).collect(),
            dpsi: self.dpsi.iter().rev().map(|d| -d).collect(),
        }
    }

    /// Uniform scaling by `k > 0`.
    pub fn scaled(&self, k: f64) -> Profile {
        Profile {
            s: self.s.iter().map(|s| k * s).collect(),
            r: self.r.iter().map(|r| k * r).collect(),
            z: self.z.iter().map(|z| k * z).collect(),
            psi: self.psi.clone(),
            dpsi: self.dpsi.iter().map(|d| d / k).collect(),
        }
    }

    /// Columns `s, r, z`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "r", "z"])?;
        for i in 0..self.len() {
            w.serialize((self.s[i], self.r[i], self.z[i]))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Surface of revolution with `segments` azimuthal steps; axis samples
    /// become single pole vertices. Faces are oriented along `(z', −r')`.
    pub fn revolve(&self, segments: usize) -> Result<TriMesh> {
        self.check()?;
        if segments < 3 {
            return Err(Error::invalid("revolution needs at least 3 segments"));
        }
        let mut vertices = Vec::new();
        let mut rings = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let start = vertices.len();
            if self.r[i] == 0.0 {
                vertices.push(Point::new(0.0, 0.0, self.z[i]));
                rings.push(vec![start; segments]);
            } else {
                for k in 0..segments {
                    let t = TAU * k as f64 / segments as f64;
                    vertices.push(Point::new(self.r[i] * t.cos(), self.r[i] * t.sin(), self.z[i]));
                }
                rings.push((start..start + segments).collect());
            }
        }
        let mut faces = Vec::new();
        for i in 0..self.len() - 1 {
            for k in 0..segments {
                let k1 = (k + 1) % segments;
                let (a, b, c, d) = (rings[i][k], rings[i][k1], rings[i + 1][k1], rings[i + 1][k]);
                if a != b {
                    faces.push([a, b, c]);
                }
                if c != d {
                    faces.push([a, c, d]);
                }
            }
        }
        TriMesh::new(vertices, faces)
    }
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    let even = |f: &[f64]| -> f64 {
        let m = f.len() - 1;
        let inner: f64 = (1..m).map(|i| if i % 2 == 1 { 4.0 * f[i] } else { 2.0 * f[i] }).sum();
        h / 3.0 * (f[0] + f[m] + inner)
    };
    match n {
        1 => 0.5 * h * (f[0] + f[1]),
        _ if n % 2 == 0 => even(f),
        _ => {
            let k = n - 3;
            let tail = 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
            if k == 0 {
                tail
            } else {
                even(&f[..=k]) + tail
            }
        }
    }
}

/// `2π ∫ [(H̄ − H0)² + λ] r ds` by composite Simpson quadrature.
pub fn axisym_energy(profile: &Profile, params: &EnergyParams) -> Result<f64> {
    params.check()?;
    profile.check()?;
    let h = profile.length() / (profile.len() - 1) as f64;
    Ok(TAU * simpson(&profile.integrand(params), h))
}

/// One end circle of an axisymmetric boundary problem. A zero radius marks
/// a pole on the axis, whose height may be left free.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndPoint {
    pub radius: f64,
    #[serde(default)]
    pub height: Option<f64>,
    /// Tangent angle ψ of the meridian there, in degrees, for the profile
    /// running from `start` to `end`.
    pub angle_deg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisymProblem {
    pub start: EndPoint,
    pub end: EndPoint,
}

impl AxisymProblem {
    /// Two coaxial circles of the same radius at heights `±half_gap` whose
    /// meridian angles are those of the catenoid through them.
    pub fn catenoid_pair(radius: f64, half_gap: f64) -> Result<AxisymProblem> {
        let a = catenoid_waist(radius, half_gap)?;
        let slope = (half_gap / a).sinh();
        let angle = 1.0f64.atan2(-slope).to_degrees();
        Ok(AxisymProblem {
            start: EndPoint { radius, height: Some(-half_gap), angle_deg: angle },
            end: EndPoint { radius, height: Some(half_gap), angle_deg: 180.0 - angle },
        })
    }

    /// A single circle of radius `radius` in `z = 0` spanned by a cap that
    /// leaves the axis horizontally and meets the circle at `angle_deg`.
    pub fn cap(radius: f64, angle_deg: f64) -> AxisymProblem {
        AxisymProblem {
            start: EndPoint { radius: 0.0, height: None, angle_deg: 0.0 },
            end: EndPoint { radius, height: Some(0.0), angle_deg },
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, e) in [("start", &self.start), ("end", &self.end)] {
            if !(e.radius >= 0.0 && e.radius.is_finite() && e.angle_deg.is_finite()) {
                return Err(Error::invalid(format!("{name}: radius and angle must be finite, radius non-negative")));
            }
            if e.height.is_some_and(|z| !z.is_finite()) {
                return Err(Error::invalid(format!("{name}: height must be finite")));
            }
            if e.radius > 0.0 && e.height.is_none() {
                return Err(Error::invalid(format!("{name}: a circle end needs a height")));
            }
        }
        if self.start.radius == 0.0 && self.end.radius == 0.0 {
            return Err(Error::invalid("both ends lie on the axis"));
        }
        let psi = |e: &EndPoint| e.angle_deg.to_radians();
        if self.start.radius == 0.0 && !(psi(&self.start).sin().abs() < 1e-9 && psi(&self.start).cos() > 0.0) {
            return Err(Error::invalid("degenerate end data: a pole at the start must leave the axis horizontally"));
        }
        if self.end.radius == 0.0 && !(psi(&self.end).sin().abs() < 1e-9 && psi(&self.end).cos() < 0.0) {
            return Err(Error::invalid("degenerate end data: a pole at the end must reach the axis horizontally"));
        }
        Ok(())
    }

    fn reversed(&self) -> AxisymProblem {
        let flip = |e: EndPoint| EndPoint { angle_deg: e.angle_deg + 180.0, ..e };
        AxisymProblem { start: flip(self.end), end: flip(self.start) }
    }
}

/// Waist `a` of the catenoid `r = a cosh(z/a)` through circles of radius
/// `radius` at `z = ±half_gap`, on the stable (larger-waist) branch.
pub fn catenoid_waist(radius: f64, half_gap: f64) -> Result<f64> {
    if !(radius > 0.0 && half_gap > 0.0) {
        return Err(Error::invalid("catenoid needs a positive radius and gap"));
    }
    // a cosh(h/a) − R decreases on the stable branch a ∈ [a*, R]
    let g = |a: f64| a * (half_gap / a).cosh() - radius;
    let (mut lo, mut hi) = (half_gap / 1.2, radius);
    if g(lo) > 0.0 {
        return Err(Error::invalid("circles are too far apart for a catenoid"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct AxisymResult {
    #[serde(skip)]
    pub profile: Profile,
    /// Discrete energy at the returned profile.
    pub energy: f64,
    /// Sup-norm of the constrained gradient.
    pub grad_norm: f64,
    pub iterations: usize,
    pub length: f64,
}

/// Discrete profile: `N` segments of equal length `h = L/N`. The unknowns
/// are the tangent angles `ψ_1..ψ_{N−1}` at interior nodes and `L`; the end
/// angles are clamped. Segment `j` has angle `(ψ_j + ψ_{j+1})/2`, and the
/// energy is evaluated at segment midpoints.
struct Model {
    n: usize,
    r0: f64,
    psi_a: f64,
    psi_b: f64,
    target_r: f64,
    /// Height change to match, if both heights are fixed.
    target_dz: Option<f64>,
    h0: f64,
    lambda: f64,
}

struct Segments {
    h: f64,
    psi: Vec<f64>,
    theta: Vec<f64>,
    kappa: Vec<f64>,
    /// Node radii.
    r: Vec<f64>,
}

impl Model {
    fn segments(&self, x: &[f64]) -> Segments {
        let n = self.n;
        let h = x[n - 1] / n as f64;
        let mut psi = Vec::with_capacity(n + 1);
        psi.push(self.psi_a);
        psi.extend_from_slice(&x[..n - 1]);
        psi.push(self.psi_b);
        let theta: Vec<f64> = psi.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let kappa = psi.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut r = vec![self.r0; n + 1];
        for j in 0..n {
            r[j + 1] = r[j] + h * theta[j].cos();
        }
        Segments { h, psi, theta, kappa, r }
    }

    fn admissible(&self, x: &[f64]) -> bool {
        x[self.n - 1] > 0.0 && x.iter().all(|v| v.is_finite()) && self.segments(x).r[1..].iter().all(|&r| r > 0.0)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let sg = self.segments(x);
        (0..self.n)
            .map(|j| {
                let rm = 0.5 * (sg.r[j] + sg.r[j + 1]);
                let e = sg.kappa[j] + sg.theta[j].sin() / rm - self.h0;
                TAU * sg.h * (e * e + self.lambda) * rm
            })
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let sg = self.segments(x);
        let h = sg.h;
        let a = TAU * h;
        let (mut g_theta, mut g_kappa, mut g_r) = (vec![0.0; n], vec![0.0; n], vec![0.0; n + 1]);
        let mut dh = 0.0;
        for j in 0..n {
            let rm = 0.5 * (sg.r[j] + sg.r[j + 1]);
            let (s, c) = sg.theta[j].sin_cos();
            let e = sg.kappa[j] + s / rm - self.h0;
            g_kappa[j] = a * 2.0 * e * rm;
            g_theta[j] = a * 2.0 * e * c;
            let g_rm = a * ((e * e + self.lambda) - 2.0 * e * s / rm);
            g_r[j] += 0.5 * g_rm;
            g_r[j + 1] += 0.5 * g_rm;
            dh += TAU * (e * e + self.lambda) * rm - g_kappa[j] * sg.kappa[j] / h;
        }
        let mut suffix = 0.0;
        for k in (0..n).rev() {
            suffix += g_r[k + 1];
            g_theta[k] -= h * sg.theta[k].sin() * suffix;
        }
        for i in 1..=n {
            dh += g_r[i] * (sg.r[i] - self.r0) / h;
        }
        let mut g: Vec<f64> =
            (1..n).map(|j| 0.5 * (g_theta[j - 1] + g_theta[j]) + (g_kappa[j - 1] - g_kappa[j]) / h).collect();
        g.push(dh / n as f64);
        g
    }

    fn constraints(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.n;
        let sg = self.segments(x);
        let h = sg.h;
        let sc: f64 = sg.theta.iter().map(|t| t.cos()).sum();
        let ss: f64 = sg.theta.iter().map(|t| t.sin()).sum();
        let mut c = vec![self.r0 + h * sc - self.target_r];
        let mut jr: Vec<f64> = (1..n).map(|j| -0.5 * h * (sg.theta[j - 1].sin() + sg.theta[j].sin())).collect();
        jr.push(sc / n as f64);
        let mut jac = vec![jr];
        if let Some(dz) = self.target_dz {
            c.push(h * ss - dz);
            let mut jz: Vec<f64> = (1..n).map(|j| 0.5 * h * (sg.theta[j - 1].cos() + sg.theta[j].cos())).collect();
            jz.push(ss / n as f64);
            jac.push(jz);
        }
        (c, jac)
    }

    /// Gauss-Newton projection back onto the constraint set.
    fn restore(&self, x: &mut [f64]) -> bool {
        for _ in 0..50 {
            let (c, jac) = self.constraints(x);
            if c.iter().all(|v| v.abs() < 1e-13) {
                return true;
            }
            let m = c.len();
            let jm = DMatrix::from_fn(m, x.len(), |i, j| jac[i][j]);
            let Some(y) = (&jm * jm.transpose()).lu().solve(&DVector::from_vec(c)) else {
                return false;
            };
            let dx = jm.transpose() * y;
            for (xi, d) in x.iter_mut().zip(dx.iter()) {
                *xi -= d;
            }
        }
        self.constraints(x).0.iter().all(|v| v.abs() < 1e-10)
    }
}

/// Minimize the axisymmetric Helfrich energy over profiles joining the two
/// end circles with the prescribed meridian angles, using `n` segments.
pub fn axisym_minimize(problem: &AxisymProblem, params: &EnergyParams, n: usize) -> Result<AxisymResult> {
    params.check()?;
    problem.check()?;
    if n < 64 {
        return Err(Error::invalid("axisymmetric minimization needs at least 64 samples"));
    }
    if problem.start.radius > 0.0 && problem.end.radius == 0.0 {
        let flipped = EnergyParams { h0: -params.h0, ..*params };
        let mut res = axisym_minimize(&problem.reversed(), &flipped, n)?;
        res.profile = res.profile.reversed();
        return Ok(res);
    }
    let (a, b) = (problem.start, problem.end);
    let psi_a = a.angle_deg.to_radians();
    let mut psi_b = b.angle_deg.to_radians();
    let zb = b.height.expect("checked");
    let za = a.height.unwrap_or(zb - b.radius * (0.5 * psi_b).tan());

    // cubic Hermite start curve, resampled to equal arc length
    let (pa, pb) = ([a.radius, za], [b.radius, zb]);
    let chord = (pb[0] - pa[0]).hypot(pb[1] - pa[1]).max(1e-3);
    let (ta, tb) = ([psi_a.cos() * chord, psi_a.sin() * chord], [psi_b.cos() * chord, psi_b.sin() * chord]);
    let m = 64 * n;
    let curve: Vec<[f64; 2]> = (0..=m)
        .map(|k| {
            let t = k as f64 / m as f64;
            let (h00, h10, h01, h11) =
                (2.0 * t * t * t - 3.0 * t * t + 1.0, t * t * t - 2.0 * t * t + t, -2.0 * t * t * t + 3.0 * t * t, t * t * t - t * t);
            [0, 1].map(|d| h00 * pa[d] + h10 * ta[d] + h01 * pb[d] + h11 * tb[d])
        })
        .collect();
    let mut cum = vec![0.0];
    for w in curve.windows(2) {
        cum.push(cum.last().unwrap() + (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]));
    }
    let total = *cum.last().unwrap();
    let at = |s: f64| -> [f64; 2] {
        let k = cum.partition_point(|&c| c < s).clamp(1, m);
        let f = (s - cum[k - 1]) / (cum[k] - cum[k - 1]).max(f64::MIN_POSITIVE);
        [0, 1].map(|d| curve[k - 1][d] + f * (curve[k][d] - curve[k - 1][d]))
    };
    let mut x: Vec<f64> = Vec::with_capacity(n);
    let mut prev = psi_a;
    for i in 1..n {
        let (p, q) = (at(total * (i as f64 - 0.5) / n as f64), at(total * (i as f64 + 0.5) / n as f64));
        let mut psi = (q[1] - p[1]).atan2(q[0] - p[0]);
        psi += TAU * ((prev - psi) / TAU).round();
        x.push(psi);
        prev = psi;
    }
    x.push(total);
    psi_b += TAU * ((x[n - 2] - psi_b) / TAU).round();

    let model = Model {
        n,
        r0: a.radius,
        psi_a,
        psi_b,
        target_r: b.radius,
        target_dz: a.height.map(|za| zb - za),
        h0: params.h0,
        lambda: params.lambda,
    };
    if !model.restore(&mut x) || !model.admissible(&x) {
        return Err(Error::numerical("no admissible starting profile for the end data"));
    }

    let dim = n;
    let tol = 1e-9;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    for it in 0..200 {
        iterations = it;
        let g = model.gradient(&x);
        let (c, jac) = model.constraints(&x);
        let k = c.len();
        let jm = DMatrix::from_fn(k, dim, |i, j| jac[i][j]);
        let gv = DVector::from_vec(g);
        let mu = (&jm * jm.transpose()).lu().solve(&(&jm * &gv)).ok_or_else(|| Error::numerical("rank-deficient constraints"))?;
        let pg = &gv - jm.transpose() * &mu;
        grad_norm = pg.amax();
        if grad_norm < tol {
            break;
        }
        // Hessian of the Lagrangian by central differences of its gradient
        let lag = |y: &[f64]| -> DVector<f64> {
            let (_, jy) = model.constraints(y);
            let mut v = DVector::from_vec(model.gradient(y));
            for (row, m) in jy.iter().zip(mu.iter()) {
                for (vi, r) in v.iter_mut().zip(row) {
                    *vi -= m * r;
                }
            }
            v
        };
        let mut w = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let d = 1e-6 * x[j].abs().max(1.0);
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += d;
            xm[j] -= d;
            let col = (lag(&xp) - lag(&xm)) / (2.0 * d);
            w.set_column(j, &col);
        }
        w = 0.5 * (&w + w.transpose());

        let e0 = model.energy(&x);
        let mut tau = 0.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut kkt = DMatrix::zeros(dim + k, dim + k);
            kkt.view_mut((0, 0), (dim, dim)).copy_from(&w);
            for i in 0..dim {
                kkt[(i, i)] += tau;
            }
            kkt.view_mut((dim, 0), (k, dim)).copy_from(&jm);
            kkt.view_mut((0, dim), (dim, k)).copy_from(&jm.transpose());
            let mut rhs = DVector::zeros(dim + k);
            rhs.rows_mut(0, dim).copy_from(&(-&gv));
            for i in 0..k {
                rhs[dim + i] = -c[i];
            }
            let step = kkt.lu().solve(&rhs).map(|s| s.rows(0, dim).into_owned());
            let Some(dx) = step.filter(|dx| dx.dot(&pg) < 0.0) else {
                tau = if tau == 0.0 { 1e-6 * w.amax().max(1.0) } else { 10.0 * tau };
                continue;
            };
            let slope = dx.dot(&pg);
            let mut alpha = 1.0;
            while alpha > 1e-10 {
                let mut y: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + alpha * d).collect();
                if model.restore(&mut y) && model.admissible(&y) && model.energy(&y) <= e0 + 1e-4 * alpha * slope {
                    x = y;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if accepted {
                break;
            }
            tau = if tau == 0.0 { 1e-6 * w.amax().max(1.0) } else { 10.0 * tau };
        }
        if !accepted {
            break;
        }
    }
    if !(grad_norm < 1e-6) {
        return Err(Error::numerical(format!("axisymmetric descent stalled with gradient {grad_norm:.3e}")));
    }

    let sg = model.segments(&x);
    let mut z = vec![za; n + 1];
    for j in 0..n {
        z[j + 1] = z[j] + sg.h * sg.theta[j].sin();
    }
    if a.height.is_none() {
        let shift = zb - z[n];
        z.iter_mut().for_each(|v| *v += shift);
    }
    let mut dpsi = vec![0.0; n + 1];
    dpsi[0] = sg.kappa[0];
    dpsi[n] = sg.kappa[n - 1];
    for i in 1..n {
        dpsi[i] = 0.5 * (sg.kappa[i - 1] + sg.kappa[i]);
    }
    let energy = model.energy(&x);
    let profile = Profile { s: (0..=n).map(|i| i as f64 * sg.h).collect(), r: sg.r, z, psi: sg.psi, dpsi };
    Ok(AxisymResult { profile, energy, grad_norm, iterations, length: x[n - 1] })
}
