//! A finite dictionary of bounded test functions and the dual seminorm it
//! induces on varifolds.

use nalgebra::Vector3;

use super::{test_integral, OrientedVarifold};
use crate::error::{Error, Result};
use crate::mesh::Point;

type ProbeFn = Box<dyn Fn(&Point, &Vector3<f64>) -> f64 + Send + Sync>;

pub struct ProbeDictionary {
    probes: Vec<ProbeFn>,
}

impl std::fmt::Debug for ProbeDictionary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProbeDictionary({} probes)", self.probes.len())
    }
}

impl ProbeDictionary {
    pub fn new(probes: Vec<ProbeFn>) -> ProbeDictionary {
        ProbeDictionary { probes }
    }

    /// The 32 default probes over the box `[lo, hi]`: position factors
    /// `{1, x, y, z, xy, yz, zx, |x|²/3}` in box coordinates rescaled to
    /// `[−1, 1]` and clipped, times normal factors `{1, n_x, n_y, n_z}`.
    /// Every probe has sup-norm at most 1.
    pub fn standard(lo: Point, hi: Point) -> ProbeDictionary {
        let center = (lo + hi) * 0.5;
        let half = (hi - lo) * 0.5;
        let half = half.map(|h| if h > 0.0 { h } else { 1.0 });
        let mut probes: Vec<ProbeFn> = Vec::with_capacity(32);
        for pos in 0..8 {
            for nor in 0..4 {
                probes.push(Box::new(move |x: &Point, n: &Vector3<f64>| {
                    let u = (x - center).component_div(&half).map(|c| c.clamp(-1.0, 1.0));
                    let p = match pos {
                        0 => 1.0,
                        1 => u.x,
                        2 => u.y,
                        3 => u.z,
                        4 => u.x * u.y,
                        5 => u.y * u.z,
                        6 => u.z * u.x,
                        _ => u.norm_squared() / 3.0,
                    };
                    let q = if nor == 0 { 1.0 } else { n[nor - 1] };
                    p * q
                }));
            }
        }
        ProbeDictionary { probes }
    }

    /// Standard dictionary over the joint bounding box of some varifolds.
    pub fn standard_for(vars: &[&OrientedVarifold]) -> ProbeDictionary {
        let boxes: Vec<(Point, Point)> = vars.iter().filter_map(|v| v.bbox()).collect();
        let (lo, hi) = boxes
            .iter()
            .fold((Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY)), |(lo, hi), (a, b)| {
                (lo.inf(a), hi.sup(b))
            });
        if boxes.is_empty() {
            return ProbeDictionary::standard(Point::repeat(-1.0), Point::repeat(1.0));
        }
        ProbeDictionary::standard(lo, hi)
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    pub fn pairings(&self, var: &OrientedVarifold) -> Vec<f64> {
        self.probes.iter().map(|p| test_integral(var, |x, n| p(x, n))).collect()
    }
}

/// `max_Φ |∫Φ dV₁ − ∫Φ dV₂|` over the dictionary.
pub fn varifold_distance(a: &OrientedVarifold, b: &OrientedVarifold, dict: &ProbeDictionary) -> Result<f64> {
    if dict.is_empty() {
        return Err(Error::invalid("probe dictionary is empty"));
    }
    let pa = dict.pairings(a);
    let pb = dict.pairings(b);
    Ok(pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
