//! Per-triangle geometry shared by curvature, energy and gradient code.

use crate::scalar::{Real, V3};

/// Quantities of one triangle that vertex curvatures are assembled from.
#[derive(Clone, Copy, Debug)]
pub struct FaceGeom<T> {
    /// Half the cross product of two edges: area times unit normal.
    pub normal_area: V3<T>,
    pub area: T,
    /// Gradient of the triangle area with respect to each corner.
    pub grad_area: [V3<T>; 3],
    /// Mixed Voronoi share of each corner (barycentric-style fallback on
    /// obtuse triangles). The three shares sum to `area`.
    pub corner_area: [T; 3],
}

pub fn face_geom<T: Real>(p: [V3<T>; 3]) -> FaceGeom<T> {
    let e01 = p[1].sub(p[0]);
    let e02 = p[2].sub(p[0]);
    let cross = e01.cross(e02);
    let cross_norm = cross.norm();
    let area = cross_norm * 0.5;
    let normal_area = cross.scale(T::cst(0.5));
    let unit = cross.scale(T::cst(1.0) / cross_norm);

    let mut grad_area = [V3::zero(); 3];
    for i in 0..3 {
        // opposite edge oriented along the winding
        let opp = p[(i + 2) % 3].sub(p[(i + 1) % 3]);
        grad_area[i] = unit.cross(opp).scale(T::cst(0.5));
    }

    // dot products at each corner decide obtuseness and give cotangents
    let mut dots = [T::cst(0.0); 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3].sub(p[i]);
        let b = p[(i + 2) % 3].sub(p[i]);
        dots[i] = a.dot(b);
    }
    let obtuse = (0..3).find(|&i| dots[i].val() < 0.0);
    let corner_area = match obtuse {
        None => {
            let mut ca = [T::cst(0.0); 3];
            for i in 0..3 {
                let j = (i + 1) % 3;
                let k = (i + 2) % 3;
                let cot_j = dots[j] / cross_norm;
                let cot_k = dots[k] / cross_norm;
                let lij2 = p[j].sub(p[i]).norm2();
                let lik2 = p[k].sub(p[i]).norm2();
                ca[i] = (lij2 * cot_k + lik2 * cot_j) * 0.125;
            }
            ca
        }
        Some(o) => {
            let mut ca = [area * 0.25; 3];
            ca[o] = area * 0.5;
            ca
        }
    };

    FaceGeom { normal_area, area, grad_area, corner_area }
}

/// [`face_geom`] evaluated in plain `f64`.
pub fn face_geom_f64(p: [&nalgebra::Vector3<f64>; 3]) -> FaceGeom<f64> {
    face_geom([V3::from_f64(p[0]), V3::from_f64(p[1]), V3::from_f64(p[2])])
}

/// Interior angles at the three corners.
pub fn corner_angles(p: [&nalgebra::Vector3<f64>; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3] - p[i];
        let b = p[(i + 2) % 3] - p[i];
        out[i] = a.cross(&b).norm().atan2(a.dot(&b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{lift_triangle, Dual};
    use nalgebra::Vector3;

    fn tri(p: [[f64; 3]; 3]) -> [V3<f64>; 3] {
        [V3(p[0]), V3(p[1]), V3(p[2])]
    }

    #[test]
    fn corner_areas_sum_to_area() {
        for p in [
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.3, 0.8, 0.1]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.5, 0.2, 0.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        ] {
            let g = face_geom(tri(p));
            let s: f64 = g.corner_area.iter().sum();
            assert!((s - g.area).abs() < 1e-14 * g.area.max(1.0), "{s} vs {}", g.area);
        }
    }

    #[test]
    fn area_gradient_matches_dual_derivative() {
        let p = [Vector3::new(0.1, 0.2, -0.3), Vector3::new(1.2, 0.1, 0.4), Vector3::new(0.4, 0.9, 0.2)];
        let lifted = lift_triangle([&p[0], &p[1], &p[2]]);
        let gd: FaceGeom<Dual<9>> = face_geom(lifted);
        let g = face_geom_f64([&p[0], &p[1], &p[2]]);
        for c in 0..3 {
            for k in 0..3 {
                let diff: f64 = gd.area.d[3 * c + k] - g.grad_area[c].0[k];
                assert!(diff.abs() < 1e-14);
            }
        }
    }
}
