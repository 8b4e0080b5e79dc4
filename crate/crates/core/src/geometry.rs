//! Spatial domains: a ball and nested solid tori, with boundary frames and
//! collar coordinates.
//!
//! The torus of dimension `n` is built by repeated tubes: a circle of radius
//! `R` in `ℝ²`, then the boundary of the radius-`r_j` tube around the previous
//! hypersurface, one dimension up. Its boundary is `T^{n-1}` and its unit
//! cosphere bundle is the product `T^{n-1} × S^{n-2}`.

use crate::prelude::*;


use crate::error::{Error, Result};
use crate::manifold::{sphere_angles, sphere_embed, sphere_jacobian, Factor, Manifold};

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { dim: usize, radius: f64 },
    /// Radii `[R, r_1, …, r_{n-2}]`; the domain lives in `ℝ^{radii.len()+1}`.
    Torus { radii: Vec<f64> },
}

/// Boundary point with outward unit normal and an orthonormal tangent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrame {
    pub point: Vec<f64>,
    pub outward: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
}

impl BoundaryFrame {
    pub fn inner_normal(&self) -> Vec<f64> {
        self.outward.iter().map(|v| -v).collect()
    }

    /// `Σ_j s_j e_j`.
    pub fn tangent_vector(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.point.len()];
        for (c, e) in s.iter().zip(&self.tangents) {
            for (o, v) in out.iter_mut().zip(e) {
                *o += c * v;
            }
        }
        out
    }

    /// Frame coordinates `s_j = ⟨ξ′, e_j⟩`.
    pub fn tangent_coords(&self, xi_t: &[f64]) -> Vec<f64> {
        self.tangents.iter().map(|e| dot(e, xi_t)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for e in &out {
            let c = dot(&v, e);
            for (a, b) in v.iter_mut().zip(e) {
                *a -= c * b;
            }
        }
        let norm = dot(&v, &v).sqrt();
        out.push(v.into_iter().map(|a| a / norm).collect());
    }
    out
}

struct TubeEmbedding {
    point: Vec<f64>,
    normal: Vec<f64>,
    dpoint: Vec<Vec<f64>>,
}

impl Domain {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 || !(radius > 0.0) {
            return Err(Error::Invalid(format!("ball needs dimension ≥ 2 and positive radius, got {dim}, {radius}")));
        }
        Ok(Domain::Ball { dim, radius })
    }

    /// Nested torus in `ℝ^n` with radii `0.5, 0.25, 0.125, …`.
    pub fn torus(n: usize) -> Result<Self> {
        Domain::torus_with_radii((0..n - 1).map(|j| 0.5f64.powi(j as i32 + 1)).collect())
    }

    pub fn torus_with_radii(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Invalid("torus needs at least the core radius".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Invalid(format!("torus radii must be positive and decreasing, got {radii:?}")));
        }
        // Each tube must stay inside the reach of the previous hypersurface.
        for j in 1..radii.len() {
            let reach = radii[j - 1] - radii[j..].iter().sum::<f64>();
            if reach <= 0.0 {
                return Err(Error::Invalid(format!("torus radii {radii:?} self-intersect")));
            }
        }
        Ok(Domain::Torus { radii })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { dim, .. } => *dim,
            Domain::Torus { radii } => radii.len() + 1,
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::Torus { radii } => radii.iter().sum(),
        }
    }

    /// Negative inside, positive outside; the Euclidean distance to the boundary near it.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Ball { radius, .. } => dot(x, x).sqrt() - radius,
            Domain::Torus { radii } => {
                let mut s = (x[0] * x[0] + x[1] * x[1]).sqrt() - radii[0];
                for (j, r) in radii[1..].iter().enumerate() {
                    let z = x[j + 2];
                    s = (s * s + z * z).sqrt() - r;
                }
                s
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.signed_distance(x) < 0.0
    }

    /// `Γ = ∂Ω` as an integration manifold.
    pub fn boundary_manifold(&self) -> Manifold {
        match self {
            Domain::Ball { dim, .. } => Manifold::sphere(dim - 1),
            Domain::Torus { radii } => Manifold::torus(radii.len()),
        }
    }

    /// The unit cosphere bundle `S(Γ) = Γ × S^{n-2}` when it is a product.
    pub fn cosphere_factors(&self) -> Result<Vec<Factor>> {
        match self {
            Domain::Ball { .. } => Err(Error::Invalid(
                "the cosphere bundle of a sphere is not a product; boundary degrees need a torus domain".into(),
            )),
            Domain::Torus { radii } if radii.len() < 2 => {
                Err(Error::Invalid("boundary degrees need a torus in dimension n ≥ 3".into()))
            }
            Domain::Torus { radii } => Ok(vec![Factor::Torus(radii.len()), Factor::Sphere(radii.len() - 1)]),
        }
    }

    fn tube(radii: &[f64], angles: &[f64]) -> TubeEmbedding {
        let (c, s) = (angles[0].cos(), angles[0].sin());
        let mut point = vec![radii[0] * c, radii[0] * s];
        let mut normal = vec![c, s];
        let mut dpoint = vec![vec![-radii[0] * s, radii[0] * c]];
        let mut dnormal = vec![vec![-s, c]];
        for (j, r) in radii[1..].iter().enumerate() {
            let (c, s) = (angles[j + 1].cos(), angles[j + 1].sin());
            let mut p: Vec<f64> = point.iter().zip(&normal).map(|(p, nv)| p + r * c * nv).collect();
            p.push(r * s);
            let mut dp: Vec<Vec<f64>> = dpoint
                .iter()
                .zip(&dnormal)
                .map(|(dp, dn)| {
                    let mut v: Vec<f64> = dp.iter().zip(dn).map(|(a, b)| a + r * c * b).collect();
                    v.push(0.0);
                    v
                })
                .collect();
            let mut dphi: Vec<f64> = normal.iter().map(|nv| -r * s * nv).collect();
            dphi.push(r * c);
            dp.push(dphi);
            let mut dn: Vec<Vec<f64>> = dnormal
                .iter()
                .map(|dn| {
                    let mut v: Vec<f64> = dn.iter().map(|b| c * b).collect();
                    v.push(0.0);
                    v
                })
                .collect();
            let mut dnphi: Vec<f64> = normal.iter().map(|nv| -s * nv).collect();
            dnphi.push(c);
            dn.push(dnphi);
            let mut nn: Vec<f64> = normal.iter().map(|nv| c * nv).collect();
            nn.push(s);
            point = p;
            normal = nn;
            dpoint = dp;
            dnormal = dn;
        }
        TubeEmbedding { point, normal, dpoint }
    }

    /// Boundary point and frame at boundary chart angles.
    pub fn boundary_frame(&self, angles: &[f64]) -> BoundaryFrame {
        match self {
            Domain::Ball { radius, .. } => {
                let x = sphere_embed(angles);
                let jac = sphere_jacobian(angles);
                let cols = (0..angles.len()).map(|c| jac.iter().map(|row| row[c]).collect()).collect();
                BoundaryFrame { point: x.iter().map(|v| radius * v).collect(), outward: x, tangents: gram_schmidt(cols) }
            }
            Domain::Torus { radii } => {
                let t = Domain::tube(radii, angles);
                BoundaryFrame { point: t.point, outward: t.normal, tangents: gram_schmidt(t.dpoint) }
            }
        }
    }

    /// Boundary chart angles of the nearest boundary point to `x`.
    pub fn boundary_angles(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Domain::Ball { .. } => sphere_angles(x),
            Domain::Torus { radii } => {
                let mut angles = vec![x[1].atan2(x[0])];
                let mut s = (x[0] * x[0] + x[1] * x[1]).sqrt() - radii[0];
                for (j, r) in radii[1..].iter().enumerate() {
                    let z = x[j + 2];
                    angles.push(z.atan2(s));
                    s = (s * s + z * z).sqrt() - r;
                }
                angles
            }
        }
    }

    /// Width of the collar `Γ × [0, depth)` measured along the inner normal.
    pub fn collar_depth(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => 0.5 * radius,
            Domain::Torus { radii } => 0.5 * radii[radii.len() - 1],
        }
    }

    /// `x = X(angles) − t N(angles)` for `t ∈ [0, 1)` scaled by the collar depth.
    pub fn collar_point(&self, angles: &[f64], t: f64) -> Vec<f64> {
        let f = self.boundary_frame(angles);
        let depth = t * self.collar_depth();
        f.point.iter().zip(&f.outward).map(|(p, nv)| p - depth * nv).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn orthonormal(f: &BoundaryFrame) {
        let mut all = f.tangents.clone();
        all.push(f.outward.clone());
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expect).abs() < 1e-12, "{i},{j}");
            }
        }
    }

    #[test]
    fn three_torus_is_standard() {
        let d = Domain::torus(3).unwrap();
        let (t, p) = (0.7, 2.1);
        let f = d.boundary_frame(&[t, p]);
        let expect = [(0.5 + 0.25 * p.cos()) * t.cos(), (0.5 + 0.25 * p.cos()) * t.sin(), 0.25 * p.sin()];
        for (a, b) in f.point.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        orthonormal(&f);
        assert!(d.signed_distance(&f.point).abs() < 1e-14);
    }

    #[test]
    fn higher_tori_frames_and_distances() {
        for n in 3..=5 {
            let d = Domain::torus(n).unwrap();
            let angles: Vec<f64> = (0..n - 1).map(|i| 0.4 + 1.3 * i as f64).collect();
            let f = d.boundary_frame(&angles);
            orthonormal(&f);
            assert!(d.signed_distance(&f.point).abs() < 1e-14);
            let back = d.boundary_angles(&f.point);
            for (a, b) in angles.iter().zip(&back) {
                let diff = (a - b).rem_euclid(2.0 * PI);
                assert!(diff < 1e-12 || 2.0 * PI - diff < 1e-12);
            }
            let inside = d.collar_point(&angles, 0.5);
            assert!(d.contains(&inside));
            assert!((d.signed_distance(&inside) + 0.5 * d.collar_depth()).abs() < 1e-14);
            // The outward normal points out.
            let out: Vec<f64> = f.point.iter().zip(&f.outward).map(|(p, v)| p + 1e-3 * v).collect();
            assert!(!d.contains(&out));
        }
    }

    #[test]
    fn tangents_are_tangent() {
        let d = Domain::torus(4).unwrap();
        let a = [0.3, 1.0, 2.0];
        let f = d.boundary_frame(&a);
        let h = 1e-6;
        for e in &f.tangents {
            let p: Vec<f64> = f.point.iter().zip(e).map(|(p, v)| p + h * v).collect();
            assert!(d.signed_distance(&p).abs() < 1e-10);
        }
    }

    #[test]
    fn ball_boundary() {
        let d = Domain::ball(3, 0.8).unwrap();
        let f = d.boundary_frame(&[1.0, 2.0]);
        orthonormal(&f);
        assert!(d.signed_distance(&f.point).abs() < 1e-15);
        assert!(d.cosphere_factors().is_err());
        assert!(d.contains(&[0.1, 0.2, 0.3]));
    }

    #[test]
    fn cosphere_is_product_for_tori() {
        let d = Domain::torus(3).unwrap();
        assert_eq!(d.cosphere_factors().unwrap(), vec![Factor::Torus(2), Factor::Sphere(1)]);
        assert!(Domain::torus(2).unwrap().cosphere_factors().is_err());
        assert!(Domain::torus(3).unwrap().bounding_radius() < 1.0);
    }

    #[test]
    fn bad_radii_rejected() {
        assert!(Domain::torus_with_radii(vec![0.5, 0.6]).is_err());
        assert!(Domain::torus_with_radii(vec![0.3, 0.2, 0.15]).is_err());
    }
}
