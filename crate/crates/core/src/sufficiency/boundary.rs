//! Discretized images `Phi(boundary C)` used as membership oracles.
//!
//! `C` is star-shaped about the origin with radial function `rho(d)`, zero
//! for `U . d <= 0`. The boundary is parametrized by directions in the open
//! half-space `U . d > 0`; its rim collapses onto the origin, whose image is
//! `Phi(0)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Vector2, Vector3};
use serde::Serialize;

use super::{phi_map, radial_boundary};
use crate::error::{Error, Result};
use crate::linalg::{orthogonal_unit, unit};
use crate::model::MaterialPair;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Inside,
    Outside,
    /// Within the discretization band of the boundary.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub verdict: Verdict,
    /// Distance from the query point to the discretized boundary.
    pub distance: f64,
    pub band: f64,
    pub winding: i64,
}

fn verdict(winding: i64, distance: f64, band: f64) -> OracleResult {
    let verdict = if distance <= band {
        Verdict::Boundary
    } else if winding != 0 {
        Verdict::Inside
    } else {
        Verdict::Outside
    };
    OracleResult { verdict, distance, band, winding }
}

/// Closed polygon approximating `Phi(boundary C)` for `N = 2`.
#[derive(Debug, Clone)]
pub struct BoundaryPolygon {
    vertices: Vec<Vector2<f64>>,
    band: f64,
}

const MAX_DEPTH: u32 = 10;

impl BoundaryPolygon {
    /// Samples `points` equally spaced angles in `[-pi/2, pi/2]` around `U`
    /// and bisects any arc whose image deviates from its chord by more than
    /// `sag_tol` relative to the flux scale.
    pub fn new(t: f64, u: &Vector, materials: &MaterialPair, points: usize, root_tol: f64, sag_tol: f64) -> Result<Self> {
        if u.len() != 2 {
            return Err(Error::UnsupportedDimension(u.len()));
        }
        let uhat = unit(u).ok_or(Error::NoPositiveRoot)?;
        let e = orthogonal_unit(&uhat);
        let fscale = materials.alpha1() * u.norm().powi(3);
        let abs_tol = sag_tol * fscale;
        let image = |theta: f64| -> Vector2<f64> {
            let d = &uhat * theta.cos() + &e * theta.sin();
            let rho = radial_boundary(t, u, &d, materials, root_tol);
            let v = phi_map(t, u, &(d * rho), materials);
            Vector2::new(v[0], v[1])
        };
        let points = points.max(8);
        let thetas: Vec<f64> = (0..=points)
            .map(|k| -FRAC_PI_2 + PI * k as f64 / points as f64)
            .collect();
        let mut vertices = vec![image(thetas[0])];
        let mut max_sag: f64 = 0.0;
        for w in thetas.windows(2) {
            let end = image(w[1]);
            let start = *vertices.last().unwrap();
            refine(&image, w[0], w[1], start, end, abs_tol, 0, &mut vertices, &mut max_sag);
        }
        // the chain starts and ends at Phi(0); drop the duplicate
        vertices.pop();
        let band = 2.0 * max_sag.max(abs_tol) + 1e-13 * fscale;
        Ok(Self { vertices, band })
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    /// Turns whose orientation disagrees with the majority by more than the
    /// band; zero for a convex curve.
    pub fn convexity_violations(&self) -> usize {
        let n = self.vertices.len();
        let crosses: Vec<f64> = (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let c = self.vertices[(i + 2) % n];
                let (e1, e2) = (b - a, c - b);
                // signed sag of b against chord ac
                let chord = c - a;
                let len = chord.norm();
                if len == 0.0 {
                    0.0
                } else {
                    (e1.x * e2.y - e1.y * e2.x) / len
                }
            })
            .collect();
        let positive = crosses.iter().filter(|c| **c > 0.0).count();
        let sign = if 2 * positive >= n { 1.0 } else { -1.0 };
        crosses.iter().filter(|c| sign * **c < -self.band).count()
    }

    pub fn classify(&self, v: &Vector) -> OracleResult {
        let p = Vector2::new(v[0], v[1]);
        let n = self.vertices.len();
        let mut winding = 0i64;
        let mut dist2 = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let ab = b - a;
            let ap = p - a;
            let len2 = ab.norm_squared();
            let s = if len2 > 0.0 { (ap.dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            dist2 = dist2.min((ap - ab * s).norm_squared());
            let cross = ab.x * ap.y - ab.y * ap.x;
            if a.y <= p.y {
                if b.y > p.y && cross > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && cross < 0.0 {
                winding -= 1;
            }
        }
        verdict(winding, dist2.sqrt(), self.band)
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> Vector2<f64>>(
    image: &F,
    lo: f64,
    hi: f64,
    start: Vector2<f64>,
    end: Vector2<f64>,
    tol: f64,
    depth: u32,
    out: &mut Vec<Vector2<f64>>,
    max_sag: &mut f64,
) {
    let mid_theta = 0.5 * (lo + hi);
    let mid = image(mid_theta);
    let sag = segment_distance(&mid, &start, &end);
    if sag <= tol || depth >= MAX_DEPTH {
        *max_sag = max_sag.max(sag);
        out.push(end);
        return;
    }
    refine(image, lo, mid_theta, start, mid, tol, depth + 1, out, max_sag);
    refine(image, mid_theta, hi, mid, end, tol, depth + 1, out, max_sag);
}

fn segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let s = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - a - ab * s).norm()
}

/// Closed triangle mesh approximating `Phi(boundary C)` for `N = 3`, on a
/// latitude/longitude grid of the half-sphere of directions around `U`.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    band: f64,
}

impl BoundaryMesh {
    pub fn new(
        t: f64,
        u: &Vector,
        materials: &MaterialPair,
        rings: usize,
        azimuths: usize,
        root_tol: f64,
    ) -> Result<Self> {
        if u.len() != 3 {
            return Err(Error::UnsupportedDimension(u.len()));
        }
        let rings = rings.max(4);
        let azimuths = azimuths.max(8);
        let uhat = unit(u).ok_or(Error::NoPositiveRoot)?;
        let e1 = orthogonal_unit(&uhat);
        let e2 = Vector::from_column_slice(&[
            uhat[1] * e1[2] - uhat[2] * e1[1],
            uhat[2] * e1[0] - uhat[0] * e1[2],
            uhat[0] * e1[1] - uhat[1] * e1[0],
        ]);
        let image = |polar: f64, az: f64| -> Vector3<f64> {
            let d = &uhat * polar.cos() + (&e1 * az.cos() + &e2 * az.sin()) * polar.sin();
            let rho = radial_boundary(t, u, &d, materials, root_tol);
            let v = phi_map(t, u, &(d * rho), materials);
            Vector3::new(v[0], v[1], v[2])
        };
        let polar = |k: usize| FRAC_PI_2 * k as f64 / rings as f64;
        let az = |j: f64| 2.0 * PI * j / azimuths as f64;

        let mut vertices = vec![image(0.0, 0.0)];
        for k in 1..rings {
            for j in 0..azimuths {
                vertices.push(image(polar(k), az(j as f64)));
            }
        }
        let rim = vertices.len();
        let zero = phi_map(t, u, &Vector::zeros(3), materials);
        vertices.push(Vector3::new(zero[0], zero[1], zero[2]));

        let ring = |k: usize, j: usize| 1 + (k - 1) * azimuths + j % azimuths;
        let mut triangles = Vec::new();
        for j in 0..azimuths {
            triangles.push([0, ring(1, j), ring(1, j + 1)]);
        }
        for k in 1..rings - 1 {
            for j in 0..azimuths {
                let (a, b) = (ring(k, j), ring(k, j + 1));
                let (c, d) = (ring(k + 1, j), ring(k + 1, j + 1));
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            }
        }
        for j in 0..azimuths {
            triangles.push([ring(rings - 1, j), rim, ring(rings - 1, j + 1)]);
        }

        // sag at cell centres between rings
        let mut sag: f64 = 0.0;
        for k in 1..rings - 1 {
            for j in 0..azimuths {
                let mid = image(0.5 * (polar(k) + polar(k + 1)), az(j as f64 + 0.5));
                let (a, b) = (vertices[ring(k, j)], vertices[ring(k, j + 1)]);
                let (c, d) = (vertices[ring(k + 1, j)], vertices[ring(k + 1, j + 1)]);
                let dist = triangle_distance(&mid, &a, &c, &d).min(triangle_distance(&mid, &a, &d, &b));
                sag = sag.max(dist);
            }
        }
        let fscale = materials.alpha1() * u.norm().powi(3);
        let band = 2.0 * sag + 1e-13 * fscale;
        Ok(Self { vertices, triangles, band })
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn classify(&self, v: &Vector) -> OracleResult {
        let p = Vector3::new(v[0], v[1], v[2]);
        let mut solid = 0.0;
        let mut dist = f64::INFINITY;
        for tri in &self.triangles {
            let (a, b, c) = (self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]);
            solid += solid_angle(&(a - p), &(b - p), &(c - p));
            dist = dist.min(triangle_distance(&p, &a, &b, &c));
        }
        let winding = (solid / (4.0 * PI)).round() as i64;
        verdict(winding, dist, self.band)
    }
}

/// Signed solid angle of a triangle seen from the origin.
fn solid_angle(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(c));
    let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * num.atan2(den)
}

fn triangle_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let s = d1 / (d1 - d3);
        return (p - (a + ab * s)).norm();
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let s = d2 / (d2 - d6);
        return (p - (a + ac * s)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let s = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * s)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let (v, w) = (vb * denom, vc * denom);
    (p - (a + ab * v + ac * w)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mats() -> MaterialPair {
        MaterialPair::new(8.0, 1.0).unwrap()
    }

    #[test]
    fn polygon_contains_interior_images() {
        let m = mats();
        let u = Vector::from_column_slice(&[1.0, 0.0]);
        let poly = BoundaryPolygon::new(0.5, &u, &m, 720, 1e-12, 1e-8).unwrap();
        assert!(poly.band() < 1e-6);
        assert_eq!(poly.convexity_violations(), 0);
        let x = Vector::from_column_slice(&[0.1, 0.05]);
        let r = poly.classify(&phi_map(0.5, &u, &x, &m));
        assert_eq!(r.verdict, Verdict::Inside);
        let far = Vector::from_column_slice(&[10.0, 0.0]);
        assert_eq!(poly.classify(&far).verdict, Verdict::Outside);
        let origin_image = phi_map(0.5, &u, &Vector::zeros(2), &m);
        assert_eq!(poly.classify(&origin_image).verdict, Verdict::Boundary);
    }

    #[test]
    fn polygon_rejects_other_dimensions() {
        let u = Vector::from_column_slice(&[1.0, 0.0, 0.0]);
        assert!(BoundaryPolygon::new(0.5, &u, &mats(), 720, 1e-12, 1e-10).is_err());
    }

    #[test]
    fn mesh_contains_interior_images() {
        let m = mats();
        let u = Vector::from_column_slice(&[0.6, 0.0, 0.8]);
        let mesh = BoundaryMesh::new(0.4, &u, &m, 24, 48, 1e-12).unwrap();
        let x = Vector::from_column_slice(&[0.05, 0.02, 0.08]);
        let r = mesh.classify(&phi_map(0.4, &u, &x, &m));
        assert_eq!(r.verdict, Verdict::Inside, "{r:?}");
        assert_eq!(r.winding.abs(), 1);
        let far = Vector::from_column_slice(&[0.0, 5.0, 0.0]);
        assert_eq!(mesh.classify(&far).verdict, Verdict::Outside);
    }

    #[test]
    fn triangle_distance_cases() {
        let a = Vector3::new(0.0, 0.0, 0.0);
        let b = Vector3::new(1.0, 0.0, 0.0);
        let c = Vector3::new(0.0, 1.0, 0.0);
        assert!((triangle_distance(&Vector3::new(0.2, 0.2, 0.5), &a, &b, &c) - 0.5).abs() < 1e-15);
        assert!((triangle_distance(&Vector3::new(-1.0, 0.0, 0.0), &a, &b, &c) - 1.0).abs() < 1e-15);
        assert!((triangle_distance(&Vector3::new(1.0, 1.0, 0.0), &a, &b, &c) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
