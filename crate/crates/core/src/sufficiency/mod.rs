//! Reachability by lamination.
//!
//! For fixed `(t, U)` write `U_1 = U - (1-t) x`, `U_0 = U + t x` and
//!
//! ```text
//! psi(x) = (alpha0 |U_0|^2 U_0 - alpha1 |U_1|^2 U_1) . x
//! Phi(x) = t alpha1 |U_1|^2 U_1 + (1-t) alpha0 |U_0|^2 U_0
//! ```
//!
//! `psi(x) = 0` is the jump condition of a first-order laminate with normal
//! `x`, whose flux is `Phi(x)`. A triplet is reachable iff `V` lies in
//! `Phi(C)` with `C = {psi <= 0}`.
//!
//! Along any ray `s d`, `psi(s d) = s g(s)` with `g` strictly increasing, and
//! `g(0) = (alpha0 - alpha1) |U|^2 U . d`. So `C` is star-shaped about the
//! origin, `0` lies on its boundary, and a ray enters `C` iff `U . d > 0`.

mod boundary;
mod reach;

use nalgebra::DMatrix;

pub use boundary::{BoundaryMesh, BoundaryPolygon, OracleResult, Verdict};
pub use reach::{reachable, Method, ReachOptions, ReachabilityOracle, ReachabilityReport};

use crate::error::{Error, Result};
use crate::laminate::Laminate;
use crate::linalg::{cubic_jacobian, cubic_jacobian_derivative, min_sym_eigenvalue};
use crate::model::{lambda_map, phase_means, Law, MaterialPair, Phase, Triplet};
use crate::tolerances::Tolerances;
use crate::Vector;

/// `alpha0 |U_0|^2 U_0 - alpha1 |U_1|^2 U_1`, the gradient of a convex
/// potential in `x`.
fn flux_jump(t: f64, u: &Vector, x: &Vector, m: &MaterialPair) -> Vector {
    let (u1, u0) = phase_means(t, u, x);
    lambda_map(Phase::Zero, &u0, m) - lambda_map(Phase::One, &u1, m)
}

/// Jacobian of [`flux_jump`]: `t a0 D(U_0) + (1-t) a1 D(U_1)`, positive definite.
fn flux_jump_jacobian(t: f64, u: &Vector, x: &Vector, m: &MaterialPair) -> DMatrix<f64> {
    let (u1, u0) = phase_means(t, u, x);
    cubic_jacobian(&u0) * (t * m.alpha0()) + cubic_jacobian(&u1) * ((1.0 - t) * m.alpha1())
}

pub fn psi(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> f64 {
    flux_jump(t, u, x, materials).dot(x)
}

pub fn psi_gradient(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> Vector {
    flux_jump(t, u, x, materials) + flux_jump_jacobian(t, u, x, materials) * x
}

/// Analytic Hessian of [`psi`].
pub fn psi_hessian(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> DMatrix<f64> {
    let (u1, u0) = phase_means(t, u, x);
    let j = flux_jump_jacobian(t, u, x, materials);
    &j * 2.0 + cubic_jacobian_derivative(&u0, x) * (t * t * materials.alpha0())
        - cubic_jacobian_derivative(&u1, x) * ((1.0 - t) * (1.0 - t) * materials.alpha1())
}

pub fn psi_hessian_mineig(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> f64 {
    min_sym_eigenvalue(&psi_hessian(t, u, x, materials))
}

/// Flux of the first-order laminate with moment difference `x`.
pub fn phi_map(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> Vector {
    let (u1, u0) = phase_means(t, u, x);
    lambda_map(Phase::One, &u1, materials) * t + lambda_map(Phase::Zero, &u0, materials) * (1.0 - t)
}

/// `t (1-t) (alpha0 D(U_0) - alpha1 D(U_1))`.
pub fn phi_jacobian(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> DMatrix<f64> {
    let (u1, u0) = phase_means(t, u, x);
    (cubic_jacobian(&u0) * materials.alpha0() - cubic_jacobian(&u1) * materials.alpha1()) * (t * (1.0 - t))
}

/// Typical magnitude of psi for the given data, used to scale tolerances.
pub(crate) fn psi_scale(u: &Vector, x: &Vector, materials: &MaterialPair) -> f64 {
    let r = u.norm().max(x.norm());
    (materials.alpha1() * r * r * r * r).max(f64::MIN_POSITIVE)
}

/// Smallest `s > 0` with `psi(s d) = 0` for a unit `direction`: bracketing,
/// then Newton safeguarded by bisection down to relative width `root_tol`.
pub fn first_order_root(
    t: f64,
    u: &Vector,
    direction: &Vector,
    materials: &MaterialPair,
    root_tol: f64,
) -> Result<f64> {
    let d = direction
        .normalize()
        .map(|x| if x.is_finite() { x } else { 0.0 });
    if d.norm() == 0.0 || u.dot(&d) <= 0.0 {
        return Err(Error::NoPositiveRoot);
    }
    // psi(s d) = s g(s) with g increasing
    let g = |s: f64| flux_jump(t, u, &(&d * s), materials).dot(&d);
    let dg = |s: f64| d.dot(&(flux_jump_jacobian(t, u, &(&d * s), materials) * &d));
    let mut lo = 0.0;
    let mut hi = u.norm();
    let mut grown = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > 1100 || !hi.is_finite() {
            return Err(Error::NoPositiveRoot);
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gs = g(s);
        if gs == 0.0 {
            return Ok(s);
        }
        if gs < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if hi - lo <= root_tol * hi {
            break;
        }
        let step = gs / dg(s);
        let next = s - step;
        if next > lo && next < hi && step.is_finite() {
            s = next;
            if step.abs() <= 0.1 * root_tol * s {
                return Ok(s);
            }
        } else {
            s = 0.5 * (lo + hi);
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

/// Distance from the origin to the boundary of `C` along unit `d`; zero for
/// directions with `U . d <= 0`.
pub fn radial_boundary(t: f64, u: &Vector, d: &Vector, materials: &MaterialPair, root_tol: f64) -> f64 {
    first_order_root(t, u, d, materials, root_tol).unwrap_or(0.0)
}

/// Convex split `x = r x1 + (1 - r) x0` with `psi(x1) = psi(x0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySplit {
    pub r: f64,
    pub x1: Vector,
    pub x0: Vector,
}

fn check_inside(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair, tol: &Tolerances) -> Result<f64> {
    let p = psi(t, u, x, materials);
    if p > tol.membership.max(tol.root * psi_scale(u, x, materials)) {
        return Err(Error::OutsideC(p));
    }
    Ok(p)
}

/// Through-origin split of a point of `C`: `x0 = 0`, `x1` the boundary point
/// on the ray through `x`, `r = |x| / |x1|`.
pub fn boundary_decompose(
    t: f64,
    u: &Vector,
    x: &Vector,
    materials: &MaterialPair,
    tol: &Tolerances,
) -> Result<BoundarySplit> {
    let p = check_inside(t, u, x, materials, tol)?;
    let zero = Vector::zeros(x.len());
    let norm = x.norm();
    if norm == 0.0 || p.abs() <= tol.root * psi_scale(u, x, materials) {
        return Ok(BoundarySplit {
            r: 1.0,
            x1: x.clone(),
            x0: zero,
        });
    }
    let d = x / norm;
    let s = match first_order_root(t, u, &d, materials, tol.root) {
        Ok(s) => s,
        Err(_) => {
            return Ok(BoundarySplit {
                r: 1.0,
                x1: x.clone(),
                x0: zero,
            })
        }
    };
    Ok(BoundarySplit {
        r: (norm / s).min(1.0),
        x1: d * s,
        x0: zero,
    })
}

/// Split of the flux `Phi(x) = r Phi(x1) + (1 - r) Phi(x0)` with `x1`, `x0`
/// on the boundary of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSplit {
    pub r: f64,
    pub x1: Vector,
    pub x0: Vector,
    pub v1: Vector,
    pub v0: Vector,
}

/// Damped Newton for `Phi(x) = target`. Returns the iterate and its residual
/// norm when the residual drops below `accept`.
pub(crate) fn solve_flux(
    t: f64,
    u: &Vector,
    materials: &MaterialPair,
    target: &Vector,
    start: &Vector,
    max_iter: usize,
    accept: f64,
) -> Option<(Vector, f64)> {
    let fscale = (materials.alpha1() * u.norm().powi(3)).max(target.norm()).max(f64::MIN_POSITIVE);
    let floor = 1e-15 * fscale;
    let mut x = start.clone();
    let mut f = phi_map(t, u, &x, materials) - target;
    let mut fn2 = f.norm_squared();
    for _ in 0..max_iter {
        if fn2.sqrt() <= floor {
            break;
        }
        let j = phi_jacobian(t, u, &x, materials);
        let step = match j.lu().solve(&(-&f)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => break,
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = &x + &step * lambda;
            let fc = phi_map(t, u, &cand, materials) - target;
            let fc2 = fc.norm_squared();
            if fc2 < fn2 {
                x = cand;
                f = fc;
                fn2 = fc2;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let res = fn2.sqrt();
    (res <= accept).then_some((x, res))
}

/// Splits the flux of an interior point of `C` along the segment from
/// `Phi(0)` through `Phi(x)`: the preimage of `Phi(0) + l (Phi(x) - Phi(0))`
/// is tracked for `l >= 1` until it reaches the boundary of `C`; then
/// `r = 1 / l`, `x0 = 0`.
pub fn flux_decompose(
    t: f64,
    u: &Vector,
    x: &Vector,
    materials: &MaterialPair,
    tol: &Tolerances,
) -> Result<FluxSplit> {
    let p = check_inside(t, u, x, materials, tol)?;
    let n = x.len();
    let zero = Vector::zeros(n);
    let v0 = phi_map(t, u, &zero, materials);
    let vx = phi_map(t, u, x, materials);
    let pscale = psi_scale(u, x, materials);
    if p >= -tol.root * pscale || t <= 0.0 || t >= 1.0 {
        return Ok(FluxSplit {
            r: 1.0,
            x1: x.clone(),
            x0: zero,
            v1: vx,
            v0,
        });
    }
    let w = &vx - &v0;
    let fscale = (materials.alpha1() * u.norm().powi(3)).max(vx.norm());
    let accept = 1e-13 * fscale;

    let track = |from: &Vector, lam_from: f64, lam_to: f64| -> Option<Vector> {
        let j = phi_jacobian(t, u, from, materials);
        let tangent = j.lu().solve(&w)?;
        let pred = from + tangent * (lam_to - lam_from);
        let target = &v0 + &w * lam_to;
        solve_flux(t, u, materials, &target, &pred, 50, accept)
            .or_else(|| solve_flux(t, u, materials, &target, from, 50, accept))
            .map(|(y, _)| y)
    };

    let mut lam = 1.0;
    let mut inside = x.clone();
    let mut step = 0.25;
    let (mut lam_out, mut outside) = loop {
        if step < 1e-12 {
            return Err(Error::NoConvergence("flux continuation stalled".into()));
        }
        let next = lam + step;
        match track(&inside, lam, next) {
            None => step *= 0.5,
            Some(y) => {
                if psi(t, u, &y, materials) <= 0.0 {
                    lam = next;
                    inside = y;
                    step = (step * 1.5).min(1.0);
                    if lam > 1e12 {
                        return Err(Error::NoConvergence("flux continuation unbounded".into()));
                    }
                } else {
                    break (next, Some(y));
                }
            }
        }
    };

    // bisection on l between the last inside and first outside preimages; a
    // failed track means the target has left Phi(C)
    for _ in 0..200 {
        let pin = psi(t, u, &inside, materials);
        if pin.abs() <= 1e-15 * pscale || lam_out - lam <= 1e-16 * lam_out {
            break;
        }
        let mid = 0.5 * (lam + lam_out);
        if mid <= lam || mid >= lam_out {
            break;
        }
        match track(&inside, lam, mid) {
            Some(y) if psi(t, u, &y, materials) <= 0.0 => {
                lam = mid;
                inside = y;
            }
            y => {
                lam_out = mid;
                outside = y;
            }
        }
    }
    let p_in = psi(t, u, &inside, materials);
    let (lam, x1) = match outside {
        Some(y) if psi(t, u, &y, materials).abs() < p_in.abs() => (lam_out, y),
        _ => (lam, inside),
    };
    let miss = psi(t, u, &x1, materials).abs();
    if miss > 1e-9 * psi_scale(u, &x1, materials) {
        return Err(Error::NoConvergence(format!("flux split ended off the boundary (psi = {miss:e})")));
    }
    let v1 = phi_map(t, u, &x1, materials);
    Ok(FluxSplit {
        r: 1.0 / lam,
        x1,
        x0: zero,
        v1,
        v0,
    })
}

/// Laminate with volume fraction `t`, mean gradient `U` and mean flux
/// `Phi(x)` for a point `x` of `C`: first order when `x` is on the
/// boundary, otherwise second order built from [`flux_decompose`].
pub fn build_second_order_laminate(
    t: f64,
    u: &Vector,
    x: &Vector,
    materials: &MaterialPair,
    tol: &Tolerances,
) -> Result<Laminate> {
    crate::model::check_fraction(t)?;
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: x.len() });
    }
    check_inside(t, u, x, materials, tol)?;
    let target = Triplet::new(t, u.clone(), phi_map(t, u, x, materials))?;
    if t <= 0.0 || t >= 1.0 {
        let phase = if t >= 1.0 { Phase::One } else { Phase::Zero };
        return Ok(Laminate::dirac(phase, u.clone(), Law::Cubic, *materials).with_target(target));
    }
    let split = flux_decompose(t, u, x, materials, tol)?;
    let lam = if split.r >= 1.0 {
        Laminate::first_order(t, u, &split.x1, Law::Cubic, *materials)
    } else {
        Laminate::second_order(t, u, split.r, &split.x1, &split.x0, Law::Cubic, *materials)
    };
    Ok(lam.with_target(target))
}

/// Local minimizer of `psi` reached by damped (shifted) Newton descent from
/// the midpoint of the radial segment along `U`; an interior point of `C`.
pub fn psi_argmin(t: f64, u: &Vector, materials: &MaterialPair, root_tol: f64) -> Vector {
    let n = u.len();
    let Some(dir) = crate::linalg::unit(u) else {
        return Vector::zeros(n);
    };
    let s = radial_boundary(t, u, &dir, materials, root_tol);
    let mut x = &dir * (0.5 * s);
    let scale = psi_scale(u, &x, materials);
    let mut val = psi(t, u, &x, materials);
    for _ in 0..100 {
        let g = psi_gradient(t, u, &x, materials);
        if g.norm() <= 1e-13 * scale / u.norm().max(f64::MIN_POSITIVE) {
            break;
        }
        let mut h = psi_hessian(t, u, &x, materials);
        let e = min_sym_eigenvalue(&h);
        let floor = 1e-8 * scale / u.norm_squared().max(f64::MIN_POSITIVE);
        if e < floor {
            for i in 0..n {
                h[(i, i)] += floor - e;
            }
        }
        let Some(step) = h.cholesky().map(|c| c.solve(&(-&g))) else { break };
        let slope = g.dot(&step);
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..50 {
            let cand = &x + &step * lambda;
            let cv = psi(t, u, &cand, materials);
            if cv <= val + 1e-4 * lambda * slope {
                x = cand;
                val = cv;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::verify_laminate;
    use crate::model::{gamma, quartic_minimizer};

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_column_slice(&[a, b])
    }

    fn mats() -> MaterialPair {
        MaterialPair::new(2.0, 1.0).unwrap()
    }

    /// Collinear root of `alpha0 (1 + t s)^3 = alpha1 (1 - (1-t) s)^3`.
    fn collinear_root(t: f64, m: &MaterialPair) -> f64 {
        let (c1, c0) = (m.alpha1().cbrt(), m.alpha0().cbrt());
        (c1 - c0) / (t * c0 + (1.0 - t) * c1)
    }

    #[test]
    fn psi_vanishes_at_origin() {
        let m = mats();
        assert_eq!(psi(0.3, &v2(1.0, 2.0), &v2(0.0, 0.0), &m), 0.0);
    }

    #[test]
    fn psi_with_zero_gradient_is_quartic() {
        let m = mats();
        let x = v2(0.7, -0.2);
        let n = x.norm_squared();
        let expected = (1.0 + 2.0) / 8.0 * n * n;
        assert!((psi(0.5, &v2(0.0, 0.0), &x, &m) - expected).abs() < 1e-15);
    }

    #[test]
    fn collinear_root_by_bisection() {
        let m = mats();
        let u = v2(1.0, 0.0);
        let s = first_order_root(0.5, &u, &v2(1.0, 0.0), &m, 1e-12).unwrap();
        assert!((s - 0.230_03).abs() < 1e-5);
        assert!((s - collinear_root(0.5, &m)).abs() < 1e-11);
        // (1 - s/2) = 2^{-1/3} (1 + s/2)
        assert!(((1.0 - s / 2.0) - 2f64.powf(-1.0 / 3.0) * (1.0 + s / 2.0)).abs() < 1e-12);
        assert!(psi(0.5, &u, &v2(s, 0.0), &m).abs() < 1e-11);
    }

    #[test]
    fn collinear_root_is_the_quartic_minimizer() {
        let m = MaterialPair::new(8.0, 1.0).unwrap();
        let u = v2(1.0, 0.0);
        let s = first_order_root(0.5, &u, &v2(1.0, 0.0), &m, 1e-13).unwrap();
        let q = quartic_minimizer(0.5, &u, &m);
        assert!((s - q[0]).abs() < 1e-12);
        let v = phi_map(0.5, &u, &v2(s, 0.0), &m);
        assert!((v[0] - gamma(0.5, &m)).abs() < 1e-11);
    }

    #[test]
    fn no_root_against_the_gradient() {
        let m = mats();
        let u = v2(1.0, 0.0);
        assert_eq!(first_order_root(0.5, &u, &v2(-1.0, 0.0), &m, 1e-12), Err(Error::NoPositiveRoot));
        assert_eq!(first_order_root(0.5, &u, &v2(0.0, 1.0), &m, 1e-12), Err(Error::NoPositiveRoot));
        assert_eq!(first_order_root(0.5, &v2(0.0, 0.0), &v2(1.0, 0.0), &m, 1e-12), Err(Error::NoPositiveRoot));
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let m = MaterialPair::new(3.0, 0.7).unwrap();
        let u = Vector::from_column_slice(&[0.4, -0.6, 0.9]);
        let x = Vector::from_column_slice(&[0.2, 0.5, -0.3]);
        let t = 0.35;
        let h = psi_hessian(t, &u, &x, &m);
        let step = 1e-4;
        for i in 0..3 {
            for j in 0..3 {
                let mut ei = Vector::zeros(3);
                let mut ej = Vector::zeros(3);
                ei[i] = step;
                ej[j] = step;
                let f = |a: &Vector| psi(t, &u, &(&x + a), &m);
                let fd = (f(&(&ei + &ej)) - f(&(&ei - &ej)) - f(&(&ej - &ei)) + f(&(-&ei - &ej))) / (4.0 * step * step);
                assert!((fd - h[(i, j)]).abs() < 1e-5, "{i}{j}: {fd} vs {}", h[(i, j)]);
            }
        }
        let g = psi_gradient(t, &u, &x, &m);
        for i in 0..3 {
            let mut e = Vector::zeros(3);
            e[i] = 1e-6;
            let fd = (psi(t, &u, &(&x + &e), &m) - psi(t, &u, &(&x - &e), &m)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn hessian_vanishes_at_double_origin() {
        let m = mats();
        let z = v2(0.0, 0.0);
        assert_eq!(psi_hessian_mineig(0.5, &z, &z, &m), 0.0);
    }

    #[test]
    fn phi_examples() {
        let m = mats();
        let u = v2(0.6, 0.8);
        let v = phi_map(0.3, &u, &v2(0.0, 0.0), &m);
        assert!((&v - &u * (0.3 * 2.0 + 0.7)).norm() < 1e-15);
        let v = phi_map(1.0, &u, &v2(0.4, -1.0), &m);
        assert!((&v - &u * 2.0).norm() < 1e-15);
    }

    #[test]
    fn phi_jacobian_matches_differences() {
        let m = MaterialPair::new(5.0, 1.5).unwrap();
        let u = v2(0.9, -0.3);
        let x = v2(0.25, 0.4);
        let j = phi_jacobian(0.4, &u, &x, &m);
        for k in 0..2 {
            let mut e = v2(0.0, 0.0);
            e[k] = 1e-6;
            let col = (phi_map(0.4, &u, &(&x + &e), &m) - phi_map(0.4, &u, &(&x - &e), &m)) / 2e-6;
            for i in 0..2 {
                assert!((col[i] - j[(i, k)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn boundary_decompose_examples() {
        let m = mats();
        let tol = Tolerances::default();
        let u = v2(1.0, 0.0);
        let s = collinear_root(0.5, &m);
        let split = boundary_decompose(0.5, &u, &v2(0.5 * s, 0.0), &m, &tol).unwrap();
        assert!((split.r - 0.5).abs() < 1e-11);
        assert!((split.x1[0] - s).abs() < 1e-11);
        assert_eq!(split.x0, v2(0.0, 0.0));

        let on = boundary_decompose(0.5, &u, &v2(s, 0.0), &m, &tol).unwrap();
        assert_eq!(on.r, 1.0);
        let zero = boundary_decompose(0.5, &u, &v2(0.0, 0.0), &m, &tol).unwrap();
        assert_eq!((zero.r, zero.x1.clone()), (1.0, v2(0.0, 0.0)));

        assert!(matches!(
            boundary_decompose(0.5, &u, &v2(2.0 * s, 0.0), &m, &tol),
            Err(Error::OutsideC(_))
        ));
    }

    #[test]
    fn flux_split_reproduces_phi() {
        let m = MaterialPair::new(8.0, 1.0).unwrap();
        let tol = Tolerances::default();
        let u = v2(1.0, 0.0);
        for x in [v2(0.3, 0.0), v2(0.2, 0.1), v2(0.05, -0.02)] {
            let split = flux_decompose(0.5, &u, &x, &m, &tol).unwrap();
            assert!(split.r > 0.0 && split.r < 1.0);
            assert!(psi(0.5, &u, &split.x1, &m).abs() < 1e-12);
            let mean = &split.v1 * split.r + &split.v0 * (1.0 - split.r);
            assert!((mean - phi_map(0.5, &u, &x, &m)).norm() < 1e-11);
        }
    }

    #[test]
    fn collinear_split_ends_at_the_tangency_point() {
        // the flux ray leaves Phi(C) where it touches the moment bound
        let m = MaterialPair::new(10.678790409992123, 1.1474760644663544).unwrap();
        let tol = Tolerances::default();
        let t = 0.05415331130420633;
        let u = v2(-0.7936811989706759, 0.04876616205085072);
        let d = u.normalize();
        let rho = radial_boundary(t, &u, &d, &m, 1e-13);
        let x = &d * (0.36786696549028297 * rho);
        let split = flux_decompose(t, &u, &x, &m, &tol).unwrap();
        assert!((split.x1.norm() - rho).abs() < 1e-9 * rho);
        let lam = build_second_order_laminate(t, &u, &x, &m, &tol).unwrap();
        let report = verify_laminate(&lam, &tol);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn second_order_laminate_passes_oracles() {
        let m = mats();
        let tol = Tolerances::default();
        let u = v2(1.0, 0.0);
        let lam = build_second_order_laminate(0.5, &u, &v2(0.1, 0.02), &m, &tol).unwrap();
        assert_eq!(lam.atoms.len(), 4);
        let report = verify_laminate(&lam, &tol);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn boundary_and_origin_give_first_order() {
        let m = mats();
        let tol = Tolerances::default();
        let u = v2(1.0, 0.0);
        let s = first_order_root(0.5, &u, &v2(1.0, 0.0), &m, 1e-13).unwrap();
        let lam = build_second_order_laminate(0.5, &u, &v2(s, 0.0), &m, &tol).unwrap();
        assert_eq!(lam.atoms.len(), 2);
        assert!(verify_laminate(&lam, &tol).pass);

        let lam = build_second_order_laminate(0.5, &u, &v2(0.0, 0.0), &m, &tol).unwrap();
        assert_eq!(lam.atoms.len(), 2);
        assert!(lam.atoms.iter().all(|a| a.u == u));
        let report = verify_laminate(&lam, &tol);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn outside_point_is_rejected() {
        let m = mats();
        let err = build_second_order_laminate(0.5, &v2(1.0, 0.0), &v2(-0.3, 0.0), &m, &Tolerances::default());
        assert!(matches!(err, Err(Error::OutsideC(_))));
    }

    #[test]
    fn argmin_is_interior() {
        let m = MaterialPair::new(8.0, 1.0).unwrap();
        let u = v2(0.6, 0.8);
        let x = psi_argmin(0.4, &u, &m, 1e-12);
        assert!(psi(0.4, &u, &x, &m) < 0.0);
        assert!(psi_gradient(0.4, &u, &x, &m).norm() < 1e-10);
    }
}
