//! The linear isotropic mixture (`v = alpha u`), where the lamination set is
//! known exactly. Used as a reference for the structure of the nonlinear
//! pipeline.

use crate::error::{Error, Result};
use crate::laminate::Laminate;
use crate::model::{phase_means, Law, MaterialPair, Triplet};
use crate::Vector;

/// `t alpha1 (U - (1-t) x) + (1-t) alpha0 (U + t x)`.
pub fn linear_flux(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> Vector {
    let (u1, u0) = phase_means(t, u, x);
    u1 * (t * materials.alpha1()) + u0 * ((1.0 - t) * materials.alpha0())
}

fn ball_coefficient(t: f64, materials: &MaterialPair) -> f64 {
    let (a1, a0) = (materials.alpha1(), materials.alpha0());
    ((1.0 - t) * a1 + t * a0) / (a1 - a0)
}

/// `U . x - ((1-t) alpha1 + t alpha0) / (alpha1 - alpha0) |x|^2`; the
/// direction `x` is feasible iff this is nonnegative.
pub fn linear_condition_margin(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> f64 {
    u.dot(x) - ball_coefficient(t, materials) * x.norm_squared()
}

/// `U . V - alpha1 alpha0 / ((1-t) alpha1 + t alpha0) |U|^2` (harmonic bound).
pub fn linear_necessary_margin(t: f64, u: &Vector, v: &Vector, materials: &MaterialPair) -> f64 {
    let (a1, a0) = (materials.alpha1(), materials.alpha0());
    u.dot(v) - a1 * a0 / ((1.0 - t) * a1 + t * a0) * u.norm_squared()
}

/// Minimizer of the quadratic energy `t alpha1 |U1|^2 + (1-t) alpha0 |U0|^2`.
pub fn linear_minimizer(t: f64, u: &Vector, materials: &MaterialPair) -> Vector {
    let (a1, a0) = (materials.alpha1(), materials.alpha0());
    u * ((a1 - a0) / ((1.0 - t) * a1 + t * a0))
}

/// `(U1 - U0) . (alpha1 U1 - alpha0 U0)`, which vanishes exactly on the
/// boundary of the feasible ball.
pub fn linear_jump(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> f64 {
    let (u1, u0) = phase_means(t, u, x);
    (&u1 - &u0).dot(&(u1 * materials.alpha1() - u0 * materials.alpha0()))
}

/// Laminate realizing `(t, U, linear_flux(x))`.
///
/// On the boundary of the feasible ball this is a first-order laminate with
/// normal `x`. Inside, `x` is split through the origin as
/// `x = r (x / r) + (1 - r) 0` with `x / r` on the boundary.
pub fn linear_build_laminate(
    t: f64,
    u: &Vector,
    x: &Vector,
    materials: &MaterialPair,
    boundary_tol: f64,
) -> Result<Laminate> {
    let margin = linear_condition_margin(t, u, x, materials);
    let scale = u.norm_squared().max(x.norm_squared()).max(f64::MIN_POSITIVE);
    if margin < -boundary_tol * scale {
        return Err(Error::InfeasibleDirection { margin });
    }
    let target = Triplet::new(t, u.clone(), linear_flux(t, u, x, materials))?;
    let lam = if margin <= boundary_tol * scale {
        Laminate::first_order(t, u, x, Law::Linear, *materials)
    } else {
        // ray scale where U.(s x) = k s^2 |x|^2
        let s = u.dot(x) / (ball_coefficient(t, materials) * x.norm_squared());
        let x1 = x * s;
        let x0 = Vector::zeros(x.len());
        Laminate::second_order(t, u, 1.0 / s, &x1, &x0, Law::Linear, *materials)
    };
    Ok(lam.with_target(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::{jump_check, verify_laminate};
    use crate::tolerances::Tolerances;

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_column_slice(&[a, b])
    }

    fn mats() -> MaterialPair {
        MaterialPair::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn flux_examples() {
        let m = mats();
        let u = v2(1.0, 0.0);
        assert_eq!(linear_flux(0.5, &u, &v2(0.0, 0.0), &m), v2(1.5, 0.0));
        assert_eq!(linear_flux(1.0, &u, &v2(0.3, 0.2), &m), v2(2.0, 0.0));
        let v = linear_flux(0.5, &u, &v2(2.0 / 3.0, 0.0), &m);
        assert!((v[0] - 4.0 / 3.0).abs() < 1e-15 && v[1] == 0.0);
    }

    #[test]
    fn condition_margin_examples() {
        let m = mats();
        let u = v2(1.0, 0.0);
        assert_eq!(linear_condition_margin(0.5, &u, &v2(0.0, 0.0), &m), 0.0);
        assert!(linear_condition_margin(0.5, &u, &v2(2.0 / 3.0, 0.0), &m).abs() < 1e-15);
        assert!((linear_condition_margin(0.5, &u, &v2(1.0 / 3.0, 0.0), &m) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn necessary_margin_examples() {
        let m = mats();
        let u = v2(0.6, -0.8);
        assert!(linear_necessary_margin(0.0, &u, &(&u * 1.0), &m).abs() < 1e-15);
        assert!(linear_necessary_margin(1.0, &u, &(&u * 2.0), &m).abs() < 1e-15);
        assert!(linear_necessary_margin(0.5, &v2(1.0, 0.0), &v2(4.0 / 3.0, 0.0), &m).abs() < 1e-15);
    }

    #[test]
    fn jump_is_a_multiple_of_the_margin() {
        let m = MaterialPair::new(3.5, 0.4).unwrap();
        let u = v2(0.7, 0.2);
        for x in [v2(0.1, 0.3), v2(-0.5, 2.0), v2(1.2, -0.4)] {
            let j = linear_jump(0.35, &u, &x, &m);
            let g = linear_condition_margin(0.35, &u, &x, &m);
            assert!((j + (3.5 - 0.4) * g).abs() < 1e-13);
        }
    }

    #[test]
    fn boundary_direction_gives_first_order() {
        let m = mats();
        let u = v2(1.0, 0.0);
        let lam = linear_build_laminate(0.5, &u, &v2(2.0 / 3.0, 0.0), &m, 1e-12).unwrap();
        assert_eq!(lam.atoms.len(), 2);
        assert!(verify_laminate(&lam, &Tolerances::default()).pass);
    }

    #[test]
    fn zero_direction_is_degenerate_first_order() {
        let m = mats();
        let u = v2(1.0, 0.5);
        let lam = linear_build_laminate(0.5, &u, &v2(0.0, 0.0), &m, 1e-12).unwrap();
        assert_eq!(lam.atoms.len(), 2);
        assert!(lam.atoms.iter().all(|a| a.u == u));
        let report = verify_laminate(&lam, &Tolerances::default());
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn interior_direction_gives_second_order() {
        let m = mats();
        let u = v2(1.0, 0.0);
        let x = v2(1.0 / 3.0, 0.0);
        let lam = linear_build_laminate(0.5, &u, &x, &m, 1e-12).unwrap();
        assert_eq!(lam.atoms.len(), 4);
        let report = verify_laminate(&lam, &Tolerances::default());
        assert!(report.pass, "{report:?}");
        assert!(jump_check(&lam).iter().all(|j| j.max() < 1e-12));
    }

    #[test]
    fn infeasible_direction_is_rejected() {
        let m = mats();
        let err = linear_build_laminate(0.5, &v2(1.0, 0.0), &v2(1.0, 0.0), &m, 1e-12).unwrap_err();
        assert!(matches!(err, Error::InfeasibleDirection { .. }));
    }
}
