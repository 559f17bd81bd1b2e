use nlcond_core::laminate::{divcurl_check, jump_check, laminate_moments, verify_laminate};
use nlcond_core::necessity::{hankel_matrix, necessary_margin};
use nlcond_core::scan::{scan_region, ScanWindow};
use nlcond_core::sufficiency::{
    build_second_order_laminate, phi_jacobian, phi_map, psi, radial_boundary, ReachOptions, ReachabilityOracle,
};
use nlcond_core::{gamma, lambda_map, quartic_energy, quartic_minimizer, MaterialPair, Phase, Tolerances, Triplet, Vector};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Setup {
    t: f64,
    u: Vector,
    m: MaterialPair,
}

fn setup(dim: usize) -> impl Strategy<Value = Setup> {
    (
        0.05..0.95f64,
        prop::collection::vec(-1.0..1.0f64, dim),
        0.5..2.0f64,
        1.5..10.0f64,
    )
        .prop_filter("gradient away from zero", |(_, u, _, _)| u.iter().map(|x| x * x).sum::<f64>() > 0.01)
        .prop_map(|(t, u, a0, ratio)| Setup {
            t,
            u: Vector::from_vec(u),
            m: MaterialPair::new(a0 * ratio, a0).unwrap(),
        })
}

/// Point `lambda rho(d) d` with `d` at angle `theta` from `U` (planar).
fn interior(s: &Setup, theta: f64, lambda: f64) -> Vector {
    let uhat = s.u.normalize();
    let e = Vector::from_column_slice(&[-uhat[1], uhat[0]]);
    let d = &uhat * theta.cos() + e * theta.sin();
    let rho = radial_boundary(s.t, &s.u, &d, &s.m, 1e-13);
    d * (lambda * rho)
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gamma_is_bracketed_by_the_phases(t in 0.0..=1.0f64, a0 in 0.1..5.0f64, ratio in 1.01..20.0f64) {
        let m = MaterialPair::new(a0 * ratio, a0).unwrap();
        let g = gamma(t, &m);
        prop_assert!(g >= a0 * (1.0 - 1e-14) && g <= a0 * ratio * (1.0 + 1e-14));
    }

    #[test]
    fn quartic_minimizer_beats_perturbations(s in setup(2), dx in prop::collection::vec(-0.5..0.5f64, 2)) {
        let q = quartic_minimizer(s.t, &s.u, &s.m);
        let w = quartic_energy(s.t, &s.u, q.vector(), &s.m);
        let other = q.vector() + Vector::from_vec(dx);
        prop_assert!(quartic_energy(s.t, &s.u, &other, &s.m) >= w * (1.0 - 1e-12));
    }

    #[test]
    fn maps_are_homogeneous(s in setup(3), x in prop::collection::vec(-1.0..1.0f64, 3), k in 0.1..3.0f64) {
        let x = Vector::from_vec(x);
        let (ku, kx) = (&s.u * k, &x * k);
        let v = phi_map(s.t, &s.u, &x, &s.m);
        let kv = phi_map(s.t, &ku, &kx, &s.m);
        prop_assert!((kv - v * k.powi(3)).norm() <= 1e-12 * k.powi(3) * (1.0 + s.m.alpha1() * 8.0));
        let p = psi(s.t, &s.u, &x, &s.m);
        let kp = psi(s.t, &ku, &kx, &s.m);
        prop_assert!((kp - p * k.powi(4)).abs() <= 1e-12 * k.powi(4) * (1.0 + s.m.alpha1() * 16.0));
    }

    #[test]
    fn origin_lies_on_the_zero_level_set(s in setup(2)) {
        prop_assert_eq!(psi(s.t, &s.u, &Vector::zeros(2), &s.m), 0.0);
    }

    #[test]
    fn midpoints_of_c_stay_in_c(
        s in setup(2),
        a in (-HALF_PI..HALF_PI, 0.0..=1.0f64),
        b in (-HALF_PI..HALF_PI, 0.0..=1.0f64),
    ) {
        let x = interior(&s, a.0, a.1);
        let y = interior(&s, b.0, b.1);
        let mid = (&x + &y) * 0.5;
        let scale = s.m.alpha1() * s.u.norm().powi(4);
        prop_assert!(psi(s.t, &s.u, &mid, &s.m) <= 1e-12 * scale);
    }

    #[test]
    fn interior_images_satisfy_the_moment_bound(s in setup(2), theta in -HALF_PI..HALF_PI, lambda in 0.0..=1.0f64) {
        let x = interior(&s, theta, lambda);
        let tr = Triplet::new(s.t, s.u.clone(), phi_map(s.t, &s.u, &x, &s.m)).unwrap();
        prop_assert!(necessary_margin(&tr, &s.m) >= -1e-9);
    }

    #[test]
    fn phi_jacobian_matches_differences(s in setup(2), x in prop::collection::vec(-0.5..0.5f64, 2)) {
        let x = Vector::from_vec(x);
        let j = phi_jacobian(s.t, &s.u, &x, &s.m);
        for k in 0..2 {
            let mut e = Vector::zeros(2);
            e[k] = 1e-5;
            let col = (phi_map(s.t, &s.u, &(&x + &e), &s.m) - phi_map(s.t, &s.u, &(&x - &e), &s.m)) / 2e-5;
            for i in 0..2 {
                prop_assert!((col[i] - j[(i, k)]).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn built_laminates_reproduce_their_triplet(s in setup(2), theta in -1.5..1.5f64, lambda in 0.0..=1.0f64) {
        let tol = Tolerances::default();
        let x = interior(&s, theta, lambda);
        let lam = build_second_order_laminate(s.t, &s.u, &x, &s.m, &tol).unwrap();
        let report = verify_laminate(&lam, &tol);
        prop_assert!(report.pass, "{:?}", report);
        let mo = laminate_moments(&lam, &tol).unwrap();
        prop_assert!((mo.t - s.t).abs() <= 1e-12);
        prop_assert!((&mo.mean_u - &s.u).norm() <= 1e-10);
        let v = phi_map(s.t, &s.u, &x, &s.m);
        prop_assert!((&mo.mean_v - &v).norm() <= 1e-9 * v.norm().max(1.0));
        prop_assert!(divcurl_check(&lam) <= 1e-9);
        prop_assert!(jump_check(&lam).iter().all(|j| j.max() <= 1e-10));
    }

    #[test]
    fn hankel_deficiency_is_psd(
        atoms in prop::collection::vec((0.01..1.0f64, prop::collection::vec(-2.0..2.0f64, 3)), 1..8),
    ) {
        let total: f64 = atoms.iter().map(|(w, _)| w).sum();
        let mut measure: Vec<(f64, Vector)> = atoms.into_iter().map(|(w, u)| (w / total, Vector::from_vec(u))).collect();
        let sum: f64 = measure.iter().map(|(w, _)| w).sum();
        measure[0].0 += 1.0 - sum;
        let h = hankel_matrix(&measure, 1e-12).unwrap();
        prop_assert!(h.min_eigenvalue() >= -1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reachability_is_scale_consistent(s in setup(2), theta in -1.2..1.2f64, lambda in 0.1..0.9f64, k in 0.3..3.0f64) {
        let x = interior(&s, theta, lambda);
        let v = phi_map(s.t, &s.u, &x, &s.m);
        let base = ReachabilityOracle::new(s.t, &s.u, &s.m, ReachOptions::default()).unwrap().query(&v).unwrap();
        let ku = &s.u * k;
        let scaled = ReachabilityOracle::new(s.t, &ku, &s.m, ReachOptions::default()).unwrap().query(&(&v * k.powi(3))).unwrap();
        prop_assert!(base.reachable && scaled.reachable);
        let xb = Vector::from_vec(base.x_solution.unwrap());
        let xs = Vector::from_vec(scaled.x_solution.unwrap());
        prop_assert!((xs - xb * k).norm() <= 1e-7 * k.max(1.0));
    }
}

#[test]
fn pure_phase_triplets_sit_on_the_bound() {
    let m = MaterialPair::new(3.0, 0.5).unwrap();
    let u = Vector::from_column_slice(&[0.3, -0.9, 0.2]);
    for (t, phase) in [(1.0, Phase::One), (0.0, Phase::Zero)] {
        let tr = Triplet::new(t, u.clone(), lambda_map(phase, &u, &m)).unwrap();
        assert!(necessary_margin(&tr, &m).abs() < 1e-14);
    }
}

#[test]
fn scans_are_deterministic_across_worker_counts() {
    let m = MaterialPair::new(8.0, 1.0).unwrap();
    let u = Vector::from_column_slice(&[1.0, 0.0]);
    let window = ScanWindow::new(vec![0.0, -3.0], vec![6.0, 3.0]).unwrap();
    let opts = ReachOptions::default();
    let tol = Tolerances::default();
    let one = scan_region(0.5, &u, &m, &window, 30, Some(1), &opts, &tol).unwrap();
    let four = scan_region(0.5, &u, &m, &window, 30, Some(4), &opts, &tol).unwrap();
    assert_eq!(one, four);
    let again = scan_region(0.5, &u, &m, &window, 30, Some(3), &opts, &tol).unwrap();
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
}

#[test]
fn three_dimensional_scan_respects_inclusion() {
    let m = MaterialPair::new(8.0, 1.0).unwrap();
    let u = Vector::from_column_slice(&[1.0, 0.0, 0.0]);
    let window = ScanWindow::new(vec![0.0, -2.0, -2.0], vec![6.0, 2.0, 2.0]).unwrap();
    let rep = scan_region(0.5, &u, &m, &window, 9, None, &ReachOptions::default(), &Tolerances::default()).unwrap();
    assert_eq!(rep.cells.len(), 729);
    assert_eq!(rep.summary.inclusion_violations, 0);
    assert!(rep.summary.necessary_only > 0);
}
