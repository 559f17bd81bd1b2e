//! Necessary conditions: the moment bound `gamma |U|^4 <= U . V`, the Hankel
//! moment inequality and explicit moment certificates.
//!
//! A certificate fixes, for each phase `i`, the block
//!
//! ```text
//! [ Q11_i    Q12_i ]      [ U_i ] [ U_i ]^T
//! [ Q12_i^T  Q22_i ]  >=  [ s_i ] [ s_i ]     ,   s_i >= |U_i|^2
//! ```
//!
//! together with the averaging constraints `U = t U_1 + (1-t) U_0`,
//! `V = t a1 Q12_1 + (1-t) a0 Q12_0` and `U.V = t a1 Q22_1 + (1-t) a0 Q22_0`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::min_sym_eigenvalue;
use crate::model::{gamma, phase_means, quartic_energy, quartic_minimizer, MaterialPair, Phase, Triplet};
use crate::tolerances::Tolerances;
use crate::Vector;

/// `U . V - gamma(t) |U|^4`; nonnegative for every weak limit.
pub fn necessary_margin(triplet: &Triplet, materials: &MaterialPair) -> f64 {
    let u = triplet.gradient();
    let n = u.norm_squared();
    u.dot(triplet.flux()) - gamma(triplet.t(), materials) * n * n
}

/// `U . V - W(x)`: nonnegative iff `x` lies in the quartic ellipsoid of
/// admissible moment differences.
pub fn direction_region_margin(triplet: &Triplet, x: &Vector, materials: &MaterialPair) -> f64 {
    triplet.gradient().dot(triplet.flux()) - quartic_energy(triplet.t(), triplet.gradient(), x, materials)
}

/// The two strict moment inequalities with `c` eliminated. Same closed form
/// as [`direction_region_margin`].
pub fn eliminate_c_margin(triplet: &Triplet, a: &Vector, materials: &MaterialPair) -> f64 {
    let t = triplet.t();
    let uv = triplet.gradient().dot(triplet.flux());
    let (u1, u0) = phase_means(t, triplet.gradient(), a);
    let n1 = u1.norm_squared();
    let n0 = u0.norm_squared();
    // t * (alpha1 Q22_1) + (1-t) * (alpha0 Q22_0) is free of c
    uv - (t * materials.alpha1() * n1 * n1 + (1.0 - t) * materials.alpha0() * n0 * n0)
}

/// `(1, u, |u|^2)`.
pub fn moment_vector(u: &Vector) -> Vector {
    let n = u.len();
    let mut phi = Vector::zeros(n + 2);
    phi[0] = 1.0;
    phi.rows_mut(1, n).copy_from(u);
    phi[n + 1] = u.norm_squared();
    phi
}

/// First moments and Hankel matrix of a discrete measure.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMoments {
    pub moments: Vector,
    pub hankel: DMatrix<f64>,
}

impl HankelMoments {
    /// `A - a a^T`, positive semidefinite for every probability measure.
    pub fn deficiency(&self) -> DMatrix<f64> {
        &self.hankel - &self.moments * self.moments.transpose()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_sym_eigenvalue(&self.deficiency())
    }
}

/// Moment vector and Hankel matrix of `sum_k w_k delta_{u_k}`.
pub fn hankel_matrix(measure: &[(f64, Vector)], weight_tol: f64) -> Result<HankelMoments> {
    let first = measure.first().ok_or(Error::EmptyMeasure)?;
    let n = first.1.len();
    let total: f64 = measure.iter().map(|(w, _)| *w).sum();
    if (total - 1.0).abs() > weight_tol || measure.iter().any(|(w, _)| *w < 0.0) {
        return Err(Error::WeightsNotNormalized(total));
    }
    let mut moments = Vector::zeros(n + 2);
    let mut hankel = DMatrix::zeros(n + 2, n + 2);
    for (w, u) in measure {
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        let phi = moment_vector(u);
        moments += &phi * *w;
        hankel += (&phi * phi.transpose()) * *w;
    }
    Ok(HankelMoments { moments, hankel })
}

/// Moment data of one phase in a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBlock {
    #[serde(serialize_with = "ser_matrix")]
    pub q11: DMatrix<f64>,
    #[serde(serialize_with = "ser_vector")]
    pub q12: Vector,
    pub q22: f64,
    /// First moment `U_i`.
    #[serde(serialize_with = "ser_vector")]
    pub mean: Vector,
    /// Second scalar moment `s_i = E|u|^2`.
    pub second_moment: f64,
    /// Off-diagonal part of the deficiency block.
    #[serde(serialize_with = "ser_vector")]
    pub offset: Vector,
    /// Scalar slack `Q22_i - s_i^2`.
    pub sigma: f64,
    /// Multiple of the identity in `Q11_i - U_i U_i^T`.
    pub gamma: f64,
}

impl PhaseBlock {
    /// `[[Q11, Q12], [Q12^T, Q22]] - (U_i, s_i)(U_i, s_i)^T`.
    pub fn deficiency(&self) -> DMatrix<f64> {
        let n = self.mean.len();
        let mut block = DMatrix::zeros(n + 1, n + 1);
        block.view_mut((0, 0), (n, n)).copy_from(&self.q11);
        block.view_mut((0, n), (n, 1)).copy_from(&self.q12);
        block.view_mut((n, 0), (1, n)).copy_from(&self.q12.transpose());
        block[(n, n)] = self.q22;
        let mut m = Vector::zeros(n + 1);
        m.rows_mut(0, n).copy_from(&self.mean);
        m[n] = self.second_moment;
        block - &m * m.transpose()
    }
}

fn ser_vector<S: serde::Serializer>(v: &Vector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    s.collect_seq(rows)
}

/// Explicit solution of the relaxed moment problem for one triplet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCertificate {
    pub phase1: PhaseBlock,
    pub phase0: PhaseBlock,
    /// Split of `U`: `U_1 = U - (1-t) a`, `U_0 = U + t a`.
    #[serde(serialize_with = "ser_vector")]
    pub a: Vector,
    /// Split of `V`: `a1 Q12_1 = V - (1-t) b`, `a0 Q12_0 = V + t b`.
    #[serde(serialize_with = "ser_vector")]
    pub b: Vector,
    /// Split of `U.V`: `a1 Q22_1 = U.V - (1-t) c`, `a0 Q22_0 = U.V + t c`.
    pub c: f64,
}

impl MomentCertificate {
    pub fn block(&self, phase: Phase) -> &PhaseBlock {
        match phase {
            Phase::One => &self.phase1,
            Phase::Zero => &self.phase0,
        }
    }
}

/// The `c` that makes `alpha_i * slack_i` equal for both phases, where
/// `slack_i = Q22_i - |U_i|^4`. Both then equal `U.V - W(a)`.
pub fn balanced_c(triplet: &Triplet, a: &Vector, materials: &MaterialPair) -> f64 {
    let (u1, u0) = phase_means(triplet.t(), triplet.gradient(), a);
    let n1 = u1.norm_squared();
    let n0 = u0.norm_squared();
    materials.alpha0() * n0 * n0 - materials.alpha1() * n1 * n1
}

/// Certificate with `a` at the quartic minimizer and balanced `c`.
pub fn default_certificate(triplet: &Triplet, materials: &MaterialPair, tol: &Tolerances) -> Result<MomentCertificate> {
    let a = quartic_minimizer(triplet.t(), triplet.gradient(), materials).into_vector();
    let c = balanced_c(triplet, &a, materials);
    build_certificate(triplet, materials, &a, c, tol)
}

/// Builds the certificate for a witness `(a, c)` satisfying
/// `Q22_1 = (U.V - (1-t) c) / a1 >= |U - (1-t) a|^4` and
/// `Q22_0 = (U.V + t c) / a0 >= |U + t a|^4`.
///
/// Each `s_i` sits at the square root of the midpoint between `|U_i|^4` and
/// `Q22_i`. The flux residual is shared equally as `u_1 = u_0`.
pub fn build_certificate(
    triplet: &Triplet,
    materials: &MaterialPair,
    a: &Vector,
    c: f64,
    tol: &Tolerances,
) -> Result<MomentCertificate> {
    let t = triplet.t();
    let (u, v) = (triplet.gradient(), triplet.flux());
    if a.len() != u.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: a.len() });
    }
    let (a1, a0) = (materials.alpha1(), materials.alpha0());
    let uv = u.dot(v);
    let (mean1, mean0) = phase_means(t, u, a);
    let q22_1 = (uv - (1.0 - t) * c) / a1;
    let q22_0 = (uv + t * c) / a0;

    let scale = u.norm_squared().powi(2).max(uv.abs()).max(mean1.norm_squared().powi(2)).max(1.0);
    let slack_of = |q22: f64, mean: &Vector, phase: Phase| -> Result<f64> {
        let n = mean.norm_squared();
        let slack = q22 - n * n;
        if slack < -tol.equality * scale {
            return Err(Error::InfeasibleWitness { phase, slack });
        }
        Ok(slack.max(0.0))
    };
    let slack1 = slack_of(q22_1, &mean1, Phase::One)?;
    let slack0 = slack_of(q22_0, &mean0, Phase::Zero)?;

    let s_of = |mean: &Vector, slack: f64| {
        let n = mean.norm_squared();
        (n * n + 0.5 * slack).sqrt().max(n)
    };
    let s1 = s_of(&mean1, slack1);
    let s0 = s_of(&mean0, slack0);
    let sigma1 = (q22_1 - s1 * s1).max(0.0);
    let sigma0 = (q22_0 - s0 * s0).max(0.0);

    // V = (1-t) a0 [s0 U_0 + u_0] + t a1 [s1 U_1 + u_1]
    let residual = v - &mean0 * ((1.0 - t) * a0 * s0) - &mean1 * (t * a1 * s1);
    let offset = &residual / ((1.0 - t) * a0 + t * a1);

    let flux_scale = v.norm().max(u.norm().powi(3)).max(1.0);
    let gamma_of = |sigma: f64| -> Result<f64> {
        let on = offset.norm_squared();
        if on == 0.0 {
            return Ok(1.0);
        }
        if sigma > 0.0 {
            return Ok(on / sigma);
        }
        if offset.norm() <= tol.equality * flux_scale {
            return Ok(1.0);
        }
        Err(Error::BoundaryUnattainable(residual.norm()))
    };
    let gamma1 = gamma_of(sigma1)?;
    let gamma0 = gamma_of(sigma0)?;

    let q12_1 = &mean1 * s1 + &offset;
    let q12_0 = &mean0 * s0 + &offset;
    // b from whichever split has the larger coefficient
    let b = if 1.0 - t >= t {
        (v - &q12_1 * a1) / (1.0 - t)
    } else {
        (&q12_0 * a0 - v) / t
    };

    let block = |mean: Vector, s: f64, q12: Vector, q22: f64, sigma: f64, gamma: f64| {
        let n = mean.len();
        let q11 = &mean * mean.transpose() + DMatrix::identity(n, n) * gamma;
        PhaseBlock {
            q11,
            q12,
            q22,
            mean,
            second_moment: s,
            offset: offset.clone(),
            sigma,
            gamma,
        }
    };

    Ok(MomentCertificate {
        phase1: block(mean1, s1, q12_1, q22_1, sigma1, gamma1),
        phase0: block(mean0, s0, q12_0, q22_0, sigma0, gamma0),
        a: a.clone(),
        b,
        c,
    })
}

/// Residuals of every certificate constraint.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// Named relative residuals of the equality constraints.
    pub equalities: Vec<(String, f64)>,
    pub max_equality_residual: f64,
    pub min_eigenvalue_phase1: f64,
    pub min_eigenvalue_phase0: f64,
    /// `s_i - |U_i|^2` for each phase.
    pub second_moment_gap_phase1: f64,
    pub second_moment_gap_phase0: f64,
    pub psd_pass: bool,
    pub equality_pass: bool,
    pub pass: bool,
}

/// Checks all constraints; failures are reported, not raised.
pub fn verify_certificate(
    cert: &MomentCertificate,
    triplet: &Triplet,
    materials: &MaterialPair,
    tol: &Tolerances,
) -> CertificateReport {
    let t = triplet.t();
    let (u, v) = (triplet.gradient(), triplet.flux());
    let (a1, a0) = (materials.alpha1(), materials.alpha0());
    let uv = u.dot(v);
    let (p1, p0) = (&cert.phase1, &cert.phase0);

    let gscale = u.norm().max(1.0);
    let fscale = v.norm().max(1.0);
    let sscale = uv.abs().max(1.0);
    let rel = |d: f64, s: f64| d / s;

    let mut eq = vec![
        (
            "gradient_average".to_string(),
            rel((&p1.mean * t + &p0.mean * (1.0 - t) - u).norm(), gscale),
        ),
        (
            "flux_average".to_string(),
            rel((&p1.q12 * (t * a1) + &p0.q12 * ((1.0 - t) * a0) - v).norm(), fscale),
        ),
        (
            "divcurl_average".to_string(),
            rel((t * a1 * p1.q22 + (1.0 - t) * a0 * p0.q22 - uv).abs(), sscale),
        ),
        (
            "gradient_split_1".to_string(),
            rel((&p1.mean - (u - &cert.a * (1.0 - t))).norm(), gscale),
        ),
        (
            "gradient_split_0".to_string(),
            rel((&p0.mean - (u + &cert.a * t)).norm(), gscale),
        ),
        (
            "flux_split_1".to_string(),
            rel((&p1.q12 * a1 - (v - &cert.b * (1.0 - t))).norm(), fscale),
        ),
        (
            "flux_split_0".to_string(),
            rel((&p0.q12 * a0 - (v + &cert.b * t)).norm(), fscale),
        ),
        (
            "scalar_split_1".to_string(),
            rel((a1 * p1.q22 - (uv - (1.0 - t) * cert.c)).abs(), sscale),
        ),
        (
            "scalar_split_0".to_string(),
            rel((a0 * p0.q22 - (uv + t * cert.c)).abs(), sscale),
        ),
    ];
    for (name, p) in [("1", p1), ("0", p0)] {
        let asym = (&p.q11 - p.q11.transpose()).norm();
        eq.push((format!("q11_symmetry_{name}"), rel(asym, p.q11.norm().max(1.0))));
    }
    let max_eq = eq.iter().map(|(_, r)| *r).fold(0.0, f64::max);

    let e1 = min_sym_eigenvalue(&p1.deficiency());
    let e0 = min_sym_eigenvalue(&p0.deficiency());
    let g1 = p1.second_moment - p1.mean.norm_squared();
    let g0 = p0.second_moment - p0.mean.norm_squared();
    let psd_pass = e1 >= -tol.psd && e0 >= -tol.psd && g1 >= -tol.psd && g0 >= -tol.psd;
    let equality_pass = max_eq <= tol.equality;

    CertificateReport {
        equalities: eq,
        max_equality_residual: max_eq,
        min_eigenvalue_phase1: e1,
        min_eigenvalue_phase0: e0,
        second_moment_gap_phase1: g1,
        second_moment_gap_phase0: g0,
        psd_pass,
        equality_pass,
        pass: psd_pass && equality_pass,
    }
}
