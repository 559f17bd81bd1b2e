//! Membership of `V` in `Phi(C)`: Newton multistart on `Phi(x) = V`,
//! continuation from the image of an interior point, and the boundary
//! oracles as independent certificates.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::boundary::{BoundaryMesh, BoundaryPolygon, OracleResult, Verdict};
use super::{flux_decompose, phi_jacobian, phi_map, psi, psi_argmin, radial_boundary, solve_flux};
use crate::error::{Error, Result};
use crate::linalg::{orthogonal_unit, unit};
use crate::model::{lambda_map, quartic_minimizer, MaterialPair, Phase, Triplet};
use crate::necessity::necessary_margin;
use crate::tolerances::Tolerances;
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct ReachOptions {
    /// Absolute acceptance on `|Phi(x) - V|`.
    pub flux_tol: f64,
    /// Acceptance on `psi(x)` for a preimage to count as a point of `C`.
    pub psi_tol: f64,
    pub root_tol: f64,
    pub max_iter: usize,
    pub polygon_points: usize,
    /// Relative chord deviation at which polygon arcs are bisected.
    pub polygon_sag: f64,
    pub mesh_rings: usize,
    pub mesh_azimuths: usize,
    /// Orders the boundary starting points.
    pub seed: u64,
}

impl Default for ReachOptions {
    fn default() -> Self {
        Self {
            flux_tol: 1e-8,
            psi_tol: 1e-8,
            root_tol: 1e-12,
            max_iter: 200,
            polygon_points: 720,
            polygon_sag: 1e-8,
            mesh_rings: 48,
            mesh_azimuths: 96,
            seed: 0,
        }
    }
}

impl ReachOptions {
    pub fn from_tolerances(tol: &Tolerances, seed: u64) -> Self {
        Self {
            flux_tol: tol.membership,
            psi_tol: tol.membership,
            root_tol: tol.root,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PurePhase,
    ZeroGradient,
    Newton,
    Continuation,
    Oracle,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachabilityReport {
    pub reachable: bool,
    /// Whether the decision is backed by a preimage or by a boundary oracle
    /// outside its uncertainty band.
    pub certified: bool,
    pub method: Method,
    pub x_solution: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub x1: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    /// `|Phi(x_solution) - V|`.
    pub flux_residual: Option<f64>,
    /// `psi(x_solution)`.
    pub psi_value: Option<f64>,
    pub necessary_margin: f64,
    pub newton_found: bool,
    pub oracle: Option<OracleResult>,
    /// Disagreement between the preimage search and the oracle.
    pub anomaly: Option<String>,
}

#[derive(Debug, Clone)]
enum Geometry {
    Polygon(BoundaryPolygon),
    Mesh(BoundaryMesh),
    Unsupported,
}

#[derive(Debug, Clone)]
enum Kind {
    PurePhase(Phase),
    ZeroGradient,
    General { center: Vector, starts: Vec<Vector>, geometry: Geometry },
}

/// Precomputed data for repeated membership queries at fixed `(t, U)`.
#[derive(Debug, Clone)]
pub struct ReachabilityOracle {
    t: f64,
    u: Vector,
    materials: MaterialPair,
    opts: ReachOptions,
    kind: Kind,
}

impl ReachabilityOracle {
    pub fn new(t: f64, u: &Vector, materials: &MaterialPair, opts: ReachOptions) -> Result<Self> {
        crate::model::check_fraction(t)?;
        crate::model::check_dimension(u.len())?;
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = u.len();
        let kind = if t >= 1.0 {
            Kind::PurePhase(Phase::One)
        } else if t <= 0.0 {
            Kind::PurePhase(Phase::Zero)
        } else if u.norm() == 0.0 {
            Kind::ZeroGradient
        } else {
            let center = psi_argmin(t, u, materials, opts.root_tol);
            let mut boundary = boundary_starts(t, u, materials, opts.root_tol);
            boundary.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
            let mut starts = vec![center.clone(), Vector::zeros(n), quartic_minimizer(t, u, materials).into_vector()];
            starts.extend(boundary);
            let geometry = match n {
                2 => Geometry::Polygon(BoundaryPolygon::new(
                    t,
                    u,
                    materials,
                    opts.polygon_points,
                    opts.root_tol,
                    opts.polygon_sag,
                )?),
                3 => Geometry::Mesh(BoundaryMesh::new(
                    t,
                    u,
                    materials,
                    opts.mesh_rings,
                    opts.mesh_azimuths,
                    opts.root_tol,
                )?),
                _ => Geometry::Unsupported,
            };
            Kind::General { center, starts, geometry }
        };
        Ok(Self { t, u: u.clone(), materials: *materials, opts, kind })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn polygon(&self) -> Option<&BoundaryPolygon> {
        match &self.kind {
            Kind::General { geometry: Geometry::Polygon(p), .. } => Some(p),
            _ => None,
        }
    }

    /// Classification by the boundary oracle alone. Errors for `N > 3`.
    pub fn classify(&self, v: &Vector) -> Result<OracleResult> {
        self.check(v)?;
        match &self.kind {
            Kind::PurePhase(phase) => {
                let target = lambda_map(*phase, &self.u, &self.materials);
                Ok(point_verdict(&target, v, self.opts.flux_tol))
            }
            Kind::ZeroGradient => Ok(point_verdict(&Vector::zeros(v.len()), v, self.opts.flux_tol)),
            Kind::General { geometry, .. } => match geometry {
                Geometry::Polygon(p) => Ok(p.classify(v)),
                Geometry::Mesh(m) => Ok(m.classify(v)),
                Geometry::Unsupported => Err(Error::UnsupportedDimension(v.len())),
            },
        }
    }

    /// A point `x` of `C` with `|Phi(x) - V| <= flux_tol`, from Newton
    /// multistart and then continuation from the image of the argmin of psi.
    pub fn preimage(&self, v: &Vector) -> Result<Option<(Vector, Method)>> {
        self.check(v)?;
        let Kind::General { center, starts, .. } = &self.kind else {
            return Ok(None);
        };
        let (t, u, m) = (self.t, &self.u, &self.materials);
        for start in starts {
            if let Some((x, _)) = solve_flux(t, u, m, v, start, self.opts.max_iter, self.opts.flux_tol) {
                if psi(t, u, &x, m) <= self.opts.psi_tol {
                    return Ok(Some((x, Method::Newton)));
                }
            }
        }
        Ok(self.continuation(center, v).map(|x| (x, Method::Continuation)))
    }

    fn continuation(&self, center: &Vector, v: &Vector) -> Option<Vector> {
        let (t, u, m) = (self.t, &self.u, &self.materials);
        let v_start = phi_map(t, u, center, m);
        let w = v - &v_start;
        let accept = self.opts.flux_tol.min(1e-12 * (m.alpha1() * u.norm().powi(3)).max(v.norm()));
        let mut lam = 0.0;
        let mut x = center.clone();
        let mut step: f64 = 1.0;
        while lam < 1.0 {
            if step < 1e-10 {
                return None;
            }
            let next = (lam + step).min(1.0);
            let tangent = phi_jacobian(t, u, &x, m).lu().solve(&w)?;
            let pred = &x + tangent * (next - lam);
            let target = &v_start + &w * next;
            match solve_flux(t, u, m, &target, &pred, 50, accept) {
                Some((y, _)) if psi(t, u, &y, m) <= self.opts.psi_tol => {
                    lam = next;
                    x = y;
                    step = (step * 2.0).min(1.0);
                }
                Some(_) if step <= 1e-6 => return None,
                _ => step *= 0.5,
            }
        }
        let res = (phi_map(t, u, &x, m) - v).norm();
        (res <= self.opts.flux_tol).then_some(x)
    }

    pub fn query(&self, v: &Vector) -> Result<ReachabilityReport> {
        self.check(v)?;
        let (t, u, m) = (self.t, &self.u, &self.materials);
        let margin = necessary_margin(&Triplet::new(t, u.clone(), v.clone())?, m);
        let zero = Vector::zeros(v.len());
        let special = |method: Method, target: Vector| {
            let residual = (&target - v).norm();
            let ok = residual <= self.opts.flux_tol;
            ReachabilityReport {
                reachable: ok,
                certified: true,
                method,
                x_solution: ok.then(|| zero.as_slice().to_vec()),
                r: ok.then_some(1.0),
                x1: ok.then(|| zero.as_slice().to_vec()),
                x0: ok.then(|| zero.as_slice().to_vec()),
                flux_residual: ok.then_some(residual),
                psi_value: ok.then_some(0.0),
                necessary_margin: margin,
                newton_found: false,
                oracle: None,
                anomaly: None,
            }
        };
        match &self.kind {
            Kind::PurePhase(phase) => return Ok(special(Method::PurePhase, lambda_map(*phase, u, m))),
            Kind::ZeroGradient => return Ok(special(Method::ZeroGradient, zero.clone())),
            Kind::General { .. } => {}
        }

        let found = self.preimage(v)?;
        let oracle = self.classify(v).ok();
        let mut report = ReachabilityReport {
            reachable: false,
            certified: false,
            method: Method::Undecided,
            x_solution: None,
            r: None,
            x1: None,
            x0: None,
            flux_residual: None,
            psi_value: None,
            necessary_margin: margin,
            newton_found: found.is_some(),
            oracle: oracle.clone(),
            anomaly: None,
        };
        if let Some((x, method)) = found {
            report.reachable = true;
            report.certified = true;
            report.method = method;
            report.flux_residual = Some((phi_map(t, u, &x, m) - v).norm());
            report.psi_value = Some(psi(t, u, &x, m));
            let tol = Tolerances { membership: self.opts.psi_tol, root: self.opts.root_tol, ..Tolerances::default() };
            if let Ok(split) = flux_decompose(t, u, &x, m, &tol) {
                report.r = Some(split.r);
                report.x1 = Some(split.x1.as_slice().to_vec());
                report.x0 = Some(split.x0.as_slice().to_vec());
            }
            report.x_solution = Some(x.as_slice().to_vec());
            if matches!(&oracle, Some(o) if o.verdict == Verdict::Outside) {
                report.anomaly = Some("preimage found for a point the oracle places outside".into());
            }
            return Ok(report);
        }
        match &oracle {
            Some(o) => {
                report.method = Method::Oracle;
                match o.verdict {
                    Verdict::Inside => {
                        report.reachable = true;
                        report.certified = true;
                        report.anomaly = Some("oracle places the point inside but no preimage was found".into());
                    }
                    Verdict::Outside => report.certified = true,
                    Verdict::Boundary => {}
                }
            }
            None => report.method = Method::Undecided,
        }
        Ok(report)
    }

    fn check(&self, v: &Vector) -> Result<()> {
        if v.len() != self.u.len() {
            return Err(Error::DimensionMismatch { expected: self.u.len(), got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

fn point_verdict(target: &Vector, v: &Vector, tol: f64) -> OracleResult {
    let distance = (target - v).norm();
    OracleResult {
        verdict: if distance <= tol { Verdict::Boundary } else { Verdict::Outside },
        distance,
        band: tol,
        winding: 0,
    }
}

/// Eight points of the boundary of `C` spread over the directions with
/// `U . d > 0`.
fn boundary_starts(t: f64, u: &Vector, m: &MaterialPair, root_tol: f64) -> Vec<Vector> {
    let n = u.len();
    let uhat = unit(u).expect("nonzero gradient");
    let e = orthogonal_unit(&uhat);
    // remaining directions of the orthogonal complement for N >= 3
    let mut others = Vec::new();
    for i in 0..n {
        let mut b = Vector::zeros(n);
        b[i] = 1.0;
        let w = &b - &uhat * uhat[i] - &e * e[i];
        if w.norm() > 0.5 {
            others.push(w.normalize());
            break;
        }
    }
    (0..8)
        .map(|k| {
            let theta = -FRAC_PI_2 + PI * (k as f64 + 0.5) / 8.0;
            let side = if k % 2 == 1 && !others.is_empty() { &others[0] } else { &e };
            let d = &uhat * theta.cos() + side * theta.sin();
            let rho = radial_boundary(t, u, &d, m, root_tol);
            d * rho
        })
        .collect()
}

/// Decides `V in Phi(C)` for a single triplet with default options.
pub fn reachable(triplet: &Triplet, materials: &MaterialPair) -> Result<ReachabilityReport> {
    ReachabilityOracle::new(triplet.t(), triplet.gradient(), materials, ReachOptions::default())?.query(triplet.flux())
}
