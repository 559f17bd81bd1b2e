//! Shared domain types and the closed-form formulas of the p = 4 mixture.
//!
//! Every flux in this crate follows the cubic law `v = alpha |u|^2 u`. The
//! scalar `gamma(t)` and the quartic energy
//!
//! ```text
//! W(x) = t alpha1 |U - (1-t) x|^4 + (1-t) alpha0 |U + t x|^4
//! ```
//!
//! are shared by the necessity side (moment bound) and the sufficiency side
//! (laminate construction).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

/// Constituent label: phase 1 has the larger conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Phase {
    One,
    Zero,
}

impl From<Phase> for u8 {
    fn from(p: Phase) -> u8 {
        match p {
            Phase::One => 1,
            Phase::Zero => 0,
        }
    }
}

impl TryFrom<u8> for Phase {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Phase::One),
            0 => Ok(Phase::Zero),
            other => Err(format!("phase must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// The two conductivities, `alpha1 > alpha0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMaterials")]
pub struct MaterialPair {
    alpha1: f64,
    alpha0: f64,
}

#[derive(Deserialize)]
struct RawMaterials {
    alpha1: f64,
    alpha0: f64,
}

impl TryFrom<RawMaterials> for MaterialPair {
    type Error = Error;

    fn try_from(raw: RawMaterials) -> Result<Self> {
        MaterialPair::new(raw.alpha1, raw.alpha0)
    }
}

impl MaterialPair {
    pub fn new(alpha1: f64, alpha0: f64) -> Result<Self> {
        if !(alpha1.is_finite() && alpha0.is_finite()) || !(alpha1 > alpha0 && alpha0 > 0.0) {
            return Err(Error::InvalidMaterials { alpha1, alpha0 });
        }
        Ok(Self { alpha1, alpha0 })
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha(&self, phase: Phase) -> f64 {
        match phase {
            Phase::One => self.alpha1,
            Phase::Zero => self.alpha0,
        }
    }
}

/// A volume fraction together with the mean gradient `U` and mean flux `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    t: f64,
    gradient: Vector,
    flux: Vector,
}

impl Triplet {
    pub fn new(t: f64, gradient: Vector, flux: Vector) -> Result<Self> {
        check_fraction(t)?;
        check_dimension(gradient.len())?;
        if flux.len() != gradient.len() {
            return Err(Error::DimensionMismatch {
                expected: gradient.len(),
                got: flux.len(),
            });
        }
        if gradient.iter().chain(flux.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { t, gradient, flux })
    }

    pub fn from_slices(t: f64, gradient: &[f64], flux: &[f64]) -> Result<Self> {
        Self::new(
            t,
            Vector::from_column_slice(gradient),
            Vector::from_column_slice(flux),
        )
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Mean gradient `U`.
    pub fn gradient(&self) -> &Vector {
        &self.gradient
    }

    /// Mean flux `V`.
    pub fn flux(&self) -> &Vector {
        &self.flux
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }
}

pub(crate) fn check_fraction(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidFraction(t));
    }
    Ok(())
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// The moment difference `U1 - U0` between the phase means; for first-order
/// laminates this is parallel to the layering normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vector);

impl Direction {
    pub fn new(v: Vector) -> Self {
        Self(v)
    }

    pub fn zeros(n: usize) -> Self {
        Self(Vector::zeros(n))
    }

    pub fn vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }
}

impl From<Vector> for Direction {
    fn from(v: Vector) -> Self {
        Self(v)
    }
}

impl std::ops::Deref for Direction {
    type Target = Vector;

    fn deref(&self) -> &Vector {
        &self.0
    }
}

/// Constitutive law tying an atom's flux to its gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    /// `v = alpha |u|^2 u`
    #[default]
    Cubic,
    /// `v = alpha u`
    Linear,
}

impl Law {
    pub fn flux(self, phase: Phase, u: &Vector, materials: &MaterialPair) -> Vector {
        match self {
            Law::Cubic => lambda_map(phase, u, materials),
            Law::Linear => u * materials.alpha(phase),
        }
    }
}

/// One weighted point of a discrete Young measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAtom {
    pub weight: f64,
    pub phase: Phase,
    pub u: Vector,
    pub v: Vector,
}

impl PhaseAtom {
    /// Atom placed exactly on the manifold of `phase` under `law`.
    pub fn on_manifold(weight: f64, phase: Phase, u: Vector, law: Law, materials: &MaterialPair) -> Self {
        let v = law.flux(phase, &u, materials);
        Self { weight, phase, u, v }
    }

    /// Relative distance of `v` from the manifold value.
    pub fn manifold_residual(&self, law: Law, materials: &MaterialPair) -> f64 {
        let expected = law.flux(self.phase, &self.u, materials);
        let diff = (&self.v - &expected).norm();
        if diff == 0.0 {
            return 0.0;
        }
        diff / expected.norm().max(self.v.norm())
    }
}

/// The cubic flux `alpha_phase |u|^2 u`.
pub fn lambda_map(phase: Phase, u: &Vector, materials: &MaterialPair) -> Vector {
    u * (materials.alpha(phase) * u.norm_squared())
}

/// Bound constant `alpha1 alpha0 / ((1-t) alpha1^{1/3} + t alpha0^{1/3})^3`.
pub fn gamma(t: f64, materials: &MaterialPair) -> f64 {
    let (a1, a0) = (materials.alpha1, materials.alpha0);
    let d = (1.0 - t) * a1.cbrt() + t * a0.cbrt();
    a1 * a0 / (d * d * d)
}

pub(crate) fn phase_means(t: f64, u: &Vector, x: &Vector) -> (Vector, Vector) {
    let u1 = u - x * (1.0 - t);
    let u0 = u + x * t;
    (u1, u0)
}

/// `W(x) = t alpha1 |U - (1-t) x|^4 + (1-t) alpha0 |U + t x|^4`.
pub fn quartic_energy(t: f64, u: &Vector, x: &Vector, materials: &MaterialPair) -> f64 {
    let (u1, u0) = phase_means(t, u, x);
    let n1 = u1.norm_squared();
    let n0 = u0.norm_squared();
    t * materials.alpha1 * n1 * n1 + (1.0 - t) * materials.alpha0 * n0 * n0
}

/// Global minimizer of [`quartic_energy`]; the minimum value is `gamma(t) |U|^4`.
pub fn quartic_minimizer(t: f64, u: &Vector, materials: &MaterialPair) -> Direction {
    let c1 = materials.alpha1.cbrt();
    let c0 = materials.alpha0.cbrt();
    let scale = (c1 - c0) / ((1.0 - t) * c1 + t * c0);
    Direction(u * scale)
}
