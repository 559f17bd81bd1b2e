use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named numerical tolerances. Every field can be overridden by key.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative distance of an atom from its phase manifold.
    pub manifold: f64,
    /// Absolute residual `|Phi(x) - V|` and psi slack accepted for membership.
    pub membership: f64,
    /// Bisection width for boundary roots of psi.
    pub root: f64,
    /// Smallest eigenvalue accepted as positive semidefinite.
    pub psd: f64,
    /// Relative residual of certificate equalities.
    pub equality: f64,
    /// Width of the band labelled as boundary in scan output.
    pub boundary_band: f64,
    /// Laminate phase-mass residual.
    pub phase_mass: f64,
    /// Laminate mean gradient residual.
    pub mean_gradient: f64,
    /// Laminate mean flux residual (relative).
    pub mean_flux: f64,
    /// Jump orthogonality residual at each tree level.
    pub jump: f64,
    /// Relative div-curl product residual.
    pub divcurl: f64,
    /// Weight sum of a probability measure.
    pub weight_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            manifold: 1e-12,
            membership: 1e-8,
            root: 1e-12,
            psd: 1e-9,
            equality: 1e-10,
            boundary_band: 1e-6,
            phase_mass: 1e-12,
            mean_gradient: 1e-10,
            mean_flux: 1e-9,
            jump: 1e-10,
            divcurl: 1e-9,
            weight_sum: 1e-12,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 12] = [
        "manifold",
        "membership",
        "root",
        "psd",
        "equality",
        "boundary_band",
        "phase_mass",
        "mean_gradient",
        "mean_flux",
        "jump",
        "divcurl",
        "weight_sum",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "manifold" => &mut self.manifold,
            "membership" => &mut self.membership,
            "root" => &mut self.root,
            "psd" => &mut self.psd,
            "equality" => &mut self.equality,
            "boundary_band" => &mut self.boundary_band,
            "phase_mass" => &mut self.phase_mass,
            "mean_gradient" => &mut self.mean_gradient,
            "mean_flux" => &mut self.mean_flux,
            "jump" => &mut self.jump,
            "divcurl" => &mut self.divcurl,
            "weight_sum" => &mut self.weight_sum,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidTolerance {
                key: key.to_string(),
                value,
            });
        }
        let slot = self
            .slot(key)
            .ok_or_else(|| Error::UnknownTolerance(key.to_string()))?;
        *slot = value;
        Ok(())
    }

    /// Parses `KEY=VALUE` and applies it.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::UnknownTolerance(spec.to_string()))?;
        let value: f64 = value.trim().parse().map_err(|_| Error::InvalidTolerance {
            key: key.trim().to_string(),
            value: f64::NAN,
        })?;
        self.set(key.trim(), value)
    }

    pub fn validate(&self) -> Result<()> {
        let mut copy = *self;
        for key in Self::KEYS {
            let v = *copy.slot(key).expect("known key");
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance {
                    key: key.to_string(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut tol = Tolerances::default();
        tol.apply_override("psd=1e-7").unwrap();
        assert_eq!(tol.psd, 1e-7);
        assert!(tol.apply_override("psd=-1").is_err());
        assert!(tol.apply_override("nope=1").is_err());
        assert!(tol.apply_override("psd").is_err());
        assert!(tol.validate().is_ok());
    }
}
