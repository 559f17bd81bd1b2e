use std::collections::BTreeMap;
use std::path::Path;

use nlcond_core::{MaterialPair, Tolerances, Triplet, Vector};
use serde::Deserialize;

use crate::CliError;

/// Problem file: `{"t":0.5,"U":[1,0],"V":[2.4,0],"alpha1":8,"alpha0":1,"dim":2}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub t: f64,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[serde(rename = "V", default)]
    pub v: Option<Vec<f64>>,
    pub alpha1: f64,
    pub alpha0: f64,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub c: Option<f64>,
}

/// Validated problem with resolved tolerances and seed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub materials: MaterialPair,
    pub tol: Tolerances,
    pub seed: u64,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.spec.u.len()
    }

    pub fn t(&self) -> f64 {
        self.spec.t
    }

    pub fn gradient(&self) -> Vector {
        Vector::from_column_slice(&self.spec.u)
    }

    pub fn flux(&self) -> Result<Vector, CliError> {
        self.spec
            .v
            .as_deref()
            .map(Vector::from_column_slice)
            .ok_or_else(|| CliError::Input("problem has no `V`".into()))
    }

    pub fn triplet(&self) -> Result<Triplet, CliError> {
        Ok(Triplet::new(self.spec.t, self.gradient(), self.flux()?)?)
    }

    /// `--x` overrides the `x` field.
    pub fn direction(&self, flag: Option<&[f64]>) -> Result<Vector, CliError> {
        let x = flag
            .or(self.spec.x.as_deref())
            .ok_or_else(|| CliError::Input("no lamination direction: pass --x or set `x`".into()))?;
        self.vector("x", x)
    }

    pub fn vector(&self, name: &str, values: &[f64]) -> Result<Vector, CliError> {
        if values.len() != self.dim() {
            return Err(CliError::Input(format!(
                "`{name}` has length {}, expected {}",
                values.len(),
                self.dim()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Input(format!("`{name}` has non-finite entries")));
        }
        Ok(Vector::from_column_slice(values))
    }
}

pub fn read_json(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| CliError::Input(format!("reading stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))
}

pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Problem, CliError> {
    let text = read_json(path)?;
    let spec: ProblemSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid problem file: {e}")))?;
    let n = spec.u.len();
    if let Some(dim) = spec.dim {
        if dim != n {
            return Err(CliError::Input(format!("`U` has length {n} but dim = {dim}")));
        }
    }
    for (name, len) in [("V", spec.v.as_ref().map(Vec::len)), ("x", spec.x.as_ref().map(Vec::len)), ("a", spec.a.as_ref().map(Vec::len))] {
        if let Some(len) = len {
            if len != n {
                return Err(CliError::Input(format!("`{name}` has length {len}, expected {n}")));
            }
        }
    }
    if spec.u.iter().chain(spec.v.iter().flatten()).any(|x| !x.is_finite()) || !spec.t.is_finite() {
        return Err(CliError::Input("non-finite input value".into()));
    }
    let materials = MaterialPair::new(spec.alpha1, spec.alpha0)?;
    let mut tol = Tolerances::default();
    for (key, value) in &spec.tolerances {
        tol.set(key, *value)?;
    }
    for o in overrides {
        tol.apply_override(o)?;
    }
    tol.validate()?;
    let seed = seed.or(spec.seed).unwrap_or(0);
    // validates t and the dimension
    Triplet::new(spec.t, Vector::from_column_slice(&spec.u), Vector::zeros(n))?;
    Ok(Problem { spec, materials, tol, seed })
}
