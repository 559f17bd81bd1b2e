//! Grid scan of the flux space at fixed `(t, U)`, classifying each `V` as
//! infeasible (fails the moment bound), necessary-only, or reachable.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MaterialPair, Triplet};
use crate::necessity::necessary_margin;
use crate::sufficiency::{ReachOptions, ReachabilityOracle, Verdict};
use crate::tolerances::Tolerances;
use crate::Vector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanWindow {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ScanWindow {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidScan("window bounds differ in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !a.is_finite() || !b.is_finite() || a >= b) {
            return Err(Error::InvalidScan("window must satisfy lo < hi in every coordinate".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    Infeasible,
    NecessaryOnly,
    Reachable,
}

impl CellClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CellClass::Infeasible => "infeasible",
            CellClass::NecessaryOnly => "necessary_only",
            CellClass::Reachable => "reachable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub v: Vec<f64>,
    pub necessary_margin: f64,
    pub reachable: bool,
    pub class: CellClass,
    /// `|necessary_margin|` within the boundary band.
    pub near_bound: bool,
    pub verdict: Verdict,
    /// Distance to the discretized boundary of the lamination image.
    pub oracle_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapWitness {
    pub v: Vec<f64>,
    pub necessary_margin: f64,
    pub oracle_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub infeasible: usize,
    pub necessary_only: usize,
    pub reachable: usize,
    pub near_bound: usize,
    /// Cells inside the oracle's uncertainty band.
    pub oracle_boundary: usize,
    /// `necessary_only / (necessary_only + reachable)`.
    pub gap_fraction: f64,
    pub inclusion_violations: usize,
    /// Necessary-only cell maximizing `min(margin, oracle distance)`.
    pub witness: Option<GapWitness>,
    pub oracle_band: f64,
    pub convexity_violations: usize,
    pub anomalies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionScanReport {
    pub t: f64,
    pub gradient: Vec<f64>,
    pub window: ScanWindow,
    pub resolution: usize,
    pub cells: Vec<ScanCell>,
    pub summary: ScanSummary,
}

/// Margin below which a reachable cell counts as an inclusion violation.
const INCLUSION_TOL: f64 = 1e-9;

/// Classifies every node of an inclusive `resolution^N` grid over `window`.
///
/// Reachability is decided by the boundary oracle. Newton preimages are
/// sought for every point the oracle does not place outside; a mismatch is
/// recorded as an anomaly and the oracle verdict is kept, except inside the
/// oracle band where a preimage decides.
#[allow(clippy::too_many_arguments)]
pub fn scan_region(
    t: f64,
    u: &Vector,
    materials: &MaterialPair,
    window: &ScanWindow,
    resolution: usize,
    jobs: Option<usize>,
    opts: &ReachOptions,
    tol: &Tolerances,
) -> Result<RegionScanReport> {
    let n = u.len();
    if n != 2 && n != 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if window.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: window.dim() });
    }
    if resolution < 2 {
        return Err(Error::InvalidScan("resolution must be at least 2".into()));
    }
    let total = resolution
        .checked_pow(n as u32)
        .filter(|c| *c <= 50_000_000)
        .ok_or_else(|| Error::InvalidScan("grid too large".into()))?;
    let oracle = ReachabilityOracle::new(t, u, materials, opts.clone())?;

    let node = |k: usize| -> Vector {
        let mut rest = k;
        Vector::from_iterator(
            n,
            (0..n).map(|d| {
                let i = rest % resolution;
                rest /= resolution;
                let (lo, hi) = (window.lo[d], window.hi[d]);
                lo + (hi - lo) * i as f64 / (resolution - 1) as f64
            }),
        )
    };

    let evaluate = |k: usize| -> Result<(ScanCell, Option<String>)> {
        let v = node(k);
        let margin = necessary_margin(&Triplet::new(t, u.clone(), v.clone())?, materials);
        let o = oracle.classify(&v)?;
        let mut anomaly = None;
        let reachable = match o.verdict {
            Verdict::Outside => false,
            Verdict::Inside => {
                if oracle.preimage(&v)?.is_none() {
                    anomaly = Some(format!("no preimage for oracle-inside point {:?}", v.as_slice()));
                }
                true
            }
            Verdict::Boundary => oracle.preimage(&v)?.is_some(),
        };
        let class = if reachable {
            CellClass::Reachable
        } else if margin >= 0.0 {
            CellClass::NecessaryOnly
        } else {
            CellClass::Infeasible
        };
        let cell = ScanCell {
            v: v.as_slice().to_vec(),
            necessary_margin: margin,
            reachable,
            class,
            near_bound: margin.abs() <= tol.boundary_band,
            verdict: o.verdict,
            oracle_distance: o.distance,
        };
        Ok((cell, anomaly))
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidScan(format!("thread pool: {e}")))?;
    let results: Vec<(ScanCell, Option<String>)> =
        pool.install(|| (0..total).into_par_iter().map(evaluate).collect::<Result<Vec<_>>>())?;

    let mut anomalies = Vec::new();
    let mut cells = Vec::with_capacity(total);
    for (cell, anomaly) in results {
        anomalies.extend(anomaly);
        cells.push(cell);
    }
    let count = |c: CellClass| cells.iter().filter(|x| x.class == c).count();
    let (infeasible, necessary_only, reachable) =
        (count(CellClass::Infeasible), count(CellClass::NecessaryOnly), count(CellClass::Reachable));
    let witness = cells
        .iter()
        .filter(|c| c.class == CellClass::NecessaryOnly)
        .max_by(|a, b| {
            let sa = a.necessary_margin.min(a.oracle_distance);
            let sb = b.necessary_margin.min(b.oracle_distance);
            sa.total_cmp(&sb)
        })
        .map(|c| GapWitness {
            v: c.v.clone(),
            necessary_margin: c.necessary_margin,
            oracle_distance: c.oracle_distance,
        });
    let summary = ScanSummary {
        infeasible,
        necessary_only,
        reachable,
        near_bound: cells.iter().filter(|c| c.near_bound).count(),
        oracle_boundary: cells.iter().filter(|c| c.verdict == Verdict::Boundary).count(),
        gap_fraction: if necessary_only + reachable > 0 {
            necessary_only as f64 / (necessary_only + reachable) as f64
        } else {
            0.0
        },
        inclusion_violations: cells
            .iter()
            .filter(|c| c.reachable && c.necessary_margin < -INCLUSION_TOL)
            .count(),
        witness,
        oracle_band: oracle_band(&oracle),
        convexity_violations: oracle.polygon().map_or(0, |p| p.convexity_violations()),
        anomalies,
    };
    Ok(RegionScanReport {
        t,
        gradient: u.as_slice().to_vec(),
        window: window.clone(),
        resolution,
        cells,
        summary,
    })
}

fn oracle_band(oracle: &ReachabilityOracle) -> f64 {
    let probe = Vector::zeros(oracle.dim());
    oracle.classify(&probe).map_or(0.0, |o| o.band)
}

/// Writes `Vx,Vy[,Vz],necessary_margin,reachable,class` rows with 17
/// significant digits.
pub fn write_csv<W: Write>(report: &RegionScanReport, mut out: W) -> std::io::Result<()> {
    let axes = ["Vx", "Vy", "Vz"];
    let n = report.window.dim();
    writeln!(out, "{},necessary_margin,reachable,class", axes[..n].join(","))?;
    for cell in &report.cells {
        for x in &cell.v {
            write!(out, "{x:.16e},")?;
        }
        writeln!(out, "{:.16e},{},{}", cell.necessary_margin, cell.reachable, cell.class.as_str())?;
    }
    Ok(())
}
