//! Discrete laminate measures, their moments and the independent oracles
//! (weights, manifolds, jump conditions, div-curl product) used to validate
//! every constructed microstructure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_unit, unit};
use crate::model::{Law, MaterialPair, Phase, PhaseAtom, Triplet};
use crate::tolerances::Tolerances;
use crate::Vector;

/// Lamination tree. The first child of a split carries `fraction`, the second
/// `1 - fraction`.
#[derive(Debug, Clone, PartialEq)]
pub enum LaminateNode {
    Leaf(usize),
    Split {
        fraction: f64,
        direction: Vector,
        children: Box<[LaminateNode; 2]>,
    },
}

impl LaminateNode {
    pub fn depth(&self) -> usize {
        match self {
            LaminateNode::Leaf(_) => 0,
            LaminateNode::Split { children, .. } => 1 + children[0].depth().max(children[1].depth()),
        }
    }
}

/// Tree under construction: leaves hold the atom data directly.
#[derive(Debug, Clone)]
pub(crate) enum Draft {
    Atom(Phase, Vector),
    Split {
        fraction: f64,
        direction: Vector,
        children: Box<[Draft; 2]>,
    },
}

/// A finite discrete Young measure supported on the two phase manifolds,
/// together with the lamination tree that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Laminate {
    pub materials: MaterialPair,
    pub law: Law,
    pub tree: LaminateNode,
    pub atoms: Vec<PhaseAtom>,
    /// Triplet the laminate was built for, when known.
    pub target: Option<Triplet>,
}

impl Laminate {
    pub(crate) fn from_draft(draft: Draft, law: Law, materials: MaterialPair) -> Self {
        let mut atoms = Vec::new();
        let tree = flatten(draft, 1.0, law, &materials, &mut atoms);
        Self {
            materials,
            law,
            tree,
            atoms,
            target: None,
        }
    }

    pub fn with_target(mut self, target: Triplet) -> Self {
        self.target = Some(target);
        self
    }

    /// A single Dirac mass.
    pub fn dirac(phase: Phase, u: Vector, law: Law, materials: MaterialPair) -> Self {
        Self::from_draft(Draft::Atom(phase, u), law, materials)
    }

    /// Two-atom laminate with phase means `U - (1-t) x` and `U + t x`.
    ///
    /// No compatibility check is made here; see [`jump_check`].
    pub fn first_order(t: f64, u: &Vector, x: &Vector, law: Law, materials: MaterialPair) -> Self {
        Self::from_draft(first_order_draft(t, u, x, law, &materials), law, materials)
    }

    /// Second-order laminate: fraction `r` of a first-order laminate along
    /// `x1` and `1 - r` of one along `x0`, both with volume fraction `t` and
    /// mean gradient `u`.
    pub fn second_order(
        t: f64,
        u: &Vector,
        r: f64,
        x1: &Vector,
        x0: &Vector,
        law: Law,
        materials: MaterialPair,
    ) -> Self {
        let flux = |x: &Vector| {
            let (u1, u0) = crate::model::phase_means(t, u, x);
            law.flux(Phase::One, &u1, &materials) * t + law.flux(Phase::Zero, &u0, &materials) * (1.0 - t)
        };
        let direction = orthogonal_unit(&(flux(x1) - flux(x0)));
        let draft = Draft::Split {
            fraction: r,
            direction,
            children: Box::new([
                first_order_draft(t, u, x1, law, &materials),
                first_order_draft(t, u, x0, law, &materials),
            ]),
        };
        Self::from_draft(draft, law, materials)
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.u.len())
    }

    /// Atom weights implied by the tree (products of the fractions on the
    /// path from the root).
    pub fn tree_weights(&self) -> Result<Vec<f64>> {
        let mut w = vec![f64::NAN; self.atoms.len()];
        fill_weights(&self.tree, 1.0, &mut w)?;
        if let Some(i) = w.iter().position(|x| x.is_nan()) {
            return Err(Error::MalformedLaminate(format!("atom {i} is not referenced by the tree")));
        }
        Ok(w)
    }
}

fn first_order_draft(t: f64, u: &Vector, x: &Vector, law: Law, materials: &MaterialPair) -> Draft {
    let (u1, u0) = crate::model::phase_means(t, u, x);
    let direction = match unit(x) {
        Some(n) => n,
        None => {
            let dv = law.flux(Phase::One, &u1, materials) - law.flux(Phase::Zero, &u0, materials);
            orthogonal_unit(&dv)
        }
    };
    Draft::Split {
        fraction: t,
        direction,
        children: Box::new([Draft::Atom(Phase::One, u1), Draft::Atom(Phase::Zero, u0)]),
    }
}

fn flatten(draft: Draft, weight: f64, law: Law, materials: &MaterialPair, atoms: &mut Vec<PhaseAtom>) -> LaminateNode {
    match draft {
        Draft::Atom(phase, u) => {
            atoms.push(PhaseAtom::on_manifold(weight, phase, u, law, materials));
            LaminateNode::Leaf(atoms.len() - 1)
        }
        Draft::Split {
            fraction,
            direction,
            children,
        } => {
            let [a, b] = *children;
            // a split with an empty side is just the other side
            if fraction >= 1.0 {
                return flatten(a, weight, law, materials, atoms);
            }
            if fraction <= 0.0 {
                return flatten(b, weight, law, materials, atoms);
            }
            let left = flatten(a, weight * fraction, law, materials, atoms);
            let right = flatten(b, weight * (1.0 - fraction), law, materials, atoms);
            LaminateNode::Split {
                fraction,
                direction,
                children: Box::new([left, right]),
            }
        }
    }
}

fn fill_weights(node: &LaminateNode, weight: f64, out: &mut [f64]) -> Result<()> {
    match node {
        LaminateNode::Leaf(i) => {
            let slot = out
                .get_mut(*i)
                .ok_or_else(|| Error::MalformedLaminate(format!("leaf references missing atom {i}")))?;
            if !slot.is_nan() {
                return Err(Error::MalformedLaminate(format!("atom {i} referenced twice")));
            }
            *slot = weight;
            Ok(())
        }
        LaminateNode::Split { fraction, children, .. } => {
            if !(fraction.is_finite() && *fraction > 0.0 && *fraction < 1.0) {
                return Err(Error::MalformedLaminate(format!("fraction {fraction} outside (0, 1)")));
            }
            fill_weights(&children[0], weight * fraction, out)?;
            fill_weights(&children[1], weight * (1.0 - fraction), out)
        }
    }
}

/// Tree-ordered total mass; equals 1 exactly whenever every level splits
/// into `f` and `1 - f`.
fn hierarchical_mass(node: &LaminateNode) -> f64 {
    match node {
        LaminateNode::Leaf(_) => 1.0,
        LaminateNode::Split { fraction, children, .. } => {
            fraction * hierarchical_mass(&children[0]) + (1.0 - fraction) * hierarchical_mass(&children[1])
        }
    }
}

/// First moments and the quantities entering the div-curl identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminateMoments {
    /// Phase-1 mass.
    pub t: f64,
    pub mean_u: Vector,
    pub mean_v: Vector,
    /// Phase-conditional `E|u|^4` (zero for an absent phase).
    pub q1: f64,
    pub q0: f64,
    /// `sum_k w_k u_k . v_k`
    pub product_moment: f64,
}

fn raw_moments(lam: &Laminate) -> LaminateMoments {
    let n = lam.dim();
    let mut mean_u = Vector::zeros(n);
    let mut mean_v = Vector::zeros(n);
    let (mut m1, mut m0, mut q1, mut q0, mut product) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for atom in &lam.atoms {
        mean_u += &atom.u * atom.weight;
        mean_v += &atom.v * atom.weight;
        let s = atom.u.norm_squared();
        match atom.phase {
            Phase::One => {
                m1 += atom.weight;
                q1 += atom.weight * s * s;
            }
            Phase::Zero => {
                m0 += atom.weight;
                q0 += atom.weight * s * s;
            }
        }
        product += atom.weight * atom.u.dot(&atom.v);
    }
    LaminateMoments {
        t: m1,
        mean_u,
        mean_v,
        q1: if m1 > 0.0 { q1 / m1 } else { 0.0 },
        q0: if m0 > 0.0 { q0 / m0 } else { 0.0 },
        product_moment: product,
    }
}

/// Moments of a laminate whose atoms are validated first.
pub fn laminate_moments(lam: &Laminate, tol: &Tolerances) -> Result<LaminateMoments> {
    if lam.atoms.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let n = lam.dim();
    for (index, atom) in lam.atoms.iter().enumerate() {
        if atom.u.len() != n || atom.v.len() != n {
            return Err(Error::InvariantViolation {
                index,
                reason: "dimension mismatch".into(),
            });
        }
        if !(atom.weight > 0.0 && atom.weight <= 1.0) {
            return Err(Error::InvariantViolation {
                index,
                reason: format!("weight {} outside (0, 1]", atom.weight),
            });
        }
        let res = atom.manifold_residual(lam.law, &lam.materials);
        if res > tol.manifold {
            return Err(Error::InvariantViolation {
                index,
                reason: format!("atom off its phase manifold (relative residual {res:e})"),
            });
        }
    }
    let total: f64 = lam.atoms.iter().map(|a| a.weight).sum();
    if (total - 1.0).abs() > tol.weight_sum {
        return Err(Error::WeightsNotNormalized(total));
    }
    Ok(raw_moments(lam))
}

/// `|sum w u.v - U.V| / max(1, |U.V|)`.
pub fn divcurl_check(lam: &Laminate) -> f64 {
    let m = raw_moments(lam);
    let uv = m.mean_u.dot(&m.mean_v);
    (m.product_moment - uv).abs() / uv.abs().max(1.0)
}

/// Compatibility residuals of one split in the lamination tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpResidual {
    /// Path from the root, `0` = first child.
    pub path: Vec<u8>,
    /// `|du . dv| / max(1, |du| |dv|)` between the children's mean pairs.
    pub orthogonality: f64,
    /// Component of `du` off the layering normal.
    pub gradient_tangential: f64,
    /// Normal component of `dv`.
    pub flux_normal: f64,
}

impl JumpResidual {
    pub fn max(&self) -> f64 {
        self.orthogonality.max(self.gradient_tangential).max(self.flux_normal)
    }
}

struct Aggregate {
    mass: f64,
    su: Vector,
    sv: Vector,
}

fn aggregate(node: &LaminateNode, lam: &Laminate, path: &mut Vec<u8>, out: &mut Vec<JumpResidual>) -> Aggregate {
    match node {
        LaminateNode::Leaf(i) => {
            let a = &lam.atoms[*i];
            Aggregate {
                mass: a.weight,
                su: &a.u * a.weight,
                sv: &a.v * a.weight,
            }
        }
        LaminateNode::Split { direction, children, .. } => {
            let idx = out.len();
            out.push(JumpResidual {
                path: path.clone(),
                orthogonality: 0.0,
                gradient_tangential: 0.0,
                flux_normal: 0.0,
            });
            path.push(0);
            let a = aggregate(&children[0], lam, path, out);
            path.pop();
            path.push(1);
            let b = aggregate(&children[1], lam, path, out);
            path.pop();
            let mean = |g: &Aggregate| (&g.su / g.mass, &g.sv / g.mass);
            let (ua, va) = mean(&a);
            let (ub, vb) = mean(&b);
            let du = ua - ub;
            let dv = va - vb;
            let (ndu, ndv) = (du.norm(), dv.norm());
            let n = unit(direction).unwrap_or_else(|| direction.clone());
            let tangential = &du - &n * du.dot(&n);
            out[idx].orthogonality = du.dot(&dv).abs() / (ndu * ndv).max(1.0);
            out[idx].gradient_tangential = tangential.norm() / ndu.max(1.0);
            out[idx].flux_normal = dv.dot(&n).abs() / ndv.max(1.0);
            Aggregate {
                mass: a.mass + b.mass,
                su: a.su + b.su,
                sv: a.sv + b.sv,
            }
        }
    }
}

/// Residuals of the jump conditions at every split, root first.
pub fn jump_check(lam: &Laminate) -> Vec<JumpResidual> {
    let mut out = Vec::new();
    if !lam.atoms.is_empty() {
        aggregate(&lam.tree, lam, &mut Vec::new(), &mut out);
    }
    out
}

/// Outcome of the full oracle suite on one laminate.
#[derive(Debug, Clone, Serialize)]
pub struct LaminateReport {
    /// Tree-derived weights reproduce the atom weights bit for bit and the
    /// tree-ordered mass is exactly 1.
    pub weights_exact: bool,
    /// `|sum w - 1|` in storage order.
    pub weight_sum_error: f64,
    pub max_manifold_residual: f64,
    pub worst_manifold_atom: Option<usize>,
    pub jump: Vec<JumpResidual>,
    pub max_jump_residual: f64,
    pub divcurl_residual: f64,
    pub phase_mass_residual: Option<f64>,
    pub mean_gradient_residual: Option<f64>,
    pub mean_flux_residual: Option<f64>,
    pub structure_error: Option<String>,
    pub pass: bool,
}

/// Runs every oracle; checks against `lam.target` when present.
pub fn verify_laminate(lam: &Laminate, tol: &Tolerances) -> LaminateReport {
    let mut structure_error = None;
    let weights_exact = match lam.tree_weights() {
        Ok(w) => {
            w.iter().zip(&lam.atoms).all(|(w, a)| *w == a.weight) && hierarchical_mass(&lam.tree) == 1.0
        }
        Err(e) => {
            structure_error = Some(e.to_string());
            false
        }
    };
    let n = lam.dim();
    if lam.atoms.is_empty() {
        structure_error = Some("laminate has no atoms".into());
    } else if lam.atoms.iter().any(|a| a.u.len() != n || a.v.len() != n) {
        structure_error = Some("atoms have inconsistent dimensions".into());
    }
    if let Some(err) = structure_error {
        return LaminateReport {
            weights_exact: false,
            weight_sum_error: f64::NAN,
            max_manifold_residual: f64::NAN,
            worst_manifold_atom: None,
            jump: Vec::new(),
            max_jump_residual: f64::NAN,
            divcurl_residual: f64::NAN,
            phase_mass_residual: None,
            mean_gradient_residual: None,
            mean_flux_residual: None,
            structure_error: Some(err),
            pass: false,
        };
    }

    let total: f64 = lam.atoms.iter().map(|a| a.weight).sum();
    let (mut worst, mut worst_idx) = (0.0f64, None);
    for (i, a) in lam.atoms.iter().enumerate() {
        let r = a.manifold_residual(lam.law, &lam.materials);
        if r > worst || (worst_idx.is_none() && r >= worst) {
            worst = r;
            worst_idx = Some(i);
        }
    }
    let jump = jump_check(lam);
    let max_jump = jump.iter().map(JumpResidual::max).fold(0.0, f64::max);
    let divcurl = divcurl_check(lam);
    let m = raw_moments(lam);

    let (phase_mass, mean_grad, mean_flux) = match &lam.target {
        Some(target) => (
            Some((m.t - target.t()).abs()),
            Some((&m.mean_u - target.gradient()).norm()),
            Some((&m.mean_v - target.flux()).norm() / target.flux().norm().max(1.0)),
        ),
        None => (None, None, None),
    };

    let within = |v: Option<f64>, tol: f64| v.is_none_or(|v| v <= tol);
    let pass = weights_exact
        && worst <= tol.manifold
        && max_jump <= tol.jump
        && divcurl <= tol.divcurl
        && within(phase_mass, tol.phase_mass)
        && within(mean_grad, tol.mean_gradient)
        && within(mean_flux, tol.mean_flux);

    LaminateReport {
        weights_exact,
        weight_sum_error: (total - 1.0).abs(),
        max_manifold_residual: worst,
        worst_manifold_atom: worst_idx,
        jump,
        max_jump_residual: max_jump,
        divcurl_residual: divcurl,
        phase_mass_residual: phase_mass,
        mean_gradient_residual: mean_grad,
        mean_flux_residual: mean_flux,
        structure_error: None,
        pass,
    }
}

// ---------------------------------------------------------------------------
// JSON document form

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeDoc {
    Split {
        fraction: f64,
        direction: Vec<f64>,
        children: Vec<NodeDoc>,
    },
    Leaf {
        atom: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub weight: f64,
    pub phase: Phase,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetDoc {
    pub t: f64,
    #[serde(rename = "U")]
    pub gradient: Vec<f64>,
    #[serde(rename = "V")]
    pub flux: Vec<f64>,
}

/// Serialized laminate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaminateDoc {
    pub materials: MaterialPair,
    #[serde(default)]
    pub law: Law,
    pub tree: NodeDoc,
    pub atoms: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetDoc>,
}

fn node_to_doc(node: &LaminateNode) -> NodeDoc {
    match node {
        LaminateNode::Leaf(i) => NodeDoc::Leaf { atom: *i },
        LaminateNode::Split {
            fraction,
            direction,
            children,
        } => NodeDoc::Split {
            fraction: *fraction,
            direction: direction.iter().copied().collect(),
            children: children.iter().map(node_to_doc).collect(),
        },
    }
}

fn node_from_doc(doc: &NodeDoc, n: usize) -> Result<LaminateNode> {
    match doc {
        NodeDoc::Leaf { atom } => Ok(LaminateNode::Leaf(*atom)),
        NodeDoc::Split {
            fraction,
            direction,
            children,
        } => {
            if children.len() != 2 {
                return Err(Error::MalformedLaminate(format!(
                    "split must have exactly two children, found {}",
                    children.len()
                )));
            }
            if direction.len() != n {
                return Err(Error::MalformedLaminate("direction has wrong dimension".into()));
            }
            Ok(LaminateNode::Split {
                fraction: *fraction,
                direction: Vector::from_column_slice(direction),
                children: Box::new([node_from_doc(&children[0], n)?, node_from_doc(&children[1], n)?]),
            })
        }
    }
}

impl From<&Laminate> for LaminateDoc {
    fn from(lam: &Laminate) -> Self {
        LaminateDoc {
            materials: lam.materials,
            law: lam.law,
            tree: node_to_doc(&lam.tree),
            atoms: lam
                .atoms
                .iter()
                .map(|a| AtomDoc {
                    weight: a.weight,
                    phase: a.phase,
                    u: a.u.iter().copied().collect(),
                    v: a.v.iter().copied().collect(),
                })
                .collect(),
            target: lam.target.as_ref().map(|t| TargetDoc {
                t: t.t(),
                gradient: t.gradient().iter().copied().collect(),
                flux: t.flux().iter().copied().collect(),
            }),
        }
    }
}

impl TryFrom<LaminateDoc> for Laminate {
    type Error = Error;

    fn try_from(doc: LaminateDoc) -> Result<Self> {
        let n = doc
            .atoms
            .first()
            .map(|a| a.u.len())
            .ok_or_else(|| Error::MalformedLaminate("no atoms".into()))?;
        if doc.atoms.iter().any(|a| a.u.len() != n || a.v.len() != n) {
            return Err(Error::MalformedLaminate("atoms have inconsistent dimensions".into()));
        }
        let tree = node_from_doc(&doc.tree, n)?;
        let atoms = doc
            .atoms
            .iter()
            .map(|a| PhaseAtom {
                weight: a.weight,
                phase: a.phase,
                u: Vector::from_column_slice(&a.u),
                v: Vector::from_column_slice(&a.v),
            })
            .collect();
        let target = doc
            .target
            .map(|t| Triplet::from_slices(t.t, &t.gradient, &t.flux))
            .transpose()?;
        let lam = Laminate {
            materials: doc.materials,
            law: doc.law,
            tree,
            atoms,
            target,
        };
        lam.tree_weights()?;
        Ok(lam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lambda_map;

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_column_slice(&[a, b])
    }

    fn mats() -> MaterialPair {
        MaterialPair::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn dirac_moments_are_the_atom() {
        let m = mats();
        let u = v2(0.4, -0.9);
        let lam = Laminate::dirac(Phase::One, u.clone(), Law::Cubic, m);
        let mo = laminate_moments(&lam, &Tolerances::default()).unwrap();
        assert_eq!(mo.t, 1.0);
        assert_eq!(mo.mean_u, u);
        assert_eq!(mo.mean_v, lambda_map(Phase::One, &u, &m));
        assert_eq!(divcurl_check(&lam), 0.0);
        assert!(jump_check(&lam).is_empty());
    }

    #[test]
    fn first_order_collinear_root_is_compatible() {
        // alpha0 (1 + s/2)^3 = alpha1 (1 - s/2)^3 along U = (1, 0), t = 1/2
        let m = mats();
        let c = 2f64.cbrt();
        let s = (c - 1.0) / (0.5 * c + 0.5);
        let lam = Laminate::first_order(0.5, &v2(1.0, 0.0), &v2(s, 0.0), Law::Cubic, m);
        assert_eq!(lam.atoms.len(), 2);
        let j = jump_check(&lam);
        assert_eq!(j.len(), 1);
        assert!(j[0].max() < 1e-12, "{j:?}");
        assert!(divcurl_check(&lam) < 1e-12);
        let mo = laminate_moments(&lam, &Tolerances::default()).unwrap();
        let uv = mo.mean_u.dot(&mo.mean_v);
        let rhs = 0.5 * 2.0 * mo.q1 + 0.5 * 1.0 * mo.q0;
        assert!((uv - rhs).abs() < 1e-12);
    }

    #[test]
    fn perturbed_root_breaks_the_jump() {
        let m = mats();
        let c = 2f64.cbrt();
        let s = 1.1 * (c - 1.0) / (0.5 * c + 0.5);
        let lam = Laminate::first_order(0.5, &v2(1.0, 0.0), &v2(s, 0.0), Law::Cubic, m);
        assert!(jump_check(&lam)[0].orthogonality > 1e-4);
        assert!(divcurl_check(&lam) > 1e-4);
    }

    #[test]
    fn zero_fraction_collapses() {
        let m = mats();
        let lam = Laminate::first_order(1.0, &v2(1.0, 0.0), &v2(0.3, 0.1), Law::Cubic, m);
        assert_eq!(lam.atoms.len(), 1);
        assert_eq!(lam.atoms[0].phase, Phase::One);
        assert_eq!(lam.atoms[0].weight, 1.0);
    }

    #[test]
    fn off_manifold_atom_is_rejected_by_moments() {
        let m = mats();
        let mut lam = Laminate::first_order(0.5, &v2(1.0, 0.0), &v2(0.2, 0.0), Law::Cubic, m);
        lam.atoms[1].v[1] += 0.01;
        match laminate_moments(&lam, &Tolerances::default()) {
            Err(Error::InvariantViolation { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let report = verify_laminate(&lam, &Tolerances::default());
        assert!(!report.pass);
        assert_eq!(report.worst_manifold_atom, Some(1));
    }

    #[test]
    fn doc_round_trip_preserves_weights_bitwise() {
        let m = mats();
        let lam = Laminate::second_order(0.3, &v2(1.0, 0.5), 0.37, &v2(0.2, 0.1), &v2(0.0, 0.0), Law::Cubic, m);
        let doc = LaminateDoc::from(&lam);
        let text = serde_json::to_string(&doc).unwrap();
        let back: Laminate = serde_json::from_str::<LaminateDoc>(&text).unwrap().try_into().unwrap();
        assert_eq!(back, lam);
        assert!(verify_laminate(&back, &Tolerances::default()).weights_exact);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let m = mats();
        let lam = Laminate::first_order(0.5, &v2(1.0, 0.0), &v2(0.2, 0.0), Law::Cubic, m);
        let mut doc = LaminateDoc::from(&lam);
        doc.tree = NodeDoc::Split {
            fraction: 0.5,
            direction: vec![1.0, 0.0],
            children: vec![NodeDoc::Leaf { atom: 0 }, NodeDoc::Leaf { atom: 0 }],
        };
        assert!(Laminate::try_from(doc.clone()).is_err());
        doc.tree = NodeDoc::Leaf { atom: 7 };
        assert!(Laminate::try_from(doc).is_err());
    }

    #[test]
    fn hierarchical_mass_is_exact() {
        let m = mats();
        for &(t, r) in &[(0.1, 0.7), (0.333, 0.123456789), (0.9, 0.01)] {
            let lam = Laminate::second_order(t, &v2(1.0, 0.0), r, &v2(0.1, 0.0), &v2(0.0, 0.0), Law::Cubic, m);
            assert_eq!(hierarchical_mass(&lam.tree), 1.0);
        }
    }
}
