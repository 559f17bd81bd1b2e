//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::Vector;

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Jacobian of the cubic map `w -> |w|^2 w`, i.e. `|w|^2 I + 2 w w^T`.
pub(crate) fn cubic_jacobian(w: &Vector) -> DMatrix<f64> {
    let n = w.len();
    let mut d = w * w.transpose() * 2.0;
    let s = w.norm_squared();
    for i in 0..n {
        d[(i, i)] += s;
    }
    d
}

/// Contraction of the derivative of [`cubic_jacobian`] with `y`:
/// `M_im = sum_k d(D_ik)/d(w_m) y_k = 2 (y w^T + w y^T) + 2 (w.y) I`.
pub(crate) fn cubic_jacobian_derivative(w: &Vector, y: &Vector) -> DMatrix<f64> {
    let n = w.len();
    let mut m = (y * w.transpose() + w * y.transpose()) * 2.0;
    let wy = 2.0 * w.dot(y);
    for i in 0..n {
        m[(i, i)] += wy;
    }
    m
}

/// A unit vector orthogonal to `v`, chosen deterministically: in the plane it
/// is `v` rotated by +90 degrees, otherwise the first Gram-Schmidt survivor of
/// the standard basis. For `v = 0` this is the first basis vector.
pub fn orthogonal_unit(v: &Vector) -> Vector {
    let n = v.len();
    let norm = v.norm();
    if norm == 0.0 {
        let mut e = Vector::zeros(n);
        e[0] = 1.0;
        return e;
    }
    let vhat = v / norm;
    if n == 2 {
        return Vector::from_column_slice(&[-vhat[1], vhat[0]]);
    }
    let mut best: Option<Vector> = None;
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        let w = &e - &vhat * vhat[i];
        let wn = w.norm();
        if wn > 0.5 {
            return w / wn;
        }
        if best.as_ref().is_none_or(|b| wn > b.norm()) {
            best = Some(w);
        }
    }
    let w = best.expect("n >= 1");
    let wn = w.norm();
    w / wn
}

/// Unit vector along `v`, or `None` when `v` vanishes.
pub(crate) fn unit(v: &Vector) -> Option<Vector> {
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}
