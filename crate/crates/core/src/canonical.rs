//! Affine normal forms of a quadratic and restriction to affine subspaces.
//!
//! Every non-constant quadratic can be written, after an invertible affine
//! change of variables `x = Pz + q`, as exactly one of five shapes:
//!
//! * `-z1^2-...-zk^2 + (z_{k+1}^2+...+z_m^2) + theta` with `theta >= 0`
//! * the same with a strictly negative constant `-theta'`
//! * the same squares plus a bare coordinate `z_{m+1}` (constants absorbed)
//! * `z1^2+...+z_m^2 (+ z_{m+1} | + c')` when the matrix is positive
//!   semidefinite
//! * the bare coordinate `z1` when the matrix part vanishes
//!
//! The negative-square count `k`, the rank `m`, the tail flag `delta`, and the
//! surviving constant are affine-congruence invariants (at this fixed sign
//! normalization), which is what the separation tests rely on.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{null_basis_vector, sym_eigen, sym_product, RANK_REL_TOL};
use crate::quadform::Quadratic;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FormTag {
    /// `-z1^2-...-zk^2 + delta*(...) + theta`, `theta >= 0`, `k >= 1`.
    NegSquaresPlusConst,
    /// `-z1^2-...-zk^2 + delta*(...) - theta'`, `theta' > 0`, `k >= 1`.
    NegSquaresMinusConst,
    /// `-z1^2-...-zk^2 + delta*(...) + z_{m+1}`, `k >= 1`, constants absorbed.
    NegSquaresPlusCoord,
    /// `z1^2+...+zm^2 + delta*z_{m+1} + (1-delta)*c'` (matrix PSD, `m >= 1`).
    PosSquaresPlusTail,
    /// `z1` (zero matrix part, nonzero linear part).
    Affine,
}

/// A canonical shape together with the affine chart `x = Pz + q` that maps
/// canonical coordinates back to the original ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CanonicalForm {
    pub tag: FormTag,
    /// Number of negative squares.
    pub k: usize,
    /// Rank of the matrix part (total square count).
    pub m: usize,
    /// Whether the tail block is present: positive squares for the
    /// negative-square family, the bare coordinate for `PosSquaresPlusTail`.
    pub delta: bool,
    pub theta: Option<f64>,
    pub theta_prime: Option<f64>,
    pub c_prime: Option<f64>,
    #[serde(with = "crate::serde_mat::matrix")]
    pub p: DMatrix<f64>,
    #[serde(with = "crate::serde_mat::vector")]
    pub q: DVector<f64>,
}

impl CanonicalForm {
    /// Evaluates the canonical expression at canonical coordinates `z`.
    pub fn eval_canonical(&self, z: &DVector<f64>) -> f64 {
        match self.tag {
            FormTag::Affine => z[0],
            FormTag::PosSquaresPlusTail => {
                let mut v = 0.0;
                for i in 0..self.m {
                    v += z[i] * z[i];
                }
                if self.delta {
                    v += z[self.m];
                } else {
                    v += self.c_prime.unwrap_or(0.0);
                }
                v
            }
            _ => {
                let mut v = 0.0;
                for i in 0..self.k {
                    v -= z[i] * z[i];
                }
                for i in self.k..self.m {
                    v += z[i] * z[i];
                }
                match self.tag {
                    FormTag::NegSquaresPlusConst => v + self.theta.unwrap_or(0.0),
                    FormTag::NegSquaresMinusConst => v - self.theta_prime.unwrap_or(0.0),
                    FormTag::NegSquaresPlusCoord => v + z[self.m],
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Maps canonical coordinates to original coordinates.
    pub fn to_original(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.p * z + &self.q
    }
}

/// Orthogonal matrix whose first column is `v/|v|` (Householder complement
/// fills the rest).
fn rotation_with_first_column(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let mut r = DMatrix::zeros(n, n);
    let unit = v / v.norm();
    r.set_column(0, &unit);
    let rest = null_basis_vector(&unit);
    for j in 0..n - 1 {
        r.set_column(j + 1, &rest.column(j));
    }
    r
}

/// Reduces a non-constant quadratic to its canonical shape.
///
/// The matrix is diagonalized and columns are ordered negatives-first, then
/// positives, then the null block; ranked coordinates are shifted to kill
/// their linear terms and rescaled to unit squares.  Any surviving linear
/// functional on the null block becomes a single bare coordinate that also
/// absorbs the constant.  The classification never flips the sign of `f`:
/// callers that want the mirrored form canonicalize `-f` themselves.
pub fn canonicalize(f: &Quadratic) -> Result<CanonicalForm> {
    let n = f.dim();
    let d = sym_eigen(f.matrix())?;
    let cut = d.rank_tol;

    let mut neg = Vec::new();
    let mut pos = Vec::new();
    let mut nul = Vec::new();
    for i in 0..n {
        let l = d.eigenvalues[i];
        if l < -cut {
            neg.push(i);
        } else if l > cut {
            pos.push(i);
        } else {
            nul.push(i);
        }
    }
    let k = neg.len();
    let m = k + pos.len();
    let a_norm = f.linear().norm();
    if m == 0 && a_norm <= RANK_REL_TOL * f.magnitude() {
        return Err(Error::ConstantQuadratic);
    }

    let order: Vec<usize> = neg.iter().chain(&pos).chain(&nul).copied().collect();
    let mut qt = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        qt.set_column(c, &d.eigenvectors.column(i));
    }
    let lam: Vec<f64> = order.iter().map(|&i| d.eigenvalues[i]).collect();
    let alpha = qt.transpose() * f.linear();

    let mut crit = f.constant();
    for i in 0..m {
        crit -= alpha[i] * alpha[i] / lam[i];
    }

    let beta = alpha.rows(m, n - m).clone_owned();
    let beta_norm = beta.norm();
    let has_lin = beta_norm > RANK_REL_TOL * (1.0 + a_norm);

    // Build scale/shift in the rotated basis: x = Qt * (T z + s).
    let mut t_mat = DMatrix::zeros(n, n);
    let mut s = DVector::zeros(n);
    for i in 0..m {
        t_mat[(i, i)] = 1.0 / lam[i].abs().sqrt();
        s[i] = -alpha[i] / lam[i];
    }
    if has_lin {
        let r = rotation_with_first_column(&beta);
        let scale = 1.0 / (2.0 * beta_norm);
        for j in 0..n - m {
            let fac = if j == 0 { scale } else { 1.0 };
            for i in 0..n - m {
                t_mat[(m + i, m + j)] = r[(i, j)] * fac;
            }
        }
        // The bare coordinate also absorbs the constant.
        let sh = -crit * scale;
        for i in 0..n - m {
            s[m + i] = r[(i, 0)] * sh;
        }
    } else {
        for j in 0..n - m {
            t_mat[(m + j, m + j)] = 1.0;
        }
    }
    let p = &qt * &t_mat;
    let q = &qt * &s;

    let crit_tol = RANK_REL_TOL * f.magnitude();
    let delta_neg = m > k;
    let form = if m == 0 {
        CanonicalForm {
            tag: FormTag::Affine,
            k: 0,
            m: 0,
            delta: true,
            theta: None,
            theta_prime: None,
            c_prime: None,
            p,
            q,
        }
    } else if k >= 1 {
        if has_lin {
            CanonicalForm {
                tag: FormTag::NegSquaresPlusCoord,
                k,
                m,
                delta: delta_neg,
                theta: None,
                theta_prime: None,
                c_prime: None,
                p,
                q,
            }
        } else if crit >= -crit_tol {
            CanonicalForm {
                tag: FormTag::NegSquaresPlusConst,
                k,
                m,
                delta: delta_neg,
                theta: Some(crit.max(0.0)),
                theta_prime: None,
                c_prime: None,
                p,
                q,
            }
        } else {
            CanonicalForm {
                tag: FormTag::NegSquaresMinusConst,
                k,
                m,
                delta: delta_neg,
                theta: None,
                theta_prime: Some(-crit),
                c_prime: None,
                p,
                q,
            }
        }
    } else {
        CanonicalForm {
            tag: FormTag::PosSquaresPlusTail,
            k: 0,
            m,
            delta: has_lin,
            theta: None,
            theta_prime: None,
            c_prime: if has_lin { None } else { Some(crit) },
            p,
            q,
        }
    };

    #[cfg(debug_assertions)]
    {
        let mag = f.magnitude();
        for probe in 0..3 {
            let z = DVector::from_fn(n, |i, _| ((i + 1) as f64 * 0.37 + probe as f64).sin());
            let err = (f.eval(&form.to_original(&z)) - form.eval_canonical(&z)).abs();
            debug_assert!(
                err <= 1e-7 * mag.max(z.norm_squared()),
                "canonical substitution drift {err}"
            );
        }
    }

    Ok(form)
}

/// Chart of the hyperplane `{x : h'x + h0 = 0}`: base point
/// `y0 = -(h0/h'h) h` and an orthonormal basis `V` of directions, so the
/// hyperplane is `{y0 + Vz}`.
pub fn hyperplane_chart(h: &DVector<f64>, h0: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let hh = h.norm_squared();
    if hh == 0.0 {
        return Err(Error::ZeroNormal);
    }
    let y0 = h * (-h0 / hh);
    let v = null_basis_vector(h);
    Ok((y0, v))
}

/// Restriction of `f` to the hyperplane `{h'x + h0 = 0}`, as a quadratic in
/// the `n-1` chart coordinates: matrix `V'AV`, linear part `V'(A y0 + a)`,
/// constant `f(y0)`.
pub fn restrict_to_hyperplane(f: &Quadratic, h: &DVector<f64>, h0: f64) -> Result<Quadratic> {
    if h.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: h.len(),
        });
    }
    let (y0, v) = hyperplane_chart(h, h0)?;
    let c = sym_product(f.matrix(), &v);
    let lin = v.transpose() * (f.matrix() * &y0 + f.linear());
    let c0 = f.eval(&y0);
    Quadratic::new(c, lin, c0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(rows: &[&[f64]], lin: &[f64], c: f64) -> Quadratic {
        let n = lin.len();
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Quadratic::new(m, DVector::from_row_slice(lin), c).unwrap()
    }

    fn check_substitution(f: &Quadratic, form: &CanonicalForm) {
        let n = f.dim();
        for probe in 0..20 {
            let z = DVector::from_fn(n, |i, _| ((probe * n + i) as f64 * 0.7133).sin() * 2.0);
            let lhs = f.eval(&form.to_original(&z));
            let rhs = form.eval_canonical(&z);
            assert!(
                (lhs - rhs).abs() <= 1e-8 * f.magnitude().max(z.norm_squared()),
                "substitution mismatch: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn hyperbolic_paraboloid_has_one_negative_square() {
        // x1*x2 = -t^2 + s^2 under (x1,x2) = (t+s, t-s) scaled
        let f = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], 0.0);
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::NegSquaresPlusConst);
        assert_eq!((c.k, c.m), (1, 2));
        assert!(c.delta);
        assert!(c.theta.unwrap().abs() < 1e-12);
        check_substitution(&f, &c);
    }

    #[test]
    fn shifted_parabola_keeps_its_constant() {
        let f = quad(&[&[1.0]], &[0.0], 1.0); // x^2 + 1
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::PosSquaresPlusTail);
        assert_eq!(c.m, 1);
        assert!(!c.delta);
        assert!((c.c_prime.unwrap() - 1.0).abs() < 1e-12);
        check_substitution(&f, &c);
    }

    #[test]
    fn saddle_with_positive_offset() {
        let f = quad(&[&[-1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 1.0);
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::NegSquaresPlusConst);
        assert_eq!((c.k, c.m), (1, 2));
        assert!(c.delta);
        assert!((c.theta.unwrap() - 1.0).abs() < 1e-12);
        check_substitution(&f, &c);
    }

    #[test]
    fn negative_definite_with_negative_constant() {
        let f = quad(&[&[-1.0]], &[0.0], -1.0); // -x^2 - 1
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::NegSquaresMinusConst);
        assert_eq!((c.k, c.m), (1, 1));
        assert!(!c.delta);
        assert!((c.theta_prime.unwrap() - 1.0).abs() < 1e-12);
        check_substitution(&f, &c);
    }

    #[test]
    fn null_space_slope_becomes_bare_coordinate() {
        // -x1^2 + x2 + 7: the constant must be absorbed into the coordinate
        let f = quad(&[&[-1.0, 0.0], &[0.0, 0.0]], &[0.0, 0.5], 7.0);
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::NegSquaresPlusCoord);
        assert_eq!((c.k, c.m), (1, 1));
        assert!(!c.delta);
        check_substitution(&f, &c);
    }

    #[test]
    fn psd_with_slope_gets_coordinate_tail() {
        // x1^2 + x2 - 3
        let f = quad(&[&[1.0, 0.0], &[0.0, 0.0]], &[0.0, 0.5], -3.0);
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::PosSquaresPlusTail);
        assert!(c.delta);
        assert_eq!(c.m, 1);
        check_substitution(&f, &c);
    }

    #[test]
    fn pure_linear_is_affine_form() {
        let f = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[1.0, -1.0], 4.0);
        let c = canonicalize(&f).unwrap();
        assert_eq!(c.tag, FormTag::Affine);
        assert_eq!((c.k, c.m), (0, 0));
        check_substitution(&f, &c);
    }

    #[test]
    fn constant_input_is_rejected() {
        let f = Quadratic::constant_fn(2, 3.0);
        assert!(matches!(canonicalize(&f), Err(Error::ConstantQuadratic)));
    }

    #[test]
    fn chart_p_is_invertible() {
        let f = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[1.0, 0.0], -1.0);
        let c = canonicalize(&f).unwrap();
        let det = c.p.clone().determinant();
        assert!(det.abs() > 1e-8, "det = {det}");
        check_substitution(&f, &c);
    }

    #[test]
    fn restrict_circle_to_axis() {
        let f = quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 0.0);
        let g = restrict_to_hyperplane(&f, &DVector::from_vec(vec![0.0, 1.0]), 0.0).unwrap();
        assert_eq!(g.dim(), 1);
        let z = DVector::from_vec(vec![1.5]);
        assert!((g.eval(&z) - 2.25).abs() < 1e-12);
    }

    #[test]
    fn restrict_hyperbola_to_vertical_line() {
        // x1*x2 - 1 on {x1 = 1} is x2 - 1
        let f = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        let g = restrict_to_hyperplane(&f, &DVector::from_vec(vec![1.0, 0.0]), -1.0).unwrap();
        assert_eq!(g.dim(), 1);
        for t in [-2.0, 0.0, 0.5, 3.0] {
            let z = DVector::from_vec(vec![t]);
            // the surviving coordinate tracks x2 up to the chart's sign
            let x2 = {
                let (y0, v) = hyperplane_chart(&DVector::from_vec(vec![1.0, 0.0]), -1.0).unwrap();
                (y0 + &v * &z)[1]
            };
            assert!((g.eval(&z) - (x2 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_agrees_with_direct_evaluation() {
        let f = quad(&[&[2.0, -0.5], &[-0.5, -1.0]], &[0.3, 0.7], -2.0);
        let h = DVector::from_vec(vec![1.0, 2.0]);
        let h0 = 3.0;
        let g = restrict_to_hyperplane(&f, &h, h0).unwrap();
        let (y0, v) = hyperplane_chart(&h, h0).unwrap();
        assert!((h.dot(&y0) + h0).abs() < 1e-12);
        for t in [-1.0, 0.0, 2.0] {
            let z = DVector::from_vec(vec![t]);
            let x = &y0 + &v * &z;
            assert!((g.eval(&z) - f.eval(&x)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_normal_is_rejected() {
        let f = quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 0.0);
        assert!(matches!(
            restrict_to_hyperplane(&f, &DVector::zeros(2), 1.0),
            Err(Error::ZeroNormal)
        ));
    }
}
