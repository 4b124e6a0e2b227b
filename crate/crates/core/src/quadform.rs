//! Quadratic functions `f(x) = x'Ax + 2a'x + a0` and their sign behavior.
//!
//! The linear term is stored with the factor-2 convention, so `linear` holds
//! `a`, not `2a`.  JSON input using the plain convention (`b'x`) is normalized
//! to this storage on ingest by the CLI layer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, sym_eigen, SpectralDecomp, RANK_REL_TOL};
use crate::{Error, Result};

fn vec_max_abs(v: &DVector<f64>) -> f64 {
    if v.len() == 0 {
        0.0
    } else {
        v.amax()
    }
}

/// A quadratic function on R^n.  Immutable after construction; the stored
/// matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuadraticRepr", into = "QuadraticRepr")]
pub struct Quadratic {
    matrix: DMatrix<f64>,
    linear: DVector<f64>,
    constant: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct QuadraticRepr {
    matrix: Vec<Vec<f64>>,
    linear: Vec<f64>,
    constant: f64,
}

impl TryFrom<QuadraticRepr> for Quadratic {
    type Error = String;

    fn try_from(r: QuadraticRepr) -> std::result::Result<Self, String> {
        let m = crate::serde_mat::matrix_from_rows(&r.matrix)?;
        Quadratic::new(m, DVector::from_vec(r.linear), r.constant).map_err(|e| e.to_string())
    }
}

impl From<Quadratic> for QuadraticRepr {
    fn from(q: Quadratic) -> Self {
        QuadraticRepr {
            matrix: (0..q.matrix.nrows())
                .map(|i| q.matrix.row(i).iter().copied().collect())
                .collect(),
            linear: q.linear.iter().copied().collect(),
            constant: q.constant,
        }
    }
}

impl Quadratic {
    /// Builds a quadratic, rejecting matrices that are asymmetric beyond
    /// `1e-8 * max(1, |A|)` and symmetrizing smaller drift exactly.
    pub fn new(matrix: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: n,
                cols: matrix.ncols(),
            });
        }
        if linear.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: linear.len(),
            });
        }
        let scale = 1f64.max(max_abs(&matrix));
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
            }
        }
        let tol = 1e-8 * scale;
        if max_asym > tol {
            return Err(Error::NotSymmetric { max_asym, tol });
        }
        Ok(Self::symmetrized(matrix, linear, constant))
    }

    /// Builds a quadratic from a possibly asymmetric matrix by averaging
    /// `(A + A')/2`, which leaves the function values unchanged.
    pub fn symmetrized(matrix: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Self {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols(), "matrix must be square");
        assert_eq!(n, linear.len(), "linear part must match matrix dimension");
        let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)]));
        Quadratic {
            matrix: sym,
            linear,
            constant,
        }
    }

    /// Quadratic with zero matrix and linear parts.
    pub fn constant_fn(n: usize, c: f64) -> Self {
        Quadratic {
            matrix: DMatrix::zeros(n, n),
            linear: DVector::zeros(n),
            constant: c,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `max(1, largest coefficient magnitude)`; the scale used for relative
    /// tolerances involving this function.
    pub fn magnitude(&self) -> f64 {
        1f64.max(max_abs(&self.matrix))
            .max(vec_max_abs(&self.linear))
            .max(self.constant.abs())
    }

    /// Whether the matrix part vanishes relative to the coefficient scale.
    pub fn hessian_is_zero(&self) -> bool {
        max_abs(&self.matrix) <= RANK_REL_TOL * self.magnitude()
    }

    /// Whether every coefficient is within `tol` of zero (f vanishes
    /// identically to tolerance).
    pub fn is_zero(&self, tol: f64) -> bool {
        max_abs(&self.matrix) <= tol && vec_max_abs(&self.linear) <= tol && self.constant.abs() <= tol
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.dim(), "evaluation point has wrong dimension");
        self.eval_slice(x.as_slice())
    }

    /// Allocation-free evaluation; the hot path for the sampling oracle.
    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..n {
            let xi = x[i];
            lin += self.linear[i] * xi;
            let mut row = 0.0;
            for j in 0..n {
                row += self.matrix[(i, j)] * x[j];
            }
            quad += xi * row;
        }
        quad + 2.0 * lin + self.constant
    }

    /// Gradient `2(Ax + a)`.
    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.matrix * x + &self.linear) * 2.0
    }

    pub fn neg(&self) -> Self {
        Quadratic {
            matrix: -&self.matrix,
            linear: -&self.linear,
            constant: -self.constant,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Quadratic {
            matrix: &self.matrix * c,
            linear: &self.linear * c,
            constant: self.constant * c,
        }
    }

    /// `alpha*f + beta*g`.
    pub fn linear_comb(alpha: f64, f: &Self, beta: f64, g: &Self) -> Result<Self> {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: g.dim(),
            });
        }
        Ok(Quadratic {
            matrix: &f.matrix * alpha + &g.matrix * beta,
            linear: &f.linear * alpha + &g.linear * beta,
            constant: alpha * f.constant + beta * g.constant,
        })
    }

    /// Spectral data of the matrix part together with the stationary point
    /// `x0 = -A^+ a`, the value there, and the component of the linear part
    /// outside the range of `A` (the residual slope on the null space).
    pub(crate) fn stationary_data(&self) -> Result<StationaryData> {
        let decomp = sym_eigen(&self.matrix)?;
        let pa = decomp.apply_pinv(&self.linear);
        let x0 = -&pa;
        let value = self.constant - self.linear.dot(&pa);
        let lin_null = decomp.null_component(&self.linear);
        Ok(StationaryData {
            decomp,
            x0,
            value,
            lin_null,
        })
    }

    /// Classifies the sign behavior of `f` over all of R^n.
    ///
    /// `Nonneg` means `A >= 0`, `a` in the range of `A`, and the attained
    /// minimum `a0 - a'A^+a >= -tol`; `Nonpos` is the mirrored test on `-f`;
    /// `Zero` means every coefficient is within `tol` of zero.  Everything
    /// else is `TwoSided`, with explicit strict-sign witnesses built from an
    /// eigenvalue direction, a null-space slope, or the stationary point.
    pub fn sign_profile(&self, tol: f64) -> Result<SignProfile> {
        let tol = tol.max(0.0);
        if self.is_zero(tol) {
            return Ok(SignProfile {
                tag: SignTag::Zero,
                witness_neg: None,
                witness_pos: None,
                global_min: Some(0.0),
                min_attained: true,
            });
        }
        let coeff_slack = RANK_REL_TOL * self.magnitude();
        let mat_zero = max_abs(&self.matrix) <= coeff_slack;
        let lin_zero = vec_max_abs(&self.linear) <= coeff_slack;
        if mat_zero && lin_zero {
            // Constant function with a nonzero value (the zero case returned above).
            let c = self.constant;
            let tag = if c >= 0.0 { SignTag::Nonneg } else { SignTag::Nonpos };
            return Ok(SignProfile {
                tag,
                witness_neg: None,
                witness_pos: None,
                global_min: Some(c),
                min_attained: true,
            });
        }

        let st = self.stationary_data()?;
        let psd = st.decomp.min_eig() >= -coeff_slack;
        let nsd = st.decomp.max_eig() <= coeff_slack;
        let in_range = st.lin_null.norm() <= RANK_REL_TOL * (1.0 + self.linear.norm());

        if psd && in_range && st.value >= -tol {
            return Ok(SignProfile {
                tag: SignTag::Nonneg,
                witness_neg: None,
                witness_pos: None,
                global_min: Some(st.value),
                min_attained: true,
            });
        }
        if nsd && !psd {
            let mirrored = self.neg().sign_profile(tol)?;
            return Ok(match mirrored.tag {
                SignTag::Nonneg => SignProfile {
                    tag: SignTag::Nonpos,
                    witness_neg: None,
                    witness_pos: None,
                    // -f attains its minimum, so f attains its maximum; the
                    // infimum of a nonconstant concave-direction quadratic is
                    // -inf, hence no finite global minimum to report.
                    global_min: None,
                    min_attained: false,
                },
                _ => SignProfile {
                    tag: SignTag::TwoSided,
                    witness_neg: mirrored.witness_pos,
                    witness_pos: mirrored.witness_neg,
                    global_min: None,
                    min_attained: false,
                },
            });
        }

        let has_slope = !in_range;
        let n = self.dim();
        let mut witness_pos = if st.value > tol {
            Some(st.x0.clone())
        } else {
            None
        };
        if witness_pos.is_none() && st.decomp.max_eig() > coeff_slack {
            let dir = st.decomp.eigenvectors.column(n - 1).clone_owned();
            witness_pos = self.ray_witness(&st.x0, &dir, true, tol);
        }
        if witness_pos.is_none() && has_slope {
            witness_pos = self.ray_witness(&st.x0, &st.lin_null, true, tol);
        }

        let mut witness_neg = if st.value < -tol {
            Some(st.x0.clone())
        } else {
            None
        };
        if witness_neg.is_none() && st.decomp.min_eig() < -coeff_slack {
            let dir = st.decomp.eigenvectors.column(0).clone_owned();
            witness_neg = self.ray_witness(&st.x0, &dir, false, tol);
        }
        if witness_neg.is_none() && has_slope {
            let dir = -&st.lin_null;
            witness_neg = self.ray_witness(&st.x0, &dir, false, tol);
        }

        Ok(SignProfile {
            tag: SignTag::TwoSided,
            witness_neg,
            witness_pos,
            global_min: None,
            min_attained: false,
        })
    }

    /// Walks `start + t*dir` with doubling `t` until `f` clears `tol` with the
    /// requested sign.
    fn ray_witness(
        &self,
        start: &DVector<f64>,
        dir: &DVector<f64>,
        want_pos: bool,
        tol: f64,
    ) -> Option<DVector<f64>> {
        let mut t = 1.0f64;
        for _ in 0..200 {
            let x = start + dir * t;
            let v = self.eval(&x);
            if (want_pos && v > tol) || (!want_pos && v < -tol) {
                return Some(x);
            }
            t *= 2.0;
            if !t.is_finite() {
                break;
            }
        }
        None
    }
}

pub(crate) struct StationaryData {
    pub decomp: SpectralDecomp,
    pub x0: DVector<f64>,
    pub value: f64,
    pub lin_null: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SignTag {
    TwoSided,
    Nonneg,
    Nonpos,
    Zero,
}

/// Sign behavior of a quadratic over all of R^n, with strict-sign witnesses
/// when it takes both signs and the attained minimum when it is one-sided.
#[derive(Debug, Clone)]
pub struct SignProfile {
    pub tag: SignTag,
    pub witness_neg: Option<DVector<f64>>,
    pub witness_pos: Option<DVector<f64>>,
    /// Finite attained infimum, present for `Nonneg`, `Zero`, and constant
    /// `Nonpos` functions.
    pub global_min: Option<f64>,
    pub min_attained: bool,
}

/// The pair `(f1(x), f2(x))` — one point of the joint range of the two
/// functions.
pub fn joint_value(f1: &Quadratic, f2: &Quadratic, x: &DVector<f64>) -> Result<(f64, f64)> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    if x.len() != f1.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: x.len(),
        });
    }
    Ok((f1.eval(x), f2.eval(x)))
}

/// `f1(x)^2 + f2(x)^2`, the quartic whose infimum drives the intersection
/// decision.  Allocation-free.
pub fn quartic_value(f1: &Quadratic, f2: &Quadratic, x: &[f64]) -> f64 {
    let v1 = f1.eval_slice(x);
    let v2 = f2.eval_slice(x);
    v1 * v1 + v2 * v2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(rows: &[&[f64]], lin: &[f64], c: f64) -> Quadratic {
        let n = lin.len();
        let m = if rows.is_empty() {
            DMatrix::zeros(n, n)
        } else {
            DMatrix::from_fn(n, n, |i, j| rows[i][j])
        };
        Quadratic::new(m, DVector::from_row_slice(lin), c).unwrap()
    }

    #[test]
    fn eval_matches_hand_values() {
        // x1^2 at 3
        let f = quad(&[&[1.0]], &[0.0], 0.0);
        assert_eq!(f.eval(&DVector::from_vec(vec![3.0])), 9.0);

        // x1*x2 - 1 at (1,1)
        let g = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        assert_eq!(g.eval(&DVector::from_vec(vec![1.0, 1.0])), 0.0);

        // x1^2 + x1*x2 - 1 at (1/10, 10): 0.01 + 1 - 1
        let h = quad(&[&[1.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        let v = h.eval(&DVector::from_vec(vec![0.1, 10.0]));
        assert!((v - 0.01).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn joint_value_pairs() {
        let f1 = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.5, 0.0], 0.0); // x1
        let f2 = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.0, 0.5], 0.0); // x2
        assert_eq!(
            joint_value(&f1, &f2, &DVector::from_vec(vec![0.0, 0.0])).unwrap(),
            (0.0, 0.0)
        );

        // x^2 and xy - 1 along the hyperbola-approaching sequence
        let g1 = quad(&[&[1.0, 0.0], &[0.0, 0.0]], &[0.0, 0.0], 0.0);
        let g2 = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        let (a, b) = joint_value(&g1, &g2, &DVector::from_vec(vec![0.1, 10.0])).unwrap();
        assert!((a - 0.01).abs() < 1e-12 && b.abs() < 1e-12);

        // concentric circles at (1, 0)
        let c1 = quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], -1.0);
        let c2 = quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], -4.0);
        let (a, b) = joint_value(&c1, &c2, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!((a, b), (0.0, -3.0));
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            Quadratic::new(m.clone(), DVector::zeros(2), 0.0),
            Err(Error::NotSymmetric { .. })
        ));
        // symmetrized accepts the same data and averages the cross terms
        let q = Quadratic::symmetrized(m, DVector::zeros(2), 0.0);
        assert_eq!(q.matrix()[(0, 1)], 0.5);
        assert_eq!(q.matrix()[(1, 0)], 0.5);
    }

    #[test]
    fn gradient_is_twice_ax_plus_a() {
        let f = quad(&[&[2.0, 0.0], &[0.0, 3.0]], &[1.0, -1.0], 5.0);
        let g = f.grad(&DVector::from_vec(vec![1.0, 2.0]));
        assert_eq!(g[0], 2.0 * (2.0 + 1.0));
        assert_eq!(g[1], 2.0 * (6.0 - 1.0));
    }

    #[test]
    fn profile_of_positive_paraboloid() {
        let f = quad(&[&[1.0]], &[0.0], 1.0); // x^2 + 1
        let p = f.sign_profile(1e-9).unwrap();
        assert_eq!(p.tag, SignTag::Nonneg);
        assert_eq!(p.global_min, Some(1.0));
        assert!(p.min_attained);
        assert!(p.witness_neg.is_none());
    }

    #[test]
    fn profile_of_bare_coordinate() {
        let f = quad(&[&[0.0]], &[0.5], 0.0); // x1
        let p = f.sign_profile(1e-9).unwrap();
        assert_eq!(p.tag, SignTag::TwoSided);
        let wp = p.witness_pos.unwrap();
        let wn = p.witness_neg.unwrap();
        assert!(f.eval(&wp) > 0.0);
        assert!(f.eval(&wn) < 0.0);
    }

    #[test]
    fn profile_of_saddle_with_offset() {
        let f = quad(&[&[-1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 1.0); // -x1^2 + x2^2 + 1
        let p = f.sign_profile(1e-9).unwrap();
        assert_eq!(p.tag, SignTag::TwoSided);
        assert!(f.eval(&p.witness_pos.unwrap()) > 0.0);
        assert!(f.eval(&p.witness_neg.unwrap()) < 0.0);
    }

    #[test]
    fn profile_mirrors_under_negation() {
        let cases = [
            quad(&[&[1.0]], &[0.0], 1.0),
            quad(&[&[0.0]], &[0.5], 0.0),
            quad(&[&[-1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 1.0),
            quad(&[&[1.0, 0.0], &[0.0, 2.0]], &[1.0, 0.0], -3.0),
        ];
        for f in cases {
            let p = f.sign_profile(1e-9).unwrap();
            let q = f.neg().sign_profile(1e-9).unwrap();
            let mirrored = match p.tag {
                SignTag::Nonneg => SignTag::Nonpos,
                SignTag::Nonpos => SignTag::Nonneg,
                t => t,
            };
            assert_eq!(q.tag, mirrored);
        }
    }

    #[test]
    fn nonneg_minimum_matches_stationary_point() {
        // (x1 - 1)^2 + 2 = x1^2 - 2x1 + 3, so a = (-1), minimum 2 at x = 1.
        let f = quad(&[&[1.0]], &[-1.0], 3.0);
        let p = f.sign_profile(1e-9).unwrap();
        assert_eq!(p.tag, SignTag::Nonneg);
        assert!((p.global_min.unwrap() - 2.0).abs() < 1e-12);
        let st = f.stationary_data().unwrap();
        assert!((f.eval(&st.x0) - p.global_min.unwrap()).abs() < 1e-9 * f.magnitude());
    }

    #[test]
    fn constant_profiles() {
        assert_eq!(
            Quadratic::constant_fn(2, 5.0).sign_profile(1e-9).unwrap().tag,
            SignTag::Nonneg
        );
        assert_eq!(
            Quadratic::constant_fn(2, -5.0).sign_profile(1e-9).unwrap().tag,
            SignTag::Nonpos
        );
        let z = Quadratic::constant_fn(2, 0.0).sign_profile(1e-9).unwrap();
        assert_eq!(z.tag, SignTag::Zero);
        assert_eq!(z.global_min, Some(0.0));
    }

    #[test]
    fn json_round_trip() {
        let f = quad(&[&[1.0, 0.5], &[0.5, 0.0]], &[0.0, -1.0], -1.0);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"matrix\""), "{s}");
        let back: Quadratic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn json_rejects_asymmetric_matrix() {
        let s = r#"{"matrix":[[0.0,1.0],[0.0,0.0]],"linear":[0.0,0.0],"constant":0.0}"#;
        assert!(serde_json::from_str::<Quadratic>(s).is_err());
    }

    #[test]
    fn linear_comb_and_scaling() {
        let f = quad(&[&[1.0]], &[2.0], 3.0);
        let g = quad(&[&[-1.0]], &[0.5], 1.0);
        let h = Quadratic::linear_comb(2.0, &f, -1.0, &g).unwrap();
        let x = DVector::from_vec(vec![1.7]);
        let want = 2.0 * f.eval(&x) - g.eval(&x);
        assert!((h.eval(&x) - want).abs() < 1e-12);
        assert!((f.scaled(-3.0).eval(&x) + 3.0 * f.eval(&x)).abs() < 1e-12);
    }
}
