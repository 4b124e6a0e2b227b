//! Separation certificates: when does one quadric level set split another
//! into two nonempty parts of opposite sign?
//!
//! `{g=0}` can only separate `{f=0}` when the matrix parts satisfy `B = λA`,
//! which makes `g - λf` affine; the affine separator is then tested against
//! the canonical shape of `f` (or `-f`): one negative square, a strictly
//! positive surviving constant, the affine function supported on the square
//! coordinates with a nonzero leading coefficient, and `f` strictly positive
//! on the separating hyperplane itself.  A verified certificate is a proof of
//! disjointness that needs no optimization to re-check.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::canonical::{canonicalize, restrict_to_hyperplane, CanonicalForm, FormTag};
use crate::linalg::{max_abs, pair_scale, RANK_REL_TOL};
use crate::quadform::Quadratic;
use crate::{Error, Result};

/// Which of the two input surfaces acts as the separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Orientation {
    FirstSeparatesSecond,
    SecondSeparatesFirst,
}

/// Proof data that the affine set `{nu'x + nu0 = 0}` (equal to `{g=0}` after
/// subtracting `lambda * f`) separates `{f=0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeparationCertificate {
    /// Multiplier with `g_matrix = lambda * f_matrix`.
    pub lambda: f64,
    #[serde(with = "crate::serde_mat::vector")]
    pub nu: DVector<f64>,
    pub nu0: f64,
    /// Canonical form of `f` (or `-f` when `sign_flipped`) in the separating
    /// basis.
    pub canon: CanonicalForm,
    pub sign_flipped: bool,
    /// Attained minimum of `±f` on the separating hyperplane; strictly
    /// positive.
    pub restricted_min: f64,
}

/// Least-squares multiplier test: `Some(lambda)` when `B = lambda * A` holds
/// to `tol * scale`, where `lambda` minimizes the Frobenius residual.  A zero
/// `A` admits only `B = 0` (returning `lambda = 0`).
pub fn is_scalar_multiple(b: &DMatrix<f64>, a: &DMatrix<f64>, tol: f64) -> Option<f64> {
    let scale = pair_scale(a, b);
    let slack = tol.max(RANK_REL_TOL) * scale;
    if max_abs(a) <= slack {
        return if max_abs(b) <= slack { Some(0.0) } else { None };
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            num += a[(i, j)] * b[(i, j)];
            den += a[(i, j)] * a[(i, j)];
        }
    }
    let lambda = num / den;
    let resid = max_abs(&(b - a * lambda));
    if resid <= slack {
        Some(lambda)
    } else {
        None
    }
}

/// Tests whether the hyperplane `{nu'x + nu0 = 0}` separates `{f=0}`,
/// trying `f` as given and then `-f`.  `tol` is relative to the data scales.
pub fn affine_separates_quadric(
    nu: &DVector<f64>,
    nu0: f64,
    f: &Quadratic,
    tol: f64,
) -> Result<Option<SeparationCertificate>> {
    if nu.norm() == 0.0 {
        return Err(Error::ZeroNormal);
    }
    if nu.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: nu.len(),
        });
    }
    for (oriented, flipped) in [(f.clone(), false), (f.neg(), true)] {
        if let Some(cert) = oriented_separation(nu, nu0, &oriented, flipped, tol)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// One orientation of the separation test: canonical shape, support pattern,
/// and strict positivity on the hyperplane.
fn oriented_separation(
    nu: &DVector<f64>,
    nu0: f64,
    f: &Quadratic,
    flipped: bool,
    tol: f64,
) -> Result<Option<SeparationCertificate>> {
    let canon = match canonicalize(f) {
        Ok(c) => c,
        Err(Error::ConstantQuadratic) => return Ok(None),
        Err(e) => return Err(e),
    };
    let theta_floor = tol * f.magnitude();
    if canon.tag != FormTag::NegSquaresPlusConst
        || canon.k != 1
        || canon.theta.unwrap_or(0.0) <= theta_floor
    {
        return Ok(None);
    }
    // Coefficients of the affine function in canonical coordinates: the
    // separator must live on the square coordinates and lead with z1.
    let w = canon.p.transpose() * nu;
    let w_scale = 1f64.max(if w.len() == 0 { 0.0 } else { w.amax() });
    let coeff_tol = tol * w_scale;
    if w[0].abs() <= coeff_tol {
        return Ok(None);
    }
    for i in canon.m..w.len() {
        if w[i].abs() > coeff_tol {
            return Ok(None);
        }
    }
    // Strict positivity of f on the hyperplane itself.
    let restricted = restrict_to_hyperplane(f, nu, nu0)?;
    let Some(min) = attained_min(&restricted)? else {
        return Ok(None);
    };
    if min <= tol * restricted.magnitude().max(f.magnitude()) {
        return Ok(None);
    }
    Ok(Some(SeparationCertificate {
        lambda: 0.0,
        nu: nu.clone(),
        nu0,
        canon,
        sign_flipped: flipped,
        restricted_min: min,
    }))
}

/// Finite attained minimum of a quadratic: requires a PSD matrix with the
/// linear part in its range; `None` when the infimum is `-inf`.
fn attained_min(q: &Quadratic) -> Result<Option<f64>> {
    let st = q.stationary_data()?;
    let slack = RANK_REL_TOL * q.magnitude();
    let psd = st.decomp.min_eig() >= -slack;
    let in_range = st.lin_null.norm() <= RANK_REL_TOL * (1.0 + q.linear().norm());
    Ok(if psd && in_range { Some(st.value) } else { None })
}

/// Decides whether `{g=0}` separates `{f=0}` and returns the certificate.
///
/// Requires `g`'s matrix to be a scalar multiple of `f`'s; the affine
/// function `g - lambda*f` (which has the same zero set as `g` on `{f=0}`...
/// precisely: `{g=0} = {g - lambda*f = 0}` only off `{f=0}`, but separation
/// is a statement about sign patterns of `g` on `{f=0}`, where the two agree
/// exactly) is then handed to the hyperplane test.
pub fn separates(
    g: &Quadratic,
    f: &Quadratic,
    tol: f64,
) -> Result<Option<SeparationCertificate>> {
    if g.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let Some(lambda) = is_scalar_multiple(g.matrix(), f.matrix(), tol) else {
        return Ok(None);
    };
    let nu = (g.linear() - f.linear() * lambda) * 2.0;
    let nu0 = g.constant() - lambda * f.constant();
    let scale = 1f64.max(g.magnitude()).max(f.magnitude().abs() * lambda.abs());
    if nu.norm() <= tol.max(RANK_REL_TOL) * scale {
        // g - lambda*f is (numerically) constant: no separating hyperplane.
        return Ok(None);
    }
    let mut cert = match affine_separates_quadric(&nu, nu0, f, tol)? {
        Some(c) => c,
        None => return Ok(None),
    };
    cert.lambda = lambda;
    Ok(Some(cert))
}

/// Decides whether the affine function `g` separates the strict sublevel set
/// `{f < 0}`.  Same machinery as the quadric test but on `f` as given, with
/// `theta >= 0` allowed and non-strict positivity of `f` on `{g=0}`.
pub fn separates_strict_sublevel(g: &Quadratic, f: &Quadratic, tol: f64) -> Result<bool> {
    if g.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    if !g.hessian_is_zero() {
        return Ok(false);
    }
    let nu = g.linear() * 2.0;
    let nu0 = g.constant();
    if nu.norm() <= tol.max(RANK_REL_TOL) * g.magnitude() {
        return Ok(false);
    }
    let canon = match canonicalize(f) {
        Ok(c) => c,
        Err(Error::ConstantQuadratic) => return Ok(false),
        Err(e) => return Err(e),
    };
    if canon.tag != FormTag::NegSquaresPlusConst || canon.k != 1 {
        return Ok(false);
    }
    let w = canon.p.transpose() * &nu;
    let w_scale = 1f64.max(if w.len() == 0 { 0.0 } else { w.amax() });
    let coeff_tol = tol * w_scale;
    if w[0].abs() <= coeff_tol {
        return Ok(false);
    }
    for i in canon.m..w.len() {
        if w[i].abs() > coeff_tol {
            return Ok(false);
        }
    }
    let restricted = restrict_to_hyperplane(f, &nu, nu0)?;
    let Some(min) = attained_min(&restricted)? else {
        return Ok(false);
    };
    Ok(min >= -tol * restricted.magnitude().max(f.magnitude()))
}

/// Tries `{f1=0}` as separator of `{f2=0}`, then the reverse.
pub fn mutual_separation(
    f1: &Quadratic,
    f2: &Quadratic,
    tol: f64,
) -> Result<Option<(Orientation, SeparationCertificate)>> {
    if let Some(cert) = separates(f1, f2, tol)? {
        return Ok(Some((Orientation::FirstSeparatesSecond, cert)));
    }
    if let Some(cert) = separates(f2, f1, tol)? {
        return Ok(Some((Orientation::SecondSeparatesFirst, cert)));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-8;

    fn quad(rows: &[&[f64]], lin: &[f64], c: f64) -> Quadratic {
        let n = lin.len();
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Quadratic::new(m, DVector::from_row_slice(lin), c).unwrap()
    }

    #[test]
    fn scalar_multiple_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.0]);
        let b = &a * 2.0;
        let l = is_scalar_multiple(&b, &a, TOL).unwrap();
        assert!((l - 2.0).abs() < 1e-12);

        // independent pair: x1^2 + x1x2 vs x1x2
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert!(is_scalar_multiple(&a2, &a1, TOL).is_none());
        assert!(is_scalar_multiple(&a1, &a2, TOL).is_none());

        // both zero
        let z = DMatrix::zeros(2, 2);
        assert_eq!(is_scalar_multiple(&z, &z, TOL), Some(0.0));
        // zero base, nonzero target
        assert!(is_scalar_multiple(&a1, &z, TOL).is_none());
    }

    #[test]
    fn hyperplane_between_parabola_branches() {
        // {x1=0} separates {-x1^2 + 1 = 0} = {x1 = ±1}
        let f = quad(&[&[-1.0]], &[0.0], 1.0);
        let nu = DVector::from_vec(vec![1.0]);
        let cert = affine_separates_quadric(&nu, 0.0, &f, TOL).unwrap().unwrap();
        assert!(!cert.sign_flipped);
        assert!((cert.restricted_min - 1.0).abs() < 1e-9);
        assert!((cert.canon.theta.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn leading_coefficient_must_hit_the_negative_square() {
        let f = quad(&[&[-1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 1.0);
        // {x1=0} separates the two sheets of x1^2 - x2^2 = 1
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let cert = affine_separates_quadric(&e1, 0.0, &f, TOL).unwrap();
        assert!(cert.is_some());
        // {x2=0} cuts straight through both sheets: no separation either way
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert!(affine_separates_quadric(&e2, 0.0, &f, TOL).unwrap().is_none());
    }

    #[test]
    fn psd_quadric_is_never_separated() {
        // f = x1^2 has no negative square and theta = 0 after the flip
        let f = quad(&[&[1.0]], &[0.0], 0.0);
        let nu = DVector::from_vec(vec![1.0]);
        assert!(affine_separates_quadric(&nu, 1.0, &f, TOL).unwrap().is_none());
    }

    #[test]
    fn flipped_orientation_for_two_point_quadric() {
        // {x1=0} separates {x1^2 - 1 = 0} = {±1}; the working form is -f.
        let f = quad(&[&[1.0]], &[0.0], -1.0);
        let nu = DVector::from_vec(vec![1.0]);
        let cert = affine_separates_quadric(&nu, 0.0, &f, TOL).unwrap().unwrap();
        assert!(cert.sign_flipped);
        assert!(cert.restricted_min > 0.9);
    }

    #[test]
    fn line_separates_hyperbola() {
        // g = x1, f = x1*x2 - 1
        let g = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.5, 0.0], 0.0);
        let f = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        let cert = separates(&g, &f, TOL).unwrap().unwrap();
        assert_eq!(cert.lambda, 0.0);
        assert!(cert.sign_flipped, "the hyperbola qualifies via -f");
        assert!((cert.restricted_min - 1.0).abs() < 1e-9);

        // the hyperbola does not separate the line
        assert!(separates(&f, &g, TOL).unwrap().is_none());

        let (orient, _) = mutual_separation(&g, &f, TOL).unwrap().unwrap();
        assert_eq!(orient, Orientation::FirstSeparatesSecond);
    }

    #[test]
    fn independent_hessians_cannot_separate() {
        let f1 = quad(&[&[1.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        let f2 = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        assert!(mutual_separation(&f1, &f2, TOL).unwrap().is_none());
    }

    #[test]
    fn identical_surfaces_cannot_separate() {
        let f = quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], -1.0);
        assert!(mutual_separation(&f, &f, TOL).unwrap().is_none());
    }

    #[test]
    fn sublevel_separation_allows_zero_offset() {
        // g = x1 separates {-x1^2 < 0} = {x1 != 0}
        let g = quad(&[&[0.0]], &[0.5], 0.0);
        let f = quad(&[&[-1.0]], &[0.0], 0.0);
        assert!(separates_strict_sublevel(&g, &f, TOL).unwrap());

        // g = x1 separates {-x1^2 + x2^2 + 1 < 0}
        let g2 = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.5, 0.0], 0.0);
        let f2 = quad(&[&[-1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 1.0);
        assert!(separates_strict_sublevel(&g2, &f2, TOL).unwrap());

        // {f < 0} empty: nothing to separate
        let g3 = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.5, 0.0], -5.0);
        let f3 = quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], 0.0);
        assert!(!separates_strict_sublevel(&g3, &f3, TOL).unwrap());
    }

    #[test]
    fn separation_certificate_survives_json() {
        let g = quad(&[&[0.0, 0.0], &[0.0, 0.0]], &[0.5, 0.0], 0.0);
        let f = quad(&[&[0.0, 0.5], &[0.5, 0.0]], &[0.0, 0.0], -1.0);
        let cert = separates(&g, &f, TOL).unwrap().unwrap();
        let s = serde_json::to_string(&cert).unwrap();
        let back: SeparationCertificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back.sign_flipped, cert.sign_flipped);
        assert!((back.restricted_min - cert.restricted_min).abs() < 1e-15);
    }
}
