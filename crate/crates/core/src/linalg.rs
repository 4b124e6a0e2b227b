//! Dense symmetric linear algebra: a cyclic Jacobi eigensolver, spectral
//! pseudo-inverses, null/range bases, and the set of multipliers `t` for which
//! `A + tB` is positive semidefinite.
//!
//! Everything downstream (sign classification, canonical forms, dual scans,
//! LMI feasibility) funnels its rank and range questions through the spectral
//! cutoff defined here, so there is exactly one notion of "numerically zero
//! eigenvalue" in the crate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative spectral cutoff: eigenvalues with `|lambda| <= RANK_REL_TOL * max|eig|`
/// are treated as zero, and a vector `v` lies in the range of `A` when its
/// component outside the numerical range satisfies
/// `norm <= RANK_REL_TOL * (1 + |v|)`.
pub const RANK_REL_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Max absolute entry; used as the magnitude of a matrix throughout.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.amax()
    }
}

/// Common scale factor for tolerance tests over a pair of matrices.
pub fn pair_scale(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    1f64.max(max_abs(a)).max(max_abs(b))
}

/// Eigendecomposition of a symmetric matrix: `A = Q diag(eigenvalues) Q'`
/// with eigenvalues ascending and orthonormal columns in `eigenvectors`.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Absolute cutoff below which an eigenvalue counts as zero.
    pub rank_tol: f64,
}

impl SpectralDecomp {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eig(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.eigenvalues[0]
        }
    }

    pub fn max_eig(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.eigenvalues[self.n() - 1]
        }
    }

    /// Number of eigenvalues above the spectral cutoff in absolute value.
    pub fn rank(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|l| l.abs() > self.rank_tol)
            .count()
    }

    pub fn is_psd(&self, slack: f64) -> bool {
        self.min_eig() >= -slack
    }

    pub fn is_nsd(&self, slack: f64) -> bool {
        self.max_eig() <= slack
    }

    /// Moore-Penrose pseudo-inverse via the spectral cutoff.
    pub fn pinv(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            let l = self.eigenvalues[i];
            if l.abs() > self.rank_tol {
                let q = self.eigenvectors.column(i);
                // out += (1/l) q q'
                for r in 0..n {
                    for c in 0..n {
                        out[(r, c)] += q[r] * q[c] / l;
                    }
                }
            }
        }
        out
    }

    /// `A^+ v` without forming the pseudo-inverse.
    pub fn apply_pinv(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        for i in 0..self.n() {
            let l = self.eigenvalues[i];
            if l.abs() > self.rank_tol {
                let q = self.eigenvectors.column(i);
                let coeff = q.dot(v) / l;
                out.axpy(coeff, &q.clone_owned(), 1.0);
            }
        }
        out
    }

    /// Component of `v` orthogonal to the numerical range of `A`.
    pub fn null_component(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v.clone();
        for i in 0..self.n() {
            if self.eigenvalues[i].abs() > self.rank_tol {
                let q = self.eigenvectors.column(i);
                let coeff = q.dot(v);
                out.axpy(-coeff, &q.clone_owned(), 1.0);
            }
        }
        out
    }

    /// Range-membership test with the crate-wide relative residual rule.
    pub fn range_contains(&self, v: &DVector<f64>) -> bool {
        self.null_component(v).norm() <= RANK_REL_TOL * (1.0 + v.norm())
    }

    /// Orthonormal basis of the numerical null space (columns).
    pub fn null_basis(&self) -> DMatrix<f64> {
        self.select_columns(|l| l.abs() <= self.rank_tol)
    }

    /// Orthonormal basis of the numerical range (columns).
    pub fn range_basis(&self) -> DMatrix<f64> {
        self.select_columns(|l| l.abs() > self.rank_tol)
    }

    fn select_columns(&self, keep: impl Fn(f64) -> bool) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.n())
            .filter(|&i| keep(self.eigenvalues[i]))
            .collect();
        let mut out = DMatrix::zeros(self.n(), idx.len());
        for (c, &i) in idx.iter().enumerate() {
            out.set_column(c, &self.eigenvectors.column(i));
        }
        out
    }

    /// `Q diag(eigenvalues) Q'`, for residual checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lam = DMatrix::from_diagonal(&self.eigenvalues);
        &self.eigenvectors * lam * self.eigenvectors.transpose()
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps run in a fixed row-major order over the strict upper triangle, so
/// results are bit-for-bit reproducible.  Input must be symmetric up to
/// `1e-8 * max(1, |A|)`; smaller asymmetry is averaged away before iterating.
pub fn sym_eigen(a: &DMatrix<f64>) -> Result<SpectralDecomp> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(SpectralDecomp {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
            rank_tol: 0.0,
        });
    }
    let scale = 1f64.max(max_abs(a));
    let mut max_asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asym = max_asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    let sym_tol = 1e-8 * scale;
    if max_asym > sym_tol {
        return Err(Error::NotSymmetric { max_asym, tol: sym_tol });
    }

    let mut m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut q = DMatrix::<f64>::identity(n, n);
    let frob = m.norm().max(f64::MIN_POSITIVE);
    let off_target = 1e-14 * frob;

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= off_target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let apq = m[(p, r)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(r, r)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                m[(p, p)] = app - t * apq;
                m[(r, r)] = aqq + t * apq;
                m[(p, r)] = 0.0;
                m[(r, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != r {
                        let akp = m[(k, p)];
                        let akq = m[(k, r)];
                        m[(k, p)] = c * akp - s * akq;
                        m[(p, k)] = m[(k, p)];
                        m[(k, r)] = s * akp + c * akq;
                        m[(r, k)] = m[(k, r)];
                    }
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, r)] = s * qkp + c * qkq;
                }
            }
        }
    }
    if !converged {
        // Final check: the last sweep may have finished the job.
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() > off_target.max(1e-12 * frob) {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let eigenvalues = DVector::from_fn(n, |i, _| m[(order[i], order[i])]);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        eigenvectors.set_column(c, &q.column(i));
    }
    let max_mag = eigenvalues.amax();
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
        rank_tol: RANK_REL_TOL * max_mag,
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig(a: &DMatrix<f64>) -> Result<f64> {
    Ok(sym_eigen(a)?.min_eig())
}

/// Pseudo-inverse of a symmetric matrix via the spectral cutoff.
pub fn pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(sym_eigen(a)?.pinv())
}

/// Orthonormal basis of the null space of a symmetric matrix.
/// The zero matrix returns the identity.
pub fn null_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(sym_eigen(a)?.null_basis())
}

/// Orthonormal basis of the hyperplane `{x : h'x = 0}` (n x (n-1) columns),
/// built from a Householder reflector so it is deterministic in `h`.
/// A zero vector returns the identity (the "hyperplane" is all of R^n).
pub fn null_basis_vector(h: &DVector<f64>) -> DMatrix<f64> {
    let n = h.len();
    let norm = h.norm();
    if norm == 0.0 {
        return DMatrix::identity(n, n);
    }
    // w = h + sign(h0) |h| e0 ; H = I - 2 w w' / w'w ; columns 1.. are the basis.
    let mut w = h.clone();
    let s = if h[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += s * norm;
    let ww = w.dot(&w);
    let mut out = DMatrix::zeros(n, n.saturating_sub(1));
    for c in 1..n {
        for r in 0..n {
            let e = if r == c { 1.0 } else { 0.0 };
            out[(r, c - 1)] = e - 2.0 * w[r] * w[c] / ww;
        }
    }
    out
}

/// The closed set `{t : A + tB is positive semidefinite}`, which is always an
/// interval (possibly empty or unbounded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdInterval {
    #[serde(with = "crate::serde_mat::ext_real")]
    pub lo: f64,
    #[serde(with = "crate::serde_mat::ext_real")]
    pub hi: f64,
    pub empty: bool,
}

impl PsdInterval {
    pub fn empty() -> Self {
        PsdInterval {
            lo: f64::NAN,
            hi: f64::NAN,
            empty: true,
        }
    }

    pub fn all() -> Self {
        PsdInterval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            empty: false,
        }
    }

    pub fn point(t: f64) -> Self {
        PsdInterval {
            lo: t,
            hi: t,
            empty: false,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        !self.empty && t >= self.lo && t <= self.hi
    }

    /// Intersection with `[0, inf)`, used for inequality-constrained duals.
    pub fn clamp_nonneg(&self) -> Self {
        if self.empty || self.hi < 0.0 {
            return PsdInterval::empty();
        }
        PsdInterval {
            lo: self.lo.max(0.0),
            hi: self.hi,
            empty: false,
        }
    }
}

/// Computes `{t : A + tB >= 0}` for symmetric `A`, `B`.
///
/// `lambda_min(A + tB)` is concave in `t`, so the feasible set is an interval;
/// finite endpoints are located by bisection and satisfy
/// `lambda_min(A + tB) ~ 0` up to `1e-8 * scale`.
pub fn psd_interval(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<PsdInterval> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() != b.nrows() || b.nrows() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows().max(b.ncols()),
        });
    }
    if a.nrows() == 0 {
        return Ok(PsdInterval::all());
    }
    let scale = pair_scale(a, b);
    let feas_tol = 1e-10 * scale;
    let m = |t: f64| -> f64 {
        let mt = a + b * t;
        sym_eigen(&mt).map(|d| d.min_eig()).unwrap_or(f64::NEG_INFINITY)
    };

    if max_abs(b) <= 1e-14 * scale {
        return Ok(if m(0.0) >= -feas_tol {
            PsdInterval::all()
        } else {
            PsdInterval::empty()
        });
    }

    let db = sym_eigen(b)?;
    if db.min_eig() >= -db.rank_tol {
        // B >= 0: lambda_min is nondecreasing in t, interval is [lo, inf) or empty.
        return psd_halfline(a, b, &db, scale, feas_tol, &m);
    }
    if db.max_eig() <= db.rank_tol {
        // B <= 0: mirror through t -> -t.
        let nb = -b;
        let dnb = sym_eigen(&nb)?;
        let half = psd_halfline(a, &nb, &dnb, scale, feas_tol, &|t| m(-t))?;
        return Ok(if half.empty {
            PsdInterval::empty()
        } else {
            PsdInterval {
                lo: f64::NEG_INFINITY,
                hi: -half.lo,
                empty: false,
            }
        });
    }

    // B indefinite: lambda_min(A + tB) -> -inf on both sides, so the concave
    // maximum is attained; locate it, then bisect outward for both endpoints.
    let (t_star, m_star) = maximize_scalar(&m, -1.0, 1.0, true, true, 1e-12, 240);
    if m_star < -feas_tol {
        return Ok(PsdInterval::empty());
    }
    let hi = boundary_right(&m, t_star, feas_tol, scale);
    let lo = boundary_right(&|t| m(-t), -t_star, feas_tol, scale);
    Ok(PsdInterval {
        lo: -lo,
        hi,
        empty: false,
    })
}

/// `B >= 0`, `B != 0`: feasibility for large `t` reduces, by a Schur-complement
/// argument in the eigenbasis of `B`, to `A` being PSD on the null space of `B`
/// with the coupling block inside the range of that restriction.
fn psd_halfline(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    db: &SpectralDecomp,
    scale: f64,
    feas_tol: f64,
    m: &dyn Fn(f64) -> f64,
) -> Result<PsdInterval> {
    let z = db.null_basis();
    if z.ncols() > 0 {
        let a22 = sym_product(a, &z);
        let d22 = sym_eigen(&a22)?;
        if d22.min_eig() < -feas_tol {
            return Ok(PsdInterval::empty());
        }
        let w = db.range_basis();
        if w.ncols() > 0 {
            let a12 = w.transpose() * a * &z; // r x d coupling block
            // every row of a12 must lie in the range of a22
            let proj = d22.pinv() * a22.clone();
            let resid = &a12 - &a12 * proj;
            if max_abs(&resid) > 1e-8 * scale.max(max_abs(&a12)) {
                return Ok(PsdInterval::empty());
            }
        }
        let _ = b;
    }
    // A finite feasible t exists; find one by doubling, then bisect the endpoint.
    let mut t_good = 0.0;
    let mut found = false;
    let mut step = 1.0;
    for _ in 0..64 {
        if m(t_good) >= -0.5 * feas_tol {
            found = true;
            break;
        }
        t_good = step;
        step *= 2.0;
    }
    if !found && m(t_good) < -0.5 * feas_tol {
        return Ok(PsdInterval::empty());
    }
    // Walk down for an infeasible bracket (B >= 0 and B != 0 force m -> -inf).
    let mut t_bad = t_good.min(0.0) - 1.0;
    let mut guard = 0;
    while m(t_bad) >= -feas_tol && guard < 64 {
        t_bad = t_bad * 2.0 - 1.0;
        guard += 1;
    }
    if guard == 64 {
        return Ok(PsdInterval::all());
    }
    let lo = bisect_boundary(m, t_bad, t_good, feas_tol, scale);
    Ok(PsdInterval {
        lo,
        hi: f64::INFINITY,
        empty: false,
    })
}

/// Z' A Z, symmetrized.
pub(crate) fn sym_product(a: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let m = z.transpose() * a * z;
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Rightmost point with `m(t) >= -feas_tol`, starting from a feasible `t0`.
fn boundary_right(m: &dyn Fn(f64) -> f64, t0: f64, feas_tol: f64, scale: f64) -> f64 {
    let mut t_bad = t0.abs().max(1.0);
    let mut guard = 0;
    while m(t0 + t_bad) >= -feas_tol && guard < 64 {
        t_bad *= 2.0;
        guard += 1;
    }
    if guard == 64 {
        return f64::INFINITY;
    }
    bisect_boundary(m, t0 + t_bad, t0, feas_tol, scale)
}

/// Bisection for the boundary of `{t : m(t) >= -feas_tol}` between an
/// infeasible and a feasible point.
fn bisect_boundary(
    m: &dyn Fn(f64) -> f64,
    mut bad: f64,
    mut good: f64,
    feas_tol: f64,
    scale: f64,
) -> f64 {
    let width_tol = 1e-10 * scale.max(1.0);
    for _ in 0..200 {
        if (bad - good).abs() <= width_tol {
            break;
        }
        let mid = 0.5 * (bad + good);
        if m(mid) >= -feas_tol {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Golden-section maximization of a concave (possibly extended-real) function.
///
/// With `expand_lo`/`expand_hi` the bracket grows geometrically while the
/// function keeps climbing toward that side, which handles unbounded domains.
/// Values of `-inf` are permitted; the best point ever probed is returned, so
/// a narrow finite region between `-inf` plateaus is never lost even when the
/// section steps cut it out of the bracket.
pub(crate) fn maximize_scalar(
    f: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    expand_lo: bool,
    expand_hi: bool,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const PHI: f64 = 0.618_033_988_749_894_8;
    debug_assert!(lo <= hi);

    let mut best = (0.5 * (lo + hi), f64::NEG_INFINITY);
    fn eval(f: &dyn Fn(f64) -> f64, x: f64, best: &mut (f64, f64)) -> f64 {
        let v = f(x);
        if v > best.1 {
            *best = (x, v);
        }
        v
    }

    // Grow the bracket while an endpoint dominates the interior.
    let mut f_lo = eval(f, lo, &mut best);
    let mut f_hi = eval(f, hi, &mut best);
    let mut f_mid = eval(f, 0.5 * (lo + hi), &mut best);
    for _ in 0..60 {
        let grew_hi = expand_hi && f_hi >= f_mid && f_hi > f64::NEG_INFINITY && hi.abs() < 1e15;
        let grew_lo = expand_lo && f_lo >= f_mid && f_lo > f64::NEG_INFINITY && lo.abs() < 1e15;
        if !grew_hi && !grew_lo {
            break;
        }
        let width = (hi - lo).max(1.0);
        if grew_hi {
            hi += width;
            f_hi = eval(f, hi, &mut best);
        }
        if grew_lo {
            lo -= width;
            f_lo = eval(f, lo, &mut best);
        }
        f_mid = eval(f, 0.5 * (lo + hi), &mut best);
    }

    // Need at least one finite probe for golden section to steer by.
    if !f_mid.is_finite() {
        for k in 0..=64 {
            let t = lo + (hi - lo) * (k as f64) / 64.0;
            eval(f, t, &mut best);
        }
        if !best.1.is_finite() {
            return best;
        }
        // Narrow to the finite neighborhood and fall through.
        let h = (hi - lo) / 64.0;
        lo = (best.0 - h).max(lo);
        hi = (best.0 + h).min(hi);
    }

    let mut x1 = hi - PHI * (hi - lo);
    let mut x2 = lo + PHI * (hi - lo);
    let mut f1 = eval(f, x1, &mut best);
    let mut f2 = eval(f, x2, &mut best);
    for _ in 0..max_iter {
        if (hi - lo).abs() <= xtol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - PHI * (hi - lo);
            f1 = eval(f, x1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + PHI * (hi - lo);
            f2 = eval(f, x2, &mut best);
        }
    }
    eval(f, 0.5 * (lo + hi), &mut best);
    best
}
