//! The two-equation S-procedure and the semidefinite relaxation it induces
//! for `inf (f1^2 + f2^2)`.
//!
//! Writing `F(z) = z1^2 + z2^2` and coupling `z_i = f_i(x)` through
//! multipliers `alpha, beta`, the implication
//!
//! ```text
//! f1(x) - z1 = 0, f2(x) - z2 = 0  =>  F(z) >= gamma
//! ```
//!
//! holds exactly when the `(n+3) x (n+3)` matrix assembled by
//! [`assemble_lmi`] is positive semidefinite for some multipliers. For fixed
//! multipliers the largest admissible `gamma` has the closed form computed by
//! [`gamma_max`], and when the two Hessians are linearly independent the
//! supremum of `gamma_max` over the multiplier plane equals
//! `inf (f1^2 + f2^2)` — that supremum is what [`lmi_quartic_min`] computes.
//! With dependent Hessians the relaxation can be strictly weaker, so that
//! case is rejected and handled elsewhere by a lifting.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, maximize_scalar, psd_interval, sym_eigen, RANK_REL_TOL};
use crate::quadform::Quadratic;
use crate::separation::is_scalar_multiple;
use crate::{Error, Result};

/// Relative slack for the positive-semidefiniteness test inside
/// [`gamma_max`].
const GAMMA_PSD_REL: f64 = 1e-12;

/// Relative sweep-improvement threshold at which the multiplier search
/// stops.
const SWEEP_STALL_REL: f64 = 1e-11;

/// A point of the LMI together with the smallest eigenvalue of the
/// assembled matrix there.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LmiPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub min_eig: f64,
}

/// Result of maximizing the LMI bound over the multiplier plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LmiOptimum {
    /// The supremum found; a certified lower bound for `inf (f1^2 + f2^2)`.
    pub value: f64,
    /// Multipliers realizing it, with `gamma` set to the value.
    pub point: LmiPoint,
}

/// Assemble the S-procedure matrix for multipliers `(alpha, beta)` and
/// offset `gamma`, in the variable order `(z1, z2, x1..xn, 1)`.
///
/// The matrix represents the quadratic form
///
/// ```text
/// z1^2 + z2^2 - alpha*z1 - beta*z2 + alpha*f1(x) + beta*f2(x) - gamma
/// ```
///
/// so its positive semidefiniteness certifies `f1^2 + f2^2 >= gamma`
/// pointwise.
pub fn assemble_lmi(
    f1: &Quadratic,
    f2: &Quadratic,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    let n = f1.dim();
    let mut m = DMatrix::zeros(n + 3, n + 3);
    m[(0, 0)] = 1.0;
    m[(1, 1)] = 1.0;
    m[(0, n + 2)] = -alpha / 2.0;
    m[(n + 2, 0)] = -alpha / 2.0;
    m[(1, n + 2)] = -beta / 2.0;
    m[(n + 2, 1)] = -beta / 2.0;
    for i in 0..n {
        for j in 0..n {
            m[(2 + i, 2 + j)] = alpha * f1.matrix()[(i, j)] + beta * f2.matrix()[(i, j)];
        }
        let w = alpha * f1.linear()[i] + beta * f2.linear()[i];
        m[(2 + i, n + 2)] = w;
        m[(n + 2, 2 + i)] = w;
    }
    m[(n + 2, n + 2)] = alpha * f1.constant() + beta * f2.constant() - gamma;
    Ok(m)
}

/// Largest `gamma` for which the assembled matrix is positive semidefinite
/// at fixed multipliers, `-inf` when no `gamma` works.
///
/// Eliminating the `z` block and the affine corner by Schur complements
/// gives the closed form
///
/// ```text
/// gamma_max = (alpha*a0 + beta*b0) - (alpha^2 + beta^2)/4 - w' Q^+ w,
/// ```
///
/// with `Q = alpha*A1 + beta*A2` and `w = alpha*a + beta*b`, valid exactly
/// when `Q` is positive semidefinite and `w` lies in its range. Note
/// `gamma_max(0, 0) = 0` always, so the supremum over multipliers is never
/// negative.
pub fn gamma_max(f1: &Quadratic, f2: &Quadratic, alpha: f64, beta: f64) -> Result<f64> {
    let h = Quadratic::linear_comb(alpha, f1, beta, f2)?;
    let d = sym_eigen(h.matrix())?;
    let slack = GAMMA_PSD_REL * 1f64.max(max_abs(h.matrix()));
    if d.min_eig() < -slack {
        return Ok(f64::NEG_INFINITY);
    }
    if !d.range_contains(h.linear()) {
        return Ok(f64::NEG_INFINITY);
    }
    let quad = h.linear().dot(&d.apply_pinv(h.linear()));
    Ok(h.constant() - (alpha * alpha + beta * beta) / 4.0 - quad)
}

/// Directions `(alpha, beta)` along which `alpha*A1 + beta*A2` is positive
/// semidefinite.
///
/// The feasible directions form a closed convex cone in the plane, and every
/// direction other than `(0, +-1)` meets one of the two slices `alpha = +-1`,
/// where the cone cuts out exactly the PSD interval of a matrix pencil.
/// Slice endpoints and midpoints therefore hit even a wedge far narrower
/// than any fixed angular grid.
fn feasible_cone_directions(a1: &DMatrix<f64>, a2: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let mut dirs: Vec<(f64, f64)> = Vec::new();
    let push = |al: f64, be: f64, dirs: &mut Vec<(f64, f64)>| {
        let r = al.hypot(be);
        if r.is_finite() && r > 1e-12 {
            dirs.push((al / r, be / r));
        }
    };
    for sign in [1.0_f64, -1.0] {
        let base = a1 * sign;
        let Ok(iv) = psd_interval(&base, a2) else {
            continue;
        };
        if iv.empty {
            continue;
        }
        let mut ts: Vec<f64> = Vec::new();
        match (iv.lo.is_finite(), iv.hi.is_finite()) {
            (true, true) => ts.extend([iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi]),
            (true, false) => ts.extend([
                iv.lo,
                iv.lo + 1.0,
                2.0 * iv.lo.abs() + 10.0,
                1e6 * (1.0 + iv.lo.abs()),
            ]),
            (false, true) => ts.extend([
                iv.hi,
                iv.hi - 1.0,
                -2.0 * iv.hi.abs() - 10.0,
                -1e6 * (1.0 + iv.hi.abs()),
            ]),
            (false, false) => ts.extend([-1e6, -1.0, 0.0, 1.0, 1e6]),
        }
        for t in ts {
            push(sign, t, &mut dirs);
        }
    }
    for s in [1.0_f64, -1.0] {
        if let Ok(d) = sym_eigen(&(a2 * s)) {
            if d.min_eig() >= -RANK_REL_TOL * (1.0 + max_abs(a2)) {
                push(0.0, s, &mut dirs);
            }
        }
    }
    dirs
}

/// `inf (f1^2 + f2^2)` for linearly independent Hessians, as the supremum
/// of [`gamma_max`] over the multiplier plane.
///
/// The objective is concave (it is the upper boundary of a convex
/// feasibility set), so the supremum is found by line-search sweeps from a
/// ranked set of starts — fixed ones plus starts seeded inside the exactly
/// computed cone of PSD multiplier directions — followed by a compass
/// polish. The origin is always swept and contributes the value `0`, so the
/// result is never negative.
///
/// Returns `DependentHessians` when either Hessian vanishes or one is a
/// scalar multiple of the other; the relaxation is not tight there.
pub fn lmi_quartic_min(f1: &Quadratic, f2: &Quadratic) -> Result<LmiOptimum> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    if f1.hessian_is_zero()
        || f2.hessian_is_zero()
        || is_scalar_multiple(f2.matrix(), f1.matrix(), RANK_REL_TOL).is_some()
    {
        return Err(Error::DependentHessians);
    }

    let phi = |al: f64, be: f64| gamma_max(f1, f2, al, be).unwrap_or(f64::NEG_INFINITY);
    let frac = std::f64::consts::FRAC_1_SQRT_2;

    // The multipliers with a PSD pencil form a convex cone that can be a
    // wedge far narrower than any fixed angular grid, so fixed starts alone
    // can strand the search at the origin.  Seed starts and sweep directions
    // from the exactly computed cone as well.
    let cone = feasible_cone_directions(f1.matrix(), f2.matrix());
    let mut dirs: Vec<(f64, f64)> = vec![(1.0, 0.0), (0.0, 1.0), (frac, frac), (frac, -frac)];
    for &(da, db) in &cone {
        if dirs.len() >= 12 {
            break;
        }
        if dirs
            .iter()
            .all(|&(ea, eb)| (da * ea + db * eb).abs() < 1.0 - 1e-9)
        {
            dirs.push((da, db));
            dirs.push((-db, da));
        }
    }
    let mut starts: Vec<(f64, f64)> = vec![
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (-1.0, -1.0),
        (1.0, -1.0),
    ];
    for &(da, db) in &cone {
        starts.push((0.4 * da, 0.4 * db));
        starts.push((1.5 * da, 1.5 * db));
    }
    // Sweep only from the most promising handful of starts.
    let mut ranked: Vec<(f64, f64, f64)> = starts
        .into_iter()
        .map(|(a, b)| (a, b, phi(a, b)))
        .filter(|&(_, _, v)| v.is_finite())
        .collect();
    ranked.sort_by(|x, y| y.2.total_cmp(&x.2));
    ranked.truncate(6);
    ranked.push((0.0, 0.0, phi(0.0, 0.0)));

    let mut best = (0.0, 0.0, phi(0.0, 0.0));
    for (sa, sb, f0) in ranked {
        let mut p = (sa, sb);
        let mut fp = f0;
        for _ in 0..60 {
            let before = fp;
            for &(da, db) in &dirs {
                let line = |t: f64| phi(p.0 + t * da, p.1 + t * db);
                let w = 1.0 + p.0.hypot(p.1);
                let (t, ft) = maximize_scalar(&line, -w, w, true, true, 1e-12, 200);
                if ft > fp {
                    p = (p.0 + t * da, p.1 + t * db);
                    fp = ft;
                }
            }
            if fp - before <= SWEEP_STALL_REL * 1f64.max(fp.abs()) {
                break;
            }
        }
        if fp > best.2 {
            best = (p.0, p.1, fp);
        }
    }

    // Compass polish: the sweep directions can stall on a ridge of the
    // nonsmooth boundary; a richer fan of angles breaks the tie.
    let (mut pa, mut pb, mut fp) = best;
    for k in 0..8 {
        let ang = (k as f64) * std::f64::consts::PI / 8.0;
        let (da, db) = (ang.cos(), ang.sin());
        let line = |t: f64| phi(pa + t * da, pb + t * db);
        let w = 1.0 + pa.hypot(pb);
        let (t, ft) = maximize_scalar(&line, -w, w, true, true, 1e-12, 200);
        if ft > fp {
            pa += t * da;
            pb += t * db;
            fp = ft;
        }
    }

    // The scan trusts the closed form, whose rank decisions can overshoot
    // the true boundary on near-singular pencils (a dropped tiny eigenvalue
    // hides a large 1/lambda contribution).  The reported optimum must
    // certify on its own, so retreat gamma until the assembled matrix is
    // positive semidefinite to working precision.  Lowering gamma only adds
    // a PSD rank-one term, so lambda_min rises monotonically; double the
    // step until it lands.
    let mut gamma = fp.max(0.0);
    let mut min_eig = 0.0;
    let mut certified = false;
    let mut step = 0.0;
    for _ in 0..90 {
        let m = assemble_lmi(f1, f2, pa, pb, gamma)?;
        let s = 1f64.max(max_abs(&m));
        min_eig = sym_eigen(&m)?.min_eig();
        if min_eig >= -1e-12 * s {
            certified = true;
            break;
        }
        step = if step == 0.0 {
            (-min_eig).max(1e-15 * s)
        } else {
            step * 2.0
        };
        gamma -= step;
    }
    if !certified || gamma < 0.0 {
        // Nothing at (pa, pb) beats the trivial certificate: at the origin
        // the matrix is blockdiag(I, 0), PSD by construction, with bound 0.
        return Ok(LmiOptimum {
            value: 0.0,
            point: LmiPoint {
                alpha: 0.0,
                beta: 0.0,
                gamma: 0.0,
                min_eig: 0.0,
            },
        });
    }
    Ok(LmiOptimum {
        value: gamma,
        point: LmiPoint {
            alpha: pa,
            beta: pb,
            gamma,
            min_eig,
        },
    })
}

/// Sampled falsification check for a claimed lower bound
/// `f1^2 + f2^2 >= gamma`.
///
/// Draws `samples` points from `[-half_width, half_width]^n`, alternating a
/// regular grid sweep with seeded uniform draws, then polishes the best
/// point by a box-clamped coordinate descent. Returns `false` exactly when
/// some probed point drops below `gamma` minus a small slack — i.e. when
/// the bound is refuted — and `true` when no counterexample was found.
pub fn check_lower_bound_sampled(
    f1: &Quadratic,
    f2: &Quadratic,
    gamma: f64,
    samples: usize,
    half_width: f64,
    seed: u64,
) -> Result<bool> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    let n = f1.dim();
    let slack = 1e-9 * 1f64.max(gamma.abs());
    let q = |x: &[f64]| {
        let v1 = f1.eval_slice(x);
        let v2 = f2.eval_slice(x);
        v1 * v1 + v2 * v2
    };

    let mut best = vec![0.0; n];
    let mut best_val = q(&best);
    if best_val < gamma - slack {
        return Ok(false);
    }

    // Grid side lengths: roughly the square root of the budget spread evenly
    // across dimensions, capped to keep the sweep affordable.
    let per_axis = if n == 0 {
        1
    } else {
        (((samples / 2).max(1) as f64).powf(1.0 / n as f64).floor() as usize).clamp(2, 64)
    };
    let grid_total: usize = per_axis.pow(n.min(8) as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    let mut drawn = 0usize;
    let mut grid_index = 0usize;
    while drawn < samples {
        if drawn % 2 == 0 && grid_index < grid_total {
            let mut rest = grid_index;
            for xi in x.iter_mut() {
                let k = rest % per_axis;
                rest /= per_axis;
                *xi = -half_width + 2.0 * half_width * (k as f64 + 0.5) / per_axis as f64;
            }
            grid_index += 1;
        } else {
            for xi in x.iter_mut() {
                *xi = rng.random_range(-half_width..=half_width);
            }
        }
        drawn += 1;
        let v = q(&x);
        if v < best_val {
            best_val = v;
            best.copy_from_slice(&x);
            if best_val < gamma - slack {
                return Ok(false);
            }
        }
    }

    // Coordinate-descent polish from the best sample, steps shrinking
    // geometrically, iterates clamped to the box.
    let mut step = half_width / 4.0;
    for _ in 0..200 {
        let mut improved = false;
        for i in 0..n {
            for s in [step, -step] {
                let xi = (best[i] + s).clamp(-half_width, half_width);
                let old = best[i];
                best[i] = xi;
                let v = q(&best);
                if v < best_val {
                    best_val = v;
                    improved = true;
                } else {
                    best[i] = old;
                }
            }
        }
        if best_val < gamma - slack {
            return Ok(false);
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 * half_width {
                break;
            }
        }
    }

    Ok(best_val >= gamma - slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector, DVector};

    fn quad(m: DMatrix<f64>, a: DVector<f64>, c: f64) -> Quadratic {
        Quadratic::new(m, a, c).unwrap()
    }

    /// f1 = x1^2, f2 = x1*x2 - 1: disjoint with an unattained zero gap.
    fn parabola_pair() -> (Quadratic, Quadratic) {
        (
            quad(dmatrix![1.0, 0.0; 0.0, 0.0], dvector![0.0, 0.0], 0.0),
            quad(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0),
        )
    }

    /// f1 = x1, f2 = -x1^2 + x2^2 + 1: the relaxation is blind here because
    /// the first Hessian vanishes.
    fn degenerate_pair() -> (Quadratic, Quadratic) {
        (
            quad(DMatrix::zeros(2, 2), dvector![0.5, 0.0], 0.0),
            quad(dmatrix![-1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], 1.0),
        )
    }

    #[test]
    fn origin_multipliers_always_give_zero() {
        let (f1, f2) = parabola_pair();
        assert_eq!(gamma_max(&f1, &f2, 0.0, 0.0).unwrap(), 0.0);
        let (g1, g2) = degenerate_pair();
        assert_eq!(gamma_max(&g1, &g2, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn gamma_max_closed_form_on_a_parabola() {
        // alpha*(x^2 - 1) completes to -alpha - alpha^2/4 at beta = 0.
        let f1 = quad(dmatrix![1.0], dvector![0.0], -1.0);
        let f2 = quad(dmatrix![2.0], dvector![0.3], 0.7);
        let got = gamma_max(&f1, &f2, 1.0, 0.0).unwrap();
        assert!((got + 1.25).abs() < 1e-12);
    }

    #[test]
    fn indefinite_combination_admits_no_gamma() {
        let (f1, f2) = parabola_pair();
        // beta alone leaves the hyperbolic Hessian indefinite.
        assert_eq!(gamma_max(&f1, &f2, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn linear_part_outside_the_range_admits_no_gamma() {
        let (f1, f2) = degenerate_pair();
        // alpha*f1 has zero Hessian but a nonzero linear part.
        assert_eq!(gamma_max(&f1, &f2, 1.0, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(gamma_max(&f1, &f2, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn assembled_matrix_is_psd_exactly_up_to_gamma_max() {
        let f1 = quad(dmatrix![1.0, 0.2; 0.2, 2.0], dvector![0.1, -0.3], 0.4);
        let f2 = quad(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.2, 0.0], -1.0);
        for (al, be) in [(1.0, 0.0), (2.0, 0.3), (0.7, -0.2), (1.5, 0.5)] {
            let g = gamma_max(&f1, &f2, al, be).unwrap();
            if !g.is_finite() {
                continue;
            }
            let at = sym_eigen(&assemble_lmi(&f1, &f2, al, be, g).unwrap())
                .unwrap()
                .min_eig();
            assert!(at >= -1e-9, "min eig {at} at gamma_max");
            let above = sym_eigen(&assemble_lmi(&f1, &f2, al, be, g + 1e-6).unwrap())
                .unwrap()
                .min_eig();
            assert!(above < 0.0, "matrix stayed psd past gamma_max");
        }
    }

    #[test]
    fn relaxation_value_matches_a_hand_computed_optimum() {
        // f1 = x1^2 + x2^2 + 1, f2 = x1^2 - x2^2: the bound
        // alpha - (alpha^2 + beta^2)/4 peaks at (2, 0) with value 1, and
        // inf (f1^2 + f2^2) = 1 at the origin.
        let f1 = quad(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], 1.0);
        let f2 = quad(dmatrix![1.0, 0.0; 0.0, -1.0], dvector![0.0, 0.0], 0.0);
        let opt = lmi_quartic_min(&f1, &f2).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-6, "value {}", opt.value);
        assert!((opt.point.alpha - 2.0).abs() < 1e-4);
        assert!(opt.point.beta.abs() < 1e-4);
        assert!(opt.point.min_eig >= -1e-8);
    }

    #[test]
    fn unattained_zero_gap_is_reported_as_zero() {
        let (f1, f2) = parabola_pair();
        let opt = lmi_quartic_min(&f1, &f2).unwrap();
        assert!(opt.value.abs() < 1e-6, "value {}", opt.value);
    }

    #[test]
    fn tangent_hyperbola_pair_has_zero_relaxation_value() {
        let f1 = quad(dmatrix![1.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0);
        let f2 = quad(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], -1.0);
        let opt = lmi_quartic_min(&f1, &f2).unwrap();
        assert!(opt.value.abs() < 1e-6, "value {}", opt.value);
    }

    #[test]
    fn intersecting_pair_has_zero_relaxation_value() {
        // Circle and hyperbola meeting at (1, 0) and (-1, 0).
        let f1 = quad(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], -1.0);
        let f2 = quad(dmatrix![0.0, 0.5; 0.5, 0.0], dvector![0.0, 0.0], 0.0);
        let opt = lmi_quartic_min(&f1, &f2).unwrap();
        assert!(opt.value.abs() < 1e-6, "value {}", opt.value);
    }

    #[test]
    fn dependent_hessians_are_rejected() {
        let c1 = quad(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], -1.0);
        let c2 = quad(dmatrix![2.0, 0.0; 0.0, 2.0], dvector![0.0, 0.0], -8.0);
        assert!(matches!(
            lmi_quartic_min(&c1, &c2),
            Err(Error::DependentHessians)
        ));
        let (g1, g2) = degenerate_pair();
        assert!(matches!(
            lmi_quartic_min(&g1, &g2),
            Err(Error::DependentHessians)
        ));
    }

    #[test]
    fn sampled_check_accepts_true_bounds_and_refutes_false_ones() {
        // inf (f1^2 + f2^2) = 3/4 for this pair, so 0.25 is a valid lower
        // bound and 0.8 is not.
        let (f1, f2) = degenerate_pair();
        assert!(check_lower_bound_sampled(&f1, &f2, 0.25, 100_000, 10.0, 7).unwrap());
        assert!(!check_lower_bound_sampled(&f1, &f2, 0.80, 100_000, 10.0, 7).unwrap());
    }

    #[test]
    fn sampled_check_refutes_fast_when_origin_already_violates() {
        let f1 = Quadratic::constant_fn(2, 0.0);
        let f2 = Quadratic::constant_fn(2, 0.0);
        assert!(!check_lower_bound_sampled(&f1, &f2, 1.0, 10, 1.0, 1).unwrap());
    }
}
