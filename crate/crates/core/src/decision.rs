//! The intersection decision: does `{f1 = 0}` meet `{f2 = 0}`?
//!
//! The pipeline classifies the pair exactly, not approximately:
//!
//! 1. An identically-zero surface reduces to single-surface solvability.
//! 2. A one-sided surface has an empty or affine zero set; either the pair
//!    is disjoint outright or the other quadratic is restricted to that
//!    affine set and solved in closed form.
//! 3. Otherwise `inf (f1^2 + f2^2)` is computed — by the semidefinite
//!    relaxation for independent Hessians, by an exact lifting for
//!    dependent ones, by least squares when both are affine. A positive
//!    value is a certified gap.
//! 4. At value zero the question is attainment: either one surface
//!    separates the other, or among the eight sign-oriented one-constraint
//!    programs some reach zero. Zero attained on both surfaces is an
//!    intersection witness; zero unattained certifies disjointness.
//!
//! Every DISJOINT verdict carries a certificate that
//! [`validate_certificate`] re-checks from the problem data alone, and
//! verdicts whose certificate fails that re-check are downgraded to
//! UNDECIDED rather than reported.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::duals::{dual_value, qp1qc_value, qp1eqc_value, ProgramResult};
use crate::linalg::{max_abs, pair_scale, sym_eigen, sym_product, RANK_REL_TOL};
use crate::quadform::{Quadratic, SignTag};
use crate::separation::{mutual_separation, separates, Orientation, SeparationCertificate};
use crate::sprocedure::{assemble_lmi, lmi_quartic_min, LmiPoint};
use crate::{Error, Result};

/// Relative tolerances governing the decision and its certificates.
///
/// Absolute thresholds are obtained by scaling with the coefficient
/// magnitude of the pair (and with its square for quantities in the units
/// of `f^2`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ToleranceConfig {
    /// Drives all zero/positive classifications made while deciding.
    pub decision_rel: f64,
    /// Drives the residual checks of certificate validation.
    pub certificate_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            decision_rel: 1e-7,
            certificate_rel: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn with_decision_rel(rel: f64) -> Self {
        ToleranceConfig {
            decision_rel: rel,
            ..ToleranceConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictTag {
    #[serde(rename = "INTERSECT")]
    Intersect,
    #[serde(rename = "DISJOINT")]
    Disjoint,
    #[serde(rename = "UNDECIDED")]
    Undecided,
}

/// How `inf (f1^2 + f2^2)` was computed, with the data needed to re-check
/// the value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum QuarticTranscript {
    /// Independent Hessians: supremum of the semidefinite relaxation.
    #[serde(rename_all = "camelCase")]
    Independent { value: f64, lmi: LmiPoint },
    /// Dependent Hessians: exact lifting to `(x, z1, z2)` space, one affine
    /// constraint eliminated, the rest solved as an equality-constrained
    /// program.
    #[serde(rename_all = "camelCase")]
    Dependent {
        value: f64,
        /// Proportionality factor: the non-base Hessian equals `t_star`
        /// times the base one.
        t_star: f64,
        /// Which input (1 or 2) kept its quadratic constraint in the lift.
        base_index: u8,
        /// Normal of the eliminated affine constraint in lifted
        /// coordinates.
        #[serde(with = "crate::serde_mat::vector")]
        h: DVector<f64>,
        h0: f64,
        /// Dual multiplier at the optimum of the lifted program.
        dual_lambda: Option<f64>,
        attained: bool,
        /// Minimizer mapped back to the original variables, when attained.
        #[serde(with = "crate::serde_mat::opt_vector")]
        witness: Option<DVector<f64>>,
    },
    /// Both inputs affine: plain least squares.
    #[serde(rename_all = "camelCase")]
    BothAffine {
        value: f64,
        #[serde(with = "crate::serde_mat::vector")]
        x_star: DVector<f64>,
    },
}

impl QuarticTranscript {
    pub fn value(&self) -> f64 {
        match self {
            QuarticTranscript::Independent { value, .. } => *value,
            QuarticTranscript::Dependent { value, .. } => *value,
            QuarticTranscript::BothAffine { value, .. } => *value,
        }
    }
}

/// One of the eight sign-oriented programs `inf { s*f_i : t*f_j <= 0 }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgramRecord {
    pub objective_index: u8,
    pub objective_sign: i8,
    pub constraint_index: u8,
    pub constraint_sign: i8,
    pub result: ProgramResult,
}

/// Machine-checkable proof attached to a DISJOINT verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Certificate {
    /// `inf (f1^2 + f2^2) > 0`, with the transcript that proves the bound.
    #[serde(rename_all = "camelCase")]
    PositiveGap { transcript: QuarticTranscript },
    /// One surface separates the other.
    #[serde(rename_all = "camelCase")]
    Separation {
        orientation: Orientation,
        certificate: SeparationCertificate,
    },
    /// Some sign-oriented program obstructs intersection: its value is
    /// either zero but attained by no feasible point, or strictly positive.
    /// An intersection point would be feasible with objective value zero,
    /// contradicting either outcome.
    #[serde(rename_all = "camelCase")]
    UnattainedZero { programs: Vec<ProgramRecord> },
    /// One surface is empty: its quadratic is one-sided with a positive
    /// minimum.
    #[serde(rename_all = "camelCase")]
    OneSidedEmpty {
        surface_index: u8,
        /// Whether the quadratic had to be negated to become nonnegative.
        sign_flipped: bool,
        global_min: f64,
        #[serde(with = "crate::serde_mat::vector")]
        minimizer: DVector<f64>,
    },
    /// One surface is the affine set `x0 + range(basis)` and the other
    /// quadratic never vanishes on it.
    #[serde(rename_all = "camelCase")]
    AffineReduction {
        surface_index: u8,
        sign_flipped: bool,
        #[serde(with = "crate::serde_mat::vector")]
        x0: DVector<f64>,
        #[serde(with = "crate::serde_mat::matrix")]
        basis: DMatrix<f64>,
        /// The other quadratic restricted to the affine set.
        restricted: Quadratic,
    },
}

/// Outcome of the decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub tag: VerdictTag,
    /// A common zero of both quadratics, for INTERSECT verdicts that could
    /// produce one.
    #[serde(with = "crate::serde_mat::opt_vector")]
    pub witness: Option<DVector<f64>>,
    pub certificate: Option<Certificate>,
    /// `inf (f1^2 + f2^2)`, when the pipeline computed it.
    pub quartic_min: Option<f64>,
    /// Absolute decision tolerance that zero tests were made against.
    pub tolerance: f64,
    pub trace: Vec<String>,
}

/// Result of re-checking a certificate against the problem data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationOutcome {
    pub valid: bool,
    pub failures: Vec<String>,
}

/// Does `q` take the value zero anywhere? Exact case analysis with an
/// explicit witness whenever the answer is yes.
///
/// With spectral data for the Hessian `C` the cases are closed-form: an
/// indefinite `C` always crosses zero along an eigendirection from the
/// stationary point; a semidefinite `C` with linear part escaping its range
/// slides along the null space to exact zero; otherwise the extremal value
/// decides. Values within `tol` of zero count as zero.
pub fn quadratic_attains_zero(q: &Quadratic, tol: f64) -> Result<(bool, Option<DVector<f64>>)> {
    let n = q.dim();
    if n == 0 {
        return Ok(if q.constant().abs() <= tol {
            (true, Some(DVector::zeros(0)))
        } else {
            (false, None)
        });
    }
    if q.hessian_is_zero() {
        let c = q.linear();
        let c0 = q.constant();
        if c.norm() <= RANK_REL_TOL * q.magnitude() {
            return Ok(if c0.abs() <= tol {
                (true, Some(DVector::zeros(n)))
            } else {
                (false, None)
            });
        }
        // Affine: 2 c·x + c0 hits zero at a scaled gradient step.
        let x = c * (-c0 / (2.0 * c.norm_squared()));
        return Ok((true, Some(x)));
    }
    let st = q.stationary_data()?;
    let slack = st.decomp.rank_tol;
    let psd = st.decomp.is_psd(slack);
    let nsd = st.decomp.is_nsd(slack);
    if nsd && !psd {
        // Zeros of q and -q coincide; recurse once into the psd mirror.
        return quadratic_attains_zero(&q.neg(), tol);
    }
    let q0 = q.eval(&st.x0);
    if !psd && !nsd {
        if q0.abs() <= tol {
            return Ok((true, Some(st.x0)));
        }
        // Climb the eigendirection whose sign opposes q0; the gradient at
        // the stationary point is orthogonal to it, so the value moves by
        // exactly t^2 * eig.
        let want_negative = q0 > 0.0;
        for i in 0..st.decomp.n() {
            let e = st.decomp.eigenvalues[i];
            if (want_negative && e < -slack) || (!want_negative && e > slack) {
                let t = (-q0 / e).sqrt();
                let x = &st.x0 + st.decomp.eigenvectors.column(i) * t;
                return Ok((true, Some(x)));
            }
        }
        unreachable!("indefinite matrix lost its eigenvalues");
    }
    // Positive semidefinite from here on.
    let in_range = st.lin_null.norm() <= RANK_REL_TOL * (1.0 + q.linear().norm());
    if !in_range {
        // The value falls linearly along the null component of the linear
        // part; step exactly to zero.
        let u = &st.lin_null;
        let t = -q0 / (2.0 * u.norm_squared());
        return Ok((true, Some(&st.x0 + u * t)));
    }
    if q0 > tol {
        return Ok((false, None));
    }
    if q0 >= -tol {
        return Ok((true, Some(st.x0)));
    }
    // Minimum below zero: climb the largest eigenvalue back up to zero.
    let e = st.decomp.max_eig();
    let t = (-q0 / e).sqrt();
    let i = st.decomp.n() - 1;
    let x = &st.x0 + st.decomp.eigenvectors.column(i) * t;
    Ok((true, Some(x)))
}

/// Does `q` take a nonpositive value anywhere?
///
/// Same spirit as [`quadratic_attains_zero`]: any negative curvature or an
/// escaping linear part drives the value below zero along an explicit ray;
/// otherwise the attained minimum answers directly.
pub fn attains_nonpositive(q: &Quadratic, tol: f64) -> Result<(bool, Option<DVector<f64>>)> {
    let n = q.dim();
    if n == 0 {
        return Ok(if q.constant() <= tol {
            (true, Some(DVector::zeros(0)))
        } else {
            (false, None)
        });
    }
    if q.hessian_is_zero() {
        let c = q.linear();
        let c0 = q.constant();
        if c.norm() <= RANK_REL_TOL * q.magnitude() {
            return Ok(if c0 <= tol {
                (true, Some(DVector::zeros(n)))
            } else {
                (false, None)
            });
        }
        let target = c0.min(0.0) - 1.0;
        let x = c * ((target - c0) / (2.0 * c.norm_squared()));
        return Ok((true, Some(x)));
    }
    let st = q.stationary_data()?;
    let slack = st.decomp.rank_tol;
    let q0 = q.eval(&st.x0);
    if st.decomp.min_eig() < -slack {
        let e = st.decomp.min_eig();
        let t = ((q0.max(0.0) + 1.0) / -e).sqrt();
        let x = &st.x0 + st.decomp.eigenvectors.column(0) * t;
        return Ok((true, Some(x)));
    }
    let in_range = st.lin_null.norm() <= RANK_REL_TOL * (1.0 + q.linear().norm());
    if !in_range {
        let u = &st.lin_null;
        let t = -(q0 + 1.0) / (2.0 * u.norm_squared());
        return Ok((true, Some(&st.x0 + u * t)));
    }
    Ok(if q0 <= tol {
        (true, Some(st.x0))
    } else {
        (false, None)
    })
}

/// Compute `inf (f1^2 + f2^2)` with a transcript recording how.
///
/// Dispatch: independent Hessians go to the semidefinite relaxation, which
/// is exact there; a dependent pair (either Hessian zero or one a scalar
/// multiple of the other) goes through the lifting below; two affine
/// functions reduce to least squares.
///
/// The lifting introduces `z = (z1, z2)` with the intent `z_i = f_i(x)`.
/// Writing `b` for the base index (nonzero Hessian) and `o` for the other,
/// `A_o = t* A_b` makes `f_o - t* f_b` affine, so the system
/// `{ f_b(x) - z_b = 0, f_o(x) - z_o = 0 }` is equivalent to one quadratic
/// equation plus one affine equation in `(x, z)`. Eliminating the affine
/// one by a hyperplane chart leaves `inf { z1^2 + z2^2 }` subject to a
/// single quadratic equality — solved exactly by its dual.
pub fn quartic_min(f1: &Quadratic, f2: &Quadratic, rel_tol: f64) -> Result<QuarticTranscript> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    let n = f1.dim();
    let z1 = f1.hessian_is_zero();
    let z2 = f2.hessian_is_zero();
    if z1 && z2 {
        // inf |G x + r|^2 for the stacked affine parts.
        let mut g = DMatrix::zeros(2, n);
        for j in 0..n {
            g[(0, j)] = 2.0 * f1.linear()[j];
            g[(1, j)] = 2.0 * f2.linear()[j];
        }
        let r = DVector::from_vec(vec![f1.constant(), f2.constant()]);
        let gtg = sym_eigen(&(g.transpose() * &g))?;
        let x_star = -gtg.apply_pinv(&(g.transpose() * &r));
        let v1 = f1.eval(&x_star);
        let v2 = f2.eval(&x_star);
        return Ok(QuarticTranscript::BothAffine {
            value: v1 * v1 + v2 * v2,
            x_star,
        });
    }

    let dependence = if z2 {
        Some((1u8, 0.0))
    } else if z1 {
        Some((2u8, 0.0))
    } else if let Some(t) = crate::separation::is_scalar_multiple(f2.matrix(), f1.matrix(), RANK_REL_TOL) {
        Some((1u8, t))
    } else {
        crate::separation::is_scalar_multiple(f1.matrix(), f2.matrix(), RANK_REL_TOL).map(|t| (2u8, t))
    };

    let Some((base_index, t_star)) = dependence else {
        let opt = lmi_quartic_min(f1, f2)?;
        return Ok(QuarticTranscript::Independent {
            value: opt.value,
            lmi: opt.point,
        });
    };

    let (base, other) = if base_index == 1 { (f1, f2) } else { (f2, f1) };
    let (lifted_obj, lifted_kept, h, h0) = lifted_pair(base, other, base_index, t_star);
    let robj = crate::canonical::restrict_to_hyperplane(&lifted_obj, &h, h0)?;
    let rkept = crate::canonical::restrict_to_hyperplane(&lifted_kept, &h, h0)?;
    let r = qp1eqc_value(&robj, &rkept, rel_tol)?;
    let value = if r.value.is_finite() { r.value.max(0.0) } else { 0.0 };
    let witness = match (&r.witness, r.attained) {
        (Some(w), true) => {
            let (y0, v) = crate::canonical::hyperplane_chart(&h, h0)?;
            let y = &y0 + &v * w;
            Some(DVector::from_fn(n, |i, _| y[i]))
        }
        _ => None,
    };
    Ok(QuarticTranscript::Dependent {
        value,
        t_star,
        base_index,
        h,
        h0,
        dual_lambda: r.multiplier,
        attained: r.attained && r.value.is_finite(),
        witness,
    })
}

/// Build the lifted objective `z1^2 + z2^2`, the kept quadratic constraint
/// `f_base(x) - z_base`, and the eliminated affine constraint
/// `(f_other - t* f_base)(x) - z_other + t* z_base = 0` as `(h, h0)`, all in
/// the `(x, z1, z2)` coordinates.
fn lifted_pair(
    base: &Quadratic,
    other: &Quadratic,
    base_index: u8,
    t_star: f64,
) -> (Quadratic, Quadratic, DVector<f64>, f64) {
    let n = base.dim();
    let nn = n + 2;
    let zb = n + (base_index as usize - 1);
    let zo = n + (2 - base_index as usize);

    let mut obj_m = DMatrix::zeros(nn, nn);
    obj_m[(n, n)] = 1.0;
    obj_m[(n + 1, n + 1)] = 1.0;
    let obj = Quadratic::new(obj_m, DVector::zeros(nn), 0.0).expect("square by construction");

    let mut kept_m = DMatrix::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            kept_m[(i, j)] = base.matrix()[(i, j)];
        }
    }
    let mut kept_a = DVector::zeros(nn);
    for i in 0..n {
        kept_a[i] = base.linear()[i];
    }
    kept_a[zb] = -0.5;
    let kept = Quadratic::new(kept_m, kept_a, base.constant()).expect("square by construction");

    let mut h = DVector::zeros(nn);
    for i in 0..n {
        h[i] = 2.0 * (other.linear()[i] - t_star * base.linear()[i]);
    }
    h[zo] = -1.0;
    h[zb] += t_star;
    let h0 = other.constant() - t_star * base.constant();
    (obj, kept, h, h0)
}

/// Decide whether the two quadratic hypersurfaces intersect.
pub fn decide(f1: &Quadratic, f2: &Quadratic, cfg: &ToleranceConfig) -> Result<Verdict> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    let smax = f1.magnitude().max(f2.magnitude());
    let dtol_f = cfg.decision_rel * 1f64.max(smax);
    let dtol_q = cfg.decision_rel * 1f64.max(smax * smax);
    let witness_band = 10.0 * dtol_f;
    let mut trace: Vec<String> = Vec::new();

    let p1 = f1.sign_profile(cfg.decision_rel * f1.magnitude())?;
    let p2 = f2.sign_profile(cfg.decision_rel * f2.magnitude())?;

    // An identically-zero quadratic makes its surface all of space.
    if p1.tag == SignTag::Zero || p2.tag == SignTag::Zero {
        let (other, other_index) = if p1.tag == SignTag::Zero {
            (f2, 2u8)
        } else {
            (f1, 1u8)
        };
        trace.push(format!(
            "surface {} is all of space; deciding solvability of the other equation",
            3 - other_index
        ));
        let (att, w) = quadratic_attains_zero(other, dtol_f)?;
        if att {
            return Ok(Verdict {
                tag: VerdictTag::Intersect,
                witness: w,
                certificate: None,
                quartic_min: None,
                tolerance: dtol_f,
                trace,
            });
        }
        let prof = if other_index == 1 { &p1 } else { &p2 };
        let flipped = prof.tag == SignTag::Nonpos;
        let g = if flipped { other.neg() } else { other.clone() };
        let st = g.stationary_data()?;
        let cert = Certificate::OneSidedEmpty {
            surface_index: other_index,
            sign_flipped: flipped,
            global_min: st.value,
            minimizer: st.x0,
        };
        return finalize_disjoint(f1, f2, cert, None, dtol_f, cfg, trace);
    }

    // A one-sided quadratic has an empty or affine zero set.
    for (idx, prof, this, other) in [(1u8, &p1, f1, f2), (2u8, &p2, f2, f1)] {
        let flipped = match prof.tag {
            SignTag::Nonneg => false,
            SignTag::Nonpos => true,
            _ => continue,
        };
        trace.push(format!(
            "surface {idx} is one-sided{}; its zero set is empty or affine",
            if flipped { " (after negation)" } else { "" }
        ));
        let g = if flipped { this.neg() } else { this.clone() };
        let st = g.stationary_data()?;
        if st.value > dtol_f {
            let cert = Certificate::OneSidedEmpty {
                surface_index: idx,
                sign_flipped: flipped,
                global_min: st.value,
                minimizer: st.x0,
            };
            return finalize_disjoint(f1, f2, cert, None, dtol_f, cfg, trace);
        }
        let basis = st.decomp.null_basis();
        let restricted = Quadratic::new(
            sym_product(other.matrix(), &basis),
            basis.transpose() * (other.matrix() * &st.x0 + other.linear()),
            other.eval(&st.x0),
        )?;
        let (att, w) = quadratic_attains_zero(&restricted, dtol_f)?;
        if att {
            let x = match w {
                Some(w) => &st.x0 + &basis * w,
                None => st.x0.clone(),
            };
            let ok = f1.eval(&x).abs() <= witness_band && f2.eval(&x).abs() <= witness_band;
            if !ok {
                trace.push(
                    "witness from the affine reduction exceeded the residual band; dropped"
                        .to_string(),
                );
            }
            return Ok(Verdict {
                tag: VerdictTag::Intersect,
                witness: ok.then_some(x),
                certificate: None,
                quartic_min: None,
                tolerance: dtol_f,
                trace,
            });
        }
        let cert = Certificate::AffineReduction {
            surface_index: idx,
            sign_flipped: flipped,
            x0: st.x0,
            basis,
            restricted,
        };
        return finalize_disjoint(f1, f2, cert, None, dtol_f, cfg, trace);
    }

    // Both surfaces are genuinely two-sided: compute the quartic minimum.
    let transcript = quartic_min(f1, f2, cfg.decision_rel)?;
    let v = transcript.value();
    trace.push(format!("inf(f1^2 + f2^2) = {v:.3e}"));
    if v > dtol_q {
        let qmin = Some(v);
        return finalize_disjoint(
            f1,
            f2,
            Certificate::PositiveGap { transcript },
            qmin,
            dtol_f,
            cfg,
            trace,
        );
    }

    // Value zero. An attained minimum is already an intersection.
    let direct_witness = match &transcript {
        QuarticTranscript::Dependent {
            attained: true,
            witness: Some(w),
            ..
        } => Some(w.clone()),
        QuarticTranscript::BothAffine { x_star, .. } => Some(x_star.clone()),
        _ => None,
    };
    if let Some(x) = direct_witness {
        if f1.eval(&x).abs() <= witness_band && f2.eval(&x).abs() <= witness_band {
            trace.push("quartic minimum attained at zero".to_string());
            return Ok(Verdict {
                tag: VerdictTag::Intersect,
                witness: Some(x),
                certificate: None,
                quartic_min: Some(v),
                tolerance: dtol_f,
                trace,
            });
        }
    }

    // Attainment analysis: separation first.
    if let Some((orientation, certificate)) = mutual_separation(f1, f2, cfg.decision_rel)? {
        trace.push("one surface separates the other".to_string());
        return finalize_disjoint(
            f1,
            f2,
            Certificate::Separation {
                orientation,
                certificate,
            },
            Some(v),
            dtol_f,
            cfg,
            trace,
        );
    }

    // The eight sign-oriented programs inf { s*f_i : t*f_j <= 0 }.
    let fs = [f1, f2];
    let mut records: Vec<ProgramRecord> = Vec::with_capacity(8);
    for (oi, ci) in [(0usize, 1usize), (1, 0)] {
        for os in [1i8, -1] {
            for cs in [1i8, -1] {
                let obj = if os > 0 { fs[oi].clone() } else { fs[oi].neg() };
                let con = if cs > 0 { fs[ci].clone() } else { fs[ci].neg() };
                let result = qp1qc_value(&obj, &con, cfg.decision_rel)?;
                records.push(ProgramRecord {
                    objective_index: oi as u8 + 1,
                    objective_sign: os,
                    constraint_index: ci as u8 + 1,
                    constraint_sign: cs,
                    result,
                });
            }
        }
    }

    let zero_band = 10.0 * dtol_f;
    let mut verified_witness: Option<DVector<f64>> = None;
    let mut fallback_start: Option<DVector<f64>> = None;
    let mut any_zero = false;
    let mut any_zero_unattained = false;
    let mut any_zero_attained = false;
    let mut any_positive = false;
    for rec in &records {
        let val = rec.result.value;
        if val.is_finite() && val > zero_band {
            // Program values are never overestimates (weak duality), so a
            // positive one already proves the surfaces apart: a common zero
            // would be feasible with objective value zero.
            any_positive = true;
            trace.push(format!(
                "program ({}f{} | {}f{} <= 0) has positive value {val:.3e}",
                sign_str(rec.objective_sign),
                rec.objective_index,
                sign_str(rec.constraint_sign),
                rec.constraint_index
            ));
        }
        if !val.is_finite() || val.abs() > zero_band {
            continue;
        }
        any_zero = true;
        if rec.result.attained {
            any_zero_attained = true;
            if let Some(w) = &rec.result.witness {
                if f1.eval(w).abs() <= zero_band && f2.eval(w).abs() <= zero_band {
                    verified_witness.get_or_insert_with(|| w.clone());
                } else {
                    fallback_start.get_or_insert_with(|| w.clone());
                }
            }
        } else {
            any_zero_unattained = true;
        }
    }

    if let Some(w) = verified_witness {
        trace.push("a zero-valued program attained its value on both surfaces".to_string());
        return Ok(Verdict {
            tag: VerdictTag::Intersect,
            witness: Some(w),
            certificate: None,
            quartic_min: Some(v),
            tolerance: dtol_f,
            trace,
        });
    }
    if any_zero_unattained || any_positive {
        if any_zero_attained && any_zero_unattained {
            trace.push(
                "mixed attainment among zero-valued programs; the unattained one decides"
                    .to_string(),
            );
        }
        if !any_zero_unattained {
            trace.push(
                "a positive-valued program proves the surfaces apart despite the zero quartic bound"
                    .to_string(),
            );
        }
        return finalize_disjoint(
            f1,
            f2,
            Certificate::UnattainedZero { programs: records },
            Some(v),
            dtol_f,
            cfg,
            trace,
        );
    }

    // No obstruction found. With the bound at zero and no sign-oriented
    // program pinning an unattained zero, contact is the expected answer —
    // but the bound is only a lower bound on inf(f1^2 + f2^2): on pairs
    // whose joint range fails to be convex the relaxation undershoots a
    // genuinely positive minimum, so intersection is claimed only with a
    // point that certifies it.
    trace.push(if any_zero {
        "zero-valued programs attained off the second surface; polishing a witness".to_string()
    } else {
        "no sign-oriented program is zero-valued; polishing a witness".to_string()
    });
    let mut seeds: Vec<DVector<f64>> = Vec::new();
    if let Some(s) = fallback_start {
        seeds.push(s);
    }
    if let Some(w) = crate::oracle::find_common_point(f1, f2, &seeds) {
        if f1.eval(&w).abs() <= witness_band && f2.eval(&w).abs() <= witness_band {
            return Ok(Verdict {
                tag: VerdictTag::Intersect,
                witness: Some(w),
                certificate: None,
                quartic_min: Some(v),
                tolerance: dtol_f,
                trace,
            });
        }
    }
    trace.push(
        "no certified common point was found; a zero relaxation bound alone cannot prove contact"
            .to_string(),
    );
    Ok(Verdict {
        tag: VerdictTag::Undecided,
        witness: None,
        certificate: None,
        quartic_min: Some(v),
        tolerance: dtol_f,
        trace,
    })
}

fn sign_str(s: i8) -> &'static str {
    if s >= 0 {
        "+"
    } else {
        "-"
    }
}

/// Validate, then emit DISJOINT — or downgrade to UNDECIDED when the
/// certificate does not survive its own re-check.
fn finalize_disjoint(
    f1: &Quadratic,
    f2: &Quadratic,
    cert: Certificate,
    quartic_min: Option<f64>,
    tolerance: f64,
    cfg: &ToleranceConfig,
    mut trace: Vec<String>,
) -> Result<Verdict> {
    let outcome = validate_certificate(f1, f2, &cert, cfg)?;
    if outcome.valid {
        Ok(Verdict {
            tag: VerdictTag::Disjoint,
            witness: None,
            certificate: Some(cert),
            quartic_min,
            tolerance,
            trace,
        })
    } else {
        for failure in &outcome.failures {
            trace.push(format!("certificate validation failed: {failure}"));
        }
        Ok(Verdict {
            tag: VerdictTag::Undecided,
            witness: None,
            certificate: Some(cert),
            quartic_min,
            tolerance,
            trace,
        })
    }
}

/// Re-check a DISJOINT certificate against the problem data.
///
/// Validation re-derives every claim with spectral decompositions and
/// closed-form dual values only — no search and no sampling beyond fixed
/// seeded probe points — so a pass means the disjointness proof stands on
/// its own.
pub fn validate_certificate(
    f1: &Quadratic,
    f2: &Quadratic,
    cert: &Certificate,
    cfg: &ToleranceConfig,
) -> Result<ValidationOutcome> {
    let smax = f1.magnitude().max(f2.magnitude());
    let dtol_f = cfg.decision_rel * 1f64.max(smax);
    let dtol_q = cfg.decision_rel * 1f64.max(smax * smax);
    let ctol = cfg.certificate_rel * 1f64.max(smax);
    let mut failures: Vec<String> = Vec::new();

    match cert {
        Certificate::PositiveGap { transcript } => match transcript {
            QuarticTranscript::Independent { value, lmi } => {
                let m = assemble_lmi(f1, f2, lmi.alpha, lmi.beta, lmi.gamma)?;
                let min_eig = sym_eigen(&m)?.min_eig();
                let slack = 1e-8 * (1.0 + max_abs(&m));
                if min_eig < -slack {
                    failures.push(format!(
                        "relaxation matrix is not positive semidefinite: min eig {min_eig:.3e}"
                    ));
                }
                if lmi.gamma <= dtol_q {
                    failures.push(format!("certified bound {:.3e} is not positive", lmi.gamma));
                }
                if (lmi.gamma - value).abs() > 1e-4 * (1.0 + value.abs()) {
                    failures.push("certified bound disagrees with the reported value".to_string());
                }
            }
            QuarticTranscript::Dependent {
                value,
                t_star,
                base_index,
                h,
                h0,
                dual_lambda,
                ..
            } => {
                if *base_index != 1 && *base_index != 2 {
                    failures.push(format!("base index {base_index} out of range"));
                    return Ok(ValidationOutcome {
                        valid: false,
                        failures,
                    });
                }
                let (base, other) = if *base_index == 1 { (f1, f2) } else { (f2, f1) };
                let prop = max_abs(&(other.matrix() - base.matrix() * *t_star));
                if prop > ctol.max(RANK_REL_TOL * pair_scale(f1.matrix(), f2.matrix())) {
                    failures.push(format!(
                        "Hessians are not proportional with factor {t_star}: residual {prop:.3e}"
                    ));
                }
                let (_, _, h_exp, h0_exp) = lifted_pair(base, other, *base_index, *t_star);
                if (h - &h_exp).amax() > ctol * (1.0 + h_exp.amax()) || (h0 - h0_exp).abs() > ctol * (1.0 + h0_exp.abs()) {
                    failures.push("lifted affine constraint differs from its derivation".to_string());
                }
                match dual_lambda {
                    None => failures.push("no dual multiplier recorded".to_string()),
                    Some(lam) => {
                        let (lifted_obj, lifted_kept, _, _) = lifted_pair(base, other, *base_index, *t_star);
                        let robj = crate::canonical::restrict_to_hyperplane(&lifted_obj, h, *h0)?;
                        let rkept = crate::canonical::restrict_to_hyperplane(&lifted_kept, h, *h0)?;
                        let d = dual_value(&robj, &rkept, *lam);
                        if !(d > dtol_q) {
                            failures.push(format!(
                                "dual value {d:.3e} at the recorded multiplier is not positive"
                            ));
                        }
                        if d.is_finite() && (d - value).abs() > 1e-4 * (1.0 + value.abs()) {
                            failures.push("dual value disagrees with the reported value".to_string());
                        }
                    }
                }
            }
            QuarticTranscript::BothAffine { value, x_star } => {
                if !f1.hessian_is_zero() || !f2.hessian_is_zero() {
                    failures.push("affine transcript over non-affine inputs".to_string());
                }
                let r1 = f1.eval(x_star);
                let r2 = f2.eval(x_star);
                let point_scale = 1.0 + x_star.norm_squared();
                if (r1 * r1 + r2 * r2 - value).abs() > ctol * point_scale * (1.0 + value.abs()) {
                    failures.push("reported value does not match the minimizer".to_string());
                }
                let grad = f1.linear() * r1 + f2.linear() * r2;
                if grad.norm() > ctol * point_scale {
                    failures.push(format!(
                        "least-squares stationarity violated: gradient {:.3e}",
                        grad.norm()
                    ));
                }
                if *value <= dtol_q {
                    failures.push(format!("gap {value:.3e} is not positive"));
                }
            }
        },
        Certificate::Separation {
            orientation,
            certificate,
        } => {
            let (g, f) = match orientation {
                Orientation::FirstSeparatesSecond => (f1, f2),
                Orientation::SecondSeparatesFirst => (f2, f1),
            };
            match separates(g, f, cfg.certificate_rel)? {
                None => failures.push("separation does not re-derive".to_string()),
                Some(again) => {
                    if (again.lambda - certificate.lambda).abs()
                        > 1e-6 * (1.0 + certificate.lambda.abs())
                    {
                        failures.push("re-derived multiplier differs".to_string());
                    }
                }
            }
            if certificate.restricted_min <= 0.0 {
                failures.push("restricted minimum on the separator is not positive".to_string());
            }
            // Substitution identity: the stored canonical form must
            // reproduce the (possibly negated) separated quadratic.
            let signed = if certificate.sign_flipped {
                f.neg()
            } else {
                f.clone()
            };
            let n = f.dim();
            let canon = &certificate.canon;
            for k in 0..20 {
                let z = DVector::from_fn(n, |i, _| ((k * n + i + 1) as f64).sin() * 2.0);
                let lhs = canon.eval_canonical(&z);
                let rhs = signed.eval(&canon.to_original(&z));
                if (lhs - rhs).abs() > 1e-6 * (1.0 + smax) * (1.0 + z.norm_squared()) {
                    failures.push("canonical form fails the substitution identity".to_string());
                    break;
                }
            }
        }
        Certificate::UnattainedZero { programs } => {
            let zero_band = 10.0 * dtol_f;
            let fs = [f1, f2];
            let mut any_ok = false;
            let mut candidate_seen = false;
            for rec in programs {
                let val = rec.result.value;
                let positive = val.is_finite() && val > zero_band;
                let zero_unattained =
                    val.is_finite() && val.abs() <= zero_band && !rec.result.attained;
                if !positive && !zero_unattained {
                    continue;
                }
                candidate_seen = true;
                if !(1..=2).contains(&rec.objective_index)
                    || !(1..=2).contains(&rec.constraint_index)
                {
                    continue;
                }
                let obj_base = fs[rec.objective_index as usize - 1];
                let con_base = fs[rec.constraint_index as usize - 1];
                let obj = if rec.objective_sign >= 0 {
                    obj_base.clone()
                } else {
                    obj_base.neg()
                };
                let con = if rec.constraint_sign >= 0 {
                    con_base.clone()
                } else {
                    con_base.neg()
                };
                if let Some(mu) = rec.result.multiplier {
                    if mu < -1e-9 {
                        continue;
                    }
                }
                let again = qp1qc_value(&obj, &con, cfg.decision_rel)?;
                let rederives = if positive {
                    again.value.is_finite() && again.value > zero_band
                } else {
                    again.value.is_finite() && again.value.abs() <= zero_band && !again.attained
                };
                if rederives {
                    any_ok = true;
                    break;
                }
            }
            if !candidate_seen {
                failures.push("no obstructing program recorded".to_string());
            } else if !any_ok {
                failures.push(
                    "no recorded program re-derives as an unattained zero or a positive bound"
                        .to_string(),
                );
            }
        }
        Certificate::OneSidedEmpty {
            surface_index,
            sign_flipped,
            global_min,
            minimizer,
        } => {
            let base = match surface_index {
                1 => f1,
                2 => f2,
                other => {
                    failures.push(format!("surface index {other} out of range"));
                    return Ok(ValidationOutcome {
                        valid: false,
                        failures,
                    });
                }
            };
            let g = if *sign_flipped { base.neg() } else { base.clone() };
            let d = sym_eigen(g.matrix())?;
            if d.min_eig() < -1e-8 * (1.0 + max_abs(g.matrix())) {
                failures.push("quadratic is not one-sided: Hessian has negative curvature".to_string());
            }
            let point_scale = 1.0 + minimizer.norm_squared();
            let grad = g.matrix() * minimizer + g.linear();
            if grad.norm() > ctol * point_scale {
                failures.push(format!(
                    "recorded minimizer is not stationary: gradient {:.3e}",
                    grad.norm()
                ));
            }
            if (g.eval(minimizer) - global_min).abs() > ctol * point_scale {
                failures.push("recorded minimum disagrees with the minimizer".to_string());
            }
            if *global_min <= dtol_f {
                failures.push(format!("minimum {global_min:.3e} is not positive"));
            }
        }
        Certificate::AffineReduction {
            surface_index,
            sign_flipped,
            x0,
            basis,
            restricted,
        } => {
            let (base, other) = match surface_index {
                1 => (f1, f2),
                2 => (f2, f1),
                bad => {
                    failures.push(format!("surface index {bad} out of range"));
                    return Ok(ValidationOutcome {
                        valid: false,
                        failures,
                    });
                }
            };
            let g = if *sign_flipped { base.neg() } else { base.clone() };
            let d = sym_eigen(g.matrix())?;
            if d.min_eig() < -1e-8 * (1.0 + max_abs(g.matrix())) {
                failures.push("quadratic is not one-sided".to_string());
            }
            let point_scale = 1.0 + x0.norm_squared();
            let grad = g.matrix() * x0 + g.linear();
            if grad.norm() > ctol * point_scale {
                failures.push("base point is not the minimizer of the one-sided quadratic".to_string());
            }
            if g.eval(x0).abs() > 10.0 * dtol_f {
                failures.push("one-sided quadratic does not vanish at the base point".to_string());
            }
            let m = basis.ncols();
            if d.null_basis().ncols() != m {
                failures.push("basis does not span the full zero set".to_string());
            }
            let gram = basis.transpose() * basis;
            if (&gram - DMatrix::identity(m, m)).amax() > 1e-8 {
                failures.push("basis is not orthonormal".to_string());
            }
            if m > 0 && max_abs(&(g.matrix() * basis)) > ctol * (1.0 + max_abs(g.matrix())) {
                failures.push("basis leaves the null space of the Hessian".to_string());
            }
            let expected = Quadratic::new(
                sym_product(other.matrix(), basis),
                basis.transpose() * (other.matrix() * x0 + other.linear()),
                other.eval(x0),
            )?;
            let coeff_slack = ctol * point_scale * (1.0 + smax);
            if max_abs(&(restricted.matrix() - expected.matrix())) > coeff_slack
                || (restricted.linear() - expected.linear()).amax() > coeff_slack
                || (restricted.constant() - expected.constant()).abs() > coeff_slack
            {
                failures.push("restricted quadratic differs from its derivation".to_string());
            }
            let (att, _) = quadratic_attains_zero(&expected, 10.0 * dtol_f)?;
            if att {
                failures.push("restricted quadratic does attain zero".to_string());
            }
        }
    }

    Ok(ValidationOutcome {
        valid: failures.is_empty(),
        failures,
    })
}
