//! The Keller-Segel instantiation of the differential-inequality engine:
//! the variance rate `f(v) = 4 - (M / 2 pi) g_1(sqrt(2 alpha v))`, every
//! named upper bound on the maximal existence time, the comparison roots
//! `Y0, Y1, Y2` with their closed-form brackets, and the scaling bounds for
//! amplified initial data.
//!
//! All outputs are upper bounds for the (unknown) maximal existence time;
//! nothing here claims the true blow-up time.

use crate::criteria::{self, CriteriaError, EIGHT_PI};
use crate::ode_bound::{self, InequalityProblem, MonotoneRate, OdeBoundError};
use crate::quad::{self, QuadError};
use crate::roots::{self, RootError};
use crate::specialfn::{self, SpecialFnError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PksBoundsError {
    #[error("mass {0} is not supercritical (requires M > 8 pi)")]
    Subcritical(f64),
    #[error("mass must be finite and positive, got {0}")]
    InvalidMass(f64),
    #[error("alpha must be finite and positive, got {0}")]
    InvalidAlpha(f64),
    #[error("variance must be finite and positive, got {0}")]
    InvalidVariance(f64),
    #[error("second moment must be finite and positive, got {0}")]
    InvalidSecondMoment(f64),
    #[error("scaling factor must satisfy lambda >= 1, got {0}")]
    InvalidLambda(f64),
    #[error("eps must be finite and positive, got {0}")]
    InvalidEps(f64),
    #[error("criterion unsatisfied: variance {v2} is not below the threshold {threshold}")]
    CriterionUnsatisfied { v2: f64, threshold: f64 },
    #[error("series for the time bound did not converge within {0} terms")]
    SeriesDivergence(usize),
    #[error("dilogarithm correction term is not negative: U = {0}")]
    DilogTermSign(f64),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    OdeBound(#[from] OdeBoundError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
}

fn check_mass_alpha(mass: f64, alpha: f64) -> Result<(), PksBoundsError> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(PksBoundsError::InvalidMass(mass));
    }
    if mass <= EIGHT_PI {
        return Err(PksBoundsError::Subcritical(mass));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PksBoundsError::InvalidAlpha(alpha));
    }
    Ok(())
}

fn check_variance(v2: f64) -> Result<(), PksBoundsError> {
    if !(v2 > 0.0 && v2.is_finite()) {
        return Err(PksBoundsError::InvalidVariance(v2));
    }
    Ok(())
}

/// The variance rate function of the supercritical system.
#[derive(Debug, Clone, Copy)]
pub struct PksRate {
    pub mass: f64,
    pub alpha: f64,
    g_tol: f64,
}

impl PksRate {
    pub fn new(mass: f64, alpha: f64) -> Result<Self, PksBoundsError> {
        check_mass_alpha(mass, alpha)?;
        Ok(PksRate {
            mass,
            alpha,
            g_tol: specialfn::DEFAULT_REL_TOL,
        })
    }

    /// Loosened inner quadrature tolerance for bulk evaluations (envelope
    /// scans); bound comparisons keep the default.
    pub fn with_g_tol(mut self, tol: f64) -> Self {
        self.g_tol = tol;
        self
    }

    /// `f(v) = 4 - (M / 2 pi) g_1(sqrt(2 alpha v))`, negative below the
    /// intrinsic threshold and increasing to 4.
    pub fn eval(&self, v: f64) -> f64 {
        if v < 0.0 {
            return f64::NAN;
        }
        match specialfn::g_one((2.0 * self.alpha * v).sqrt(), self.g_tol) {
            Ok(g) => 4.0 - self.mass / (2.0 * std::f64::consts::PI) * g,
            Err(_) => f64::NAN,
        }
    }

    /// `Psi(rho) = -g_alpha(sqrt(rho))`, the concave profile behind the
    /// Jensen step; `f(v) = 4 + (M / 2 pi) Psi(2 v)`.
    pub fn psi(&self, rho: f64) -> f64 {
        if rho < 0.0 {
            return f64::NAN;
        }
        match specialfn::g_one((self.alpha * rho).sqrt(), self.g_tol) {
            Ok(g) => -g,
            Err(_) => f64::NAN,
        }
    }

    pub fn monotone_rate(&self) -> Result<MonotoneRate, PksBoundsError> {
        let rate = *self;
        Ok(MonotoneRate::new(move |v| rate.eval(v))?)
    }

    pub fn problem(&self, v2: f64) -> Result<InequalityProblem, PksBoundsError> {
        check_variance(v2)?;
        let threshold = criteria::gamma_star(self.alpha, self.mass)?;
        if v2 >= threshold {
            return Err(PksBoundsError::CriterionUnsatisfied { v2, threshold });
        }
        Ok(InequalityProblem::new(self.monotone_rate()?, v2)?)
    }
}

/// Sharp time bound `2 pi int_0^{V2} ds / (M g_1(sqrt(2 alpha s)) - 8 pi)`,
/// through the generic engine with the variance rate.
pub fn t_star_alpha(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    let rate = PksRate::new(mass, alpha)?;
    let problem = rate.problem(v2)?;
    Ok(ode_bound::blowup_time_sharp(&problem)?)
}

/// Weak time bound `2 pi V2 / (M g_1(sqrt(2 alpha V2)) - 8 pi)`; equals the
/// engine's simple bound for the variance rate.
pub fn t_star_weak(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, alpha)?;
    check_variance(v2)?;
    let g = specialfn::g_one((2.0 * alpha * v2).sqrt(), specialfn::DEFAULT_REL_TOL)?;
    let denom = mass * g - EIGHT_PI;
    if denom <= 0.0 {
        let threshold = criteria::gamma_star(alpha, mass)?;
        return Err(PksBoundsError::CriterionUnsatisfied { v2, threshold });
    }
    Ok(2.0 * std::f64::consts::PI * v2 / denom)
}

/// Prior second-moment bound
/// `I0 / (4M(M/8pi - 1) - (C/pi) sqrt(alpha) M^{3/2} sqrt(I0))`.
/// `None` when the denominator is not positive (bound inapplicable).
pub fn t_cc(mass: f64, alpha: f64, i0: f64, c: f64) -> Result<Option<f64>, PksBoundsError> {
    check_mass_alpha(mass, alpha)?;
    if !(i0 > 0.0 && i0.is_finite()) {
        return Err(PksBoundsError::InvalidSecondMoment(i0));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(PksBoundsError::Criteria(CriteriaError::InvalidConstant(c)));
    }
    let denom = 4.0 * mass * (mass / EIGHT_PI - 1.0)
        - c / std::f64::consts::PI * alpha.sqrt() * mass.powf(1.5) * i0.sqrt();
    if denom <= 0.0 {
        return Ok(None);
    }
    Ok(Some(i0 / denom))
}

/// Prior second-moment bound `I0 / (M (M/8pi - 1))`.
pub fn t_ks(mass: f64, i0: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    if !(i0 > 0.0 && i0.is_finite()) {
        return Err(PksBoundsError::InvalidSecondMoment(i0));
    }
    Ok(i0 / (mass * (mass / EIGHT_PI - 1.0)))
}

/// Classical zero-consumption bound `2 pi I0 / (M (M - 8 pi))`.
pub fn t_classic(mass: f64, i0: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    if !(i0 > 0.0 && i0.is_finite()) {
        return Err(PksBoundsError::InvalidSecondMoment(i0));
    }
    Ok(2.0 * std::f64::consts::PI * i0 / (mass * (mass - EIGHT_PI)))
}

/// Variance refinement of the classical bound, `2 pi V2 / (M - 8 pi)`.
pub fn t_variance(mass: f64, v2: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    check_variance(v2)?;
    Ok(2.0 * std::f64::consts::PI * v2 / (mass - EIGHT_PI))
}

fn check_log_criterion(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, alpha)?;
    check_variance(v2)?;
    let threshold = criteria::gamma_log(alpha, mass)?;
    if v2 >= threshold {
        return Err(PksBoundsError::CriterionUnsatisfied { v2, threshold });
    }
    Ok((2.0 * alpha * v2).sqrt())
}

/// Endpoint bound `L = 2 pi V2 / (M e^{-sqrt(2 alpha V2)} - 8 pi)`,
/// applicable under the explicit log criterion.
pub fn l_bound(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    let z = check_log_criterion(mass, alpha, v2)?;
    Ok(2.0 * std::f64::consts::PI * v2 / (mass * (-z).exp() - EIGHT_PI))
}

const SERIES_MAX_TERMS: usize = 1_000_000;

/// Series form of `2 pi int_0^{V2} ds / (M e^{-sqrt(2 alpha s)} - 8 pi)`:
/// `(2 pi / alpha M) sum_n (8pi/M)^n / (n+1)^2 [1 + (y_n - 1) e^{y_n}]`
/// with `y_n = (n+1) sqrt(2 alpha V2)`. Truncated when a term falls below
/// 1e-15 of the running sum.
pub fn t_series(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    let z = check_log_criterion(mass, alpha, v2)?;
    let q = EIGHT_PI / mass;
    let mut sum = 0.0;
    let mut q_pow = 1.0; // q^n
    let mut w_pow = z.exp(); // q^n e^{(n+1)z}, bounded since q e^z < 1
    for n in 0..SERIES_MAX_TERMS {
        let np1 = (n + 1) as f64;
        let y = np1 * z;
        let term = (q_pow + (y - 1.0) * w_pow) / (np1 * np1);
        sum += term;
        if n > 0 && term < 1e-15 * sum {
            return Ok(2.0 * std::f64::consts::PI / (alpha * mass) * sum);
        }
        q_pow *= q;
        w_pow *= q * z.exp();
    }
    Err(PksBoundsError::SeriesDivergence(SERIES_MAX_TERMS))
}

/// Closed form of the same integral through the dilogarithm:
/// `l(alpha) sqrt(V2) ln(M / (M - 8 pi e^z)) + U` with
/// `U = (Li2(8pi/M) - Li2((8pi/M) e^z)) / (4 alpha) < 0`.
pub fn t_dilog(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    let z = check_log_criterion(mass, alpha, v2)?;
    let ell = 1.0 / (2.0 * (2.0 * alpha).sqrt());
    let q = EIGHT_PI / mass;
    let main = ell * v2.sqrt() * (mass / (mass - EIGHT_PI * z.exp())).ln();
    let u = (specialfn::dilog(q)? - specialfn::dilog(q * z.exp())?) / (4.0 * alpha);
    if u >= 0.0 {
        return Err(PksBoundsError::DilogTermSign(u));
    }
    Ok(main + u)
}

/// Logarithmic bound `K = l(alpha) sqrt(V2) ln((M - 8pi)/(M - 8pi e^z))`,
/// which dominates the series bound.
pub fn k_bound(mass: f64, alpha: f64, v2: f64) -> Result<f64, PksBoundsError> {
    let z = check_log_criterion(mass, alpha, v2)?;
    let ell = 1.0 / (2.0 * (2.0 * alpha).sqrt());
    Ok(ell * v2.sqrt() * ((mass - EIGHT_PI) / (mass - EIGHT_PI * z.exp())).ln())
}

/// Root tolerance for the comparison roots (the references carry 3 decimals).
const Y_ROOT_TOL: f64 = 1e-10;

/// The unique `Y > 1` with `(Y/2 - 1) e^Y + 1 = 0`, about 1.594.
pub fn y0() -> f64 {
    roots::brent(|y: f64| (0.5 * y - 1.0) * y.exp() + 1.0, 1.0, 3.0, 1e-12)
        .expect("fixed bracket (1, 3) always contains the root")
}

/// Lower closed-form bracket for `y2`: `ln(2M / (M + 8 pi))`.
pub fn y2_lower_bracket(mass: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    Ok((2.0 * mass / (mass + EIGHT_PI)).ln())
}

/// Upper closed-form bracket for `y2` from the quadratic refinement.
pub fn y2_upper_bracket(mass: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    let p = mass / (4.0 * std::f64::consts::PI) + 2.0;
    let q = mass / std::f64::consts::PI - 8.0;
    Ok(0.5 * ((p * p + q).sqrt() - p))
}

/// The unique root of `Y - 1 + (8 pi / M) e^Y` in `(0, ln(M/8pi))`,
/// strictly between the closed-form brackets.
pub fn y2(mass: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    let q = EIGHT_PI / mass;
    let top = (mass / EIGHT_PI).ln();
    let root = roots::brent(|y: f64| y - 1.0 + q * y.exp(), 0.0, top, Y_ROOT_TOL)?;
    debug_assert!(y2_lower_bracket(mass)? < root && root < y2_upper_bracket(mass)?);
    Ok(root)
}

/// The unique root in `(y2, ln(M/8pi))` of
/// `H(Y) = 4 pi Y e^Y / (M - 8 pi e^Y) - ln((M - 8 pi)/(M - 8 pi e^Y))`,
/// the crossover between the K and L bounds. H is negative left of the
/// root and positive right of it.
pub fn y1(mass: f64) -> Result<f64, PksBoundsError> {
    check_mass_alpha(mass, 1.0)?;
    let top = (mass / EIGHT_PI).ln();
    let h = |y: f64| {
        let e = y.exp();
        let denom = mass - EIGHT_PI * e;
        4.0 * std::f64::consts::PI * y * e / denom - ((mass - EIGHT_PI) / denom).ln()
    };
    let lo = y2(mass)?;
    // H(y2) < 0 (the function's minimum); walk the upper end in from the
    // asymptote until H is finite and positive
    let mut hi = top * (1.0 - 1e-12);
    let mut shrink = 0.2;
    while !(h(hi).is_finite() && h(hi) > 0.0) {
        hi = lo + (hi - lo) * (1.0 - shrink);
        shrink *= 0.5;
        if hi - lo < 1e-13 * top {
            return Err(PksBoundsError::Root(RootError::BracketExpansionFailed(hi)));
        }
    }
    Ok(roots::brent(h, lo, hi, Y_ROOT_TOL)?)
}

/// Which of the K and L bounds is tighter, with the root certificate.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct KlCertificate {
    pub k: f64,
    pub l: f64,
    /// `sqrt(2 alpha V2)`, the comparison abscissa
    pub z: f64,
    pub y0: f64,
    pub y1: f64,
    /// `K <= L`, equivalent to `y1 <= z`
    pub k_le_l: bool,
    /// the simpler sufficient condition `y0 < z` for K < L
    pub y0_sufficient: bool,
    /// z within root tolerance of y1: K and L agree to leading order
    pub boundary_case: bool,
}

/// Compare the two explicit bounds; `K <= L` exactly when
/// `y1(M) <= sqrt(2 alpha V2)`.
pub fn compare_kl(mass: f64, alpha: f64, v2: f64) -> Result<KlCertificate, PksBoundsError> {
    let z = check_log_criterion(mass, alpha, v2)?;
    let k = k_bound(mass, alpha, v2)?;
    let l = l_bound(mass, alpha, v2)?;
    let y1 = y1(mass)?;
    let y0 = y0();
    Ok(KlCertificate {
        k,
        l,
        z,
        y0,
        y1,
        k_le_l: k <= l,
        y0_sufficient: y0 < z,
        boundary_case: (z - y1).abs() <= 1e-8 * y1.max(1.0),
    })
}

/// Time bound for the scaled datum `lambda n0`, `lambda >= 1`: the tighter
/// of the direct bound (the sharp bound at mass `lambda M`) and the relaxed
/// `(1/lambda) t_star_alpha(M, alpha, V2)`. Both are valid upper bounds;
/// the direct one is never worse.
pub fn t_scaled(mass: f64, alpha: f64, v2: f64, lambda: f64) -> Result<f64, PksBoundsError> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(PksBoundsError::InvalidLambda(lambda));
    }
    let relaxed = t_star_alpha(mass, alpha, v2)? / lambda;
    let direct = t_star_alpha(lambda * mass, alpha, v2)?;
    Ok(direct.min(relaxed))
}

/// Scaling threshold `lambda_alpha = 8 pi / (M0 g_1(sqrt(2 alpha v)))`:
/// every multiple `lambda > lambda_alpha` of a datum with mass `M0` and
/// variance `v` satisfies the intrinsic criterion.
pub fn lambda_threshold(mass0: f64, alpha: f64, v: f64) -> Result<f64, PksBoundsError> {
    if !(mass0 > 0.0 && mass0.is_finite()) {
        return Err(PksBoundsError::InvalidMass(mass0));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PksBoundsError::InvalidAlpha(alpha));
    }
    check_variance(v)?;
    let g = specialfn::g_one((2.0 * alpha * v).sqrt(), specialfn::DEFAULT_REL_TOL)?;
    Ok(EIGHT_PI / (mass0 * g))
}

/// The scaling constant
/// `C_alpha(eps) = 2 pi int_0^v ds / (M0 g_1(sqrt(2 alpha s)) - 8 pi / (lambda_alpha + eps))`,
/// so that the scaled datum's time bound is `C_alpha(eps) / lambda` for all
/// `lambda >= lambda_alpha + eps`. Decreasing in eps.
pub fn c_alpha_eps(mass0: f64, alpha: f64, v: f64, eps: f64) -> Result<f64, PksBoundsError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(PksBoundsError::InvalidEps(eps));
    }
    let lambda_a = lambda_threshold(mass0, alpha, v)?;
    let floor = EIGHT_PI / (lambda_a + eps);
    let tol = specialfn::DEFAULT_REL_TOL;
    let res = quad::integrate(
        move |s| match specialfn::g_one((2.0 * alpha * s).sqrt(), tol) {
            Ok(g) => 1.0 / (mass0 * g - floor),
            Err(_) => f64::NAN,
        },
        0.0,
        v,
        ode_bound::THETA_REL_TOL,
    )?;
    let value = 2.0 * std::f64::consts::PI * res.value;
    debug_assert!(value.is_finite() && value > 0.0);
    Ok(value)
}

/// Sharp and affine envelopes for the variance at time `t`, each paired
/// with its derivative bound. The derivative bound never exceeds 4.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct PksEnvelope {
    pub v_sharp: f64,
    pub vprime_sharp: f64,
    pub v_weak: f64,
    pub vprime_weak: f64,
}

pub fn variance_envelope_pks(
    mass: f64,
    alpha: f64,
    v2: f64,
    t: f64,
) -> Result<PksEnvelope, PksBoundsError> {
    let rate = PksRate::new(mass, alpha)?;
    let problem = rate.problem(v2)?;
    let v_sharp = ode_bound::envelope(&problem, t)?;
    let vprime_sharp = rate.eval(v_sharp);
    let (v_weak, vprime_weak) = ode_bound::envelope_weak(&problem, t)?;
    debug_assert!(vprime_sharp <= 4.0 && vprime_weak <= 4.0);
    Ok(PksEnvelope {
        v_sharp,
        vprime_sharp,
        v_weak,
        vprime_weak,
    })
}

/// Inputs for a full time-bound report.
#[derive(Debug, Clone, Copy)]
pub struct ReportInputs {
    pub mass: f64,
    pub alpha: f64,
    pub variance: f64,
    /// second moment about the origin; derived from variance and center
    /// when absent
    pub second_moment: Option<f64>,
    pub center: [f64; 2],
    pub cc_constant: f64,
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
}

impl ReportInputs {
    pub fn new(mass: f64, alpha: f64, variance: f64) -> Self {
        ReportInputs {
            mass,
            alpha,
            variance,
            second_moment: None,
            center: [0.0, 0.0],
            cc_constant: 1.0,
            lambda: None,
            eps: None,
        }
    }
}

/// Every named time bound with applicability flags; absent entries mean
/// the corresponding criterion failed, never a silent default.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TimeBoundReport {
    pub mass: f64,
    pub alpha: f64,
    pub variance: f64,
    pub second_moment: f64,
    pub center: [f64; 2],
    pub cc_constant: f64,
    pub gamma_star: f64,
    pub gamma_log: f64,
    pub criterion_satisfied: bool,
    /// variance within 1e-10 relative of the threshold: quadrature of the
    /// sharp bound is near-singular and its accuracy reduced
    pub near_boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_weak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cc: Option<f64>,
    pub t_ks: f64,
    pub t_classic: f64,
    pub t_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_series: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_dilog: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kl: Option<KlCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_eps: Option<f64>,
}

/// Assemble the full report. Bounds whose criteria fail are absent; the
/// report itself only requires a supercritical mass.
pub fn time_bound_report(inputs: ReportInputs) -> Result<TimeBoundReport, PksBoundsError> {
    let ReportInputs {
        mass,
        alpha,
        variance,
        second_moment,
        center,
        cc_constant,
        lambda,
        eps,
    } = inputs;
    check_mass_alpha(mass, alpha)?;
    check_variance(variance)?;
    let i0 = match second_moment {
        Some(i) => {
            if !(i > 0.0 && i.is_finite()) {
                return Err(PksBoundsError::InvalidSecondMoment(i));
            }
            i
        }
        None => mass * (variance + center[0] * center[0] + center[1] * center[1]),
    };
    let g_star = criteria::gamma_star(alpha, mass)?;
    let g_log = criteria::gamma_log(alpha, mass)?;
    let satisfied = variance < g_star;
    let near_boundary = (variance - g_star).abs() <= 1e-10 * g_star;
    let log_ok = variance < g_log;

    // near the threshold the integrand is steep at the upper endpoint; the
    // double-exponential nodes cluster there, so the bound is still
    // computed and the near_boundary flag records the reduced accuracy.
    // Only the engine's own borderline rejection (1e-12 relative) makes
    // the sharp bound unavailable.
    let t_alpha = if satisfied {
        match t_star_alpha(mass, alpha, variance) {
            Ok(v) => Some(v),
            Err(PksBoundsError::OdeBound(OdeBoundError::Borderline { .. })) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let t_weak = if satisfied {
        Some(t_star_weak(mass, alpha, variance)?)
    } else {
        None
    };
    let gamma_eps_value = match eps {
        Some(e) => criteria::gamma_eps(alpha, mass, e)?,
        None => None,
    };
    Ok(TimeBoundReport {
        mass,
        alpha,
        variance,
        second_moment: i0,
        center,
        cc_constant,
        gamma_star: g_star,
        gamma_log: g_log,
        criterion_satisfied: satisfied,
        near_boundary,
        t_alpha,
        t_weak,
        t_cc: t_cc(mass, alpha, i0, cc_constant)?,
        t_ks: t_ks(mass, i0)?,
        t_classic: t_classic(mass, i0)?,
        t_variance: t_variance(mass, variance)?,
        l_bound: if log_ok {
            Some(l_bound(mass, alpha, variance)?)
        } else {
            None
        },
        k_bound: if log_ok {
            Some(k_bound(mass, alpha, variance)?)
        } else {
            None
        },
        t_series: if log_ok {
            Some(t_series(mass, alpha, variance)?)
        } else {
            None
        },
        t_dilog: if log_ok {
            Some(t_dilog(mass, alpha, variance)?)
        } else {
            None
        },
        kl: if log_ok {
            Some(compare_kl(mass, alpha, variance)?)
        } else {
            None
        },
        lambda,
        t_scaled: match (lambda, t_alpha) {
            (Some(l), Some(_)) => Some(t_scaled(mass, alpha, variance, l)?),
            _ => None,
        },
        gamma_eps: gamma_eps_value,
    })
}
