//! Generic engine for the scalar differential inequality `V'(t) <= f(V(t))`
//! with an increasing rate `f` satisfying `f(0+) < 0 < f(inf)`.
//!
//! With `V(0)` below the unique zero of `f`, the comparison argument gives a
//! finite maximal existence time bounded by `Theta(0)`, where
//! `Theta(x) = int_x^{V(0)} ds / (-f(s))`, the decay envelope
//! `V(t) <= Theta^{-1}(t)`, and the cruder affine envelope
//! `V(t) <= V(0) + t f(V(0))`. The saturating solution of `V' = f(V)` is
//! exactly `Theta^{-1}`, so the same machinery reproduces it.

use crate::quad::{self, QuadError};
use crate::roots::{self, RootError};
use thiserror::Error;

/// Relative tolerance of the `Theta` quadrature.
pub const THETA_REL_TOL: f64 = 1e-10;
/// Absolute tolerance (in x) of zero finding and envelope inversion.
pub const ROOT_ABS_TOL: f64 = 1e-12;
/// Initial data closer to the rate's zero than this relative margin is
/// rejected: there `Theta` may diverge and the bounds degenerate.
pub const BORDERLINE_REL_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeBoundError {
    #[error("rate function returned a non-finite value at lambda = {0}")]
    NonFiniteRate(f64),
    #[error("rate function is not non-decreasing near lambda = {0}")]
    NotMonotone(f64),
    #[error("rate function is not negative at small arguments (f({0}) = {1})")]
    NotNegativeAtZero(f64, f64),
    #[error("rate has no zero within the search range: {0}")]
    NoZero(String),
    #[error("initial value must be positive and finite, got {0}")]
    InvalidInitialValue(f64),
    #[error("hypothesis violated: f(V0) must be negative, got f({v0}) = {f_v0}")]
    HypothesisViolation { v0: f64, f_v0: f64 },
    #[error("initial value {v0} is at or beyond the rate's zero (within the borderline margin)")]
    Borderline { v0: f64 },
    #[error("argument {x} outside [0, {v0}]")]
    OutOfDomain { x: f64, v0: f64 },
    #[error("time {t} is outside [0, {limit})")]
    TimeOutOfDomain { t: f64, limit: f64 },
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error("root finding failure: {0}")]
    Root(#[from] RootError),
}

/// Grid used by the construction-time monotonicity spot check.
const CHECK_POINTS: usize = 64;
const CHECK_LO: f64 = 1e-9;
const CHECK_HI: f64 = 1e9;

/// An increasing rate function for the differential inequality.
///
/// The analytic hypothesis (strictly increasing, `f(0+) < 0 < f(inf)`) is
/// not machine-checkable; construction spot-checks that the rate is
/// non-decreasing and negative at the small end of a geometric grid.
/// Constant negative rates are accepted: every bound except the zero
/// itself remains valid for them, with the zero treated as infinite.
pub struct MonotoneRate {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl MonotoneRate {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self, OdeBoundError> {
        let ratio = (CHECK_HI / CHECK_LO).powf(1.0 / (CHECK_POINTS - 1) as f64);
        let mut x = CHECK_LO;
        let mut prev = f(x);
        if !prev.is_finite() {
            return Err(OdeBoundError::NonFiniteRate(x));
        }
        if prev >= 0.0 {
            return Err(OdeBoundError::NotNegativeAtZero(x, prev));
        }
        for _ in 1..CHECK_POINTS {
            x *= ratio;
            let v = f(x);
            if !v.is_finite() {
                return Err(OdeBoundError::NonFiniteRate(x));
            }
            // tolerate quadrature-level noise on flat stretches
            if v < prev - 1e-9 * (1.0 + prev.abs()) {
                return Err(OdeBoundError::NotMonotone(x));
            }
            prev = v;
        }
        Ok(MonotoneRate { f: Box::new(f) })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        (self.f)(lambda)
    }
}

/// Unique zero of the rate, by outward bracket expansion plus Brent.
pub fn lambda_star(rate: &MonotoneRate) -> Result<f64, OdeBoundError> {
    roots::find_zero_expanding(|x| rate.eval(x), 1e-9, 1.0, ROOT_ABS_TOL, 1e300).map_err(
        |e| match e {
            RootError::BracketExpansionFailed(hi) => {
                OdeBoundError::NoZero(format!("rate still negative at lambda = {hi:.3e}"))
            }
            other => OdeBoundError::Root(other),
        },
    )
}

/// A rate paired with admissible initial data `V(0)`.
pub struct InequalityProblem {
    rate: MonotoneRate,
    v0: f64,
}

impl InequalityProblem {
    pub fn new(rate: MonotoneRate, v0: f64) -> Result<Self, OdeBoundError> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(OdeBoundError::InvalidInitialValue(v0));
        }
        let f_v0 = rate.eval(v0);
        if !f_v0.is_finite() {
            return Err(OdeBoundError::NonFiniteRate(v0));
        }
        if f_v0 >= 0.0 {
            return Err(OdeBoundError::HypothesisViolation { v0, f_v0 });
        }
        // V0 within the borderline margin of the zero counts as violating
        if rate.eval(v0 * (1.0 + BORDERLINE_REL_MARGIN)) >= 0.0 {
            return Err(OdeBoundError::Borderline { v0 });
        }
        Ok(InequalityProblem { rate, v0 })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn rate(&self) -> &MonotoneRate {
        &self.rate
    }
}

/// `Theta(x) = int_x^{V0} ds / (-f(s))`. The integrand is bounded by
/// `1/(-f(V0))` on the domain, so the integral is always finite.
pub fn theta(problem: &InequalityProblem, x: f64) -> Result<f64, OdeBoundError> {
    let v0 = problem.v0;
    if !(0.0..=v0).contains(&x) || !x.is_finite() {
        return Err(OdeBoundError::OutOfDomain { x, v0 });
    }
    if x == v0 {
        return Ok(0.0);
    }
    let rate = &problem.rate;
    let res = quad::integrate(move |s| 1.0 / -rate.eval(s), x, v0, THETA_REL_TOL)?;
    Ok(res.value)
}

/// Sharp blow-up time bound `Theta(0)`.
pub fn blowup_time_sharp(problem: &InequalityProblem) -> Result<f64, OdeBoundError> {
    theta(problem, 0.0)
}

/// Simple blow-up time bound `V0 / (-f(V0))`, never smaller than the sharp one.
pub fn blowup_time_simple(problem: &InequalityProblem) -> Result<f64, OdeBoundError> {
    let f_v0 = problem.rate.eval(problem.v0);
    if f_v0 >= 0.0 {
        return Err(OdeBoundError::HypothesisViolation {
            v0: problem.v0,
            f_v0,
        });
    }
    Ok(problem.v0 / -f_v0)
}

/// Decay envelope `Theta^{-1}(t)` on `0 <= t < Theta(0)`, by monotone
/// root finding on `x -> Theta(x) - t`.
pub fn envelope(problem: &InequalityProblem, t: f64) -> Result<f64, OdeBoundError> {
    let total = blowup_time_sharp(problem)?;
    if !(t >= 0.0 && t < total) {
        return Err(OdeBoundError::TimeOutOfDomain { t, limit: total });
    }
    if t == 0.0 {
        return Ok(problem.v0);
    }
    let g = |x: f64| match theta(problem, x) {
        Ok(v) => v - t,
        Err(_) => f64::NAN,
    };
    // Theta is decreasing in x: g(0) = total - t > 0, g(v0) = -t < 0
    Ok(roots::brent(g, 0.0, problem.v0, ROOT_ABS_TOL)?)
}

/// Affine envelope `V0 + t f(V0)` and the derivative bound obtained by
/// feeding it back through the rate. Valid on `0 <= t <= V0/(-f(V0))`.
pub fn envelope_weak(problem: &InequalityProblem, t: f64) -> Result<(f64, f64), OdeBoundError> {
    let simple = blowup_time_simple(problem)?;
    if !(t >= 0.0 && t <= simple) {
        return Err(OdeBoundError::TimeOutOfDomain { t, limit: simple });
    }
    let f_v0 = problem.rate.eval(problem.v0);
    let v_bound = (problem.v0 + t * f_v0).max(0.0);
    let deriv_bound = problem.rate.eval(v_bound);
    Ok((v_bound, deriv_bound))
}

/// The saturating solution of `V' = f(V)`, `V(0) = V0`: exactly
/// `Theta^{-1}(t)`, so the envelope is attained with equality.
pub fn exact_solution(problem: &InequalityProblem, t: f64) -> Result<f64, OdeBoundError> {
    envelope(problem, t)
}
