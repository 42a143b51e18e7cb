//! Variance blow-up criteria in the supercritical regime `M > 8 pi` and the
//! comparison machinery between them.
//!
//! Four thresholds on the initial variance are tracked, all scaling like
//! `1/alpha`:
//!   * `gamma_star`: the intrinsic threshold `(g_1^{-1}(8 pi / M))^2 / 2 alpha`;
//!   * `gamma_cc`:   `(M - 8 pi)^2 / (4 alpha C^2 M^2)`, from the prior
//!     second-moment criterion with interpolation constant `C >= 1`;
//!   * `gamma_ks`:   the log-weighted prior threshold;
//!   * `gamma_log`:  `ln^2(M / 8 pi) / 2 alpha`, an explicit lower bound for
//!     `gamma_star` (the exponential lower bound on `g_1`, inverted);
//!   * `gamma_eps`:  the explicit double-log refinement, valid for large mass.

use crate::specialfn::{self, SpecialFnError};
use serde::Serialize;
use thiserror::Error;

pub const EIGHT_PI: f64 = 8.0 * std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("mass {0} is not supercritical (requires M > 8 pi = {EIGHT_PI:.6})")]
    Subcritical(f64),
    #[error("alpha must be finite and positive, got {0}")]
    InvalidAlpha(f64),
    #[error("interpolation constant must satisfy C >= 1, got {0}")]
    InvalidConstant(f64),
    #[error("variance must be finite and positive, got {0}")]
    InvalidVariance(f64),
    #[error("beta must lie in (0, 1/2), got {0}")]
    InvalidBeta(f64),
    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

fn check_mass_alpha(alpha: f64, mass: f64) -> Result<(), CriteriaError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CriteriaError::InvalidAlpha(alpha));
    }
    if !(mass > EIGHT_PI) || !mass.is_finite() {
        return Err(CriteriaError::Subcritical(mass));
    }
    Ok(())
}

/// Intrinsic variance threshold `(1/2 alpha) (g_1^{-1}(8 pi / M))^2`.
pub fn gamma_star(alpha: f64, mass: f64) -> Result<f64, CriteriaError> {
    check_mass_alpha(alpha, mass)?;
    let inv = specialfn::g_one_inv(EIGHT_PI / mass, specialfn::DEFAULT_REL_TOL)?;
    Ok(inv * inv / (2.0 * alpha))
}

/// Prior threshold `(M - 8 pi)^2 / (4 alpha C^2 M^2)`.
pub fn gamma_cc(alpha: f64, mass: f64, c: f64) -> Result<f64, CriteriaError> {
    check_mass_alpha(alpha, mass)?;
    if !(c >= 1.0 && c.is_finite()) {
        return Err(CriteriaError::InvalidConstant(c));
    }
    let excess = mass - EIGHT_PI;
    Ok(excess * excess / (4.0 * alpha * c * c * mass * mass))
}

/// Prior threshold `(1/8 alpha) (M-8pi)/(M+8pi) ln^2(2M/(M+8pi))`.
pub fn gamma_ks(alpha: f64, mass: f64) -> Result<f64, CriteriaError> {
    check_mass_alpha(alpha, mass)?;
    let l = (2.0 * mass / (mass + EIGHT_PI)).ln();
    Ok((mass - EIGHT_PI) / (mass + EIGHT_PI) * l * l / (8.0 * alpha))
}

/// Explicit threshold `ln^2(M / 8 pi) / (2 alpha)`, always below `gamma_star`.
pub fn gamma_log(alpha: f64, mass: f64) -> Result<f64, CriteriaError> {
    check_mass_alpha(alpha, mass)?;
    let l = (mass / EIGHT_PI).ln();
    Ok(l * l / (2.0 * alpha))
}

/// Double-log refinement `(1/2 alpha) ln^2((c_eps M / 8 pi) sqrt(ln(c_eps M / 8 pi)))`
/// with `c_eps = (1 - eps) sqrt(pi/2)`. Returns `None` when the inner
/// logarithm does not exceed 1 (the formula only applies to large mass).
pub fn gamma_eps(alpha: f64, mass: f64, eps: f64) -> Result<Option<f64>, CriteriaError> {
    check_mass_alpha(alpha, mass)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CriteriaError::InvalidEps(eps));
    }
    let c_eps = (1.0 - eps) * (std::f64::consts::PI / 2.0).sqrt();
    let ratio = c_eps * mass / EIGHT_PI;
    if ratio <= std::f64::consts::E {
        return Ok(None);
    }
    let inner = ratio * ratio.ln().sqrt();
    let l = inner.ln();
    Ok(Some(l * l / (2.0 * alpha)))
}

/// The open interval of consumption rates on which a datum with the given
/// moments satisfies the intrinsic criterion: `(0, alpha_max)` with
/// `alpha_max = (g_1^{-1}(8 pi / M))^2 / (2 V2)`.
pub fn alpha_blowup_interval(mass: f64, variance: f64) -> Result<f64, CriteriaError> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(CriteriaError::InvalidVariance(variance));
    }
    // alpha plays no role in the formula; validate mass with a dummy alpha
    check_mass_alpha(1.0, mass)?;
    let inv = specialfn::g_one_inv(EIGHT_PI / mass, specialfn::DEFAULT_REL_TOL)?;
    Ok(inv * inv / (2.0 * variance))
}

/// Lanczos approximation (g = 7, n = 9) of the gamma function, with the
/// reflection formula below 1/2. Only exercised for arguments in (0, 1).
fn gamma_fn(z: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * z).sin() * gamma_fn(1.0 - z));
    }
    let z = z - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// Lower bound on the ratio `gamma_star / gamma_cc`:
/// `C_beta * (g_1^{-1}(8 pi / M))^{-(2 - 4 beta)}` with
/// `C_beta = 2 C^2 K_beta^{-2}`, `K_beta = (L_beta/(1-beta)) 4^{beta-1} Gamma(beta)`
/// and `L_beta = beta^beta e^{-beta}`. Diverges as the mass approaches the
/// critical value, which is the point: the intrinsic threshold wins there.
pub fn ratio_lower_bound(mass: f64, beta: f64, c: f64) -> Result<f64, CriteriaError> {
    check_mass_alpha(1.0, mass)?;
    if !(beta > 0.0 && beta < 0.5) {
        return Err(CriteriaError::InvalidBeta(beta));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(CriteriaError::InvalidConstant(c));
    }
    let l_beta = beta.powf(beta) * (-beta).exp();
    let k_beta = l_beta / (1.0 - beta) * 4.0f64.powf(beta - 1.0) * gamma_fn(beta);
    let c_beta = 2.0 * c * c / (k_beta * k_beta);
    let inv = specialfn::g_one_inv(EIGHT_PI / mass, specialfn::DEFAULT_REL_TOL)?;
    Ok(c_beta * inv.powf(-(2.0 - 4.0 * beta)))
}

/// Satisfaction flags for a concrete variance against each threshold
/// (strict inequalities; boundary cases are flagged, not decided).
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct SatisfiedFlags {
    pub star: bool,
    pub cc: bool,
    pub ks: bool,
    pub log: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<bool>,
    /// variance within 1e-10 relative of gamma_star: treat with care
    pub near_boundary: bool,
}

/// All thresholds, their ratios and asymptotic-regime flags.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CriterionReport {
    pub mass: f64,
    pub alpha: f64,
    pub cc_constant: f64,
    pub gamma_star: f64,
    pub gamma_cc: f64,
    pub gamma_ks: f64,
    pub gamma_log: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_eps: Option<f64>,
    pub ratio_star_cc: f64,
    pub ratio_cc_ks: f64,
    /// mass within 10% of critical: the intrinsic/cc ratio blows up
    pub near_critical_mass: bool,
    /// mass beyond 100x critical: cc and ks saturate to constants
    pub large_mass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied: Option<SatisfiedFlags>,
}

/// Evaluate every criterion at the given parameters; `variance` is optional
/// and adds satisfaction flags, `eps` enables the double-log threshold.
pub fn compare_gammas(
    alpha: f64,
    mass: f64,
    c: f64,
    variance: Option<f64>,
    eps: Option<f64>,
) -> Result<CriterionReport, CriteriaError> {
    let star = gamma_star(alpha, mass)?;
    let cc = gamma_cc(alpha, mass, c)?;
    let ks = gamma_ks(alpha, mass)?;
    let log = gamma_log(alpha, mass)?;
    let geps = match eps {
        Some(e) => gamma_eps(alpha, mass, e)?,
        None => None,
    };
    if let Some(v) = variance {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CriteriaError::InvalidVariance(v));
        }
    }
    let satisfied = variance.map(|v| SatisfiedFlags {
        star: v < star,
        cc: v < cc,
        ks: v < ks,
        log: v < log,
        eps: geps.map(|g| v < g),
        near_boundary: (v - star).abs() <= 1e-10 * star,
    });
    Ok(CriterionReport {
        mass,
        alpha,
        cc_constant: c,
        gamma_star: star,
        gamma_cc: cc,
        gamma_ks: ks,
        gamma_log: log,
        gamma_eps: geps,
        ratio_star_cc: star / cc,
        ratio_cc_ks: cc / ks,
        near_critical_mass: mass < 1.1 * EIGHT_PI,
        large_mass: mass > 100.0 * EIGHT_PI,
        variance,
        satisfied,
    })
}
