//! Modified Bessel functions of the second kind, K0 and K1.
//!
//! These serve as reference values for the quadrature-based kernel
//! evaluations elsewhere in the crate, so they deliberately share no code
//! with the `quad` module: small arguments use the ascending series, large
//! arguments the trapezoidal rule on the cosh integral representation
//! `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`, whose
//! double-exponential decay makes the plain trapezoid spectrally accurate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("argument must be positive and finite, got {0}")]
    Domain(f64),
    #[error("trapezoid refinement did not converge for x = {0}")]
    NoConvergence(f64),
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOFF: f64 = 2.0;

/// K0(x) for x > 0.
pub fn k0(x: f64) -> Result<f64, BesselError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(BesselError::Domain(x));
    }
    if x <= SERIES_CUTOFF {
        Ok(k0_series(x))
    } else {
        cosh_integral(x, 0)
    }
}

/// K1(x) for x > 0.
pub fn k1(x: f64) -> Result<f64, BesselError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(BesselError::Domain(x));
    }
    if x <= SERIES_CUTOFF {
        Ok(k1_series(x))
    } else {
        cosh_integral(x, 1)
    }
}

/// Ascending series: K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} H_k q^k / (k!)^2
/// with q = x^2/4 and H_k the k-th harmonic number.
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let lead = -(0.5 * x).ln() - EULER_GAMMA;
    let mut i0_term = 1.0; // q^k / (k!)^2
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut corr = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        i0_term *= q / (kf * kf);
        i0 += i0_term;
        harmonic += 1.0 / kf;
        let c = i0_term * harmonic;
        corr += c;
        if i0_term < 1e-18 * i0 && c < 1e-18 * corr.max(1.0) {
            break;
        }
    }
    lead * i0 + corr
}

/// Ascending series for K1:
/// K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_{k>=0} (H_k + H_{k+1} - 2 gamma) q^k / (k! (k+1)!)
fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let lnh = (0.5 * x).ln();
    // I1(x) = (x/2) sum q^k / (k! (k+1)!)
    let mut term = 1.0; // q^k / (k! (k+1)!)
    let mut i1_sum = 1.0;
    let mut h_k = 0.0;
    let mut h_k1 = 1.0;
    let mut psi_sum = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        i1_sum += term;
        h_k += 1.0 / kf;
        h_k1 += 1.0 / (kf + 1.0);
        let c = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
        psi_sum += c;
        if term < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + lnh * i1 - 0.25 * x * psi_sum
}

/// Trapezoid on f(t) = exp(-x cosh t) cosh(nu t), halving the step until two
/// passes agree to machine-level relative accuracy.
fn cosh_integral(x: f64, nu: u32) -> Result<f64, BesselError> {
    // beyond this t the integrand underflows for every x handled here
    let t_cut = (750.0 / x + (750.0f64 / x * 750.0 / x - 1.0).max(0.0).sqrt())
        .ln()
        .max(1.0);
    let eval = |t: f64| -> f64 {
        let arg = -x * t.cosh();
        if arg < -745.0 {
            return 0.0;
        }
        let c = if nu == 0 { 1.0 } else { (nu as f64 * t).cosh() };
        arg.exp() * c
    };
    let mut h = 0.5;
    let mut prev = f64::NAN;
    for _ in 0..14 {
        let n = (t_cut / h).ceil() as usize;
        let mut sum = 0.5 * eval(0.0);
        for k in 1..=n {
            sum += eval(k as f64 * h);
        }
        let val = sum * h;
        if prev.is_finite() && (val - prev).abs() <= 1e-15 * val.abs() {
            return Ok(val);
        }
        prev = val;
        h *= 0.5;
    }
    Err(BesselError::NoConvergence(x))
}
