//! Bracketed scalar root finding: Brent's method (bisection with secant /
//! inverse-quadratic acceleration) plus outward bracket expansion.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("root is not bracketed: f({a}) = {fa}, f({b}) = {fb}")]
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("function returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("no sign change found while expanding the bracket (last upper bound {0})")]
    BracketExpansionFailed(f64),
    #[error("root refinement did not converge within {0} iterations")]
    MaxIterations(usize),
}

const MAX_ITER: usize = 200;

/// Brent's method on `[a, b]`. `f(a)` and `f(b)` must have opposite signs.
/// Converges to absolute tolerance `tol` in x (plus a machine-precision
/// floor relative to the root's magnitude).
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, RootError> {
    let eps = f64::EPSILON;
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { a, b, fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * eps * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, falling back to secant
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite(b));
        }
    }
    Err(RootError::MaxIterations(MAX_ITER))
}

/// Grow `[lo, hi]` multiplicatively until `f` changes sign, then refine with
/// Brent. Used for zeros of increasing rate functions whose scale is unknown.
pub fn find_zero_expanding<F: Fn(f64) -> f64>(
    f: F,
    lo0: f64,
    hi0: f64,
    tol: f64,
    max_abscissa: f64,
) -> Result<f64, RootError> {
    let mut lo = lo0;
    let mut flo = f(lo);
    if !flo.is_finite() {
        return Err(RootError::NonFinite(lo));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    // walk lo down if it does not start on the negative side
    while flo > 0.0 {
        lo /= 16.0;
        if lo < 1e-290 {
            return Err(RootError::BracketExpansionFailed(lo));
        }
        flo = f(lo);
        if !flo.is_finite() {
            return Err(RootError::NonFinite(lo));
        }
    }
    let mut hi = hi0.max(lo * 2.0);
    let mut fhi = f(hi);
    if !fhi.is_finite() {
        return Err(RootError::NonFinite(hi));
    }
    while fhi <= 0.0 {
        if fhi == 0.0 {
            return Ok(hi);
        }
        hi *= 4.0;
        if hi > max_abscissa {
            return Err(RootError::BracketExpansionFailed(hi));
        }
        fhi = f(hi);
        if !fhi.is_finite() {
            return Err(RootError::NonFinite(hi));
        }
    }
    brent(f, lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 1e-12);
        let r = brent(|x| x.sin() - 0.5 * x, 1.0, 2.0, 1e-14).unwrap();
        assert!((r.sin() - 0.5 * r).abs() < 1e-12);
    }

    #[test]
    fn endpoint_root() {
        assert_eq!(brent(|x| x, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn unbracketed_rejected() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(RootError::NotBracketed { .. })
        ));
    }

    #[test]
    fn expansion_finds_distant_zero() {
        let r = find_zero_expanding(|x| x.ln(), 1e-6, 0.5, 1e-13, 1e12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = find_zero_expanding(|x| x - 3.0e7, 1e-3, 1.0, 1e-6, 1e12).unwrap();
        assert!((r - 3.0e7).abs() < 1e-4);
    }

    #[test]
    fn expansion_gives_up_when_never_positive() {
        assert!(matches!(
            find_zero_expanding(|_| -1.0, 1e-6, 1.0, 1e-12, 1e9),
            Err(RootError::BracketExpansionFailed(_))
        ));
    }
}
