//! Invariants of the kernel profile, its inverse and the dilogarithm.

use pks_core::specialfn::{self, DEFAULT_REL_TOL};
use pks_core::{bessel, quad};
use proptest::prelude::*;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

#[test]
fn exponential_bounds_on_log_grid() {
    for r in log_grid(1e-3, 30.0, 50) {
        let g = specialfn::g_one(r, DEFAULT_REL_TOL).unwrap();
        assert!(g <= 1.0, "g1({r}) = {g} exceeds 1");
        assert!(g >= (-r).exp(), "g1({r}) = {g} below exp(-r)");
    }
}

#[test]
fn strictly_decreasing_on_log_grid() {
    let grid = log_grid(1e-3, 30.0, 50);
    let mut prev = specialfn::g_one(grid[0], DEFAULT_REL_TOL).unwrap();
    for &r in &grid[1..] {
        let g = specialfn::g_one(r, DEFAULT_REL_TOL).unwrap();
        assert!(g < prev, "not strictly decreasing at r = {r}");
        prev = g;
    }
}

#[test]
fn scaling_identity_against_independent_quadrature() {
    // quadrature of the alpha-form integral, not the delegation path
    for &alpha in &[0.5f64, 2.0, 5.0] {
        for &r in &[0.3f64, 1.0, 3.0] {
            let direct = quad::integrate_composite(
                |s| (-0.25 * alpha * r * r / s - s).exp(),
                &[0.0, 0.5 * alpha.sqrt() * r, (0.25 * alpha * r * r).max(1.0)],
                true,
                1e-12,
            )
            .unwrap()
            .value;
            let delegated = specialfn::g_alpha(alpha, r, 1e-12).unwrap();
            assert!(
                (direct - delegated).abs() <= 1e-10,
                "alpha = {alpha}, r = {r}: {direct} vs {delegated}"
            );
        }
    }
}

#[test]
fn inverse_round_trip() {
    for &rho in &[0.9, 0.5, 0.1, 1e-3, 1e-6] {
        let r = specialfn::g_one_inv(rho, DEFAULT_REL_TOL).unwrap();
        let back = specialfn::g_one(r, 1e-13).unwrap();
        assert!(
            (back - rho).abs() <= 1e-9,
            "rho = {rho}: round trip gave {back}"
        );
    }
}

#[test]
fn bessel_identity_on_log_grid() {
    // g1(r) = r K1(r), with K1 from the series / cosh-integral evaluation
    for r in log_grid(0.01, 20.0, 50) {
        let g = specialfn::g_one(r, DEFAULT_REL_TOL).unwrap();
        let identity = r * bessel::k1(r).unwrap();
        assert!(
            (g - identity).abs() <= 1e-10 * g,
            "r = {r}: quadrature {g} vs identity {identity}"
        );
    }
}

#[test]
fn asymptotic_inverse_sharpens_toward_zero() {
    // w(rho) = ln((c/rho) sqrt(ln(c/rho))) with c = sqrt(pi/2) is an
    // asymptotic inverse: g1(w(rho))/rho -> 1 monotonically on this grid
    let c = (std::f64::consts::PI / 2.0).sqrt();
    let mut prev = f64::INFINITY;
    for &rho in &[1e-3, 1e-6, 1e-9] {
        let w = (c / rho * (c / rho).ln().sqrt()).ln();
        let ratio = specialfn::g_one(w, DEFAULT_REL_TOL).unwrap() / rho;
        let dev = (ratio - 1.0).abs();
        assert!(dev < prev, "deviation {dev} did not shrink at rho = {rho}");
        prev = dev;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn g_alpha_in_unit_interval(alpha in 1e-3..100.0f64, r in 0.0..50.0f64) {
        // sqrt(alpha) r stays below the underflow guard on this domain
        let g = specialfn::g_alpha(alpha, r, 1e-10).unwrap();
        prop_assert!(g > 0.0 && g <= 1.0);
        // uniform exponential lower bound, transported by scaling
        prop_assert!(g >= (-(alpha.sqrt()) * r).exp() - 1e-12);
    }

    #[test]
    fn dilog_monotone_in_range(a in 0.0..0.999f64, b in 0.0..0.999f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let dl = specialfn::dilog(lo).unwrap();
        let dh = specialfn::dilog(hi).unwrap();
        prop_assert!(dl >= 0.0);
        prop_assert!(dh >= dl - 1e-14);
        // Li2 on [0,1) stays below pi^2/6
        prop_assert!(dh < std::f64::consts::PI.powi(2) / 6.0);
    }

    #[test]
    fn inverse_bounds_bracket(rho in 1e-9..9e-3f64, eps in 0.05..0.9f64) {
        let b = specialfn::g_inv_bounds(eps, rho).unwrap();
        prop_assert!(b.lower <= b.upper);
        prop_assert!(b.lower > 0.0);
        let inv = specialfn::g_one_inv(rho, 1e-12).unwrap();
        prop_assert!(b.lower <= inv && inv <= b.upper,
            "rho {} eps {}: {} !in [{}, {}]", rho, eps, inv, b.lower, b.upper);
    }
}
