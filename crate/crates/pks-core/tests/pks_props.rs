//! Cross-checks between the named time bounds: orderings from the chain of
//! inequalities, agreement of the three routes to the explicit integral,
//! and the K/L crossover characterization.

use pks_core::criteria;
use pks_core::pks_bounds::{self, t_star_alpha};
use pks_core::quad;

const PI: f64 = std::f64::consts::PI;
const EIGHT_PI: f64 = 8.0 * PI;

#[test]
fn sharp_weak_chain_on_grid() {
    for mass_factor in [1.2, 2.0, 3.0, 10.0] {
        let mass = EIGHT_PI * mass_factor;
        for alpha in [0.5, 1.0, 2.0] {
            let g_star = criteria::gamma_star(alpha, mass).unwrap();
            for frac in [0.1, 0.5, 0.9] {
                let v2 = frac * g_star;
                let sharp = t_star_alpha(mass, alpha, v2).unwrap();
                let weak = pks_bounds::t_star_weak(mass, alpha, v2).unwrap();
                assert!(
                    sharp < weak,
                    "chain violated at M = {mass_factor} x 8pi, alpha {alpha}, frac {frac}"
                );
            }
        }
    }
}

#[test]
fn triple_agreement_on_grid() {
    // series, dilogarithm and direct quadrature of the same integral
    for mass in [16.0 * PI, 24.0 * PI] {
        for alpha in [0.5, 1.0, 2.0] {
            let g_log = criteria::gamma_log(alpha, mass).unwrap();
            for frac in [0.25, 0.75] {
                let v2 = frac * g_log;
                let series = pks_bounds::t_series(mass, alpha, v2).unwrap();
                let dilog = pks_bounds::t_dilog(mass, alpha, v2).unwrap();
                let quadrature = quad::integrate(
                    |s| 2.0 * PI / (mass * (-(2.0 * alpha * s).sqrt()).exp() - EIGHT_PI),
                    0.0,
                    v2,
                    1e-12,
                )
                .unwrap()
                .value;
                let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
                assert!(
                    rel(series, dilog) <= 1e-9,
                    "series {series} vs dilog {dilog}"
                );
                assert!(
                    rel(series, quadrature) <= 1e-9,
                    "series {series} vs quad {quadrature}"
                );
            }
        }
    }
}

#[test]
fn series_below_k_and_l_everywhere_defined() {
    for mass_factor in [1.5f64, 2.0, 3.0, 5.0] {
        let mass = EIGHT_PI * mass_factor;
        for alpha in [0.25, 1.0, 4.0] {
            let g_log = criteria::gamma_log(alpha, mass).unwrap();
            for frac in [0.05, 0.3, 0.6, 0.95] {
                let v2 = frac * g_log;
                let series = pks_bounds::t_series(mass, alpha, v2).unwrap();
                let k = pks_bounds::k_bound(mass, alpha, v2).unwrap();
                let l = pks_bounds::l_bound(mass, alpha, v2).unwrap();
                assert!(series <= k * (1.0 + 1e-11));
                assert!(series <= l * (1.0 + 1e-11));
            }
        }
    }
}

#[test]
fn kl_sign_matches_root_certificate() {
    for mass in [16.0 * PI, 24.0 * PI] {
        let y1 = pks_bounds::y1(mass).unwrap();
        let top = (mass / EIGHT_PI).ln();
        // straddle the crossover with z values on both sides
        for frac in [0.35, 0.7, 0.9, 0.97, 1.03, 1.1] {
            let z = y1 * frac;
            if z >= top {
                continue;
            }
            let alpha = 1.3;
            let v2 = z * z / (2.0 * alpha);
            let cert = pks_bounds::compare_kl(mass, alpha, v2).unwrap();
            if cert.boundary_case {
                assert!((cert.k - cert.l).abs() <= 1e-6 * cert.l);
                continue;
            }
            assert_eq!(
                cert.l - cert.k > 0.0,
                z - y1 > 0.0,
                "sign(L - K) != sign(z - y1) at mass {mass}, z {z}"
            );
        }
    }
}

#[test]
fn log_criterion_nested_in_intrinsic() {
    for mass_factor in [1.01f64, 1.3, 2.0, 4.0, 20.0] {
        let mass = EIGHT_PI * mass_factor;
        for alpha in [0.5, 1.0, 3.0] {
            let g_log = criteria::gamma_log(alpha, mass).unwrap();
            let g_star = criteria::gamma_star(alpha, mass).unwrap();
            assert!(g_log <= g_star * (1.0 + 1e-12));
            // a variance passing the log criterion passes the intrinsic one,
            // so every bound gated on it is defined
            let v2 = 0.9 * g_log;
            assert!(t_star_alpha(mass, alpha, v2).is_ok());
        }
    }
}

#[test]
fn small_alpha_sharpness() {
    for mass in [16.0 * PI, 24.0 * PI] {
        let v2 = 0.1;
        let t = t_star_alpha(mass, 1e-8, v2).unwrap();
        let classical = 2.0 * PI * v2 / (mass - EIGHT_PI);
        let dev = (t * (mass - EIGHT_PI) / (2.0 * PI * v2) - 1.0).abs();
        assert!(
            dev <= 1e-4,
            "mass {mass}: deviation {dev} ({t} vs {classical})"
        );
    }
}

#[test]
fn scaled_bound_grid() {
    let (mass, alpha, v2) = (16.0 * PI, 1.0, 0.2);
    let base = t_star_alpha(mass, alpha, v2).unwrap();
    for lambda in [1.0f64, 1.2, 2.0, 5.0, 20.0] {
        let direct = t_star_alpha(lambda * mass, alpha, v2).unwrap();
        let relaxed = base / lambda;
        assert!(direct <= relaxed * (1.0 + 1e-9), "lambda {lambda}");
        let best = pks_bounds::t_scaled(mass, alpha, v2, lambda).unwrap();
        assert!((best - direct.min(relaxed)).abs() <= 1e-12 * best);
    }
}
