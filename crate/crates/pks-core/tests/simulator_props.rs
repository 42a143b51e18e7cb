//! Slower simulator checks: free-space kernel agreement, grid/time
//! refinement consistency, and the interaction identity along a run.

use pks_core::moments::{Density, Primitive};
use pks_core::simulator::{self, interaction_integral, solve_concentration, SimConfig};
use pks_core::specialfn;

const PI: f64 = std::f64::consts::PI;

#[test]
fn concentration_matches_free_space_kernel() {
    // narrow Gaussian on a big box: away from the source and the images,
    // the periodic resolvent approximates the free-space Bessel kernel,
    // c(r) ~ M * (1/2pi) K0(sqrt(alpha) r)
    let n = 256;
    let half_width = 5.0;
    let alpha = 1.0;
    let mass = 1.7;
    let d = Density::Analytic(vec![Primitive::Gaussian {
        center: [0.0, 0.0],
        std: 0.12,
        mass,
    }]);
    let grid = d.sample_grid(half_width, n, n, 0.0);
    let c = solve_concentration(&grid, alpha).unwrap();
    let dx = grid.dx();
    let j_mid = n / 2;
    for r in [0.5, 1.0, 1.5, 2.0] {
        // nearest cell center along the positive x axis
        let i = ((r + half_width) / dx - 0.5).round() as usize;
        let x = -half_width + (i as f64 + 0.5) * dx;
        let got = c[j_mid * n + i];
        let want = mass * specialfn::bessel_kernel(alpha, x.hypot(0.5 * dx)).unwrap();
        assert!(
            (got - want).abs() <= 0.02 * want,
            "r = {x}: periodic {got} vs free-space {want}"
        );
    }
}

fn subcritical_config(n: usize, t_end: f64) -> SimConfig {
    SimConfig {
        half_width: 4.0,
        nx: n,
        ny: n,
        alpha: 1.0,
        dt0: 1e-3,
        t_end,
        cfl_safety: 0.3,
        blowup_density_factor: 1e3,
        dt_min: 1e-10,
        sample_dt: Some(t_end / 40.0),
    }
}

fn subcritical_datum() -> Density {
    Density::Analytic(vec![Primitive::Gaussian {
        center: [0.0, 0.0],
        std: 0.5,
        mass: 4.0 * PI,
    }])
}

#[test]
fn refinement_consistency_mid_run() {
    // halving dx (and with it the CFL-limited dt) moves the sampled
    // variance by less than 1% at mid-run
    let t_end = 0.08;
    let coarse = simulator::run(subcritical_config(64, t_end), &subcritical_datum()).unwrap();
    let fine = simulator::run(subcritical_config(128, t_end), &subcritical_datum()).unwrap();
    let mid = t_end / 2.0;
    let pick = |trace: &simulator::SimTrace| {
        trace
            .samples
            .iter()
            .min_by(|a, b| (a.t - mid).abs().total_cmp(&(b.t - mid).abs()))
            .copied()
            .unwrap()
    };
    let a = pick(&coarse);
    let b = pick(&fine);
    // sampling instants differ slightly between runs; correct linearly
    let slope = a.vprime_fd.unwrap_or(0.0);
    let a_v = a.variance + slope * (b.t - a.t);
    assert!(
        (a_v - b.variance).abs() <= 0.01 * b.variance,
        "coarse {} (at t {}) vs fine {} (at t {})",
        a.variance,
        a.t,
        b.variance,
        b.t
    );
}

#[test]
fn interaction_identity_along_a_run() {
    // the finite-difference slope of the sampled second moment matches
    // the interaction prediction I' = 4M + (M^2/2pi) psi_mean mid-run
    let t_end = 0.08;
    let trace = simulator::run(subcritical_config(64, t_end), &subcritical_datum()).unwrap();
    let samples = &trace.samples;
    let mid = samples.len() / 2;
    let (prev, cur, next) = (&samples[mid - 1], &samples[mid], &samples[mid + 1]);
    let fd = (next.second_moment - prev.second_moment) / (next.t - prev.t);
    let predicted = 4.0 * cur.mass + cur.mass * cur.mass / (2.0 * PI) * cur.psi_mean;
    assert!(
        (fd - predicted).abs() <= 0.05 * predicted.abs(),
        "dI/dt finite difference {fd} vs interaction prediction {predicted}"
    );
    // and the prediction agrees with a fresh evaluation on the initial grid
    let grid = subcritical_datum().sample_grid(4.0, 64, 64, 0.0);
    let direct = interaction_integral(&grid, 1.0).unwrap();
    let s0 = &samples[0];
    let from_trace = 4.0 * s0.mass + s0.mass * s0.mass / (2.0 * PI) * s0.psi_mean;
    assert!((direct - from_trace).abs() <= 1e-8 * direct.abs().max(1.0));
}

#[test]
fn subcritical_density_relaxes() {
    let trace = simulator::run(subcritical_config(64, 0.2), &subcritical_datum()).unwrap();
    assert_eq!(trace.terminated_by, simulator::Termination::TEnd);
    let first = trace.samples.first().unwrap();
    let last = trace.samples.last().unwrap();
    assert!(last.max_density.is_finite());
    // diffusion wins at subcritical mass: the peak decays after the
    // initial transient
    assert!(last.max_density < first.max_density);
    // mass conserved and all samples resolved on this smooth run
    for s in &trace.samples {
        assert!((s.mass / first.mass - 1.0).abs() < 1e-10);
        assert!(s.resolved);
    }
}
