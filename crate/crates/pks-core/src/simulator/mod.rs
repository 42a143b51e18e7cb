//! Desk-scale solver for the chemotaxis equation on a periodic box, with
//! moment/variance diagnostics and envelope checking against the
//! differential-inequality predictions.
//!
//! The density diffuses spectrally and is advected toward the chemical
//! gradient by conservative flux-form central differences; the chemical is
//! the Helmholtz resolvent of the density. Explicit Heun (RK2) stepping
//! under a CFL rule, with the step shrunk by the driver as gradients
//! steepen. Blow-up itself is not resolvable on a grid: runs end at a
//! density-growth proxy or when the step collapses, and both are reported
//! as surrogates, never as the analytic blow-up time.

pub mod spectral;

use crate::criteria;
use crate::moments::{self, Density, GridDensity, Moments, MomentsError};
use crate::pks_bounds::{PksBoundsError, PksRate};
use crate::specialfn::{self, SpecialFnError};
use serde::{Deserialize, Serialize};
use spectral::{Cplx, Spectral2d};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial datum leaves {fraction:.3e} of its mass within the boundary ring")]
    ExcessBoundaryMass { fraction: f64 },
    #[error("field became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("CFL violation: dt = {dt:.3e} exceeds the stable limit {max_dt:.3e}")]
    CflViolation { dt: f64, max_dt: f64 },
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Bounds(#[from] PksBoundsError),
}

/// Simulation parameters. `nx`, `ny` must be powers of two.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub nx: usize,
    pub ny: usize,
    pub alpha: f64,
    /// initial (and maximal) time step
    pub dt0: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// run ends when the max density grows past this factor of its
    /// initial value (blow-up proxy)
    pub blowup_density_factor: f64,
    pub dt_min: f64,
    /// diagnostic sampling interval; defaults to t_end / 200
    #[serde(default)]
    pub sample_dt: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return fail("box half-width must be positive");
        }
        if !self.nx.is_power_of_two() || !self.ny.is_power_of_two() {
            return fail("nx and ny must be powers of two");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be positive (the resolvent is unbounded at alpha = 0)");
        }
        if !(self.dt0 > 0.0 && self.t_end > 0.0) {
            return fail("dt0 and t_end must be positive");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return fail("cfl_safety must lie in (0, 1)");
        }
        if !(self.blowup_density_factor > 1.0) {
            return fail("blowup_density_factor must exceed 1");
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt0) {
            return fail("dt_min must be positive and below dt0");
        }
        if let Some(s) = self.sample_dt {
            if !(s > 0.0) {
                return fail("sample_dt must be positive");
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SimConfig, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TEnd,
    BlowupProxy,
    DtCollapse,
}

/// One diagnostic sample along a run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    /// second moment about the origin
    pub second_moment: f64,
    pub variance: f64,
    pub center: [f64; 2],
    /// finite-difference variance slope against the previous sample
    pub vprime_fd: Option<f64>,
    pub max_density: f64,
    /// measured mean of the concave kernel profile against the pair
    /// measure: `-(1/M^2) iint g_alpha(|x-y|) n(x) n(y)`; the Jensen
    /// inequality bounds it by `-g_alpha(sqrt(2 V))`
    pub psi_mean: f64,
    /// false when undershoot clipping moved more than
    /// [`RESOLVED_CLIP_MASS_FRACTION`] of the mass since the previous
    /// sample: the field no longer resolves the dynamics pointwise and
    /// the per-sample conservation and envelope statements stop applying
    pub resolved: bool,
}

/// Diagnostics time series plus termination metadata.
#[derive(Debug, Clone, Serialize)]
pub struct SimTrace {
    pub samples: Vec<Sample>,
    pub terminated_by: Termination,
    pub blowup_proxy_time: Option<f64>,
    pub initial_moments: Moments,
    pub steps: usize,
    /// cells clipped at the negative-undershoot floor over the whole run
    pub undershoot_cells: usize,
    pub final_dt: f64,
}

/// Solve `(-Delta + alpha) c = n` spectrally on the periodic box.
pub fn solve_concentration(grid: &GridDensity, alpha: f64) -> Result<Vec<f64>, SimError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SimError::InvalidConfig(
            "alpha must be positive (the resolvent is unbounded at alpha = 0)".into(),
        ));
    }
    grid.validate()?;
    let s = Spectral2d::new(grid.nx, grid.ny, grid.half_width);
    let mut spec = s.forward(&grid.values);
    s.helmholtz_multiplier(&mut spec, alpha);
    Ok(s.inverse(&spec))
}

/// A sample counts as resolved when undershoot clipping redistributed
/// less than this fraction of the mass since the previous sample.
pub const RESOLVED_CLIP_MASS_FRACTION: f64 = 1e-6;

/// Evolving simulation state.
pub struct SimState {
    spectral: Spectral2d,
    pub config: SimConfig,
    pub values: Vec<f64>,
    pub t: f64,
    pub undershoot_cells: usize,
    /// total mass moved by undershoot clipping
    pub clipped_mass: f64,
}

struct RhsEval {
    rhs: Vec<f64>,
    max_grad: f64,
}

impl SimState {
    pub fn new(config: SimConfig, values: Vec<f64>) -> Result<SimState, SimError> {
        config.validate()?;
        if values.len() != config.nx * config.ny {
            return Err(SimError::InvalidConfig(
                "field length does not match grid".into(),
            ));
        }
        let spectral = Spectral2d::new(config.nx, config.ny, config.half_width);
        Ok(SimState {
            spectral,
            config,
            values,
            t: 0.0,
            undershoot_cells: 0,
            clipped_mass: 0.0,
        })
    }

    pub fn grid(&self) -> GridDensity {
        GridDensity {
            half_width: self.config.half_width,
            nx: self.config.nx,
            ny: self.config.ny,
            values: self.values.clone(),
        }
    }

    /// `dn/dt = Lap n - div(n grad c)`: spectral diffusion and resolvent,
    /// conservative flux-form central differences for the advection.
    fn rhs(&self, values: &[f64]) -> RhsEval {
        let s = &self.spectral;
        let (nx, ny) = (s.nx, s.ny);
        let spec = s.forward(values);
        let lap = s.laplacian(&spec);
        let mut chat = spec;
        s.helmholtz_multiplier(&mut chat, self.config.alpha);
        let (cx, cy) = s.gradient(&chat);
        let mut max_grad = 0.0f64;
        let mut flux_x = vec![0.0; values.len()];
        let mut flux_y = vec![0.0; values.len()];
        for idx in 0..values.len() {
            max_grad = max_grad.max(cx[idx].abs()).max(cy[idx].abs());
            flux_x[idx] = values[idx] * cx[idx];
            flux_y[idx] = values[idx] * cy[idx];
        }
        let (inv_2dx, inv_2dy) = (0.5 / s.dx(), 0.5 / s.dy());
        let mut rhs = lap;
        for j in 0..ny {
            let jm = (j + ny - 1) % ny;
            let jp = (j + 1) % ny;
            for i in 0..nx {
                let im = (i + nx - 1) % nx;
                let ip = (i + 1) % nx;
                let div = (flux_x[j * nx + ip] - flux_x[j * nx + im]) * inv_2dx
                    + (flux_y[jp * nx + i] - flux_y[jm * nx + i]) * inv_2dy;
                rhs[j * nx + i] -= div;
            }
        }
        RhsEval { rhs, max_grad }
    }

    /// Largest step the CFL rule allows for the current state.
    pub fn max_stable_dt(&self) -> f64 {
        let eval = self.rhs(&self.values);
        self.cfl_limit(eval.max_grad)
    }

    fn cfl_limit(&self, max_grad: f64) -> f64 {
        let dx = self.spectral.dx().min(self.spectral.dy());
        let diffusive = 0.25 * dx * dx;
        let advective = if max_grad > 0.0 {
            dx / max_grad
        } else {
            f64::INFINITY
        };
        self.config.cfl_safety * diffusive.min(advective)
    }

    /// Floor negative undershoots of the advection scheme at -1e-12 of the
    /// current max. Small deficits (smooth fields, startup transients of
    /// sampled discontinuous data) are removed from positive cells
    /// proportionally, keeping the correction mass-neutral; a large
    /// deficit means the collapse has outrun the grid, where propping the
    /// field up would only delay the blow-up proxy, so there the floor is
    /// applied plainly. Every correction is counted and reported.
    fn clip_undershoots(&mut self) {
        const REDISTRIBUTE_LIMIT: f64 = 1e-3;
        let max = self.values.iter().cloned().fold(0.0f64, f64::max);
        let floor = -1e-12 * max;
        let mut deficit = 0.0;
        let mut pos_sum = 0.0;
        for v in &self.values {
            if *v < floor {
                deficit += floor - *v;
            } else if *v > 0.0 {
                pos_sum += *v;
            }
        }
        if deficit == 0.0 {
            return;
        }
        let area = self.spectral.dx() * self.spectral.dy();
        self.clipped_mass += deficit * area;
        let scale = if deficit < REDISTRIBUTE_LIMIT * pos_sum {
            1.0 - deficit / pos_sum
        } else {
            1.0
        };
        for v in &mut self.values {
            if *v < floor {
                *v = floor;
                self.undershoot_cells += 1;
            } else if *v > 0.0 {
                *v *= scale;
            }
        }
    }
}

/// One explicit Heun step. Rejects (without modifying the state) when `dt`
/// violates the CFL rule for the current state.
pub fn step(state: &mut SimState, dt: f64) -> Result<(), SimError> {
    let stage1 = state.rhs(&state.values);
    let max_dt = state.cfl_limit(stage1.max_grad);
    if dt > max_dt {
        return Err(SimError::CflViolation { dt, max_dt });
    }
    let predictor: Vec<f64> = state
        .values
        .iter()
        .zip(&stage1.rhs)
        .map(|(&v, &r)| v + dt * r)
        .collect();
    let stage2 = state.rhs(&predictor);
    for ((v, r1), r2) in state.values.iter_mut().zip(&stage1.rhs).zip(&stage2.rhs) {
        *v += 0.5 * dt * (r1 + r2);
    }
    state.t += dt;
    if state.values.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { t: state.t });
    }
    state.clip_undershoots();
    Ok(())
}

/// Sample the radial kernel profile `g_alpha(|z|)` at the periodic
/// (minimum-image) displacements of the grid and transform it. The value
/// at zero displacement is `g_alpha(0) = 1`.
pub fn kernel_profile_hat(s: &Spectral2d, alpha: f64) -> Result<Vec<Cplx>, SimError> {
    let (nx, ny) = (s.nx, s.ny);
    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut kernel = vec![0.0; nx * ny];
    for j in 0..ny {
        let jj = if j > ny / 2 {
            j as isize - ny as isize
        } else {
            j as isize
        };
        let dy = jj as f64 * s.dy();
        for i in 0..nx {
            let ii = if i > nx / 2 {
                i as isize - nx as isize
            } else {
                i as isize
            };
            let r = (ii as f64 * s.dx()).hypot(dy);
            let g = match memo.entry(r.to_bits()) {
                std::collections::hash_map::Entry::Occupied(e) => *e.get(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let v = specialfn::g_alpha(alpha, r, 1e-10)?;
                    *e.insert(v)
                }
            };
            kernel[j * nx + i] = g;
        }
    }
    Ok(s.forward(&kernel))
}

fn grid_moments(s: &Spectral2d, values: &[f64]) -> (f64, f64, [f64; 2], f64) {
    let area = s.dx() * s.dy();
    let (mut m, mut mx, mut my, mut i0) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..s.ny {
        let y = -s.half_width + (j as f64 + 0.5) * s.dy();
        for i in 0..s.nx {
            let v = values[j * s.nx + i];
            let x = -s.half_width + (i as f64 + 0.5) * s.dx();
            m += v;
            mx += v * x;
            my += v * y;
            i0 += v * (x * x + y * y);
        }
    }
    let mass = m * area;
    let center = [mx * area / mass, my * area / mass];
    let second = i0 * area;
    let variance = (second / mass - center[0] * center[0] - center[1] * center[1]).max(0.0);
    (mass, second, center, variance)
}

fn take_sample(
    state: &SimState,
    kernel_hat: &[Cplx],
    prev: Option<&Sample>,
    resolved: bool,
) -> Sample {
    let s = &state.spectral;
    let (mass, second_moment, center, variance) = grid_moments(s, &state.values);
    let conv = s.convolve_with(kernel_hat, &state.values);
    let area = s.dx() * s.dy();
    let pair_integral: f64 = state
        .values
        .iter()
        .zip(&conv)
        .map(|(&n, &c)| n * c)
        .sum::<f64>()
        * area;
    let psi_mean = -pair_integral / (mass * mass);
    let max_density = state
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let vprime_fd = prev.and_then(|p| {
        let dt = state.t - p.t;
        if dt > 0.0 {
            Some((variance - p.variance) / dt)
        } else {
            None
        }
    });
    Sample {
        t: state.t,
        mass,
        second_moment,
        variance,
        center,
        vprime_fd,
        max_density,
        psi_mean,
        resolved,
    }
}

/// Advance an initial datum until `t_end`, the blow-up proxy, or step
/// collapse, sampling diagnostics on the way.
pub fn run(config: SimConfig, density: &Density) -> Result<SimTrace, SimError> {
    config.validate()?;
    density.validate()?;
    let grid = match density {
        Density::Grid(g)
            if g.nx == config.nx
                && g.ny == config.ny
                && (g.half_width - config.half_width).abs() < 1e-12 * config.half_width =>
        {
            g.clone()
        }
        other => {
            // mollify ball edges over ~1.5 cells so the spectral scheme
            // sees a continuous field
            let edge = 1.5 * 2.0 * config.half_width / config.nx as f64;
            other.sample_grid(config.half_width, config.nx, config.ny, edge)
        }
    };
    let boundary = grid.boundary_mass_fraction(moments::BOUNDARY_RING_CELLS);
    if boundary > moments::BOUNDARY_MASS_WARN {
        return Err(SimError::ExcessBoundaryMass { fraction: boundary });
    }
    let initial_moments = moments::compute_moments(&Density::Grid(grid.clone()))?;
    let mut state = SimState::new(config, grid.values)?;
    let kernel_hat = kernel_profile_hat(&state.spectral, config.alpha)?;

    let initial_max = state.values.iter().cloned().fold(0.0f64, f64::max);
    let proxy_level = config.blowup_density_factor * initial_max;
    let sample_dt = config.sample_dt.unwrap_or(config.t_end / 200.0);
    let quiet_clip = RESOLVED_CLIP_MASS_FRACTION * initial_moments.mass;

    let mut samples = vec![take_sample(&state, &kernel_hat, None, true)];
    let mut clipped_at_last_sample = 0.0;
    let mut next_sample = sample_dt;
    let mut dt = config.dt0;
    let mut steps = 0usize;
    macro_rules! sample_now {
        () => {{
            let resolved = state.clipped_mass - clipped_at_last_sample <= quiet_clip;
            clipped_at_last_sample = state.clipped_mass;
            let s = take_sample(&state, &kernel_hat, samples.last(), resolved);
            samples.push(s);
        }};
    }
    let (terminated_by, blowup_proxy_time) = loop {
        let step_dt = dt.min(config.t_end - state.t);
        match step(&mut state, step_dt) {
            Ok(()) => {
                steps += 1;
                // recover toward dt0 when the state allows it
                dt = (dt * 1.2).min(config.dt0);
            }
            Err(SimError::CflViolation { .. }) => {
                dt *= 0.5;
                if dt < config.dt_min {
                    break (Termination::DtCollapse, None);
                }
                continue;
            }
            Err(e) => return Err(e),
        }
        let max = state.values.iter().cloned().fold(0.0f64, f64::max);
        if max >= proxy_level {
            sample_now!();
            break (Termination::BlowupProxy, Some(state.t));
        }
        if state.t >= next_sample {
            sample_now!();
            next_sample += sample_dt;
        }
        if state.t >= config.t_end * (1.0 - 1e-12) {
            break (Termination::TEnd, None);
        }
    };
    // final sample unless one was just taken at this exact time
    if samples.last().map(|s| s.t) != Some(state.t) {
        sample_now!();
    }
    let _ = clipped_at_last_sample;
    Ok(SimTrace {
        samples,
        terminated_by,
        blowup_proxy_time,
        initial_moments,
        steps,
        undershoot_cells: state.undershoot_cells,
        final_dt: dt,
    })
}

/// Instantaneous second-moment derivative predicted by the interaction
/// identity: `I'(t) = 4M - (1/2pi) iint g_alpha(|x-y|) n(x) n(y)`.
pub fn interaction_integral(grid: &GridDensity, alpha: f64) -> Result<f64, SimError> {
    grid.validate()?;
    let s = Spectral2d::new(grid.nx, grid.ny, grid.half_width);
    let kernel_hat = kernel_profile_hat(&s, alpha)?;
    let conv = s.convolve_with(&kernel_hat, &grid.values);
    let area = s.dx() * s.dy();
    let pair_integral: f64 = grid
        .values
        .iter()
        .zip(&conv)
        .map(|(&n, &c)| n * c)
        .sum::<f64>()
        * area;
    let mass: f64 = grid.values.iter().sum::<f64>() * area;
    Ok(4.0 * mass - pair_integral / (2.0 * std::f64::consts::PI))
}

/// Outcome of checking a trace against the analytic envelopes. The
/// envelope and slope-cap statements are checked on resolved samples
/// below the sharp bound; the Jensen diagnostic is checked at every
/// sample (the clipped field stays within 1e-12 of nonnegative, far
/// inside the Jensen tolerance).
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    /// resolved samples with t below the sharp blow-up bound
    pub checked_samples: usize,
    /// samples skipped because the field had lost resolution
    pub unresolved_samples: usize,
    pub sharp_violations: usize,
    pub weak_violations: usize,
    pub jensen_violations: usize,
    pub vprime_cap_violations: usize,
    /// max of V(t) / Theta^{-1}(t) over checked samples
    pub max_sharp_ratio: f64,
    pub theta_zero: f64,
}

/// Tolerances of the envelope check: the sharp envelope is allowed a
/// relative slack, the affine envelope and the derivative cap an absolute
/// one, the Jensen inequality an absolute slack on the profile scale.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeTolerances {
    pub sharp_rel: f64,
    pub weak_abs: f64,
    pub vprime_abs: f64,
    pub jensen_abs: f64,
}

impl Default for EnvelopeTolerances {
    fn default() -> Self {
        EnvelopeTolerances {
            sharp_rel: 0.05,
            weak_abs: 0.05,
            vprime_abs: 1e-3,
            jensen_abs: 1e-8,
        }
    }
}

/// Check every sample of a trace against `V(t) <= Theta^{-1}(t)`, the
/// affine envelope, the slope cap `V' <= 4` and the Jensen inequality
/// behind the variance rate. `Theta` is tabulated on a fine grid with
/// per-cell Simpson quadrature (the check tolerances are far above the
/// tabulation error).
pub fn check_envelope(
    trace: &SimTrace,
    mass: f64,
    alpha: f64,
    v2: f64,
    tol: EnvelopeTolerances,
) -> Result<EnvelopeReport, SimError> {
    let rate = PksRate::new(mass, alpha)?.with_g_tol(1e-10);
    let threshold = criteria::gamma_star(alpha, mass).map_err(PksBoundsError::from)?;
    if v2 >= threshold {
        return Err(SimError::Bounds(PksBoundsError::CriterionUnsatisfied {
            v2,
            threshold,
        }));
    }
    // tabulate Theta by Simpson cells on a uniform grid over [0, v2]
    const CELLS: usize = 1024;
    let h = v2 / CELLS as f64;
    let mut inv_f = Vec::with_capacity(2 * CELLS + 1);
    for k in 0..=(2 * CELLS) {
        let x = 0.5 * h * k as f64;
        let f = rate.eval(x);
        if !(f < 0.0) {
            return Err(SimError::Bounds(PksBoundsError::CriterionUnsatisfied {
                v2,
                threshold,
            }));
        }
        inv_f.push(1.0 / -f);
    }
    // theta_grid[k] = Theta(k h), built by summing cells from the top
    let mut theta_grid = vec![0.0; CELLS + 1];
    for k in (0..CELLS).rev() {
        let cell = h / 6.0 * (inv_f[2 * k] + 4.0 * inv_f[2 * k + 1] + inv_f[2 * k + 2]);
        theta_grid[k] = theta_grid[k + 1] + cell;
    }
    let theta_zero = theta_grid[0];
    let theta_inv = |t: f64| -> f64 {
        // binary search the decreasing table
        let (mut lo, mut hi) = (0usize, CELLS);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if theta_grid[mid] >= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ta, tb) = (theta_grid[lo], theta_grid[hi]);
        let frac = if ta > tb { (ta - t) / (ta - tb) } else { 0.0 };
        h * (lo as f64 + frac)
    };

    let f_v0 = rate.eval(v2);
    let mut report = EnvelopeReport {
        checked_samples: 0,
        unresolved_samples: 0,
        sharp_violations: 0,
        weak_violations: 0,
        jensen_violations: 0,
        vprime_cap_violations: 0,
        max_sharp_ratio: 0.0,
        theta_zero,
    };
    for sample in &trace.samples {
        // Jensen holds at every sampled time, resolved or not
        let jensen_rhs = rate.psi(2.0 * sample.variance);
        if sample.psi_mean > jensen_rhs + tol.jensen_abs {
            report.jensen_violations += 1;
        }
        if !sample.resolved {
            report.unresolved_samples += 1;
            continue;
        }
        if let Some(vp) = sample.vprime_fd {
            if vp > 4.0 + tol.vprime_abs {
                report.vprime_cap_violations += 1;
            }
        }
        if sample.t >= theta_zero {
            continue;
        }
        report.checked_samples += 1;
        let bound = theta_inv(sample.t);
        if bound > 0.0 {
            report.max_sharp_ratio = report.max_sharp_ratio.max(sample.variance / bound);
        }
        if sample.variance > bound * (1.0 + tol.sharp_rel) {
            report.sharp_violations += 1;
        }
        if sample.variance > v2 + sample.t * f_v0 + tol.weak_abs {
            report.weak_violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Primitive;

    fn base_config() -> SimConfig {
        SimConfig {
            half_width: std::f64::consts::PI,
            nx: 64,
            ny: 64,
            alpha: 1.0,
            dt0: 1e-3,
            t_end: 0.1,
            cfl_safety: 0.3,
            blowup_density_factor: 1e3,
            dt_min: 1e-10,
            sample_dt: None,
        }
    }

    fn cosine_field(n: usize, half_width: f64, mean: f64, amp: f64, mode: f64) -> Vec<f64> {
        let dx = 2.0 * half_width / n as f64;
        let mut v = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let x = -half_width + (i as f64 + 0.5) * dx;
                v[j * n + i] = mean + amp * (mode * x).cos();
            }
        }
        v
    }

    #[test]
    fn concentration_of_constant_field() {
        let grid = GridDensity {
            half_width: 2.0,
            nx: 16,
            ny: 16,
            values: vec![3.0; 256],
        };
        let c = solve_concentration(&grid, 0.5).unwrap();
        for v in c {
            assert!((v - 6.0).abs() < 1e-12); // n / alpha
        }
        assert!(solve_concentration(&grid, 0.0).is_err());
    }

    #[test]
    fn concentration_of_single_mode() {
        let cfg = base_config();
        let values = cosine_field(cfg.nx, cfg.half_width, 1.0, 0.5, 2.0);
        let grid = GridDensity {
            half_width: cfg.half_width,
            nx: cfg.nx,
            ny: cfg.ny,
            values: values.clone(),
        };
        let c = solve_concentration(&grid, cfg.alpha).unwrap();
        // eigenfunction: mean/alpha + amp cos(2x) / (4 + alpha)
        for (idx, &n_val) in values.iter().enumerate() {
            let want = 1.0 / cfg.alpha + (n_val - 1.0) / (4.0 + cfg.alpha);
            assert!((c[idx] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_state_is_steady() {
        let cfg = base_config();
        let mut state = SimState::new(cfg, vec![2.5; cfg.nx * cfg.ny]).unwrap();
        for _ in 0..10 {
            step(&mut state, 5e-4).unwrap();
        }
        for &v in &state.values {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cfl_violation_rejected_without_state_change() {
        let cfg = base_config();
        let values = cosine_field(cfg.nx, cfg.half_width, 1.0, 0.3, 1.0);
        let mut state = SimState::new(cfg, values.clone()).unwrap();
        let err = step(&mut state, 10.0).unwrap_err();
        assert!(matches!(err, SimError::CflViolation { .. }));
        assert_eq!(state.values, values);
        assert_eq!(state.t, 0.0);
        let dt = state.max_stable_dt();
        step(&mut state, dt).unwrap();
        assert_eq!(state.t, dt);
    }

    #[test]
    fn pure_diffusion_mode_decay() {
        // alpha huge makes the nonlinear term negligible; a cosine mode
        // must decay like exp(-k^2 t)
        let mut cfg = base_config();
        cfg.alpha = 1e8;
        let k = 2.0;
        let values = cosine_field(cfg.nx, cfg.half_width, 1.0, 0.1, k);
        let mut state = SimState::new(cfg, values).unwrap();
        let dt = 5e-4;
        for _ in 0..200 {
            step(&mut state, dt).unwrap();
        }
        let decay = (-k * k * state.t).exp();
        let analytic = cosine_field(cfg.nx, cfg.half_width, 1.0, 0.1 * decay, k);
        for (got, want) in state.values.iter().zip(&analytic) {
            assert!((got - want).abs() < 1e-4 * 0.1, "got {got}, want {want}");
        }
    }

    #[test]
    fn mass_conserved_over_many_steps() {
        // resolved smooth field: the flux form conserves to round-off and
        // the undershoot clipper never fires
        let cfg = SimConfig {
            nx: 32,
            ny: 32,
            t_end: 1.0,
            ..base_config()
        };
        let gaussian = Density::Analytic(vec![Primitive::Gaussian {
            center: [0.3, -0.2],
            std: 0.6,
            mass: 2.0,
        }]);
        let grid = gaussian.sample_grid(cfg.half_width, cfg.nx, cfg.ny, 0.0);
        let area = grid.dx() * grid.dy();
        let mass0: f64 = grid.values.iter().sum::<f64>() * area;
        let mut state = SimState::new(cfg, grid.values).unwrap();
        let dt = 0.5 * state.max_stable_dt();
        for _ in 0..1000 {
            step(&mut state, dt).unwrap();
        }
        let mass: f64 = state.values.iter().sum::<f64>() * area;
        assert!(
            (mass / mass0 - 1.0).abs() < 1e-12,
            "mass drift {} after 1000 steps",
            mass / mass0 - 1.0
        );
        assert_eq!(state.undershoot_cells, 0);
    }

    #[test]
    fn interaction_integral_delta_limit() {
        // a single hot cell: the pair integral collapses to M^2 g(0) = M^2
        let n = 32;
        let mut values = vec![0.0; n * n];
        values[n * 16 + 16] = 7.0;
        let grid = GridDensity {
            half_width: 3.0,
            nx: n,
            ny: n,
            values,
        };
        let mass = 7.0 * grid.dx() * grid.dy();
        let got = interaction_integral(&grid, 2.0).unwrap();
        let want = 4.0 * mass - mass * mass / (2.0 * std::f64::consts::PI);
        assert!(
            (got - want).abs() < 1e-10 * want.abs().max(1.0),
            "got {got}, want {want}"
        );
    }

    #[test]
    fn interaction_integral_matches_direct_sum() {
        // two separated blobs on a coarse grid vs the O(N^2) reference
        let n = 32;
        let half_width = 4.0;
        let alpha = 1.5;
        let d = Density::Analytic(vec![
            Primitive::Gaussian {
                center: [-1.5, 0.0],
                std: 0.4,
                mass: 2.0,
            },
            Primitive::Gaussian {
                center: [1.5, 0.5],
                std: 0.3,
                mass: 1.0,
            },
        ]);
        let grid = d.sample_grid(half_width, n, n, 0.0);
        let got = interaction_integral(&grid, alpha).unwrap();

        // direct double sum with minimum-image displacements
        let dx = grid.dx();
        let dy = grid.dy();
        let mut memo: HashMap<u64, f64> = HashMap::new();
        let mut pair = 0.0;
        for j1 in 0..n {
            for i1 in 0..n {
                let a = grid.values[j1 * n + i1];
                if a == 0.0 {
                    continue;
                }
                for j2 in 0..n {
                    for i2 in 0..n {
                        let b = grid.values[j2 * n + i2];
                        if b == 0.0 {
                            continue;
                        }
                        let mut di = (i1 as isize - i2 as isize).rem_euclid(n as isize);
                        if di > n as isize / 2 {
                            di -= n as isize;
                        }
                        let mut dj = (j1 as isize - j2 as isize).rem_euclid(n as isize);
                        if dj > n as isize / 2 {
                            dj -= n as isize;
                        }
                        let r = (di as f64 * dx).hypot(dj as f64 * dy);
                        let g = *memo
                            .entry(r.to_bits())
                            .or_insert_with(|| specialfn::g_alpha(alpha, r, 1e-10).unwrap());
                        pair += a * b * g;
                    }
                }
            }
        }
        pair *= dx * dy * dx * dy;
        let mass: f64 = grid.values.iter().sum::<f64>() * dx * dy;
        let want = 4.0 * mass - pair / (2.0 * std::f64::consts::PI);
        assert!(
            (got - want).abs() < 1e-9 * want.abs().max(1.0),
            "fft {got} vs direct {want}"
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = base_config();
        cfg.nx = 48;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.cfl_safety = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = base_config();
        cfg.dt_min = 1.0;
        assert!(cfg.validate().is_err());
        let text = r#"{"L": 5.0, "nx": 64, "ny": 64, "alpha": 1.0, "dt0": 1e-3,
                       "t_end": 0.4, "cfl_safety": 0.3, "blowup_density_factor": 1e3,
                       "dt_min": 1e-9}"#;
        let cfg = SimConfig::from_json(text).unwrap();
        assert_eq!(cfg.nx, 64);
        assert!(cfg.sample_dt.is_none());
        cfg.validate().unwrap();
    }

    #[test]
    fn run_rejects_boundary_mass() {
        let cfg = SimConfig {
            nx: 32,
            ny: 32,
            ..base_config()
        };
        let d = Density::Analytic(vec![Primitive::Ball {
            center: [3.0, 0.0],
            radius: 0.5,
            amplitude: 1.0,
        }]);
        assert!(matches!(
            run(cfg, &d),
            Err(SimError::ExcessBoundaryMass { .. })
        ));
    }
}
