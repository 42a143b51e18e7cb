//! Minimal 2D FFT toolbox on a periodic square box: forward/inverse
//! transforms, Helmholtz inversion, spectral gradient and Laplacian.
//!
//! Fields are row-major `ny x nx` with x the fast axis on `[-L, L)^2`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub type Cplx = Complex<f64>;

pub struct Spectral2d {
    pub nx: usize,
    pub ny: usize,
    pub half_width: f64,
    /// angular wavenumbers along x (FFT ordering)
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / length;
    (0..n)
        .map(|i| {
            let m = if i <= n / 2 {
                i as isize
            } else {
                i as isize - n as isize
            };
            base * m as f64
        })
        .collect()
}

impl Spectral2d {
    pub fn new(nx: usize, ny: usize, half_width: f64) -> Spectral2d {
        let mut planner = FftPlanner::new();
        let length = 2.0 * half_width;
        Spectral2d {
            nx,
            ny,
            half_width,
            kx: wavenumbers(nx, length),
            ky: wavenumbers(ny, length),
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    #[allow(clippy::len_without_is_empty)] // a grid is never empty
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / self.ny as f64
    }

    fn fft_rows(&self, data: &mut [Cplx], forward: bool) {
        let fft = if forward { &self.fwd_x } else { &self.inv_x };
        for row in data.chunks_exact_mut(self.nx) {
            fft.process(row);
        }
    }

    fn fft_cols(&self, data: &mut [Cplx], forward: bool) {
        let fft = if forward { &self.fwd_y } else { &self.inv_y };
        let mut col = vec![Cplx::default(); self.ny];
        for i in 0..self.nx {
            for j in 0..self.ny {
                col[j] = data[j * self.nx + i];
            }
            fft.process(&mut col);
            for j in 0..self.ny {
                data[j * self.nx + i] = col[j];
            }
        }
    }

    /// Unnormalized forward transform of a real field.
    pub fn forward(&self, real: &[f64]) -> Vec<Cplx> {
        debug_assert_eq!(real.len(), self.len());
        let mut data: Vec<Cplx> = real.iter().map(|&v| Cplx::new(v, 0.0)).collect();
        self.fft_rows(&mut data, true);
        self.fft_cols(&mut data, true);
        data
    }

    /// Inverse transform, normalized, real part.
    pub fn inverse(&self, spec: &[Cplx]) -> Vec<f64> {
        debug_assert_eq!(spec.len(), self.len());
        let mut data = spec.to_vec();
        self.fft_rows(&mut data, false);
        self.fft_cols(&mut data, false);
        let scale = 1.0 / self.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    /// Multiply by the resolvent symbol `1 / (|k|^2 + alpha)` in place.
    pub fn helmholtz_multiplier(&self, spec: &mut [Cplx], alpha: f64) {
        for j in 0..self.ny {
            let ky2 = self.ky[j] * self.ky[j];
            for i in 0..self.nx {
                let k2 = self.kx[i] * self.kx[i] + ky2;
                spec[j * self.nx + i] /= k2 + alpha;
            }
        }
    }

    /// Real-space gradient from the spectrum; the Nyquist mode of the
    /// differentiated axis is zeroed (odd derivative of a real field).
    pub fn gradient(&self, spec: &[Cplx]) -> (Vec<f64>, Vec<f64>) {
        let mut gx = spec.to_vec();
        let mut gy = spec.to_vec();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let idx = j * self.nx + i;
                let mx = if i == self.nx / 2 { 0.0 } else { self.kx[i] };
                let my = if j == self.ny / 2 { 0.0 } else { self.ky[j] };
                gx[idx] *= Cplx::new(0.0, mx);
                gy[idx] *= Cplx::new(0.0, my);
            }
        }
        (self.inverse(&gx), self.inverse(&gy))
    }

    /// Real-space Laplacian from the spectrum.
    pub fn laplacian(&self, spec: &[Cplx]) -> Vec<f64> {
        let mut lap = spec.to_vec();
        for j in 0..self.ny {
            let ky2 = self.ky[j] * self.ky[j];
            for i in 0..self.nx {
                let k2 = self.kx[i] * self.kx[i] + ky2;
                lap[j * self.nx + i] *= -k2;
            }
        }
        self.inverse(&lap)
    }

    /// Circular convolution `(kernel * field) dA`, the midpoint-rule
    /// approximation of the continuous convolution on the torus. The
    /// kernel is passed already transformed.
    pub fn convolve_with(&self, kernel_hat: &[Cplx], field: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(field);
        for (s, k) in spec.iter_mut().zip(kernel_hat) {
            *s *= k;
        }
        let area = self.dx() * self.dy();
        self.inverse(&spec).into_iter().map(|v| v * area).collect()
    }
}
