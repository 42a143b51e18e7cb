//! Initial data for the cell density and its low-order moments: mass,
//! second moment, center of mass and variance.
//!
//! A density is either a uniform grid of nonnegative cell-center samples on
//! a square box or a sum of analytic primitives (uniform balls, isotropic
//! Gaussians) with closed-form moments. The JSON file layout is
//! `{"grid": {"L":…, "nx":…, "ny":…, "values":[row-major]}}` or
//! `{"analytic": [{"type":"ball"|"gaussian", …}]}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentsError {
    #[error("density has zero total mass")]
    ZeroMass,
    #[error("grid dimensions do not match values: {nx} x {ny} grid with {len} samples")]
    GridShape { nx: usize, ny: usize, len: usize },
    #[error("grid half-width must be positive and finite, got {0}")]
    InvalidHalfWidth(f64),
    #[error("grid dimensions must be positive, got {0} x {1}")]
    EmptyGrid(usize, usize),
    #[error("density sample at index {0} is negative or non-finite: {1}")]
    BadSample(usize, f64),
    #[error("analytic primitive {0} has a non-positive or non-finite parameter")]
    BadPrimitive(usize),
    #[error("analytic density must contain at least one primitive")]
    NoPrimitives,
    #[error("scale factor must be positive and finite, got {0}")]
    BadScale(f64),
}

/// Analytic density building block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Primitive {
    /// `amplitude` on the disk of the given radius, 0 outside.
    Ball {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
    /// Isotropic Gaussian carrying total mass `mass` with standard
    /// deviation `std` per axis.
    Gaussian {
        center: [f64; 2],
        std: f64,
        mass: f64,
    },
}

impl Primitive {
    /// (mass, center, central second moment per unit mass)
    fn moment_data(&self) -> (f64, [f64; 2], f64) {
        match *self {
            // int_ball |x - c|^2 = pi R^4 / 2, so the central second moment
            // per unit mass is R^2/2
            Primitive::Ball {
                center,
                radius,
                amplitude,
            } => {
                let mass = amplitude * std::f64::consts::PI * radius * radius;
                (mass, center, 0.5 * radius * radius)
            }
            Primitive::Gaussian { center, std, mass } => (mass, center, 2.0 * std * std),
        }
    }

    fn validate(&self, idx: usize) -> Result<(), MomentsError> {
        let ok = match *self {
            Primitive::Ball {
                center,
                radius,
                amplitude,
            } => {
                center.iter().all(|c| c.is_finite())
                    && radius > 0.0
                    && radius.is_finite()
                    && amplitude > 0.0
                    && amplitude.is_finite()
            }
            Primitive::Gaussian { center, std, mass } => {
                center.iter().all(|c| c.is_finite())
                    && std > 0.0
                    && std.is_finite()
                    && mass > 0.0
                    && mass.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(MomentsError::BadPrimitive(idx))
        }
    }

    /// Pointwise evaluation (hard ball edge).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Primitive::Ball {
                center,
                radius,
                amplitude,
            } => {
                let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                if d2 <= radius * radius {
                    amplitude
                } else {
                    0.0
                }
            }
            Primitive::Gaussian { center, std, mass } => {
                let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                mass / (2.0 * std::f64::consts::PI * std * std) * (-0.5 * d2 / (std * std)).exp()
            }
        }
    }
}

/// Cell-center samples on the square `[-L, L]^2`, row-major with x fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / self.ny as f64
    }

    /// x coordinate of the cell center in column i.
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.dy()
    }

    pub fn validate(&self) -> Result<(), MomentsError> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(MomentsError::InvalidHalfWidth(self.half_width));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(MomentsError::EmptyGrid(self.nx, self.ny));
        }
        if self.values.len() != self.nx * self.ny {
            return Err(MomentsError::GridShape {
                nx: self.nx,
                ny: self.ny,
                len: self.values.len(),
            });
        }
        for (i, &v) in self.values.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(MomentsError::BadSample(i, v));
            }
        }
        Ok(())
    }

    /// Fraction of the total mass within `ring` cells of the boundary.
    pub fn boundary_mass_fraction(&self, ring: usize) -> f64 {
        let mut total = 0.0;
        let mut boundary = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = self.values[j * self.nx + i];
                total += v;
                let near = i < ring || j < ring || i >= self.nx - ring || j >= self.ny - ring;
                if near {
                    boundary += v;
                }
            }
        }
        if total > 0.0 {
            boundary / total
        } else {
            0.0
        }
    }
}

/// Boundary-mass fraction above which grid moments are suspect.
pub const BOUNDARY_MASS_WARN: f64 = 1e-8;
/// Width of the boundary ring inspected by the warning check, in cells.
pub const BOUNDARY_RING_CELLS: usize = 3;

/// An initial datum: gridded samples or a sum of analytic primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    Grid(GridDensity),
    Analytic(Vec<Primitive>),
}

/// Mass, second moment about the origin, center of mass and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub second_moment: f64,
    pub center: [f64; 2],
    pub variance: f64,
}

impl Density {
    pub fn validate(&self) -> Result<(), MomentsError> {
        match self {
            Density::Grid(g) => g.validate(),
            Density::Analytic(prims) => {
                if prims.is_empty() {
                    return Err(MomentsError::NoPrimitives);
                }
                for (i, p) in prims.iter().enumerate() {
                    p.validate(i)?;
                }
                Ok(())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Density, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("density serialization cannot fail")
    }

    /// Sample onto a cell-center grid. Ball edges are mollified over
    /// `edge_width` (linear ramp) so spectral methods see a continuous
    /// field; pass 0.0 for the raw indicator.
    pub fn sample_grid(
        &self,
        half_width: f64,
        nx: usize,
        ny: usize,
        edge_width: f64,
    ) -> GridDensity {
        let mut grid = GridDensity {
            half_width,
            nx,
            ny,
            values: vec![0.0; nx * ny],
        };
        for j in 0..ny {
            let y = grid.y(j);
            for i in 0..nx {
                let x = grid.x(i);
                let v = match self {
                    Density::Grid(g) => {
                        // nearest-cell transfer when resampling an existing grid
                        let ii = (((x + g.half_width) / g.dx() - 0.5).round() as isize)
                            .clamp(0, g.nx as isize - 1) as usize;
                        let jj = (((y + g.half_width) / g.dy() - 0.5).round() as isize)
                            .clamp(0, g.ny as isize - 1) as usize;
                        g.values[jj * g.nx + ii]
                    }
                    Density::Analytic(prims) => prims
                        .iter()
                        .map(|p| match *p {
                            Primitive::Ball {
                                center,
                                radius,
                                amplitude,
                            } if edge_width > 0.0 => {
                                let d = ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt();
                                amplitude * ((radius - d) / edge_width + 0.5).clamp(0.0, 1.0)
                            }
                            _ => p.eval(x, y),
                        })
                        .sum(),
                };
                grid.values[j * nx + i] = v;
            }
        }
        grid
    }
}

/// Mass, second moment, center of mass and variance of a density.
/// Analytic primitives use closed forms, grids midpoint sums with
/// compensated accumulation (deterministic, order-independent of threading
/// because there is none).
pub fn compute_moments(density: &Density) -> Result<Moments, MomentsError> {
    density.validate()?;
    match density {
        Density::Analytic(prims) => {
            let mut mass = 0.0;
            let mut first = [0.0, 0.0];
            let mut second = 0.0;
            for p in prims {
                let (m, c, v_per_mass) = p.moment_data();
                mass += m;
                first[0] += m * c[0];
                first[1] += m * c[1];
                // second moment about origin: m (v + |c|^2)
                second += m * (v_per_mass + c[0] * c[0] + c[1] * c[1]);
            }
            if mass <= 0.0 {
                return Err(MomentsError::ZeroMass);
            }
            let center = [first[0] / mass, first[1] / mass];
            let variance = (second / mass - center[0] * center[0] - center[1] * center[1]).max(0.0);
            Ok(Moments {
                mass,
                second_moment: second,
                center,
                variance,
            })
        }
        Density::Grid(g) => {
            let area = g.dx() * g.dy();
            let mut mass = Kahan::default();
            let mut mx = Kahan::default();
            let mut my = Kahan::default();
            let mut second = Kahan::default();
            for j in 0..g.ny {
                let y = g.y(j);
                for i in 0..g.nx {
                    let v = g.values[j * g.nx + i];
                    if v == 0.0 {
                        continue;
                    }
                    let x = g.x(i);
                    mass.add(v);
                    mx.add(v * x);
                    my.add(v * y);
                    second.add(v * (x * x + y * y));
                }
            }
            let mass = mass.sum() * area;
            if mass <= 0.0 {
                return Err(MomentsError::ZeroMass);
            }
            let second = second.sum() * area;
            let center = [mx.sum() * area / mass, my.sum() * area / mass];
            let variance = (second / mass - center[0] * center[0] - center[1] * center[1]).max(0.0);
            Ok(Moments {
                mass,
                second_moment: second,
                center,
                variance,
            })
        }
    }
}

/// Pointwise scaling `lambda * n0`: mass scales, center and variance do not.
pub fn scale(density: &Density, lambda: f64) -> Result<Density, MomentsError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(MomentsError::BadScale(lambda));
    }
    Ok(match density {
        Density::Grid(g) => {
            let mut scaled = g.clone();
            for v in &mut scaled.values {
                *v *= lambda;
            }
            Density::Grid(scaled)
        }
        Density::Analytic(prims) => Density::Analytic(
            prims
                .iter()
                .map(|p| match *p {
                    Primitive::Ball {
                        center,
                        radius,
                        amplitude,
                    } => Primitive::Ball {
                        center,
                        radius,
                        amplitude: lambda * amplitude,
                    },
                    Primitive::Gaussian { center, std, mass } => Primitive::Gaussian {
                        center,
                        std,
                        mass: lambda * mass,
                    },
                })
                .collect(),
        ),
    })
}

/// Neumaier-compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
