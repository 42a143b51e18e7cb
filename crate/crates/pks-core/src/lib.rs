//! Blow-up criteria, maximal-existence-time bounds and a desk-scale
//! spectral simulator for the two-dimensional Patlak-Keller-Segel system
//! with a consumption term `alpha > 0`.
//!
//! The crate is organized around the radial profile `g_alpha` of the Bessel
//! kernel gradient ([`specialfn`]), a generic engine for the differential
//! inequality `V' <= f(V)` with increasing `f` ([`ode_bound`]), its
//! instantiation for the Keller-Segel variance rate ([`pks_bounds`]),
//! variance blow-up criteria ([`criteria`]), moment bookkeeping for initial
//! data ([`moments`]) and a periodic-box spectral solver with envelope
//! diagnostics ([`simulator`]).

// Validation guards are written as negations (`!(x > 0.0)`) so NaN inputs
// fail them; the suggested direct comparisons would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod criteria;
pub mod moments;
pub mod ode_bound;
pub mod pks_bounds;
pub mod quad;
pub mod roots;
pub mod simulator;
pub mod specialfn;

pub use criteria::EIGHT_PI;
pub use moments::{compute_moments, scale, Density, GridDensity, Moments, Primitive};
pub use specialfn::{dilog, g_alpha, g_one, g_one_inv, GEval, InverseBounds};
