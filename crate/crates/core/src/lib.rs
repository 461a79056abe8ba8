//! Radial numerics for the coupled cubic Schrodinger system
//!
//! ```text
//! i u_t + Δu - u + (|u|²/9 + 2|w|²) u + ū² w / 3 = 0
//! iσ w_t + Δw - μ w + (9|w|² + 2|u|²) w + u³ / 9 = 0
//! ```
//!
//! posed on ℝ⁴ for radially symmetric data. The crate computes ground states of
//! the stationary system, evaluates the conserved and variational functionals,
//! integrates the time-dependent problem and classifies initial data against
//! the ground-state thresholds.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command line
//! live in the `critnls` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod criteria;
pub mod cutoff;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod quadrature;
pub mod tridiag;

pub use num_complex::Complex64;

pub use criteria::{Classification, Thresholds, Verdict};
pub use cutoff::CutoffProfile;
pub use evolution::{DiagnosticsRecord, EvolveConfig, RunStatus, SimState};
pub use functionals::{ComplexFieldPair, FunctionalReport, PhysicsParams, RealFieldPair};
pub use grid::{RadialField, RadialGrid, RealRadialField};
pub use ground_state::{GroundStateConfig, GroundStateResult};

/// π²
pub(crate) const PI2: f64 = core::f64::consts::PI * core::f64::consts::PI;

/// Surface area of the unit sphere S³.
pub const SPHERE_AREA: f64 = 2.0 * PI2;
