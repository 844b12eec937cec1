//! Numerical tolerances shared across the crate.
//!
//! Dimensions stay at or below a few dozen, so fixed absolute/relative
//! thresholds scaled by the matrix magnitude are sufficient.

/// Hermiticity check: `max |A_ij - conj(A_ji)| <= HERMITIAN_TOL * (1 + max |A|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Reconstruction / orthonormality target of the eigensolver.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Convergence threshold handed to the iterative eigensolver.
pub const SOLVER_EPS: f64 = 1e-15;

/// Iteration cap for the eigensolver (0 means unlimited in nalgebra).
pub const SOLVER_MAX_ITER: usize = 10_000;

/// Default absolute gap below which two levels count as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

/// Default absolute drive coupling below which a degenerate pair is ignored.
pub const DEFAULT_COUPLING_TOL: f64 = 1e-9;

/// Default merge tolerance for work values, relative to the generator's
/// spectral range.
pub const DEFAULT_MERGE_REL: f64 = 1e-9;

/// Outcomes with probability below this are dropped from a work distribution.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

/// Normalization target for work distributions.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Bound on `dt * max ||H||` accepted by the propagator.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

/// Smallest |dh/dt| treated as a detectable crossover.
pub const FLAT_TRACE_TOL: f64 = 1e-12;

/// Relative tolerance of the mean-work guard in the sweep experiments.
pub const MEAN_WORK_TOL: f64 = 1e-8;
