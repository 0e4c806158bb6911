//! Numerical tolerances shared across the crate.
//!
//! Every threshold that decides a branch (clamping, rank, separability) lives
//! here so that the tests and the library agree on the same numbers.

/// Maximum entrywise deviation `|m - m^dagger|` accepted as Hermitian.
pub const HERMITIAN: f64 = 1e-10;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are rounding noise and are set to zero.
pub const PSD_CLAMP: f64 = 1e-10;

/// Norm deviation accepted for a normalized state or a unit-trace matrix.
pub const NORM: f64 = 1e-10;

/// Inputs with norm below this are rejected as the zero vector.
pub const ZERO_NORM: f64 = 1e-12;

/// Singular values of a bipartite coefficient matrix below this count as zero.
pub const SEPARABILITY: f64 = 1e-10;

/// Density-matrix eigenvalues at or below this are outside the numerical
/// support. Eigensolver noise on an exact zero is ~1e-16 for trace-one input.
pub const RANK: f64 = 1e-13;

/// Spin-flip singular values below this are zeroed. The Hermitian route sees
/// `sigma^2` with ~1e-17 absolute noise, i.e. `sigma` noise up to ~3e-9.
pub const SIGMA_FLOOR: f64 = 1e-7;

/// POVM branches with probability below this are dropped.
pub const BRANCH_PROBABILITY: f64 = 1e-14;

/// POVM completeness `a1^dagger a1 + a2^dagger a2 = I`.
pub const COMPLETENESS: f64 = 1e-10;

/// Agreement between the two spin-flip spectrum routes.
pub const ROUTE_AGREEMENT: f64 = 1e-8;

/// Default slack allowed when checking monotonicity.
pub const MONOTONICITY: f64 = 1e-9;
