//! Numerical thresholds shared across modules, all sized for double precision.

/// |sum(a) - 1| and |sum(b) - 1| must stay below this for a consistent scheme.
pub const CONSISTENCY: f64 = 1e-12;

/// Component-wise tolerance for palindromic coefficient lists.
pub const SYMMETRY: f64 = 1e-14;

/// Leading-error coefficients below this count as vanishing.
pub const ORDER4_RESIDUAL: f64 = 1e-8;

/// Hermiticity tolerance for operator parts.
pub const HERMITIAN: f64 = 1e-13;

/// Errors below this are treated as the round-off plateau in order fits.
pub const ROUNDOFF_PLATEAU: f64 = 1e-12;

/// Largest relative projection residual accepted in error-coefficient estimation.
pub const PROJECTION_RESIDUAL: f64 = 0.1;

/// Allowed deviation of a fitted slope from the claimed order when a catalog is loaded.
pub const CATALOG_SLOPE: f64 = 0.3;

/// Largest Hilbert-space dimension handled with dense matrices.
pub const MAX_DENSE_DIM: usize = 4096;

/// Aberth-Ehrlich sweep budget.
pub const ROOT_SWEEPS: usize = 200;

/// Root residual |p(z)| / |p'(z)| per unit degree, in extended precision.
pub const ROOT_RESIDUAL_PER_DEGREE: f64 = 1e-25;
