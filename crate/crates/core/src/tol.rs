//! Numerical tolerances shared across modules.

/// Absolute tolerance on total mass and probability-vector sums.
pub const TOL_NORM: f64 = 1e-9;

/// Absolute tolerance on marginal residuals of transport-polytope members.
pub const TOL_FEAS: f64 = 1e-8;

/// Marginal residual targeted by the minimum-concentration solver.
pub const TOL_KKT: f64 = 1e-10;

/// Agreement required between algebraically equivalent forms of the dependence index.
pub const TOL_FORMS: f64 = 1e-10;

/// Off-diagonal threshold for the Jacobi SVD sweeps.
pub const TOL_JACOBI: f64 = 1e-12;

/// Slack allowed on the top singular value of the whitened matrix.
pub const TOL_SIGMA1: f64 = 1e-9;

/// Tolerance on capitalization-centering of return vectors.
pub const TOL_CENTER: f64 = 1e-10;
