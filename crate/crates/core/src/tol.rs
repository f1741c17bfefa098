//! Shared numerical tolerances.
//!
//! Every rank decision in the crate goes through [`RANK_REL_TOL`], so changing
//! it here changes isotropy, kernel and frame computations consistently.

/// Singular values at or below `RANK_REL_TOL * max(largest, 1)` count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Maximum entry of `X + X^T` accepted for a generator.
pub const SKEW_TOL: f64 = 1e-12;

/// Residual of a bracket projected out of the span of the generators.
pub const BRACKET_TOL: f64 = 1e-10;

/// Hessian eigenvalues with `|λ| <= KERNEL_REL_TOL * max|λ|` span the kernel.
pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Relative tolerance used by the criticality predicate.
pub const CRIT_REL_TOL: f64 = 1e-9;

/// Kernel threshold for finite-difference Hessians of chart phases.
pub const FD_KERNEL_REL_TOL: f64 = 1e-6;

/// Default bound on the blow-up parameters.
pub const TAU_MAX: f64 = 0.9;

/// Threshold used when deciding whether a chart point meets a condition.
pub const CONDITION_TOL: f64 = 1e-9;
