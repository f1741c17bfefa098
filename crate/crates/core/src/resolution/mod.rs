//! Blow-up charts along isotropy branches of depth one and two, the weak
//! transform of the phase, and numerical certificates for its critical set.

mod alpha;
mod certify;
mod chart;
mod tree;

pub use alpha::{alpha_chart_decay, check_alpha_chart_nonstationary, AlphaChartPoint, AlphaDecay, AlphaDecayConfig};
pub use certify::{
    certify_branch, check_factorization, check_jacobian_exponent, check_kappa_decomposition, check_sigma_exponents, predicted_sigma_exponents,
    check_theorem1_conditions, check_transversal_nondegeneracy, critical_witness, perturbed_witnesses, Certificate,
    CertifyOptions, ConditionRecord, KernelReport, ALPHA_DECAY_MARGIN, BORDERED_TOL, EXPONENT_TOL, FACTORIZATION_TOL,
};
pub use chart::{
    chart_to_ambient, chart_to_ambient_tau, delta_jacobian_det, delta_substitution, weak_transform, weak_transform_tau,
    ChartLayout, ResolutionChartPoint,
};
pub use tree::{build_isotropy_tree, BranchLevel, IsotropyBranch, LevelData};

#[derive(Debug, thiserror::Error)]
pub enum ResolutionError {
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("unsupported depth: a branch needs at least {depth} levels, only 1 and 2 are built")]
    UnsupportedDepth { depth: usize },
    #[error("unsupported stratum: {0}")]
    UnsupportedStratum(String),
    #[error("factorization residual {residual:.3e} exceeds {bound:.3e} at {point:?}")]
    Factorization { residual: f64, bound: f64, point: Vec<f64> },
    #[error("point is not critical: gradient norm {grad_norm:.3e}")]
    NotCritical { grad_norm: f64 },
    #[error("Hessian kernel dimension {found}, expected {expected}")]
    KernelMismatch { found: usize, expected: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
}
