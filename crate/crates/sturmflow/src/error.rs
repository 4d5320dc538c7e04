use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum SturmError {
    #[error("matrix is not Hermitian: max asymmetry {residual:.3e} exceeds tolerance {tol:.3e}")]
    SymmetryViolation { residual: f64, tol: f64 },

    #[error("basis is numerically dependent (Gram determinant {det:.3e} below tolerance)")]
    DegenerateBasis { det: f64 },

    #[error("problem validation failed: {0}")]
    Validation(String),

    #[error("{0}")]
    Domain(String),

    #[error("rank-deficient frame (sigma_min {sigma:.3e})")]
    FrameRank { sigma: f64 },

    #[error("chart domain error: subspace not transverse to P1 (sigma_min {sigma:.3e})")]
    ChartDomain { sigma: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("path endpoints meet the singular variety S(P0); EM-index undefined")]
    Admissibility,

    #[error("non-regular crossing at lambda = {lambda}: crossing form has a numerically zero eigenvalue; delta-regularization required")]
    NonRegularCrossing { lambda: f64 },

    #[error("kernel is empty at lambda = {lambda}: not a conjugate instant")]
    EmptyKernel { lambda: f64 },

    #[error("endpoint degeneracy: the form is degenerate at lambda = 1; delta-regularization required")]
    EndpointDegenerate,

    #[error("epsilon guard failure: could not certify a conjugate-point-free interval near 0 after {halvings} halvings")]
    GuardFailure { halvings: u32 },

    #[error("delta-regularization failed after {attempts} draws")]
    RegularizationFailure { attempts: u32 },

    #[error("ODE step size underflow at x = {x}: problem appears stiff at the requested tolerance")]
    Stiffness { x: f64 },

    #[error("Galerkin indices did not stabilize by N = {max_n}")]
    Convergence { max_n: usize },

    #[error("crossing-form inconsistency at lambda = {lambda}: analytic and numeric forms disagree ({detail})")]
    Inconsistency { lambda: f64, detail: String },

    #[error("isotropy residual {residual:.3e} above tolerance at lambda = {lambda}: solution-frame assembly failed")]
    IsotropyResidual { lambda: f64, residual: f64 },
}

pub type Result<T> = std::result::Result<T, SturmError>;
