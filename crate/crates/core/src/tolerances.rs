//! Central table of numerical tolerances.
//!
//! Every threshold shared between the library and its tests lives here so
//! the two cannot drift apart.

/// Maximum Hermitian asymmetry `‖A − Aᴴ‖_F / (1 + ‖A‖_F)` accepted by the
/// eigensolver.
pub const HERMITIAN_INPUT: f64 = 1e-10;

/// Jacobi sweep convergence: off-diagonal Frobenius mass relative to the
/// matrix scale.
pub const EIG_OFF_DIAGONAL: f64 = 1e-12;

/// `‖UᴴΛU − A‖_F` after eigendecomposition.
pub const EIG_RECONSTRUCTION: f64 = 1e-9;

/// Eigenvalues of Hermitian positive semi-definite inputs may undershoot
/// zero by at most this much.
pub const EIG_PSD_FLOOR: f64 = -1e-12;

/// Eigenvalue sum versus trace.
pub const TRACE_SUM: f64 = 1e-9;

/// Accuracy of the complementary error function implementation.
pub const ERFC_ACCURACY: f64 = 1e-12;

/// Alamouti column-orthogonality: `‖CᴴC − (|s₁|²+|s₂|²)I‖_F`.
pub const CODE_ORTHOGONALITY: f64 = 1e-12;

/// Norm of the adjustable code vector after normalization, relative to the
/// configured power budget.
pub const CODE_NORM: f64 = 1e-12;

/// No-noise AF relay composition versus the equivalent-model signal.
pub const AF_COMPOSITION: f64 = 1e-12;

/// Noise variances at or below this are treated as the noiseless limit.
pub const NOISE_FLOOR: f64 = 1e-12;
