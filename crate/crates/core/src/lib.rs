//! Concentration, dependence and transmission diagnostics for investor ×
//! stock ownership matrices.
//!
//! The crate separates three layers of concentration:
//!
//! * marginal concentration of investors (`H_I`) and stocks (`H_S`);
//! * raw cell concentration `M(A) = ‖A‖_F²`, benchmarked against the range
//!   it can take for fixed marginals ([`transport`]);
//! * benchmark-adjusted dependence `𝒳(A)`, the χ² distance from the
//!   proportional matrix `p sᵀ` ([`dependence`]), with its spectral form
//!   ([`spectral`]) and transmission consequences ([`dynamics`]).
//!
//! ```
//! use ownconc_core::{dependence_index, summary, OwnershipMatrix};
//!
//! let a = OwnershipMatrix::from_rows(&[[30.0, 10.0], [5.0, 25.0], [15.0, 15.0]])?;
//! let s = summary(&a);
//! assert!((s.h_i - 0.34).abs() < 1e-12);
//! assert!((dependence_index(&a)?.x - 0.7 / 3.0).abs() < 1e-12);
//! # Ok::<(), ownconc_core::Error>(())
//! ```

pub mod comparative;
pub mod dependence;
pub mod dynamics;
mod error;
pub mod extensions;
pub mod indices;
pub mod matrix;
pub mod ownership;
pub mod spectral;
pub mod tol;
pub mod transport;

pub use comparative::{
    dilute, merge_investors, nonid_family, remove_stock, IndexTuple, NonIdentified, OperationDelta,
    PredictedTuple,
};
pub use dependence::{
    aggregate, chi2_divergence, dependence_index, merger_delta, Aggregation, DependenceReport,
    Partition,
};
pub use dynamics::{
    active_variance, expected_active_variance, fire_sale, isotropic_capacity, worst_case_shock,
    ActiveVarianceResult, FireSaleResult,
};
pub use error::{Error, Result};
pub use extensions::{renyi_summary, signed_dependence, RenyiSummary, SignedOwnership};
pub use indices::{
    herfindahl, micro_concentration, micro_decomposition, summary, support_bounds,
    ConcentrationSummary, MicroDecomposition, SupportBounds,
};
pub use matrix::Matrix;
pub use ownership::{Marginals, OwnershipMatrix, Profiles};
pub use spectral::{rho, spectral_identity_gap, whiten, SpectralResidual};
pub use transport::{
    family_2x2, is_extreme_point, is_feasible, max_micro, max_micro_with, min_micro,
    sparsity_score, Family2x2, MaxOptions, SolutionKind, SparsityScore, TransportSolution,
};
