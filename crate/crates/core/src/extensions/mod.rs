//! Sensitivity layer around the quadratic core: Rényi-order concentrations
//! and a dependence measure for books with short positions.

mod renyi;
mod signed;

pub use renyi::{renyi_concentration, renyi_summary, RenyiSummary, MAX_ALPHA};
pub use signed::{signed_dependence, SignedOwnership};
