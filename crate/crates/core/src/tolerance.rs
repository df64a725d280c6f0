//! Global numerical tolerances.
//!
//! Three tiers, conditioned by dense f64 arithmetic at dim ≤ 4096:
//! construction identities, trace identities, and identities that pass
//! through an eigendecomposition.

/// Identities that only involve operator construction (sums of Kronecker
/// products), e.g. `H0 + I = H` or Hermiticity of built operators.
pub const CONSTRUCTION: f64 = 1e-12;

/// Identities between traces and their closed forms.
pub const TRACE: f64 = 1e-10;

/// Identities that depend on a computed eigendecomposition.
pub const DECOMPOSITION: f64 = 1e-9;

/// Relative tolerance for clustering degenerate levels, in units of the
/// global level width.
pub const LEVEL_CLUSTER: f64 = 1e-9;

/// Occupations below this are treated as zero in the spectral temperature
/// (the `p ln p -> 0` convention).
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-300;

/// Minimum excited-state weight `1 - p0` for a spectral temperature.
pub const MIN_EXCITED_WEIGHT: f64 = 1e-12;
