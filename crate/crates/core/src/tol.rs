//! Numeric tolerances used across the crate.
//!
//! Every tolerance is centralized here so the relationships between them
//! stay visible. The ordering matters: clamp thresholds sit well below
//! membership tolerances, which sit below solver stopping tolerances.

/// Input probability masses may deviate from sum 1 by this much; inside
/// the tolerance the masses are renormalized, beyond it construction fails.
pub const MASS_INPUT_TOL: f64 = 1e-9;

/// Stored probability masses sum to 1 within this after renormalization.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// Relative singular value threshold for per-atom rank decisions: a
/// singular value counts as nonzero when it exceeds this times the largest.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Default membership tolerance for barycentric coordinates: both the
/// least-squares residual and negative weights up to this size pass, and
/// offending weights are clamped to zero with the rest renormalized.
pub const COORD_TOL: f64 = 1e-8;

/// Convex weights this far below zero still read as zero; anything more
/// negative is a constraint violation.
pub const WEIGHT_CLAMP: f64 = 1e-10;

/// Convex weights sum to 1 within this at every atom.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A barycentric coordinate counts as strictly positive above this when
/// deciding label admissibility.
pub const LABEL_POS_EPS: f64 = 1e-10;

/// Slack allowed in the comparison `lambda_i >= mu_i` of the canonical
/// labeling rule.
pub const LABEL_GE_SLACK: f64 = 1e-10;

/// Subdivision cell vertices reproduce the prefix-average formula from the
/// parent vertices to within this.
pub const CELL_REPRO_TOL: f64 = 1e-12;

/// Membership slack when checking that a map keeps its values inside the
/// declared convex body.
pub const BODY_TOL: f64 = 1e-8;
