//! Numerical tolerances shared across the crate and its tests.

/// Allowed deviation of a state's squared norm from one.
pub const NORM: f64 = 1e-12;

/// Per-step unitarity bound of the lattice map.
pub const UNITARITY_PER_STEP: f64 = 1e-13;

/// Envelope values below this magnitude are treated as outside the support.
pub const ENVELOPE_CUTOFF: f64 = 1e-12;

/// Largest admissible envelope magnitude at a non-periodic grid edge.
pub const EDGE_LEAK: f64 = 1e-8;

/// Minimum norm of an unnormalized eigenspinor before it is declared degenerate.
pub const DEGENERACY: f64 = 1e-12;

/// Probability below which a site counts as unoccupied in parity checks.
pub const PARITY_ZERO: f64 = 1e-14;

/// Relative mismatch tolerated when checking that a state's coin part is site-uniform.
pub const UNIFORM_COIN: f64 = 1e-10;

/// Default cap on the number of lattice sites in a walker window.
pub const MAX_WINDOW_SITES: usize = 1 << 26;

/// Packets are split where the distribution falls below this fraction of its peak.
pub const PACKET_GAP_FRACTION: f64 = 0.1;

/// Default central fraction of the predicted plateau used for flatness.
pub const PLATEAU_FRACTION: f64 = 0.8;
