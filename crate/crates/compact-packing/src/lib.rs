//! Computational objects for compact sphere packings with finitely many sizes.
//!
//! The crate is organised bottom-up:
//!
//! * [`angle_core`] realizes angle symbols `c_b^a` for a given radius
//!   assignment and evaluates their closed-form gradients.
//! * [`codes`] holds packing codes (a center label plus a labeled neighbor
//!   complex), fundamental sets and the `↓` relabeling.
//! * [`spherical`] works with labeled spherical triangulations: validation,
//!   edge comparison, membership in the sets `Q` and `W`, the `◁`/`⊴`
//!   relations and the witness decider for circle triangulations.
//! * [`packing`] loads concrete (periodic) packings, builds their contact
//!   hypergraph, verifies compactness in the plane and extracts codes.
//! * [`solver`] solves corona equations, runs the two-size enumeration and
//!   hosts the multistart and bootstrapping harnesses.

pub mod angle_core;
pub mod codes;
pub mod error;
pub mod fixtures;
pub mod packing;
pub mod solver;
pub mod spherical;

pub use error::{Error, Result};

/// Tolerance used for strict/equal comparisons of geodesic lengths and for
/// feasibility slack.
pub const LENGTH_TOL: f64 = 1e-9;
