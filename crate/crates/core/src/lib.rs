//! Galilean-invariant systems of conservation laws in one space dimension.
//!
//! * [`group`] — boost and reflection matrices of every family.
//! * [`thermo`] — rest-frame entropy closures, convex conjugates, pressures, `η`, `φ`, `η*`.
//! * [`systems`] — cones, velocity, fluxes, rest projection, Jacobians and characteristic speeds.
//! * [`verifier`] — randomized certification of the invariance and entropy identities.
//! * [`solver`] — first-order Rusanov finite volumes with entropy and frame-shift diagnostics.

// `!(x > 0.0)` is used on purpose throughout: NaN must fail domain tests.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fd;
pub mod group;
pub mod solver;
pub mod systems;
pub mod thermo;
pub mod verifier;

pub use error::{Error, Result};
pub use group::{Family, GroupRep, Kind, State};
pub use systems::GalileanSystem;
