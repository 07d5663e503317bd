//! Finite-element simulation of incompressible flow in a compliant 2D vessel.
//!
//! The fluid is solved in ALE form on a mesh that follows the wall through a
//! harmonic extension of the wall displacement. The wall obeys the
//! generalised string model, and the two are coupled strongly by relaxed
//! subiterations within each time step. A three-element Windkessel closes
//! the outflow.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod ale;
pub mod coupler;
pub mod fluid;
pub mod mesh;
pub mod numerics;
pub mod params;
pub mod run;
pub mod scenario;
pub mod simulation;
pub mod wall;
pub mod windkessel;
