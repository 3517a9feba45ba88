//! Analysis and synthesis of passive electromagnetic skins.
//!
//! The reflected field of a planar metasurface is computed from its
//! equivalent sheet currents with a closed form that stays accurate in the
//! radiative near field, and layouts are synthesized by matching cell
//! currents to phase-conjugation targets with a particle swarm.

pub mod constants;
pub mod error;
pub mod field;
pub mod geometry;
pub mod incident;
pub mod meta_atom;
pub mod pso;
pub mod quadrature;
pub mod synthesis;
pub mod vector;

pub use error::{Error, Result};
