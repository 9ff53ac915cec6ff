//! Immersed finite elements with nonconforming (Crouzeix–Raviart and rotated Q1)
//! element spaces for elliptic interface problems on Cartesian meshes.

pub mod basis;
pub mod error;
pub mod geometry;
pub mod ife;
pub mod quad;
pub mod study;
pub mod system;

pub use error::{Error, Result};
