//! Spectral data of KP-II multiline solitons from totally non-negative
//! Grassmannian points.
//!
//! The pipeline runs Le-tableau -> trivalent plabic network -> boundary
//! measurement -> soliton kernel -> dual MM-curve -> divisor and Abel map.
//! [`theoremlab`] enumerates markings of Schubert-cell Le-graphs and checks
//! that none of them is compatible with a Dubrovin-Natanzon divisor.

pub mod catalog;
pub mod curve;
pub mod divisor;
pub mod error;
pub mod lecore;
pub mod linalg;
pub mod network;
pub mod num;
pub mod proj;
pub mod sampling;
pub mod singular;
pub mod soliton;
pub mod theoremlab;

pub use error::{Error, Result};
