//! Once-punctured-torus bundles: twist-word normal forms, Farey strips and
//! minimal invariant edge paths, saddle-built surfaces with their guts
//! decomposition, and layered ideal triangulations with volume.

pub mod error;
pub mod farey;
pub mod sl2z;
pub mod surfaces;
pub mod triangulation;

pub use error::{Error, Result};
