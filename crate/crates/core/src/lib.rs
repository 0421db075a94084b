//! Symmetry reduction for constraint systems by isomorph-free generation of
//! prefix assignments.

pub mod assignment;
pub mod canon;
pub mod cli;
pub mod dist;
pub mod encode;
pub mod engine;
pub mod error;
pub mod gen;
pub mod oracle;
pub mod perm;
pub mod wreath;

pub use error::{Error, Result};
