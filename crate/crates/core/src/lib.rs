//! Quasitensor functors on the representation category of `SU_μ(2)` and the
//! spectral *-algebras they generate.

pub mod error;
pub mod numerics;
pub mod qfunctor;
pub mod repcat;
pub mod spectral;
pub mod subgroup;
pub mod tlcat;

pub use error::{Error, Result};
