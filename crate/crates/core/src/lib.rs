//! Harmonic analysis for the inverse Gaussian measure `dγ₋₁ = π^{n/2} e^{|x|²} dx`.
//!
//! The crate covers Hermite function expansions, the heat semigroup and its
//! kernels, spectral multipliers, singular integral kernels (Riesz
//! transforms, negative and imaginary powers), principal value evaluation,
//! and numerical certification of kernel bounds on lattices.

pub mod certify;
pub mod error;
pub mod hermite;
pub mod multi_index;
pub mod pv;
pub mod kernels;
pub mod quadrature;
pub mod regions;
pub mod semigroup;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use hermite::{EnvelopedFunction, HermiteExpansion};
pub use multi_index::MultiIndex;
