//! Executable PPAD reductions and the machinery around them.
//!
//! The crate turns END-OF-A-LINE instances into locally computable variants
//! ([`local_eol`]), Lipschitz Brouwer functions ([`brouwer`]) and
//! approximate-equilibrium games ([`games`], [`bimatrix`]), and ships small
//! solvers ([`solvers`]) plus brute-force oracles that check every
//! construction at desk scale.

pub mod bimatrix;
pub mod brouwer;
pub mod codes;
pub mod eol;
pub mod error;
pub mod games;
pub mod local_eol;
pub mod smallbias;
pub mod solvers;

pub use error::{Error, Result};
