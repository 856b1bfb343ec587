//! Exact arithmetic for the odd-dimensional orthogonal groups O_{2n+1}(R)
//! and odd-dimensional unitary groups U_{2n+1}(R,Δ) over finite commutative
//! rings, together with machine-verifiable certificates expressing
//! entry-derived elementary matrices as short products of elementary
//! conjugates.
//!
//! Everything is computed in exact modular arithmetic; there are no
//! tolerances anywhere. The `parallel` feature (on by default) runs batch
//! workloads on rayon; without it the same code paths run sequentially.

pub mod cert;
pub mod error;
pub mod heis;
pub mod levels;
pub mod ortho;
pub mod ortho_decomp;
pub mod par;
pub mod ring;
pub mod selftest;
pub mod theta;
pub mod unitary;
pub mod unitary_decomp;
pub mod word;

pub use error::{Error, Result};
pub use ring::{Involution, Ring, RingElem, RingKind, RingSpec};
pub use theta::ThetaMatrix;
