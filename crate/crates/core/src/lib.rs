//! Finite-dimensional numerics for asymptotic spectral measures.
//!
//! An asymptotic spectral measure (ASM) is a family `{A_ħ}` of POVMs indexed
//! by a classicity parameter `ħ ∈ (0,1]` whose projectivity defect
//! `‖A_ħ(Δ₁∩Δ₂) − A_ħ(Δ₁)A_ħ(Δ₂)‖` vanishes as `ħ → 0`. Integrating
//! against such a family gives a positive asymptotic morphism. This crate
//! carries the pure algorithmic layer:
//!
//! * [`operator`]: dense complex matrices, Hermitian eigendecomposition,
//!   functional calculus, singular values.
//! * [`measure`]: atomic POVM/PVM model, operator-valued integration,
//!   Naimark dilation, Born probabilities.
//! * [`asymptotic`]: ħ-grids, ASM families and defect functionals.
//! * [`smearing`]: ASMs obtained by smearing a PVM with confidence kernels.
//! * [`quasiprojector`]: straightening and semiclassical state counting.
//! * [`spin`]: spin-½ POVMs as points of the unit ball, CHSH experiments.
//! * [`wick`]: Toeplitz operators on truncated Fock space and the
//!   winding-number index witness.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod asymptotic;
pub mod error;
pub mod measure;
pub mod operator;
pub mod quasiprojector;
pub mod smearing;
pub mod spin;
pub mod wick;

pub use error::{Error, Result};
pub use num_complex::Complex64;
