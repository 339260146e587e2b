//! Quantum dynamical-map families and Markovianity diagnostics.
//!
//! The crate builds closed-form dynamical maps (Pauli semigroups and their
//! mixture, projector families `μ(t)·𝟙 + (1 − μ(t))·E`), splits the projector
//! semigroup into two non-Markovian components, and checks Markovianity
//! through CP-divisibility, the trace-distance (BLP) witness, depolarizing
//! channel capacity and waiting-time densities. Closed forms are
//! cross-checked against RK4 propagation of time-local generators and a
//! second-order solver for the memory-kernel master equation.
//!
//! Operators are vectorized by stacking columns throughout, so the
//! superoperator of `ρ ↦ AρB` is `Bᵀ ⊗ A`.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod diagnostics;
pub mod family;
pub mod generator;
pub mod matcore;
pub mod mixture;
pub mod par;
pub mod quad;

pub use channel::{ChoiMatrix, DensityMatrix, Superoperator};
pub use family::{DynamicalMapFamily, MemoryKernel, SampledFamily};
pub use generator::{GkslGenerator, PauliRates};
pub use matcore::{ComplexMatrix, HermEigResult};
pub use mixture::{GProfile, MixtureDecomposition};
